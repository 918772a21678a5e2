#include "toeporb/toeplitz.hpp"

#include <algorithm>
#include <sstream>

#include "toeporb/arith.hpp"

namespace toeporb::toeplitz {

namespace {

constexpr const char* kGlyphs = "0123456789abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ";
constexpr int kMaxGlyphAlphabet = 62;

int glyph_index(char c) {
  const char* g = kGlyphs;
  for (int i = 0; i < kMaxGlyphAlphabet; ++i)
    if (g[i] == c) return i;
  return -1;
}

}  // namespace

ToeplitzSkeleton::ToeplitzSkeleton(int alphabet_size, std::vector<Stage> stages,
                                   Symbol completion_symbol,
                                   std::map<std::string, std::string> metadata)
    : alphabet_size_(alphabet_size),
      stages_(std::move(stages)),
      completion_symbol_(completion_symbol),
      metadata_(std::move(metadata)) {
  validate();
}

void ToeplitzSkeleton::validate() const {
  if (alphabet_size_ < 1) throw ContractError("skeleton: alphabet must be non-empty");
  if (stages_.empty()) throw ContractError("skeleton: at least one stage required");
  if (completion_symbol_ < 0 || completion_symbol_ >= alphabet_size_)
    throw ContractError("skeleton: completion symbol outside alphabet");
  std::int64_t prev = 0;
  for (std::size_t s = 0; s < stages_.size(); ++s) {
    const Stage& st = stages_[s];
    if (st.period < 1 || st.word.size() != static_cast<std::size_t>(st.period))
      throw ContractError("skeleton: word length must equal the period");
    if (s > 0 && st.period % prev != 0)
      throw ContractError("skeleton: periods must be nested (n_t | n_{t+1})");
    for (Symbol v : st.word)
      if (v != kHole && (v < 0 || v >= alphabet_size_))
        throw ContractError("skeleton: symbol outside alphabet");
    if (s > 0) {
      const Stage& before = stages_[s - 1];
      for (std::int64_t j = 0; j < st.period; ++j) {
        const Symbol b = before.word[static_cast<std::size_t>(j % before.period)];
        if (b != kHole && st.word[static_cast<std::size_t>(j)] != b)
          throw ContractError("skeleton: defined position changed at stage " +
                              std::to_string(s + 1) + ", j=" + std::to_string(j));
      }
    }
    prev = st.period;
  }
}

Symbol ToeplitzSkeleton::stage_symbol(int t, std::int64_t j) const {
  const Stage& st = stage(t);
  return st.word[static_cast<std::size_t>(floor_mod(j, st.period))];
}

Symbol ToeplitzSkeleton::eval(std::int64_t j) const {
  // monotone consistency makes the last stage authoritative
  const Stage& last = stages_.back();
  const Symbol v = last.word[static_cast<std::size_t>(floor_mod(j, last.period))];
  if (v != kHole) return v;
  if (window_base_ != nullptr) {
    const int m = window_radius_;
    std::vector<Symbol> tuple(static_cast<std::size_t>(2 * m + 1));
    for (int i = -m; i <= m; ++i)
      tuple[static_cast<std::size_t>(i + m)] = window_base_->eval(j + i);
    return static_cast<Symbol>(encode_window(tuple, window_base_->alphabet_size()));
  }
  return completion_symbol_;
}

std::int64_t ToeplitzSkeleton::holes(int t) const {
  const Stage& st = stage(t);
  return std::count(st.word.begin(), st.word.end(), kHole);
}

std::vector<std::int64_t> ToeplitzSkeleton::hole_positions(int t) const {
  const Stage& st = stage(t);
  std::vector<std::int64_t> out;
  for (std::int64_t j = 0; j < st.period; ++j)
    if (st.word[static_cast<std::size_t>(j)] == kHole) out.push_back(j);
  return out;
}

BigRat ToeplitzSkeleton::tower_diameter(int t) const {
  const Stage& st = stage(t);
  const std::int64_t n = st.period;
  const auto holes = hole_positions(t);
  if (holes.empty()) return BigRat(0);

  // cyclic distance from every level to the nearest aperiodic position
  check_memory_budget(static_cast<std::uint64_t>(n) * 8, "tower_diameter");
  std::vector<std::int64_t> dist(static_cast<std::size_t>(n), n);
  for (std::int64_t h : holes) dist[static_cast<std::size_t>(h)] = 0;
  for (int pass = 0; pass < 2; ++pass) {  // two wrapped sweeps settle the cycle
    for (std::int64_t j = 0; j < n; ++j) {
      const std::int64_t p = dist[static_cast<std::size_t>((j + n - 1) % n)] + 1;
      if (p < dist[static_cast<std::size_t>(j)]) dist[static_cast<std::size_t>(j)] = p;
    }
    for (std::int64_t j = n - 1; j >= 0; --j) {
      const std::int64_t p = dist[static_cast<std::size_t>((j + 1) % n)] + 1;
      if (p < dist[static_cast<std::size_t>(j)]) dist[static_cast<std::size_t>(j)] = p;
    }
  }

  std::int64_t max_d = 0;
  for (std::int64_t d : dist) max_d = std::max(max_d, d);
  std::map<std::int64_t, std::int64_t> by_exp;  // distance -> level count
  for (std::int64_t d : dist) ++by_exp[d];
  BigInt num = 0;
  for (const auto& [d, count] : by_exp) num += BigInt(count) << static_cast<unsigned>(max_d - d);
  return BigRat(num, BigInt(1) << static_cast<unsigned>(max_d));
}

HoleReport ToeplitzSkeleton::hole_report(const polyres::PolynomialSpec& P, Rat64 threshold) const {
  HoleReport report;
  report.poly = P.to_string();
  report.threshold = threshold;
  const bool is_square = P == polyres::PolynomialSpec::square();
  for (int t = 1; t <= stage_count(); ++t) {
    HoleStageStats s;
    s.period = period(t);
    s.holes = holes(t);
    s.hole_density = Rat64(s.holes, s.period);
    const auto f = arith::factorize(s.period);
    s.totient_ratio = Rat64(s.holes, arith::euler_phi(f));
    std::int64_t rho = 1;
    if (is_square) {
      for (const auto& [p, e] : f.prime_powers)
        rho = checked_mul(rho, polyres::square_rho_max_closed(p, e));
    } else {
      rho = polyres::rho_max_multiplicative(P, f);
    }
    s.poly_ratio = Rat64(checked_mul(s.holes, rho), s.period);
    report.stages.push_back(s);
  }
  auto consistent = [&](auto&& ratio_of) {
    for (std::size_t i = 1; i < report.stages.size(); ++i)
      if (ratio_of(report.stages[i]) > ratio_of(report.stages[i - 1])) return false;
    return ratio_of(report.stages.back()) <= threshold;
  };
  report.regularity_consistent = consistent([](const HoleStageStats& s) { return s.hole_density; });
  report.totient_consistent = consistent([](const HoleStageStats& s) { return s.totient_ratio; });
  report.poly_consistent = consistent([](const HoleStageStats& s) { return s.poly_ratio; });
  return report;
}

std::int64_t encode_window(const std::vector<Symbol>& symbols, int alphabet_size) {
  std::int64_t code = 0;
  for (Symbol s : symbols) {
    if (s < 0 || s >= alphabet_size) throw ContractError("encode_window: symbol out of range");
    code = code * alphabet_size + s;
  }
  return code;
}

ToeplitzSkeleton ToeplitzSkeleton::window(int m) const {
  if (m < 0) throw ContractError("window: radius must be >= 0");
  const int width = 2 * m + 1;
  double pw = 1;
  for (int i = 0; i < width; ++i) pw *= alphabet_size_;
  if (pw > static_cast<double>(1 << 24))
    throw ResourceError("window: tuple alphabet too large", "window-alphabet");
  const auto tuple_alphabet = static_cast<int>(pw);

  std::uint64_t bytes = 0;
  for (const Stage& st : stages_) bytes += static_cast<std::uint64_t>(st.period) * sizeof(Symbol);
  check_memory_budget(2 * bytes, "window");

  std::vector<Stage> out_stages;
  out_stages.reserve(stages_.size());
  for (const Stage& st : stages_) {
    Stage w;
    w.period = st.period;
    w.word.resize(static_cast<std::size_t>(st.period));
    std::vector<Symbol> tuple(static_cast<std::size_t>(width));
    for (std::int64_t j = 0; j < st.period; ++j) {
      bool defined = true;
      for (int i = -m; i <= m; ++i) {
        const Symbol v = st.word[static_cast<std::size_t>(floor_mod(j + i, st.period))];
        if (v == kHole) {
          defined = false;
          break;
        }
        tuple[static_cast<std::size_t>(i + m)] = v;
      }
      w.word[static_cast<std::size_t>(j)] =
          defined ? static_cast<Symbol>(encode_window(tuple, alphabet_size_)) : kHole;
    }
    out_stages.push_back(std::move(w));
  }
  ToeplitzSkeleton out(tuple_alphabet, std::move(out_stages), 0, metadata_);
  out.window_base_ = std::make_shared<ToeplitzSkeleton>(*this);
  out.window_radius_ = m;
  return out;
}

std::string ToeplitzSkeleton::to_text() const {
  if (window_base_ != nullptr)
    throw ContractError("to_text: window views are transient and not serializable");
  if (alphabet_size_ > kMaxGlyphAlphabet)
    throw ContractError("to_text: alphabet too large for the glyph table");
  std::ostringstream os;
  os << "alphabet: " << std::string(kGlyphs).substr(0, static_cast<std::size_t>(alphabet_size_))
     << "\n";
  os << "completion: " << kGlyphs[completion_symbol_] << "\n";
  for (const auto& [k, v] : metadata_) os << "meta: " << k << "=" << v << "\n";
  for (const Stage& st : stages_) {
    os << st.period << ":";
    for (Symbol s : st.word) os << (s == kHole ? '?' : kGlyphs[s]);
    os << "\n";
  }
  return os.str();
}

ToeplitzSkeleton ToeplitzSkeleton::from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  int alphabet = -1;
  Symbol completion = 0;
  std::map<std::string, std::string> metadata;
  std::vector<Stage> stages;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("alphabet: ", 0) == 0) {
      const std::string glyphs = line.substr(10);
      alphabet = static_cast<int>(glyphs.size());
      if (glyphs != std::string(kGlyphs).substr(0, glyphs.size()))
        throw ContractError("from_text: unexpected alphabet glyphs");
      continue;
    }
    if (line.rfind("completion: ", 0) == 0) {
      if (line.size() != 13) throw ContractError("from_text: bad completion line");
      completion = glyph_index(line[12]);
      if (completion < 0) throw ContractError("from_text: unknown completion glyph");
      continue;
    }
    if (line.rfind("meta: ", 0) == 0) {
      const std::string kv = line.substr(6);
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos) throw ContractError("from_text: bad meta line");
      metadata[kv.substr(0, eq)] = kv.substr(eq + 1);
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) throw ContractError("from_text: bad stage line");
    Stage st;
    st.period = std::stoll(line.substr(0, colon));
    const std::string word = line.substr(colon + 1);
    if (static_cast<std::int64_t>(word.size()) != st.period)
      throw ContractError("from_text: word length does not match the period");
    st.word.reserve(word.size());
    for (char c : word) {
      if (c == '?') {
        st.word.push_back(kHole);
      } else {
        const int idx = glyph_index(c);
        if (idx < 0) throw ContractError("from_text: unknown glyph");
        st.word.push_back(idx);
      }
    }
    stages.push_back(std::move(st));
  }
  if (alphabet < 0) throw ContractError("from_text: missing alphabet header");
  return ToeplitzSkeleton(alphabet, std::move(stages), completion, std::move(metadata));
}

}  // namespace toeporb::toeplitz
