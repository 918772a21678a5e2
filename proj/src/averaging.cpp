#include "toeporb/averaging.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace toeporb::averaging {

namespace {

int g_thread_cap = 1;

constexpr std::int64_t kChunk = 1 << 21;
constexpr std::size_t kHistogramCap = 1 << 22;

/// Evaluates the observable window ending policy through the skeleton.
double observe(const toeplitz::ToeplitzSkeleton& sk, const ObservableSpec& F, std::int64_t pos) {
  if (F.radius == 0) {
    return F.table[static_cast<std::size_t>(sk.eval(pos))];
  }
  std::int64_t code = 0;
  for (int i = -F.radius; i <= F.radius; ++i) code = code * F.alphabet_size + sk.eval(pos + i);
  return F.table[static_cast<std::size_t>(code)];
}

std::int64_t observe_code(const toeplitz::ToeplitzSkeleton& sk, const ObservableSpec& F,
                          std::int64_t pos) {
  std::int64_t code = 0;
  for (int i = -F.radius; i <= F.radius; ++i) code = code * F.alphabet_size + sk.eval(pos + i);
  return code;
}

/// Exact accumulation: integer counts per table cell, merged across chunks
/// in ascending order. Falls back to compensated sums for huge tables.
struct Accumulator {
  std::vector<std::int64_t> counts;
  long double sum = 0.0L, comp = 0.0L;
  std::int64_t terms = 0;
  bool use_histogram = false;

  explicit Accumulator(std::size_t table_size) {
    use_histogram = table_size <= kHistogramCap;
    if (use_histogram) counts.assign(table_size, 0);
  }

  void add_code(std::int64_t code) {
    ++counts[static_cast<std::size_t>(code)];
    ++terms;
  }

  void add_value(double v) {
    const long double y = static_cast<long double>(v) - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    ++terms;
  }

  void merge(const Accumulator& other) {
    terms += other.terms;
    if (use_histogram) {
      for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
    } else {
      add_value(static_cast<double>(other.sum));
      --terms;  // add_value bumped it
    }
  }

  double finish(const ObservableSpec& F, std::int64_t normalization) const {
    if (normalization == 0) return 0.0;
    long double s = 0.0L, c = 0.0L;
    if (use_histogram) {
      for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] == 0) continue;
        const long double y =
            static_cast<long double>(counts[i]) * static_cast<long double>(F.table[i]) - c;
        const long double t = s + y;
        c = (t - s) - y;
        s = t;
      }
    } else {
      s = sum;
    }
    return static_cast<double>(s / static_cast<long double>(normalization));
  }
};

template <typename ChunkFn>
Accumulator run_chunked(const ObservableSpec& F, std::int64_t lo, std::int64_t hi,
                        ChunkFn&& chunk_fn) {
  Accumulator total(F.size());
  if (lo > hi) return total;
  const std::int64_t span = hi - lo + 1;
  const auto nchunks = static_cast<std::int64_t>((span + kChunk - 1) / kChunk);
  const int workers = std::min<std::int64_t>(std::max(1, g_thread_cap), nchunks);
  if (workers <= 1) {
    for (std::int64_t c = 0; c < nchunks; ++c) {
      Accumulator acc(F.size());
      chunk_fn(lo + c * kChunk, std::min(hi, lo + (c + 1) * kChunk - 1), acc);
      total.merge(acc);
    }
    return total;
  }
  std::atomic<std::int64_t> next{0};
  // chunk results are collected per index, merged ascending
  std::vector<std::optional<Accumulator>> slots(static_cast<std::size_t>(nchunks));
  std::vector<std::thread> pool;
  std::mutex mu;
  std::exception_ptr failure;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      try {
        while (true) {
          const std::int64_t c = next.fetch_add(1);
          if (c >= nchunks) break;
          Accumulator acc(F.size());
          chunk_fn(lo + c * kChunk, std::min(hi, lo + (c + 1) * kChunk - 1), acc);
          std::lock_guard<std::mutex> lock(mu);
          slots[static_cast<std::size_t>(c)] = std::move(acc);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(nchunks);
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  for (auto& slot : slots) total.merge(*slot);
  return total;
}

}  // namespace

ObservableSpec::ObservableSpec(int radius_, int alphabet_size_, std::vector<double> table_)
    : radius(radius_), alphabet_size(alphabet_size_), table(std::move(table_)) {
  if (radius < 0) throw ContractError("ObservableSpec: radius must be >= 0");
  if (alphabet_size < 1) throw ContractError("ObservableSpec: empty alphabet");
  std::size_t expected = 1;
  for (int i = 0; i < 2 * radius + 1; ++i) {
    expected *= static_cast<std::size_t>(alphabet_size);
    if (expected > (std::size_t{1} << 40)) throw ContractError("ObservableSpec: table too large");
  }
  if (table.size() != expected)
    throw ContractError("ObservableSpec: table must cover every word of length 2m+1");
}

ObservableSpec ObservableSpec::parity() { return ObservableSpec(0, 2, {1.0, -1.0}); }

ObservableSpec ObservableSpec::constant(double c, int alphabet_size) {
  return ObservableSpec(0, alphabet_size, std::vector<double>(static_cast<std::size_t>(alphabet_size), c));
}

ObservableSpec ObservableSpec::indicator(int symbol, int alphabet_size) {
  std::vector<double> t(static_cast<std::size_t>(alphabet_size), 0.0);
  t.at(static_cast<std::size_t>(symbol)) = 1.0;
  return ObservableSpec(0, alphabet_size, std::move(t));
}

double ObservableSpec::sup_norm() const {
  double s = 0;
  for (double v : table) s = std::max(s, std::abs(v));
  return s;
}

std::string index_kind_name(IndexKind kind) {
  switch (kind) {
    case IndexKind::kPrimes:
      return "primes";
    case IndexKind::kSemiprimes:
      return "semiprimes";
    case IndexKind::kPolynomial:
      return "polynomial";
  }
  return "?";
}

IndexKind index_kind_from_name(const std::string& name) {
  if (name == "primes") return IndexKind::kPrimes;
  if (name == "semiprimes") return IndexKind::kSemiprimes;
  if (name == "polynomial" || name == "poly") return IndexKind::kPolynomial;
  throw ContractError("unknown index kind: " + name);
}

void set_thread_cap(int threads) { g_thread_cap = std::max(1, threads); }
int thread_cap() { return g_thread_cap; }

AverageReport prime_average(const toeplitz::ToeplitzSkeleton& skeleton, const ObservableSpec& F,
                            const arith::PrimeTable& table, std::int64_t N, std::int64_t r) {
  if (N < 1) throw ContractError("prime_average: N must be >= 1");
  if (N > table.limit()) throw std::out_of_range("prime_average: N exceeds the sieve budget");
  if (F.alphabet_size != skeleton.alphabet_size())
    throw ContractError("prime_average: observable alphabet mismatch");
  auto acc = run_chunked(F, 2, N, [&](std::int64_t lo, std::int64_t hi, Accumulator& a) {
    if (a.use_histogram) {
      table.for_each_prime(lo, hi,
                           [&](std::int64_t p) { a.add_code(observe_code(skeleton, F, p + r)); });
    } else {
      table.for_each_prime(lo, hi,
                           [&](std::int64_t p) { a.add_value(observe(skeleton, F, p + r)); });
    }
  });
  AverageReport rep;
  rep.kind = IndexKind::kPrimes;
  rep.N = N;
  rep.shift = r;
  rep.normalization = table.prime_pi(N);
  rep.value = acc.finish(F, rep.normalization);
  return rep;
}

AverageReport semiprime_average(const toeplitz::ToeplitzSkeleton& skeleton,
                                const ObservableSpec& F, const arith::PrimeTable& table,
                                std::int64_t N, std::int64_t r) {
  if (N < 1) throw ContractError("semiprime_average: N must be >= 1");
  if (N > table.limit()) throw std::out_of_range("semiprime_average: N exceeds the sieve budget");
  if (F.alphabet_size != skeleton.alphabet_size())
    throw ContractError("semiprime_average: observable alphabet mismatch");
  // single ascending pass over the outer prime p1
  Accumulator acc(F.size());
  std::int64_t norm = 0;
  arith::for_each_semiprime_pair(table, N, [&](std::int64_t p1, std::int64_t p2) {
    ++norm;
    if (acc.use_histogram) {
      acc.add_code(observe_code(skeleton, F, p1 * p2 + r));
    } else {
      acc.add_value(observe(skeleton, F, p1 * p2 + r));
    }
  });
  AverageReport rep;
  rep.kind = IndexKind::kSemiprimes;
  rep.N = N;
  rep.shift = r;
  rep.normalization = norm;
  rep.value = acc.finish(F, norm);
  return rep;
}

AverageReport poly_average(const toeplitz::ToeplitzSkeleton& skeleton,
                           const polyres::PolynomialSpec& P, const ObservableSpec& F,
                           std::int64_t N, std::int64_t r) {
  if (N < 1) throw ContractError("poly_average: N must be >= 1");
  if (F.alphabet_size != skeleton.alphabet_size())
    throw ContractError("poly_average: observable alphabet mismatch");
  const std::int64_t n_last = skeleton.period(skeleton.stage_count());
  auto acc = run_chunked(F, 1, N, [&](std::int64_t lo, std::int64_t hi, Accumulator& a) {
    for (std::int64_t m = lo; m <= hi; ++m) {
      // reduce through the last period: observables only see x via eval
      const std::int64_t pos = P.eval_mod(m, n_last) + floor_mod(r, n_last);
      if (a.use_histogram) {
        a.add_code(observe_code(skeleton, F, pos));
      } else {
        a.add_value(observe(skeleton, F, pos));
      }
    }
  });
  AverageReport rep;
  rep.kind = IndexKind::kPolynomial;
  rep.poly = P.to_string();
  rep.N = N;
  rep.shift = r;
  rep.normalization = N;
  rep.value = acc.finish(F, N);
  return rep;
}

AverageReport square_scale_average(const toeplitz::ToeplitzSkeleton& skeleton,
                                   const ObservableSpec& F, std::int64_t scale, std::int64_t r) {
  if (scale < 1) throw ContractError("square_scale_average: scale must be >= 1");
  if (F.alphabet_size != skeleton.alphabet_size())
    throw ContractError("square_scale_average: observable alphabet mismatch");
  Accumulator acc(F.size());
  std::int64_t terms = 0;
  for (std::int64_t m = 0; m * m < scale; ++m) {
    ++terms;
    if (acc.use_histogram) {
      acc.add_code(observe_code(skeleton, F, m * m + r));
    } else {
      acc.add_value(observe(skeleton, F, m * m + r));
    }
  }
  AverageReport rep;
  rep.kind = IndexKind::kPolynomial;
  rep.poly = "m^2";
  rep.N = scale;
  rep.shift = r;
  rep.normalization = terms;
  rep.value = acc.finish(F, terms);
  return rep;
}

PredictedLimit predicted_prime_limit(const toeplitz::ToeplitzSkeleton& skeleton, int stage,
                                     const ObservableSpec& F, std::int64_t r) {
  const toeplitz::ToeplitzSkeleton* view = &skeleton;
  std::optional<toeplitz::ToeplitzSkeleton> windowed;
  if (F.radius > 0) {
    windowed.emplace(skeleton.window(F.radius));
    view = &*windowed;
  }
  const auto& st = view->stage(stage);
  const std::int64_t n = st.period;
  const std::int64_t phi = arith::euler_phi(n);
  long double sum = 0.0L;
  for (std::int64_t a = 0; a < n; ++a) {
    const toeplitz::Symbol w = st.word[static_cast<std::size_t>(a)];
    if (w == toeplitz::kHole) continue;
    if (gcd64(floor_mod(a - r, n), n) != 1) continue;
    sum += static_cast<long double>(F.table[static_cast<std::size_t>(w)]);
  }
  PredictedLimit out;
  out.stage_modulus = n;
  out.holes = view->holes(stage);
  out.value = static_cast<double>(sum / static_cast<long double>(phi));
  const double ratio = 8.0 * static_cast<double>(out.holes) / static_cast<double>(phi);
  out.error_bound = F.sup_norm() * std::min(2.0, ratio);
  return out;
}

PredictedLimit predicted_poly_limit(const toeplitz::ToeplitzSkeleton& skeleton,
                                    const polyres::PolynomialSpec& P, int stage,
                                    const ObservableSpec& F, std::int64_t r) {
  const toeplitz::ToeplitzSkeleton* view = &skeleton;
  std::optional<toeplitz::ToeplitzSkeleton> windowed;
  if (F.radius > 0) {
    windowed.emplace(skeleton.window(F.radius));
    view = &*windowed;
  }
  const auto& st = view->stage(stage);
  const std::int64_t n = st.period;
  const auto profile = polyres::residue_profile(P, n);
  long double sum = 0.0L;
  for (std::int64_t a = 0; a < n; ++a) {
    const toeplitz::Symbol w = st.word[static_cast<std::size_t>(a)];
    if (w == toeplitz::kHole) continue;
    const std::int64_t rho = profile.rho_of(a - r);
    if (rho == 0) continue;
    sum += static_cast<long double>(rho) * static_cast<long double>(F.table[static_cast<std::size_t>(w)]);
  }
  PredictedLimit out;
  out.stage_modulus = n;
  out.holes = view->holes(stage);
  out.value = static_cast<double>(sum / static_cast<long double>(n));
  const double ratio = 8.0 * static_cast<double>(out.holes) *
                       static_cast<double>(profile.rho_max) / static_cast<double>(n);
  out.error_bound = F.sup_norm() * std::min(2.0, ratio);
  return out;
}

std::vector<OscillationPoint> oscillation_witness(const toeplitz::ToeplitzSkeleton& skeleton,
                                                  IndexKind kind, const std::vector<int>& stages,
                                                  const ObservableSpec& F,
                                                  const arith::PrimeTable& table, std::int64_t r) {
  std::vector<OscillationPoint> out;
  for (int t : stages) {
    const std::int64_t scale = skeleton.period(t);
    OscillationPoint pt;
    pt.stage = t;
    pt.scale = scale;
    switch (kind) {
      case IndexKind::kPrimes:
        pt.value = prime_average(skeleton, F, table, scale, r).value;
        break;
      case IndexKind::kSemiprimes:
        pt.value = semiprime_average(skeleton, F, table, scale, r).value;
        break;
      case IndexKind::kPolynomial:
        pt.value = square_scale_average(skeleton, F, scale, r).value;
        break;
    }
    if (!out.empty()) pt.gap = std::abs(pt.value - out.back().value);
    out.push_back(pt);
  }
  return out;
}

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

void write_reports_csv(std::ostream& os, const std::vector<AverageReport>& reports,
                       const std::string& config_hash) {
  os << "kind,N,r,value,normalization,predicted,error_bound\n";
  for (const auto& rep : reports) {
    os << index_kind_name(rep.kind);
    if (!rep.poly.empty()) os << "[" << rep.poly << "]";
    os << "," << rep.N << "," << rep.shift << "," << format_double(rep.value) << ","
       << rep.normalization << "," << (rep.predicted ? format_double(*rep.predicted) : "") << ","
       << (rep.error_bound ? format_double(*rep.error_bound) : "") << "\n";
  }
  os << "# config_hash=" << config_hash << "\n";
  os << "# toeporb_version=" << kVersion << "\n";
}

std::string report_to_json(const AverageReport& report) {
  nlohmann::ordered_json j;
  j["kind"] = index_kind_name(report.kind);
  if (!report.poly.empty()) j["poly"] = report.poly;
  j["N"] = report.N;
  j["r"] = report.shift;
  j["value"] = report.value;
  j["normalization"] = report.normalization;
  if (report.predicted) j["predicted"] = *report.predicted;
  if (report.error_bound) j["error_bound"] = *report.error_bound;
  return j.dump();
}

}  // namespace toeporb::averaging
