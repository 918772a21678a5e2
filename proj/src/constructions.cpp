#include "toeporb/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "toeporb/polyres.hpp"

namespace toeporb::constructions {

using toeplitz::kHole;
using toeplitz::Stage;
using toeplitz::Symbol;
using toeplitz::ToeplitzSkeleton;

namespace {

/// Lazily grown shared sieve; rebuilt with headroom when a larger limit is
/// first requested.
class SieveCache {
 public:
  const arith::PrimeTable& at_least(std::int64_t limit) {
    limit = std::max<std::int64_t>(limit, 64);
    if (!table_ || table_->limit() < limit) {
      const std::int64_t target = table_ ? std::max(limit, table_->limit() * 2) : limit;
      table_.emplace(target);
    }
    return *table_;
  }

 private:
  std::optional<arith::PrimeTable> table_;
};

std::string big_rat_str(const BigRat& r) { return rat_str(r); }

ConditionRecord make_cond(std::string name, std::string lhs, std::string relation,
                          std::string rhs, bool pass, std::string note = "") {
  return ConditionRecord{std::move(name), std::move(lhs), std::move(rhs), std::move(relation),
                         pass, std::move(note)};
}

BigRat rat_pow(const Rat64& q, int t) {
  BigRat r = 1;
  const BigRat base(BigInt(q.numerator()), BigInt(q.denominator()));
  for (int i = 0; i < t; ++i) r *= base;
  return r;
}

/// 1 - sum_{l=1..t} c^{-l}, exactly.
BigRat hole_floor_fraction(std::int64_t c, int t) {
  BigRat sum = 0;
  BigInt power = 1;
  for (int l = 1; l <= t; ++l) {
    power *= c;
    sum += BigRat(BigInt(1), power);
  }
  return BigRat(1) - sum;
}

Symbol arb_fill(const BuildConfig& cfg, int stage, std::int64_t pos, int alphabet) {
  if (cfg.fill_policy == FillPolicy::kAlternatingTarget) return 0;
  const std::uint64_t h = splitmix64(cfg.seed ^ (static_cast<std::uint64_t>(stage) << 48) ^
                                     static_cast<std::uint64_t>(pos));
  return static_cast<Symbol>(h % static_cast<std::uint64_t>(alphabet));
}

std::vector<bool> noncoprime_mask(std::int64_t n, const arith::Factorization& f) {
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (const auto& [p, e] : f.prime_powers)
    for (std::int64_t i = 0; i < n; i += p) mask[static_cast<std::size_t>(i)] = true;
  return mask;
}

std::vector<bool> semiprime_mask(const arith::PrimeTable& table, std::int64_t below) {
  std::vector<bool> mask(static_cast<std::size_t>(below), false);
  arith::for_each_semiprime_distinct(table, below - 1, [&](std::int64_t p1, std::int64_t p2) {
    mask[static_cast<std::size_t>(p1 * p2)] = true;
  });
  return mask;
}

/// Per-prime-power attainability bitmaps for P(m) = m^2 mod n.
struct SquareMembership {
  arith::Factorization factors;
  std::vector<std::vector<bool>> attain;  // one bitmap per prime power

  explicit SquareMembership(std::int64_t n) : factors(arith::factorize(n)) {
    for (const auto& [p, e] : factors.prime_powers) {
      const std::int64_t q = checked_pow(p, e);
      std::vector<bool> bits(static_cast<std::size_t>(q), false);
      for (std::int64_t m = 0; m < q; ++m)
        bits[static_cast<std::size_t>(m * m % q)] = true;
      attain.push_back(std::move(bits));
    }
  }

  bool contains(std::int64_t a) const {
    for (std::size_t i = 0; i < attain.size(); ++i) {
      const auto q = static_cast<std::int64_t>(attain[i].size());
      if (!attain[i][static_cast<std::size_t>(floor_mod(a, q))]) return false;
    }
    return true;
  }
};

Rat64 parse_rat(const std::string& s) {
  const std::size_t slash = s.find('/');
  if (slash == std::string::npos) return Rat64(std::stoll(s));
  return Rat64(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

std::vector<std::int64_t> parse_int_list(const std::string& s) {
  std::vector<std::int64_t> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(std::stoll(item));
  return out;
}

BuildConfig config_from_metadata(const ToeplitzSkeleton& sk) {
  BuildConfig cfg;
  const auto& meta = sk.metadata();
  if (auto it = meta.find("c"); it != meta.end()) cfg.growth_constant = std::stoll(it->second);
  if (auto it = meta.find("q"); it != meta.end()) cfg.ratio_bound = parse_rat(it->second);
  if (auto it = meta.find("seed"); it != meta.end())
    cfg.seed = static_cast<std::uint64_t>(std::stoull(it->second));
  if (auto it = meta.find("support"); it != meta.end())
    cfg.square_support = parse_int_list(it->second);
  if (auto it = meta.find("fill"); it != meta.end())
    cfg.fill_policy =
        it->second == "seeded-random" ? FillPolicy::kSeededRandom : FillPolicy::kAlternatingTarget;
  cfg.stage_budget = std::max(cfg.stage_budget, sk.stage_count());
  return cfg;
}

Rat64 squares_beta(const std::vector<std::int64_t>& support) {
  Rat64 beta(1, 16);
  for (std::int64_t p : support) beta *= Rat64(p - 1, p);
  return beta;
}

// ---------------------------------------------------------------------------
// certificates

void stage_conditions_prime(const ToeplitzSkeleton& sk, int t, const BuildConfig& cfg,
                            SieveCache& sieve, TheoremId id, StageCertificate& cert) {
  const Stage& st = sk.stage(t);
  const std::int64_t n = st.period;
  const auto f = arith::factorize(n);
  const std::int64_t phi = arith::euler_phi(f);
  const auto& table = sieve.at_least(n);

  {  // t2: phi(n_t)/n_t <= q^t
    const BigRat lhs = BigRat(BigInt(phi), BigInt(n));
    const BigRat rhs = rat_pow(cfg.ratio_bound, t);
    cert.conditions.push_back(make_cond("t2", "phi(n)/n=" + big_rat_str(lhs), "<=",
                                        "q^t=" + big_rat_str(rhs), lhs <= rhs));
  }
  {  // t3: holes subset of coprime residues
    std::int64_t bad = 0;
    for (std::int64_t j = 0; j < n; ++j)
      if (st.word[static_cast<std::size_t>(j)] == kHole && gcd64(j == 0 ? n : j, n) != 1) ++bad;
    cert.conditions.push_back(
        make_cond("t3", "holes at non-coprime positions=" + std::to_string(bad), "==", "0",
                  bad == 0));
  }
  {  // t4: ?_t >= (1 - sum c^-l) phi(n_t)
    const std::int64_t holes = sk.holes(t);
    const BigRat rhs = hole_floor_fraction(cfg.growth_constant, t) * BigInt(phi);
    cert.conditions.push_back(make_cond("t4", "holes=" + std::to_string(holes), ">=",
                                        "(1-sum c^-l)*phi=" + big_rat_str(rhs),
                                        BigRat(holes) >= rhs));
  }
  if (id == TheoremId::kTheoremA) {  // t5: holed primes >= pi(n_t)/2
    std::int64_t holed_primes = 0;
    table.for_each_prime(2, n - 1, [&](std::int64_t p) {
      if (st.word[static_cast<std::size_t>(p)] == kHole) ++holed_primes;
    });
    const std::int64_t pi_n = table.prime_pi(n);
    cert.conditions.push_back(make_cond("t5", "2*holed primes=" + std::to_string(2 * holed_primes),
                                        ">=", "pi(n)=" + std::to_string(pi_n),
                                        2 * holed_primes >= pi_n));
  } else {  // t5a: holed semiprime pairs >= pi_2(n_t)/2
    std::int64_t holed_pairs = 0, total_pairs = 0;
    arith::for_each_semiprime_pair(table, n, [&](std::int64_t p1, std::int64_t p2) {
      ++total_pairs;
      const std::int64_t pos = (p1 * p2) % n;
      if (st.word[static_cast<std::size_t>(pos)] == kHole) ++holed_pairs;
    });
    cert.conditions.push_back(make_cond(
        "t5a", "2*holed semiprime pairs=" + std::to_string(2 * holed_pairs), ">=",
        "pi2(n)=" + std::to_string(total_pairs), 2 * holed_pairs >= total_pairs));
  }
}

void transition_conditions_prime(const ToeplitzSkeleton& sk, int t, const BuildConfig& cfg,
                                 SieveCache& sieve, TheoremId id, StageCertificate& cert) {
  const std::int64_t n_prev = sk.period(t - 1);
  const std::int64_t n = sk.period(t);
  const std::int64_t k = n / n_prev;
  {  // t1
    const bool pass = n == k * n_prev && gcd64(k, n_prev) == 1;
    cert.conditions.push_back(make_cond(
        "t1", "n_t=" + std::to_string(n),
        "== k*n_{t-1}, gcd(k,n_{t-1})==1, k=", std::to_string(k) + "*" + std::to_string(n_prev),
        pass));
  }
  const std::int64_t phi_k = arith::euler_phi(k);
  {  // t6: phi(k)/k <= q
    const Rat64 lhs(phi_k, k);
    cert.conditions.push_back(make_cond("t6", "phi(k)/k=" + rat_str(lhs), "<=",
                                        "q=" + rat_str(cfg.ratio_bound),
                                        lhs <= cfg.ratio_bound));
  }
  {  // t6h: phi(k) >= c^t
    BigInt bound = 1;
    for (int i = 0; i < t; ++i) bound *= cfg.growth_constant;
    cert.conditions.push_back(make_cond("t6h", "phi(k)=" + std::to_string(phi_k), ">=",
                                        "c^t=" + bound.str(), BigInt(phi_k) >= bound));
  }
  const std::int64_t phi_prev = arith::euler_phi(n_prev);
  if (id == TheoremId::kTheoremA) {
    const auto& table = sieve.at_least(n);
    const std::int64_t pi_n = table.prime_pi(n);
    const std::int64_t pi_prev = table.prime_pi(n_prev);
    {  // t6pp: 8 ln(n_t) <= pi(n_t), 8 pi(n_{t-1}) <= pi(n_t)
      const long double lhs_log = 8.0L * std::log(static_cast<long double>(n));
      std::ostringstream ls;
      ls << "8*ln(n)=" << static_cast<double>(lhs_log);
      const bool pass = lhs_log <= static_cast<long double>(pi_n) && 8 * pi_prev <= pi_n;
      cert.conditions.push_back(make_cond(
          "t6pp", ls.str() + ", 8*pi(n_prev)=" + std::to_string(8 * pi_prev), "<=",
          "pi(n)=" + std::to_string(pi_n), pass, "natural log"));
    }
    {  // t7: phi(n_{t-1}) * pi(n_t; n_{t-1}, a) <= 2 pi(n_t) for coprime a
      const auto counts = table.prime_pi_ap_all(n, n_prev);
      std::int64_t worst = 0;
      for (std::int64_t a = 0; a < n_prev; ++a)
        if (gcd64(a == 0 ? n_prev : a, n_prev) == 1)
          worst = std::max(worst, counts[static_cast<std::size_t>(a)]);
      cert.conditions.push_back(make_cond(
          "t7", "max_a pi(n;n_prev,a)=" + std::to_string(worst), "<=",
          "2*pi(n)/phi(n_prev)=" + big_rat_str(BigRat(2 * BigInt(pi_n), BigInt(phi_prev))),
          BigInt(worst) * phi_prev <= 2 * BigInt(pi_n)));
    }
  } else {
    const auto& table = sieve.at_least(n);
    const auto counts = arith::semiprime_class_counts(table, n, n_prev);
    const std::int64_t pi2_n = counts.total;
    const std::int64_t pi2_prev = arith::semiprime_pi(table, n_prev);
    {  // t6pp analogue in the semiprime normalization
      const long double lhs_log = 8.0L * std::log(static_cast<long double>(n)) *
                                  std::log(static_cast<long double>(n));
      std::ostringstream ls;
      ls << "8*ln(n)^2=" << static_cast<double>(lhs_log);
      const bool pass = lhs_log <= static_cast<long double>(pi2_n) && 8 * pi2_prev <= pi2_n;
      cert.conditions.push_back(make_cond(
          "t6pp_a", ls.str() + ", 8*pi2(n_prev)=" + std::to_string(8 * pi2_prev), "<=",
          "pi2(n)=" + std::to_string(pi2_n), pass, "natural log"));
    }
    {  // t7a
      std::int64_t worst = 0;
      for (std::int64_t a = 0; a < n_prev; ++a)
        if (gcd64(a == 0 ? n_prev : a, n_prev) == 1)
          worst = std::max(worst, counts.by_class[static_cast<std::size_t>(a)]);
      cert.conditions.push_back(make_cond(
          "t7a", "max_a pi2(n;n_prev,a)=" + std::to_string(worst), "<=",
          "2*pi2(n)/phi(n_prev)=" + big_rat_str(BigRat(2 * BigInt(pi2_n), BigInt(phi_prev))),
          BigInt(worst) * phi_prev <= 2 * BigInt(pi2_n)));
    }
    {  // eighth: non-coprime semiprime mass <= pi2(n_t)/8
      std::int64_t noncop = 0;
      for (std::int64_t a = 0; a < n_prev; ++a)
        if (gcd64(a == 0 ? n_prev : a, n_prev) != 1)
          noncop += counts.by_class[static_cast<std::size_t>(a)];
      cert.conditions.push_back(make_cond(
          "t8th", "8*noncoprime semiprime pairs=" + std::to_string(8 * noncop), "<=",
          "pi2(n)=" + std::to_string(pi2_n), 8 * noncop <= pi2_n));
    }
    {  // every k a perfect square
      const std::int64_t r = isqrt64(k);
      cert.conditions.push_back(make_cond("sqk", "k=" + std::to_string(k), "==",
                                          "isqrt(k)^2=" + std::to_string(r * r), r * r == k));
    }
  }
}

void stage_conditions_squares(const ToeplitzSkeleton& sk, int t, const BuildConfig& cfg,
                              SieveCache& /*sieve*/, StageCertificate& cert) {
  const Stage& st = sk.stage(t);
  const std::int64_t n = st.period;
  const SquareMembership membership(n);
  const Rat64 beta = squares_beta(cfg.square_support);

  {  // sq3: holes subset of attainable residues
    std::int64_t bad = 0;
    for (std::int64_t j = 0; j < n; ++j)
      if (st.word[static_cast<std::size_t>(j)] == kHole && !membership.contains(j)) ++bad;
    cert.conditions.push_back(make_cond(
        "sq3", "holes outside R_n=" + std::to_string(bad), "==", "0", bad == 0));
  }
  {  // sq4: holed tilde residues >= (1 - gamma_t) tilde_psi(n_t)
    BigRat gamma = 0;
    for (int l = 1; l <= t; ++l) {
      const std::int64_t k_l = l == 1 ? sk.period(1) : sk.period(l) / sk.period(l - 1);
      gamma += BigRat(BigInt(1), BigInt(polyres::tilde_psi(k_l)));
    }
    std::int64_t holed_tilde = 0;
    for (std::int64_t j = 0; j < n; ++j)
      if (st.word[static_cast<std::size_t>(j)] == kHole &&
          polyres::tilde_attains(membership.factors, j))
        ++holed_tilde;
    const std::int64_t tpsi = polyres::tilde_psi(n);
    const BigRat rhs = (BigRat(1) - gamma) * BigInt(tpsi);
    cert.conditions.push_back(make_cond(
        "sq4", "holed tilde residues=" + std::to_string(holed_tilde), ">=",
        "(1-gamma_t)*tilde_psi=" + big_rat_str(rhs), BigRat(holed_tilde) >= rhs,
        "gamma_t=" + big_rat_str(gamma)));
  }
  {  // sq5: holed squares below n_t >= beta * sqrt(n_t)
    std::int64_t holed_squares = 0, square_terms = 0;
    for (std::int64_t m = 0; m * m < n; ++m) {
      ++square_terms;
      if (st.word[static_cast<std::size_t>(m * m)] == kHole) ++holed_squares;
    }
    // count >= beta*sqrt(n)  <=>  (count*den)^2 >= num^2 * n
    const BigInt lhs = BigInt(holed_squares) * beta.denominator();
    const BigInt rhs_sq = BigInt(beta.numerator()) * beta.numerator() * n;
    cert.conditions.push_back(make_cond(
        "sq5", "holed squares=" + std::to_string(holed_squares), ">=",
        "beta*sqrt(n), beta=" + rat_str(beta), lhs * lhs >= rhs_sq,
        "square terms below n: " + std::to_string(square_terms)));
  }
  {  // sq2: 2^omega(n) tilde_psi(n) / n >= 8 beta (a consequence of the
     // density sandwich; recorded for reference)
    const auto f = membership.factors;
    const BigInt lhs = (BigInt(1) << f.omega()) * polyres::tilde_psi(n) * beta.denominator();
    const BigInt rhs = BigInt(8) * beta.numerator() * n;
    cert.conditions.push_back(make_cond("sq2", "2^omega*tilde_psi*beta_den=" + lhs.str(), ">=",
                                        "8*beta_num*n=" + rhs.str(), lhs >= rhs));
  }
}

void transition_conditions_squares(const ToeplitzSkeleton& sk, int t, const BuildConfig& cfg,
                                   StageCertificate& cert) {
  const std::int64_t n_prev = sk.period(t - 1);
  const std::int64_t n = sk.period(t);
  const std::int64_t k = n / n_prev;
  {  // structure: n_t = k n_{t-1}, coprime, n_t >= 16 n_{t-1}^2
    const bool pass = n == k * n_prev && gcd64(k, n_prev) == 1 &&
                      BigInt(n) >= BigInt(16) * n_prev * n_prev;
    cert.conditions.push_back(make_cond(
        "sqstr", "n_t=" + std::to_string(n),
        ">= 16*n_{t-1}^2 =", (BigInt(16) * n_prev * n_prev).str(), pass,
        "k=" + std::to_string(k) + ", gcd(k,n_prev)=" + std::to_string(gcd64(k, n_prev))));
  }
  {  // gamma_t <= 1/2
    BigRat gamma = 0;
    for (int l = 1; l <= t; ++l) {
      const std::int64_t k_l = l == 1 ? sk.period(1) : sk.period(l) / sk.period(l - 1);
      gamma += BigRat(BigInt(1), BigInt(polyres::tilde_psi(k_l)));
    }
    cert.conditions.push_back(make_cond("sqgamma", "gamma_t=" + big_rat_str(gamma), "<=", "1/2",
                                        gamma <= BigRat(1, 2)));
  }
  {  // k is a power of a support prime unused so far
    const auto fk = arith::factorize(k);
    bool pass = fk.prime_powers.size() == 1;
    std::string note;
    if (pass) {
      const std::int64_t p = fk.prime_powers[0].first;
      const bool in_support = std::find(cfg.square_support.begin(), cfg.square_support.end(), p) !=
                              cfg.square_support.end();
      pass = in_support && n_prev % p != 0;
      note = "p=" + std::to_string(p);
    }
    cert.conditions.push_back(
        make_cond("sqsupp", "k=" + std::to_string(k), "is", "power of a fresh support prime",
                  pass, note));
  }
}

StageCertificate compute_certificate(const ToeplitzSkeleton& sk, int t, TheoremId which,
                                     const BuildConfig& cfg, SieveCache& sieve) {
  if (t < 1 || t > sk.stage_count()) throw ContractError("validate_stage: no such stage");
  StageCertificate cert;
  cert.stage = t;
  cert.theorem = which;
  switch (which) {
    case TheoremId::kTheoremA:
    case TheoremId::kSemiprime:
      stage_conditions_prime(sk, t, cfg, sieve, which, cert);
      if (which == TheoremId::kSemiprime) {
        const std::int64_t n = sk.period(t);
        const std::int64_t r = isqrt64(n);
        if (t == 1)
          cert.conditions.push_back(make_cond("sqn", "n_1=" + std::to_string(n), "==",
                                              "isqrt(n_1)^2=" + std::to_string(r * r),
                                              r * r == n));
      }
      if (t >= 2) transition_conditions_prime(sk, t, cfg, sieve, which, cert);
      break;
    case TheoremId::kSquares:
      stage_conditions_squares(sk, t, cfg, sieve, cert);
      if (t >= 2) transition_conditions_squares(sk, t, cfg, cert);
      break;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// builders

struct StageDraft {
  std::vector<Stage> stages;
  std::vector<std::int64_t> k_seq;  // k_1 = n_1
};

void check_word_budget(std::int64_t period) {
  check_memory_budget(static_cast<std::uint64_t>(period) * sizeof(Symbol) * 2, "stage word");
}

std::map<std::string, std::string> builder_metadata(const BuildConfig& cfg,
                                                    const std::string& name,
                                                    const StageDraft& draft, Symbol completion) {
  std::map<std::string, std::string> meta;
  meta["builder"] = name;
  meta["c"] = std::to_string(cfg.growth_constant);
  meta["q"] = rat_str(cfg.ratio_bound);
  meta["seed"] = std::to_string(cfg.seed);
  meta["fill"] =
      cfg.fill_policy == FillPolicy::kSeededRandom ? "seeded-random" : "alternating-target";
  meta["completion_target"] = std::to_string(completion);
  std::ostringstream ks;
  for (std::size_t i = 0; i < draft.k_seq.size(); ++i) {
    if (i) ks << ",";
    ks << draft.k_seq[i];
  }
  meta["k_seq"] = ks.str();
  meta["version"] = kVersion;
  return meta;
}

[[noreturn]] void throw_search_failure(const std::string& where, std::int64_t k_max,
                                       const std::map<std::string, std::int64_t>& failures) {
  std::string binding = "modulus_budget";
  std::int64_t most = -1;
  std::ostringstream os;
  os << where << ": no admissible k <= " << k_max << " (";
  bool first = true;
  for (const auto& [name, count] : failures) {
    if (!first) os << ", ";
    first = false;
    os << name << ": " << count;
    if (count > most) {
      most = count;
      binding = name;
    }
  }
  os << ")";
  throw BuildError(os.str(), binding);
}

BuildResult build_prime_like(const BuildConfig& cfg, TheoremId id) {
  cfg.validate();
  SieveCache sieve;
  const bool semis = id == TheoremId::kSemiprime;
  StageDraft draft;

  // stage 1: smallest admissible modulus, all coprime positions holed
  std::int64_t n1 = -1;
  for (std::int64_t n = 2; n <= cfg.modulus_budget; ++n) {
    if (semis) {
      const std::int64_t r = isqrt64(n);
      if (r * r != n) continue;
    }
    const std::int64_t phi = arith::euler_phi(n);
    if (Rat64(phi, n) > cfg.ratio_bound) continue;
    const auto& table = sieve.at_least(n);
    if (semis) {
      std::int64_t holed = 0, total = 0;
      arith::for_each_semiprime_pair(table, n, [&](std::int64_t p1, std::int64_t p2) {
        ++total;
        const std::int64_t pos = (p1 * p2) % n;
        if (gcd64(pos == 0 ? n : pos, n) == 1) ++holed;
      });
      if (total == 0 || 2 * holed < total) continue;
    } else {
      std::int64_t holed = 0;
      table.for_each_prime(2, n - 1, [&](std::int64_t p) {
        if (n % p != 0) ++holed;
      });
      if (2 * holed < table.prime_pi(n)) continue;
    }
    n1 = n;
    break;
  }
  if (n1 < 0)
    throw BuildError("no admissible first stage within the modulus budget", "modulus_budget");

  {
    check_word_budget(n1);
    Stage st;
    st.period = n1;
    st.word.resize(static_cast<std::size_t>(n1));
    const auto f1 = arith::factorize(n1);
    const auto noncop = noncoprime_mask(n1, f1);
    for (std::int64_t j = 0; j < n1; ++j)
      st.word[static_cast<std::size_t>(j)] =
          noncop[static_cast<std::size_t>(j)] ? arb_fill(cfg, 1, j, 2) : kHole;
    draft.stages.push_back(std::move(st));
    draft.k_seq.push_back(n1);
  }

  for (int t = 1; t < cfg.stage_budget; ++t) {
    const Stage& cur = draft.stages.back();
    const std::int64_t n_t = cur.period;
    const std::int64_t phi_t = arith::euler_phi(n_t);
    const std::int64_t k_max = cfg.modulus_budget / n_t;
    std::map<std::string, std::int64_t> failures;
    std::int64_t chosen = -1;

    for (std::int64_t k = 2; k <= k_max; ++k) {
      if (gcd64(k, n_t) != 1) continue;
      if (semis) {
        const std::int64_t r = isqrt64(k);
        if (r * r != k) continue;
      }
      const std::int64_t phi_k = arith::euler_phi(k);
      if (Rat64(phi_k, k) > cfg.ratio_bound) {
        ++failures["t6"];
        continue;
      }
      BigInt c_pow = 1;
      for (int i = 0; i <= t; ++i) c_pow *= cfg.growth_constant;
      if (BigInt(phi_k) < c_pow) {
        ++failures["t6h"];
        continue;
      }
      const std::int64_t n_next = k * n_t;
      const auto& table = sieve.at_least(n_next);
      if (semis) {
        const auto counts = arith::semiprime_class_counts(table, n_next, n_t);
        const std::int64_t pi2_next = counts.total;
        const std::int64_t pi2_t = arith::semiprime_pi(table, n_t);
        const long double l2 = std::log(static_cast<long double>(n_next));
        if (8.0L * l2 * l2 > static_cast<long double>(pi2_next) || 8 * pi2_t > pi2_next) {
          ++failures["t6pp_a"];
          continue;
        }
        std::int64_t noncop = 0, worst = 0;
        for (std::int64_t a = 0; a < n_t; ++a) {
          if (gcd64(a == 0 ? n_t : a, n_t) == 1)
            worst = std::max(worst, counts.by_class[static_cast<std::size_t>(a)]);
          else
            noncop += counts.by_class[static_cast<std::size_t>(a)];
        }
        if (8 * noncop > pi2_next) {
          ++failures["t8th"];
          continue;
        }
        if (BigInt(worst) * phi_t > 2 * BigInt(pi2_next)) {
          ++failures["t7a"];
          continue;
        }
      } else {
        const std::int64_t pi_next = table.prime_pi(n_next);
        if (8.0L * std::log(static_cast<long double>(n_next)) >
                static_cast<long double>(pi_next) ||
            8 * table.prime_pi(n_t) > pi_next) {
          ++failures["t6pp"];
          continue;
        }
        const auto counts = table.prime_pi_ap_all(n_next, n_t);
        std::int64_t worst = 0;
        for (std::int64_t a = 0; a < n_t; ++a)
          if (gcd64(a == 0 ? n_t : a, n_t) == 1)
            worst = std::max(worst, counts[static_cast<std::size_t>(a)]);
        if (BigInt(worst) * phi_t > 2 * BigInt(pi_next)) {
          ++failures["t7"];
          continue;
        }
      }
      chosen = k;
      break;
    }
    if (chosen < 0)
      throw_search_failure(
          (semis ? std::string("spnt") : std::string("theorem_a")) + " stage " +
              std::to_string(t + 1),
          k_max, failures);

    const std::int64_t n_next = chosen * n_t;
    check_word_budget(n_next);
    const auto& table = sieve.at_least(n_next);
    const auto f_next = arith::factorize(n_next);
    const auto noncop = noncoprime_mask(n_next, f_next);
    std::vector<bool> target_mask;
    if (semis) {
      target_mask = semiprime_mask(table, n_t);
    }

    Stage next;
    next.period = n_next;
    next.word.resize(static_cast<std::size_t>(n_next));
    const Symbol target = alternating_target(t);
    for (std::int64_t i = 0; i < n_next; ++i) {
      const Symbol base = cur.word[static_cast<std::size_t>(i % n_t)];
      Symbol v;
      if (base != kHole) {
        v = base;
      } else if (i < n_t) {
        // first block: fill everything, steering the stage-t average
        const bool steer = semis ? target_mask[static_cast<std::size_t>(i)]
                                 : (i >= 2 && table.is_prime(i));
        v = steer ? target : arb_fill(cfg, t + 1, i, 2);
      } else if (noncop[static_cast<std::size_t>(i)]) {
        v = arb_fill(cfg, t + 1, i, 2);
      } else {
        v = kHole;
      }
      next.word[static_cast<std::size_t>(i)] = v;
    }
    draft.stages.push_back(std::move(next));
    draft.k_seq.push_back(chosen);
  }

  const int last = static_cast<int>(draft.stages.size());
  const Symbol completion = alternating_target(last);
  auto meta = builder_metadata(cfg, semis ? "spnt" : "theorem_a", draft, completion);
  ToeplitzSkeleton skeleton(2, std::move(draft.stages), completion, std::move(meta));

  BuildResult result{std::move(skeleton), {}};
  if (cfg.stage_budget >= 2) {
    for (int t = 1; t <= result.skeleton.stage_count(); ++t) {
      auto cert = compute_certificate(result.skeleton, t, id, cfg, sieve);
      if (!cert.all_pass())
        throw BuildError("stage certificate failed after construction: " +
                             cert.first_failure()->name,
                         cert.first_failure()->name);
      result.certificates.push_back(std::move(cert));
    }
  }
  return result;
}

}  // namespace

Symbol alternating_target(int t) { return t % 2 == 1 ? 0 : 1; }

std::string theorem_name(TheoremId id) {
  switch (id) {
    case TheoremId::kTheoremA:
      return "A";
    case TheoremId::kSemiprime:
      return "SPNT";
    case TheoremId::kSquares:
      return "SQUARES";
  }
  return "?";
}

TheoremId theorem_from_name(const std::string& name) {
  if (name == "A" || name == "a") return TheoremId::kTheoremA;
  if (name == "SPNT" || name == "spnt") return TheoremId::kSemiprime;
  if (name == "SQUARES" || name == "squares") return TheoremId::kSquares;
  throw ContractError("unknown theorem id: " + name);
}

void BuildConfig::validate() const {
  if (growth_constant < 2) throw ContractError("BuildConfig: growth constant must be >= 2");
  if (stage_budget < 1) throw ContractError("BuildConfig: stage budget must be >= 1");
  if (modulus_budget < 2) throw ContractError("BuildConfig: modulus budget must be >= 2");
  if (ratio_bound <= Rat64(0) || ratio_bound >= Rat64(1))
    throw ContractError("BuildConfig: ratio bound must lie in (0, 1)");
  if (oscillation_target <= Rat64(0) || oscillation_target > Rat64(1))
    throw ContractError("BuildConfig: oscillation target must lie in (0, 1]");
  if (square_support.empty()) throw ContractError("BuildConfig: square support must be non-empty");
  for (std::int64_t p : square_support) {
    const auto f = arith::factorize(p);
    if (f.prime_powers.size() != 1 || f.prime_powers[0].second != 1)
      throw ContractError("BuildConfig: square support entries must be prime");
  }
  if (squares_beta(square_support) <= Rat64(0))
    throw ContractError("BuildConfig: support makes beta vanish");
}

std::string BuildConfig::canonical_string() const {
  std::ostringstream os;
  os << "c=" << growth_constant << ";q=" << rat_str(ratio_bound)
     << ";stages=" << stage_budget << ";modulus=" << modulus_budget
     << ";fill=" << (fill_policy == FillPolicy::kSeededRandom ? "seeded-random" : "alternating")
     << ";target=" << rat_str(oscillation_target) << ";seed=" << seed << ";support=";
  for (std::size_t i = 0; i < square_support.size(); ++i) {
    if (i) os << ",";
    os << square_support[i];
  }
  return os.str();
}

bool StageCertificate::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(),
                     [](const ConditionRecord& c) { return c.pass; });
}

const ConditionRecord* StageCertificate::first_failure() const {
  for (const auto& c : conditions)
    if (!c.pass) return &c;
  return nullptr;
}

std::string StageCertificate::to_json_lines() const {
  std::ostringstream os;
  for (const auto& c : conditions) {
    nlohmann::ordered_json j;
    j["stage"] = stage;
    j["theorem"] = theorem_name(theorem);
    j["condition"] = c.name;
    j["lhs"] = c.lhs;
    j["relation"] = c.relation;
    j["rhs"] = c.rhs;
    j["pass"] = c.pass;
    if (!c.note.empty()) j["note"] = c.note;
    os << j.dump() << "\n";
  }
  return os.str();
}

BuildResult build_theorem_a(const BuildConfig& config) {
  return build_prime_like(config, TheoremId::kTheoremA);
}

BuildResult build_spnt_counterexample(const BuildConfig& config) {
  return build_prime_like(config, TheoremId::kSemiprime);
}

BuildResult build_squares_counterexample(const BuildConfig& config) {
  config.validate();
  SieveCache sieve;
  if (config.stage_budget > static_cast<int>(config.square_support.size()))
    throw BuildError("stage budget exceeds the fixed prime support (" +
                         std::to_string(config.square_support.size()) + " primes)",
                     "stage_budget");

  StageDraft draft;
  std::vector<std::int64_t> unused = config.square_support;
  std::sort(unused.begin(), unused.end());

  // stage 1: the smallest prime power over the support with tilde_psi >= 3,
  // so the gamma budget keeps room for later stages
  std::int64_t n1 = -1, used_p = -1;
  for (std::int64_t p : unused) {
    std::int64_t q = p;
    while (polyres::tilde_psi(q) < 3) q = checked_mul(q, p);
    if (q <= config.modulus_budget && (n1 < 0 || q < n1)) {
      n1 = q;
      used_p = p;
    }
  }
  if (n1 < 0)
    throw BuildError("no admissible first stage within the modulus budget", "modulus_budget");
  unused.erase(std::remove(unused.begin(), unused.end(), used_p), unused.end());

  {
    check_word_budget(n1);
    const SquareMembership membership(n1);
    Stage st;
    st.period = n1;
    st.word.resize(static_cast<std::size_t>(n1));
    for (std::int64_t j = 0; j < n1; ++j)
      st.word[static_cast<std::size_t>(j)] =
          membership.contains(j) ? kHole : arb_fill(config, 1, j, 2);
    draft.stages.push_back(std::move(st));
    draft.k_seq.push_back(n1);
  }

  BigRat gamma = BigRat(BigInt(1), BigInt(polyres::tilde_psi(n1)));

  for (int t = 1; t < config.stage_budget; ++t) {
    const Stage& cur = draft.stages.back();
    const std::int64_t n_t = cur.period;

    // smallest fresh prime power satisfying growth and the gamma budget
    std::int64_t chosen = -1, chosen_p = -1;
    for (std::int64_t p : unused) {
      std::int64_t q = p;
      while (true) {
        bool grows = false;
        try {
          grows = BigInt(q) >= BigInt(16) * n_t;  // k >= 16 n_t <=> n_next >= 16 n_t^2
        } catch (...) {
        }
        const BigRat gamma_next = gamma + BigRat(BigInt(1), BigInt(polyres::tilde_psi(q)));
        if (grows && gamma_next <= BigRat(1, 2)) break;
        if (q > config.modulus_budget / n_t) break;
        q = checked_mul(q, p);
      }
      if (q <= config.modulus_budget / n_t && (chosen < 0 || q < chosen)) {
        chosen = q;
        chosen_p = p;
      }
    }
    if (chosen < 0)
      throw BuildError("squares stage " + std::to_string(t + 1) +
                           ": no fresh support prime power fits the modulus budget",
                       "modulus_budget");
    unused.erase(std::remove(unused.begin(), unused.end(), chosen_p), unused.end());

    const std::int64_t n_next = checked_mul(chosen, n_t);
    check_word_budget(n_next);
    const SquareMembership membership(n_next);

    Stage next;
    next.period = n_next;
    next.word.resize(static_cast<std::size_t>(n_next));
    const Symbol target = alternating_target(t);
    for (std::int64_t i = 0; i < n_next; ++i) {
      const Symbol base = cur.word[static_cast<std::size_t>(i % n_t)];
      Symbol v;
      if (base != kHole) {
        v = base;
      } else if (i < n_t) {
        const std::int64_t r = isqrt64(i);
        v = (r * r == i) ? target : arb_fill(config, t + 1, i, 2);
      } else if (!membership.contains(i)) {
        v = arb_fill(config, t + 1, i, 2);
      } else {
        v = kHole;
      }
      next.word[static_cast<std::size_t>(i)] = v;
    }
    draft.stages.push_back(std::move(next));
    draft.k_seq.push_back(chosen);
    gamma += BigRat(BigInt(1), BigInt(polyres::tilde_psi(chosen)));
  }

  const int last = static_cast<int>(draft.stages.size());
  const Symbol completion = alternating_target(last);
  auto meta = builder_metadata(config, "squares", draft, completion);
  {
    std::ostringstream ss;
    for (std::size_t i = 0; i < config.square_support.size(); ++i) {
      if (i) ss << ",";
      ss << config.square_support[i];
    }
    meta["support"] = ss.str();
    meta["beta"] = rat_str(squares_beta(config.square_support));
  }
  ToeplitzSkeleton skeleton(2, std::move(draft.stages), completion, std::move(meta));

  BuildResult result{std::move(skeleton), {}};
  if (config.stage_budget >= 2) {
    for (int t = 1; t <= result.skeleton.stage_count(); ++t) {
      auto cert = compute_certificate(result.skeleton, t, TheoremId::kSquares, config, sieve);
      if (!cert.all_pass())
        throw BuildError("stage certificate failed after construction: " +
                             cert.first_failure()->name,
                         cert.first_failure()->name);
      result.certificates.push_back(std::move(cert));
    }
  }
  return result;
}

toeplitz::ToeplitzSkeleton build_bounded_holes(int alphabet_size,
                                               const std::vector<std::int64_t>& periods,
                                               int holes_per_stage) {
  if (alphabet_size < 2) throw ContractError("build_bounded_holes: alphabet must have >= 2 symbols");
  if (periods.empty()) throw ContractError("build_bounded_holes: need at least one period");
  if (holes_per_stage < 1) throw ContractError("build_bounded_holes: holes_per_stage must be >= 1");
  for (std::size_t i = 1; i < periods.size(); ++i)
    if (periods[i] % periods[i - 1] != 0)
      throw ContractError("build_bounded_holes: periods must be nested");

  auto fill_symbol = [&](int stage, std::int64_t pos) {
    return static_cast<Symbol>(splitmix64(static_cast<std::uint64_t>(pos) ^
                                          (static_cast<std::uint64_t>(stage) * 0x9E3779B9ull)) %
                               static_cast<std::uint64_t>(alphabet_size));
  };

  bool coprime_fallback = false;
  std::vector<Stage> stages;
  {
    const std::int64_t n1 = periods[0];
    Stage st;
    st.period = n1;
    st.word.resize(static_cast<std::size_t>(n1));
    std::vector<std::int64_t> holes;
    for (std::int64_t j = 1; j < n1 && static_cast<int>(holes.size()) < holes_per_stage; ++j)
      if (gcd64(j, n1) == 1) holes.push_back(j);
    if (static_cast<int>(holes.size()) < holes_per_stage) {
      coprime_fallback = true;
      for (std::int64_t j = 0; j < n1 && static_cast<int>(holes.size()) < holes_per_stage; ++j)
        if (std::find(holes.begin(), holes.end(), j) == holes.end()) holes.push_back(j);
    }
    for (std::int64_t j = 0; j < n1; ++j)
      st.word[static_cast<std::size_t>(j)] =
          std::find(holes.begin(), holes.end(), j) != holes.end() ? kHole : fill_symbol(1, j);
    stages.push_back(std::move(st));
  }

  for (std::size_t s = 1; s < periods.size(); ++s) {
    const Stage& cur = stages.back();
    const std::int64_t n_prev = cur.period;
    const std::int64_t n = periods[s];
    check_word_budget(n);
    // candidate positions: periodic extensions of the current holes
    std::vector<std::int64_t> candidates;
    for (std::int64_t i = 0; i < n; ++i)
      if (cur.word[static_cast<std::size_t>(i % n_prev)] == kHole) candidates.push_back(i);
    std::vector<std::int64_t> keep;
    for (std::int64_t i : candidates) {
      if (static_cast<int>(keep.size()) >= holes_per_stage) break;
      if (i >= n_prev && gcd64(i, n) == 1) keep.push_back(i);
    }
    if (keep.empty()) {
      coprime_fallback = true;
      for (std::int64_t i : candidates) {
        if (static_cast<int>(keep.size()) >= holes_per_stage) break;
        if (i >= n_prev || candidates.size() <= static_cast<std::size_t>(holes_per_stage))
          keep.push_back(i);
      }
    }
    Stage next;
    next.period = n;
    next.word.resize(static_cast<std::size_t>(n));
    const int stage_idx = static_cast<int>(s) + 1;
    for (std::int64_t i = 0; i < n; ++i) {
      const Symbol base = cur.word[static_cast<std::size_t>(i % n_prev)];
      if (base != kHole) {
        next.word[static_cast<std::size_t>(i)] = base;
      } else if (std::find(keep.begin(), keep.end(), i) != keep.end()) {
        next.word[static_cast<std::size_t>(i)] = kHole;
      } else {
        next.word[static_cast<std::size_t>(i)] = fill_symbol(stage_idx, i);
      }
    }
    stages.push_back(std::move(next));
  }

  std::map<std::string, std::string> meta;
  meta["builder"] = "bounded-holes";
  meta["holes_per_stage"] = std::to_string(holes_per_stage);
  if (coprime_fallback) meta["coprime_placement"] = "fallback-arbitrary";
  meta["version"] = kVersion;
  return ToeplitzSkeleton(alphabet_size, std::move(stages), 0, std::move(meta));
}

StageCertificate validate_stage(const ToeplitzSkeleton& skeleton, int t, TheoremId which,
                                const BuildConfig* config) {
  SieveCache sieve;
  const BuildConfig cfg = config ? *config : config_from_metadata(skeleton);
  return compute_certificate(skeleton, t, which, cfg, sieve);
}

}  // namespace toeporb::constructions
