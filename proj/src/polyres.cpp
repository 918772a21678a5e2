#include "toeporb/polyres.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>
#include <sstream>

namespace toeporb::polyres {

namespace {

using u128 = unsigned __int128;

std::int64_t mul_mod(std::int64_t a, std::int64_t b, std::int64_t n) {
  return static_cast<std::int64_t>(static_cast<u128>(a) * static_cast<u128>(b) %
                                   static_cast<u128>(n));
}

std::int64_t pow_mod(std::int64_t b, std::int64_t e, std::int64_t n) {
  std::int64_t r = 1 % n;
  b %= n;
  while (e > 0) {
    if (e & 1) r = mul_mod(r, b, n);
    b = mul_mod(b, b, n);
    e >>= 1;
  }
  return r;
}

std::int64_t mod_inverse(std::int64_t a, std::int64_t n) {
  std::int64_t t = 0, new_t = 1, r = n, new_r = floor_mod(a, n);
  while (new_r != 0) {
    const std::int64_t q = r / new_r;
    t = std::exchange(new_t, t - q * new_t);
    r = std::exchange(new_r, r - q * new_r);
  }
  if (r != 1) throw ContractError("mod_inverse: not invertible");
  return floor_mod(t, n);
}

bool is_small_prime(std::int64_t p) {
  if (p < 2) return false;
  for (std::int64_t d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

/// Nonzero quadratic residue test mod an odd prime via Euler's criterion.
bool is_unit_square_mod_p(std::int64_t a, std::int64_t p) {
  const std::int64_t r = floor_mod(a, p);
  if (r == 0) return false;
  if (p == 2) return true;
  return pow_mod(r, (p - 1) / 2, p) == 1;
}

}  // namespace

PolynomialSpec::PolynomialSpec(std::vector<std::int64_t> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.size() < 3) throw ContractError("PolynomialSpec: degree must be > 1");
  if (coeffs_.back() != 1) throw ContractError("PolynomialSpec: must be monic");
  for (std::int64_t c : coeffs_)
    if (c < 0) throw ContractError("PolynomialSpec: coefficients must be non-negative");
}

std::int64_t PolynomialSpec::eval(std::int64_t m) const {
  if (m < 0) throw ContractError("PolynomialSpec::eval: m must be >= 0");
  std::int64_t acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = checked_add(checked_mul(acc, m), *it);
  return acc;
}

std::int64_t PolynomialSpec::eval_mod(std::int64_t m, std::int64_t n) const {
  if (n < 1) throw ContractError("PolynomialSpec::eval_mod: modulus must be >= 1");
  const std::int64_t mr = floor_mod(m, n);
  std::int64_t acc = 0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it)
    acc = (mul_mod(acc, mr, n) + *it % n) % n;
  return acc;
}

std::int64_t PolynomialSpec::inverse_floor(std::int64_t N) const {
  if (N < coeffs_.front()) throw ContractError("inverse_floor: N below P(0)");
  std::int64_t lo = 0, hi = 1;
  auto value_leq = [&](std::int64_t m) {
    try {
      return eval(m) <= N;
    } catch (const std::overflow_error&) {
      return false;
    }
  };
  while (value_leq(hi)) {
    lo = hi;
    hi *= 2;
  }
  while (lo + 1 < hi) {
    const std::int64_t mid = lo + (hi - lo) / 2;
    if (value_leq(mid))
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::string PolynomialSpec::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (int i = degree(); i >= 0; --i) {
    const std::int64_t c = coeffs_[static_cast<std::size_t>(i)];
    if (c == 0) continue;
    if (!first) os << "+";
    first = false;
    if (i == 0) {
      os << c;
    } else {
      if (c != 1) os << c;
      os << "m";
      if (i > 1) os << "^" << i;
    }
  }
  if (first) os << "0";
  return os.str();
}

PolynomialSpec PolynomialSpec::parse(const std::string& text) {
  // Terms like "m^3", "2m", "7" joined by '+'. Whitespace ignored.
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s.empty()) throw ContractError("PolynomialSpec::parse: empty input");
  std::vector<std::int64_t> coeffs;
  auto bump = [&](int pow, std::int64_t c) {
    if (static_cast<int>(coeffs.size()) <= pow) coeffs.resize(static_cast<std::size_t>(pow) + 1, 0);
    coeffs[static_cast<std::size_t>(pow)] += c;
  };
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = s.find('+', i);
    if (j == std::string::npos) j = s.size();
    const std::string term = s.substr(i, j - i);
    if (term.empty()) throw ContractError("PolynomialSpec::parse: empty term");
    std::int64_t coef = 1;
    std::size_t k = 0;
    if (std::isdigit(static_cast<unsigned char>(term[0]))) {
      coef = 0;
      while (k < term.size() && std::isdigit(static_cast<unsigned char>(term[k])))
        coef = coef * 10 + (term[k++] - '0');
    }
    int pow = 0;
    if (k < term.size()) {
      if (term[k] != 'm') throw ContractError("PolynomialSpec::parse: expected 'm' in term");
      ++k;
      pow = 1;
      if (k < term.size()) {
        if (term[k] != '^') throw ContractError("PolynomialSpec::parse: expected '^'");
        ++k;
        pow = 0;
        if (k == term.size()) throw ContractError("PolynomialSpec::parse: missing exponent");
        while (k < term.size() && std::isdigit(static_cast<unsigned char>(term[k])))
          pow = pow * 10 + (term[k++] - '0');
      }
    }
    if (k != term.size()) throw ContractError("PolynomialSpec::parse: trailing characters");
    bump(pow, coef);
    i = j + 1;
  }
  return PolynomialSpec(std::move(coeffs));
}

bool ResidueProfile::attains(std::int64_t a) const {
  const std::int64_t r = floor_mod(a, modulus);
  auto it = std::lower_bound(entries.begin(), entries.end(), r,
                             [](const auto& e, std::int64_t v) { return e.first < v; });
  return it != entries.end() && it->first == r;
}

std::int64_t ResidueProfile::rho_of(std::int64_t a) const {
  const std::int64_t r = floor_mod(a, modulus);
  auto it = std::lower_bound(entries.begin(), entries.end(), r,
                             [](const auto& e, std::int64_t v) { return e.first < v; });
  return (it != entries.end() && it->first == r) ? it->second : 0;
}

ResidueProfile residue_profile_brute(const PolynomialSpec& P, std::int64_t n) {
  if (n < 1) throw ContractError("residue_profile: n must be >= 1");
  check_memory_budget(static_cast<std::uint64_t>(n) * 8, "residue_profile");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
  for (std::int64_t m = 1; m <= n; ++m) ++counts[static_cast<std::size_t>(P.eval_mod(m, n))];
  ResidueProfile out;
  out.modulus = n;
  for (std::int64_t a = 0; a < n; ++a) {
    const std::int64_t c = counts[static_cast<std::size_t>(a)];
    if (c > 0) {
      out.entries.emplace_back(a, c);
      out.rho_max = std::max(out.rho_max, c);
    }
  }
  return out;
}

ResidueProfile residue_profile(const PolynomialSpec& P, std::int64_t n) {
  if (n < 1) throw ContractError("residue_profile: n must be >= 1");
  if (n == 1) return residue_profile_brute(P, 1);
  const auto f = arith::factorize(n);
  if (f.prime_powers.size() == 1) return residue_profile_brute(P, n);
  std::vector<ResidueProfile> parts;
  parts.reserve(f.prime_powers.size());
  for (const auto& [p, e] : f.prime_powers)
    parts.push_back(residue_profile_brute(P, checked_pow(p, e)));
  return crt_compose(parts);
}

ResidueProfile crt_compose(std::span<const ResidueProfile> profiles) {
  if (profiles.empty()) throw ContractError("crt_compose: no profiles");
  for (std::size_t i = 0; i < profiles.size(); ++i)
    for (std::size_t j = i + 1; j < profiles.size(); ++j)
      if (gcd64(profiles[i].modulus, profiles[j].modulus) != 1)
        throw ContractError("crt_compose: moduli are not pairwise coprime");

  std::int64_t n = 1;
  std::uint64_t combos = 1;
  for (const auto& pr : profiles) {
    n = checked_mul(n, pr.modulus);
    combos *= static_cast<std::uint64_t>(std::max<std::int64_t>(pr.psi(), 1));
  }
  check_memory_budget(combos * 16, "crt_compose");

  // residue = sum a_i * (n/n_i) * inv(n/n_i mod n_i) mod n
  std::vector<std::int64_t> weight(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const std::int64_t ni = profiles[i].modulus;
    const std::int64_t Mi = n / ni;
    weight[i] = mul_mod(Mi % n, mod_inverse(Mi % ni, ni == 1 ? 1 : ni), n);
  }

  ResidueProfile out;
  out.modulus = n;
  out.entries.reserve(combos);
  std::vector<std::size_t> idx(profiles.size(), 0);
  while (true) {
    std::int64_t residue = 0, rho = 1;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      const auto& [a, r] = profiles[i].entries[idx[i]];
      residue = (residue + mul_mod(a, weight[i], n)) % n;
      rho = checked_mul(rho, r);
    }
    out.entries.emplace_back(residue, rho);
    out.rho_max = std::max(out.rho_max, rho);
    std::size_t carry = 0;
    while (carry < profiles.size()) {
      if (++idx[carry] < profiles[carry].entries.size()) break;
      idx[carry] = 0;
      ++carry;
    }
    if (carry == profiles.size()) break;
  }
  std::sort(out.entries.begin(), out.entries.end());
  return out;
}

std::int64_t rho_count(const PolynomialSpec& P, std::int64_t N, std::int64_t n, std::int64_t a) {
  if (n < 1 || N < 0) throw ContractError("rho_count: need n >= 1 and N >= 0");
  const std::int64_t target = floor_mod(a, n);
  const std::int64_t full = N / n, rem = N % n;
  std::int64_t per_period = 0, prefix = 0;
  for (std::int64_t m = 1; m <= n; ++m) {
    if (P.eval_mod(m, n) == target) {
      ++per_period;
      if (m <= rem) ++prefix;
    }
    if (m == rem && full == 0) break;  // only the prefix matters
  }
  return full * per_period + prefix;
}

std::int64_t rho_max_multiplicative(const PolynomialSpec& P, const arith::Factorization& f) {
  std::int64_t rho = 1;
  for (const auto& [p, e] : f.prime_powers) {
    const auto profile = residue_profile_brute(P, checked_pow(p, e));
    rho = checked_mul(rho, profile.rho_max);
  }
  return rho;
}

bool albis_bound_check(const PolynomialSpec& P, std::int64_t n) {
  if (n < 2) throw ContractError("albis_bound_check: n must be >= 2");
  const auto f = arith::factorize(n);
  const std::int64_t rho = rho_max_multiplicative(P, f);
  const BigInt lhs = BigInt(rho) * BigInt(f.radical());
  BigInt rhs = n;
  for (int i = 0; i < f.omega(); ++i) rhs *= P.degree();
  return lhs <= rhs;
}

std::pair<Rat64, Rat64> interval_count_bounds(const PolynomialSpec& P, std::int64_t n,
                                              std::int64_t a, std::int64_t N) {
  if (n < 1) throw ContractError("interval_count_bounds: n must be >= 1");
  if (N < P.eval(n)) throw ContractError("interval_count_bounds: N must be >= P(n)");
  const std::int64_t rho = rho_count(P, n, n, a);
  if (rho == 0) throw ContractError("interval_count_bounds: a is not attainable mod n");
  const std::int64_t pinv = P.inverse_floor(N);
  const Rat64 scale(pinv, n);
  return {Rat64(rho) * (scale - 1), Rat64(rho) * (scale + 1)};
}

bool square_attains(std::int64_t p, int n_exp, std::int64_t a) {
  if (!is_small_prime(p)) throw ContractError("square_attains: p must be prime");
  if (n_exp < 1) throw ContractError("square_attains: exponent must be >= 1");
  const std::int64_t q = checked_pow(p, n_exp);
  a = floor_mod(a, q);
  if (a == 0) return true;
  int v = 0;
  std::int64_t rest = a;
  while (rest % p == 0) {
    rest /= p;
    ++v;
  }
  if (v % 2 != 0) return false;
  if (p > 2) return is_unit_square_mod_p(rest, p);
  const int two_r = v;
  if (two_r <= n_exp - 3) return rest % 8 == 1;
  if (two_r == n_exp - 2) return rest % 4 == 1;
  return two_r == n_exp - 1;  // rest odd by construction
}

std::int64_t square_rho_closed(std::int64_t p, int n_exp, std::int64_t a) {
  const std::int64_t q = checked_pow(p, n_exp);
  a = floor_mod(a, q);
  if (!square_attains(p, n_exp, a))
    throw ContractError("square_rho_closed: a not attainable mod p^n");
  const int half = n_exp / 2;
  if (a == 0) return checked_pow(p, half);
  int v = 0;
  std::int64_t rest = a;
  while (rest % p == 0) {
    rest /= p;
    ++v;
  }
  const int r = v / 2;
  if (p > 2) return checked_mul(2, checked_pow(p, r));
  if (n_exp <= 1) return 1;
  if (n_exp == 2) return 2;
  if (2 * r <= n_exp - 3) return checked_mul(4, checked_pow(2, r));
  if (2 * r == n_exp - 2) return checked_mul(2, checked_pow(2, r));
  return checked_pow(2, r);  // 2r == n_exp - 1
}

std::int64_t square_rho_max_closed(std::int64_t p, int n_exp) {
  if (!is_small_prime(p)) throw ContractError("square_rho_max_closed: p must be prime");
  if (n_exp < 1) throw ContractError("square_rho_max_closed: exponent must be >= 1");
  const int n = n_exp / 2;
  if (p == 2) {
    if (n_exp == 1) return 1;
    if (n_exp == 2) return 2;
    return n_exp % 2 == 0 ? checked_pow(2, n) : checked_pow(2, n + 1);
  }
  return n_exp % 2 == 0 ? checked_pow(p, n) : checked_mul(2, checked_pow(p, n));
}

std::int64_t square_psi_closed(std::int64_t p, int n_exp) {
  if (!is_small_prime(p)) throw ContractError("square_psi_closed: p must be prime");
  if (n_exp < 1) throw ContractError("square_psi_closed: exponent must be >= 1");
  const int n = n_exp / 2;
  if (p == 2) {
    if (n_exp % 2 == 0) return (checked_pow(2, 2 * n - 1) + 4) / 3;
    return (checked_pow(2, 2 * n) + 5) / 3;
  }
  if (n_exp % 2 == 0) return (checked_pow(p, 2 * n + 1) + p + 2) / (2 * (p + 1));
  return (checked_pow(p, 2 * n + 2) + 2 * p + 1) / (2 * (p + 1));
}

namespace {

std::int64_t tilde_psi_prime_power(std::int64_t p, int e) {
  if (p == 2) {
    if (e <= 2) return 2;
    return checked_pow(2, e - 3);
  }
  return checked_mul(checked_pow(p, e - 1), (p - 1) / 2);
}

}  // namespace

std::int64_t tilde_psi(std::int64_t n) {
  if (n < 2) throw ContractError("tilde_psi: n must be >= 2");
  std::int64_t out = 1;
  for (const auto& [p, e] : arith::factorize(n).prime_powers)
    out = checked_mul(out, tilde_psi_prime_power(p, e));
  return out;
}

bool tilde_attains(const arith::Factorization& f, std::int64_t a) {
  for (const auto& [p, e] : f.prime_powers) {
    const std::int64_t q = checked_pow(p, e);
    const std::int64_t r = floor_mod(a, q);
    if (p == 2) {
      if (e <= 2) {
        if (r > 1) return false;
      } else if (r % 8 != 1) {
        return false;
      }
    } else if (!is_unit_square_mod_p(r, p)) {
      return false;
    }
  }
  return true;
}

TildeSet tilde_residues(std::int64_t n) {
  if (n < 2) throw ContractError("tilde_residues: n must be >= 2");
  const auto f = arith::factorize(n);
  check_memory_budget(static_cast<std::uint64_t>(tilde_psi(n)) * 8, "tilde_residues");
  TildeSet out;
  out.modulus = n;
  for (std::int64_t a = 0; a < n; ++a)
    if (tilde_attains(f, a)) out.residues.push_back(a);
  out.psi_tilde = static_cast<std::int64_t>(out.residues.size());
  return out;
}

bool tilde_bounds_check(std::int64_t n) {
  if (n < 2) throw ContractError("tilde_bounds_check: n must be >= 2");
  const auto f = arith::factorize(n);
  const int omega = f.omega();

  // rho(n, a) is constant over the tilde set: a product over prime powers of
  // 1 (p^e = 2), 2 (odd p or p^e = 4) or 4 (2^e with e >= 3).
  BigInt rho = 1;
  for (const auto& [p, e] : f.prime_powers) {
    if (p == 2) {
      rho *= (e == 1) ? 1 : (e == 2 ? 2 : 4);
    } else {
      rho *= 2;
    }
  }
  const BigInt two_omega = BigInt(1) << omega;
  if (2 * rho < two_omega || rho > 2 * two_omega) return false;

  // (1/2) prod (1 - 1/p) <= 2^omega * tilde_psi(n) / n <= 4 prod (1 - 1/p)
  BigInt prod_p = 1, prod_pm1 = 1;
  for (const auto& [p, e] : f.prime_powers) {
    prod_p *= p;
    prod_pm1 *= (p - 1);
  }
  const BigInt mid = two_omega * tilde_psi(n) * prod_p;
  const BigInt edge = prod_pm1 * n;
  return 2 * mid >= edge && mid <= 4 * edge;
}

}  // namespace toeporb::polyres
