#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "toeporb/arith.hpp"
#include "toeporb/common.hpp"

namespace toeporb::polyres {

/// Monic polynomial with non-negative integer coefficients, degree > 1.
/// Strictly increasing on the non-negative integers.
class PolynomialSpec {
 public:
  /// coeffs[i] multiplies m^i; coeffs.back() must be 1.
  explicit PolynomialSpec(std::vector<std::int64_t> coeffs);

  static PolynomialSpec square() { return PolynomialSpec({0, 0, 1}); }
  static PolynomialSpec parse(const std::string& text);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<std::int64_t>& coefficients() const { return coeffs_; }

  std::int64_t eval(std::int64_t m) const;  // checked, throws std::overflow_error
  std::int64_t eval_mod(std::int64_t m, std::int64_t n) const;

  /// Largest m >= 0 with P(m) <= N. Requires N >= P(0).
  std::int64_t inverse_floor(std::int64_t N) const;

  std::string to_string() const;

  bool operator==(const PolynomialSpec&) const = default;

 private:
  std::vector<std::int64_t> coeffs_;
};

/// Attainable residues of P mod n with their hit counts over one period.
struct ResidueProfile {
  std::int64_t modulus = 1;
  std::vector<std::pair<std::int64_t, std::int64_t>> entries;  // (residue, rho), sorted
  std::int64_t rho_max = 0;

  std::int64_t psi() const { return static_cast<std::int64_t>(entries.size()); }
  bool attains(std::int64_t a) const;
  std::int64_t rho_of(std::int64_t a) const;  // 0 when a is not attainable
};

/// Direct enumeration of P(m) mod n over m in [1, n].
ResidueProfile residue_profile_brute(const PolynomialSpec& P, std::int64_t n);

/// Profile via CRT composition over the prime-power factorization of n.
ResidueProfile residue_profile(const PolynomialSpec& P, std::int64_t n);

ResidueProfile crt_compose(std::span<const ResidueProfile> profiles);

/// rho^P(N; n, a) = #{1 <= m <= N : P(m) == a mod n}.
std::int64_t rho_count(const PolynomialSpec& P, std::int64_t N, std::int64_t n, std::int64_t a);

/// Multiplicative evaluation of rho^P(n) = max_a rho^P(n, a).
std::int64_t rho_max_multiplicative(const PolynomialSpec& P, const arith::Factorization& f);

/// rho^P(n) <= d^omega(n) * n / radical(n).
bool albis_bound_check(const PolynomialSpec& P, std::int64_t n);

/// Exact sandwich for the count #{m : 1 <= P(m) <= N, P(m) == a mod n}:
/// rho(n,a)*(Pinv(N)/n - 1) <= count <= rho(n,a)*(Pinv(N)/n + 1).
std::pair<Rat64, Rat64> interval_count_bounds(const PolynomialSpec& P, std::int64_t n,
                                              std::int64_t a, std::int64_t N);

// Closed forms for P(m) = m^2 on prime powers.
bool square_attains(std::int64_t p, int n_exp, std::int64_t a);
std::int64_t square_rho_closed(std::int64_t p, int n_exp, std::int64_t a);
std::int64_t square_psi_closed(std::int64_t p, int n_exp);
std::int64_t square_rho_max_closed(std::int64_t p, int n_exp);

/// Near-minimal-rho attainable residues for P(m) = m^2.
struct TildeSet {
  std::int64_t modulus = 1;
  std::vector<std::int64_t> residues;  // sorted
  std::int64_t psi_tilde = 0;
};

TildeSet tilde_residues(std::int64_t n);
std::int64_t tilde_psi(std::int64_t n);
bool tilde_attains(const arith::Factorization& f, std::int64_t a);

/// Checks (1/2)*2^omega <= rho(n,a) <= 2*2^omega on the tilde set together
/// with the psi-tilde density sandwich against prod (1 - 1/p).
bool tilde_bounds_check(std::int64_t n);

}  // namespace toeporb::polyres
