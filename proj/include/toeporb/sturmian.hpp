#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

#include "toeporb/arith.hpp"
#include "toeporb/averaging.hpp"
#include "toeporb/common.hpp"

namespace toeporb::sturmian {

/// Point of the circle as v / 2^128. Addition wraps (mod 1) exactly.
struct Fixed128 {
  unsigned __int128 v = 0;

  static Fixed128 from_fraction(std::uint64_t num, std::uint64_t den);
  static Fixed128 from_double(double x);

  Fixed128 plus(Fixed128 o) const { return Fixed128{static_cast<unsigned __int128>(v + o.v)}; }
  Fixed128 minus(Fixed128 o) const { return Fixed128{static_cast<unsigned __int128>(v - o.v)}; }
  /// k * alpha mod 1, exact for any signed k.
  Fixed128 times(std::int64_t k) const;
  double to_double() const;

  auto operator<=>(const Fixed128&) const = default;
};

/// Irrational-rotation surrogate: high-precision fixed-point alpha with the
/// convergent denominator recorded, a cut point beta and a start point.
struct RotationSpec {
  Fixed128 alpha;
  Fixed128 beta;
  Fixed128 x0;
  std::string description;
  // alpha approximates a continued-fraction convergent num/den; den bounds
  // the surrogate gap by 1/den^2.
  std::uint64_t denominator = 0;
  long double denominator_ld = 0.0L;  // exact denominators can exceed 64 bits

  /// Convergent p/q of 1/phi with q > 2^80; beta = alpha, x0 = 0.
  static RotationSpec golden();
  /// Convergent of 1/phi^2 with beta = 1 - alpha (the canonical binary coding).
  static RotationSpec golden_conjugate();

  /// Bound on the phase drift versus the true irrational after N steps.
  double surrogate_gap_bound(std::int64_t N) const;
};

/// x-bar(k): 0 iff frac(x0 + k*alpha) lies in [0, beta).
int code(const RotationSpec& spec, std::int64_t k);

/// One refinement atom of the coding partition for window radius m.
struct Atom {
  Fixed128 start;
  Fixed128 length;
  std::int64_t word_code = 0;  // big-endian over coordinates -m..m
};

std::vector<Atom> refinement_atoms(const RotationSpec& spec, int radius);

/// Lebesgue prediction: sum of atom lengths weighted by the observable.
double lebesgue_prediction(const RotationSpec& spec, const averaging::ObservableSpec& F);

averaging::AverageReport prime_orbit_average(const RotationSpec& spec,
                                             const averaging::ObservableSpec& F,
                                             const arith::PrimeTable& table, std::int64_t N);

/// |(1/pi(N)) sum_{p<=N} e^{2 pi i alpha p}|.
double vinogradov_sum(Fixed128 alpha, const arith::PrimeTable& table, std::int64_t N);

}  // namespace toeporb::sturmian
