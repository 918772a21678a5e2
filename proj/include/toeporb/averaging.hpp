#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "toeporb/arith.hpp"
#include "toeporb/common.hpp"
#include "toeporb/polyres.hpp"
#include "toeporb/toeplitz.hpp"

namespace toeporb::averaging {

/// Cylinder observable: a real table over words of length 2*radius+1.
struct ObservableSpec {
  int radius = 0;
  int alphabet_size = 2;
  std::vector<double> table;  // size alphabet_size^(2*radius+1)

  ObservableSpec(int radius, int alphabet_size, std::vector<double> table);

  /// F(y) = (-1)^{y(0)} over a binary alphabet.
  static ObservableSpec parity();
  static ObservableSpec constant(double c, int alphabet_size = 2);
  /// Indicator of y(0) == symbol.
  static ObservableSpec indicator(int symbol, int alphabet_size = 2);

  double sup_norm() const;
  std::size_t size() const { return table.size(); }
};

enum class IndexKind { kPrimes, kSemiprimes, kPolynomial };

std::string index_kind_name(IndexKind kind);
IndexKind index_kind_from_name(const std::string& name);

struct AverageReport {
  IndexKind kind = IndexKind::kPrimes;
  std::string poly;  // set for polynomial averages
  std::int64_t N = 0;
  std::int64_t shift = 0;
  double value = 0.0;
  std::int64_t normalization = 0;
  std::optional<double> predicted;
  std::optional<double> error_bound;
};

/// Caps the worker count for the chunked accumulators. Results are identical
/// for any cap: chunks are merged in ascending index order.
void set_thread_cap(int threads);
int thread_cap();

AverageReport prime_average(const toeplitz::ToeplitzSkeleton& skeleton, const ObservableSpec& F,
                            const arith::PrimeTable& table, std::int64_t N, std::int64_t r);

AverageReport semiprime_average(const toeplitz::ToeplitzSkeleton& skeleton,
                                const ObservableSpec& F, const arith::PrimeTable& table,
                                std::int64_t N, std::int64_t r);

AverageReport poly_average(const toeplitz::ToeplitzSkeleton& skeleton,
                           const polyres::PolynomialSpec& P, const ObservableSpec& F,
                           std::int64_t N, std::int64_t r);

/// The average over 0 <= m < sqrt(scale) of F(S^{m^2 + r} x); the counterexample scale.
AverageReport square_scale_average(const toeplitz::ToeplitzSkeleton& skeleton,
                                   const ObservableSpec& F, std::int64_t scale, std::int64_t r);

struct PredictedLimit {
  double value = 0.0;
  double error_bound = 0.0;  // guarantee radius, not sharp
  std::int64_t stage_modulus = 0;
  std::int64_t holes = 0;  // holes of the windowed stage
};

PredictedLimit predicted_prime_limit(const toeplitz::ToeplitzSkeleton& skeleton, int stage,
                                     const ObservableSpec& F, std::int64_t r);

PredictedLimit predicted_poly_limit(const toeplitz::ToeplitzSkeleton& skeleton,
                                    const polyres::PolynomialSpec& P, int stage,
                                    const ObservableSpec& F, std::int64_t r);

struct OscillationPoint {
  int stage = 0;
  std::int64_t scale = 0;
  double value = 0.0;
  std::optional<double> gap;  // |value - previous value|
};

std::vector<OscillationPoint> oscillation_witness(const toeplitz::ToeplitzSkeleton& skeleton,
                                                  IndexKind kind, const std::vector<int>& stages,
                                                  const ObservableSpec& F,
                                                  const arith::PrimeTable& table,
                                                  std::int64_t r = 0);

/// CSV with a header row and a trailing metadata comment block.
void write_reports_csv(std::ostream& os, const std::vector<AverageReport>& reports,
                       const std::string& config_hash);
std::string report_to_json(const AverageReport& report);

}  // namespace toeporb::averaging
