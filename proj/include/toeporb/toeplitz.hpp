#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "toeporb/common.hpp"
#include "toeporb/polyres.hpp"

namespace toeporb::toeplitz {

using Symbol = std::int32_t;
inline constexpr Symbol kHole = -1;

struct Stage {
  std::int64_t period = 0;
  std::vector<Symbol> word;  // length == period, entries in [0, alphabet) or kHole
};

struct HoleStageStats {
  std::int64_t period = 0;
  std::int64_t holes = 0;
  Rat64 hole_density{0};        // ?_t / n_t
  Rat64 totient_ratio{0};       // ?_t / phi(n_t)
  Rat64 poly_ratio{0};          // ?_t * rho^P(n_t) / n_t
};

struct HoleReport {
  std::string poly;
  std::vector<HoleStageStats> stages;
  // Finite-prefix consistency flags: the ratio sequence is non-increasing and
  // ends at or below the threshold.
  bool regularity_consistent = false;      // ?_t / n_t -> 0 style
  bool totient_consistent = false;         // ?_t / phi(n_t) -> 0 style
  bool poly_consistent = false;            // ?_t * rho^P(n_t) / n_t -> 0 style
  Rat64 threshold{1, 2};
};

/// Staged periodic words with holes. Stage periods are nested (n_t | n_{t+1})
/// and defined positions never change across stages. Positions still holed at
/// the last stage evaluate through the completion policy. Immutable.
class ToeplitzSkeleton {
 public:
  ToeplitzSkeleton(int alphabet_size, std::vector<Stage> stages, Symbol completion_symbol = 0,
                   std::map<std::string, std::string> metadata = {});

  int alphabet_size() const { return alphabet_size_; }
  int stage_count() const { return static_cast<int>(stages_.size()); }
  const Stage& stage(int t) const { return stages_.at(static_cast<std::size_t>(t - 1)); }
  std::int64_t period(int t) const { return stage(t).period; }
  Symbol completion_symbol() const { return completion_symbol_; }
  const std::map<std::string, std::string>& metadata() const { return metadata_; }

  /// w_t(j mod n_t); may be kHole.
  Symbol stage_symbol(int t, std::int64_t j) const;

  /// First-defined-stage value at j, completion policy applied if never defined.
  Symbol eval(std::int64_t j) const;

  /// Number of holes in one period of stage t.
  std::int64_t holes(int t) const;
  std::vector<std::int64_t> hole_positions(int t) const;

  /// Exact tower diameter delta(E^t) as a dyadic rational.
  BigRat tower_diameter(int t) const;

  HoleReport hole_report(const polyres::PolynomialSpec& P = polyres::PolynomialSpec::square(),
                         Rat64 threshold = Rat64{1, 2}) const;

  /// Sliding-window recoding over the alphabet of (2m+1)-tuples. The result
  /// keeps a view of this skeleton so that eval() composes the base
  /// completion per coordinate.
  ToeplitzSkeleton window(int m) const;
  bool is_window_view() const { return window_base_ != nullptr; }
  int window_radius() const { return window_radius_; }

  std::string to_text() const;
  static ToeplitzSkeleton from_text(const std::string& text);

  /// Re-checks divisibility, symbol ranges and monotone consistency.
  void validate() const;

 private:
  int alphabet_size_;
  std::vector<Stage> stages_;
  Symbol completion_symbol_;
  std::map<std::string, std::string> metadata_;
  std::shared_ptr<const ToeplitzSkeleton> window_base_;
  int window_radius_ = 0;
};

std::int64_t encode_window(const std::vector<Symbol>& symbols, int alphabet_size);

}  // namespace toeporb::toeplitz
