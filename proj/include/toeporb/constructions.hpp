#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toeporb/arith.hpp"
#include "toeporb/common.hpp"
#include "toeporb/toeplitz.hpp"

namespace toeporb::constructions {

enum class TheoremId { kTheoremA, kSemiprime, kSquares };

std::string theorem_name(TheoremId id);
TheoremId theorem_from_name(const std::string& name);

enum class FillPolicy { kAlternatingTarget, kSeededRandom };

struct BuildConfig {
  std::int64_t growth_constant = 2;  // the paper-scale constant; desk default 2
  Rat64 ratio_bound{7, 8};           // per-stage totient-ratio factor (paper value: 1/2)
  int stage_budget = 3;
  std::int64_t modulus_budget = 100'000'000;
  FillPolicy fill_policy = FillPolicy::kAlternatingTarget;
  Rat64 oscillation_target{1, 2};
  std::uint64_t seed = 0;
  std::vector<std::int64_t> square_support = {2, 3, 5};

  void validate() const;
  std::string canonical_string() const;
};

struct ConditionRecord {
  std::string name;
  std::string lhs;
  std::string rhs;
  std::string relation;
  bool pass = false;
  std::string note;
};

struct StageCertificate {
  int stage = 0;
  TheoremId theorem = TheoremId::kTheoremA;
  std::vector<ConditionRecord> conditions;

  bool all_pass() const;
  const ConditionRecord* first_failure() const;
  /// One JSON line per condition.
  std::string to_json_lines() const;
};

struct BuildResult {
  toeplitz::ToeplitzSkeleton skeleton;
  std::vector<StageCertificate> certificates;
};

BuildResult build_theorem_a(const BuildConfig& config);
BuildResult build_spnt_counterexample(const BuildConfig& config);
BuildResult build_squares_counterexample(const BuildConfig& config);

toeplitz::ToeplitzSkeleton build_bounded_holes(int alphabet_size,
                                               const std::vector<std::int64_t>& periods,
                                               int holes_per_stage);

/// Recomputes every side of every condition for stage t from the skeleton
/// words alone. Builder parameters (c, q, support) are read from the
/// skeleton metadata unless an explicit config is passed.
StageCertificate validate_stage(const toeplitz::ToeplitzSkeleton& skeleton, int t, TheoremId which,
                                const BuildConfig* config = nullptr);

/// The alternating fill target for the stage-t average: symbol 0 pushes the
/// parity observable toward +1 on odd t, symbol 1 toward -1 on even t.
toeplitz::Symbol alternating_target(int t);

}  // namespace toeporb::constructions
