#include <doctest.h>

#include <set>

#include <boost/rational.hpp>

#include "toeporb/arith.hpp"
#include "toeporb/averaging.hpp"
#include "toeporb/constructions.hpp"

using namespace toeporb;
using namespace toeporb::constructions;
using toeplitz::kHole;

namespace {

BuildConfig desk_config(int stages = 3) {
  BuildConfig cfg;
  cfg.growth_constant = 2;
  cfg.stage_budget = stages;
  cfg.seed = 0;
  return cfg;
}

}  // namespace

TEST_CASE("theorem A builder produces passing certificates") {
  const auto result = build_theorem_a(desk_config());
  const auto& sk = result.skeleton;
  REQUIRE(sk.stage_count() == 3);
  CHECK(sk.period(3) <= 100'000'000);
  REQUIRE(result.certificates.size() == 3);
  for (const auto& cert : result.certificates) {
    INFO("stage ", cert.stage);
    CHECK(cert.all_pass());
  }
  // ratio decays by at least q each stage (the closing identity)
  for (int t = 2; t <= 3; ++t) {
    const Rat64 prev(arith::euler_phi(sk.period(t - 1)), sk.period(t - 1));
    const Rat64 cur(arith::euler_phi(sk.period(t)), sk.period(t));
    CHECK(cur <= prev * Rat64(7, 8));
  }
}

TEST_CASE("stage budget of one returns the initial stage with no certificates") {
  const auto result = build_theorem_a(desk_config(1));
  CHECK(result.skeleton.stage_count() == 1);
  CHECK(result.certificates.empty());
}

TEST_CASE("builders are deterministic") {
  const auto a = build_theorem_a(desk_config());
  const auto b = build_theorem_a(desk_config());
  CHECK(a.skeleton.to_text() == b.skeleton.to_text());

  auto cfg = desk_config(2);
  cfg.fill_policy = FillPolicy::kSeededRandom;
  cfg.seed = 1234;
  const auto c = build_theorem_a(cfg);
  const auto d = build_theorem_a(cfg);
  CHECK(c.skeleton.to_text() == d.skeleton.to_text());
  cfg.seed = 99;
  const auto e = build_theorem_a(cfg);
  CHECK(c.skeleton.to_text() != e.skeleton.to_text());
}

TEST_CASE("affine coprime-count identity on built stages") {
  const auto result = build_theorem_a(desk_config());
  const auto& sk = result.skeleton;
  std::uint64_t state = 3;
  for (int t = 2; t <= sk.stage_count(); ++t) {
    const std::int64_t n_prev = sk.period(t - 1);
    const std::int64_t n = sk.period(t);
    const std::int64_t k = n / n_prev;
    const std::int64_t phi_k = arith::euler_phi(k);
    int sampled = 0;

    while (sampled < 20) {
      state = splitmix64(state);
      const std::int64_t a = static_cast<std::int64_t>(state % static_cast<std::uint64_t>(n_prev));
      if (gcd64(a == 0 ? n_prev : a, n_prev) != 1) continue;
      ++sampled;
      std::int64_t count = 0;
      for (std::int64_t j = 0; j < k; ++j)
        if (gcd64(a + j * n_prev, n) == 1) ++count;
      CHECK(count == phi_k);
    }
    // every residue coprime to n reduces to one coprime to n_prev
    for (std::int64_t i = 0; i < n; ++i)
      if (gcd64(i == 0 ? n : i, n) == 1) CHECK(gcd64(i % n_prev == 0 ? n_prev : i % n_prev, n_prev) == 1);
  }
}

TEST_CASE("paper-scale constant is infeasible at desk budgets") {
  auto cfg = desk_config();
  cfg.growth_constant = 100;
  cfg.stage_budget = 4;
  try {
    build_theorem_a(cfg);
    FAIL("expected a budget refusal");
  } catch (const BuildError& e) {
    // the binding condition is named
    CHECK(!e.condition().empty());
    CHECK(std::string(e.what()).find("no admissible k") != std::string::npos);
  }
}

TEST_CASE("validate_stage notices an injected violation") {
  // hand-build a skeleton with a hole at a non-coprime position
  toeplitz::Stage s1{6, {0, kHole, 1, 0, 1, kHole}};  // hole at 1? position 1 coprime; hole at 5 coprime; inject at 2
  s1.word[2] = kHole;                                  // position 2 shares a factor with 6
  const toeplitz::ToeplitzSkeleton bad(2, {s1});
  const auto cert = validate_stage(bad, 1, TheoremId::kTheoremA);
  CHECK(!cert.all_pass());
  bool t3_failed = false;
  bool others_reported = false;
  for (const auto& c : cert.conditions) {
    if (c.name == "t3") t3_failed = !c.pass;
    if (c.name == "t2") others_reported = true;
  }
  CHECK(t3_failed);
  CHECK(others_reported);
}

TEST_CASE("certificates serialize one JSON line per condition") {
  const auto result = build_theorem_a(desk_config(2));
  const auto lines = result.certificates.front().to_json_lines();
  const auto newlines = std::count(lines.begin(), lines.end(), '\n');
  CHECK(newlines == static_cast<std::int64_t>(result.certificates.front().conditions.size()));
  CHECK(lines.find("\"condition\":\"t2\"") != std::string::npos);
  CHECK(lines.find("\"pass\":true") != std::string::npos);
}

TEST_CASE("SPNT builder: squares, certificates, semiprime conditions") {
  const auto result = build_spnt_counterexample(desk_config(2));
  const auto& sk = result.skeleton;
  REQUIRE(sk.stage_count() == 2);
  for (int t = 1; t <= 2; ++t) {
    const std::int64_t n = sk.period(t);
    const std::int64_t r = isqrt64(n);
    CHECK(r * r == n);  // all periods are perfect squares
  }
  for (const auto& cert : result.certificates) {
    INFO("stage ", cert.stage);
    CHECK(cert.all_pass());
  }
  // revalidation from the serialized form alone
  const auto back = toeplitz::ToeplitzSkeleton::from_text(sk.to_text());
  for (int t = 1; t <= 2; ++t)
    CHECK(validate_stage(back, t, TheoremId::kSemiprime).all_pass());
}

TEST_CASE("theorem A holes stay a positive fraction of the totient") {
  const auto result = build_theorem_a(desk_config());
  const auto report = result.skeleton.hole_report();
  for (std::size_t i = 0; i < report.stages.size(); ++i) {
    // the hole-count floor (1 - sum 2^-l) phi keeps the ratio away from zero
    BigRat floor = 1;
    BigInt pw = 1;
    for (std::size_t l = 1; l <= i + 1; ++l) {
      pw *= 2;
      floor -= BigRat(BigInt(1), pw);
    }
    const auto& s = report.stages[i];
    CHECK(BigRat(BigInt(s.totient_ratio.numerator()), BigInt(s.totient_ratio.denominator())) >=
          floor);
  }
}

TEST_CASE("stage conditions at the paper ratio bound") {
  // phi(30)/30 = 4/15 <= 1/2, so a first stage with modulus 30 satisfies the
  // paper-value bound; all coprime positions holed
  toeplitz::Stage st;
  st.period = 30;
  st.word.resize(30);
  for (std::int64_t j = 0; j < 30; ++j)
    st.word[static_cast<std::size_t>(j)] = gcd64(j == 0 ? 30 : j, 30) == 1 ? kHole : 0;
  const toeplitz::ToeplitzSkeleton sk(2, {st});
  BuildConfig paper;
  paper.ratio_bound = Rat64(1, 2);
  const auto cert = validate_stage(sk, 1, TheoremId::kTheoremA, &paper);
  for (const auto& c : cert.conditions) {
    INFO(c.name, ": ", c.lhs, " ", c.relation, " ", c.rhs);
    CHECK(c.pass);
  }
}

TEST_CASE("SPNT two-stage run oscillates past the target") {
  const auto result = build_spnt_counterexample(desk_config(2));
  const arith::PrimeTable table(result.skeleton.period(2));
  const auto points = averaging::oscillation_witness(
      result.skeleton, averaging::IndexKind::kSemiprimes, {1, 2},
      averaging::ObservableSpec::parity(), table);
  REQUIRE(points.size() == 2);
  const BuildConfig cfg = desk_config(2);
  CHECK(*points[1].gap >= boost::rational_cast<double>(cfg.oscillation_target));
}

TEST_CASE("squares builder single stage is trivially consistent") {
  BuildConfig cfg;
  cfg.stage_budget = 1;
  const auto result = build_squares_counterexample(cfg);
  CHECK(result.skeleton.stage_count() == 1);
  CHECK(result.certificates.empty());
  CHECK(validate_stage(result.skeleton, 1, TheoremId::kSquares).all_pass());
}

TEST_CASE("squares builder: support, beta, certificates") {
  BuildConfig cfg;
  cfg.stage_budget = 2;
  cfg.square_support = {2, 3, 5};
  const auto result = build_squares_counterexample(cfg);
  CHECK(result.skeleton.metadata().at("beta") == "1/60");
  for (const auto& cert : result.certificates) {
    INFO("stage ", cert.stage);
    CHECK(cert.all_pass());
  }
  const auto& sk = result.skeleton;
  // holes live inside the attainable residues: spot-check squares stay holed
  const std::int64_t n2 = sk.period(2);
  for (std::int64_t m = 0; m * m < n2; ++m) {
    const auto v = sk.stage(2).word[static_cast<std::size_t>(m * m)];
    // squares of the first block were filled; later ones stay holed
    if (m * m >= sk.period(1)) CHECK(v == kHole);
  }

  // three stages cannot fit the default modulus budget
  cfg.stage_budget = 3;
  CHECK_THROWS_AS(build_squares_counterexample(cfg), BuildError);

  // bad support is a config error
  cfg.square_support = {4};
  CHECK_THROWS_AS(cfg.validate(), ContractError);
}

TEST_CASE("bounded holes family") {
  const auto sk = build_bounded_holes(2, {2, 4, 8, 16, 32}, 1);
  REQUIRE(sk.stage_count() == 5);
  for (int t = 1; t <= 5; ++t) CHECK(sk.holes(t) == 1);
  const auto report = sk.hole_report();
  for (std::size_t i = 1; i < report.stages.size(); ++i)
    CHECK(report.stages[i].totient_ratio < report.stages[i - 1].totient_ratio);
  for (int t = 1; t <= 5; ++t) CHECK(sk.tower_diameter(t) <= BigRat(3));

  CHECK_THROWS_AS(build_bounded_holes(2, {4, 6}, 1), ContractError);  // not nested

  // phi(2) = 1 < 2 holes: placement falls back and says so in the metadata
  const auto fallback = build_bounded_holes(2, {2, 4}, 2);
  CHECK(fallback.metadata().count("coprime_placement") == 1);
  CHECK(fallback.holes(1) == 2);
}
