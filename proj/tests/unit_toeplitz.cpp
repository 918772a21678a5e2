#include <doctest.h>

#include "toeporb/arith.hpp"
#include "toeporb/toeplitz.hpp"

using namespace toeporb;
using namespace toeporb::toeplitz;

namespace {

ToeplitzSkeleton two_stage_ab() {
  // w1 = "ab?" over {a=0, b=1}; stage 2 fills position 2 with 'a', keeps 5 holed
  Stage s1{3, {0, 1, kHole}};
  Stage s2{6, {0, 1, 0, 0, 1, kHole}};
  return ToeplitzSkeleton(2, {s1, s2});
}

ToeplitzSkeleton random_consistent(std::uint64_t seed, int alphabet = 2) {
  std::uint64_t state = seed;
  auto rng = [&state](std::int64_t lo, std::int64_t hi) {
    state = splitmix64(state);
    return lo + static_cast<std::int64_t>(state % static_cast<std::uint64_t>(hi - lo + 1));
  };
  const std::int64_t n1 = rng(2, 30);
  Stage s1;
  s1.period = n1;
  s1.word.resize(static_cast<std::size_t>(n1));
  for (auto& w : s1.word)
    w = rng(0, 2) == 0 ? kHole : static_cast<Symbol>(rng(0, alphabet - 1));
  const std::int64_t k = rng(2, 6);
  Stage s2;
  s2.period = n1 * k;
  s2.word.resize(static_cast<std::size_t>(s2.period));
  for (std::int64_t j = 0; j < s2.period; ++j) {
    const Symbol base = s1.word[static_cast<std::size_t>(j % n1)];
    s2.word[static_cast<std::size_t>(j)] =
        base != kHole ? base
                      : (rng(0, 1) == 0 ? kHole : static_cast<Symbol>(rng(0, alphabet - 1)));
  }
  return ToeplitzSkeleton(alphabet, {s1, s2});
}

}  // namespace

TEST_CASE("eval walks the stages and applies completion") {
  const auto sk = two_stage_ab();
  CHECK(sk.eval(0) == 0);
  CHECK(sk.eval(1) == 1);
  CHECK(sk.eval(2) == 0);   // filled at stage 2
  CHECK(sk.eval(5) == 0);   // holed at the last stage -> completion symbol 0
  CHECK(sk.eval(8) == 0);   // 8 mod 6 = 2
  CHECK(sk.eval(-1) == sk.eval(5));
  CHECK(sk.eval(-1 + 6 * 7) == sk.eval(-1));
}

TEST_CASE("fully periodic skeleton evaluates through stage 1") {
  Stage s1{2, {0, 1}};
  const ToeplitzSkeleton sk(2, {s1});
  for (std::int64_t j = -10; j <= 10; ++j) CHECK(sk.eval(j) == floor_mod(j, 2));
}

TEST_CASE("consistency violations are rejected") {
  Stage s1{2, {0, 1}};
  Stage bad{4, {0, 0, 0, 1}};  // overwrites a defined position
  CHECK_THROWS_AS(ToeplitzSkeleton(2, {s1, bad}), ContractError);
  Stage nondiv{3, {0, 1, 0}};
  CHECK_THROWS_AS(ToeplitzSkeleton(2, {s1, nondiv}), ContractError);
}

TEST_CASE("hole report ratios") {
  const auto sk = two_stage_ab();
  const auto report = sk.hole_report();
  REQUIRE(report.stages.size() == 2);
  CHECK(report.stages[0].holes == 1);
  CHECK(report.stages[0].hole_density == Rat64(1, 3));
  CHECK(report.stages[1].holes == 1);
  CHECK(report.stages[1].hole_density == Rat64(1, 6));

  Stage s1{2, {0, 1}};
  const ToeplitzSkeleton periodic(2, {s1});
  const auto rep2 = periodic.hole_report();
  CHECK(rep2.stages[0].holes == 0);
  CHECK(rep2.regularity_consistent);

  // density is non-increasing across stages for any consistent skeleton
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto rnd = random_consistent(seed);
    const auto rep = rnd.hole_report();
    CHECK(rep.stages[1].hole_density <= rep.stages[0].hole_density);
  }
}

TEST_CASE("tower diameter formula") {
  // holes at {0 mod 4}: delta = 1 + 1/2 + 1/4 + 1/2 = 9/4
  Stage st{4, {kHole, 0, 1, 0}};
  const ToeplitzSkeleton sk(2, {st});
  CHECK(sk.tower_diameter(1) == BigRat(9, 4));

  Stage full{4, {0, 1, 0, 1}};
  const ToeplitzSkeleton periodic(2, {full});
  CHECK(periodic.tower_diameter(1) == BigRat(0));

  // sandwich ?_t <= delta <= 3 ?_t on random skeletons, exact
  for (std::uint64_t seed = 100; seed < 200; ++seed) {
    const auto rnd = random_consistent(seed);
    for (int t = 1; t <= 2; ++t) {
      const std::int64_t holes = rnd.holes(t);
      const BigRat delta = rnd.tower_diameter(t);
      CHECK(delta >= BigRat(holes));
      CHECK(delta <= BigRat(3 * holes));
    }
  }
}

TEST_CASE("window recoding") {
  const auto sk = two_stage_ab();
  const auto w0 = sk.window(0);
  for (int t = 1; t <= 2; ++t) CHECK(w0.holes(t) == sk.holes(t));

  const auto w1 = sk.window(1);
  CHECK(w1.alphabet_size() == 8);
  CHECK(w1.holes(1) == 3);  // every window meets the single hole mod 3
  CHECK(w1.holes(1) <= 3 * sk.holes(1));

  // window hole inequality across radii, exact
  for (std::uint64_t seed = 300; seed < 320; ++seed) {
    const auto rnd = random_consistent(seed);
    for (int m = 0; m <= 8; ++m) {
      const auto w = rnd.window(m);
      for (int t = 1; t <= rnd.stage_count(); ++t)
        CHECK(w.holes(t) <= (2 * m + 1) * rnd.holes(t));
    }
  }

  // windowed eval composes base evaluations, completion included
  const auto w2 = sk.window(1);
  for (std::int64_t j = -6; j <= 12; ++j) {
    const std::int64_t expect =
        (sk.eval(j - 1) * 2 + sk.eval(j)) * 2 + sk.eval(j + 1);
    CHECK(w2.eval(j) == expect);
  }
}

TEST_CASE("text round trip") {
  auto sk = two_stage_ab();
  const std::string text = sk.to_text();
  const auto back = ToeplitzSkeleton::from_text(text);
  CHECK(back.to_text() == text);
  CHECK(back.alphabet_size() == 2);
  CHECK(back.stage_count() == 2);
  CHECK(back.eval(5) == sk.eval(5));

  // round trip preserves metadata and completion
  Stage s1{3, {1, kHole, 0}};
  const ToeplitzSkeleton meta_sk(3, {s1}, 2, {{"builder", "test"}, {"k_seq", "3"}});
  const auto again = ToeplitzSkeleton::from_text(meta_sk.to_text());
  CHECK(again.metadata().at("builder") == "test");
  CHECK(again.completion_symbol() == 2);
  CHECK(again.to_text() == meta_sk.to_text());

  CHECK_THROWS_AS(ToeplitzSkeleton::from_text("no header"), ContractError);
  CHECK_THROWS_AS(ToeplitzSkeleton::from_text("alphabet: 01\n3:0?"), ContractError);

  // random skeletons round trip byte-identically
  for (std::uint64_t seed = 400; seed < 430; ++seed) {
    const auto rnd = random_consistent(seed, 3);
    CHECK(ToeplitzSkeleton::from_text(rnd.to_text()).to_text() == rnd.to_text());
  }
}

TEST_CASE("hole report carries the polynomial hit-count ratio") {
  Stage s1{8, {0, kHole, 1, kHole, 0, kHole, 1, kHole}};
  const ToeplitzSkeleton sk(2, {s1});
  const auto square_rep = sk.hole_report();
  // rho(8) = 4 for m^2, so the ratio is 4 * 4 / 8 = 2
  CHECK(square_rep.stages[0].poly_ratio == Rat64(2));

  const auto cubic_rep = sk.hole_report(polyres::PolynomialSpec({1, 2, 0, 1}));
  const auto prof = polyres::residue_profile_brute(polyres::PolynomialSpec({1, 2, 0, 1}), 8);
  CHECK(cubic_rep.stages[0].poly_ratio == Rat64(4 * prof.rho_max, 8));
}

TEST_CASE("eval is periodic outside the residual holes") {
  const auto sk = two_stage_ab();
  const std::int64_t n = sk.period(2);
  for (std::int64_t j = 0; j < n; ++j)
    for (std::int64_t rep = -2; rep <= 2; ++rep) CHECK(sk.eval(j) == sk.eval(j + rep * n));
}
