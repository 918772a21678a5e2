#include <doctest.h>

#include <map>

#include "toeporb/polyres.hpp"

using namespace toeporb;
using namespace toeporb::polyres;

namespace {

const PolynomialSpec kSquare = PolynomialSpec::square();
const PolynomialSpec kSquarePlus({0, 1, 1});    // m^2 + m
const PolynomialSpec kCubic({1, 2, 0, 1});      // m^3 + 2m + 1

}  // namespace

TEST_CASE("polynomial basics") {
  CHECK(kSquare.degree() == 2);
  CHECK(kSquare.eval(7) == 49);
  CHECK(kCubic.eval(10) == 1021);
  CHECK_THROWS_AS(kCubic.eval(3'000'000'000'000'000'000), std::overflow_error);
  CHECK(kCubic.to_string() == "m^3+2m+1");
  CHECK(PolynomialSpec::parse("m^2") == kSquare);
  CHECK(PolynomialSpec::parse("m^2+m") == kSquarePlus);
  CHECK(PolynomialSpec::parse("m^3+2m+1") == kCubic);
  CHECK_THROWS_AS(PolynomialSpec({0, 1}), ContractError);        // degree 1
  CHECK_THROWS_AS(PolynomialSpec({0, 0, 2}), ContractError);     // not monic
  CHECK_THROWS_AS(PolynomialSpec::parse("m^2+x"), ContractError);

  // strictly increasing on samples
  for (std::int64_t m = 0; m < 50; ++m) CHECK(kCubic.eval(m) < kCubic.eval(m + 1));
}

TEST_CASE("integer inverse brackets the value") {
  for (const auto& P : {kSquare, kSquarePlus, kCubic}) {
    for (std::int64_t N : {1, 2, 5, 10, 100, 12345, 99999999}) {
      if (N < P.eval(0)) continue;
      const std::int64_t m = P.inverse_floor(N);
      CHECK(P.eval(m) <= N);
      CHECK(P.eval(m + 1) > N);
    }
  }
  CHECK(kSquare.inverse_floor(100) == 10);
  CHECK(kSquare.inverse_floor(99) == 9);
}

TEST_CASE("residue profiles by enumeration") {
  const auto p5 = residue_profile_brute(kSquare, 5);
  CHECK(p5.psi() == 3);
  CHECK(p5.attains(0));
  CHECK(p5.attains(1));
  CHECK(p5.attains(4));
  CHECK(!p5.attains(2));
  CHECK(p5.attains(9));  // reduced mod 5

  const auto p1 = residue_profile_brute(kSquare, 1);
  CHECK(p1.psi() == 1);
  CHECK(p1.attains(0));

  const auto p4 = residue_profile_brute(kSquare, 4);
  for (const auto& [a, rho] : p4.entries) CHECK(rho == 2);

  // rho values sum to the modulus
  for (std::int64_t n = 1; n <= 100; ++n) {
    const auto prof = residue_profile_brute(kCubic, n);
    std::int64_t sum = 0;
    for (const auto& [a, rho] : prof.entries) sum += rho;
    CHECK(sum == n);
    CHECK(prof.psi() == static_cast<std::int64_t>(prof.entries.size()));
  }
}

TEST_CASE("rho_count") {
  CHECK(rho_count(kSquare, 9, 9, 0) == 3);  // m = 3, 6, 9
  CHECK(rho_count(kSquare, 9, 9, 1) == 2);  // m = 1, 8
  CHECK(rho_count(kSquare, 9, 9, 2) == 0);  // unattainable
  // periodic fast path equals enumeration
  std::uint64_t state = 5;
  for (int trial = 0; trial < 200; ++trial) {
    state = splitmix64(state);
    const std::int64_t n = 1 + static_cast<std::int64_t>(state % 60);
    state = splitmix64(state);
    const std::int64_t N = 1 + static_cast<std::int64_t>(state % 5000);
    state = splitmix64(state);
    const std::int64_t a = static_cast<std::int64_t>(state % static_cast<std::uint64_t>(n));
    std::int64_t direct = 0;
    for (std::int64_t m = 1; m <= N; ++m)
      if (kSquarePlus.eval_mod(m, n) == a) ++direct;
    CHECK(rho_count(kSquarePlus, N, n, a) == direct);
  }
}

TEST_CASE("crt composition equals direct enumeration") {
  // spec examples
  const auto c49 = crt_compose(std::vector<ResidueProfile>{residue_profile_brute(kSquare, 4),
                                                           residue_profile_brute(kSquare, 9)});
  CHECK(c49.psi() == 8);  // psi(4) * psi(9) = 2 * 4
  CHECK(c49.entries == residue_profile_brute(kSquare, 36).entries);

  const auto single = crt_compose(std::vector<ResidueProfile>{residue_profile_brute(kCubic, 7)});
  CHECK(single.entries == residue_profile_brute(kCubic, 7).entries);

  const auto c35 = crt_compose(std::vector<ResidueProfile>{residue_profile_brute(kCubic, 5),
                                                           residue_profile_brute(kCubic, 7)});
  CHECK(c35.entries == residue_profile_brute(kCubic, 35).entries);

  CHECK_THROWS_AS(crt_compose(std::vector<ResidueProfile>{residue_profile_brute(kSquare, 4),
                                                          residue_profile_brute(kSquare, 6)}),
                  ContractError);

  // family sweep: composed profile equals brute force for every n
  for (const auto& P : {kSquare, kSquarePlus, kCubic}) {
    for (std::int64_t n = 2; n <= 2000; ++n) {
      const auto composed = residue_profile(P, n);
      const auto direct = residue_profile_brute(P, n);
      REQUIRE(composed.entries == direct.entries);
      REQUIRE(composed.rho_max == direct.rho_max);
    }
  }
}

TEST_CASE("albis bound") {
  CHECK(albis_bound_check(kSquare, 9));
  CHECK(albis_bound_check(kSquare, 2));
  for (std::int64_t n = 2; n <= 2000; ++n) CHECK(albis_bound_check(kCubic, n));
}

TEST_CASE("interval count bounds sandwich the enumerated count") {
  const auto [lo1, hi1] = interval_count_bounds(kSquare, 5, 1, 100);
  CHECK(lo1 == Rat64(2));
  CHECK(hi1 == Rat64(6));
  CHECK(rho_count(kSquare, 10, 5, 1) == 4);  // m in {1, 4, 6, 9}
  const auto [lo2, hi2] = interval_count_bounds(kSquare, 5, 0, 25);
  CHECK(lo2 == Rat64(0));
  CHECK(hi2 == Rat64(2));
  CHECK_THROWS_AS(interval_count_bounds(kSquare, 5, 2, 100), ContractError);
  CHECK_THROWS_AS(interval_count_bounds(kSquare, 5, 1, 20), ContractError);

  // remark-form: |rho(N;n,a) - rho(n,a) N/n| <= rho(n,a)
  std::uint64_t state = 11;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto& P = trial % 2 ? kSquarePlus : kCubic;
    state = splitmix64(state);
    const std::int64_t n = 1 + static_cast<std::int64_t>(state % 80);
    const auto prof = residue_profile_brute(P, n);
    state = splitmix64(state);
    const auto& entry = prof.entries[static_cast<std::size_t>(
        state % static_cast<std::uint64_t>(prof.psi()))];
    state = splitmix64(state);
    const std::int64_t N = 1 + static_cast<std::int64_t>(state % 10000);
    const std::int64_t count = rho_count(P, N, n, entry.first);
    const Rat64 center = Rat64(entry.second) * Rat64(N, n);
    CHECK(Rat64(count) >= center - entry.second);
    CHECK(Rat64(count) <= center + entry.second);
  }
}

TEST_CASE("square closed forms on small prime powers") {
  CHECK(square_rho_closed(3, 2, 0) == 3);
  CHECK(square_rho_closed(2, 1, 1) == 1);
  CHECK(square_rho_closed(3, 4, 9) == 6);  // a = 3^2 * 1
  CHECK(square_psi_closed(3, 2) == 4);     // {0,1,4,7}
  CHECK(square_psi_closed(2, 3) == 3);     // {0,1,4}
  CHECK(square_psi_closed(2, 2) == 2);     // {0,1}
  CHECK_THROWS_AS(square_rho_closed(3, 2, 2), ContractError);

  for (std::int64_t p : {2, 3, 5, 7}) {
    std::int64_t q = p;
    int e = 1;
    while (q <= 3000) {
      std::map<std::int64_t, std::int64_t> counts;
      for (std::int64_t m = 1; m <= q; ++m) ++counts[m * m % q];
      std::int64_t psi = 0;
      for (std::int64_t a = 0; a < q; ++a) {
        const auto it = counts.find(a);
        const bool attained = it != counts.end();
        REQUIRE(square_attains(p, e, a) == attained);
        if (attained) REQUIRE(square_rho_closed(p, e, a) == it->second);
        if (attained) ++psi;
      }
      REQUIRE(square_psi_closed(p, e) == psi);
      std::int64_t best = 0;
      for (const auto& [a, c] : counts) best = std::max(best, c);
      REQUIRE(square_rho_max_closed(p, e) == best);
      q *= p;
      ++e;
    }
  }
}

TEST_CASE("tilde residues and bounds") {
  const auto t3 = tilde_residues(3);
  CHECK(t3.residues == std::vector<std::int64_t>{1});
  CHECK(t3.psi_tilde == 1);
  CHECK(tilde_psi(2) == 2);
  CHECK(tilde_psi(12) == 2);  // tilde_psi(4) * tilde_psi(3)

  // multiplicativity of tilde_psi against direct construction
  for (std::int64_t n = 2; n <= 500; ++n)
    CHECK(tilde_residues(n).psi_tilde == tilde_psi(n));

  CHECK(tilde_bounds_check(9));
  CHECK(tilde_bounds_check(2));
  for (std::int64_t n = 2; n <= 10'000; ++n) CHECK(tilde_bounds_check(n));

  // eq:omegarho holds with the actual rho values on the tilde set
  for (std::int64_t n : {9, 12, 40, 72, 200, 675}) {
    const auto prof = residue_profile_brute(kSquare, n);
    const auto tset = tilde_residues(n);
    const std::int64_t omega = arith::factorize(n).omega();
    const std::int64_t two_omega = checked_pow(2, static_cast<int>(omega));
    for (std::int64_t a : tset.residues) {
      const std::int64_t rho = prof.rho_of(a);
      CHECK(2 * rho >= two_omega);
      CHECK(rho <= 2 * two_omega);
    }
  }
}
