#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "toeporb/arith.hpp"

using namespace toeporb;
using namespace toeporb::arith;

namespace {

// independent oracle: trial division
bool trial_prime(std::int64_t n) {
  if (n < 2) return false;
  for (std::int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

std::set<std::int64_t> distinct_semiprimes_upto(std::int64_t N) {
  std::set<std::int64_t> out;
  for (std::int64_t a = 2; a * a <= N; ++a) {
    if (!trial_prime(a)) continue;
    for (std::int64_t b = a; a * b <= N; ++b)
      if (trial_prime(b)) out.insert(a * b);
  }
  return out;
}

}  // namespace

TEST_CASE("sieve agrees with trial division") {
  PrimeTable table(10'000);
  for (std::int64_t n = 0; n <= 10'000; ++n) CHECK(table.is_prime(n) == trial_prime(n));
}

TEST_CASE("prime_pi examples and oracle values") {
  PrimeTable table(1000);
  CHECK(table.prime_pi(1) == 0);
  CHECK(table.prime_pi(2) == 1);
  CHECK(table.prime_pi(10) == 4);
  CHECK(table.prime_pi(100) == 25);
  // frozen from trial division
  std::int64_t count = 0;
  for (std::int64_t n = 2; n <= 1000; ++n)
    if (trial_prime(n)) ++count;
  CHECK(table.prime_pi(1000) == count);
  CHECK_THROWS_AS(table.prime_pi(1001), std::out_of_range);
}

TEST_CASE("smallest tables work") {
  PrimeTable table(2);
  CHECK(table.is_prime(2));
  CHECK(table.prime_pi(2) == 1);
  CHECK_THROWS_AS(PrimeTable(1), ContractError);
}

TEST_CASE("prime_pi_ap matches enumeration") {
  PrimeTable table(200);
  CHECK(table.prime_pi_ap(100, 4, 1) == 11);
  CHECK(table.prime_pi_ap(10, 5, 0) == 1);   // only p = 5
  CHECK(table.prime_pi_ap(100, 1, 0) == 25);
  CHECK(table.prime_pi_ap(100, 4, -3) == table.prime_pi_ap(100, 4, 1));
}

TEST_CASE("residue classes partition the primes") {
  PrimeTable table(5000);
  for (std::int64_t n : {2, 3, 7, 12, 30}) {
    const auto counts = table.prime_pi_ap_all(5000, n);
    CHECK(std::accumulate(counts.begin(), counts.end(), std::int64_t{0}) ==
          table.prime_pi(5000));
    for (std::int64_t a = 0; a < n; ++a)
      CHECK(counts[static_cast<std::size_t>(a)] == table.prime_pi_ap(5000, n, a));
  }
}

TEST_CASE("non-coprime residue classes hold at most one prime") {
  PrimeTable table(100'000);
  std::int64_t violations = 0;
  for (std::int64_t n = 2; n <= 10'000; ++n) {
    const auto counts = table.prime_pi_ap_all(100'000, n);
    for (std::int64_t a = 0; a < n; ++a)
      if (gcd64(a == 0 ? n : a, n) != 1 && counts[static_cast<std::size_t>(a)] > 1) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("euler phi") {
  CHECK(euler_phi(1) == 1);
  CHECK(euler_phi(12) == 4);
  CHECK(euler_phi(30) == 8);
  // multiplicative on coprime pairs
  std::uint64_t state = 7;
  int done = 0;
  while (done < 500) {
    state = splitmix64(state);
    const std::int64_t a = 1 + static_cast<std::int64_t>(state % 9999);
    state = splitmix64(state);
    const std::int64_t b = 1 + static_cast<std::int64_t>(state % 9999);
    if (gcd64(a, b) != 1) continue;
    ++done;
    CHECK(euler_phi(a * b) == euler_phi(a) * euler_phi(b));
  }
  // direct count for a few values
  for (std::int64_t n : {1, 2, 9, 10, 36, 97, 360}) {
    std::int64_t direct = 0;
    for (std::int64_t a = 0; a < n; ++a)
      if (gcd64(a == 0 ? n : a, n) == 1) ++direct;
    if (n == 1) direct = 1;
    CHECK(euler_phi(n) == direct);
  }
}

TEST_CASE("factorize") {
  CHECK(factorize(1).prime_powers.empty());
  CHECK(factorize(1).omega() == 0);
  CHECK(factorize(1).radical() == 1);
  const auto f = factorize(360);
  REQUIRE(f.prime_powers.size() == 3);
  CHECK(f.prime_powers[0] == std::pair<std::int64_t, int>{2, 3});
  CHECK(f.prime_powers[1] == std::pair<std::int64_t, int>{3, 2});
  CHECK(f.prime_powers[2] == std::pair<std::int64_t, int>{5, 1});
  CHECK(f.omega() == 3);
  CHECK(f.radical() == 30);
  CHECK(f.value() == 360);
  const auto p = factorize(97);
  REQUIRE(p.prime_powers.size() == 1);
  CHECK(p.prime_powers[0] == std::pair<std::int64_t, int>{97, 1});
  // round-trip on random values
  std::uint64_t state = 99;
  for (int i = 0; i < 200; ++i) {
    state = splitmix64(state);
    const std::int64_t n = 1 + static_cast<std::int64_t>(state % 1'000'000);
    CHECK(factorize(n).value() == n);
  }
}

TEST_CASE("semiprime counts in both normalizations") {
  PrimeTable table(1'000'000);
  CHECK(semiprime_pi(table, 3) == 0);
  CHECK(semiprime_pi(table, 10) == 5);  // pi(5) + pi(3)
  CHECK(semiprime_pi(table, 10, SemiprimeMode::kDistinct) == 4);  // {4,6,9,10}

  // distinct mode against the set oracle
  for (std::int64_t N : {4, 20, 100, 2000}) {
    CHECK(semiprime_pi(table, N, SemiprimeMode::kDistinct) ==
          static_cast<std::int64_t>(distinct_semiprimes_upto(N).size()));
  }
  // pair normalization dominates the distinct count
  for (std::int64_t N = 4; N <= 2000; ++N)
    CHECK(semiprime_pi(table, N) >= semiprime_pi(table, N, SemiprimeMode::kDistinct));
}

TEST_CASE("semiprime counts in arithmetic progressions") {
  PrimeTable table(1'000'000);
  CHECK(semiprime_pi_ap(table, 20, 3, 1, SemiprimeMode::kDistinct) == 2);  // {4, 10}
  CHECK(semiprime_pi_ap(table, 20, 1, 0) == semiprime_pi(table, 20));

  // class counts partition the pair count
  const auto counts = semiprime_class_counts(table, 5000, 12);
  CHECK(counts.total == semiprime_pi(table, 5000));
  std::int64_t sum = 0;
  for (std::int64_t a = 0; a < 12; ++a) {
    CHECK(counts.by_class[static_cast<std::size_t>(a)] == semiprime_pi_ap(table, 5000, 12, a));
    sum += counts.by_class[static_cast<std::size_t>(a)];
  }
  CHECK(sum == counts.total);

  // eq:basesp1 at desk scale: coprime classes approach pi_2 / phi(m)
  const std::int64_t N = 1'000'000;
  const double pi2 = static_cast<double>(semiprime_pi(table, N));
  const double one_class = static_cast<double>(semiprime_pi_ap(table, N, 5, 1));
  CHECK(std::abs(one_class * 4.0 / pi2 - 1.0) < 0.10);
}

TEST_CASE("semiprimes sharing a factor with n") {
  PrimeTable table(1'000'000);
  CHECK(semiprime_noncoprime_count(table, 20, 4, SemiprimeMode::kDistinct) == 4);  // {4,6,10,14}
  CHECK(semiprime_noncoprime_count(table, 20, 1) == 0);

  // oracle comparison in both modes
  for (std::int64_t n : {4, 9, 30, 900}) {
    std::int64_t pairs = 0, distinct = 0;
    for_each_semiprime_pair(table, 2000, [&](std::int64_t p1, std::int64_t p2) {
      if (gcd64(p1 * p2, n) > 1) ++pairs;
    });
    for (std::int64_t q : distinct_semiprimes_upto(2000))
      if (gcd64(q, n) > 1) ++distinct;
    CHECK(semiprime_noncoprime_count(table, 2000, n) == pairs);
    CHECK(semiprime_noncoprime_count(table, 2000, n, SemiprimeMode::kDistinct) == distinct);
  }

  // the o(pi_2) certificate at desk scale
  const std::int64_t N = 1'000'000;
  const auto noncop = semiprime_noncoprime_count(table, N, 900);
  CHECK(static_cast<double>(noncop) < 0.5 * static_cast<double>(semiprime_pi(table, N)));
}

TEST_CASE("memory budget produces a resource error naming the budget") {
  CHECK_THROWS_AS(PrimeTable(static_cast<std::int64_t>(1) << 62), ResourceError);
  try {
    PrimeTable table(static_cast<std::int64_t>(1) << 62);
  } catch (const ResourceError& e) {
    CHECK(e.budget() == std::string(kMemoryBudgetEnvVar));
  }
}
