#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "toeporb/common.hpp"

namespace toeporb::arith {

/// Segmented, bit-packed sieve over the odd integers up to `limit`.
/// Immutable after construction; queries are const and thread-safe.
class PrimeTable {
 public:
  static constexpr std::int64_t kDefaultSegmentSize = 1 << 20;

  explicit PrimeTable(std::int64_t limit, std::int64_t segment_size = kDefaultSegmentSize);

  std::int64_t limit() const { return limit_; }
  std::int64_t segment_size() const { return segment_size_; }

  bool is_prime(std::int64_t n) const;

  /// pi(N) = #{p <= N}.
  std::int64_t prime_pi(std::int64_t N) const;

  /// pi(N; n, a) = #{p <= N : p == a mod n}. `a` is reduced mod n.
  std::int64_t prime_pi_ap(std::int64_t N, std::int64_t n, std::int64_t a) const;

  /// One pass over the table: counts for every residue class mod n at once.
  std::vector<std::int64_t> prime_pi_ap_all(std::int64_t N, std::int64_t n) const;

  template <typename Fn>
  void for_each_prime(std::int64_t lo, std::int64_t hi, Fn&& fn) const {
    if (hi > limit_) throw std::out_of_range("for_each_prime: range exceeds table limit");
    if (lo <= 2 && hi >= 2) fn(std::int64_t{2});
    std::int64_t start = lo < 3 ? 3 : (lo | 1);
    for (std::int64_t n = start; n <= hi; n += 2) {
      std::int64_t i = n >> 1;
      if (bits_[static_cast<std::size_t>(i >> 6)] & (1ull << (i & 63))) fn(n);
    }
  }

  std::vector<std::int64_t> primes_up_to(std::int64_t N) const;

 private:
  void range_check(std::int64_t N) const;

  std::int64_t limit_;
  std::int64_t segment_size_;
  // bit i <=> 2i+1 is prime (i >= 1); bit 0 (the number 1) is clear.
  std::vector<std::uint64_t> bits_;
  // cumulative set-bit count per 8-word block, for O(1) prime_pi.
  std::vector<std::uint64_t> block_counts_;
  static constexpr std::size_t kWordsPerBlock = 8;
};

/// Pair normalization counts every (p1 <= sqrt(N), p2 <= N/p1); this is the
/// normalization used by the averaging engines. Distinct counts each
/// semiprime value once.
enum class SemiprimeMode { kPairs, kDistinct };

/// pi_2(N): with kPairs this is sum over p1 <= sqrt(N) of pi(floor(N/p1)).
std::int64_t semiprime_pi(const PrimeTable& table, std::int64_t N,
                          SemiprimeMode mode = SemiprimeMode::kPairs);

/// Semiprimes <= N in the class a mod m, in the chosen normalization.
std::int64_t semiprime_pi_ap(const PrimeTable& table, std::int64_t N, std::int64_t m,
                             std::int64_t a, SemiprimeMode mode = SemiprimeMode::kPairs);

/// Semiprimes <= N sharing a prime factor with n.
std::int64_t semiprime_noncoprime_count(const PrimeTable& table, std::int64_t N, std::int64_t n,
                                        SemiprimeMode mode = SemiprimeMode::kPairs);

/// Per-class semiprime counts mod n plus the total, one enumeration pass.
struct SemiprimeClassCounts {
  std::vector<std::int64_t> by_class;
  std::int64_t total = 0;
};
SemiprimeClassCounts semiprime_class_counts(const PrimeTable& table, std::int64_t N,
                                            std::int64_t n,
                                            SemiprimeMode mode = SemiprimeMode::kPairs);

template <typename Fn>
void for_each_semiprime_pair(const PrimeTable& table, std::int64_t N, Fn&& fn) {
  const std::int64_t root = isqrt64(N);
  table.for_each_prime(2, root, [&](std::int64_t p1) {
    table.for_each_prime(2, N / p1, [&](std::int64_t p2) { fn(p1, p2); });
  });
}

template <typename Fn>
void for_each_semiprime_distinct(const PrimeTable& table, std::int64_t N, Fn&& fn) {
  const std::int64_t root = isqrt64(N);
  table.for_each_prime(2, root, [&](std::int64_t p1) {
    table.for_each_prime(p1, N / p1, [&](std::int64_t p2) { fn(p1, p2); });
  });
}

struct Factorization {
  std::vector<std::pair<std::int64_t, int>> prime_powers;  // increasing primes

  int omega() const { return static_cast<int>(prime_powers.size()); }
  std::int64_t radical() const;
  std::int64_t value() const;
};

Factorization factorize(std::int64_t n);

std::int64_t euler_phi(std::int64_t n);
std::int64_t euler_phi(const Factorization& f);

}  // namespace toeporb::arith
