#include "toeporb/arith.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace toeporb::arith {

namespace {

std::vector<std::int64_t> base_primes(std::int64_t up_to) {
  std::vector<bool> comp(static_cast<std::size_t>(up_to) + 1, false);
  std::vector<std::int64_t> primes;
  for (std::int64_t i = 2; i <= up_to; ++i) {
    if (comp[static_cast<std::size_t>(i)]) continue;
    primes.push_back(i);
    for (std::int64_t j = i * i; j <= up_to; j += i) comp[static_cast<std::size_t>(j)] = true;
  }
  return primes;
}

}  // namespace

PrimeTable::PrimeTable(std::int64_t limit, std::int64_t segment_size)
    : limit_(limit), segment_size_(segment_size) {
  if (limit < 2) throw ContractError("PrimeTable: limit must be >= 2");
  if (segment_size < 1024) throw ContractError("PrimeTable: segment_size too small");

  const std::int64_t nbits = (limit_ >> 1) + 1;
  const std::size_t nwords = static_cast<std::size_t>((nbits + 63) / 64);
  check_memory_budget(nwords * 8 + (nwords / kWordsPerBlock + 2) * 8, "PrimeTable");
  bits_.assign(nwords, ~0ull);
  // clear bit 0 (the number 1) and bits past the limit
  bits_[0] &= ~1ull;
  for (std::int64_t i = nbits; i < static_cast<std::int64_t>(nwords) * 64; ++i)
    bits_[static_cast<std::size_t>(i >> 6)] &= ~(1ull << (i & 63));

  const std::int64_t root = isqrt64(limit_);
  const auto smalls = base_primes(std::max<std::int64_t>(root, 3));

  // segments are independent; processed in ascending order
  for (std::int64_t lo = 3; lo <= limit_; lo += segment_size_) {
    const std::int64_t hi = std::min(limit_, lo + segment_size_ - 1);
    for (std::int64_t p : smalls) {
      if (p == 2) continue;
      if (p * p > hi) break;
      std::int64_t start = std::max(p * p, ((lo + p - 1) / p) * p);
      if ((start & 1) == 0) start += p;
      for (std::int64_t m = start; m <= hi; m += 2 * p) {
        const std::int64_t i = m >> 1;
        bits_[static_cast<std::size_t>(i >> 6)] &= ~(1ull << (i & 63));
      }
    }
  }

  block_counts_.assign(nwords / kWordsPerBlock + 2, 0);
  std::uint64_t running = 0;
  for (std::size_t w = 0; w < nwords; ++w) {
    if (w % kWordsPerBlock == 0) block_counts_[w / kWordsPerBlock] = running;
    running += static_cast<std::uint64_t>(std::popcount(bits_[w]));
  }
  block_counts_[nwords / kWordsPerBlock + 1] = running;
}

void PrimeTable::range_check(std::int64_t N) const {
  if (N > limit_) {
    throw std::out_of_range("query N=" + std::to_string(N) + " exceeds sieve limit " +
                            std::to_string(limit_));
  }
}

bool PrimeTable::is_prime(std::int64_t n) const {
  range_check(n);
  if (n < 2) return false;
  if (n == 2) return true;
  if ((n & 1) == 0) return false;
  const std::int64_t i = n >> 1;
  return bits_[static_cast<std::size_t>(i >> 6)] & (1ull << (i & 63));
}

std::int64_t PrimeTable::prime_pi(std::int64_t N) const {
  range_check(N);
  if (N < 2) return 0;
  if (N == 2) return 1;
  // count odd primes <= N, then add one for p = 2
  const std::int64_t last = ((N & 1) ? N : N - 1) >> 1;  // bit index of last odd <= N
  const std::size_t word = static_cast<std::size_t>(last >> 6);
  std::uint64_t count = block_counts_[word / kWordsPerBlock];
  for (std::size_t w = (word / kWordsPerBlock) * kWordsPerBlock; w < word; ++w)
    count += static_cast<std::uint64_t>(std::popcount(bits_[w]));
  const int tail = static_cast<int>(last & 63);
  const std::uint64_t mask = tail == 63 ? ~0ull : ((1ull << (tail + 1)) - 1);
  count += static_cast<std::uint64_t>(std::popcount(bits_[word] & mask));
  return static_cast<std::int64_t>(count) + 1;
}

std::int64_t PrimeTable::prime_pi_ap(std::int64_t N, std::int64_t n, std::int64_t a) const {
  range_check(N);
  if (n < 1) throw ContractError("prime_pi_ap: modulus must be >= 1");
  const std::int64_t target = floor_mod(a, n);
  std::int64_t count = 0;
  for_each_prime(2, N, [&](std::int64_t p) {
    if (p % n == target) ++count;
  });
  return count;
}

std::vector<std::int64_t> PrimeTable::prime_pi_ap_all(std::int64_t N, std::int64_t n) const {
  range_check(N);
  if (n < 1) throw ContractError("prime_pi_ap_all: modulus must be >= 1");
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n), 0);
  for_each_prime(2, N, [&](std::int64_t p) { ++counts[static_cast<std::size_t>(p % n)]; });
  return counts;
}

std::vector<std::int64_t> PrimeTable::primes_up_to(std::int64_t N) const {
  range_check(N);
  std::vector<std::int64_t> out;
  if (N >= 2) out.reserve(static_cast<std::size_t>(prime_pi(N)));
  for_each_prime(2, N, [&](std::int64_t p) { out.push_back(p); });
  return out;
}

std::int64_t semiprime_pi(const PrimeTable& table, std::int64_t N, SemiprimeMode mode) {
  if (N > table.limit()) throw std::out_of_range("semiprime_pi: N exceeds sieve limit");
  if (N < 4) return 0;
  std::int64_t total = 0;
  const std::int64_t root = isqrt64(N);
  if (mode == SemiprimeMode::kPairs) {
    table.for_each_prime(2, root,
                         [&](std::int64_t p1) { total += table.prime_pi(N / p1); });
  } else {
    table.for_each_prime(2, root, [&](std::int64_t p1) {
      total += table.prime_pi(N / p1) - table.prime_pi(p1 - 1);
    });
  }
  return total;
}

std::int64_t semiprime_pi_ap(const PrimeTable& table, std::int64_t N, std::int64_t m,
                             std::int64_t a, SemiprimeMode mode) {
  if (N > table.limit()) throw std::out_of_range("semiprime_pi_ap: N exceeds sieve limit");
  if (m < 1) throw ContractError("semiprime_pi_ap: modulus must be >= 1");
  const std::int64_t target = floor_mod(a, m);
  std::int64_t count = 0;
  auto visit = [&](std::int64_t p1, std::int64_t p2) {
    if ((p1 % m) * (p2 % m) % m == target) ++count;
  };
  if (mode == SemiprimeMode::kPairs) {
    for_each_semiprime_pair(table, N, visit);
  } else {
    for_each_semiprime_distinct(table, N, visit);
  }
  return count;
}

std::int64_t semiprime_noncoprime_count(const PrimeTable& table, std::int64_t N, std::int64_t n,
                                        SemiprimeMode mode) {
  if (N > table.limit()) throw std::out_of_range("semiprime_noncoprime_count: N exceeds limit");
  if (n < 1) throw ContractError("semiprime_noncoprime_count: n must be >= 1");
  if (n == 1 || N < 4) return 0;
  const auto divisors = factorize(n);
  const std::int64_t root = isqrt64(N);
  std::int64_t count = 0;
  if (mode == SemiprimeMode::kPairs) {
    table.for_each_prime(2, root, [&](std::int64_t p1) {
      const std::int64_t cap = N / p1;
      if (n % p1 == 0) {
        count += table.prime_pi(cap);
      } else {
        for (const auto& [q, e] : divisors.prime_powers)
          if (q <= cap) ++count;
      }
    });
  } else {
    table.for_each_prime(2, root, [&](std::int64_t p1) {
      const std::int64_t cap = N / p1;
      if (cap < p1) return;
      if (n % p1 == 0) {
        count += table.prime_pi(cap) - table.prime_pi(p1 - 1);
      } else {
        for (const auto& [q, e] : divisors.prime_powers)
          if (q >= p1 && q <= cap) ++count;
      }
    });
  }
  return count;
}

SemiprimeClassCounts semiprime_class_counts(const PrimeTable& table, std::int64_t N,
                                            std::int64_t n, SemiprimeMode mode) {
  if (n < 1) throw ContractError("semiprime_class_counts: modulus must be >= 1");
  SemiprimeClassCounts out;
  out.by_class.assign(static_cast<std::size_t>(n), 0);
  auto visit = [&](std::int64_t p1, std::int64_t p2) {
    ++out.by_class[static_cast<std::size_t>((p1 % n) * (p2 % n) % n)];
    ++out.total;
  };
  if (mode == SemiprimeMode::kPairs) {
    for_each_semiprime_pair(table, N, visit);
  } else {
    for_each_semiprime_distinct(table, N, visit);
  }
  return out;
}

std::int64_t Factorization::radical() const {
  std::int64_t r = 1;
  for (const auto& [p, e] : prime_powers) r = checked_mul(r, p);
  return r;
}

std::int64_t Factorization::value() const {
  std::int64_t v = 1;
  for (const auto& [p, e] : prime_powers)
    for (int i = 0; i < e; ++i) v = checked_mul(v, p);
  return v;
}

Factorization factorize(std::int64_t n) {
  if (n < 1) throw ContractError("factorize: n must be >= 1");
  Factorization f;
  std::int64_t rem = n;
  auto strip = [&](std::int64_t p) {
    int e = 0;
    while (rem % p == 0) {
      rem /= p;
      ++e;
    }
    if (e > 0) f.prime_powers.emplace_back(p, e);
  };
  strip(2);
  strip(3);
  for (std::int64_t p = 5; p * p <= rem; p += 6) {
    strip(p);
    strip(p + 2);
  }
  if (rem > 1) f.prime_powers.emplace_back(rem, 1);
  return f;
}

std::int64_t euler_phi(const Factorization& f) {
  std::int64_t phi = 1;
  for (const auto& [p, e] : f.prime_powers) {
    phi = checked_mul(phi, p - 1);
    for (int i = 1; i < e; ++i) phi = checked_mul(phi, p);
  }
  return phi;
}

std::int64_t euler_phi(std::int64_t n) { return euler_phi(factorize(n)); }

}  // namespace toeporb::arith
