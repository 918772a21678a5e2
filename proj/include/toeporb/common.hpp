#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>

namespace toeporb {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kMemoryBudgetEnvVar = "TOEPORB_MEMORY_BUDGET";
inline constexpr std::uint64_t kDefaultMemoryBudgetBytes = 1ull << 30;

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;
using Rat64 = boost::rational<std::int64_t>;

/// Resource exhaustion (memory budgets and the like). `budget` names the
/// knob that was exceeded so callers can report something actionable.
class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, std::string budget)
      : std::runtime_error(what), budget_(std::move(budget)) {}
  const std::string& budget() const { return budget_; }

 private:
  std::string budget_;
};

/// Contract violation: a precondition documented on the operation failed.
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Stage-wise builder failure. `condition` is the name of the condition
/// (or budget) that could not be satisfied.
class BuildError : public std::runtime_error {
 public:
  BuildError(const std::string& what, std::string condition)
      : std::runtime_error(what), condition_(std::move(condition)) {}
  const std::string& condition() const { return condition_; }

 private:
  std::string condition_;
};

inline std::uint64_t memory_budget_bytes() {
  if (const char* env = std::getenv(kMemoryBudgetEnvVar)) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && v > 0) return v;
  }
  return kDefaultMemoryBudgetBytes;
}

inline void check_memory_budget(std::uint64_t bytes, const char* what) {
  const std::uint64_t budget = memory_budget_bytes();
  if (bytes > budget) {
    throw ResourceError(std::string(what) + " needs " + std::to_string(bytes) +
                            " bytes, over the memory budget of " +
                            std::to_string(budget) + " bytes (" +
                            kMemoryBudgetEnvVar + ")",
                        kMemoryBudgetEnvVar);
  }
}

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("int64 add overflow");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("int64 mul overflow");
  return r;
}

inline std::int64_t checked_pow(std::int64_t base, int exp) {
  std::int64_t r = 1;
  for (int i = 0; i < exp; ++i) r = checked_mul(r, base);
  return r;
}

/// Floor division remainder in [0, n).
inline std::int64_t floor_mod(std::int64_t a, std::int64_t n) {
  std::int64_t m = a % n;
  return m < 0 ? m + n : m;
}

inline std::int64_t gcd64(std::int64_t a, std::int64_t b) {
  while (b != 0) {
    std::int64_t t = a % b;
    a = b;
    b = t;
  }
  return a < 0 ? -a : a;
}

inline std::int64_t isqrt64(std::int64_t n) {
  if (n < 0) throw ContractError("isqrt of negative value");
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
  while (r > 0 && r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string rat_str(const Rat64& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline std::string rat_str(const BigRat& r) {
  if (boost::multiprecision::denominator(r) == 1) return boost::multiprecision::numerator(r).str();
  return boost::multiprecision::numerator(r).str() + "/" +
         boost::multiprecision::denominator(r).str();
}

}  // namespace toeporb
