#include "toeporb/sturmian.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

namespace toeporb::sturmian {

namespace {

using u128 = unsigned __int128;
using boost::multiprecision::uint256_t;

u128 fixed_from_big_fraction(const uint256_t& num, const uint256_t& den) {
  const uint256_t scaled = (uint256_t(num) << 128) / den;
  u128 out = 0;
  uint256_t rest = scaled;
  for (int limb = 0; limb < 2; ++limb) {
    out |= static_cast<u128>(static_cast<std::uint64_t>(rest & 0xFFFFFFFFFFFFFFFFull))
           << (64 * limb);
    rest >>= 64;
  }
  return out;
}

}  // namespace

Fixed128 Fixed128::from_fraction(std::uint64_t num, std::uint64_t den) {
  if (den == 0 || num >= den) throw ContractError("Fixed128: need 0 <= num/den < 1");
  return Fixed128{fixed_from_big_fraction(uint256_t(num), uint256_t(den))};
}

Fixed128 Fixed128::from_double(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw ContractError("Fixed128: need x in [0,1)");
  const double two64 = 18446744073709551616.0;
  const double scaled = x * two64;
  const auto hi = static_cast<std::uint64_t>(scaled);
  const double rest = scaled - static_cast<double>(hi);
  const u128 v = (static_cast<u128>(hi) << 64) +
                 static_cast<u128>(static_cast<std::uint64_t>(rest * two64));
  return Fixed128{v};
}

Fixed128 Fixed128::times(std::int64_t k) const {
  const bool neg = k < 0;
  const std::uint64_t ku =
      neg ? ~static_cast<std::uint64_t>(k) + 1 : static_cast<std::uint64_t>(k);
  const auto a_lo = static_cast<std::uint64_t>(v);
  const auto a_hi = static_cast<std::uint64_t>(v >> 64);
  u128 result = static_cast<u128>(ku) * a_lo;
  result += static_cast<u128>(static_cast<std::uint64_t>(static_cast<u128>(ku) * a_hi)) << 64;
  return Fixed128{neg ? static_cast<u128>(0) - result : result};
}

double Fixed128::to_double() const {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  return std::ldexp(static_cast<double>(hi), -64) + std::ldexp(static_cast<double>(lo), -128);
}

namespace {

struct Convergent {
  uint256_t num, den;
};

/// Fibonacci convergent F_k / F_{k+1} of 1/phi with F_{k+1} > 2^80.
Convergent golden_convergent() {
  uint256_t a = 1, b = 1;  // F_1, F_2
  const uint256_t bound = uint256_t(1) << 80;
  while (b <= bound) {
    const uint256_t c = a + b;
    a = b;
    b = c;
  }
  return {a, b};
}

}  // namespace

RotationSpec RotationSpec::golden() {
  const auto conv = golden_convergent();
  RotationSpec spec;
  spec.alpha = Fixed128{fixed_from_big_fraction(conv.num, conv.den)};
  spec.beta = spec.alpha;
  spec.x0 = Fixed128{0};
  spec.description = "golden convergent F_k/F_{k+1}, beta = alpha";
  spec.denominator_ld = conv.den.convert_to<long double>();
  spec.denominator = conv.den > std::numeric_limits<std::uint64_t>::max()
                         ? std::numeric_limits<std::uint64_t>::max()
                         : conv.den.convert_to<std::uint64_t>();
  return spec;
}

RotationSpec RotationSpec::golden_conjugate() {
  const auto conv = golden_convergent();
  RotationSpec spec;
  // 1/phi^2 = 1 - 1/phi; the convergent is (den - num)/den
  spec.alpha = Fixed128{fixed_from_big_fraction(conv.den - conv.num, conv.den)};
  spec.beta = Fixed128{fixed_from_big_fraction(conv.num, conv.den)};  // beta = 1 - alpha
  spec.x0 = Fixed128{0};
  spec.description = "conjugate golden convergent, beta = 1 - alpha";
  spec.denominator_ld = conv.den.convert_to<long double>();
  spec.denominator = conv.den > std::numeric_limits<std::uint64_t>::max()
                         ? std::numeric_limits<std::uint64_t>::max()
                         : conv.den.convert_to<std::uint64_t>();
  return spec;
}

double RotationSpec::surrogate_gap_bound(std::int64_t N) const {
  const long double den = denominator_ld > 0 ? denominator_ld : static_cast<long double>(denominator);
  if (den <= 0) return 2.0;
  const long double convergent_gap = 1.0L / (den * den);
  const long double representation_gap = std::ldexp(1.0L, -128);
  return static_cast<double>(static_cast<long double>(N) * (convergent_gap + representation_gap));
}

int code(const RotationSpec& spec, std::int64_t k) {
  const Fixed128 point = spec.x0.plus(spec.alpha.times(k));
  return point < spec.beta ? 0 : 1;
}

std::vector<Atom> refinement_atoms(const RotationSpec& spec, int radius) {
  if (radius < 0) throw ContractError("refinement_atoms: radius must be >= 0");
  // boundaries of V T^{-i}{A0, A1} for i in [-m, m]: {-i alpha, beta - i alpha}
  std::vector<Fixed128> cuts;
  for (int i = -radius; i <= radius; ++i) {
    const Fixed128 shift = spec.alpha.times(-i);
    cuts.push_back(shift);                  // 0 - i alpha
    cuts.push_back(spec.beta.plus(shift));  // beta - i alpha
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < cuts.size(); ++j) {
    Atom atom;
    atom.start = cuts[j];
    const Fixed128 next = cuts[(j + 1) % cuts.size()];
    atom.length = next.minus(cuts[j]);  // wraps for the last atom
    std::int64_t word = 0;
    for (int i = -radius; i <= radius; ++i) {
      const Fixed128 point = atom.start.plus(spec.alpha.times(i));
      word = word * 2 + (point < spec.beta ? 0 : 1);
    }
    atom.word_code = word;
    atoms.push_back(atom);
  }
  return atoms;
}

double lebesgue_prediction(const RotationSpec& spec, const averaging::ObservableSpec& F) {
  if (F.alphabet_size != 2) throw ContractError("lebesgue_prediction: binary alphabet expected");
  const auto atoms = refinement_atoms(spec, F.radius);
  long double sum = 0.0L;
  for (const Atom& atom : atoms) {
    const long double len = static_cast<long double>(atom.length.to_double());
    sum += len * static_cast<long double>(F.table[static_cast<std::size_t>(atom.word_code)]);
  }
  return static_cast<double>(sum);
}

averaging::AverageReport prime_orbit_average(const RotationSpec& spec,
                                             const averaging::ObservableSpec& F,
                                             const arith::PrimeTable& table, std::int64_t N) {
  if (F.alphabet_size != 2) throw ContractError("prime_orbit_average: binary alphabet expected");
  if (N > table.limit()) throw std::out_of_range("prime_orbit_average: N exceeds sieve budget");
  const int m = F.radius;
  long double sum = 0.0L, comp = 0.0L;
  table.for_each_prime(2, N, [&](std::int64_t p) {
    Fixed128 point = spec.x0.plus(spec.alpha.times(p - m));
    std::int64_t word = 0;
    for (int i = -m; i <= m; ++i) {
      word = word * 2 + (point < spec.beta ? 0 : 1);
      point = point.plus(spec.alpha);
    }
    const long double y = static_cast<long double>(F.table[static_cast<std::size_t>(word)]) - comp;
    const long double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  });
  averaging::AverageReport rep;
  rep.kind = averaging::IndexKind::kPrimes;
  rep.N = N;
  rep.shift = 0;
  rep.normalization = table.prime_pi(N);
  rep.value = static_cast<double>(sum / static_cast<long double>(rep.normalization));
  rep.predicted = lebesgue_prediction(spec, F);
  rep.error_bound = spec.surrogate_gap_bound(N);
  return rep;
}

double vinogradov_sum(Fixed128 alpha, const arith::PrimeTable& table, std::int64_t N) {
  if (N > table.limit()) throw std::out_of_range("vinogradov_sum: N exceeds sieve budget");
  long double re = 0.0L, re_c = 0.0L, im = 0.0L, im_c = 0.0L;
  table.for_each_prime(2, N, [&](std::int64_t p) {
    const double theta = alpha.times(p).to_double();
    const double angle = 6.283185307179586476925286766559 * theta;
    const long double yr = static_cast<long double>(std::cos(angle)) - re_c;
    const long double tr = re + yr;
    re_c = (tr - re) - yr;
    re = tr;
    const long double yi = static_cast<long double>(std::sin(angle)) - im_c;
    const long double ti = im + yi;
    im_c = (ti - im) - yi;
    im = ti;
  });
  const long double pi_n = static_cast<long double>(table.prime_pi(N));
  return static_cast<double>(std::sqrt(static_cast<double>((re / pi_n) * (re / pi_n) +
                                                           (im / pi_n) * (im / pi_n))));
}

}  // namespace toeporb::sturmian
