#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace hentropy {

// Euler–Mascheroni constant, 20 significant digits.
inline constexpr double kEulerGamma = 0.57721566490153286061;

// pi^2/6 = zeta(2).
inline constexpr double kZeta2 = 1.6449340668482264365;

// Neumaier-compensated accumulator. Compensation removes almost all rounding
// drift from long sums, but the result still depends on feed order, so code
// that promises bit-identical output must add terms in a fixed order.
class KahanSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Prefix sums J(m) = 1 + 1/2 + ... + 1/m of the harmonic series, J(0) = 0.
//
// Values up to `capacity` are tabulated once with compensated summation and
// are immutable afterwards, so concurrent lookups are safe. Lookups past the
// table use the asymptotic expansion
//   J(m) = ln m + gamma + 1/(2m) - 1/(12 m^2) + 1/(120 m^4) + O(m^-6),
// whose omitted term is ~1/(252 m^6), far below 1e-12 at the default
// capacity of 2^20 entries.
class HarmonicTable {
 public:
  static constexpr std::uint64_t kDefaultCapacity = std::uint64_t{1} << 20;

  explicit HarmonicTable(std::uint64_t capacity = kDefaultCapacity);

  std::uint64_t capacity() const { return values_.size() - 1; }

  // J(m) for any m >= 0.
  double operator()(std::uint64_t m) const {
    if (m < values_.size()) return values_[static_cast<std::size_t>(m)];
    const double x = static_cast<double>(m);
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return std::log(x) + kEulerGamma + 0.5 * inv - inv2 / 12.0 +
           inv2 * inv2 / 120.0;
  }

  // Copy of this table with `delta` added to entry `index`. Exists so the
  // identity-verification suite can demonstrate that it detects a corrupted
  // table; never used on the main path.
  HarmonicTable with_offset_entry(std::uint64_t index, double delta) const;

 private:
  std::vector<double> values_;
};

// Process-wide table at default capacity, built on first use.
const HarmonicTable& shared_harmonic_table();

// J(m) through the shared table.
double harmonic(std::uint64_t m);

// sum_{k=n}^inf x^k / k  for 0 <= x < 1, n >= 1. Strictly positive for x > 0,
// decreasing in n; equals -ln(1-x) at n = 1.
double log_tail_series(double x, std::uint64_t n);

// Dilogarithm Li2(x) = sum_{k>=1} x^k / k^2 on [0, 1].
double dilog(double x);

// Exponential integral E1(z) = int_z^inf e^{-t}/t dt, z > 0.
double exp_integral_e1(double z);

// Standard normal CDF and quantile (inverse CDF).
double normal_cdf(double x);
double normal_quantile(double p);

struct TailSum {
  double value = 0.0;
  double error_bound = 0.0;  // bound on the truncation error of `value`
};

// sum_{i > j} i^{-s} (ln i)^r  for s > 1 and r in {0, 1, 2}, evaluated with
// the Euler–Maclaurin formula anchored at a = j + 1. Requires s < a so the
// correction terms decay; error_bound is |f^(5)(a)|/30240, the magnitude of
// the first omitted correction.
TailSum power_log_tail(double s, std::uint64_t j, int log_power);

// ln( sum_{i > j} i^{-s} ) for s > 1. Unlike power_log_tail this stays in log
// space and remains valid for s >> j, where the plain value underflows.
double power_tail_log(double s, std::uint64_t j);

// ln C(n, k) via lgamma.
double log_binomial(std::uint64_t n, std::uint64_t k);

}  // namespace hentropy
