#include "hentropy/special_functions.hpp"

#include <algorithm>
#include <stdexcept>

namespace hentropy {

HarmonicTable::HarmonicTable(std::uint64_t capacity) {
  values_.resize(static_cast<std::size_t>(capacity) + 1);
  values_[0] = 0.0;
  KahanSum acc;
  for (std::uint64_t m = 1; m <= capacity; ++m) {
    acc.add(1.0 / static_cast<double>(m));
    values_[static_cast<std::size_t>(m)] = acc.value();
  }
}

HarmonicTable HarmonicTable::with_offset_entry(std::uint64_t index,
                                               double delta) const {
  if (index >= values_.size()) {
    throw std::invalid_argument("with_offset_entry: index beyond table");
  }
  HarmonicTable copy(*this);
  copy.values_[static_cast<std::size_t>(index)] += delta;
  return copy;
}

const HarmonicTable& shared_harmonic_table() {
  static const HarmonicTable table;
  return table;
}

double harmonic(std::uint64_t m) { return shared_harmonic_table()(m); }

namespace {

// Below this the raw series needs at most ~1850 terms; above it we switch to
// the Euler–Maclaurin form, which is also the only viable route as x -> 1.
constexpr double kDirectSeriesCutoff = 0.98;

double log_tail_direct(double x, std::uint64_t n) {
  const double log_first = static_cast<double>(n) * std::log(x);
  if (log_first < -745.0) return 0.0;  // whole tail below DBL_MIN
  double pw = std::exp(log_first);     // x^k, starting at k = n
  KahanSum acc;
  for (std::uint64_t k = n;; ++k) {
    const double term = pw / static_cast<double>(k);
    acc.add(term);
    // Remaining tail is bounded by term * x/(1-x) (the ratio of consecutive
    // terms is below x).
    if (term * (x / (1.0 - x)) <= acc.value() * 1e-17) break;
    pw *= x;
  }
  return acc.value();
}

// x close to 1: write the tail as sum_{k>=n} e^{-lambda k}/k, lambda = -ln x,
// take terms below m0 = max(n, 128) explicitly, and close the remainder with
// Euler–Maclaurin around the exponential integral:
//   sum_{k>=m0} f(k) = E1(lambda m0) + f(m0)/2 - f'(m0)/12 + f'''(m0)/720 - ...
// with f(t) = e^{-lambda t}/t. At m0 >= 128 and lambda <= -ln(0.98) the first
// omitted correction is below ~2e-15 of the result.
double log_tail_em(double x, std::uint64_t n) {
  const double lambda = -std::log(x);
  const std::uint64_t m0 = std::max<std::uint64_t>(n, 128);
  KahanSum acc;
  if (m0 > n) {
    double pw = std::exp(static_cast<double>(n) * std::log(x));
    for (std::uint64_t k = n; k < m0; ++k) {
      acc.add(pw / static_cast<double>(k));
      pw *= x;
    }
  }
  const double m0d = static_cast<double>(m0);
  const double z = lambda * m0d;
  const double damp = std::exp(-z);
  if (damp > 0.0) {
    const double f0 = damp / m0d;
    const double f1 = -damp * (z + 1.0) / (m0d * m0d);
    const double f3 = -damp * (((z + 3.0) * z + 6.0) * z + 6.0) /
                      (m0d * m0d * m0d * m0d);
    acc.add(exp_integral_e1(z));
    acc.add(0.5 * f0);
    acc.add(-f1 / 12.0);
    acc.add(f3 / 720.0);
  }
  return acc.value();
}

}  // namespace

double log_tail_series(double x, std::uint64_t n) {
  if (!(x >= 0.0) || x >= 1.0) {
    throw std::domain_error("log_tail_series: x must lie in [0, 1)");
  }
  if (n == 0) throw std::domain_error("log_tail_series: n must be >= 1");
  if (x == 0.0) return 0.0;
  const double tail = (x <= kDirectSeriesCutoff) ? log_tail_direct(x, n)
                                                 : log_tail_em(x, n);
  return std::max(tail, 0.0);
}

double dilog(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("dilog: x must lie in [0, 1]");
  }
  if (x == 1.0) return kZeta2;
  if (x > 0.5) {
    // Li2(x) + Li2(1-x) = zeta(2) - ln(x) ln(1-x); 1-x <= 0.5 converges fast.
    return kZeta2 - std::log(x) * std::log1p(-x) - dilog(1.0 - x);
  }
  KahanSum acc;
  double pw = x;
  for (std::uint64_t k = 1;; ++k) {
    const double term = pw / static_cast<double>(k * k);
    acc.add(term);
    if (term <= acc.value() * 1e-17) break;
    pw *= x;
  }
  return acc.value();
}

double exp_integral_e1(double z) {
  if (!(z > 0.0)) throw std::domain_error("exp_integral_e1: z must be > 0");
  if (z <= 1.0) {
    // -gamma - ln z + sum_{k>=1} (-1)^{k+1} z^k / (k * k!)
    double sum = -kEulerGamma - std::log(z);
    double pw = 1.0;  // z^k / k!
    for (int k = 1; k <= 48; ++k) {
      pw *= z / k;
      const double add = ((k & 1) ? pw : -pw) / k;
      sum += add;
      if (std::abs(add) < 1e-18 * std::max(1.0, std::abs(sum))) break;
    }
    return sum;
  }
  if (z > 745.0) return 0.0;
  // Continued fraction e^{-z} / (z + 1 - 1/(z + 3 - 4/(z + 5 - 9/(...)))),
  // evaluated by the modified Lentz scheme.
  constexpr double tiny = 1e-300;
  double b = z + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int k = 1; k <= 400; ++k) {
    const double a = -static_cast<double>(k) * static_cast<double>(k);
    b += 2.0;
    d = a * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + a / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-z);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  }
  // Acklam's rational approximation (|error| < 1.15e-9), then one Halley step
  // against the exact CDF, which brings the result to ~1 ulp.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  constexpr double sqrt_two_pi = 2.5066282746310005024;
  const double e = normal_cdf(x) - p;
  const double u = e * sqrt_two_pi * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

namespace {

// Coefficients of f^(k)(x) = x^{-(s+k)} * sum_i coef[i] (ln x)^i for
// f(x) = x^{-s} (ln x)^r, advanced one derivative at a time via
//   coef'[i] = (i+1) coef[i+1] - (s+k) coef[i].
struct LogPoly {
  double coef[3] = {0.0, 0.0, 0.0};

  double eval(double apow, double L) const {
    return apow * (coef[0] + L * (coef[1] + L * coef[2]));
  }

  LogPoly derive(double s_plus_k) const {
    LogPoly next;
    for (int i = 0; i < 3; ++i) {
      double v = -s_plus_k * coef[i];
      if (i + 1 < 3) v += static_cast<double>(i + 1) * coef[i + 1];
      next.coef[i] = v;
    }
    return next;
  }
};

}  // namespace

TailSum power_log_tail(double s, std::uint64_t j, int log_power) {
  if (!(s > 1.0)) throw std::domain_error("power_log_tail: s must be > 1");
  if (log_power < 0 || log_power > 2) {
    throw std::invalid_argument("power_log_tail: log_power must be 0, 1 or 2");
  }
  const double a = static_cast<double>(j) + 1.0;
  if (!(s < a)) {
    throw std::domain_error("power_log_tail: requires s < j + 1");
  }
  const double L = std::log(a);

  // int_a^inf x^{-s} (ln x)^r dx
  //   = a^{1-s} * sum_{i=0}^r [r!/(r-i)!] L^{r-i} / (s-1)^{i+1}
  double integral = 0.0;
  {
    const double Lp[3] = {1.0, L, L * L};
    double fact = 1.0;
    double dpow = s - 1.0;
    for (int i = 0; i <= log_power; ++i) {
      integral += fact * Lp[log_power - i] / dpow;
      fact *= static_cast<double>(log_power - i);
      dpow *= (s - 1.0);
    }
    integral *= std::pow(a, 1.0 - s);
  }

  LogPoly poly;
  poly.coef[log_power] = 1.0;
  double apow = std::pow(a, -s);
  double fk[6];
  fk[0] = poly.eval(apow, L);
  for (int k = 1; k <= 5; ++k) {
    poly = poly.derive(s + static_cast<double>(k - 1));
    apow /= a;
    fk[k] = poly.eval(apow, L);
  }

  TailSum out;
  out.value = integral + 0.5 * fk[0] - fk[1] / 12.0 + fk[3] / 720.0;
  out.error_bound = std::abs(fk[5]) / 30240.0;
  return out;
}

double power_tail_log(double s, std::uint64_t j) {
  if (!(s > 1.0)) throw std::domain_error("power_tail_log: s must be > 1");
  const double a = static_cast<double>(j) + 1.0;
  if (s < 0.5 * a) {
    const TailSum t = power_log_tail(s, j, 0);
    return std::log(t.value);
  }
  // s comparable to or larger than a: the tail is dominated by its first few
  // terms, which decay by at least e^{-s/a} each step. Sum the ratios.
  const double la = std::log(a);
  KahanSum ratios;
  for (std::uint64_t i = 0;; ++i) {
    const double term =
        std::exp(-s * (std::log(a + static_cast<double>(i)) - la));
    ratios.add(term);
    if (term <= ratios.value() * 1e-18) break;
  }
  return -s * la + std::log(ratios.value());
}

double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw std::invalid_argument("log_binomial: k > n");
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace hentropy
