#include "hentropy/moment_oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <utility>

#include <nlohmann/json.hpp>

#include "hentropy/distributions.hpp"
#include "hentropy/estimators.hpp"

namespace hentropy {

namespace {

using Params = std::map<std::string, double>;

// Resolved thresholds. The exact finite identities are held to 1e-10; the
// real-argument binomial identities switch to relative once |lhs| > 1 (their
// magnitude grows like (p+q)^n); the dilogarithm series adds its computable
// truncation remainder; inequalities are absolute (all quantities are O(1)).
constexpr double kMomentTol = 1e-10;
constexpr double kBinomialTol = 1e-10;
constexpr double kMultinomialTol = 1e-10;
constexpr double kSeriesBaseTol = 1e-8;
constexpr double kInequalityTol = 1e-12;

IdentityReport equality_report(std::string name, Params params, double lhs,
                               double rhs, double tolerance) {
  IdentityReport r;
  r.identity_name = std::move(name);
  r.parameters = std::move(params);
  r.lhs = lhs;
  r.rhs = rhs;
  r.gap = std::abs(lhs - rhs);
  r.tolerance = tolerance;
  r.pass = r.gap <= r.tolerance;
  return r;
}

// lhs <= rhs, within an absolute slack.
IdentityReport inequality_report(std::string name, Params params, double lhs,
                                 double rhs, double tol) {
  IdentityReport r;
  r.identity_name = std::move(name);
  r.parameters = std::move(params);
  r.lhs = lhs;
  r.rhs = rhs;
  r.gap = std::max(lhs - rhs, 0.0);
  r.tolerance = tol;
  r.pass = r.gap <= r.tolerance;
  return r;
}

void require_enumeration_bound(const char* who, std::uint64_t n,
                               std::uint64_t limit) {
  if (n == 0 || n > limit) {
    throw std::domain_error(std::string(who) + ": n must lie in [1, " +
                            std::to_string(limit) + "]");
  }
}

// Binomial(n, p) weights for b = 0..n, p in (0, 1]. Log-space via lgamma;
// the p = 1 endpoint is handled exactly.
std::vector<double> binomial_weights(std::uint64_t n, double p) {
  std::vector<double> w(n + 1, 0.0);
  if (p >= 1.0) {
    w[n] = 1.0;
    return w;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  for (std::uint64_t b = 0; b <= n; ++b) {
    w[b] = std::exp(log_binomial(n, b) + static_cast<double>(b) * lp +
                    static_cast<double>(n - b) * lq);
  }
  return w;
}

void require_probability(const char* who, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw std::domain_error(std::string(who) + ": p must lie in (0, 1]");
  }
}

// C(n, k) for k = 0..n by the multiplicative recurrence (exact until the
// values leave the 53-bit range, then ~n ulp relative).
std::vector<double> binomial_row(std::uint64_t n) {
  std::vector<double> c(n + 1);
  c[0] = 1.0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    c[k] = c[k - 1] * static_cast<double>(n - k + 1) / static_cast<double>(k);
  }
  return c;
}

// x^0 .. x^n.
std::vector<double> power_row(double x, std::uint64_t n) {
  std::vector<double> v(n + 1);
  v[0] = 1.0;
  for (std::uint64_t i = 1; i <= n; ++i) v[i] = v[i - 1] * x;
  return v;
}

double two_point_entropy(double a) {
  return -a * std::log(a) - (1.0 - a) * std::log1p(-a);
}

void check_multinomial_domain(const char* who, std::uint64_t n, double p,
                              double q) {
  require_enumeration_bound(who, n, 30);
  if (!(p > 0.0 && q > 0.0 && p + q <= 1.0 + 1e-12)) {
    throw std::domain_error(std::string(who) +
                            ": need p, q > 0 with p + q <= 1");
  }
}

// E[(J(n)-J(M)) (J(n)-J(K))] by direct trinomial enumeration over the
// occupancy counts (M, K) of the two tracked symbols.
double multinomial_product_lhs(std::uint64_t n, double p, double q,
                               const HarmonicTable& table) {
  double r = 1.0 - p - q;
  if (r < 1e-15) r = 0.0;
  const double j_n = table(n);
  const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
  const double lp = std::log(p);
  const double lq = std::log(q);
  const double lr = r > 0.0 ? std::log(r) : 0.0;
  KahanSum lhs;
  for (std::uint64_t m = 0; m <= n; ++m) {
    for (std::uint64_t k = 0; k + m <= n; ++k) {
      const std::uint64_t j = n - m - k;
      if (r == 0.0 && j > 0) continue;
      const double logw = lg_n - std::lgamma(static_cast<double>(m) + 1.0) -
                          std::lgamma(static_cast<double>(k) + 1.0) -
                          std::lgamma(static_cast<double>(j) + 1.0) +
                          static_cast<double>(m) * lp +
                          static_cast<double>(k) * lq +
                          static_cast<double>(j) * lr;
      lhs.add(std::exp(logw) * (j_n - table(m)) * (j_n - table(k)));
    }
  }
  return lhs.value();
}

}  // namespace

void identity_report_to_json(const IdentityReport& report, nlohmann::json& j) {
  j = nlohmann::json::object();
  j["identity_name"] = report.identity_name;
  j["parameters"] = nlohmann::json::object();
  for (const auto& [key, value] : report.parameters) {
    j["parameters"][key] = value;
  }
  j["lhs"] = report.lhs;
  j["rhs"] = report.rhs;
  j["gap"] = report.gap;
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass;
}

double binom_expect_J(std::uint64_t n, double p, const HarmonicTable& table) {
  require_enumeration_bound("binom_expect_J", n, 60);
  require_probability("binom_expect_J", p);
  const std::vector<double> w = binomial_weights(n, p);
  KahanSum acc;
  for (std::uint64_t b = 0; b <= n; ++b) acc.add(w[b] * table(b));
  return acc.value();
}

IdentityReport verify_first_moment(std::uint64_t n, double p,
                                   const HarmonicTable& table) {
  require_enumeration_bound("verify_first_moment", n, 60);
  require_probability("verify_first_moment", p);
  const double lhs = table(n) - binom_expect_J(n, p, table);
  const double q = 1.0 - p;
  KahanSum rhs;
  double qm = 1.0;
  for (std::uint64_t m = 1; m <= n; ++m) {
    qm *= q;
    rhs.add(qm / static_cast<double>(m));
  }
  return equality_report("first_moment",
                         {{"n", static_cast<double>(n)}, {"p", p}}, lhs,
                         rhs.value(), kMomentTol);
}

IdentityReport verify_second_moment(std::uint64_t n, double p,
                                    const HarmonicTable& table) {
  require_enumeration_bound("verify_second_moment", n, 60);
  require_probability("verify_second_moment", p);
  const std::vector<double> w = binomial_weights(n, p);
  const double j_n = table(n);
  KahanSum lhs;
  for (std::uint64_t b = 0; b <= n; ++b) {
    const double d = j_n - table(b);
    lhs.add(w[b] * d * d);
  }

  const double q = 1.0 - p;
  KahanSum rhs;
  double qm = 1.0;
  for (std::uint64_t m = 1; m <= n; ++m) {
    qm *= q;
    if (m >= 2) {
      KahanSum inner;  // sum_{k<m} 1/(k (m-k))
      for (std::uint64_t k = 1; k < m; ++k) {
        inner.add(1.0 / (static_cast<double>(k) * static_cast<double>(m - k)));
      }
      rhs.add(qm * inner.value());
    }
    KahanSum edge;  // sum_{k=n-m+1..n} 1/k
    for (std::uint64_t k = n - m + 1; k <= n; ++k) {
      edge.add(1.0 / static_cast<double>(k));
    }
    rhs.add(qm / static_cast<double>(m) * edge.value());
  }
  return equality_report("second_moment",
                         {{"n", static_cast<double>(n)}, {"p", p}},
                         lhs.value(), rhs.value(), kMomentTol);
}

IdentityReport verify_harmonic_binomial(std::uint64_t n, double p, double q,
                                        const HarmonicTable& table) {
  require_enumeration_bound("verify_harmonic_binomial", n, 40);
  const std::vector<double> row = binomial_row(n);
  const std::vector<double> pk = power_row(p, n);
  const std::vector<double> qk = power_row(q, n);
  const std::vector<double> sk = power_row(p + q, n);
  KahanSum lhs;
  for (std::uint64_t k = 0; k <= n; ++k) {
    lhs.add(row[k] * pk[k] * qk[n - k] * table(k));
  }
  KahanSum rhs;
  for (std::uint64_t k = 1; k <= n; ++k) {
    rhs.add((sk[n] - qk[k] * sk[n - k]) / static_cast<double>(k));
  }
  const double tol = kBinomialTol * std::max(1.0, std::abs(lhs.value()));
  return equality_report("harmonic_binomial",
                         {{"n", static_cast<double>(n)}, {"p", p}, {"q", q}},
                         lhs.value(), rhs.value(), tol);
}

IdentityReport verify_reciprocal_binomial(std::uint64_t n, double p, double q) {
  require_enumeration_bound("verify_reciprocal_binomial", n, 40);
  const std::vector<double> row = binomial_row(n);
  const std::vector<double> pk = power_row(p, n);
  const std::vector<double> qk = power_row(q, n);
  const std::vector<double> sk = power_row(p + q, n);
  KahanSum lhs;
  KahanSum rhs;
  for (std::uint64_t k = 1; k <= n; ++k) {
    lhs.add(row[k] * pk[k] * qk[n - k] / static_cast<double>(k));
    rhs.add((sk[k] * qk[n - k] - qk[n]) / static_cast<double>(k));
  }
  const double tol = kBinomialTol * std::max(1.0, std::abs(lhs.value()));
  return equality_report("reciprocal_binomial",
                         {{"n", static_cast<double>(n)}, {"p", p}, {"q", q}},
                         lhs.value(), rhs.value(), tol);
}

IdentityReport verify_multinomial_product(std::uint64_t n, double p, double q,
                                          const HarmonicTable& table) {
  check_multinomial_domain("verify_multinomial_product", n, p, q);
  const double lhs = multinomial_product_lhs(n, p, q, table);

  // Right: the closed double sum plus the diagonal correction.
  const double a = 1.0 - q;
  const double b = 1.0 - p;
  const double u = 1.0 - p / a;
  const double v = 1.0 - q / b;
  const std::vector<double> av = power_row(a, n);
  const std::vector<double> bv = power_row(b, n);
  KahanSum rhs;
  for (std::uint64_t m = 1; m <= n; ++m) {
    double uk = 1.0;
    double vk = 1.0;
    KahanSum inner;
    for (std::uint64_t k = 1; k <= m; ++k) {
      uk *= u;
      vk *= v;
      inner.add((av[m] * uk + bv[m] * vk) / static_cast<double>(k));
    }
    rhs.add(inner.value() / static_cast<double>(m));
    const double md = static_cast<double>(m);
    rhs.add((1.0 - bv[m] - av[m]) / (md * md));
  }
  return equality_report("multinomial_product",
                         {{"n", static_cast<double>(n)}, {"p", p}, {"q", q}},
                         lhs, rhs.value(), kMultinomialTol);
}

double multinomial_covariance(std::uint64_t n, double p, double q,
                              const HarmonicTable& table) {
  check_multinomial_domain("multinomial_covariance", n, p, q);
  const double product = multinomial_product_lhs(n, p, q, table);
  const double mean_p = table(n) - binom_expect_J(n, p, table);
  const double mean_q = table(n) - binom_expect_J(n, q, table);
  return product - mean_p * mean_q;
}

IdentityReport verify_series_dilog(double p, double q, std::uint64_t terms) {
  if (!(p > 0.0 && q > 0.0 && p + q < 1.0)) {
    throw std::domain_error("verify_series_dilog: need p, q > 0, p + q < 1");
  }
  if (terms < 1000) {
    throw std::domain_error("verify_series_dilog: terms must be >= 1000");
  }
  const double a = 1.0 - p;
  const double b = 1.0 - q;
  const double x = 1.0 - q / a;  // pairs with powers of a
  const double y = 1.0 - p / b;
  const double lx = -std::log(q / a);  // -ln(1-x) bounds the inner tail sum
  const double ly = -std::log(p / b);

  KahanSum lhs;
  double am = 1.0;
  double bm = 1.0;
  std::uint64_t m_stop = terms;
  for (std::uint64_t m = 1; m <= terms; ++m) {
    am *= a;
    bm *= b;
    lhs.add((am * log_tail_series(x, m + 1) + bm * log_tail_series(y, m + 1)) /
            static_cast<double>(m));
    if (am * lx + bm * ly < 1e-18) {
      m_stop = m;
      break;
    }
  }
  // Remainder after m_stop: inner sums are below -ln(1-x), outer tail is
  // geometric.
  const double md = static_cast<double>(m_stop + 1);
  const double tail_bound = lx * am * a / (md * p) + ly * bm * b / (md * q);

  const double rhs = std::log(p) * std::log(q) - std::log(q) * std::log1p(-q) -
                     std::log(p) * std::log1p(-p) + kZeta2 - dilog(1.0 - p) -
                     dilog(1.0 - q);

  return equality_report(
      "series_dilog",
      {{"p", p}, {"q", q}, {"terms", static_cast<double>(terms)}}, lhs.value(),
      rhs, kSeriesBaseTol + tail_bound);
}

TwoPointBound lecam_two_point(double epsilon, std::uint64_t n) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error("lecam_two_point: epsilon must lie in (0, 1)");
  }
  if (n == 0) throw std::domain_error("lecam_two_point: n must be >= 1");
  TwoPointBound out;
  out.epsilon = epsilon;
  out.n = n;
  // p = (1/3, 2/3), q = ((1+eps)/3, (2-eps)/3).
  out.kl = -std::log1p(epsilon) / 3.0 - 2.0 / 3.0 * std::log1p(-epsilon / 2.0);
  const double hp = two_point_entropy(1.0 / 3.0);
  const double hq = two_point_entropy((1.0 + epsilon) / 3.0);
  out.entropy_gap = std::abs(hq - hp);
  out.risk_lower_bound = 0.25 * out.entropy_gap * out.entropy_gap *
                         std::exp(-static_cast<double>(n) * out.kl);
  // Both hold analytically for every epsilon in (0, 1); a violation here
  // means the arithmetic above is broken, not the input.
  if (out.kl > epsilon * epsilon + kInequalityTol) {
    throw std::logic_error("lecam_two_point: KL exceeded epsilon^2");
  }
  const double gap_floor = epsilon * std::numbers::ln2 / 3.0 - epsilon * epsilon;
  if (out.entropy_gap < gap_floor - kInequalityTol) {
    throw std::logic_error("lecam_two_point: entropy gap below its floor");
  }
  return out;
}

std::vector<IdentityReport> verify_lecam(double epsilon, std::uint64_t n) {
  const TwoPointBound b = lecam_two_point(epsilon, n);
  const Params params = {{"epsilon", epsilon}, {"n", static_cast<double>(n)}};
  std::vector<IdentityReport> out;
  out.push_back(inequality_report("lecam_kl", params, b.kl, epsilon * epsilon,
                                  kInequalityTol));
  out.push_back(inequality_report(
      "lecam_entropy_gap", params,
      epsilon * std::numbers::ln2 / 3.0 - epsilon * epsilon, b.entropy_gap,
      kInequalityTol));
  IdentityReport risk = inequality_report(
      "lecam_risk_bound", params, b.risk_lower_bound,
      0.25 * b.entropy_gap * b.entropy_gap, kInequalityTol);
  risk.pass = risk.pass && b.risk_lower_bound > 0.0;
  out.push_back(risk);
  return out;
}

double exhaustive_bias(const Pmf& pmf, std::uint64_t n,
                       const HarmonicTable& table) {
  if (n < 2) {
    throw std::domain_error("exhaustive_bias: n must be >= 2");
  }
  const std::vector<double>& probs = pmf.finite_probs();
  const std::uint64_t s = probs.size();
  const double n_compositions = std::exp(log_binomial(n + s - 1, s - 1));
  if (n_compositions > 5e6) {
    throw std::invalid_argument(
        "exhaustive_bias: composition count exceeds 5e6");
  }
  const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
  std::vector<double> log_p(s);
  for (std::uint64_t i = 0; i < s; ++i) log_p[i] = std::log(probs[i]);

  std::vector<std::uint64_t> counts(s, 0);
  KahanSum acc;
  // Depth-first over count vectors; log-weight accumulates along the path.
  auto descend = [&](auto&& self, std::uint64_t idx, std::uint64_t remaining,
                     double logw) -> void {
    if (idx == s - 1) {
      counts[idx] = remaining;
      const double w =
          std::exp(logw + static_cast<double>(remaining) * log_p[idx] -
                   std::lgamma(static_cast<double>(remaining) + 1.0));
      std::map<std::uint64_t, std::uint64_t> occupied;
      for (std::uint64_t i = 0; i < s; ++i) {
        if (counts[i] > 0) occupied[i + 1] = counts[i];
      }
      acc.add(w * harmonic_estimate(CountsHistogram::from_counts(
                                        std::move(occupied)),
                                    table));
      return;
    }
    for (std::uint64_t m = 0; m <= remaining; ++m) {
      counts[idx] = m;
      self(self, idx + 1, remaining - m,
           logw + static_cast<double>(m) * log_p[idx] -
               std::lgamma(static_cast<double>(m) + 1.0));
    }
  };
  descend(descend, 0, n, lg_n);
  return acc.value() - pmf.entropy();
}

std::vector<IdentityReport> run_verification_grid(bool extended,
                                                  const HarmonicTable& table) {
  std::vector<IdentityReport> out;

  const std::vector<double> p_grid = {0.01, 0.05, 0.1,  0.25,
                                      0.5,  0.75, 0.9,  0.99};
  const std::uint64_t n_moment = extended ? 60 : 25;
  for (std::uint64_t n = 1; n <= n_moment; ++n) {
    for (const double p : p_grid) {
      out.push_back(verify_first_moment(n, p, table));
      out.push_back(verify_second_moment(n, p, table));
    }
  }

  // Real-argument pairs: the identities are polynomial in (p, q), so points
  // outside the probability simplex exercise them as algebra, not measure.
  // Pairs with negative entries or p + q > 1 are kept at smaller n where the
  // alternating sums stay well conditioned.
  const std::vector<std::pair<double, double>> real_pairs = {
      {0.3, 0.7},   {0.5, 0.5},  {0.9, 0.1},
      {1.2, -0.3},  {-0.4, 1.7}, {0.25, 0.45}};
  const std::uint64_t n_binom = extended ? 40 : 12;
  for (const auto& [p, q] : real_pairs) {
    const bool wild = p < 0.0 || q < 0.0 || p + q > 1.0 + 1e-12;
    const std::uint64_t cap = wild ? std::min<std::uint64_t>(n_binom, 20) : n_binom;
    for (std::uint64_t n = 1; n <= cap; ++n) {
      out.push_back(verify_harmonic_binomial(n, p, q, table));
      out.push_back(verify_reciprocal_binomial(n, p, q));
    }
  }

  std::vector<std::pair<double, double>> mp_pairs = {
      {0.1, 0.1}, {0.2, 0.3}, {0.05, 0.6}, {0.45, 0.45}};
  if (extended) mp_pairs.emplace_back(0.3, 0.7);  // p + q = 1 boundary
  const std::uint64_t n_mp = extended ? 30 : 12;
  for (const auto& [p, q] : mp_pairs) {
    for (std::uint64_t n = 1; n <= n_mp; ++n) {
      out.push_back(verify_multinomial_product(n, p, q, table));
      out.push_back(inequality_report(
          "multinomial_covariance",
          {{"n", static_cast<double>(n)}, {"p", p}, {"q", q}},
          multinomial_covariance(n, p, q, table), 0.0, kInequalityTol));
    }
  }

  std::vector<std::tuple<double, double, std::uint64_t>> dilog_cases = {
      {0.25, 0.25, 5000}, {0.4, 0.5, 5000}, {0.05, 0.05, 20000}};
  if (extended) {
    dilog_cases.emplace_back(0.15, 0.35, 20000);
    dilog_cases.emplace_back(0.45, 0.45, 5000);
  }
  for (const auto& [p, q, terms] : dilog_cases) {
    out.push_back(verify_series_dilog(p, q, terms));
  }

  for (const double eps : {0.1, 0.25, 0.5, 0.75}) {
    for (const std::uint64_t n : {1ULL, 10ULL, 100ULL, 1000ULL}) {
      for (auto& r : verify_lecam(eps, n)) out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace hentropy
