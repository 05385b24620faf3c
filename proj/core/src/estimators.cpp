#include "hentropy/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "hentropy/distributions.hpp"

namespace hentropy {

CountsHistogram CountsHistogram::from_symbols(
    const std::vector<std::uint64_t>& symbols) {
  CountsHistogram hist;
  for (const std::uint64_t s : symbols) {
    if (s == 0) throw std::invalid_argument("histogram: symbols start at 1");
    ++hist.counts[s];
  }
  hist.n = symbols.size();
  return hist;
}

CountsHistogram CountsHistogram::from_counts(
    std::map<std::uint64_t, std::uint64_t> counts) {
  CountsHistogram hist;
  for (const auto& [symbol, m] : counts) {
    if (symbol == 0) throw std::invalid_argument("histogram: symbols start at 1");
    if (m == 0) throw std::invalid_argument("histogram: zero-count entry");
    hist.n += m;
  }
  hist.counts = std::move(counts);
  return hist;
}

namespace {

// The multiset of counts in increasing order. All label-free estimators fold
// over this, which pins the floating-point summation order to the count
// values alone.
std::vector<std::uint64_t> sorted_counts(const CountsHistogram& hist) {
  std::vector<std::uint64_t> out;
  out.reserve(hist.counts.size());
  for (const auto& [symbol, m] : hist.counts) out.push_back(m);
  std::sort(out.begin(), out.end());
  return out;
}

void require_sample(const CountsHistogram& hist) {
  if (hist.n == 0) throw std::domain_error("estimate: empty sample");
  std::uint64_t check = 0;
  for (const auto& [symbol, m] : hist.counts) check += m;
  if (check != hist.n) {
    throw std::invalid_argument("histogram: n does not match counts");
  }
}

void require_pair(const CountsHistogram& hist, const char* who) {
  require_sample(hist);
  if (hist.n < 2) {
    throw std::domain_error(std::string(who) + ": needs a sample of size >= 2");
  }
}

}  // namespace

double harmonic_estimate(const CountsHistogram& hist,
                         const HarmonicTable& table) {
  require_pair(hist, "harmonic estimate");
  const double j_n1 = table(hist.n - 1);
  KahanSum acc;
  for (const std::uint64_t m : sorted_counts(hist)) {
    acc.add(static_cast<double>(m) * (j_n1 - table(m - 1)));
  }
  return acc.value() / static_cast<double>(hist.n);
}

double plugin_estimate(const CountsHistogram& hist) {
  require_sample(hist);
  const double n = static_cast<double>(hist.n);
  KahanSum acc;  // sum m ln m
  for (const std::uint64_t m : sorted_counts(hist)) {
    if (m > 1) {
      const double md = static_cast<double>(m);
      acc.add(md * std::log(md));
    }
  }
  return std::max(std::log(n) - acc.value() / n, 0.0);
}

double miller_estimate(const CountsHistogram& hist) {
  require_sample(hist);
  const double correction = static_cast<double>(hist.distinct() - 1) /
                            (2.0 * static_cast<double>(hist.n));
  return plugin_estimate(hist) + correction;
}

double oracle_estimate(const CountsHistogram& hist, const Pmf& truth) {
  require_sample(hist);
  KahanSum acc;
  for (const auto& [symbol, m] : hist.counts) {
    const double p = truth.mass(symbol);
    if (!(p > 0.0)) {
      throw std::domain_error("oracle estimate: observed symbol has zero mass");
    }
    acc.add(-static_cast<double>(m) * std::log(p));
  }
  return acc.value() / static_cast<double>(hist.n);
}

double oracle_estimate(const SampleDraw& draw, const Pmf& truth) {
  return oracle_estimate(CountsHistogram::from_symbols(draw.symbols), truth);
}

double variance_estimate(const CountsHistogram& hist,
                         const HarmonicTable& table) {
  require_pair(hist, "variance estimate");
  const double j_n1 = table(hist.n - 1);
  KahanSum sq;
  for (const std::uint64_t m : sorted_counts(hist)) {
    const double g = j_n1 - table(m - 1);
    sq.add(static_cast<double>(m) * g * g);
  }
  const double mean = harmonic_estimate(hist, table);
  const double v = sq.value() / static_cast<double>(hist.n) - mean * mean;
  return std::max(v, 0.0);
}

WaldInterval wald_ci(double point, double variance_hat, std::uint64_t n,
                     double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("wald_ci: level must lie in (0, 1)");
  }
  if (n < 2) throw std::domain_error("wald_ci: n must be >= 2");
  const double z = normal_quantile(0.5 + 0.5 * level);
  const double half =
      z * std::sqrt(std::max(variance_hat, 0.0) / static_cast<double>(n));
  WaldInterval ci;
  ci.low = std::max(point - half, 0.0);
  ci.high = point + half;
  return ci;
}

bool is_estimator_name(const std::string& name) {
  return name == "harmonic" || name == "plugin" || name == "miller" ||
         name == "oracle";
}

double estimate_by_name(const std::string& name, const CountsHistogram& hist,
                        const Pmf* truth, const HarmonicTable& table) {
  if (name == "harmonic") return harmonic_estimate(hist, table);
  if (name == "plugin") return plugin_estimate(hist);
  if (name == "miller") return miller_estimate(hist);
  if (name == "oracle") {
    if (truth == nullptr) {
      throw std::invalid_argument(
          "estimate: \"oracle\" needs the generating distribution");
    }
    return oracle_estimate(hist, *truth);
  }
  throw std::invalid_argument("estimate: unknown estimator \"" + name + "\"");
}

void report_to_json(const EstimateReport& report, nlohmann::json& j) {
  j = nlohmann::json::object();
  j["estimator_name"] = report.estimator_name;
  j["n"] = report.n;
  j["distinct"] = report.distinct;
  j["unit"] = report.unit;
  j["point"] = report.point;
  if (report.variance_hat) j["variance_hat"] = *report.variance_hat;
  if (report.ci_low) j["ci_low"] = *report.ci_low;
  if (report.ci_high) j["ci_high"] = *report.ci_high;
  if (report.level) j["level"] = *report.level;
  if (report.seed) j["seed"] = *report.seed;
}

}  // namespace hentropy
