#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hentropy/special_functions.hpp"

namespace hentropy {

class Pmf;
struct SampleDraw;

// Multiplicities of the observed symbols. counts maps symbol -> multiplicity
// (every entry >= 1) and n is the sample size.
struct CountsHistogram {
  std::map<std::uint64_t, std::uint64_t> counts;
  std::uint64_t n = 0;

  static CountsHistogram from_symbols(const std::vector<std::uint64_t>& symbols);
  // Validates that every multiplicity is >= 1 (zero-count rows are not part
  // of a histogram and would silently shift the plug-in support size).
  static CountsHistogram from_counts(std::map<std::uint64_t, std::uint64_t> counts);

  std::uint64_t distinct() const { return counts.size(); }
};

// Harmonic-difference entropy estimate, in nats:
//   (1/n) sum_j m_j [ J(n-1) - J(m_j - 1) ],   J(m) = sum_{k<=m} 1/k.
// Requires n >= 2 (at n = 1 the estimate would be identically zero no matter
// the source). Estimates are accumulated over the multiset of counts in
// sorted order, so two samples that differ only by a relabeling of symbols
// produce bit-equal results.
double harmonic_estimate(const CountsHistogram& hist,
                         const HarmonicTable& table = shared_harmonic_table());

// Plug-in (maximum likelihood) estimate  ln n - (1/n) sum_j m_j ln m_j.
double plugin_estimate(const CountsHistogram& hist);

// Plug-in with the first-order support-size correction (s-1)/(2n).
double miller_estimate(const CountsHistogram& hist);

// Sample mean of -ln p(X_i) under the *true* pmf: the unbiased reference an
// omniscient observer would report. Throws if a symbol has zero mass.
double oracle_estimate(const CountsHistogram& hist, const Pmf& truth);
double oracle_estimate(const SampleDraw& draw, const Pmf& truth);

// Plug-in variance of the per-observation harmonic terms:
//   (1/n) sum_j m_j g_j^2 - hat(H)^2,  g_j = J(n-1) - J(m_j - 1).
// Requires n >= 2; clamped at zero; feeds the Wald interval as
// variance_hat / n.
double variance_estimate(const CountsHistogram& hist,
                         const HarmonicTable& table = shared_harmonic_table());

struct WaldInterval {
  double low = 0.0;   // clamped at zero: entropy is nonnegative
  double high = 0.0;
};

// point +/- z_{(1+level)/2} sqrt(variance_hat / n). Requires n >= 2 to match
// the estimators the interval wraps.
WaldInterval wald_ci(double point, double variance_hat, std::uint64_t n,
                     double level);

// By-name dispatch used by the CLI and the simulation harness. Valid names:
// "harmonic", "plugin", "miller", "oracle" ("oracle" requires `truth`).
bool is_estimator_name(const std::string& name);
double estimate_by_name(const std::string& name, const CountsHistogram& hist,
                        const Pmf* truth = nullptr,
                        const HarmonicTable& table = shared_harmonic_table());

// What the `estimate` subcommand reports. Interval fields are present only
// when the estimator carries a variance estimate (harmonic); seed only when
// the sample was generated rather than read from a file.
struct EstimateReport {
  std::string estimator_name;
  std::uint64_t n = 0;
  std::uint64_t distinct = 0;
  std::string unit = "nats";
  double point = 0.0;
  std::optional<double> variance_hat;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> level;
  std::optional<std::uint64_t> seed;
};

void report_to_json(const EstimateReport& report, nlohmann::json& j);

}  // namespace hentropy
