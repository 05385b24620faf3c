#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "hentropy/distributions.hpp"

namespace hentropy {

// Filesystem failures while exporting results (missing directory, full disk,
// unwritable path). The CLI maps this to its I/O exit code.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One Monte Carlo study: draw `replicates` samples at every size in n_grid
// and apply every named estimator to the *same* draws (paired design, so
// estimator contrasts are free of sampling noise).
struct SimulationConfig {
  explicit SimulationConfig(Pmf dist) : pmf(std::move(dist)) {}

  Pmf pmf;
  std::vector<std::uint64_t> n_grid;  // strictly increasing
  std::uint64_t replicates = 0;
  std::uint64_t base_seed = 1;
  // Validated estimator names. Config parsing defaults this to
  // {harmonic, plugin, miller, oracle} when the key is absent; an explicitly
  // empty list is honored (the run produces header-only outputs).
  std::vector<std::string> estimators;
  // Default output directory for the CLI; an explicit --out wins.
  std::optional<std::string> output_path;
};

// Schema: {"distribution": {...}, "n_grid": [..], "replicates": R,
//          "base_seed": S (optional, default 1),
//          "estimators": ["harmonic", ...] (optional),
//          "output_path": "dir" (optional)}
SimulationConfig config_from_json(const nlohmann::json& j);
void config_to_json(const SimulationConfig& config, nlohmann::json& j);

// Aggregates for one (estimator, n) cell; `estimates` keeps the replicate
// values in replicate order. mean_bias, empirical_variance (population, /R)
// and mse are each computed directly from the replicates, so
// mse == mean_bias^2 + empirical_variance holds to rounding.
struct CellStats {
  std::string estimator;
  std::uint64_t n = 0;
  double mean_bias = 0.0;
  double empirical_variance = 0.0;
  double mse = 0.0;
  std::vector<double> estimates;
};

struct SimulationResult {
  explicit SimulationResult(SimulationConfig c) : config(std::move(c)) {}

  SimulationConfig config;
  double true_entropy = 0.0;
  // Estimator-major, then n in grid order.
  std::vector<CellStats> cells;
};

// Replicate seeds: three rounds of splitmix64 over (base, n, rep). Exposed
// so tests can pin the stream layout.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t n, std::uint64_t rep);

// Deterministic by construction: every (n, rep) task owns a seed derived only
// from (base_seed, n, rep), tasks write into preallocated slots, and
// aggregation is a sequential pass — so results are byte-identical for any
// worker count. workers == 0 picks the hardware thread count.
SimulationResult run_simulation(const SimulationConfig& config,
                                unsigned workers = 1);

// Least-squares slope of ln(value) against ln(key) over (key, value) points;
// e.g. feed (n, mse) pairs to read off the empirical convergence rate.
// Needs at least 3 points (a 2-point fit is exact and says nothing).
double rate_slope(const std::vector<std::pair<double, double>>& points);

// One-sample Kolmogorov-Smirnov distance between the standardized values
// (sample mean, n-1 sd) and the standard normal. `standardized` is sorted.
// Needs at least 50 values for the distance to carry any meaning.
struct NormalityReport {
  double ks_statistic = 0.0;
  std::vector<double> standardized;
};

NormalityReport normality_check(const std::vector<double>& values);

// Shortest-faithful decimal rendering (17 significant digits, locale-free):
// re-parsing the text recovers the exact double.
std::string csv_double(double v);

// details.csv:    estimator,n,replicate,estimate,true_entropy
// aggregates.csv: estimator,n,mse,mean_bias,variance
// results.json:   config echo + true_entropy + both tables (details and
//                 aggregates) as arrays of row objects
void write_details_csv(const SimulationResult& result, const std::string& path);
void write_aggregates_csv(const SimulationResult& result, const std::string& path);
void write_results_json(const SimulationResult& result, const std::string& path);

}  // namespace hentropy
