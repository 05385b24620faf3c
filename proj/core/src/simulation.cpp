#include "hentropy/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "hentropy/estimators.hpp"
#include "hentropy/special_functions.hpp"

namespace hentropy {

namespace {

const std::vector<std::string> kDefaultEstimators = {"harmonic", "plugin",
                                                     "miller", "oracle"};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// JSON integers arrive as unsigned when parsed from text but as signed when
// assembled programmatically; accept both spellings of a nonnegative value.
bool json_to_u64(const nlohmann::json& v, std::uint64_t& out) {
  if (v.is_number_unsigned()) {
    out = v.get<std::uint64_t>();
    return true;
  }
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    out = static_cast<std::uint64_t>(v.get<std::int64_t>());
    return true;
  }
  return false;
}

void validate_config(const SimulationConfig& config) {
  if (config.n_grid.empty()) {
    throw std::invalid_argument("simulation: n_grid must be non-empty");
  }
  if (config.replicates == 0) {
    throw std::invalid_argument("simulation: replicates must be >= 1");
  }
  bool wants_harmonic = false;
  for (const auto& name : config.estimators) {
    if (!is_estimator_name(name)) {
      throw std::invalid_argument("simulation: unknown estimator \"" + name +
                                  "\"");
    }
    wants_harmonic = wants_harmonic || name == "harmonic";
  }
  std::uint64_t prev = 0;
  for (const std::uint64_t n : config.n_grid) {
    if (n == 0) throw std::invalid_argument("simulation: n must be >= 1");
    if (n <= prev) {
      throw std::invalid_argument(
          "simulation: n_grid must be strictly increasing");
    }
    prev = n;
    if (wants_harmonic && n < 2) {
      throw std::invalid_argument(
          "simulation: the harmonic estimator needs n >= 2");
    }
  }
}

}  // namespace

SimulationConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("distribution")) {
    throw std::invalid_argument(
        "config: expected an object with a \"distribution\" entry");
  }
  SimulationConfig config(pmf_from_json(j.at("distribution")));

  if (!j.contains("n_grid") || !j.at("n_grid").is_array() ||
      j.at("n_grid").empty()) {
    throw std::invalid_argument("config: \"n_grid\" must be a non-empty array");
  }
  for (const auto& v : j.at("n_grid")) {
    std::uint64_t n = 0;
    if (!json_to_u64(v, n) || n == 0) {
      throw std::invalid_argument("config: n_grid entries must be positive integers");
    }
    config.n_grid.push_back(n);
  }

  if (!j.contains("replicates") ||
      !json_to_u64(j.at("replicates"), config.replicates) ||
      config.replicates == 0) {
    throw std::invalid_argument("config: \"replicates\" must be a positive integer");
  }

  if (j.contains("base_seed")) {
    if (!json_to_u64(j.at("base_seed"), config.base_seed)) {
      throw std::invalid_argument("config: \"base_seed\" must be a nonnegative integer");
    }
  }

  if (j.contains("estimators")) {
    if (!j.at("estimators").is_array()) {
      throw std::invalid_argument("config: \"estimators\" must be an array");
    }
    // An empty array is allowed: the run then touches no data and the
    // exporters emit header-only tables.
    for (const auto& v : j.at("estimators")) {
      if (!v.is_string()) {
        throw std::invalid_argument("config: estimator names must be strings");
      }
      config.estimators.push_back(v.get<std::string>());
    }
  } else {
    config.estimators = kDefaultEstimators;
  }

  if (j.contains("output_path")) {
    if (!j.at("output_path").is_string()) {
      throw std::invalid_argument("config: \"output_path\" must be a string");
    }
    config.output_path = j.at("output_path").get<std::string>();
  }
  validate_config(config);
  return config;
}

void config_to_json(const SimulationConfig& config, nlohmann::json& j) {
  j = nlohmann::json::object();
  nlohmann::json dist;
  pmf_to_json(config.pmf, dist);
  j["distribution"] = std::move(dist);
  j["n_grid"] = config.n_grid;
  j["replicates"] = config.replicates;
  j["base_seed"] = config.base_seed;
  j["estimators"] = config.estimators;
  if (config.output_path) j["output_path"] = *config.output_path;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t n, std::uint64_t rep) {
  return splitmix64(splitmix64(splitmix64(base) ^ n) ^ rep);
}

SimulationResult run_simulation(const SimulationConfig& config,
                                unsigned workers) {
  validate_config(config);
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }

  const std::size_t n_cells = config.n_grid.size();
  const std::uint64_t reps = config.replicates;
  const std::size_t n_est = config.estimators.size();
  const HarmonicTable& table = shared_harmonic_table();

  // estimates[e][ni][rep], preallocated so workers never contend on layout.
  std::vector<std::vector<std::vector<double>>> estimates(
      n_est, std::vector<std::vector<double>>(n_cells,
                                              std::vector<double>(reps, 0.0)));

  const std::uint64_t total_tasks = n_est == 0 ? 0 : n_cells * reps;
  std::atomic<std::uint64_t> next_task{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;

  auto work = [&]() {
    try {
      for (;;) {
        const std::uint64_t task = next_task.fetch_add(1);
        if (task >= total_tasks) return;
        {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (failure) return;
        }
        const std::size_t ni = static_cast<std::size_t>(task / reps);
        const std::uint64_t rep = task % reps;
        const std::uint64_t n = config.n_grid[ni];
        const SampleDraw draw =
            sample(config.pmf, n, mix_seed(config.base_seed, n, rep));
        const CountsHistogram hist =
            CountsHistogram::from_symbols(draw.symbols);
        for (std::size_t e = 0; e < n_est; ++e) {
          estimates[e][ni][rep] = estimate_by_name(config.estimators[e], hist,
                                                   &config.pmf, table);
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  if (workers <= 1 || total_tasks <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  SimulationResult result(config);
  result.true_entropy = config.pmf.entropy();
  result.cells.reserve(n_est * n_cells);
  const double h = result.true_entropy;
  for (std::size_t e = 0; e < n_est; ++e) {
    for (std::size_t ni = 0; ni < n_cells; ++ni) {
      CellStats cell;
      cell.estimator = config.estimators[e];
      cell.n = config.n_grid[ni];
      cell.estimates = std::move(estimates[e][ni]);

      KahanSum err_sum;
      KahanSum sq_sum;
      for (const double est : cell.estimates) {
        const double d = est - h;
        err_sum.add(d);
        sq_sum.add(d * d);
      }
      const double rd = static_cast<double>(reps);
      cell.mean_bias = err_sum.value() / rd;
      cell.mse = sq_sum.value() / rd;
      KahanSum centered;
      for (const double est : cell.estimates) {
        const double d = (est - h) - cell.mean_bias;
        centered.add(d * d);
      }
      cell.empirical_variance = centered.value() / rd;
      result.cells.push_back(std::move(cell));
    }
  }
  return result;
}

double rate_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw std::invalid_argument("rate_slope: need at least three points");
  }
  KahanSum sx;
  KahanSum sy;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0) || !(y > 0.0)) {
      throw std::domain_error("rate_slope: points must be positive");
    }
    sx.add(std::log(x));
    sy.add(std::log(y));
  }
  const double mx = sx.value() / static_cast<double>(points.size());
  const double my = sy.value() / static_cast<double>(points.size());
  KahanSum sxy;
  KahanSum sxx;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxy.add(dx * (std::log(y) - my));
    sxx.add(dx * dx);
  }
  if (sxx.value() == 0.0) {
    throw std::domain_error("rate_slope: degenerate abscissae");
  }
  return sxy.value() / sxx.value();
}

NormalityReport normality_check(const std::vector<double>& values) {
  if (values.size() < 50) {
    throw std::invalid_argument("normality_check: need at least 50 values");
  }
  const double nd = static_cast<double>(values.size());
  KahanSum sum;
  for (const double v : values) sum.add(v);
  const double mean = sum.value() / nd;
  KahanSum sq;
  for (const double v : values) sq.add((v - mean) * (v - mean));
  const double sd = std::sqrt(sq.value() / (nd - 1.0));
  if (!(sd > 0.0)) {
    throw std::domain_error("normality_check: zero sample variance");
  }

  NormalityReport report;
  report.standardized.reserve(values.size());
  for (const double v : values) report.standardized.push_back((v - mean) / sd);
  std::sort(report.standardized.begin(), report.standardized.end());

  double d = 0.0;
  for (std::size_t i = 0; i < report.standardized.size(); ++i) {
    const double phi = normal_cdf(report.standardized[i]);
    const double hi = static_cast<double>(i + 1) / nd - phi;
    const double lo = phi - static_cast<double>(i) / nd;
    d = std::max({d, hi, lo});
  }
  report.ks_statistic = d;
  return report;
}

std::string csv_double(double v) {
  char buf[40];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: "\n" stays "\n"
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

void finish_output(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to " + path + " failed");
}

}  // namespace

void write_details_csv(const SimulationResult& result,
                       const std::string& path) {
  std::ofstream out = open_output(path);
  out << "estimator,n,replicate,estimate,true_entropy\n";
  const std::string h = csv_double(result.true_entropy);
  for (const CellStats& cell : result.cells) {
    for (std::size_t rep = 0; rep < cell.estimates.size(); ++rep) {
      out << cell.estimator << ',' << cell.n << ',' << rep << ','
          << csv_double(cell.estimates[rep]) << ',' << h << '\n';
    }
  }
  finish_output(out, path);
}

void write_aggregates_csv(const SimulationResult& result,
                          const std::string& path) {
  std::ofstream out = open_output(path);
  out << "estimator,n,mse,mean_bias,variance\n";
  for (const CellStats& cell : result.cells) {
    out << cell.estimator << ',' << cell.n << ',' << csv_double(cell.mse)
        << ',' << csv_double(cell.mean_bias) << ','
        << csv_double(cell.empirical_variance) << '\n';
  }
  finish_output(out, path);
}

void write_results_json(const SimulationResult& result,
                        const std::string& path) {
  nlohmann::json j;
  config_to_json(result.config, j["config"]);
  j["true_entropy"] = result.true_entropy;

  nlohmann::json aggregates = nlohmann::json::array();
  for (const CellStats& cell : result.cells) {
    nlohmann::json c;
    c["estimator"] = cell.estimator;
    c["n"] = cell.n;
    c["mse"] = cell.mse;
    c["mean_bias"] = cell.mean_bias;
    c["variance"] = cell.empirical_variance;
    aggregates.push_back(std::move(c));
  }
  j["aggregates"] = std::move(aggregates);

  nlohmann::json details = nlohmann::json::array();
  for (const CellStats& cell : result.cells) {
    for (std::size_t rep = 0; rep < cell.estimates.size(); ++rep) {
      nlohmann::json row;
      row["estimator"] = cell.estimator;
      row["n"] = cell.n;
      row["replicate"] = rep;
      row["estimate"] = cell.estimates[rep];
      row["true_entropy"] = result.true_entropy;
      details.push_back(std::move(row));
    }
  }
  j["details"] = std::move(details);

  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  finish_output(out, path);
}

}  // namespace hentropy
