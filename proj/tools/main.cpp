// hentropy: entropy estimation from discrete samples.
//
// Subcommands:
//   estimate    point estimate (+ Wald interval) from a sample file
//   simulate    Monte Carlo bias/variance/MSE study from a JSON config
//   verify      check the moment identities behind the estimator on a grid
//   bias-curve  exact expected bias of the harmonic estimator vs sample size
//
// Exit codes: 0 success, 1 verification failure, 2 usage/config error,
// 3 I/O error.

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hentropy/distributions.hpp"
#include "hentropy/estimators.hpp"
#include "hentropy/moment_oracle.hpp"
#include "hentropy/simulation.hpp"
#include "hentropy/special_functions.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

constexpr double kLn2 = 0.69314718055994530942;

struct EstimateArgs {
  std::string input;
  std::string format = "symbols";
  std::string estimator = "harmonic";
  double level = 0.95;
  bool bits = false;
};

struct SimulateArgs {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;
};

struct VerifyArgs {
  std::string grid = "default";
  bool corrupt_table = false;
};

struct BiasCurveArgs {
  std::string dist;
  std::uint64_t n_min = 10;
  std::uint64_t n_max = 10000;
  std::uint64_t points = 25;
};

std::uint64_t parse_u64(const std::string& token, const std::string& what) {
  std::uint64_t value = 0;
  const auto res =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw std::invalid_argument(what + ": \"" + token +
                                "\" is not a nonnegative integer");
  }
  return value;
}

std::string strip(const std::string& line) {
  const auto begin = line.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = line.find_last_not_of(" \t\r");
  return line.substr(begin, end - begin + 1);
}

// One positive integer symbol per line; blank lines are skipped.
hentropy::CountsHistogram read_symbols(std::istream& in) {
  std::vector<std::uint64_t> symbols;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string token = strip(line);
    if (token.empty()) continue;
    symbols.push_back(
        parse_u64(token, "sample input line " + std::to_string(lineno)));
  }
  if (symbols.empty()) {
    throw std::invalid_argument("sample input: no symbols found");
  }
  return hentropy::CountsHistogram::from_symbols(symbols);
}

// CSV lines "symbol,count"; blank lines are skipped. Repeated symbols
// accumulate.
hentropy::CountsHistogram read_histogram(std::istream& in) {
  std::map<std::uint64_t, std::uint64_t> counts;
  std::string line;
  std::uint64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string row = strip(line);
    if (row.empty()) continue;
    const std::string where = "histogram input line " + std::to_string(lineno);
    const auto comma = row.find(',');
    if (comma == std::string::npos ||
        row.find(',', comma + 1) != std::string::npos) {
      throw std::invalid_argument(where + ": expected \"symbol,count\"");
    }
    const std::uint64_t symbol = parse_u64(strip(row.substr(0, comma)), where);
    const std::uint64_t count = parse_u64(strip(row.substr(comma + 1)), where);
    if (symbol == 0) {
      throw std::invalid_argument(where + ": symbols start at 1");
    }
    if (count == 0) {
      throw std::invalid_argument(where + ": zero count");
    }
    counts[symbol] += count;
  }
  if (counts.empty()) {
    throw std::invalid_argument("histogram input: no rows found");
  }
  return hentropy::CountsHistogram::from_counts(std::move(counts));
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hentropy::IoError("cannot open " + path);
  return nlohmann::json::parse(in);  // throws json::parse_error on bad input
}

int run_estimate(const EstimateArgs& args) {
  if (!(args.level > 0.0 && args.level < 1.0)) {
    throw std::invalid_argument("--level must lie strictly between 0 and 1");
  }

  hentropy::CountsHistogram hist;
  if (args.input == "-") {
    hist = args.format == "symbols" ? read_symbols(std::cin)
                                    : read_histogram(std::cin);
  } else {
    std::ifstream in(args.input, std::ios::binary);
    if (!in) throw hentropy::IoError("cannot open " + args.input);
    hist = args.format == "symbols" ? read_symbols(in) : read_histogram(in);
  }
  if (hist.n < 2) {
    throw std::invalid_argument("estimate: need a sample of size >= 2");
  }

  const double scale = args.bits ? kLn2 : 1.0;
  hentropy::EstimateReport report;
  report.estimator_name = args.estimator;
  report.n = hist.n;
  report.distinct = hist.distinct();
  report.unit = args.bits ? "bits" : "nats";
  report.point = hentropy::estimate_by_name(args.estimator, hist) / scale;
  if (args.estimator == "harmonic") {
    const double var_nats = hentropy::variance_estimate(hist);
    const hentropy::WaldInterval ci = hentropy::wald_ci(
        hentropy::harmonic_estimate(hist), var_nats, hist.n, args.level);
    report.variance_hat = var_nats / (scale * scale);
    report.ci_low = ci.low / scale;
    report.ci_high = ci.high / scale;
    report.level = args.level;
  }

  nlohmann::json j;
  hentropy::report_to_json(report, j);
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int run_simulate(const SimulateArgs& args) {
  const nlohmann::json config_json = load_json_file(args.config_path);
  hentropy::SimulationConfig config = hentropy::config_from_json(config_json);

  if (const char* env = std::getenv("ENTROPY_SEED")) {
    const std::uint64_t seed = parse_u64(env, "ENTROPY_SEED");
    std::cerr << "simulate: base_seed " << config.base_seed
              << " overridden by ENTROPY_SEED=" << seed << '\n';
    config.base_seed = seed;
  }

  std::string out_dir = args.out_dir;
  if (out_dir.empty()) {
    if (!config.output_path || config.output_path->empty()) {
      throw std::invalid_argument(
          "simulate: pass --out or set \"output_path\" in the config");
    }
    out_dir = *config.output_path;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw hentropy::IoError("cannot create output directory " + out_dir +
                            ": " + ec.message());
  }

  std::cerr << "simulate: family=" << config.pmf.family_name()
            << " cells=" << config.n_grid.size()
            << " replicates=" << config.replicates
            << " estimators=" << config.estimators.size()
            << " seed=" << config.base_seed << " threads="
            << (args.threads == 0 ? std::string("auto")
                                  : std::to_string(args.threads))
            << '\n';

  const hentropy::SimulationResult result =
      hentropy::run_simulation(config, args.threads);

  const std::filesystem::path out(out_dir);
  hentropy::write_details_csv(result, (out / "details.csv").string());
  hentropy::write_aggregates_csv(result, (out / "aggregates.csv").string());
  hentropy::write_results_json(result, (out / "results.json").string());
  std::cerr << "simulate: wrote details.csv, aggregates.csv, results.json to "
            << out.string() << '\n';
  return kExitOk;
}

int run_verify(const VerifyArgs& args) {
  std::vector<hentropy::IdentityReport> reports;
  if (args.corrupt_table) {
    // Deliberately damaged table: proves the identity sweep actually has
    // teeth (it must fail loudly on a wrong harmonic value).
    const hentropy::HarmonicTable corrupted =
        hentropy::shared_harmonic_table().with_offset_entry(17, 1e-6);
    reports =
        hentropy::run_verification_grid(args.grid == "extended", corrupted);
  } else {
    reports = hentropy::run_verification_grid(args.grid == "extended");
  }

  std::size_t failed = 0;
  for (const auto& report : reports) {
    nlohmann::json j;
    hentropy::identity_report_to_json(report, j);
    std::cout << j.dump() << '\n';
    if (!report.pass) ++failed;
  }
  std::cerr << "verify: " << (reports.size() - failed) << '/' << reports.size()
            << " identity checks passed (grid=" << args.grid << ")\n";
  return failed == 0 ? kExitOk : kExitVerifyFail;
}

int run_bias_curve(const BiasCurveArgs& args) {
  if (args.n_min < 2) throw std::invalid_argument("--n-min must be >= 2");
  if (args.n_max < args.n_min) {
    throw std::invalid_argument("--n-max must be >= --n-min");
  }
  if (args.points == 0) throw std::invalid_argument("--points must be >= 1");

  // --dist takes either inline JSON or a path to a JSON file.
  const std::string dist_arg = strip(args.dist);
  const nlohmann::json dist_json = !dist_arg.empty() && dist_arg.front() == '{'
                                       ? nlohmann::json::parse(dist_arg)
                                       : load_json_file(args.dist);
  const hentropy::Pmf pmf = hentropy::pmf_from_json(dist_json);

  // Geometrically spaced grid, deduplicated after rounding.
  std::vector<std::uint64_t> grid;
  const double lo = std::log(static_cast<double>(args.n_min));
  const double hi = std::log(static_cast<double>(args.n_max));
  const std::uint64_t steps = args.points == 1 ? 1 : args.points - 1;
  for (std::uint64_t i = 0; i < args.points; ++i) {
    const double t = lo + (hi - lo) * static_cast<double>(i) /
                              static_cast<double>(steps);
    const auto n = static_cast<std::uint64_t>(std::llround(std::exp(t)));
    if (grid.empty() || grid.back() < n) grid.push_back(n);
  }

  std::cout << "n,exact_bias,abs_bias\n";
  for (const std::uint64_t n : grid) {
    const double bias = pmf.exact_bias(n);
    std::cout << n << ',' << hentropy::csv_double(bias) << ','
              << hentropy::csv_double(std::abs(bias)) << '\n';
    if (!std::cout) throw hentropy::IoError("write to stdout failed");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Entropy estimation for discrete samples: harmonic-difference "
      "estimator with exact moment verification and Monte Carlo studies"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hentropy 0.1.0");

  EstimateArgs est_args;
  CLI::App* est = app.add_subcommand(
      "estimate", "Estimate entropy from a sample or histogram file");
  est->add_option("-i,--input", est_args.input,
                  "Input file; \"-\" reads standard input")
      ->required();
  est->add_option("-f,--format", est_args.format,
                  "Input layout: one symbol per line, or CSV "
                  "\"symbol,count\" rows")
      ->check(CLI::IsMember({"symbols", "histogram"}));
  est->add_option("-e,--estimator", est_args.estimator, "Point estimator")
      ->check(CLI::IsMember({"harmonic", "plugin", "miller"}));
  est->add_option("--level", est_args.level,
                  "Wald confidence level (harmonic only)");
  est->add_flag("--bits", est_args.bits, "Report in bits instead of nats");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Monte Carlo study of estimator bias/variance/MSE");
  sim->add_option("-c,--config", sim_args.config_path, "JSON study config")
      ->required();
  sim->add_option("-o,--out", sim_args.out_dir,
                  "Output directory for details.csv, aggregates.csv, "
                  "results.json (default: config \"output_path\")");
  sim->add_option("-t,--threads", sim_args.threads,
                  "Worker threads (0 = hardware)");

  VerifyArgs ver_args;
  CLI::App* ver = app.add_subcommand(
      "verify", "Check the estimator's moment identities on a parameter grid");
  ver->add_option("--grid", ver_args.grid, "Grid size")
      ->check(CLI::IsMember({"default", "extended"}));
  ver->add_flag("--corrupt-table", ver_args.corrupt_table,
                "Run against a deliberately corrupted harmonic table "
                "(diagnostic; must fail)")
      ->group("");

  BiasCurveArgs bias_args;
  CLI::App* bias = app.add_subcommand(
      "bias-curve", "Exact expected bias of the harmonic estimator vs n");
  bias->add_option("-d,--dist", bias_args.dist,
                   "Distribution as inline JSON (e.g. "
                   "{\"family\":\"zeta\",\"gamma\":2}) or a path to a JSON "
                   "file")
      ->required();
  bias->add_option("--n-min", bias_args.n_min, "Smallest sample size (>= 2)");
  bias->add_option("--n-max", bias_args.n_max, "Largest sample size");
  bias->add_option("--points", bias_args.points, "Grid points (log-spaced)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the parse error
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (est->parsed()) return run_estimate(est_args);
    if (sim->parsed()) return run_simulate(sim_args);
    if (ver->parsed()) return run_verify(ver_args);
    if (bias->parsed()) return run_bias_curve(bias_args);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const hentropy::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
