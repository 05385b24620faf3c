// Acceptance gate: one line per criterion, "criterion N: PASS/FAIL — detail".
// Exit code is the number of failed criteria, so 0 means fully accepted.
//
// Wall-clock budgets are part of the pass conditions; they are generous on
// any recent machine but catch algorithmic regressions (an accidentally
// quadratic oracle, a serial simulation loop).

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hentropy/distributions.hpp"
#include "hentropy/estimators.hpp"
#include "hentropy/moment_oracle.hpp"
#include "hentropy/simulation.hpp"
#include "hentropy/special_functions.hpp"

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out.precision(digits);
  out << v;
  return out.str();
}

void report(int criterion, bool pass, const std::string& detail) {
  std::cout << "criterion " << criterion << ": " << (pass ? "PASS" : "FAIL")
            << " — " << detail << '\n';
}

struct CliRun {
  int code = -1;
  std::string out;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliRun run_cli(const std::string& args) {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() /
                 ("hentropy_acceptance_" +
                  std::to_string(std::random_device{}()));
    fs::create_directories(d);
    return d;
  }();
  const fs::path out_path = dir / "out.txt";
  const std::string cmd = "\"" HENTROPY_CLI_PATH "\" " + args + " > \"" +
                          out_path.string() + "\" 2> /dev/null";
  const int raw = std::system(cmd.c_str());
  CliRun run;
  run.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  run.out = slurp(out_path);
  return run;
}

hentropy::SimulationResult run_study(const hentropy::Pmf& pmf,
                                     std::vector<std::uint64_t> n_grid,
                                     std::uint64_t replicates,
                                     std::uint64_t seed,
                                     std::vector<std::string> estimators) {
  hentropy::SimulationConfig config(pmf);
  config.n_grid = std::move(n_grid);
  config.replicates = replicates;
  config.base_seed = seed;
  config.estimators = std::move(estimators);
  return hentropy::run_simulation(config, 0);
}

// 1. The full identity sweep through the CLI: every report passes, < 60 s.
bool criterion_identity_sweep() {
  const auto start = Clock::now();
  const CliRun run = run_cli("verify");
  const double elapsed = seconds_since(start);
  const long reports =
      std::count(run.out.begin(), run.out.end(), '\n');
  const bool pass = run.code == 0 && elapsed < 60.0;
  report(1, pass,
         "identity sweep via CLI verify: exit " + std::to_string(run.code) +
             ", " + std::to_string(reports) + " reports, " + fmt(elapsed) +
             " s (budget 60 s)");
  return pass;
}

// 2. Exhaustive enumeration agrees with the tail-series bias on every small
//    finite pmf: 8 pmfs x n in {2..6}, gap <= 1e-10, < 10 s.
bool criterion_bias_oracles_agree() {
  const auto start = Clock::now();
  const std::vector<hentropy::Pmf> pmfs = {
      hentropy::Pmf::finite({0.5, 0.5}),
      hentropy::Pmf::finite({0.9, 0.1}),
      hentropy::Pmf::finite({0.7, 0.3}),
      hentropy::Pmf::finite({0.99, 0.01}),
      hentropy::Pmf::finite({1.0 / 3, 1.0 / 3, 1.0 / 3}),
      hentropy::Pmf::finite({0.5, 0.3, 0.2}),
      hentropy::Pmf::finite({0.8, 0.1, 0.1}),
      hentropy::Pmf::finite({0.6, 0.25, 0.15}),
  };
  int instances = 0;
  double worst = 0.0;
  for (const hentropy::Pmf& pmf : pmfs) {
    for (std::uint64_t n = 2; n <= 6; ++n) {
      const double gap =
          std::abs(hentropy::exhaustive_bias(pmf, n) - pmf.exact_bias(n));
      worst = std::max(worst, gap);
      ++instances;
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = worst <= 1e-10 && instances >= 40 && elapsed < 10.0;
  report(2, pass,
         "exhaustive vs tail-series bias: " + std::to_string(instances) +
             " instances, worst gap " + fmt(worst, 3) + " (tol 1e-10), " +
             fmt(elapsed) + " s (budget 10 s)");
  return pass;
}

// 3. Entropy constants for the four study distributions, +/- 5e-6.
bool criterion_entropy_constants() {
  const std::vector<std::pair<std::string, double>> expected = {
      {"5-point finite", 1.333074},
      {"uniform-500", 6.214608},
      {"geometric(0.1)", 3.250830},
      {"zeta(2)", 1.637622},
  };
  const std::vector<double> actual = {
      hentropy::Pmf::finite({0.2, 0.5, 0.1, 0.15, 0.05}).entropy(),
      hentropy::Pmf::finite(std::vector<double>(500, 1.0 / 500)).entropy(),
      hentropy::Pmf::geometric(0.1).entropy(),
      hentropy::Pmf::zeta(2.0).entropy(),
  };
  bool pass = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double gap = std::abs(actual[i] - expected[i].second);
    worst = std::max(worst, gap);
    if (gap > 5e-6) pass = false;
  }
  report(3, pass,
         "reference entropies for the four study distributions, worst gap " +
             fmt(worst, 3) + " (tol 5e-6)");
  return pass;
}

// 4. Monte Carlo MSE rate for the harmonic estimator on geometric(0.1):
//    slope of ln(mse) vs ln(n) over n in {200..2000 step 200}, 200
//    replicates, within [-1.25, -0.75]; < 3 min.
bool criterion_mse_rate() {
  const auto start = Clock::now();
  std::vector<std::uint64_t> grid;
  for (std::uint64_t n = 200; n <= 2000; n += 200) grid.push_back(n);
  const hentropy::SimulationResult result = run_study(
      hentropy::Pmf::geometric(0.1), grid, 200, 1, {"harmonic"});
  std::vector<std::pair<double, double>> points;
  for (const hentropy::CellStats& cell : result.cells) {
    points.push_back({double(cell.n), cell.mse});
  }
  const double slope = hentropy::rate_slope(points);
  const double elapsed = seconds_since(start);
  const bool pass = slope >= -1.25 && slope <= -0.75 && elapsed < 180.0;
  report(4, pass,
         "harmonic MSE rate on geometric(0.1): slope " + fmt(slope) +
             " in [-1.25, -0.75], " + fmt(elapsed) + " s (budget 180 s)");
  return pass;
}

// 5. Deterministic bias decay for zeta(2) scales like n^{-1/2} (slope in
//    [-0.6, -0.4] over n = 2^7..2^14), < 30 s; and the two-point bound
//    arithmetic holds over its grid.
bool criterion_bias_decay_and_bounds() {
  const auto start = Clock::now();
  const hentropy::Pmf zeta = hentropy::Pmf::zeta(2.0);
  std::vector<std::pair<double, double>> points;
  for (std::uint64_t n = 128; n <= 16384; n *= 2) {
    points.push_back({double(n), std::abs(zeta.exact_bias(n))});
  }
  const double slope = hentropy::rate_slope(points);

  bool bounds_ok = true;
  for (const double eps : {0.1, 0.25, 0.5, 0.75}) {
    for (const std::uint64_t n :
         {std::uint64_t{1}, std::uint64_t{10}, std::uint64_t{100},
          std::uint64_t{1000}}) {
      for (const hentropy::IdentityReport& r : hentropy::verify_lecam(eps, n)) {
        if (!r.pass) bounds_ok = false;
      }
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass =
      slope >= -0.6 && slope <= -0.4 && bounds_ok && elapsed < 30.0;
  report(5, pass,
         "zeta(2) exact-bias slope " + fmt(slope) +
             " in [-0.6, -0.4]; two-point bound grid " +
             (bounds_ok ? "holds" : "violated") + "; " + fmt(elapsed) +
             " s (budget 30 s)");
  return pass;
}

// 6 + 7 share one 500-replicate run at n = 2000 on geometric(0.1).
struct EfficiencyAndShape {
  bool variance_pass = false;
  bool ks_pass = false;
  std::string variance_detail;
  std::string ks_detail;
};

EfficiencyAndShape run_efficiency_and_shape() {
  EfficiencyAndShape out;
  const auto start = Clock::now();
  const hentropy::Pmf geom = hentropy::Pmf::geometric(0.1);
  const hentropy::SimulationResult result =
      run_study(geom, {2000}, 500, 1, {"harmonic"});
  const hentropy::CellStats& cell = result.cells.front();

  // 6. Replicate variance against the efficiency target var_log_p / n.
  const double target = geom.var_log_p() / 2000.0;
  const double ratio = cell.empirical_variance / target;
  const double elapsed = seconds_since(start);
  out.variance_pass = ratio >= 0.7 && ratio <= 1.3 && elapsed < 180.0;
  out.variance_detail =
      "harmonic replicate variance at n=2000, geometric(0.1), 500 "
      "replicates: " +
      fmt(ratio, 3) + " x (var_log_p / n), band [0.7, 1.3], " + fmt(elapsed) +
      " s (budget 180 s)";

  // 7. Normality of the replicate distribution: KS below the 1% critical
  //    value 0.0729 for 500 samples. The KS statistic is invariant under
  //    affine maps, so checking the raw estimates equals checking the
  //    standardized sqrt(n) (estimate - H) values.
  const double ks = hentropy::normality_check(cell.estimates).ks_statistic;
  out.ks_pass = ks < 0.0729;

  // Same shape check on the boundary-decay distribution, reported only:
  // its bias does not vanish at this scale, so normality is not expected.
  const hentropy::SimulationResult heavy = run_study(
      hentropy::Pmf::zeta(2.0), {2000}, 500, 1, {"harmonic"});
  const double ks_heavy =
      hentropy::normality_check(heavy.cells.front().estimates).ks_statistic;
  out.ks_detail = "KS over 500 replicates: geometric(0.1) " + fmt(ks, 3) +
                  " < 0.0729; zeta(2) " + fmt(ks_heavy, 3) +
                  " (reported, not gated)";
  return out;
}

// 8. Paired comparison on uniform-500: harmonic beats plug-in on MSE in at
//    least 9 of the 10 cells n in {60..600 step 60}, 100 replicates.
bool criterion_paired_mse_ordering() {
  std::vector<std::uint64_t> grid;
  for (std::uint64_t n = 60; n <= 600; n += 60) grid.push_back(n);
  const hentropy::SimulationResult result =
      run_study(hentropy::Pmf::finite(std::vector<double>(500, 1.0 / 500)),
                grid, 100, 1, {"harmonic", "plugin"});

  int wins = 0;
  const std::size_t cells = grid.size();
  for (std::size_t i = 0; i < cells; ++i) {
    const hentropy::CellStats& harmonic = result.cells[i];
    const hentropy::CellStats& plugin = result.cells[cells + i];
    if (harmonic.mse < plugin.mse) ++wins;
  }
  const bool pass = wins >= 9;
  report(8, pass,
         "uniform-500 paired study: harmonic MSE below plug-in MSE in " +
             std::to_string(wins) + "/10 cells (need >= 9)");
  return pass;
}

// 9. Byte-identical simulate output across worker counts, via the CLI.
bool criterion_determinism() {
  const fs::path dir = fs::temp_directory_path() /
                       ("hentropy_acceptance_det_" +
                        std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  const fs::path config_path = dir / "config.json";
  {
    std::ofstream config(config_path, std::ios::binary);
    config << R"({
      "distribution": {"family": "geometric", "p": 0.3},
      "n_grid": [100, 200],
      "replicates": 50,
      "base_seed": 11,
      "estimators": ["harmonic", "plugin", "miller", "oracle"]
    })";
  }
  const fs::path out1 = dir / "run1";
  const fs::path out2 = dir / "run2";
  const CliRun first = run_cli("simulate -c \"" + config_path.string() +
                               "\" -o \"" + out1.string() + "\" -t 1");
  const CliRun second = run_cli("simulate -c \"" + config_path.string() +
                                "\" -o \"" + out2.string() + "\" -t 7");
  const bool ran = first.code == 0 && second.code == 0;
  const bool details_same =
      ran && slurp(out1 / "details.csv") == slurp(out2 / "details.csv");
  const bool aggregates_same =
      ran && slurp(out1 / "aggregates.csv") == slurp(out2 / "aggregates.csv");
  const bool pass = ran && details_same && aggregates_same;
  report(9, pass,
         std::string("CLI simulate with 1 vs 7 worker threads: ") +
             (pass ? "byte-identical details.csv and aggregates.csv"
                   : "outputs differ or run failed"));
  fs::remove_all(dir);
  return pass;
}

}  // namespace

int main() {
  int failures = 0;

  failures += !criterion_identity_sweep();
  failures += !criterion_bias_oracles_agree();
  failures += !criterion_entropy_constants();
  failures += !criterion_mse_rate();
  failures += !criterion_bias_decay_and_bounds();

  const EfficiencyAndShape shared = run_efficiency_and_shape();
  report(6, shared.variance_pass, shared.variance_detail);
  failures += !shared.variance_pass;
  report(7, shared.ks_pass, shared.ks_detail);
  failures += !shared.ks_pass;

  failures += !criterion_paired_mse_ordering();
  failures += !criterion_determinism();

  std::cout << (9 - failures) << "/9 criteria passed\n";
  return failures;
}
