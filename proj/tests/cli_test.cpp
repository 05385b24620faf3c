// End-to-end tests driving the installed CLI binary as a subprocess.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path fresh_dir(const char* tag) {
  fs::path dir = fs::temp_directory_path() /
                 (std::string("hentropy_clitest_") + tag + "_" +
                  std::to_string(std::random_device{}()));
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& dir, const char* name,
                    const std::string& content) {
  const fs::path path = dir / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

// Runs the CLI through the shell, capturing exit code, stdout and stderr.
CliResult run_cli(const std::string& args, const std::string& stdin_path = {},
                  const std::string& env_prefix = {}) {
  const fs::path dir = fresh_dir("io");
  const fs::path out_path = dir / "out.txt";
  const fs::path err_path = dir / "err.txt";

  std::string cmd = env_prefix;
  cmd += "\"" HENTROPY_CLI_PATH "\" " + args;
  if (!stdin_path.empty()) cmd += " < \"" + stdin_path + "\"";
  cmd += " > \"" + out_path.string() + "\" 2> \"" + err_path.string() + "\"";

  const int raw = std::system(cmd.c_str());
  CliResult result;
  result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  fs::remove_all(dir);
  return result;
}

std::vector<nlohmann::json> parse_json_lines(const std::string& text) {
  std::vector<nlohmann::json> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty()) rows.push_back(nlohmann::json::parse(line));
  }
  return rows;
}

const std::string kSmallConfig = R"({
  "distribution": {"family": "geometric", "p": 0.4},
  "n_grid": [50],
  "replicates": 30,
  "base_seed": 3,
  "estimators": ["harmonic", "plugin"]
})";

}  // namespace

TEST_CASE("estimate: harmonic report from a symbols file") {
  const fs::path dir = fresh_dir("est");
  const fs::path input = write_file(dir, "sample.txt", "1\n1\n2\n");

  const CliResult r = run_cli("estimate -i \"" + input.string() + "\"");
  REQUIRE(r.code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("estimator_name") == "harmonic");
  CHECK(j.at("unit") == "nats");
  CHECK(j.at("n") == 3);
  CHECK(j.at("distinct") == 2);
  CHECK(j.at("point").get<double>() ==
        doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(j.at("variance_hat").get<double>() ==
        doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(j.at("level").get<double>() == 0.95);
  CHECK(j.contains("ci_low"));
  CHECK(j.contains("ci_high"));
  CHECK(!j.contains("seed"));
  fs::remove_all(dir);
}

TEST_CASE("estimate: histogram input") {
  const fs::path dir = fresh_dir("hist");
  const fs::path single = write_file(dir, "one.csv", "1,3\n");
  const CliResult all_same =
      run_cli("estimate -i \"" + single.string() + "\" -f histogram");
  REQUIRE(all_same.code == 0);
  CHECK(nlohmann::json::parse(all_same.out).at("point").get<double>() == 0.0);
  CHECK(nlohmann::json::parse(all_same.out).at("n") == 3);

  // Histogram and per-symbol layouts of the same data give identical output.
  const fs::path rows = write_file(dir, "rows.csv", "1,2\n2,1\n");
  const fs::path symbols = write_file(dir, "symbols.txt", "1\n1\n2\n");
  const CliResult via_hist =
      run_cli("estimate -i \"" + rows.string() + "\" -f histogram");
  const CliResult via_symbols =
      run_cli("estimate -i \"" + symbols.string() + "\"");
  REQUIRE(via_hist.code == 0);
  REQUIRE(via_symbols.code == 0);
  CHECK(via_hist.out == via_symbols.out);
  fs::remove_all(dir);
}

TEST_CASE("estimate: stdin and bit units") {
  const fs::path dir = fresh_dir("bits");
  const fs::path input = write_file(dir, "sample.txt", "1\n2\n3\n");
  const CliResult r = run_cli("estimate -i - --bits", input.string());
  REQUIRE(r.code == 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  CHECK(j.at("unit") == "bits");
  // All-distinct at n = 3: J(2) = 1.5 nats = 1.5 / ln 2 bits.
  CHECK(j.at("point").get<double>() ==
        doctest::Approx(2.1640425613334451).epsilon(1e-12));
  fs::remove_all(dir);
}

TEST_CASE("estimate: input validation paths") {
  const fs::path dir = fresh_dir("badinput");

  const fs::path bad_line = write_file(dir, "bad.txt", "1\nx\n2\n");
  const CliResult bad = run_cli("estimate -i \"" + bad_line.string() + "\"");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);

  const fs::path single = write_file(dir, "single.txt", "5\n");
  CHECK(run_cli("estimate -i \"" + single.string() + "\"").code == 2);

  const fs::path empty = write_file(dir, "empty.txt", "");
  CHECK(run_cli("estimate -i \"" + empty.string() + "\"").code == 2);

  CHECK(run_cli("estimate -i \"" + (dir / "nope.txt").string() + "\"").code ==
        3);

  const fs::path zero_count = write_file(dir, "zero.csv", "1,2\n2,0\n");
  const CliResult zc =
      run_cli("estimate -i \"" + zero_count.string() + "\" -f histogram");
  CHECK(zc.code == 2);
  CHECK(zc.err.find("line 2") != std::string::npos);

  const fs::path sample = write_file(dir, "ok.txt", "1\n2\n");
  CHECK(run_cli("estimate -i \"" + sample.string() + "\" --level 1.5").code ==
        2);
  CHECK(run_cli("estimate -i \"" + sample.string() + "\" -e oracle").code ==
        2);
  fs::remove_all(dir);
}

TEST_CASE("estimate: plugin and miller reports omit interval fields") {
  const fs::path dir = fresh_dir("noci");
  const fs::path input = write_file(dir, "sample.txt", "1\n1\n2\n");

  const CliResult plugin =
      run_cli("estimate -i \"" + input.string() + "\" -e plugin");
  REQUIRE(plugin.code == 0);
  const nlohmann::json pj = nlohmann::json::parse(plugin.out);
  CHECK(pj.at("estimator_name") == "plugin");
  CHECK(!pj.contains("variance_hat"));
  CHECK(!pj.contains("ci_low"));

  const CliResult miller =
      run_cli("estimate -i \"" + input.string() + "\" -e miller");
  REQUIRE(miller.code == 0);
  const nlohmann::json mj = nlohmann::json::parse(miller.out);
  // Miller = plugin + (s-1)/(2n) with s = 2 distinct, n = 3.
  CHECK(mj.at("point").get<double>() ==
        doctest::Approx(pj.at("point").get<double>() + 1.0 / 6.0)
            .epsilon(1e-12));
  fs::remove_all(dir);
}

TEST_CASE("verify: default grid passes and reports one json line each") {
  const CliResult r = run_cli("verify");
  REQUIRE(r.code == 0);
  const std::vector<nlohmann::json> rows = parse_json_lines(r.out);
  CHECK(rows.size() > 100);
  for (const nlohmann::json& row : rows) {
    CHECK(row.at("pass") == true);
    CHECK(row.contains("identity_name"));
    CHECK(row.contains("lhs"));
    CHECK(row.contains("rhs"));
    CHECK(row.contains("gap"));
    CHECK(row.contains("tolerance"));
  }
  CHECK(r.err.find("identity checks passed") != std::string::npos);
}

TEST_CASE("verify: corrupted harmonic table is caught") {
  const CliResult r = run_cli("verify --corrupt-table");
  CHECK(r.code == 1);
  std::size_t failures = 0;
  for (const nlohmann::json& row : parse_json_lines(r.out)) {
    if (row.at("pass") == false) ++failures;
  }
  CHECK(failures >= 1);
}

TEST_CASE("simulate: writes the three outputs and is thread-count invariant") {
  const fs::path dir = fresh_dir("sim");
  const fs::path config = write_file(dir, "config.json", kSmallConfig);
  const fs::path out1 = dir / "run1";
  const fs::path out2 = dir / "run2";

  const CliResult first = run_cli("simulate -c \"" + config.string() +
                                  "\" -o \"" + out1.string() + "\" -t 1");
  REQUIRE(first.code == 0);
  CHECK(fs::exists(out1 / "details.csv"));
  CHECK(fs::exists(out1 / "aggregates.csv"));
  CHECK(fs::exists(out1 / "results.json"));

  const CliResult second = run_cli("simulate -c \"" + config.string() +
                                   "\" -o \"" + out2.string() + "\" -t 3");
  REQUIRE(second.code == 0);
  CHECK(slurp(out1 / "details.csv") == slurp(out2 / "details.csv"));
  CHECK(slurp(out1 / "aggregates.csv") == slurp(out2 / "aggregates.csv"));
  fs::remove_all(dir);
}

TEST_CASE("simulate: seed override via environment") {
  const fs::path dir = fresh_dir("seedenv");
  const fs::path config = write_file(dir, "config.json", kSmallConfig);
  const fs::path base_out = dir / "base";
  const fs::path env_out = dir / "env";

  REQUIRE(run_cli("simulate -c \"" + config.string() + "\" -o \"" +
                  base_out.string() + "\"")
              .code == 0);
  const CliResult overridden =
      run_cli("simulate -c \"" + config.string() + "\" -o \"" +
                  env_out.string() + "\"",
              {}, "ENTROPY_SEED=99 ");
  REQUIRE(overridden.code == 0);
  CHECK(overridden.err.find("ENTROPY_SEED=99") != std::string::npos);
  CHECK(slurp(base_out / "details.csv") != slurp(env_out / "details.csv"));

  const CliResult bad = run_cli("simulate -c \"" + config.string() +
                                    "\" -o \"" + (dir / "x").string() + "\"",
                                {}, "ENTROPY_SEED=abc ");
  CHECK(bad.code == 2);
  fs::remove_all(dir);
}

TEST_CASE("simulate: output directory resolution") {
  const fs::path dir = fresh_dir("outres");

  // No --out and no output_path in the config: usage error.
  const fs::path bare = write_file(dir, "bare.json", kSmallConfig);
  CHECK(run_cli("simulate -c \"" + bare.string() + "\"").code == 2);

  // output_path in the config is honored when --out is absent.
  nlohmann::json with_path = nlohmann::json::parse(kSmallConfig);
  const fs::path config_out = dir / "from_config";
  with_path["output_path"] = config_out.string();
  const fs::path cfg = write_file(dir, "withpath.json", with_path.dump());
  REQUIRE(run_cli("simulate -c \"" + cfg.string() + "\"").code == 0);
  CHECK(fs::exists(config_out / "results.json"));
  fs::remove_all(dir);
}

TEST_CASE("simulate: config error paths") {
  const fs::path dir = fresh_dir("badcfg");

  nlohmann::json no_reps = nlohmann::json::parse(kSmallConfig);
  no_reps.erase("replicates");
  const fs::path schema = write_file(dir, "schema.json", no_reps.dump());
  CHECK(run_cli("simulate -c \"" + schema.string() + "\" -o \"" +
                (dir / "o1").string() + "\"")
            .code == 2);

  const fs::path mangled = write_file(dir, "mangled.json", "{nope");
  CHECK(run_cli("simulate -c \"" + mangled.string() + "\" -o \"" +
                (dir / "o2").string() + "\"")
            .code == 2);

  CHECK(run_cli("simulate -c \"" + (dir / "missing.json").string() +
                "\" -o \"" + (dir / "o3").string() + "\"")
            .code == 3);
  fs::remove_all(dir);
}

TEST_CASE("bias-curve: inline distribution and file distribution") {
  const CliResult inline_dist = run_cli(
      "bias-curve -d '{\"family\":\"finite\",\"probs\":[0.5,0.5]}' "
      "--n-min 2 --n-max 2 --points 1");
  REQUIRE(inline_dist.code == 0);
  std::istringstream lines(inline_dist.out);
  std::string header, row;
  REQUIRE(std::getline(lines, header));
  REQUIRE(std::getline(lines, row));
  CHECK(header == "n,exact_bias,abs_bias");
  CHECK(row.rfind("2,-0.19314718", 0) == 0);

  const fs::path dir = fresh_dir("bias");
  const fs::path dist =
      write_file(dir, "dist.json", R"({"family":"geometric","p":0.1})");
  const CliResult from_file =
      run_cli("bias-curve -d \"" + dist.string() +
              "\" --n-min 10 --n-max 100 --points 3");
  REQUIRE(from_file.code == 0);
  const std::string& text = from_file.out;
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);  // header + 3 rows
  fs::remove_all(dir);
}

TEST_CASE("bias-curve: argument validation") {
  CHECK(run_cli("bias-curve -d '{\"family\":\"geometric\",\"p\":0.1}' "
                "--n-min 1 --n-max 10")
            .code == 2);
  CHECK(run_cli("bias-curve -d '{\"family\":\"geometric\",\"p\":0.1}' "
                "--n-min 20 --n-max 10")
            .code == 2);
  CHECK(run_cli("bias-curve -d '{\"family\":\"nope\"}'").code == 2);
}

TEST_CASE("top-level usage") {
  CHECK(run_cli("--version").code == 0);
  CHECK(run_cli("--version").out.find("hentropy") != std::string::npos);
  CHECK(run_cli("").code == 2);                   // subcommand required
  CHECK(run_cli("estimate --frobnicate").code == 2);
  CHECK(run_cli("transmogrify").code == 2);
}
