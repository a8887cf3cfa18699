#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

#include "contagion/cli_io.hpp"

using namespace contagion;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("contagion_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

struct Run {
  int code;
  std::string out;
  std::string err;
};

template <typename Cmd>
Run run(Cmd cmd, std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = cmd(args, out, err);
  return {code, out.str(), err.str()};
}

struct CommaDecimal : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
};

}  // namespace

TEST_CASE("degree grid parsing") {
  const auto grid = parse_degree_grid("0:10:0.5");
  REQUIRE(grid.size() == 21);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(grid[k] == 0.5 * static_cast<double>(k));
  CHECK(parse_degree_grid("0:0:1") == std::vector<double>{0.0});
  CHECK(parse_degree_grid("1,3,5,8") == std::vector<double>{1.0, 3.0, 5.0, 8.0});
  CHECK(parse_degree_grid("0:1:0.1").size() == 11);
  CHECK(parse_degree_grid("4") == std::vector<double>{4.0});
  CHECK_THROWS_AS(parse_degree_grid("0:10"), InvalidParameter);
  CHECK_THROWS_AS(parse_degree_grid("5:1:1"), InvalidParameter);
  CHECK_THROWS_AS(parse_degree_grid("0:1:0"), InvalidParameter);
  CHECK_THROWS_AS(parse_degree_grid("a,b"), InvalidParameter);
}

TEST_CASE("CSV uses fixed columns, NA markers and '.' under any locale") {
  const std::vector<CrisisStats> stats{
      {.degree = 0.5, .model = ModelTag::bs, .crisis_frequency = 0.0, .n_runs = 10},
      {.degree = 0.5, .model = ModelTag::threshold, .crisis_frequency = 0.25, .mean_crisis_size = 0.125,
       .n_runs = 10, .frequency_ci_halfwidth = 0.5, .mismatches = 0}};
  const std::locale previous = std::locale::global(std::locale(std::locale::classic(), new CommaDecimal));
  std::ostringstream csv;
  csv.imbue(std::locale());
  write_stats_csv(csv, stats, Case::B);
  std::locale::global(previous);
  CHECK(csv.str() ==
        "z,model,case,crisis_frequency,freq_ci,mean_crisis_size,n_runs,mismatches\n"
        "0.5,bs,B,0,0,NA,10,0\n"
        "0.5,threshold,B,0.25,0.5,0.125,10,0\n");
}

TEST_CASE("config JSON round-trips exactly") {
  ExperimentConfig cfg = standard_protocol(Case::C, ModelMode::both_coupled);
  cfg.gamma = 0.1 + 1e-17;
  cfg.delta = 1.0 / 97.0;
  cfg.degree_grid = {0.1, 1.0 / 3.0, 7.25};
  cfg.master_seed = 0xFFFFFFFFFFFFFFFFULL;
  const auto text = config_to_json(cfg).dump();
  CHECK(config_from_json(nlohmann::json::parse(text)) == cfg);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::object()), InvalidParameter);
}

TEST_CASE("sweep writes CSV and manifest") {
  const fs::path dir = scratch("sweep");
  const Run r = run(cmd_sweep, {"--case", "A", "--model", "both-coupled", "--n", "200", "--z", "0:4:2", "--networks",
                                "2", "--trials", "30", "--seed", "7", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  const std::string csv = slurp(dir / "sweep.csv");
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "z,model,case,crisis_frequency,freq_ci,mean_crisis_size,n_runs,mismatches");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 6);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["version"] == std::string(kVersion));
  CHECK(manifest["master_seed"] == 7);
  CHECK(manifest["config"]["model"] == "both-coupled");
  CHECK(manifest["rows"].size() == 6);
  CHECK(manifest["rows"][0]["mean_crisis_size"].is_null());

  SUBCASE("rerunning from the manifest reproduces the CSV bytes") {
    const fs::path again = scratch("sweep_again");
    const Run rr = run(cmd_sweep, {"--manifest", (dir / "manifest.json").string(), "--out", again.string()});
    REQUIRE(rr.code == kExitOk);
    CHECK(slurp(again / "sweep.csv") == csv);
  }
  SUBCASE("worker count does not change the bytes") {
    const fs::path again = scratch("sweep_workers");
    const Run rr = run(cmd_sweep, {"--case", "A", "--model", "both-coupled", "--n", "200", "--z", "0:4:2",
                                   "--networks", "2", "--trials", "30", "--seed", "7", "--workers", "3", "--out",
                                   again.string()});
    REQUIRE(rr.code == kExitOk);
    CHECK(slurp(again / "sweep.csv") == csv);
  }
}

TEST_CASE("single degenerate degree gives one row per model") {
  const fs::path dir = scratch("degenerate");
  const Run r = run(cmd_sweep, {"--z", "0:0:1", "--model", "bs", "--networks", "1", "--trials", "50", "--out",
                                dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(slurp(dir / "sweep.csv") ==
        "z,model,case,crisis_frequency,freq_ci,mean_crisis_size,n_runs,mismatches\n0,bs,A,0,0,NA,50,0\n");
}

TEST_CASE("output directory may come from the environment") {
  const fs::path dir = scratch("env");
  ::setenv("CONTAGION_OUT", dir.string().c_str(), 1);
  const Run r = run(cmd_sweep, {"--z", "1", "--n", "50", "--networks", "1", "--trials", "5"});
  ::unsetenv("CONTAGION_OUT");
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "sweep.csv"));
}

TEST_CASE("sweep usage and I/O errors") {
  SUBCASE("missing --out") {
    const Run r = run(cmd_sweep, {"--case", "A"});
    CHECK(r.code == kExitUsage);
    CHECK(r.err.find("--out") != std::string::npos);
    CHECK(r.err.find("Usage") != std::string::npos);
  }
  SUBCASE("bad values") {
    CHECK(run(cmd_sweep, {"--case", "D", "--out", "x"}).code == kExitUsage);
    CHECK(run(cmd_sweep, {"--z", "0:1", "--out", "x"}).code == kExitUsage);
    CHECK(run(cmd_sweep, {"--delta", "0.7", "--out", "x"}).code == kExitUsage);
    CHECK(run(cmd_sweep, {"--n", "10", "--z", "20", "--out", "x"}).code == kExitUsage);
    CHECK(run(cmd_sweep, {"--bogus", "--out", "x"}).code == kExitUsage);
  }
  SUBCASE("unwritable output") {
    const fs::path file = scratch("blocker");
    std::ofstream(file) << "not a directory";
    const Run r = run(cmd_sweep, {"--z", "1", "--n", "50", "--networks", "1", "--trials", "2", "--out",
                                  (file / "sub").string()});
    CHECK(r.code == kExitFailure);
  }
  SUBCASE("help") { CHECK(run(cmd_sweep, {"--help"}).code == kExitOk); }
}

TEST_CASE("check command") {
  const std::vector<std::string> quick{"--instances", "4",       "--n",       "300",  "--oracle-instances",
                                       "40",          "--draws", "200000"};
  SUBCASE("passes") {
    const Run r = run(cmd_check, quick);
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(r.out.substr(r.out.size() - 5) == "PASS\n");
  }
  SUBCASE("detects an injected >= rule") {
    auto args = quick;
    args.emplace_back("--inject-fault");
    const Run r = run(cmd_check, args);
    CHECK(r.code == kExitFailure);
    CHECK(r.out.find("FAIL tie convention") != std::string::npos);
    CHECK(r.out.find("counterexample: ") != std::string::npos);
    CHECK(r.out.find("bank 0 round 1") != std::string::npos);
    CHECK(r.out.find("network:\n8\n") != std::string::npos);
  }
  SUBCASE("zero instances is a vacuous pass with a warning") {
    const Run r = run(cmd_check, {"--instances", "0", "--oracle-instances", "0", "--draws", "1000", "--n", "200"});
    CHECK(r.code == kExitOk);
    CHECK(r.out.rfind("warning:", 0) == 0);
    CHECK(r.out.find("vacuous") != std::string::npos);
  }
}

TEST_CASE("trial dumps reload to the same outcome") {
  const fs::path dir = scratch("trial");
  fs::create_directories(dir);
  const Run first = run(cmd_trial, {"--case", "C", "--n", "300", "--z", "3", "--seed", "9", "--dump-network",
                                    (dir / "net.edges").string(), "--dump-sheets", (dir / "sheets.csv").string()});
  REQUIRE(first.code == kExitOk);
  CHECK(first.out.rfind("model,n_fundamental,n_total,fraction,rounds\nbs,", 0) == 0);
  CHECK(slurp(dir / "sheets.csv").rfind("bank_id,a,l,b,d,p_bar,w,theta_l,sigma\n", 0) == 0);

  const Run again = run(cmd_trial, {"--case", "C", "--seed", "9", "--load-network", (dir / "net.edges").string()});
  REQUIRE(again.code == kExitOk);
  CHECK(again.out == first.out);
}

TEST_CASE("dispatcher") {
  std::ostringstream out;
  std::ostringstream err;
  const char* none[] = {"contagion"};
  CHECK(run_cli(1, none, out, err) == kExitUsage);
  const char* unknown[] = {"contagion", "plot"};
  CHECK(run_cli(2, unknown, out, err) == kExitUsage);
  const char* version[] = {"contagion", "--version"};
  CHECK(run_cli(2, version, out, err) == kExitOk);
  CHECK(out.str().find(kVersion) != std::string::npos);
}
