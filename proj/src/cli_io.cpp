#include "contagion/cli_io.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "contagion/checks.hpp"
#include "contagion/rng.hpp"
#include "contagion/threshold_cascade.hpp"

namespace contagion {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<double> parse_degree_grid(const std::string& text) {
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, sep);) parts.push_back(part);

  std::vector<double> values;
  for (const std::string& p : parts) {
    const auto v = parse_number<double>(p);
    if (!v) throw InvalidParameter("malformed degree grid '" + text + "'");
    values.push_back(*v);
  }
  if (sep == ',') {
    if (values.empty()) throw InvalidParameter("empty degree grid");
    return values;
  }
  if (values.size() != 3) throw InvalidParameter("degree grid range must be start:stop:step, got '" + text + "'");
  const double start = values[0];
  const double stop = values[1];
  const double step = values[2];
  if (stop < start) throw InvalidParameter("degree grid stop below start");
  if (stop == start) return {start};
  if (!(step > 0.0)) throw InvalidParameter("degree grid step must be positive");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> grid;
  for (std::size_t k = 0; k <= count; ++k) grid.push_back(start + static_cast<double>(k) * step);
  return grid;
}

void write_stats_csv(std::ostream& out, const std::vector<CrisisStats>& stats, Case case_id) {
  out << "z,model,case,crisis_frequency,freq_ci,mean_crisis_size,n_runs,mismatches\n";
  for (const CrisisStats& s : stats) {
    const std::string size = s.mean_crisis_size ? fmt::format("{}", *s.mean_crisis_size) : std::string("NA");
    out << fmt::format("{},{},{},{},{},{},{},{}\n", s.degree, to_string(s.model), to_string(case_id),
                       s.crisis_frequency, s.frequency_ci_halfwidth, size, s.n_runs, s.mismatches);
  }
}

namespace {

json range_to_json(const RangeDistribution& d) {
  if (d.is_constant()) return {{"kind", "constant"}, {"value", d.lo}};
  return {{"kind", "uniform"}, {"lo", d.lo}, {"hi", d.hi}};
}

RangeDistribution range_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return RangeDistribution::constant(j.at("value").get<double>());
  if (kind == "uniform") return RangeDistribution::uniform(j.at("lo").get<double>(), j.at("hi").get<double>());
  throw InvalidParameter("unknown distribution kind '" + kind + "'");
}

json stats_row(const CrisisStats& s, Case case_id) {
  json row = {{"z", s.degree},
              {"model", to_string(s.model)},
              {"case", to_string(case_id)},
              {"crisis_frequency", s.crisis_frequency},
              {"freq_ci", s.frequency_ci_halfwidth},
              {"n_runs", s.n_runs},
              {"mismatches", s.mismatches}};
  row["mean_crisis_size"] = s.mean_crisis_size ? json(*s.mean_crisis_size) : json(nullptr);
  return row;
}

std::vector<std::string> reversed(std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  return args;
}

// Parses; on failure prints the error and usage text and returns an exit code.
std::optional<int> parse_or_usage(CLI::App& app, const std::vector<std::string>& args, std::ostream& out,
                                  std::ostream& err) {
  try {
    app.parse(reversed(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return kExitOk;
    err << app.help();
    return kExitUsage;
  }
  return std::nullopt;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(now));
}

bool write_file(const fs::path& path, const std::string& contents, std::ostream& err) {
  std::ofstream file(path, std::ios::binary);
  file << contents;
  file.close();
  if (!file) {
    err << "error: could not write " << path.string() << '\n';
    return false;
  }
  return true;
}

// Flags shared by `sweep` and `trial` that describe the bank population.
struct PopulationFlags {
  std::string case_text = "A";
  std::string theta_text;
  std::string loans_text;
  CLI::Option* case_opt = nullptr;
  CLI::Option* theta_opt = nullptr;
  CLI::Option* loans_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* delta_opt = nullptr;
  std::size_t n = 1000;
  double gamma = 0.1;
  double delta = 0.01;

  void add_to(CLI::App& app) {
    case_opt = app.add_option("--case", case_text, "Case preset: A (baseline), B (theta_l ~ U[.2,.4]), "
                                                   "C (loan sizes ~ U[.2,1.8])")
                   ->check(CLI::IsMember({"A", "B", "C"}));
    n_opt = app.add_option("--n", n, "Number of banks");
    gamma_opt = app.add_option("--gamma", gamma, "Tentative capital ratio");
    delta_opt = app.add_option("--delta", delta, "Fundamental default probability");
    theta_opt = app.add_option("--theta-l", theta_text, "Interbank share of assets: value or lo:hi");
    loans_opt = app.add_option("--loan-size", loans_text, "Individual loan size: value or lo:hi");
  }

  // Case preset first, then any explicit override.
  void apply(ExperimentConfig& cfg, bool from_manifest) const {
    if (!from_manifest || case_opt->count() > 0) {
      const Case c = *parse_case(case_text);
      const CasePreset preset = case_preset(c);
      cfg.case_id = c;
      cfg.theta = preset.theta;
      cfg.loans = preset.loans;
    }
    if (theta_opt->count() > 0) cfg.theta = parse_range_distribution(theta_text);
    if (loans_opt->count() > 0) cfg.loans = parse_range_distribution(loans_text);
    if (!from_manifest || n_opt->count() > 0) cfg.n_banks = n;
    if (!from_manifest || gamma_opt->count() > 0) cfg.gamma = gamma;
    if (!from_manifest || delta_opt->count() > 0) cfg.delta = delta;
  }
};

}  // namespace

json config_to_json(const ExperimentConfig& cfg) {
  return {{"n_banks", cfg.n_banks},
          {"gamma", cfg.gamma},
          {"delta", cfg.delta},
          {"case", to_string(cfg.case_id)},
          {"theta_l", range_to_json(cfg.theta)},
          {"loan_size", range_to_json(cfg.loans)},
          {"model", to_string(cfg.model)},
          {"degree_grid", cfg.degree_grid},
          {"networks_per_degree", cfg.networks_per_degree},
          {"trials_per_network", cfg.trials_per_network},
          {"crisis_cutoff", cfg.crisis_cutoff},
          {"master_seed", cfg.master_seed}};
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  try {
    cfg.n_banks = j.at("n_banks").get<std::size_t>();
    cfg.gamma = j.at("gamma").get<double>();
    cfg.delta = j.at("delta").get<double>();
    const auto c = parse_case(j.at("case").get<std::string>());
    const auto m = parse_model_mode(j.at("model").get<std::string>());
    if (!c || !m) throw InvalidParameter("manifest: unknown case or model");
    cfg.case_id = *c;
    cfg.model = *m;
    cfg.theta = range_from_json(j.at("theta_l"));
    cfg.loans = range_from_json(j.at("loan_size"));
    cfg.degree_grid = j.at("degree_grid").get<std::vector<double>>();
    cfg.networks_per_degree = j.at("networks_per_degree").get<std::size_t>();
    cfg.trials_per_network = j.at("trials_per_network").get<std::size_t>();
    cfg.crisis_cutoff = j.at("crisis_cutoff").get<double>();
    cfg.master_seed = j.at("master_seed").get<Seed>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("manifest: ") + e.what());
  }
  return cfg;
}

json make_manifest(const ExperimentConfig& cfg, const std::vector<CrisisStats>& stats, const std::string& timestamp) {
  json rows = json::array();
  for (const CrisisStats& s : stats) rows.push_back(stats_row(s, cfg.case_id));
  return {{"artifact", "contagion"},
          {"version", kVersion},
          {"timestamp", timestamp},
          {"master_seed", cfg.master_seed},
          {"config", config_to_json(cfg)},
          {"rows", rows}};
}

int cmd_sweep(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Crisis frequency and conditional crisis size over a grid of average degrees", "contagion sweep"};
  PopulationFlags population;
  population.add_to(app);
  std::string model_text = "both-independent";
  std::string z_text = "0:10:0.5";
  std::string out_dir;
  std::string manifest_path;
  ExperimentConfig defaults;
  std::size_t networks = defaults.networks_per_degree;
  std::size_t trials = defaults.trials_per_network;
  double cutoff = defaults.crisis_cutoff;
  Seed seed = defaults.master_seed;
  unsigned workers = 0;
  bool progress = false;

  auto* model_opt = app.add_option("--model", model_text, "bs, threshold, both-independent or both-coupled")
                        ->check(CLI::IsMember({"bs", "threshold", "both-independent", "both-coupled"}));
  auto* z_opt = app.add_option("--z", z_text, "Average degrees: start:stop:step or a comma list");
  auto* networks_opt = app.add_option("--networks", networks, "Networks per degree");
  auto* trials_opt = app.add_option("--trials", trials, "Trials per network");
  auto* cutoff_opt = app.add_option("--cutoff", cutoff, "Defaulted fraction that counts as a crisis");
  auto* seed_opt = app.add_option("--seed", seed, "Master seed");
  app.add_option("--workers", workers, "Worker threads (0 = all cores)");
  app.add_option("--out", out_dir, "Output directory for sweep.csv and manifest.json")
      ->required()
      ->envname("CONTAGION_OUT");
  app.add_option("--manifest", manifest_path, "Rerun the config stored in a manifest.json");
  app.add_flag("--progress", progress, "Report progress on stderr");
  if (const auto code = parse_or_usage(app, args, out, err)) return *code;

  ExperimentConfig cfg;
  try {
    const bool from_manifest = !manifest_path.empty();
    if (from_manifest) {
      std::ifstream file(manifest_path);
      if (!file) {
        err << "error: could not read " << manifest_path << '\n';
        return kExitFailure;
      }
      json manifest;
      try {
        manifest = json::parse(file);
      } catch (const json::exception& e) {
        throw InvalidParameter(std::string("manifest: ") + e.what());
      }
      cfg = config_from_json(manifest.at("config"));
    }
    population.apply(cfg, from_manifest);
    if (!from_manifest || model_opt->count() > 0) cfg.model = *parse_model_mode(model_text);
    if (!from_manifest || z_opt->count() > 0) cfg.degree_grid = parse_degree_grid(z_text);
    if (!from_manifest || networks_opt->count() > 0) cfg.networks_per_degree = networks;
    if (!from_manifest || trials_opt->count() > 0) cfg.trials_per_network = trials;
    if (!from_manifest || cutoff_opt->count() > 0) cfg.crisis_cutoff = cutoff;
    if (!from_manifest || seed_opt->count() > 0) cfg.master_seed = seed;
    cfg.validate();
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  SweepOptions options;
  options.workers = workers;
  if (progress) {
    options.progress = [&err](std::uint64_t done, std::uint64_t total) {
      err << fmt::format("\r{}/{} trials", done, total) << (done == total ? "\n" : "") << std::flush;
    };
  }
  const std::vector<CrisisStats> stats = run_sweep(cfg, options);

  std::ostringstream csv;
  write_stats_csv(csv, stats, cfg.case_id);
  const json manifest = make_manifest(cfg, stats, utc_timestamp());

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    err << "error: could not create " << out_dir << ": " << ec.message() << '\n';
    return kExitFailure;
  }
  if (!write_file(fs::path(out_dir) / "sweep.csv", csv.str(), err)) return kExitFailure;
  if (!write_file(fs::path(out_dir) / "manifest.json", manifest.dump(2) + "\n", err)) return kExitFailure;

  std::uint64_t mismatches = 0;
  for (const CrisisStats& s : stats) mismatches += s.mismatches;
  out << fmt::format("wrote {} rows to {}", stats.size(), (fs::path(out_dir) / "sweep.csv").string());
  if (cfg.model == ModelMode::both_coupled) out << fmt::format(" ({} coupled mismatches)", mismatches / 2);
  out << '\n';
  return kExitOk;
}

int cmd_check(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-checks: coupled equivalence, brute-force oracle, schedules and distributions",
               "contagion check"};
  CheckOptions opts;
  std::string dump_dir = ".";
  bool inject_fault = false;
  app.add_option("--instances", opts.instances, "Coupled instances per case");
  app.add_option("--oracle-instances", opts.oracle_instances, "Small random instances for the oracle suites");
  app.add_option("--n", opts.n_banks, "Banks per coupled instance");
  app.add_option("--draws", opts.calibration_draws, "Bank draws for the fundamental-default check");
  app.add_option("--samples", opts.moment_samples, "Threshold samples for the distribution checks");
  app.add_option("--seed", opts.seed, "Seed");
  app.add_option("--out", dump_dir, "Directory for counterexample network dumps");
  // Test-only mutation: the weighted rule compares with >= instead of >.
  app.add_flag("--inject-fault", inject_fault)->group("");
  if (const auto code = parse_or_usage(app, args, out, err)) return *code;
  if (opts.n_banks < 2) {
    err << "error: --n must be at least 2\n" << app.help();
    return kExitUsage;
  }
  if (inject_fault) opts.rule = FlipRule::greater_equal;
  if (opts.instances == 0) out << "warning: --instances 0, coupled equivalence suite is empty\n";

  bool all_passed = true;
  std::size_t dumps = 0;
  for (CheckOutcome& c : run_all_checks(opts)) {
    out << fmt::format("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
    if (c.passed) continue;
    all_passed = false;
    out << "  counterexample: " << c.counterexample << '\n';
    if (!c.counterexample_network) continue;
    if (c.counterexample_network->size() <= 32) {
      std::ostringstream dump;
      write_edge_list(dump, *c.counterexample_network);
      out << "  network:\n" << dump.str();
    } else {
      std::error_code ec;
      fs::create_directories(dump_dir, ec);
      const fs::path path = fs::path(dump_dir) / fmt::format("counterexample_{}.edges", dumps++);
      std::ofstream file(path);
      write_edge_list(file, *c.counterexample_network);
      out << "  network: " << (file ? path.string() : std::string("(dump failed)")) << '\n';
    }
  }
  out << (all_passed ? "PASS" : "FAIL") << '\n';
  return all_passed ? kExitOk : kExitFailure;
}

int cmd_trial(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"One coupled trial: both engines on one shock draw", "contagion trial"};
  PopulationFlags population;
  population.add_to(app);
  double z = 5.0;
  Seed seed = 1;
  std::string load_network;
  std::string dump_network;
  std::string dump_sheets;
  app.add_option("--z", z, "Average degree");
  app.add_option("--seed", seed, "Master seed (matches the first trial of a one-point sweep)");
  app.add_option("--load-network", load_network, "Read the network from an edge list instead of generating it");
  app.add_option("--dump-network", dump_network, "Write the network as an edge list");
  app.add_option("--dump-sheets", dump_sheets, "Write the balance sheets as CSV");
  if (const auto code = parse_or_usage(app, args, out, err)) return *code;

  ExperimentConfig cfg;
  DirectedNetwork net;
  try {
    population.apply(cfg, false);
    cfg.degree_grid = {z};
    if (!load_network.empty()) {
      std::ifstream file(load_network);
      if (!file) {
        err << "error: could not read " << load_network << '\n';
        return kExitFailure;
      }
      net = read_edge_list(file);
      cfg.n_banks = net.size();
      cfg.degree_grid = {0.0};
    }
    cfg.master_seed = seed;
    cfg.validate();
    if (load_network.empty()) {
      net = generate_er(cfg.n_banks, z, cfg.loans, derive_seed(seed, {key(Stream::network), 0, 0}));
    }
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  const BalanceParams params = cfg.balance_params();
  const auto sheets = build_sheets(net, params, derive_seed(seed, {key(Stream::theta), 0, 0}));
  const ShockDraw shocks = draw_shocks(sheets, derive_seed(seed, {key(Stream::shock), 0, 0, 0}));
  const CascadeResult bs = run_bs_cascade(net, sheets, shocks);
  ThresholdAssignment thr = make_assignment(net);
  thresholds_from_shocks(thr, sheets, shocks);
  const CascadeResult th = run_threshold_cascade(net, thr, inactive_flips_from_shocks(thr, sheets, shocks));

  if (!dump_network.empty()) {
    std::ofstream file(dump_network);
    write_edge_list(file, net);
    if (!file) {
      err << "error: could not write " << dump_network << '\n';
      return kExitFailure;
    }
  }
  if (!dump_sheets.empty()) {
    std::ofstream file(dump_sheets);
    write_sheets_csv(file, sheets);
    if (!file) {
      err << "error: could not write " << dump_sheets << '\n';
      return kExitFailure;
    }
  }

  out << "model,n_fundamental,n_total,fraction,rounds\n";
  for (const auto& [name, r] : {std::pair{"bs", &bs}, std::pair{"threshold", &th}}) {
    out << fmt::format("{},{},{},{},{}\n", name, r->n_fundamental, r->n_total, r->fraction(), r->rounds);
  }
  if (const auto where = describe_mismatch(bs, th)) {
    err << "engines disagree: " << *where << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  constexpr std::string_view usage =
      "usage: contagion <command> [options]\n"
      "\n"
      "commands:\n"
      "  sweep   crisis frequency/size over a degree grid (CSV + JSON manifest)\n"
      "  check   coupled-equivalence, oracle and distribution self-checks\n"
      "  trial   one coupled trial, with optional network/sheet dumps\n"
      "\n"
      "Run `contagion <command> --help` for command options.\n";
  if (argc < 2) {
    err << usage;
    return kExitUsage;
  }
  const std::string command = argv[1];
  const std::vector<std::string> args(argv + 2, argv + argc);
  try {
    if (command == "sweep") return cmd_sweep(args, out, err);
    if (command == "check") return cmd_check(args, out, err);
    if (command == "trial") return cmd_trial(args, out, err);
    if (command == "--help" || command == "-h") {
      out << usage;
      return kExitOk;
    }
    if (command == "--version") {
      out << "contagion " << kVersion << '\n';
      return kExitOk;
    }
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << "unknown command '" << command << "'\n" << usage;
  return kExitUsage;
}

}  // namespace contagion
