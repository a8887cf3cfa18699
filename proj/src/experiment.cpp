#include "contagion/experiment.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "contagion/rng.hpp"
#include "contagion/threshold_cascade.hpp"

namespace contagion {

std::string_view to_string(Case c) {
  switch (c) {
    case Case::A: return "A";
    case Case::B: return "B";
    case Case::C: return "C";
  }
  return "?";
}

std::string_view to_string(ModelMode m) {
  switch (m) {
    case ModelMode::bs: return "bs";
    case ModelMode::threshold: return "threshold";
    case ModelMode::both_independent: return "both-independent";
    case ModelMode::both_coupled: return "both-coupled";
  }
  return "?";
}

std::string_view to_string(ModelTag m) { return m == ModelTag::bs ? "bs" : "threshold"; }

std::optional<Case> parse_case(std::string_view text) {
  if (text == "A" || text == "a") return Case::A;
  if (text == "B" || text == "b") return Case::B;
  if (text == "C" || text == "c") return Case::C;
  return std::nullopt;
}

std::optional<ModelMode> parse_model_mode(std::string_view text) {
  for (const ModelMode m : {ModelMode::bs, ModelMode::threshold, ModelMode::both_independent, ModelMode::both_coupled}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

CasePreset case_preset(Case c) {
  switch (c) {
    case Case::A: return {ThetaDistribution::constant(0.3), LoanSizeDistribution::constant(1.0)};
    case Case::B: return {ThetaDistribution::uniform(0.2, 0.4), LoanSizeDistribution::constant(1.0)};
    case Case::C: return {ThetaDistribution::constant(0.3), LoanSizeDistribution::uniform(0.2, 1.8)};
  }
  throw InvalidParameter("unknown case");
}

std::vector<double> default_degree_grid() {
  std::vector<double> grid;
  for (int k = 0; k <= 20; ++k) grid.push_back(0.5 * k);
  return grid;
}

void ExperimentConfig::validate() const {
  if (n_banks < 1) throw InvalidParameter("n_banks must be at least 1");
  (void)balance_params();
  validate_loan_distribution(loans);
  if (degree_grid.empty()) throw InvalidParameter("degree grid is empty");
  for (const double z : degree_grid) {
    if (!(z >= 0.0) || z > static_cast<double>(n_banks - 1)) {
      throw InvalidParameter(fmt::format("degree {} outside [0, {}]", z, n_banks - 1));
    }
  }
  if (networks_per_degree < 1) throw InvalidParameter("networks_per_degree must be at least 1");
  if (trials_per_network < 1) throw InvalidParameter("trials_per_network must be at least 1");
  if (!(crisis_cutoff > 0.0 && crisis_cutoff <= 1.0)) {
    throw InvalidParameter(fmt::format("crisis cutoff must lie in (0,1], got {}", crisis_cutoff));
  }
}

bool ExperimentConfig::runs(ModelTag tag) const {
  switch (model) {
    case ModelMode::bs: return tag == ModelTag::bs;
    case ModelMode::threshold: return tag == ModelTag::threshold;
    default: return true;
  }
}

ExperimentConfig standard_protocol(Case c, ModelMode model) {
  ExperimentConfig cfg;
  const CasePreset preset = case_preset(c);
  cfg.case_id = c;
  cfg.theta = preset.theta;
  cfg.loans = preset.loans;
  cfg.model = model;
  return cfg;
}

void CrisisTally::record(const CascadeResult& r, double cutoff) {
  ++runs;
  if (r.fraction() >= cutoff) {
    ++crises;
    crisis_defaults += r.n_total;
  }
}

CrisisTally& CrisisTally::operator+=(const CrisisTally& other) {
  runs += other.runs;
  crises += other.crises;
  crisis_defaults += other.crisis_defaults;
  mismatches += other.mismatches;
  return *this;
}

CrisisStats summarize(double degree, ModelTag model, const CrisisTally& tally, std::size_t n_banks) {
  CrisisStats s;
  s.degree = degree;
  s.model = model;
  s.n_runs = tally.runs;
  s.mismatches = tally.mismatches;
  if (tally.runs > 0) {
    const double n = static_cast<double>(tally.runs);
    s.crisis_frequency = static_cast<double>(tally.crises) / n;
    s.frequency_ci_halfwidth = 1.959963984540054 * std::sqrt(s.crisis_frequency * (1.0 - s.crisis_frequency) / n);
  }
  if (tally.crises > 0) {
    s.mean_crisis_size = static_cast<double>(tally.crisis_defaults) /
                         (static_cast<double>(tally.crises) * static_cast<double>(n_banks));
  }
  return s;
}

NetworkOutcome run_network_cell(const ExperimentConfig& cfg, std::size_t degree_index, std::size_t network_index) {
  const BalanceParams params = cfg.balance_params();
  const Seed master = cfg.master_seed;
  const DirectedNetwork net = generate_er(cfg.n_banks, cfg.degree_grid.at(degree_index), cfg.loans,
                                          derive_seed(master, {key(Stream::network), degree_index, network_index}));
  const Eigen::VectorXd thetas =
      draw_thetas(net.size(), cfg.theta, derive_seed(master, {key(Stream::theta), degree_index, network_index}));
  const std::vector<BankBalanceSheet> sheets = build_sheets(net, params, thetas);

  const bool coupled = cfg.model == ModelMode::both_coupled;
  const bool run_bs = cfg.runs(ModelTag::bs);
  const bool run_threshold = cfg.runs(ModelTag::threshold);

  NetworkOutcome out;
  ThresholdAssignment thr = make_assignment(net);
  ShockDraw shocks;
  for (std::size_t t = 0; t < cfg.trials_per_network; ++t) {
    CascadeResult bs_result;
    if (run_bs) {
      Rng rng(derive_seed(master, {key(Stream::shock), degree_index, network_index, t}));
      draw_shocks_into(shocks, sheets, rng);
      bs_result = run_bs_cascade(net, sheets, shocks);
      out.bs.record(bs_result, cfg.crisis_cutoff);
    }
    if (!run_threshold) continue;
    std::vector<bool> flips;
    if (coupled) {
      thresholds_from_shocks(thr, sheets, shocks);
      flips = inactive_flips_from_shocks(thr, sheets, shocks);
    } else {
      Rng rng(derive_seed(master, {key(Stream::threshold), degree_index, network_index, t}));
      resample_thresholds(thr, params, thetas, rng);
      flips = draw_inactive_flips(thr, params.delta(), rng);
    }
    const CascadeResult thr_result = run_threshold_cascade(net, thr, flips);
    out.threshold.record(thr_result, cfg.crisis_cutoff);
    if (coupled && !(thr_result == bs_result)) {
      ++out.bs.mismatches;
      ++out.threshold.mismatches;
    }
  }
  return out;
}

std::vector<CrisisStats> run_sweep(const ExperimentConfig& cfg, const SweepOptions& options) {
  cfg.validate();
  const std::size_t n_degrees = cfg.degree_grid.size();
  const std::size_t n_cells = n_degrees * cfg.networks_per_degree;
  const std::uint64_t total_trials = static_cast<std::uint64_t>(n_cells) * cfg.trials_per_network;

  std::vector<NetworkOutcome> cells(n_cells);
  std::atomic<std::size_t> next_cell{0};
  std::uint64_t trials_done = 0;
  std::mutex progress_mutex;
  std::exception_ptr failure;

  const auto worker = [&] {
    for (std::size_t c = next_cell++; c < n_cells; c = next_cell++) {
      try {
        cells[c] = run_network_cell(cfg, c / cfg.networks_per_degree, c % cfg.networks_per_degree);
      } catch (...) {
        const std::lock_guard lock(progress_mutex);
        if (!failure) failure = std::current_exception();
        next_cell = n_cells;
        return;
      }
      const std::lock_guard lock(progress_mutex);
      trials_done += cfg.trials_per_network;
      if (options.progress) options.progress(trials_done, total_trials);
    }
  };

  unsigned workers = options.workers != 0 ? options.workers : std::max(1U, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n_cells));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<CrisisStats> stats;
  for (std::size_t zi = 0; zi < n_degrees; ++zi) {
    NetworkOutcome pooled;
    for (std::size_t ni = 0; ni < cfg.networks_per_degree; ++ni) {
      pooled.bs += cells[zi * cfg.networks_per_degree + ni].bs;
      pooled.threshold += cells[zi * cfg.networks_per_degree + ni].threshold;
    }
    if (cfg.runs(ModelTag::bs)) stats.push_back(summarize(cfg.degree_grid[zi], ModelTag::bs, pooled.bs, cfg.n_banks));
    if (cfg.runs(ModelTag::threshold)) {
      stats.push_back(summarize(cfg.degree_grid[zi], ModelTag::threshold, pooled.threshold, cfg.n_banks));
    }
  }
  return stats;
}

CascadeResult brute_force_fixed_point(const DirectedNetwork& net, std::span<const BankBalanceSheet> sheets,
                                      const ShockDraw& shocks) {
  const std::size_t n = net.size();
  if (n > 20) throw InvalidParameter(fmt::format("brute-force oracle is limited to 20 banks, got {}", n));
  if (sheets.size() != n || static_cast<std::size_t>(shocks.delta_a.size()) != n) {
    throw InvalidParameter("dimension mismatch");
  }

  CascadeResult r;
  r.defaulted.assign(n, false);
  r.default_round.assign(n, -1);
  for (NodeId i = 0; i < n; ++i) {
    if (shocks.delta_a[i] < -sheets[i].w) {
      r.defaulted[i] = true;
      r.default_round[i] = 0;
    }
  }
  for (int pass = 1;; ++pass) {
    std::vector<bool> next = r.defaulted;
    for (NodeId i = 0; i < n; ++i) {
      double loss = 0.0;
      for (const Edge& e : net.edges()) {
        if (e.lender == i && r.defaulted[e.borrower]) loss += e.loan_size;
      }
      if (loss - shocks.delta_a[i] > sheets[i].w) next[i] = true;
    }
    if (next == r.defaulted) break;
    for (NodeId i = 0; i < n; ++i) {
      if (next[i] && !r.defaulted[i]) r.default_round[i] = pass;
    }
    r.defaulted = std::move(next);
    r.rounds = static_cast<std::size_t>(pass);
  }
  for (NodeId i = 0; i < n; ++i) {
    if (r.default_round[i] == 0) ++r.n_fundamental;
    if (r.defaulted[i]) ++r.n_total;
  }
  return r;
}

}  // namespace contagion
