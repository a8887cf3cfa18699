#include "contagion/checks.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "contagion/balance_sheet.hpp"
#include "contagion/rng.hpp"

namespace contagion {

namespace {

constexpr std::array<double, 4> kCoupledDegrees{1.0, 3.0, 5.0, 8.0};

// Binomial count within 4 standard deviations of its mean.
bool within_four_sigma(std::uint64_t hits, std::uint64_t n, double p, std::string& detail) {
  const double expected = static_cast<double>(n) * p;
  const double sd = std::sqrt(static_cast<double>(n) * p * (1.0 - p));
  const double z = (static_cast<double>(hits) - expected) / sd;
  detail = fmt::format("{}/{} = {:.6f} (expected {:.6f}, z = {:+.2f})", hits, n,
                       static_cast<double>(hits) / static_cast<double>(n), p, z);
  return std::abs(z) <= 4.0;
}

struct SmallInstance {
  DirectedNetwork net;
  std::vector<BankBalanceSheet> sheets;
  ShockDraw shocks;
};

// Desk-scale random instance with a high fundamental-default rate so that
// cascades actually occur.
SmallInstance random_small_instance(Seed seed) {
  Rng rng(seed);
  const std::size_t n = 2 + rng.below(9);
  const double z = rng.uniform(0.0, std::min(3.0, static_cast<double>(n - 1)));
  const auto c = static_cast<Case>(rng.below(3));
  const CasePreset preset = case_preset(c);
  const double delta = rng.uniform(0.05, 0.3);
  const BalanceParams params(0.1, delta, preset.theta);
  SmallInstance inst;
  inst.net = generate_er(n, z, preset.loans, rng.next_u64());
  inst.sheets = build_sheets(inst.net, params, rng.next_u64());
  inst.shocks = draw_shocks(inst.sheets, rng.next_u64());
  return inst;
}

}  // namespace

double ks_statistic(std::span<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_critical_value(double alpha, std::size_t n) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

std::optional<std::string> describe_mismatch(const CascadeResult& bs, const CascadeResult& thr) {
  if (bs == thr) return std::nullopt;
  for (std::size_t i = 0; i < bs.default_round.size() && i < thr.default_round.size(); ++i) {
    if (bs.default_round[i] != thr.default_round[i]) {
      const int round = bs.default_round[i] < 0   ? thr.default_round[i]
                        : thr.default_round[i] < 0 ? bs.default_round[i]
                                                   : std::min(bs.default_round[i], thr.default_round[i]);
      return fmt::format("bank {} round {} (balance-sheet round {}, threshold round {})", i, round,
                         bs.default_round[i], thr.default_round[i]);
    }
  }
  return fmt::format("aggregate mismatch: fundamental {} vs {}, total {} vs {}, rounds {} vs {}", bs.n_fundamental,
                     thr.n_fundamental, bs.n_total, thr.n_total, bs.rounds, thr.rounds);
}

CheckOutcome check_coupled_equivalence(Case c, const CheckOptions& opts) {
  CheckOutcome out;
  out.name = fmt::format("coupled equivalence, case {}", to_string(c));
  const CasePreset preset = case_preset(c);
  const BalanceParams params(0.1, 0.01, preset.theta);
  std::size_t defaults = 0;
  for (std::size_t k = 0; k < opts.instances; ++k) {
    const double z = kCoupledDegrees[k % kCoupledDegrees.size()];
    const Seed seed = derive_seed(opts.seed, {key(Stream::check), 1, static_cast<std::uint64_t>(c), k});
    const DirectedNetwork net = generate_er(opts.n_banks, z, preset.loans, derive_seed(seed, {key(Stream::network)}));
    const auto sheets = build_sheets(net, params, derive_seed(seed, {key(Stream::theta)}));
    const ShockDraw shocks = draw_shocks(sheets, derive_seed(seed, {key(Stream::shock)}));

    const CascadeResult bs = run_bs_cascade(net, sheets, shocks);
    ThresholdAssignment thr = make_assignment(net);
    thresholds_from_shocks(thr, sheets, shocks);
    const CascadeResult th = run_threshold_cascade(net, thr, inactive_flips_from_shocks(thr, sheets, shocks), opts.rule);
    defaults += bs.n_total;
    if (const auto where = describe_mismatch(bs, th)) {
      out.passed = false;
      out.detail = fmt::format("mismatch on instance {} of {}", k, opts.instances);
      out.counterexample = fmt::format("seed={} z={} {}", seed, z, *where);
      out.counterexample_network = net;
      return out;
    }
  }
  out.detail = opts.instances == 0 ? "no instances requested (vacuous)"
                                   : fmt::format("{} instances, 0 mismatches, {} defaults compared", opts.instances,
                                                 defaults);
  return out;
}

CheckOutcome check_tie_convention(const CheckOptions& opts) {
  CheckOutcome out;
  out.name = "tie convention (equality never flips)";

  // Bank 0 lends one unit to each of banks 1-4 and banks 1-2 fail: loss 2
  // against a cushion of exactly 2 (w = 1, Δa = +1), i.e. μ = φ̃ = 0.5.
  // Bank 5 lends one unit to failing bank 6 with w = 0.5, Δa = +0.5: μ = φ̃ = 1.
  // Bank 7 sits exactly on the fundamental boundary Δa = -w.
  const DirectedNetwork net(8, {{0, 1, 1.0}, {0, 2, 1.0}, {0, 3, 1.0}, {0, 4, 1.0}, {5, 6, 1.0}, {7, 3, 1.0}});
  std::vector<BankBalanceSheet> sheets(8);
  const auto set = [&](std::size_t i, double w) {
    BankBalanceSheet& s = sheets[i];
    s.l = net.interbank_assets()[static_cast<Eigen::Index>(i)];
    s.p_bar = net.interbank_liabilities()[static_cast<Eigen::Index>(i)];
    s.w = w;
    s.a = 4.0;
    s.b = 0.0;
    s.d = s.a + s.l - s.p_bar - s.w;
    if (s.d < 0.0) {
      s.b = -s.d;
      s.d = 0.0;
    }
  };
  for (std::size_t i = 0; i < 8; ++i) set(i, 1.0);
  set(5, 0.5);
  set(7, 0.5);
  ShockDraw shocks{Eigen::VectorXd::Zero(8)};
  shocks.delta_a << 1.0, -5.0, -5.0, 0.0, 0.0, 0.5, -5.0, -0.5;

  const CascadeResult bs = run_bs_cascade(net, sheets, shocks);
  ThresholdAssignment thr = make_assignment(net);
  thresholds_from_shocks(thr, sheets, shocks);
  const CascadeResult th = run_threshold_cascade(net, thr, inactive_flips_from_shocks(thr, sheets, shocks), opts.rule);

  const std::vector<bool> expected{false, true, true, false, false, false, true, false};
  if (bs.defaulted != expected) {
    out.passed = false;
    out.counterexample = "balance-sheet engine broke a tie toward default";
  } else if (const auto where = describe_mismatch(bs, th)) {
    out.passed = false;
    out.counterexample = fmt::format("seed=none (hand-built) {}", *where);
  }
  if (!out.passed) {
    out.detail = "equality resolved as default";
    out.counterexample_network = net;
  } else {
    out.detail = "3 boundary banks survive in both engines";
  }
  return out;
}

CheckOutcome check_bs_oracle(const CheckOptions& opts) {
  CheckOutcome out;
  out.name = "balance-sheet engine vs brute-force fixed point";
  std::size_t nontrivial = 0;
  for (std::size_t k = 0; k < opts.oracle_instances; ++k) {
    const Seed seed = derive_seed(opts.seed, {key(Stream::check), 2, k});
    const SmallInstance inst = random_small_instance(seed);
    const CascadeResult engine = run_bs_cascade(inst.net, inst.sheets, inst.shocks);
    const CascadeResult oracle = brute_force_fixed_point(inst.net, inst.sheets, inst.shocks);
    if (engine.n_total > engine.n_fundamental) ++nontrivial;
    if (const auto where = describe_mismatch(engine, oracle)) {
      out.passed = false;
      out.detail = fmt::format("mismatch on instance {}", k);
      out.counterexample = fmt::format("seed={} {}", seed, *where);
      out.counterexample_network = inst.net;
      return out;
    }
  }
  out.detail = opts.oracle_instances == 0
                   ? "no instances requested (vacuous)"
                   : fmt::format("{} instances agree ({} with contagion)", opts.oracle_instances, nontrivial);
  return out;
}

CheckOutcome check_schedule_independence(const CheckOptions& opts) {
  CheckOutcome out;
  out.name = "synchronous vs randomized asynchronous schedule";
  for (std::size_t k = 0; k < opts.oracle_instances; ++k) {
    const Seed seed = derive_seed(opts.seed, {key(Stream::check), 2, k});
    const SmallInstance inst = random_small_instance(seed);
    const CascadeResult sync = run_bs_cascade(inst.net, inst.sheets, inst.shocks);
    const CascadeResult async =
        run_bs_cascade_async(inst.net, inst.sheets, inst.shocks, derive_seed(seed, {key(Stream::schedule)}));
    if (sync.defaulted != async.defaulted) {
      out.passed = false;
      out.detail = fmt::format("final default sets differ on instance {}", k);
      out.counterexample = fmt::format("seed={} synchronous {} vs asynchronous {} defaults", seed, sync.n_total,
                                       async.n_total);
      out.counterexample_network = inst.net;
      return out;
    }
  }
  out.detail = opts.oracle_instances == 0 ? "no instances requested (vacuous)"
                                          : fmt::format("{} instances agree", opts.oracle_instances);
  return out;
}

CheckOutcome check_fundamental_calibration(const CheckOptions& opts) {
  CheckOutcome out;
  out.name = "fundamental default rate";
  const ExperimentConfig cfg = standard_protocol(Case::B);
  const BalanceParams params = cfg.balance_params();
  const Seed seed = derive_seed(opts.seed, {key(Stream::check), 3});
  const DirectedNetwork net = generate_er(opts.n_banks, std::min(5.0, static_cast<double>(opts.n_banks - 1)),
                                          cfg.loans, derive_seed(seed, {key(Stream::network)}));
  const Eigen::VectorXd thetas = draw_thetas(net.size(), cfg.theta, derive_seed(seed, {key(Stream::theta)}));
  const auto sheets = build_sheets(net, params, thetas);
  ThresholdAssignment thr = make_assignment(net);

  std::uint64_t bs_hits = 0;
  std::uint64_t bs_draws = 0;
  std::uint64_t thr_hits = 0;
  std::uint64_t thr_draws = 0;
  Rng rng(derive_seed(seed, {key(Stream::shock)}));
  ShockDraw shocks;
  while (bs_draws < opts.calibration_draws || thr_draws < opts.calibration_draws) {
    draw_shocks_into(shocks, sheets, rng);
    for (std::size_t i = 0; i < sheets.size(); ++i) {
      if (shocks.delta_a[static_cast<Eigen::Index>(i)] < -sheets[i].w) ++bs_hits;
    }
    bs_draws += sheets.size();
    resample_thresholds(thr, params, thetas, rng);
    for (std::size_t i = 0; i < sheets.size(); ++i) {
      if (!thr.active[i]) continue;
      ++thr_draws;
      if (thr.phi_tilde[static_cast<Eigen::Index>(i)] < 0.0) ++thr_hits;
    }
  }
  std::string bs_detail;
  std::string thr_detail;
  const bool bs_ok = within_four_sigma(bs_hits, bs_draws, params.delta(), bs_detail);
  const bool thr_ok = within_four_sigma(thr_hits, thr_draws, params.delta(), thr_detail);
  out.passed = bs_ok && thr_ok;
  out.detail = fmt::format("P(Δa < -w): {}; P(φ̃ < 0): {}", bs_detail, thr_detail);
  if (!out.passed) out.counterexample = fmt::format("seed={}", seed);
  return out;
}

CheckOutcome check_threshold_distribution(Case c, const CheckOptions& opts) {
  CheckOutcome out;
  out.name = fmt::format("shadow threshold distribution, case {}", to_string(c));
  const ExperimentConfig cfg = standard_protocol(c);
  const BalanceParams params = cfg.balance_params();
  const double abs_z = -params.z_tilde();
  const Seed seed = derive_seed(opts.seed, {key(Stream::check), 4, static_cast<std::uint64_t>(c)});
  const DirectedNetwork net = generate_er(opts.n_banks, std::min(5.0, static_cast<double>(opts.n_banks - 1)),
                                          cfg.loans, derive_seed(seed, {key(Stream::network)}));
  const Eigen::VectorXd thetas = draw_thetas(net.size(), cfg.theta, derive_seed(seed, {key(Stream::theta)}));
  ThresholdAssignment thr = make_assignment(net);
  Rng rng(derive_seed(seed, {key(Stream::threshold)}));

  // Standardize each draw by its own bank's mean and sd so one KS test covers
  // every θ value.
  std::vector<double> raw;
  std::vector<double> standardized;
  raw.reserve(opts.moment_samples);
  standardized.reserve(opts.moment_samples);
  while (raw.size() < opts.moment_samples) {
    resample_thresholds(thr, params, thetas, rng);
    for (Eigen::Index i = 0; i < thr.phi_tilde.size() && raw.size() < opts.moment_samples; ++i) {
      if (!thr.active[static_cast<std::size_t>(i)]) continue;
      const double mean = params.gamma() / thetas[i];
      raw.push_back(thr.phi_tilde[i]);
      standardized.push_back((thr.phi_tilde[i] - mean) / (mean / abs_z));
    }
  }
  const double ks = ks_statistic(standardized, normal_cdf);
  const double critical = ks_critical_value(0.01, standardized.size());
  out.passed = ks < critical;
  out.detail = fmt::format("KS {:.5f} vs 1% critical {:.5f} over {} draws", ks, critical, standardized.size());

  if (cfg.theta.is_constant()) {
    const double n = static_cast<double>(raw.size());
    double mean = 0.0;
    for (const double x : raw) mean += x;
    mean /= n;
    double var = 0.0;
    for (const double x : raw) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    const double want_mean = params.gamma() / cfg.theta.lo;
    const double want_sd = want_mean / abs_z;
    const bool moments_ok = std::abs(mean - want_mean) <= 0.002 && std::abs(sd - want_sd) <= 0.002;
    out.passed = out.passed && moments_ok;
    out.detail += fmt::format("; mean {:.5f} (want {:.5f}), sd {:.5f} (want {:.5f})", mean, want_mean, sd, want_sd);
  }
  if (!out.passed) out.counterexample = fmt::format("seed={}", seed);
  return out;
}

std::vector<CheckOutcome> run_all_checks(const CheckOptions& opts) {
  std::vector<CheckOutcome> outcomes;
  for (const Case c : {Case::A, Case::B, Case::C}) outcomes.push_back(check_coupled_equivalence(c, opts));
  outcomes.push_back(check_tie_convention(opts));
  outcomes.push_back(check_bs_oracle(opts));
  outcomes.push_back(check_schedule_independence(opts));
  outcomes.push_back(check_fundamental_calibration(opts));
  outcomes.push_back(check_threshold_distribution(Case::A, opts));
  outcomes.push_back(check_threshold_distribution(Case::B, opts));
  return outcomes;
}

}  // namespace contagion
