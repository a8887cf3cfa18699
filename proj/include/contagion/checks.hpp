#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "contagion/experiment.hpp"
#include "contagion/network.hpp"
#include "contagion/threshold_cascade.hpp"

namespace contagion {

/// Result of one self-check. A failing check carries its first counterexample.
struct CheckOutcome {
  std::string name;
  bool passed = true;
  std::string detail;
  std::string counterexample;
  std::optional<DirectedNetwork> counterexample_network;
};

struct CheckOptions {
  /// Coupled instances per case; degrees cycle through {1, 3, 5, 8}.
  std::size_t instances = 100;
  std::size_t n_banks = 1000;
  std::size_t oracle_instances = 200;
  std::size_t calibration_draws = 1'000'000;
  std::size_t moment_samples = 100'000;
  Seed seed = 1;
  /// Only for exercising the harness itself.
  FlipRule rule = FlipRule::greater;
};

/// Kolmogorov–Smirnov statistic of `samples` (sorted in place) against `cdf`.
double ks_statistic(std::span<double> samples, const std::function<double(double)>& cdf);
/// Asymptotic KS critical value for level `alpha` and sample size n.
double ks_critical_value(double alpha, std::size_t n);

/// Describes the first bank whose fate differs, or nullopt if identical.
std::optional<std::string> describe_mismatch(const CascadeResult& bs, const CascadeResult& thr);

CheckOutcome check_coupled_equivalence(Case c, const CheckOptions& opts);
CheckOutcome check_tie_convention(const CheckOptions& opts);
CheckOutcome check_bs_oracle(const CheckOptions& opts);
CheckOutcome check_schedule_independence(const CheckOptions& opts);
CheckOutcome check_fundamental_calibration(const CheckOptions& opts);
CheckOutcome check_threshold_distribution(Case c, const CheckOptions& opts);

/// Every check above, coupled equivalence once per case.
std::vector<CheckOutcome> run_all_checks(const CheckOptions& opts);

}  // namespace contagion
