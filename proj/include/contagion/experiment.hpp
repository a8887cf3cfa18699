#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "contagion/balance_sheet.hpp"
#include "contagion/bs_cascade.hpp"
#include "contagion/common.hpp"
#include "contagion/network.hpp"

namespace contagion {

enum class Case { A, B, C };
enum class ModelMode { bs, threshold, both_independent, both_coupled };
enum class ModelTag { bs, threshold };

std::string_view to_string(Case c);
std::string_view to_string(ModelMode m);
std::string_view to_string(ModelTag m);
std::optional<Case> parse_case(std::string_view text);
std::optional<ModelMode> parse_model_mode(std::string_view text);

/// Network and balance-sheet heterogeneity of each case.
struct CasePreset {
  ThetaDistribution theta;
  LoanSizeDistribution loans;
};
CasePreset case_preset(Case c);

/// 0, 0.5, ..., 10.
std::vector<double> default_degree_grid();

struct ExperimentConfig {
  std::size_t n_banks = 1000;
  double gamma = 0.1;
  double delta = 0.01;
  Case case_id = Case::A;
  ThetaDistribution theta = ThetaDistribution::constant(0.3);
  LoanSizeDistribution loans = LoanSizeDistribution::constant(1.0);
  ModelMode model = ModelMode::both_independent;
  std::vector<double> degree_grid = default_degree_grid();
  std::size_t networks_per_degree = 20;
  std::size_t trials_per_network = 1000;
  double crisis_cutoff = 0.05;
  Seed master_seed = 1;

  /// Throws InvalidParameter on any violated invariant.
  void validate() const;
  [[nodiscard]] BalanceParams balance_params() const { return {gamma, delta, theta}; }
  [[nodiscard]] bool runs(ModelTag tag) const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// The standard protocol for one case: N = 1000, γ = .1, δ = .01,
/// 20 networks × 1000 trials per degree, 5% crisis cutoff.
ExperimentConfig standard_protocol(Case c, ModelMode model = ModelMode::both_independent);

/// Integer counters for one model; merging is exact, commutative and associative.
struct CrisisTally {
  std::uint64_t runs = 0;
  std::uint64_t crises = 0;
  /// Sum of defaulted-bank counts over crisis runs.
  std::uint64_t crisis_defaults = 0;
  std::uint64_t mismatches = 0;

  void record(const CascadeResult& r, double cutoff);
  CrisisTally& operator+=(const CrisisTally& other);
  friend bool operator==(const CrisisTally&, const CrisisTally&) = default;
};

struct CrisisStats {
  double degree = 0.0;
  ModelTag model = ModelTag::bs;
  double crisis_frequency = 0.0;
  /// Mean defaulted fraction over crisis runs; empty when there were none.
  std::optional<double> mean_crisis_size;
  std::uint64_t n_runs = 0;
  /// Half-width of the 95% normal-approximation binomial interval.
  double frequency_ci_halfwidth = 0.0;
  std::uint64_t mismatches = 0;

  friend bool operator==(const CrisisStats&, const CrisisStats&) = default;
};

CrisisStats summarize(double degree, ModelTag model, const CrisisTally& tally, std::size_t n_banks);

/// Both engines' tallies for one (degree, network) cell of a sweep.
struct NetworkOutcome {
  CrisisTally bs;
  CrisisTally threshold;
};

/// Runs every trial on network `network_index` of degree `degree_index`.
/// Any cell can be recomputed in isolation from the config alone.
NetworkOutcome run_network_cell(const ExperimentConfig& cfg, std::size_t degree_index, std::size_t network_index);

using ProgressCallback = std::function<void(std::uint64_t trials_done, std::uint64_t trials_total)>;

struct SweepOptions {
  /// 0 means std::thread::hardware_concurrency().
  unsigned workers = 0;
  ProgressCallback progress;
};

/// One CrisisStats per degree per model that the config runs, ordered by
/// degree then model (bs before threshold). Output does not depend on the
/// number of workers.
std::vector<CrisisStats> run_sweep(const ExperimentConfig& cfg, const SweepOptions& options = {});

/// Least fixed point of the zero-recovery default map, recomputing every
/// bank's full loss from scratch on every pass. Test oracle; refuses more than
/// 20 banks.
CascadeResult brute_force_fixed_point(const DirectedNetwork& net, std::span<const BankBalanceSheet> sheets,
                                      const ShockDraw& shocks);

}  // namespace contagion
