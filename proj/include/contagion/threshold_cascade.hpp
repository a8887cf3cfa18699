#pragma once

#include <Eigen/Core>
#include <functional>
#include <span>
#include <vector>

#include "contagion/balance_sheet.hpp"
#include "contagion/bs_cascade.hpp"
#include "contagion/network.hpp"
#include "contagion/rng.hpp"

namespace contagion {

/// (w + Δa) / l. Negative values mean a fundamental default; values above
/// one mean the bank cannot fail through contagion.
double shadow_threshold(double w, double l, double delta_a);

/// Shadow thresholds plus the weights a lender attaches to each borrower.
struct ThresholdAssignment {
  /// φ̃_i; only meaningful where active[i].
  Eigen::VectorXd phi_tilde;
  /// l_i > 0.
  std::vector<bool> active;
  /// loan_size / l_lender, indexed like DirectedNetwork::edges().
  Eigen::VectorXd edge_weights;
};

/// Weights of each lender's loans, summing to one per active lender.
Eigen::VectorXd lending_weights(const DirectedNetwork& net);

/// Assignment with weights and activity filled in and φ̃ zeroed.
ThresholdAssignment make_assignment(const DirectedNetwork& net);

/// φ̃_i ~ Normal(γ/θ_i, (γ/(θ_i |z̃|))²) for every active bank. Uses only the
/// parameters and θ draws, never a balance sheet.
ThresholdAssignment sample_thresholds(const DirectedNetwork& net, const BalanceParams& params,
                                      const Eigen::Ref<const Eigen::VectorXd>& thetas, Seed seed);
void resample_thresholds(ThresholdAssignment& thr, const BalanceParams& params,
                         const Eigen::Ref<const Eigen::VectorXd>& thetas, Rng& rng);

/// Round-0 flips for non-lenders in the standalone model: Bernoulli(δ) each.
std::vector<bool> draw_inactive_flips(const ThresholdAssignment& thr, double delta, Rng& rng);

/// Thresholds implied by a concrete balance-sheet trial: φ̃_i = (w_i + Δa_i)/l_i.
void thresholds_from_shocks(ThresholdAssignment& thr, std::span<const BankBalanceSheet> sheets,
                            const ShockDraw& shocks);
/// Non-lenders that fail fundamentally in that trial: Δa_i < -w_i.
std::vector<bool> inactive_flips_from_shocks(const ThresholdAssignment& thr, std::span<const BankBalanceSheet> sheets,
                                             const ShockDraw& shocks);

/// Density of φ̃ given the density `g` of Δa: l · g(x·l - γ·l/θ).
double pdf_shadow(double x, double l, double gamma, double theta, const std::function<double(double)>& g);

/// Comparison in the flip rule. Only `greater` is correct; `greater_equal`
/// exists so the check harness can prove it detects a broken rule.
enum class FlipRule { greater, greater_equal };

/// Weighted threshold cascade with synchronous rounds.
///
/// Round 0: active banks with φ̃_i < 0 flip, inactive banks per
/// `inactive_flips`. Round t: an active bank flips iff the summed weight of its
/// flipped borrowers μ_i exceeds φ̃_i.
CascadeResult run_threshold_cascade(const DirectedNetwork& net, const ThresholdAssignment& thr,
                                    const std::vector<bool>& inactive_flips, FlipRule rule = FlipRule::greater);

/// Unweighted form m_i > φ̃_i k_i on flipped-borrower counts. Agrees with
/// run_threshold_cascade whenever all loans have the same size.
CascadeResult run_threshold_cascade_counting(const DirectedNetwork& net, const ThresholdAssignment& thr,
                                             const std::vector<bool>& inactive_flips);

}  // namespace contagion
