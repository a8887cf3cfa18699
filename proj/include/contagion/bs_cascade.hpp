#pragma once

#include <Eigen/Core>
#include <span>
#include <vector>

#include "contagion/balance_sheet.hpp"
#include "contagion/network.hpp"
#include "contagion/rng.hpp"

namespace contagion {

/// Per-bank external-asset returns Δa_i = ã_i - a_i for one trial.
struct ShockDraw {
  Eigen::VectorXd delta_a;
};

/// Outcome of one cascade. Round 0 holds fundamental defaults; a bank that
/// never fails has default_round == -1.
struct CascadeResult {
  std::vector<bool> defaulted;
  std::vector<int> default_round;
  std::size_t n_fundamental = 0;
  std::size_t n_total = 0;
  /// Last round in which a contagious default occurred (0 if none).
  std::size_t rounds = 0;

  [[nodiscard]] double fraction() const {
    return defaulted.empty() ? 0.0 : static_cast<double>(n_total) / static_cast<double>(defaulted.size());
  }

  friend bool operator==(const CascadeResult&, const CascadeResult&) = default;
};

/// Δa_i ~ Normal(0, σ_i²), independent across banks.
ShockDraw draw_shocks(std::span<const BankBalanceSheet> sheets, Seed seed);
void draw_shocks_into(ShockDraw& shocks, std::span<const BankBalanceSheet> sheets, Rng& rng);

/// Zero-recovery default cascade with synchronous rounds.
///
/// Round 0: bank i fails iff Δa_i < -w_i. Round t: a surviving bank fails iff
/// its losses on loans to banks failed by round t-1, net of Δa_i, exceed w_i.
CascadeResult run_bs_cascade(const DirectedNetwork& net, std::span<const BankBalanceSheet> sheets,
                             const ShockDraw& shocks);

/// Same default condition, but banks are re-evaluated one at a time in a
/// random order and failures take effect immediately. Reaches the same final
/// set as run_bs_cascade; `rounds` counts full sweeps and is not comparable.
CascadeResult run_bs_cascade_async(const DirectedNetwork& net, std::span<const BankBalanceSheet> sheets,
                                   const ShockDraw& shocks, Seed schedule_seed);

}  // namespace contagion
