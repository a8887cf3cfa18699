#include "contagion/threshold_cascade.hpp"

#include <fmt/format.h>

namespace contagion {

double shadow_threshold(double w, double l, double delta_a) {
  if (!(l > 0.0)) throw InvalidParameter(fmt::format("shadow threshold needs l > 0, got {}", l));
  return (w + delta_a) / l;
}

Eigen::VectorXd lending_weights(const DirectedNetwork& net) {
  Eigen::VectorXd weights(static_cast<Eigen::Index>(net.edge_count()));
  const auto& l = net.interbank_assets();
  EdgeId e = 0;
  for (const Edge& loan : net.edges()) weights[e++] = loan.loan_size / l[loan.lender];
  return weights;
}

ThresholdAssignment make_assignment(const DirectedNetwork& net) {
  ThresholdAssignment thr;
  thr.phi_tilde = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.size()));
  thr.active.resize(net.size());
  for (NodeId i = 0; i < net.size(); ++i) thr.active[i] = net.out_degree(i) > 0;
  thr.edge_weights = lending_weights(net);
  return thr;
}

ThresholdAssignment sample_thresholds(const DirectedNetwork& net, const BalanceParams& params,
                                      const Eigen::Ref<const Eigen::VectorXd>& thetas, Seed seed) {
  ThresholdAssignment thr = make_assignment(net);
  Rng rng(seed);
  resample_thresholds(thr, params, thetas, rng);
  return thr;
}

void resample_thresholds(ThresholdAssignment& thr, const BalanceParams& params,
                         const Eigen::Ref<const Eigen::VectorXd>& thetas, Rng& rng) {
  if (thetas.size() != thr.phi_tilde.size()) {
    throw InvalidParameter(fmt::format("{} theta draws for {} banks", thetas.size(), thr.phi_tilde.size()));
  }
  const double abs_z = -params.z_tilde();
  for (Eigen::Index i = 0; i < thr.phi_tilde.size(); ++i) {
    if (!thr.active[static_cast<std::size_t>(i)]) continue;
    const double mean = params.gamma() / thetas[i];
    thr.phi_tilde[i] = mean + (mean / abs_z) * rng.normal();
  }
}

std::vector<bool> draw_inactive_flips(const ThresholdAssignment& thr, double delta, Rng& rng) {
  std::vector<bool> flips(thr.active.size(), false);
  for (std::size_t i = 0; i < flips.size(); ++i) {
    if (!thr.active[i]) flips[i] = rng.bernoulli(delta);
  }
  return flips;
}

void thresholds_from_shocks(ThresholdAssignment& thr, std::span<const BankBalanceSheet> sheets,
                            const ShockDraw& shocks) {
  if (sheets.size() != thr.active.size() || static_cast<std::size_t>(shocks.delta_a.size()) != sheets.size()) {
    throw InvalidParameter("dimension mismatch between thresholds, sheets and shocks");
  }
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    thr.phi_tilde[idx] = thr.active[i] ? shadow_threshold(sheets[i].w, sheets[i].l, shocks.delta_a[idx]) : 0.0;
  }
}

std::vector<bool> inactive_flips_from_shocks(const ThresholdAssignment& thr, std::span<const BankBalanceSheet> sheets,
                                             const ShockDraw& shocks) {
  std::vector<bool> flips(thr.active.size(), false);
  for (std::size_t i = 0; i < flips.size(); ++i) {
    if (!thr.active[i]) flips[i] = shocks.delta_a[static_cast<Eigen::Index>(i)] < -sheets[i].w;
  }
  return flips;
}

double pdf_shadow(double x, double l, double gamma, double theta, const std::function<double(double)>& g) {
  if (!(l > 0.0)) throw InvalidParameter(fmt::format("threshold density needs l > 0, got {}", l));
  return l * g(x * l - gamma * l / theta);
}

namespace {

void check_dimensions(const DirectedNetwork& net, const ThresholdAssignment& thr,
                      const std::vector<bool>& inactive_flips) {
  if (static_cast<std::size_t>(thr.phi_tilde.size()) != net.size() || thr.active.size() != net.size() ||
      inactive_flips.size() != net.size() || static_cast<std::size_t>(thr.edge_weights.size()) != net.edge_count()) {
    throw InvalidParameter(fmt::format("dimension mismatch: {} banks, {} thresholds, {} flips, {} weights",
                                       net.size(), thr.phi_tilde.size(), inactive_flips.size(),
                                       thr.edge_weights.size()));
  }
}

// Shared synchronous driver; `exceeds(i, pressure)` is the flip rule applied
// to whatever per-bank pressure `increment(edge)` accumulates.
template <typename Increment, typename Exceeds>
CascadeResult propagate(const DirectedNetwork& net, const ThresholdAssignment& thr,
                        const std::vector<bool>& inactive_flips, Increment increment, Exceeds exceeds) {
  const std::size_t n = net.size();
  CascadeResult result;
  result.defaulted.assign(n, false);
  result.default_round.assign(n, -1);

  std::vector<NodeId> frontier;
  for (NodeId i = 0; i < n; ++i) {
    const bool flips = thr.active[i] ? thr.phi_tilde[i] < 0.0 : static_cast<bool>(inactive_flips[i]);
    if (flips) {
      result.defaulted[i] = true;
      result.default_round[i] = 0;
      frontier.push_back(i);
    }
  }
  result.n_fundamental = frontier.size();
  result.n_total = frontier.size();

  std::vector<double> pressure(n, 0.0);
  std::vector<bool> touched(n, false);
  std::vector<NodeId> candidates;
  std::vector<NodeId> next;
  for (int round = 1; !frontier.empty(); ++round) {
    candidates.clear();
    for (const NodeId j : frontier) {
      for (const EdgeId e : net.debts_of(j)) {
        const NodeId i = net.edge(e).lender;
        if (result.defaulted[i]) continue;
        pressure[i] += increment(e);
        if (!touched[i]) {
          touched[i] = true;
          candidates.push_back(i);
        }
      }
    }
    next.clear();
    for (const NodeId i : candidates) {
      touched[i] = false;
      if (exceeds(i, pressure[i])) {
        result.defaulted[i] = true;
        result.default_round[i] = round;
        next.push_back(i);
      }
    }
    if (!next.empty()) result.rounds = static_cast<std::size_t>(round);
    result.n_total += next.size();
    frontier.swap(next);
  }
  return result;
}

}  // namespace

CascadeResult run_threshold_cascade(const DirectedNetwork& net, const ThresholdAssignment& thr,
                                    const std::vector<bool>& inactive_flips, FlipRule rule) {
  check_dimensions(net, thr, inactive_flips);
  const auto& weights = thr.edge_weights;
  const auto& phi = thr.phi_tilde;
  const auto weight = [&](EdgeId e) { return weights[e]; };
  if (rule == FlipRule::greater_equal) {
    return propagate(net, thr, inactive_flips, weight, [&](NodeId i, double mu) { return mu >= phi[i]; });
  }
  return propagate(net, thr, inactive_flips, weight, [&](NodeId i, double mu) { return mu > phi[i]; });
}

CascadeResult run_threshold_cascade_counting(const DirectedNetwork& net, const ThresholdAssignment& thr,
                                             const std::vector<bool>& inactive_flips) {
  check_dimensions(net, thr, inactive_flips);
  const auto& phi = thr.phi_tilde;
  return propagate(
      net, thr, inactive_flips, [](EdgeId) { return 1.0; },
      [&](NodeId i, double m) { return m > phi[i] * static_cast<double>(net.out_degree(i)); });
}

}  // namespace contagion
