#include "contagion/bs_cascade.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace contagion {

namespace {

void check_dimensions(const DirectedNetwork& net, std::span<const BankBalanceSheet> sheets,
                      const ShockDraw& shocks) {
  if (sheets.size() != net.size() || static_cast<std::size_t>(shocks.delta_a.size()) != net.size()) {
    throw InvalidParameter(fmt::format("dimension mismatch: {} banks, {} sheets, {} shocks", net.size(),
                                       sheets.size(), shocks.delta_a.size()));
  }
}

CascadeResult empty_result(std::size_t n) {
  CascadeResult r;
  r.defaulted.assign(n, false);
  r.default_round.assign(n, -1);
  return r;
}

}  // namespace

ShockDraw draw_shocks(std::span<const BankBalanceSheet> sheets, Seed seed) {
  Rng rng(seed);
  ShockDraw shocks;
  draw_shocks_into(shocks, sheets, rng);
  return shocks;
}

void draw_shocks_into(ShockDraw& shocks, std::span<const BankBalanceSheet> sheets, Rng& rng) {
  shocks.delta_a.resize(static_cast<Eigen::Index>(sheets.size()));
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    shocks.delta_a[static_cast<Eigen::Index>(i)] = sheets[i].sigma * rng.normal();
  }
}

CascadeResult run_bs_cascade(const DirectedNetwork& net, std::span<const BankBalanceSheet> sheets,
                             const ShockDraw& shocks) {
  check_dimensions(net, sheets, shocks);
  const std::size_t n = net.size();
  const auto& da = shocks.delta_a;
  CascadeResult result = empty_result(n);

  std::vector<NodeId> frontier;
  for (NodeId i = 0; i < n; ++i) {
    if (da[i] < -sheets[i].w) {
      result.defaulted[i] = true;
      result.default_round[i] = 0;
      frontier.push_back(i);
    }
  }
  result.n_fundamental = frontier.size();
  result.n_total = frontier.size();

  std::vector<double> loss(n, 0.0);
  std::vector<bool> touched(n, false);
  std::vector<NodeId> candidates;
  std::vector<NodeId> next;
  for (int round = 1; !frontier.empty(); ++round) {
    // Lenders write off their claims on last round's failures.
    candidates.clear();
    for (const NodeId j : frontier) {
      for (const EdgeId e : net.debts_of(j)) {
        const Edge& loan = net.edge(e);
        if (result.defaulted[loan.lender]) continue;
        loss[loan.lender] += loan.loan_size;
        if (!touched[loan.lender]) {
          touched[loan.lender] = true;
          candidates.push_back(loan.lender);
        }
      }
    }
    next.clear();
    for (const NodeId i : candidates) {
      touched[i] = false;
      if (loss[i] - da[i] > sheets[i].w) {
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

CascadeResult run_bs_cascade_async(const DirectedNetwork& net, std::span<const BankBalanceSheet> sheets,
                                   const ShockDraw& shocks, Seed schedule_seed) {
  check_dimensions(net, sheets, shocks);
  const std::size_t n = net.size();
  const auto& da = shocks.delta_a;
  CascadeResult result = empty_result(n);
  for (NodeId i = 0; i < n; ++i) {
    if (da[i] < -sheets[i].w) {
      result.defaulted[i] = true;
      result.default_round[i] = 0;
      ++result.n_fundamental;
    }
  }
  result.n_total = result.n_fundamental;

  Rng rng(schedule_seed);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  for (int sweep = 1;; ++sweep) {
    for (std::size_t k = n; k > 1; --k) std::swap(order[k - 1], order[rng.below(k)]);
    bool changed = false;
    for (const NodeId i : order) {
      if (result.defaulted[i]) continue;
      double loss = 0.0;
      for (const Edge& loan : net.loans_of(i)) {
        if (result.defaulted[loan.borrower]) loss += loan.loan_size;
      }
      if (loss - da[i] > sheets[i].w) {
        result.defaulted[i] = true;
        result.default_round[i] = sweep;
        ++result.n_total;
        result.rounds = static_cast<std::size_t>(sweep);
        changed = true;
      }
    }
    if (!changed) break;
  }
  return result;
}

}  // namespace contagion
