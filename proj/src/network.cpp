#include "contagion/network.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "contagion/rng.hpp"

namespace contagion {

DirectedNetwork::DirectedNetwork(std::size_t n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
  for (const Edge& e : edges_) {
    if (e.lender >= n_nodes_ || e.borrower >= n_nodes_) {
      throw InvalidParameter(fmt::format("edge {}->{} out of range for {} nodes", e.lender, e.borrower, n_nodes_));
    }
    if (e.lender == e.borrower) throw InvalidParameter(fmt::format("self-loop at node {}", e.lender));
    if (!(e.loan_size > 0.0) || !std::isfinite(e.loan_size)) {
      throw InvalidParameter(fmt::format("loan {}->{} has non-positive size {}", e.lender, e.borrower, e.loan_size));
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& x, const Edge& y) {
    return x.lender != y.lender ? x.lender < y.lender : x.borrower < y.borrower;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (edges_[k].lender == edges_[k - 1].lender && edges_[k].borrower == edges_[k - 1].borrower) {
      throw InvalidParameter(fmt::format("duplicate edge {}->{}", edges_[k].lender, edges_[k].borrower));
    }
  }

  out_offset_.assign(n_nodes_ + 1, 0);
  in_offset_.assign(n_nodes_ + 1, 0);
  assets_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_nodes_));
  liabilities_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_nodes_));
  for (const Edge& e : edges_) {
    ++out_offset_[e.lender + 1];
    ++in_offset_[e.borrower + 1];
    assets_[e.lender] += e.loan_size;
    liabilities_[e.borrower] += e.loan_size;
  }
  for (std::size_t i = 0; i < n_nodes_; ++i) {
    out_offset_[i + 1] += out_offset_[i];
    in_offset_[i + 1] += in_offset_[i];
  }
  in_edges_.resize(edges_.size());
  std::vector<EdgeId> cursor(in_offset_.begin(), in_offset_.end() - 1);
  for (EdgeId id = 0; id < edges_.size(); ++id) {
    in_edges_[cursor[edges_[id].borrower]++] = id;
  }
}

NodeDegrees degrees(const DirectedNetwork& net, NodeId node) {
  if (node >= net.size()) {
    throw InvalidParameter(fmt::format("node {} out of range for {} nodes", node, net.size()));
  }
  return {net.out_degree(node), net.in_degree(node), net.interbank_assets()[node],
          net.interbank_liabilities()[node]};
}

void validate_loan_distribution(const LoanSizeDistribution& dist) {
  if (!(dist.lo > 0.0) || !(dist.lo <= dist.hi) || !std::isfinite(dist.hi)) {
    throw InvalidParameter(fmt::format("loan sizes need 0 < lo <= hi, got [{}, {}]", dist.lo, dist.hi));
  }
}

DirectedNetwork generate_er(std::size_t n, double mean_degree, const LoanSizeDistribution& loans, Seed seed) {
  if (n < 1) throw InvalidParameter("network needs at least one node");
  if (!(mean_degree >= 0.0) || mean_degree > static_cast<double>(n - 1)) {
    throw InvalidParameter(fmt::format("mean degree {} outside [0, {}]", mean_degree, n - 1));
  }
  validate_loan_distribution(loans);

  const double p = n > 1 ? mean_degree / static_cast<double>(n - 1) : 0.0;
  Rng rng(seed);
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(mean_degree * static_cast<double>(n) * 1.1) + 16);
  if (p > 0.0) {
    for (NodeId i = 0; i < n; ++i) {
      for (NodeId j = 0; j < n; ++j) {
        if (i == j) continue;
        if (rng.uniform() < p) edges.push_back({i, j, rng.sample(loans)});
      }
    }
  }
  return {n, std::move(edges)};
}

void write_edge_list(std::ostream& out, const DirectedNetwork& net) {
  out << net.size() << '\n';
  for (const Edge& e : net.edges()) {
    out << fmt::format("{} {} {:.17g}\n", e.lender, e.borrower, e.loan_size);
  }
}

DirectedNetwork read_edge_list(std::istream& in) {
  std::size_t n = 0;
  if (!(in >> n)) throw InvalidParameter("edge list: missing node count header");
  std::vector<Edge> edges;
  std::string lender;
  while (in >> lender) {
    std::string borrower;
    std::string size;
    if (!(in >> borrower >> size)) throw InvalidParameter("edge list: truncated edge line");
    const auto from = parse_number<NodeId>(lender);
    const auto to = parse_number<NodeId>(borrower);
    const auto amount = parse_number<double>(size);
    if (!from || !to || !amount) {
      throw InvalidParameter("edge list: malformed edge '" + lender + " " + borrower + " " + size + "'");
    }
    edges.push_back({*from, *to, *amount});
  }
  return {n, std::move(edges)};
}

}  // namespace contagion
