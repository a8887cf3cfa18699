#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <span>
#include <vector>

#include "contagion/common.hpp"

namespace contagion {

/// A loan: `lender` extended `loan_size` to `borrower`. Stored in the
/// direction of the original flow of funds; losses travel the other way.
struct Edge {
  NodeId lender = 0;
  NodeId borrower = 0;
  double loan_size = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Immutable directed interbank network.
///
/// Edges are kept in canonical order (lender, then borrower), so the edges a
/// bank lends on form one contiguous block. The reverse direction is cached as
/// edge ids grouped by borrower.
class DirectedNetwork {
 public:
  DirectedNetwork() = default;

  /// Throws InvalidParameter on self-loops, duplicate pairs, out-of-range ids
  /// or non-positive loan sizes.
  DirectedNetwork(std::size_t n_nodes, std::vector<Edge> edges);

  [[nodiscard]] std::size_t size() const { return n_nodes_; }
  [[nodiscard]] std::size_t edge_count() const { return edges_.size(); }
  [[nodiscard]] std::span<const Edge> edges() const { return edges_; }
  [[nodiscard]] const Edge& edge(EdgeId e) const { return edges_[e]; }

  /// Loans extended by `lender` (its borrowers), as a contiguous edge block.
  [[nodiscard]] std::span<const Edge> loans_of(NodeId lender) const {
    return {edges_.data() + out_offset_[lender], edges_.data() + out_offset_[lender + 1]};
  }
  [[nodiscard]] EdgeId first_loan_of(NodeId lender) const { return out_offset_[lender]; }

  /// Ids of edges on which `borrower` owes (its lenders).
  [[nodiscard]] std::span<const EdgeId> debts_of(NodeId borrower) const {
    return {in_edges_.data() + in_offset_[borrower], in_edges_.data() + in_offset_[borrower + 1]};
  }

  [[nodiscard]] std::size_t out_degree(NodeId i) const { return out_offset_[i + 1] - out_offset_[i]; }
  [[nodiscard]] std::size_t in_degree(NodeId i) const { return in_offset_[i + 1] - in_offset_[i]; }

  /// l_i: total interbank assets per bank.
  [[nodiscard]] const Eigen::VectorXd& interbank_assets() const { return assets_; }
  /// p̄_i: total interbank liabilities per bank.
  [[nodiscard]] const Eigen::VectorXd& interbank_liabilities() const { return liabilities_; }

  friend bool operator==(const DirectedNetwork& a, const DirectedNetwork& b) {
    return a.n_nodes_ == b.n_nodes_ && a.edges_ == b.edges_;
  }

 private:
  std::size_t n_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<EdgeId> out_offset_{0};
  std::vector<EdgeId> in_offset_{0};
  std::vector<EdgeId> in_edges_;
  Eigen::VectorXd assets_;
  Eigen::VectorXd liabilities_;
};

struct NodeDegrees {
  std::size_t out_degree = 0;
  std::size_t in_degree = 0;
  double l = 0.0;
  double p_bar = 0.0;

  friend bool operator==(const NodeDegrees&, const NodeDegrees&) = default;
};

NodeDegrees degrees(const DirectedNetwork& net, NodeId node);

void validate_loan_distribution(const LoanSizeDistribution& dist);

/// Directed Erdős–Rényi graph: every ordered pair (i, j), i != j, is a loan
/// from i to j with probability mean_degree / (n - 1).
DirectedNetwork generate_er(std::size_t n, double mean_degree, const LoanSizeDistribution& loans, Seed seed);

/// Plain-text edge list: `n_nodes` on the first line, then
/// `lender borrower loan_size` per edge in canonical order.
void write_edge_list(std::ostream& out, const DirectedNetwork& net);
DirectedNetwork read_edge_list(std::istream& in);

}  // namespace contagion
