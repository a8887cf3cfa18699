#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <span>
#include <vector>

#include "contagion/common.hpp"
#include "contagion/network.hpp"

namespace contagion {

/// Standard normal CDF.
double normal_cdf(double x);

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Newton step on normal_cdf; |Φ(z) - p| stays below 1e-12.
double normal_quantile(double p);

/// Common parameters of every bank's tentative balance sheet.
class BalanceParams {
 public:
  /// Requires 0 < gamma < 1, 0 < delta < 0.5 and theta support inside (0, 1).
  BalanceParams(double gamma, double delta, ThetaDistribution theta);

  [[nodiscard]] double gamma() const { return gamma_; }
  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] const ThetaDistribution& theta() const { return theta_; }
  /// Φ⁻¹(delta), always negative.
  [[nodiscard]] double z_tilde() const { return z_tilde_; }

 private:
  double gamma_;
  double delta_;
  ThetaDistribution theta_;
  double z_tilde_;
};

struct BankBalanceSheet {
  double a = 0.0;  ///< external (risky) assets
  double l = 0.0;  ///< interbank assets
  double b = 0.0;  ///< riskless assets
  double d = 0.0;  ///< deposits
  double p_bar = 0.0;  ///< interbank liabilities
  double w = 0.0;  ///< net worth
  double theta_l = 0.0;  ///< tentative interbank share of total assets
  double sigma = 0.0;  ///< std. dev. of the external-asset return

  [[nodiscard]] double total_assets() const { return a + l + b; }
  [[nodiscard]] double total_liabilities() const { return d + p_bar + w; }
};

/// One θ_l draw per bank, each from its own stream derive_seed(seed, {i}).
Eigen::VectorXd draw_thetas(std::size_t n, const ThetaDistribution& theta, Seed seed);

std::vector<BankBalanceSheet> build_sheets(const DirectedNetwork& net, const BalanceParams& params,
                                           const Eigen::Ref<const Eigen::VectorXd>& thetas);

inline std::vector<BankBalanceSheet> build_sheets(const DirectedNetwork& net, const BalanceParams& params,
                                                  Seed seed) {
  return build_sheets(net, params, draw_thetas(net.size(), params.theta(), seed));
}

/// CSV with header `bank_id,a,l,b,d,p_bar,w,theta_l,sigma`.
void write_sheets_csv(std::ostream& out, std::span<const BankBalanceSheet> sheets);

}  // namespace contagion
