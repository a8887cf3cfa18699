#include "contagion/balance_sheet.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include "contagion/rng.hpp"

namespace contagion {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

// Coefficients of P. J. Acklam's inverse-normal approximation.
constexpr std::array<double, 6> kA{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
constexpr std::array<double, 5> kB{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01, -1.328068155288572e+01};
constexpr std::array<double, 6> kC{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
constexpr std::array<double, 4> kD{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
constexpr double kLowTail = 0.02425;

// Valid for p in (0, 0.5]; callers reflect the upper half.
double acklam(double p) {
  if (p < kLowTail) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
           ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
         (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidParameter(fmt::format("quantile needs 0 < p < 1, got {}", p));
  if (p == 0.5) return 0.0;
  // Solve in the lower tail and reflect, so the result is exactly antisymmetric.
  const bool upper = p > 0.5;
  const double tail = upper ? 1.0 - p : p;
  double z = acklam(tail);
  const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  z -= (normal_cdf(z) - tail) / density;
  return upper ? -z : z;
}

BalanceParams::BalanceParams(double gamma, double delta, ThetaDistribution theta)
    : gamma_(gamma), delta_(delta), theta_(theta), z_tilde_(0.0) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameter(fmt::format("gamma must lie in (0,1), got {}", gamma));
  if (!(delta > 0.0 && delta < 0.5)) throw InvalidParameter(fmt::format("delta must lie in (0,0.5), got {}", delta));
  if (!(theta.lo > 0.0 && theta.lo <= theta.hi && theta.hi < 1.0)) {
    throw InvalidParameter(fmt::format("theta_l must lie in (0,1), got [{}, {}]", theta.lo, theta.hi));
  }
  z_tilde_ = normal_quantile(delta);
}

Eigen::VectorXd draw_thetas(std::size_t n, const ThetaDistribution& theta, Seed seed) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (theta.is_constant()) {
      out[static_cast<Eigen::Index>(i)] = theta.lo;
    } else {
      Rng rng(derive_seed(seed, {i}));
      out[static_cast<Eigen::Index>(i)] = rng.sample(theta);
    }
  }
  return out;
}

std::vector<BankBalanceSheet> build_sheets(const DirectedNetwork& net, const BalanceParams& params,
                                           const Eigen::Ref<const Eigen::VectorXd>& thetas) {
  if (static_cast<std::size_t>(thetas.size()) != net.size()) {
    throw InvalidParameter(fmt::format("{} theta draws for {} banks", thetas.size(), net.size()));
  }
  const double abs_z = -params.z_tilde();
  std::vector<BankBalanceSheet> sheets(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto idx = static_cast<Eigen::Index>(i);
    BankBalanceSheet& s = sheets[i];
    s.l = net.interbank_assets()[idx];
    s.p_bar = net.interbank_liabilities()[idx];
    s.theta_l = thetas[idx];

    // Tentative sheet: riskless assets b̄ = 0, so a = T - l.
    double total = 0.0;
    if (s.l > 0.0) {
      total = s.l / s.theta_l;
      s.a = total - s.l;
    } else {
      // Non-lenders get a unit-scale sheet; they can only fail fundamentally.
      total = 1.0 / params.theta().mean();
      s.a = total;
    }
    s.w = params.gamma() * total;
    s.sigma = s.w / abs_z;

    // Close the identity: riskless assets if liabilities overshoot, deposits otherwise.
    const double claims = s.p_bar + s.w;
    if (claims > total) {
      s.b = claims - total;
      s.d = 0.0;
    } else {
      s.b = 0.0;
      s.d = total - claims;
    }
  }
  return sheets;
}

void write_sheets_csv(std::ostream& out, std::span<const BankBalanceSheet> sheets) {
  out << "bank_id,a,l,b,d,p_bar,w,theta_l,sigma\n";
  for (std::size_t i = 0; i < sheets.size(); ++i) {
    const BankBalanceSheet& s = sheets[i];
    out << fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", i, s.a, s.l, s.b, s.d,
                       s.p_bar, s.w, s.theta_l, s.sigma);
  }
}

}  // namespace contagion
