#include <doctest.h>

#include <cmath>

#include "contagion/bs_cascade.hpp"
#include "contagion/experiment.hpp"
#include "contagion/rng.hpp"

using namespace contagion;

namespace {

BankBalanceSheet sheet_with(double l, double w) {
  BankBalanceSheet s;
  s.l = l;
  s.w = w;
  s.a = 1.0;
  s.d = s.a + s.l - s.w;
  return s;
}

ShockDraw shocks_of(std::initializer_list<double> values) {
  ShockDraw s;
  s.delta_a.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (const double v : values) s.delta_a[i++] = v;
  return s;
}

const BalanceParams kCaseA(0.1, 0.01, ThetaDistribution::constant(0.3));

}  // namespace

TEST_CASE("two failed unit borrowers sink a lender with w = 1") {
  const DirectedNetwork net(3, {{0, 1, 1.0}, {0, 2, 1.0}});
  const std::vector<BankBalanceSheet> sheets{sheet_with(2.0, 1.0), sheet_with(0.0, 1.0), sheet_with(0.0, 1.0)};

  const CascadeResult hit = run_bs_cascade(net, sheets, shocks_of({0.0, -2.0, -2.0}));
  CHECK(hit.defaulted == std::vector<bool>{true, true, true});
  CHECK(hit.default_round == std::vector<int>{1, 0, 0});
  CHECK(hit.n_fundamental == 2);
  CHECK(hit.rounds == 1);

  const CascadeResult cushioned = run_bs_cascade(net, sheets, shocks_of({1.5, -2.0, -2.0}));
  CHECK(cushioned.defaulted == std::vector<bool>{false, true, true});
  CHECK(cushioned.rounds == 0);
}

TEST_CASE("three-bank chain fails back to the first lender in two rounds") {
  // A(0) lends to B(1), B lends to C(2).
  const DirectedNetwork net(3, {{0, 1, 1.0}, {1, 2, 1.0}});
  const auto sheets = build_sheets(net, kCaseA, 1);
  CHECK(sheets[0].w == doctest::Approx(1.0 / 3.0));
  CHECK(sheets[1].w == doctest::Approx(1.0 / 3.0));
  const ShockDraw shocks = shocks_of({0.0, 0.0, -1.0});

  const CascadeResult r = run_bs_cascade(net, sheets, shocks);
  CHECK(r.n_total == 3);
  CHECK(r.n_fundamental == 1);
  CHECK(r.rounds == 2);
  CHECK(r.default_round == std::vector<int>{2, 1, 0});
  CHECK(r.fraction() == 1.0);
  CHECK(brute_force_fixed_point(net, sheets, shocks) == r);
}

TEST_CASE("exact ties survive") {
  const DirectedNetwork net(2, {{0, 1, 1.0}});
  const std::vector<BankBalanceSheet> sheets{sheet_with(1.0, 0.5), sheet_with(0.0, 1.0)};
  // Fundamental boundary Δa = -w.
  CHECK(run_bs_cascade(net, sheets, shocks_of({-0.5, 0.0})).n_total == 0);
  // Contagion boundary: loss 1 - Δa 0.5 == w 0.5.
  CHECK(run_bs_cascade(net, sheets, shocks_of({0.5, -2.0})).defaulted == std::vector<bool>{false, true});
}

TEST_CASE("no shocks, no defaults") {
  const DirectedNetwork net = generate_er(300, 4.0, LoanSizeDistribution::constant(1.0), 8);
  const auto sheets = build_sheets(net, kCaseA, 9);
  ShockDraw zero{Eigen::VectorXd::Zero(300)};
  const CascadeResult r = run_bs_cascade(net, sheets, zero);
  CHECK(r.n_total == 0);
  CHECK(r.rounds == 0);
}

TEST_CASE("draw_shocks") {
  SUBCASE("degenerate volatility gives zero returns") {
    std::vector<BankBalanceSheet> sheets(5);
    CHECK(draw_shocks(sheets, 3).delta_a == Eigen::VectorXd::Zero(5));
  }
  SUBCASE("standardized returns have mean zero") {
    std::vector<BankBalanceSheet> sheets(1000);
    for (std::size_t i = 0; i < sheets.size(); ++i) sheets[i].sigma = 0.1 + 0.01 * static_cast<double>(i);
    Rng rng(12);
    ShockDraw shocks;
    double sum = 0.0;
    for (int t = 0; t < 1000; ++t) {
      draw_shocks_into(shocks, sheets, rng);
      for (std::size_t i = 0; i < sheets.size(); ++i) sum += shocks.delta_a[static_cast<Eigen::Index>(i)] / sheets[i].sigma;
    }
    CHECK(std::abs(sum / 1e6) <= 4.0 / std::sqrt(1e6));
  }
  SUBCASE("seeded draws repeat") {
    const auto sheets = build_sheets(generate_er(50, 2.0, LoanSizeDistribution::constant(1.0), 1), kCaseA, 2);
    CHECK(draw_shocks(sheets, 3).delta_a == draw_shocks(sheets, 3).delta_a);
    CHECK(draw_shocks(sheets, 3).delta_a != draw_shocks(sheets, 4).delta_a);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  const DirectedNetwork net(2, {{0, 1, 1.0}});
  const std::vector<BankBalanceSheet> sheets(2);
  CHECK_THROWS_AS(run_bs_cascade(net, sheets, shocks_of({0.0})), InvalidParameter);
  CHECK_THROWS_AS(run_bs_cascade(net, std::vector<BankBalanceSheet>(3), shocks_of({0.0, 0.0})), InvalidParameter);
}

TEST_CASE("cascade properties on random networks") {
  const BalanceParams heavy(0.1, 0.05, ThetaDistribution::uniform(0.2, 0.4));
  for (Seed seed = 0; seed < 40; ++seed) {
    const auto loans = seed % 2 ? LoanSizeDistribution::uniform(0.2, 1.8) : LoanSizeDistribution::constant(1.0);
    const DirectedNetwork net = generate_er(300, 1.0 + static_cast<double>(seed % 6), loans, seed);
    const auto sheets = build_sheets(net, heavy, seed + 1);
    const ShockDraw shocks = draw_shocks(sheets, seed + 2);
    const CascadeResult r = run_bs_cascade(net, sheets, shocks);
    CAPTURE(seed);

    CHECK(r.n_fundamental <= r.n_total);
    CHECK(r.n_total <= net.size());
    CHECK(r.rounds <= net.size());

    // Every contagious default in round t is explained by borrowers failed
    // before t; every survivor withstands the final default set.
    for (NodeId i = 0; i < net.size(); ++i) {
      const double da = shocks.delta_a[i];
      const int round = r.default_round[i];
      CHECK((round >= 0) == r.defaulted[i]);
      if (round == 0) {
        CHECK(da < -sheets[i].w);
        continue;
      }
      double loss_before = 0.0;
      double loss_final = 0.0;
      for (const Edge& e : net.loans_of(i)) {
        const int br = r.default_round[e.borrower];
        if (br >= 0) loss_final += e.loan_size;
        if (br >= 0 && br < round - 1) loss_before += e.loan_size;
      }
      if (round > 0) {
        CHECK(loss_final - da > sheets[i].w);
        // Not yet triggered one round earlier.
        CHECK_FALSE(loss_before - da > sheets[i].w);
      } else {
        CHECK_FALSE(loss_final - da > sheets[i].w);
      }
      // No contagious default when the cushion exceeds the whole loan book.
      if (sheets[i].w > sheets[i].l && da >= 0.0) CHECK(round < 0);
    }

    const CascadeResult async = run_bs_cascade_async(net, sheets, shocks, seed + 3);
    CHECK(async.defaulted == r.defaulted);
    CHECK(async.n_total == r.n_total);
    CHECK(async.n_fundamental == r.n_fundamental);
  }
}
