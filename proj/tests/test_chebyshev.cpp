#include <gtest/gtest.h>

#include "oracles.hpp"
#include "powertrace/chebyshev.hpp"
#include "powertrace/fit.hpp"
#include "powertrace/rng.hpp"

using namespace powertrace;
using namespace powertrace::chebyshev;

TEST(ChebyshevPolyTest, ParityIsEnforced) {
  EXPECT_THROW(ChebyshevPoly({{1, 0.5}, {2, 0.5}}, Parity::Even), ValidationError);
  EXPECT_NO_THROW(ChebyshevPoly({{1, 0.5}, {2, 0.5}}, Parity::None));
  EXPECT_THROW(ChebyshevPoly({{-1, 1.0}}, Parity::None), ValidationError);
  EXPECT_EQ(ChebyshevPoly({{0, 1.0}, {4, 0.0}}, Parity::Even).degree(), 0);
}

TEST(PowerExpansion, SmallCases) {
  const auto p1 = power_expansion(1);
  EXPECT_EQ(p1.coeffs().size(), 1u);
  EXPECT_DOUBLE_EQ(p1.coeff(1), 1.0);
  const auto p2 = power_expansion(2);
  EXPECT_NEAR(p2.coeff(0), 0.5, 1e-15);
  EXPECT_NEAR(p2.coeff(2), 0.5, 1e-15);
  const auto p3 = power_expansion(3);
  EXPECT_NEAR(p3.coeff(1), 0.75, 1e-15);
  EXPECT_NEAR(p3.coeff(3), 0.25, 1e-15);
  EXPECT_EQ(p3.parity(), Parity::Odd);
  EXPECT_THROW(power_expansion(0), ValidationError);
}

TEST(PowerExpansion, MatchesPascalTriangle) {
  for (int k : {4, 9, 16, 33, 60}) {
    const auto p = power_expansion(k);
    const auto want = oracle::power_coeffs(k);
    for (int n = 0; n <= k; ++n) {
      EXPECT_NEAR(p.coeff(n), static_cast<double>(want[static_cast<std::size_t>(n)]), 1e-14) << "k=" << k << " n=" << n;
    }
  }
}

TEST(PowerExpansion, NonnegativeAndSumsToOne) {
  for (int k = 1; k <= 200; ++k) {
    const auto p = power_expansion(k);
    double sum = 0.0;
    for (const auto& [n, c] : p.coeffs()) {
      EXPECT_GE(c, 0.0);
      sum += c;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12) << "k=" << k;
    EXPECT_NEAR(clenshaw_eval(p, 1.0), 1.0, 1e-12);
  }
}

TEST(RequiredDegree, Examples) {
  EXPECT_EQ(required_degree(50, 0.01), 24);
  EXPECT_EQ(required_degree(50, 1e-3), 28);
  EXPECT_EQ(required_degree(2, 1.0), 2);
  EXPECT_EQ(required_degree(8, 0.7358), 4);
  EXPECT_EQ(required_degree(3, 0.025), 3);  // capped at the exact degree
  EXPECT_THROW(required_degree(4, 0.0), ValidationError);
  EXPECT_THROW(required_degree(4, 1.5), ValidationError);
}

TEST(RequiredDegree, ParityMatchesPower) {
  for (int k = 1; k <= 120; ++k)
    for (double eps : {0.5, 0.05, 1e-3, 1e-6}) EXPECT_EQ((required_degree(k, eps) - k) % 2, 0);
}

TEST(Truncate, Examples) {
  const auto r0 = truncate(power_expansion(2), 0, 2);
  EXPECT_NEAR(r0.tail_exact, 0.5, 1e-15);
  EXPECT_EQ(truncate(power_expansion(7), 7).tail_exact, 0.0);
  EXPECT_EQ(truncate(power_expansion(7), 9).tail_exact, 0.0);
  const auto r = truncate(power_expansion(8), 4, 8);
  EXPECT_LE(r.tail_exact, 2.0 * std::exp(-1.0));
  EXPECT_NEAR(r.tail_chernoff, 2.0 * std::exp(-1.0), 1e-15);
  EXPECT_TRUE(std::isnan(truncate(power_expansion(8), 4).tail_chernoff));
}

TEST(Truncate, TailNeverExceedsChernoff) {
  for (int k = 1; k <= 200; ++k) {
    const auto full = power_expansion(k);
    for (int m = 0; m <= k; ++m) {
      const auto r = truncate(full, m, k);
      ASSERT_LE(r.tail_exact, r.tail_chernoff) << "k=" << k << " m=" << m;
    }
  }
}

TEST(Truncate, EveryTruncationBoundedByOne) {
  for (int k : {5, 12, 31}) {
    const auto full = power_expansion(k);
    for (int m = k % 2; m <= k; m += 2) EXPECT_LE(sup_norm_scan(truncate(full, m).kept, 1024), 1.0 + 1e-12);
  }
}

TEST(Clenshaw, BasisValues) {
  EXPECT_NEAR(clenshaw_eval(ChebyshevPoly::basis(3), 0.5), -1.0, 1e-15);
  for (int n = 0; n < 12; ++n)
    for (double x : {-1.0, -0.3, 0.0, 0.41, 1.0}) EXPECT_NEAR(clenshaw_eval(ChebyshevPoly::basis(n), x), oracle::chebyshev_t(n, x), 1e-13);
  EXPECT_THROW(clenshaw_eval(ChebyshevPoly::basis(2), 1.01), ValidationError);
}

TEST(Clenshaw, ExpansionReproducesPowers) {
  Rng rng = make_rng(77);
  for (int k = 1; k <= 60; ++k) {
    const auto p = power_expansion(k);
    for (int i = 0; i < 1000; ++i) {
      const double x = 2.0 * uniform01(rng) - 1.0;
      ASSERT_NEAR(clenshaw_eval(p, x), std::pow(x, k), 1e-10) << "k=" << k;
    }
  }
}

TEST(Clenshaw, TruncatedAtOneIsKeptSum) {
  const auto r = truncate(power_expansion(20), 8);
  double kept = 0.0;
  for (const auto& [n, c] : r.kept.coeffs()) kept += c;
  EXPECT_NEAR(clenshaw_eval(r.kept, 1.0), kept, 1e-14);
}

TEST(SupError, Examples) {
  EXPECT_LE(sup_error_scan(power_expansion(30), 30, kScanNodes), 1e-12);
  const int d = required_degree(50, 1e-3);
  EXPECT_LE(sup_error_scan(truncate(power_expansion(50), d).kept, 50, kScanNodes), 1e-3);
  EXPECT_GT(sup_error_scan(truncate(power_expansion(10), 2).kept, 10, kScanNodes), 0.1);
}

TEST(SupError, GridContainsEndpoints) {
  const auto g = chebyshev_grid(16);
  EXPECT_NE(std::find(g.begin(), g.end(), 1.0), g.end());
  EXPECT_NE(std::find(g.begin(), g.end(), -1.0), g.end());
}

TEST(MinimalDegree, SquareRootLaw) {
  std::vector<double> ks, ds;
  for (int k : {8, 16, 32, 64, 128}) {
    const int d = minimal_empirical_degree(k, 1e-3);
    EXPECT_LE(d, required_degree(k, 1e-3));
    EXPECT_LE(sup_error_scan(truncate(power_expansion(k), d).kept, k, kScanNodes), 1e-3);
    if (d >= 2) {
      EXPECT_GT(sup_error_scan(truncate(power_expansion(k), d - 2).kept, k, kScanNodes), 1e-3);
    }
    ks.push_back(k);
    ds.push_back(d);
  }
  const double slope = loglog_slope(ks, ds);
  EXPECT_GE(slope, 0.4);
  EXPECT_LE(slope, 0.6);
}

TEST(TranscendentalDegree, RegressionAndShape) {
  EXPECT_NEAR(degree_lower_bound_solve(100, 1e-3), 34.37526801631292, 1e-8);
  EXPECT_NEAR(degree_lower_bound_solve(10, 0.1), 5.38864506615496, 1e-8);
  double prev = 0.0;
  for (int k = 2; k <= 300; k += 7) {
    const double d = degree_lower_bound_solve(k, 1e-2);
    EXPECT_GE(d, prev);
    EXPECT_LE(d, std::sqrt(2.0 * k * std::log(std::numbers::pi * std::numbers::pi / 2e-2)));
    prev = d;
  }
  EXPECT_THROW(degree_lower_bound_solve(1, 1e-3), ValidationError);
  EXPECT_THROW(degree_lower_bound_solve(10, 0.2), ValidationError);
}

TEST(Fit, LogLogSlope) {
  EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {3, 6, 12, 24}), 1.0, 1e-14);
  EXPECT_NEAR(loglog_slope({1, 4, 16}, {1, 2, 4}), 0.5, 1e-14);
  EXPECT_THROW(loglog_slope({1}, {1}), ValidationError);
  EXPECT_THROW(loglog_slope({1, 2}, {0, 1}), ValidationError);
}
