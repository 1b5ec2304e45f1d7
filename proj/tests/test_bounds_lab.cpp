#include <gtest/gtest.h>

#include "oracles.hpp"
#include "powertrace/bounds_lab.hpp"
#include "powertrace/fit.hpp"
#include "powertrace/instances.hpp"

using namespace powertrace;
using namespace powertrace::bounds;

namespace {
double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST(CyclicPermutation, SwapAndOrder) {
  ComplexMatrix swap = ComplexMatrix::Zero(4, 4);
  swap(0, 0) = swap(1, 2) = swap(2, 1) = swap(3, 3) = 1.0;
  EXPECT_LT(max_abs(cyclic_permutation(2, 2) - swap), 1e-15);
  for (int k : {2, 3, 4}) {
    const ComplexMatrix p = cyclic_permutation(k, 2);
    EXPECT_LT(max_abs(p - oracle::cyclic_shift(k, 2)), 1e-15);
    EXPECT_LT(max_abs(oracle::dense_power(p, k) - identity(p.rows())), 1e-15);
  }
  EXPECT_LT(max_abs(cyclic_permutation(3, 3) - oracle::cyclic_shift(3, 3)), 1e-15);
}

TEST(CyclicPermutation, TraceIdentity) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto rho = random_density(1, 2, 100 + s);
    const Observable o = random_hermitian(1, 200 + s);
    for (int k = 1; k <= 4; ++k)
      ASSERT_LT(std::abs(permutation_trace(rho, o.mat(), k) - trace_power_obs_oracle(rho, o, k)), 1e-9);
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto rho = random_density(2, 4, 300 + s);
    const Observable o = random_hermitian(2, 400 + s);
    for (int k = 1; k <= 3; ++k)
      ASSERT_LT(std::abs(permutation_trace(rho, o.mat(), k) - trace_power_obs_oracle(rho, o, k)), 1e-9);
  }
}

TEST(SwapTest, PureStateIdentityObservable) {
  const auto pure = random_density(1, 1, 2);
  const auto r = swap_test_estimate(pure, Observable(identity(2)), 3, 500, 1);
  EXPECT_NEAR(r.mean, 1.0, 1e-12);
  EXPECT_EQ(r.copies_used, 1500);
  EXPECT_FALSE(r.surrogate);
}

TEST(SwapTest, MaximallyMixedPurity) {
  const auto r = swap_test_estimate(maximally_mixed(1), Observable(identity(2)), 3, 20000, 9);
  EXPECT_NEAR(r.exact_mean, 0.25, 1e-15);
  EXPECT_LE(std::abs(r.mean - 0.25), 4.0 * r.stderr_);
}

TEST(SwapTest, UnbiasedOverManyShots) {
  const auto rho = random_density(1, 2, 13);
  const Observable o = random_hermitian(1, 14);
  const auto r = swap_test_estimate(rho, o, 3, 100000, 15);
  EXPECT_LE(std::abs(r.mean - trace_power_obs_oracle(rho, o, 3).real()), 5.0 * r.stderr_);
  EXPECT_NEAR(r.stderr_ * r.stderr_ * 100000, r.shot_variance, 0.05 * r.shot_variance + 1e-3);
}

TEST(SwapTest, TwoQubitCircuit) {
  const auto rho = random_density(2, 3, 23);
  const Observable o(pauli_string("ZX"));
  const auto r = swap_test_estimate(rho, o, 2, 40000, 24);
  EXPECT_FALSE(r.surrogate);
  EXPECT_LE(std::abs(r.mean - trace_power_obs_oracle(rho, o, 2).real()), 5.0 * r.stderr_);
}

TEST(SwapTest, StderrExponent) {
  const auto rho = random_density(1, 2, 33);
  const Observable o = random_hermitian(1, 34);
  const double truth = trace_power_obs_oracle(rho, o, 2).real();
  std::vector<double> xs, ys;
  for (long long shots : {100LL, 1000LL, 10000LL}) {
    double sq = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
      const double e = swap_test_estimate(rho, o, 2, shots, 1000 * shots + r).mean - truth;
      sq += e * e;
    }
    xs.push_back(static_cast<double>(shots));
    ys.push_back(std::sqrt(sq / reps));
  }
  EXPECT_NEAR(loglog_slope(xs, ys), -0.5, 0.05);
}

TEST(SwapTest, SurrogateAboveCap) {
  const auto rho = random_density(1, 2, 3);
  const Observable o(pauli_z());
  const auto r = swap_test_estimate(rho, o, 20, 1000, 4);
  EXPECT_TRUE(r.surrogate);
  EXPECT_NEAR(r.stderr_, std::sqrt(r.shot_variance / 1000.0), 1e-15);
  EXPECT_DOUBLE_EQ(r.exact_mean, trace_power_obs_oracle(rho, o, 20).real());
}

TEST(SwapTest, CopiesForEps) {
  const auto rho = random_density(1, 2, 4);
  const Observable z(pauli_z());
  EXPECT_NEAR(z_for_confidence(0.95), 1.959963984540054, 1e-12);
  const auto mom = swap_test_moments(rho, z, 5);
  const double z2 = std::pow(z_for_confidence(0.9), 2);
  EXPECT_EQ(swap_copies_for_eps(rho, z, 5, 0.05, 0.9), 5 * static_cast<long long>(std::ceil(z2 * mom.variance / 0.0025)));
  EXPECT_THROW(z_for_confidence(1.0), ValidationError);
}

TEST(Helstrom, Examples) {
  const auto t = helstrom_experiment(10, 0.5, {0, 5, 16, 40});
  EXPECT_DOUBLE_EQ(t.rows[0].success_lower, 0.5);
  EXPECT_DOUBLE_EQ(t.rows[0].helstrom_success, 0.5);
  EXPECT_EQ(t.m_star, 16);
  EXPECT_LE(std::pow(0.95, t.m_star), 4.0 / 9.0);
  EXPECT_GT(std::pow(0.95, t.m_star - 1), 4.0 / 9.0);
  for (const auto& r : t.rows) EXPECT_LE(r.success_lower, r.helstrom_success + 1e-15);
  EXPECT_EQ(helstrom_experiment(80, 0.5, {1}).m_star, 130);
}

TEST(Helstrom, AnalyticTraceDistanceMatchesDense) {
  const double ep = 0.05;
  const auto rho0 = pure_density(basis_state(2, 0));
  const auto rho1 = helstrom_rho1(ep);
  for (int m : {1, 2, 5}) {
    const auto t = helstrom_experiment(10, 0.5, {m});
    const double dense = trace_distance(tensor_power(rho0, m), tensor_power(rho1, m));
    EXPECT_NEAR(t.rows[0].helstrom_success, 0.5 + 0.5 * dense, 1e-12);
    EXPECT_NEAR(t.rows[0].fidelity, fidelity(tensor_power(rho0, m), tensor_power(rho1, m)), 1e-9);
  }
}

TEST(Helstrom, LinearInK) {
  std::vector<double> ks, ms;
  for (int k : {10, 20, 40, 80}) {
    ks.push_back(k);
    ms.push_back(helstrom_experiment(k, 0.5, {0}).m_star);
  }
  // least squares slope through the points, in copies per unit k
  double mk = 0.0, mm = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i] / 4.0;
    mm += ms[i] / 4.0;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxy += (ks[i] - mk) * (ms[i] - mm);
    sxx += (ks[i] - mk) * (ks[i] - mk);
  }
  const double slope = sxy / sxx;
  const double ref = ms[0] / 10.0;
  EXPECT_GE(slope, 0.8 * ref);
  EXPECT_LE(slope, 1.2 * ref);
  EXPECT_THROW(helstrom_experiment(10, 1.5, {1}), ValidationError);
}

TEST(LeCam, Examples) {
  const auto lc = lecam_construction(Observable(pauli_z()), 0.1);
  EXPECT_NEAR(lc.delta, 0.05, 1e-15);
  EXPECT_NEAR(lc.expectation0, 0.1, 1e-12);
  EXPECT_NEAR(lc.expectation1, -0.1, 1e-12);
  EXPECT_NEAR(lc.kl, bernoulli_kl(0.55, 0.45), 1e-15);
}

// D(1/2 + d || 1/2 - d) = 2d ln((1 + 2d)/(1 - 2d)) = 8 d^2 + O(d^4).
TEST(LeCam, KlOverDeltaSquaredLimit) {
  for (double d : {1e-2, 1e-3}) {
    const double kl = bernoulli_kl(0.5 + d, 0.5 - d);
    EXPECT_NEAR(kl / (d * d), 8.0, 2e-3);
  }
}

TEST(LeCam, CopyBoundExponent) {
  const Observable z(2.0 * pauli_z());
  std::vector<double> xs, ys;
  for (double eps : {0.2, 0.1, 0.05, 0.02, 0.01}) {
    xs.push_back(z.norm() / eps);
    ys.push_back(1.0 / lecam_construction(z, eps).kl);
  }
  EXPECT_NEAR(loglog_slope(xs, ys), 2.0, 0.1);
}

TEST(LeCam, OneSidedSpectrumRejected) {
  EXPECT_THROW(lecam_construction(Observable(basis_op(2, 0, 0)), 0.1), ConstructionError);
  EXPECT_THROW(lecam_construction(Observable(pauli_z()), 1.5), ValidationError);
}

TEST(Hybrid, ClosedFormAndCrossing) {
  const Observable z(pauli_z());
  const auto zero = hybrid_bound_demo(z, 0.0, {1, 2});
  EXPECT_EQ(zero.norm_direct, 0.0);
  const auto h = hybrid_bound_demo(z, 0.15, {1, 2, 4});
  EXPECT_NEAR(h.delta, 0.3, 1e-15);
  EXPECT_NEAR(h.norm_direct, 0.30351539856506243, 1e-9);
  EXPECT_NEAR(h.norm_direct, h.norm_closed_form, 1e-9);
  EXPECT_NEAR(h.rows[2].cumulative_bound, 4.0 * h.norm_direct, 1e-15);

  const Observable o = random_hermitian(2, 3);
  std::vector<double> xs, ys;
  for (double eps : {1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4}) {
    const auto d = hybrid_bound_demo(o, eps, {1});
    EXPECT_NEAR(d.norm_direct, d.norm_closed_form, 1e-9);
    xs.push_back(o.norm() / eps);
    ys.push_back(d.t_star);
  }
  EXPECT_NEAR(loglog_slope(xs, ys), 1.0, 0.05);
  EXPECT_THROW(hybrid_bound_demo(z, 0.6, {1}), ValidationError);
}

namespace {
Observable first_qubit_accept(int r) { return Observable(embed(basis_op(2, 1, 1), {0}, r)); }
}  // namespace

TEST(Bqp, AcceptingAndRejectingCircuits) {
  const int r = 2;
  // X on the first qubit: |00> -> |10>, accepted with certainty.
  const ComplexMatrix flip = embed(pauli_x(), {0}, r);
  const auto acc = bqp_instance(flip, first_qubit_accept(r), 10, 5);
  EXPECT_NEAR(acc.p_x, 1.0, 1e-15);
  EXPECT_NEAR(acc.oracle_value, std::pow(acc.lambda, 5), 1e-12);
  EXPECT_LE(acc.identity_defect, 1e-10);
  const auto rej = bqp_instance(identity(4), first_qubit_accept(r), 10, 5);
  EXPECT_NEAR(rej.oracle_value, 0.0, 1e-15);
  EXPECT_EQ(rej.phi_index, 1);  // |01>, the last basis state the projector annihilates
  EXPECT_NEAR(acc.threshold_a, 2.0 * acc.threshold_b, 1e-15);
}

TEST(Bqp, IdentityOnRandomCircuits) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto u = random_unitary(8, s);
    for (double q : {2.0, 10.0}) {
      for (int k : {1, 5, 20}) {
        const auto b = bqp_instance(u, first_qubit_accept(3), q, k);
        ASSERT_LE(b.identity_defect, 1e-10);
        ASSERT_TRUE(b.bernoulli_holds);
        ASSERT_GT(b.lambda, 0.0);
        ASSERT_LT(b.lambda, 1.0);
      }
    }
  }
}

TEST(Bqp, BernoulliBound) {
  for (double q : {2.0, 10.0, 100.0})
    for (int k : {1, 5, 50}) EXPECT_TRUE(bqp_instance(identity(2), Observable(basis_op(2, 1, 1)), q, k).bernoulli_holds);
}

TEST(Bqp, NullStateFallbackAndErrors) {
  // Projector onto |+> annihilates no basis state; |-> is used instead.
  ComplexMatrix plus = ComplexMatrix::Constant(2, 2, 0.5);
  const auto b = bqp_instance(hadamard(), Observable(plus), 10, 3);
  EXPECT_EQ(b.phi_index, -1);
  EXPECT_NEAR(b.p_x, 1.0, 1e-12);
  EXPECT_LE(b.identity_defect, 1e-10);
  EXPECT_THROW(bqp_instance(identity(2), Observable(identity(2)), 10, 3), ConstructionError);
  EXPECT_THROW(bqp_instance(identity(2), Observable(0.5 * identity(2)), 10, 3), ValidationError);
  EXPECT_THROW(bqp_instance(identity(2), Observable(basis_op(2, 1, 1)), 1.0, 1), ValidationError);
}
