#include <gtest/gtest.h>

#include "oracles.hpp"
#include "powertrace/blockenc.hpp"
#include "powertrace/instances.hpp"
#include "powertrace/numkernel.hpp"

using namespace powertrace;

namespace {

ComplexMatrix diag2(double a, double b) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(Kron, IdentityTimesIdentity) { EXPECT_LT(max_abs(kron(identity(2), identity(2)) - identity(4)), 1e-15); }

TEST(Kron, XXFlipsBothBits) {
  const ComplexVector out = kron(pauli_x(), pauli_x()) * basis_state(4, 0);
  EXPECT_LT((out - basis_state(4, 3)).norm(), 1e-15);
}

TEST(Kron, DiagonalProduct) {
  const ComplexMatrix got = kron(diag2(1, 2), diag2(3, 4));
  ComplexMatrix want = ComplexMatrix::Zero(4, 4);
  want.diagonal() << 3.0, 4.0, 6.0, 8.0;
  EXPECT_LT(max_abs(got - want), 1e-15);
}

TEST(Kron, MatchesIndexFormula) {
  Rng rng = make_rng(11);
  const ComplexMatrix a = gaussian_matrix(2, 2, rng);
  const ComplexMatrix b = gaussian_matrix(4, 4, rng);
  EXPECT_LT(max_abs(kron(a, b) - oracle::naive_kron(a, b)), 1e-14);
}

TEST(Kron, RefusesAboveCap) {
  const int saved = qubit_cap();
  set_qubit_cap(3);
  EXPECT_THROW(kron(identity(4), identity(4)), ResourceError);
  set_qubit_cap(saved);
}

TEST(Eigh, KnownSpectra) {
  auto z = eigh(pauli_z());
  EXPECT_NEAR(z.eigenvalues(0), -1.0, 1e-15);
  EXPECT_NEAR(z.eigenvalues(1), 1.0, 1e-15);
  auto half = eigh(identity(2) / 2.0);
  EXPECT_NEAR(half.eigenvalues(0), 0.5, 1e-15);
  EXPECT_NEAR(half.eigenvalues(1), 0.5, 1e-15);
  auto d = eigh(diag2(0.7, 0.3));
  EXPECT_NEAR(d.eigenvalues(0), 0.3, 1e-15);
  EXPECT_NEAR(d.eigenvalues(1), 0.7, 1e-15);
}

TEST(Eigh, RejectsNonHermitian) {
  ComplexMatrix m = pauli_z();
  m(0, 1) = 0.5;
  EXPECT_THROW(eigh(m), ValidationError);
}

TEST(PartialTrace, BellStateGivesMaximallyMixed) {
  ComplexVector bell = ComplexVector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  EXPECT_LT(max_abs(partial_trace(bell, 2, 2, Keep::A) - identity(2) / 2.0), 1e-15);
}

TEST(PartialTrace, ProductState) {
  const ComplexVector psi = basis_state(4, 1);  // |0>|1>
  EXPECT_LT(max_abs(partial_trace(psi, 2, 2, Keep::A) - basis_op(2, 0, 0)), 1e-15);
  EXPECT_LT(max_abs(partial_trace(psi, 2, 2, Keep::B) - basis_op(2, 1, 1)), 1e-15);
}

TEST(PartialTrace, MatchesIndexSums) {
  const auto rho = random_density(3, 8, 5);
  EXPECT_LT(max_abs(partial_trace(rho.mat(), 2, 4, Keep::A) - oracle::trace_out_b(rho.mat(), 2, 4)), 1e-14);
  EXPECT_LT(max_abs(partial_trace(rho.mat(), 2, 4, Keep::B) - oracle::trace_out_a(rho.mat(), 2, 4)), 1e-14);
}

TEST(PartialTrace, RandomPureStateHasUnitTrace) {
  const auto rho = random_density(2, 1, 9);
  const ComplexVector psi = rho.spectrum().eigenvectors.col(3);
  EXPECT_NEAR(partial_trace(psi, 2, 2, Keep::A).trace().real(), 1.0, 1e-12);
}

TEST(DensityMatrixTest, ValidatesInput) {
  EXPECT_THROW(DensityMatrix(diag2(0.6, 0.6)), ValidationError);
  EXPECT_THROW(DensityMatrix(diag2(1.2, -0.2)), ValidationError);
  EXPECT_THROW(DensityMatrix(ComplexMatrix::Identity(3, 3) / 3.0), ValidationError);
  ComplexMatrix bad = diag2(0.5, 0.5);
  bad(0, 1) = 0.1;
  EXPECT_THROW(DensityMatrix{bad}, ValidationError);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(DensityMatrix{bad}, ValidationError);
}

TEST(Oracle, EndMatterStates) {
  const auto rho0 = pure_density(basis_state(2, 0));
  const ComplexMatrix p0 = basis_op(2, 0, 0);
  for (int k : {1, 2, 5, 17}) EXPECT_NEAR(trace_power_obs_oracle(rho0, p0, k).real(), 1.0, 1e-15);
  const auto mixed = maximally_mixed(1);
  for (int k : {1, 3, 8}) EXPECT_NEAR(std::abs(trace_power_obs_oracle(mixed, pauli_z(), k)), 0.0, 1e-15);
  const DensityMatrix rho1(diag2(0.9, 0.1));
  EXPECT_NEAR(trace_power_obs_oracle(rho1, p0, 3).real(), 0.729, 1e-14);
  EXPECT_NEAR((oracle::dense_power(rho1.mat(), 3) * p0).trace().real(), 0.729, 1e-14);
}

TEST(Oracle, RejectsZeroPower) { EXPECT_THROW(trace_power_obs_oracle(maximally_mixed(1), pauli_z(), 0), ValidationError); }

TEST(Oracle, UnitTraceForIdentity) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const int q = 1 + static_cast<int>(s % 3);
    const auto rho = random_density(q, 1 + static_cast<int>(s % (1u << q)), s);
    EXPECT_NEAR(trace_power_obs_oracle(rho, identity(rho.dim()), 1).real(), 1.0, 1e-12);
  }
}

TEST(Oracle, MatchesRepeatedMultiplication) {
  for (std::uint64_t s = 0; s < 12; ++s) {
    const int q = 1 + static_cast<int>(s % 4);  // dim up to 16
    const auto rho = random_density(q, 1 << q, 100 + s);
    const Observable o = random_hermitian(q, 200 + s);
    for (int k : {1, 2, 7, 20}) {
      const cplx want = (oracle::dense_power(rho.mat(), k) * o.mat()).trace();
      EXPECT_LT(std::abs(trace_power_obs_oracle(rho, o, k) - want), 1e-9);
    }
  }
}

TEST(Distances, BasicValues) {
  const auto zero = pure_density(basis_state(2, 0));
  const auto one = pure_density(basis_state(2, 1));
  EXPECT_NEAR(trace_distance(zero, one), 1.0, 1e-15);
  const auto rho = random_density(2, 3, 4);
  EXPECT_NEAR(fidelity(rho, rho), 1.0, 1e-9);
  const DensityMatrix rho1(diag2(0.8, 0.2));
  EXPECT_NEAR(fidelity(zero, rho1), 0.8, 1e-12);
  EXPECT_NEAR(fidelity(tensor_power(zero, 3), tensor_power(rho1, 3)), std::pow(0.8, 3), 1e-12);
}

TEST(Distances, FuchsVanDeGraaf) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const auto a = random_density(2, 1 + static_cast<int>(s % 4), 300 + s);
    const auto b = random_density(2, 1 + static_cast<int>((s / 4) % 4), 400 + s);
    const double t = trace_distance(a, b);
    const double f = fidelity(a, b);
    EXPECT_LE(1.0 - std::sqrt(f), t + 1e-9);
    // Equality for pure pairs; sqrt of a clipped zero eigenvalue costs ~1e-8.
    EXPECT_LE(t, std::sqrt(1.0 - f) + 1e-7);
  }
}

TEST(Norms, OperatorAndSchatten) {
  ComplexMatrix m = pauli_x() + pauli_z();
  EXPECT_NEAR(op_norm(m), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(schatten1(m), 2.0 * std::sqrt(2.0), 1e-14);
}

TEST(Registers, ApplyOnQubitsMatchesEmbed) {
  Rng rng = make_rng(3);
  const ComplexMatrix u = random_unitary(4, rng);
  // qubits 2 and 0 of a 3-qubit register, in that order
  const ComplexMatrix full = embed(u, {2, 0}, 3);
  ComplexMatrix want = ComplexMatrix::Zero(8, 8);
  for (Index x = 0; x < 8; ++x) {
    for (Index y = 0; y < 8; ++y) {
      if (((x >> 1) & 1) != ((y >> 1) & 1)) continue;
      const Index xs = ((x & 1) << 1) | (x >> 2);
      const Index ys = ((y & 1) << 1) | (y >> 2);
      want(x, y) = u(xs, ys);
    }
  }
  EXPECT_LT(max_abs(full - want), 1e-14);
}

TEST(Registers, PauliString) {
  EXPECT_LT(max_abs(pauli_string("XZ") - oracle::naive_kron(pauli_x(), pauli_z())), 1e-15);
  EXPECT_THROW(pauli_string("XQ"), ValidationError);
}

TEST(Instances, RandomDensity) {
  const auto pure = random_density(3, 1, 42);
  EXPECT_NEAR(pure.purity(), 1.0, 1e-10);
  const auto full = random_density(3, 8, 42);
  EXPECT_GT(full.spectrum().eigenvalues.minCoeff(), 1e-12);
  EXPECT_EQ(random_density(2, 3, 7).mat(), random_density(2, 3, 7).mat());
  EXPECT_NE(random_density(2, 3, 7).mat(), random_density(2, 3, 8).mat());
  EXPECT_THROW(random_density(2, 5, 1), ValidationError);
}

TEST(Instances, RandomUnitaryIsUnitary) {
  Rng rng = make_rng(1);
  EXPECT_LT(unitarity_defect(random_unitary(8, rng)), 1e-12);
}

TEST(Instances, FrozenDraw) {
  // Guards the generator, seed derivation and fill order against drift.
  const auto rho = random_density(1, 2, 2024);
  EXPECT_NEAR(rho.mat()(0, 0).real(), 0.88798838195465191, 1e-14);
  EXPECT_NEAR(rho.mat()(1, 1).real(), 0.11201161804534818, 1e-14);
  EXPECT_NEAR(rho.mat()(0, 1).real(), -0.035877696746520027, 1e-14);
  EXPECT_NEAR(rho.mat()(0, 1).imag(), 0.26488631720585565, 1e-14);
  Rng rng = make_rng(2024);
  EXPECT_EQ(uniform01(rng), 0.46766115926326024);
}
