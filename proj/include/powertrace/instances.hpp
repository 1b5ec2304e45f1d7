#pragma once

// Seeded random and named problem instances.

#include <cmath>
#include <cstdint>
#include <string>

#include "powertrace/errors.hpp"
#include "powertrace/numkernel.hpp"
#include "powertrace/rng.hpp"

namespace powertrace {

inline ComplexMatrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  const double s = 1.0 / std::sqrt(2.0);
  // column-major fill order is part of the reproducibility contract
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) {
      const double re = standard_normal(rng);
      const double im = standard_normal(rng);
      g(i, j) = cplx(s * re, s * im);
    }
  }
  return g;
}

/// G G^dag / Tr(G G^dag) with G a 2^qubits x rank complex Gaussian matrix.
inline DensityMatrix random_density(int qubits, int rank, std::uint64_t seed) {
  if (qubits < 1) throw ValidationError("random_density: qubits must be >= 1");
  require_within_cap(qubits, "random_density");
  const Index d = Index{1} << qubits;
  if (rank < 1 || rank > d) throw ValidationError("random_density: rank must lie in [1, 2^qubits]");
  Rng rng = make_rng(seed);
  const ComplexMatrix g = gaussian_matrix(d, rank, rng);
  ComplexMatrix m = g * g.adjoint();
  m /= m.trace().real();
  return DensityMatrix(m);
}

/// Haar-random unitary: QR of a Gaussian matrix with the phases of R's
/// diagonal folded into Q.
inline ComplexMatrix random_unitary(Index dim, Rng& rng) {
  const ComplexMatrix g = gaussian_matrix(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    const cplx dj = r(j, j);
    if (std::abs(dj) > 0.0) q.col(j) *= dj / std::abs(dj);
  }
  return q;
}

inline ComplexMatrix random_unitary(Index dim, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  return random_unitary(dim, rng);
}

/// (G + G^dag) / 2 rescaled to unit operator norm.
inline Observable random_hermitian(int qubits, std::uint64_t seed) {
  require_within_cap(qubits, "random_hermitian");
  Rng rng = make_rng(seed);
  const Index d = Index{1} << qubits;
  const ComplexMatrix g = gaussian_matrix(d, d, rng);
  ComplexMatrix h = 0.5 * (g + g.adjoint());
  h /= op_norm(h);
  return Observable(h);
}

/// Diagonal state with seeded random spectrum of the given rank.
inline DensityMatrix random_diagonal_density(int qubits, int rank, std::uint64_t seed) {
  require_within_cap(qubits, "random_diagonal_density");
  const Index d = Index{1} << qubits;
  if (rank < 1 || rank > d) throw ValidationError("random_diagonal_density: rank must lie in [1, 2^qubits]");
  Rng rng = make_rng(seed);
  ComplexMatrix m = ComplexMatrix::Zero(d, d);
  double total = 0.0;
  for (Index i = 0; i < rank; ++i) {
    const double w = -std::log(1.0 - uniform01(rng));
    m(i, i) = w;
    total += w;
  }
  return DensityMatrix(m / total);
}

inline DensityMatrix random_pure_density(int qubits, std::uint64_t seed) {
  return random_density(qubits, 1, seed);
}

/// zero (|0..0><0..0|), plus (|+>^n), mixed (I / 2^n).
inline DensityMatrix named_state(const std::string& name, int qubits) {
  require_within_cap(qubits, "named_state");
  const Index d = Index{1} << qubits;
  if (name == "zero") return pure_density(basis_state(d, 0));
  if (name == "plus") return pure_density(ComplexVector::Constant(d, cplx(1.0 / std::sqrt(double(d)), 0.0)));
  if (name == "mixed") return maximally_mixed(qubits);
  throw ValidationError("unknown named state '" + name + "'");
}

/// identity, proj0 (|0..0><0..0|), z0 (Z on the first qubit), zall (Z^n).
inline Observable named_observable(const std::string& name, int qubits) {
  require_within_cap(qubits, "named_observable");
  const Index d = Index{1} << qubits;
  if (name == "identity") return Observable(identity(d));
  if (name == "proj0") return Observable(basis_op(d, 0, 0));
  if (name == "z0") return Observable(embed(pauli_z(), {0}, qubits));
  if (name == "zall") return Observable(pauli_string(std::string(static_cast<std::size_t>(qubits), 'Z')));
  throw ValidationError("unknown named observable '" + name + "'");
}

}  // namespace powertrace
