#pragma once

// Dense complex linear algebra, quantum-state primitives and the exact
// ground-truth oracle for Tr(rho^k O).
//
// Qubit ordering convention used throughout the library: qubit 0 is the most
// significant bit of a basis index, so kron(A, B) places A on the leading
// qubits. Ancilla registers of block encodings always precede the system.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "powertrace/errors.hpp"

namespace powertrace {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr double kEighInputTol = 1e-8;
inline constexpr int kDefaultQubitCap = 14;

namespace detail {
inline std::atomic<int>& qubit_cap_storage() {
  static std::atomic<int> cap{kDefaultQubitCap};
  return cap;
}
}  // namespace detail

/// Largest number of qubits any materialized operator or state may span.
inline int qubit_cap() { return detail::qubit_cap_storage().load(); }

inline void set_qubit_cap(int cap) {
  if (cap < 1 || cap > 30) throw ValidationError("qubit cap must lie in [1, 30]");
  detail::qubit_cap_storage().store(cap);
}

inline bool is_power_of_two(Index n) { return n > 0 && (n & (n - 1)) == 0; }

/// log2 of a power-of-two dimension.
inline int qubits_for_dim(Index dim) {
  if (!is_power_of_two(dim)) {
    throw ValidationError("dimension " + std::to_string(dim) + " is not a power of two");
  }
  int q = 0;
  while ((Index{1} << q) < dim) ++q;
  return q;
}

inline void require_within_cap(int qubits, const std::string& what) {
  if (qubits > qubit_cap()) {
    throw ResourceError(what + " needs " + std::to_string(qubits) + " qubits; cap is " +
                        std::to_string(qubit_cap()));
  }
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.real().allFinite() && m.imag().allFinite();
}

inline double hermitian_defect(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

inline ComplexMatrix identity(Index dim) { return ComplexMatrix::Identity(dim, dim); }

/// Kronecker product. Throws ResourceError when either output dimension would
/// exceed 2^qubit_cap().
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const Index max_dim = Index{1} << qubit_cap();
  if (a.rows() * b.rows() > max_dim || a.cols() * b.cols() > max_dim) {
    throw ResourceError("kron output " + std::to_string(a.rows() * b.rows()) + "x" +
                        std::to_string(a.cols() * b.cols()) + " exceeds qubit cap");
  }
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spectral machinery

struct EighResult {
  RealVector eigenvalues;      // ascending
  ComplexMatrix eigenvectors;  // columns, orthonormal
};

inline EighResult eigh(const ComplexMatrix& h) {
  if (h.rows() != h.cols()) throw ValidationError("eigh: matrix is not square");
  if (!all_finite(h)) throw ValidationError("eigh: non-finite entries");
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  if (hermitian_defect(h) > kEighInputTol * scale) {
    throw ValidationError("eigh: matrix is not Hermitian");
  }
  const ComplexMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("eigh: solver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Applies f to the spectrum of a Hermitian matrix: V f(L) V^dagger.
inline ComplexMatrix spectral_apply(const EighResult& e, const std::function<double(double)>& f) {
  ComplexVector fl(e.eigenvalues.size());
  for (Index i = 0; i < fl.size(); ++i) fl(i) = f(e.eigenvalues(i));
  return e.eigenvectors * fl.asDiagonal() * e.eigenvectors.adjoint();
}

inline ComplexMatrix spectral_apply(const ComplexMatrix& h, const std::function<double(double)>& f) {
  return spectral_apply(eigh(h), f);
}

// Negative eigenvalues in [-kPsdTol, 0) are numerical noise.
inline double clip_psd(double x) { return (x < 0.0 && x >= -kPsdTol) ? 0.0 : x; }

inline RealVector singular_values(const ComplexMatrix& m) {
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues();
}

inline double op_norm(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m).maxCoeff();
}

inline double schatten1(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values(m).sum();
}

// ---------------------------------------------------------------------------
// Domain types

/// Positive semidefinite, unit-trace matrix on a power-of-two dimension.
class DensityMatrix {
 public:
  explicit DensityMatrix(ComplexMatrix mat) : mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols()) throw ValidationError("density matrix must be square");
    qubits_ = qubits_for_dim(mat_.rows());
    if (!all_finite(mat_)) throw ValidationError("density matrix has non-finite entries");
    if (hermitian_defect(mat_) > kHermitianTol) {
      throw ValidationError("density matrix is not Hermitian");
    }
    if (std::abs(mat_.trace() - cplx(1.0)) > kTraceTol) {
      throw ValidationError("density matrix trace differs from 1");
    }
    mat_ = 0.5 * (mat_ + mat_.adjoint());
    spectrum_ = eigh(mat_);
    if (spectrum_.eigenvalues.minCoeff() < -kPsdTol) {
      throw ValidationError("density matrix has a negative eigenvalue");
    }
    for (Index i = 0; i < spectrum_.eigenvalues.size(); ++i) {
      spectrum_.eigenvalues(i) = std::max(0.0, clip_psd(spectrum_.eigenvalues(i)));
    }
  }

  const ComplexMatrix& mat() const { return mat_; }
  Index dim() const { return mat_.rows(); }
  int qubits() const { return qubits_; }
  const EighResult& spectrum() const { return spectrum_; }

  double purity() const { return spectrum_.eigenvalues.squaredNorm(); }

  /// rho^p for real p >= 0 through the cached eigendecomposition.
  ComplexMatrix power(double p) const {
    return spectral_apply(spectrum_, [p](double x) { return x <= 0.0 ? (p == 0.0 ? 1.0 : 0.0) : std::pow(x, p); });
  }

 private:
  ComplexMatrix mat_;
  int qubits_ = 0;
  EighResult spectrum_;
};

/// Observable with cached operator norm. Non-Hermitian operators are allowed
/// only through the named constructor and flag the estimator to run both the
/// real and the imaginary Hadamard-test pass.
class Observable {
 public:
  explicit Observable(ComplexMatrix mat) : Observable(std::move(mat), true) {}

  static Observable non_hermitian(ComplexMatrix mat) { return Observable(std::move(mat), false); }

  const ComplexMatrix& mat() const { return mat_; }
  Index dim() const { return mat_.rows(); }
  int qubits() const { return qubits_for_dim(mat_.rows()); }
  double norm() const { return op_norm_; }
  bool hermitian() const { return hermitian_; }

 private:
  Observable(ComplexMatrix mat, bool require_hermitian) : mat_(std::move(mat)) {
    if (mat_.rows() != mat_.cols()) throw ValidationError("observable must be square");
    qubits_for_dim(mat_.rows());
    if (!all_finite(mat_)) throw ValidationError("observable has non-finite entries");
    const bool herm = hermitian_defect(mat_) <= kHermitianTol;
    if (require_hermitian && !herm) throw ValidationError("observable is not Hermitian");
    hermitian_ = herm;
    if (hermitian_) mat_ = 0.5 * (mat_ + mat_.adjoint());
    op_norm_ = op_norm(mat_);
  }

  ComplexMatrix mat_;
  double op_norm_ = 0.0;
  bool hermitian_ = true;
};

// ---------------------------------------------------------------------------
// Named single-qubit operators

inline ComplexMatrix pauli_i() { return identity(2); }

inline ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

inline ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

inline ComplexMatrix hadamard() {
  ComplexMatrix m(2, 2);
  const double s = 1.0 / std::sqrt(2.0);
  m << s, s, s, -s;
  return m;
}

/// |i><j| in dimension dim.
inline ComplexMatrix basis_op(Index dim, Index i, Index j) {
  if (i < 0 || j < 0 || i >= dim || j >= dim) throw ValidationError("basis_op: index out of range");
  ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

inline ComplexVector basis_state(Index dim, Index i) {
  if (i < 0 || i >= dim) throw ValidationError("basis_state: index out of range");
  ComplexVector v = ComplexVector::Zero(dim);
  v(i) = 1.0;
  return v;
}

/// Tensor product of Paulis from a string such as "XZI".
inline ComplexMatrix pauli_string(const std::string& s) {
  if (s.empty()) throw ValidationError("empty Pauli string");
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (char c : s) {
    switch (c) {
      case 'I': out = kron(out, pauli_i()); break;
      case 'X': out = kron(out, pauli_x()); break;
      case 'Y': out = kron(out, pauli_y()); break;
      case 'Z': out = kron(out, pauli_z()); break;
      default: throw ValidationError(std::string("unknown Pauli letter '") + c + "'");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Register manipulation

/// Left-multiplies `target` (rows indexed by `total_qubits` qubits) by `op`
/// acting on the listed qubits, in the listed order (first listed qubit is
/// the most significant qubit of `op`). Columns are transformed independently,
/// so a state vector is a one-column matrix.
inline ComplexMatrix apply_on_qubits(const ComplexMatrix& op, const std::vector<int>& qubits,
                                     const ComplexMatrix& target, int total_qubits) {
  const int t = static_cast<int>(qubits.size());
  if (op.rows() != (Index{1} << t) || op.cols() != op.rows()) {
    throw ValidationError("apply_on_qubits: operator size does not match qubit list");
  }
  if (target.rows() != (Index{1} << total_qubits)) {
    throw ValidationError("apply_on_qubits: target rows do not match register width");
  }
  std::vector<Index> offsets(static_cast<std::size_t>(op.rows()), 0);
  Index mask = 0;
  for (int b = 0; b < t; ++b) {
    const int q = qubits[static_cast<std::size_t>(b)];
    if (q < 0 || q >= total_qubits) throw ValidationError("apply_on_qubits: qubit out of range");
    const Index bit = Index{1} << (total_qubits - 1 - q);
    if (mask & bit) throw ValidationError("apply_on_qubits: repeated qubit");
    mask |= bit;
    for (Index s = 0; s < op.rows(); ++s) {
      if ((s >> (t - 1 - b)) & 1) offsets[static_cast<std::size_t>(s)] |= bit;
    }
  }
  ComplexMatrix out(target.rows(), target.cols());
  ComplexVector gathered(op.rows());
  for (Index base = 0; base < target.rows(); ++base) {
    if (base & mask) continue;
    for (Index c = 0; c < target.cols(); ++c) {
      for (Index s = 0; s < op.rows(); ++s) gathered(s) = target(base + offsets[static_cast<std::size_t>(s)], c);
      const ComplexVector res = op * gathered;
      for (Index s = 0; s < op.rows(); ++s) out(base + offsets[static_cast<std::size_t>(s)], c) = res(s);
    }
  }
  return out;
}

/// Full-register matrix of `op` acting on `qubits` of a `total_qubits` register.
inline ComplexMatrix embed(const ComplexMatrix& op, const std::vector<int>& qubits, int total_qubits) {
  require_within_cap(total_qubits, "embed");
  return apply_on_qubits(op, qubits, identity(Index{1} << total_qubits), total_qubits);
}

/// Left-multiplies by the permutation matrix sending |x> to |perm(x)>.
inline ComplexMatrix apply_permutation(const std::function<Index(Index)>& perm, const ComplexMatrix& target) {
  ComplexMatrix out(target.rows(), target.cols());
  std::vector<char> hit(static_cast<std::size_t>(target.rows()), 0);
  for (Index x = 0; x < target.rows(); ++x) {
    const Index y = perm(x);
    if (y < 0 || y >= target.rows() || hit[static_cast<std::size_t>(y)]) {
      throw ValidationError("apply_permutation: map is not a permutation");
    }
    hit[static_cast<std::size_t>(y)] = 1;
    out.row(y) = target.row(x);
  }
  return out;
}

/// Swaps two disjoint, equally wide, contiguous qubit blocks starting at
/// first and second.
inline Index swap_register_bits(Index x, int first, int second, int width, int total_qubits) {
  const Index mask = (Index{1} << width) - 1;
  const int sh1 = total_qubits - first - width;
  const int sh2 = total_qubits - second - width;
  const Index a = (x >> sh1) & mask;
  const Index b = (x >> sh2) & mask;
  x &= ~((mask << sh1) | (mask << sh2));
  return x | (b << sh1) | (a << sh2);
}

enum class Keep { A, B };

/// Partial trace over one side of a bipartition dA x dB. Accepts a density
/// matrix or a pure state given as a single column.
inline ComplexMatrix partial_trace(const ComplexMatrix& m, Index d_a, Index d_b, Keep keep) {
  if (d_a <= 0 || d_b <= 0) throw ValidationError("partial_trace: non-positive dims");
  const Index n = d_a * d_b;
  const bool is_vector = m.cols() == 1 && m.rows() == n;
  if (!is_vector && (m.rows() != n || m.cols() != n)) {
    throw ValidationError("partial_trace: dims do not match input");
  }
  const Index d_keep = keep == Keep::A ? d_a : d_b;
  ComplexMatrix out = ComplexMatrix::Zero(d_keep, d_keep);
  auto idx = [d_b](Index a, Index b) { return a * d_b + b; };
  if (is_vector) {
    for (Index i = 0; i < d_keep; ++i) {
      for (Index j = 0; j < d_keep; ++j) {
        cplx acc = 0.0;
        if (keep == Keep::A) {
          for (Index b = 0; b < d_b; ++b) acc += m(idx(i, b), 0) * std::conj(m(idx(j, b), 0));
        } else {
          for (Index a = 0; a < d_a; ++a) acc += m(idx(a, i), 0) * std::conj(m(idx(a, j), 0));
        }
        out(i, j) = acc;
      }
    }
    return out;
  }
  for (Index i = 0; i < d_keep; ++i) {
    for (Index j = 0; j < d_keep; ++j) {
      cplx acc = 0.0;
      if (keep == Keep::A) {
        for (Index b = 0; b < d_b; ++b) acc += m(idx(i, b), idx(j, b));
      } else {
        for (Index a = 0; a < d_a; ++a) acc += m(idx(a, i), idx(a, j));
      }
      out(i, j) = acc;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Oracles and distances

/// Exact Tr(rho^k O) = sum_i lambda_i^k <psi_i|O|psi_i>.
inline cplx trace_power_obs_oracle(const DensityMatrix& rho, const ComplexMatrix& o, int k) {
  if (k < 1) throw ValidationError("trace_power_obs_oracle: k must be >= 1");
  if (o.rows() != rho.dim() || o.cols() != rho.dim()) {
    throw ValidationError("trace_power_obs_oracle: dimension mismatch");
  }
  const auto& e = rho.spectrum();
  cplx acc = 0.0;
  for (Index i = 0; i < e.eigenvalues.size(); ++i) {
    const double lam = e.eigenvalues(i);
    if (lam == 0.0) continue;
    const auto v = e.eigenvectors.col(i);
    acc += std::pow(lam, k) * v.dot(o * v);  // dot conjugates the left operand
  }
  return acc;
}

inline cplx trace_power_obs_oracle(const DensityMatrix& rho, const Observable& o, int k) {
  return trace_power_obs_oracle(rho, o.mat(), k);
}

inline void require_same_dim(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw ValidationError("density matrices have different dimensions");
}

/// T(a, b) = 1/2 ||a - b||_1.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_dim(a, b);
  const auto e = eigh(a.mat() - b.mat());
  return std::clamp(0.5 * e.eigenvalues.cwiseAbs().sum(), 0.0, 1.0);
}

/// Uhlmann fidelity (Tr sqrt(sqrt(a) b sqrt(a)))^2.
inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  require_same_dim(a, b);
  const ComplexMatrix sa = a.power(0.5);
  const auto e = eigh(sa * b.mat() * sa);
  double root_sum = 0.0;
  for (Index i = 0; i < e.eigenvalues.size(); ++i) root_sum += std::sqrt(std::max(0.0, e.eigenvalues(i)));
  return std::clamp(root_sum * root_sum, 0.0, 1.0);
}

inline DensityMatrix pure_density(const ComplexVector& psi) {
  const double n = psi.norm();
  if (n == 0.0) throw ValidationError("pure_density: zero vector");
  const ComplexVector v = psi / n;
  return DensityMatrix(v * v.adjoint());
}

inline DensityMatrix maximally_mixed(int qubits) {
  const Index d = Index{1} << qubits;
  return DensityMatrix(identity(d) / static_cast<double>(d));
}

inline DensityMatrix tensor_power(const DensityMatrix& rho, int copies) {
  if (copies < 1) throw ValidationError("tensor_power: copies must be >= 1");
  ComplexMatrix out = rho.mat();
  for (int i = 1; i < copies; ++i) out = kron(out, rho.mat());
  return DensityMatrix(out);
}

}  // namespace powertrace
