#pragma once

// Purifications, block encodings with optional explicit unitary dilations,
// Halmos dilation of contractions and block-encoding products.

#include <algorithm>
#include <numeric>
#include <optional>
#include <vector>

#include "powertrace/numkernel.hpp"

namespace powertrace {

/// Unit vector on env (x) sys whose reduced state on sys is the source rho.
struct PurifiedState {
  int env_qubits = 0;
  int sys_qubits = 0;
  ComplexVector vec;

  Index sys_dim() const { return Index{1} << sys_qubits; }
  Index env_dim() const { return Index{1} << env_qubits; }
  int total_qubits() const { return env_qubits + sys_qubits; }

  /// Tr_E |vec><vec|.
  ComplexMatrix reduced() const { return partial_trace(vec, env_dim(), sys_dim(), Keep::B); }

  DensityMatrix density() const { return DensityMatrix(reduced()); }
};

inline PurifiedState make_purified_state(int env_qubits, int sys_qubits, ComplexVector vec) {
  if (env_qubits < 0 || sys_qubits < 1) throw ValidationError("purified state: bad register widths");
  if (vec.size() != (Index{1} << (env_qubits + sys_qubits))) {
    throw ValidationError("purified state: vector length does not match registers");
  }
  if (std::abs(vec.norm() - 1.0) > 1e-12) throw ValidationError("purified state: vector is not normalized");
  return {env_qubits, sys_qubits, std::move(vec)};
}

namespace detail {

// Global phase fixed so the first component with modulus above 1e-12 is real
// and positive.
inline ComplexVector canonical_phase(ComplexVector v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12) {
      v *= std::conj(v(i)) / std::abs(v(i));
      break;
    }
  }
  return v;
}

inline bool lexicographic_less(const ComplexVector& a, const ComplexVector& b) {
  for (Index i = 0; i < a.size(); ++i) {
    if (std::abs(a(i).real() - b(i).real()) > 1e-12) return a(i).real() < b(i).real();
    if (std::abs(a(i).imag() - b(i).imag()) > 1e-12) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace detail

/// sum_i sqrt(p_i) |i>_E |psi_i>_I with the environment index ordered by
/// descending eigenvalue (ties broken lexicographically on the
/// phase-normalized eigenvectors). The environment is as wide as the system.
inline PurifiedState purify(const DensityMatrix& rho) {
  const auto& e = rho.spectrum();
  const Index d = rho.dim();
  std::vector<ComplexVector> vecs;
  vecs.reserve(static_cast<std::size_t>(d));
  for (Index i = 0; i < d; ++i) vecs.push_back(detail::canonical_phase(e.eigenvectors.col(i)));
  std::vector<Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    const double la = e.eigenvalues(a);
    const double lb = e.eigenvalues(b);
    if (std::abs(la - lb) > 1e-12) return la > lb;
    return detail::lexicographic_less(vecs[static_cast<std::size_t>(a)], vecs[static_cast<std::size_t>(b)]);
  });
  ComplexVector out = ComplexVector::Zero(d * d);
  for (Index r = 0; r < d; ++r) {
    const Index i = order[static_cast<std::size_t>(r)];
    const double p = std::max(0.0, e.eigenvalues(i));
    if (p == 0.0) continue;
    out.segment(r * d, d) = std::sqrt(p) * vecs[static_cast<std::size_t>(i)];
  }
  out /= out.norm();
  return make_purified_state(rho.qubits(), rho.qubits(), std::move(out));
}

/// Unitary whose first column is `first`, completed by Gram-Schmidt against
/// the computational basis in index order.
inline ComplexMatrix complete_unitary(const ComplexVector& first) {
  const Index n = first.size();
  const double nrm = first.norm();
  if (nrm == 0.0) throw ValidationError("complete_unitary: zero vector");
  ComplexMatrix u(n, n);
  u.col(0) = first / nrm;
  Index filled = 1;
  for (Index b = 0; b < n && filled < n; ++b) {
    ComplexVector w = ComplexVector::Zero(n);
    w(b) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (Index j = 0; j < filled; ++j) w -= u.col(j).dot(w) * u.col(j);
    }
    const double wn = w.norm();
    if (wn < 1e-6) continue;
    u.col(filled++) = w / wn;
  }
  if (filled != n) throw NumericalError("complete_unitary: basis completion failed");
  return u;
}

/// The (alpha, ancillas, err) block encoding of `block`. When present,
/// `dilation` is a unitary on ancillas + system qubits whose top-left block
/// (ancillas in |0...0>) times alpha approximates `block`.
struct BlockEncoding {
  ComplexMatrix block;
  double alpha = 1.0;
  int ancillas = 0;
  double err = 0.0;
  std::optional<ComplexMatrix> dilation;

  Index sys_dim() const { return block.rows(); }
  int sys_qubits() const { return qubits_for_dim(block.rows()); }
  int total_qubits() const { return ancillas + sys_qubits(); }
};

enum class Materialize { Auto, Never };

inline double unitarity_defect(const ComplexMatrix& u) {
  return (u.adjoint() * u - identity(u.cols())).cwiseAbs().maxCoeff();
}

inline BlockEncoding make_block_encoding(ComplexMatrix block, double alpha, int ancillas, double err,
                                         std::optional<ComplexMatrix> dilation = std::nullopt) {
  if (block.rows() != block.cols()) throw ValidationError("block encoding: block must be square");
  qubits_for_dim(block.rows());
  if (ancillas < 0) throw ValidationError("block encoding: negative ancilla count");
  if (err < 0.0) throw ValidationError("block encoding: negative error");
  if (alpha < op_norm(block) - 1e-9) throw ValidationError("block encoding: alpha below operator norm of block");
  if (dilation) {
    const Index expect = (Index{1} << ancillas) * block.rows();
    if (dilation->rows() != expect || dilation->cols() != expect) {
      throw ValidationError("block encoding: dilation has wrong dimension");
    }
  }
  return {std::move(block), alpha, ancillas, err, std::move(dilation)};
}

/// ||target - alpha (<0^a| (x) I) U (|0^a> (x) I)|| in operator norm.
inline double verify_block_encoding(const BlockEncoding& be, const ComplexMatrix& target) {
  if (!be.dilation) throw ValidationError("verify_block_encoding: no explicit dilation");
  if (target.rows() != be.sys_dim() || target.cols() != be.sys_dim()) {
    throw ValidationError("verify_block_encoding: target dimension mismatch");
  }
  const ComplexMatrix top = be.dilation->topLeftCorner(be.sys_dim(), be.sys_dim());
  return op_norm(target - be.alpha * top);
}

/// [[M, sqrt(I - M M^dag)], [sqrt(I - M^dag M), -M^dag]] for a contraction M.
inline ComplexMatrix halmos_dilate(const ComplexMatrix& m) {
  if (m.rows() != m.cols()) throw ValidationError("halmos_dilate: matrix must be square");
  const double nrm = op_norm(m);
  if (nrm > 1.0 + 1e-6) throw ValidationError("halmos_dilate: operator norm exceeds 1");
  const ComplexMatrix c = nrm > 1.0 ? ComplexMatrix(m / nrm) : m;
  const Index d = c.rows();
  const ComplexMatrix id = identity(d);
  auto psd_sqrt = [](const ComplexMatrix& g) {
    return spectral_apply(g, [](double x) { return std::sqrt(std::max(0.0, clip_psd(x))); });
  };
  ComplexMatrix u(2 * d, 2 * d);
  u.topLeftCorner(d, d) = c;
  u.topRightCorner(d, d) = psd_sqrt(id - c * c.adjoint());
  u.bottomLeftCorner(d, d) = psd_sqrt(id - c.adjoint() * c);
  u.bottomRightCorner(d, d) = -c.adjoint();
  return u;
}

/// Generic dilation with `ancillas` ancilla qubits: idle ancillas (x) Halmos
/// dilation of block / alpha.
inline ComplexMatrix padded_halmos_dilation(const ComplexMatrix& block, double alpha, int ancillas) {
  if (ancillas < 1) throw ValidationError("padded_halmos_dilation: need at least one ancilla");
  const ComplexMatrix h = halmos_dilate(block / alpha);
  if (ancillas == 1) return h;
  return kron(identity(Index{1} << (ancillas - 1)), h);
}

/// (U_rho^dag (x) I_n)(I_a (x) SWAP_n)(U_rho (x) I_n): an exact (1, a + n, 0)
/// block encoding of rho. Ancillas are the env and first system register;
/// the encoded system is the trailing copy.
inline BlockEncoding density_block_encoding(const PurifiedState& pur, Materialize mode = Materialize::Auto) {
  const int a = pur.env_qubits;
  const int n = pur.sys_qubits;
  const int total = a + 2 * n;
  ComplexMatrix block = pur.reduced();
  if (mode == Materialize::Never) return make_block_encoding(std::move(block), 1.0, a + n, 0.0);
  require_within_cap(total, "density_block_encoding");
  const ComplexMatrix u_rho = complete_unitary(pur.vec);
  std::vector<int> prep(static_cast<std::size_t>(a + n));
  std::iota(prep.begin(), prep.end(), 0);
  ComplexMatrix w = apply_on_qubits(u_rho, prep, identity(Index{1} << total), total);
  w = apply_permutation([&](Index x) { return swap_register_bits(x, a, a + n, n, total); }, w);
  w = apply_on_qubits(u_rho.adjoint(), prep, w, total);
  return make_block_encoding(std::move(block), 1.0, a + n, 0.0, std::move(w));
}

/// Product block encoding of A.B with ancilla registers [A-ancillas,
/// B-ancillas]: dilation (I_B (x) U_A)(I_A (x) U_B).
inline BlockEncoding be_product(const BlockEncoding& a, const BlockEncoding& b, Materialize mode = Materialize::Auto) {
  if (a.sys_dim() != b.sys_dim()) throw ValidationError("be_product: system dimensions differ");
  ComplexMatrix block = a.block * b.block;
  const double alpha = a.alpha * b.alpha;
  const int r = a.ancillas;
  const int s = b.ancillas;
  const double err = a.alpha * b.err + b.alpha * a.err;
  const int n = a.sys_qubits();
  const int total = r + s + n;
  if (mode == Materialize::Never || !a.dilation || !b.dilation || total > qubit_cap()) {
    return make_block_encoding(std::move(block), alpha, r + s, err);
  }
  std::vector<int> qa, qb;
  for (int i = 0; i < r; ++i) qa.push_back(i);
  for (int i = 0; i < s; ++i) qb.push_back(r + i);
  for (int i = 0; i < n; ++i) {
    qa.push_back(r + s + i);
    qb.push_back(r + s + i);
  }
  ComplexMatrix w = apply_on_qubits(*b.dilation, qb, identity(Index{1} << total), total);
  w = apply_on_qubits(*a.dilation, qa, w, total);
  return make_block_encoding(std::move(block), alpha, r + s, err, std::move(w));
}

/// One-ancilla Halmos encoding of O with alpha = max(1, ||O||).
inline BlockEncoding observable_block_encoding(const Observable& o, Materialize mode = Materialize::Auto) {
  const double alpha = std::max(1.0, o.norm());
  std::optional<ComplexMatrix> dil;
  if (mode == Materialize::Auto && o.qubits() + 1 <= qubit_cap()) dil = halmos_dilate(o.mat() / alpha);
  return make_block_encoding(o.mat(), alpha, 1, 0.0, std::move(dil));
}

}  // namespace powertrace
