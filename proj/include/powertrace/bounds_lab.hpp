#pragma once

// Sample-access baseline (generalized swap test) and executable versions of
// the lower-bound and BQP-reduction constructions.

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <vector>

#include "powertrace/blockenc.hpp"
#include "powertrace/rng.hpp"

namespace powertrace::bounds {

// ---------------------------------------------------------------------------
// Cyclic permutation and swap test

/// Digit-level action of P_k on a basis index of k registers of dimension d:
/// |a_1, ..., a_k> -> |a_k, a_1, ..., a_{k-1}>.
inline Index cyclic_shift_index(Index x, int k, Index d) {
  const Index last = x % d;
  const Index rest = x / d;
  Index high = 1;
  for (int i = 1; i < k; ++i) high *= d;
  return last * high + rest;
}

inline Index checked_power(Index d, int k) {
  const Index cap = Index{1} << qubit_cap();
  Index out = 1;
  for (int i = 0; i < k; ++i) {
    if (out > cap / d) throw ResourceError("cyclic permutation exceeds qubit cap");
    out *= d;
  }
  if (out > cap) throw ResourceError("cyclic permutation exceeds qubit cap");
  return out;
}

inline ComplexMatrix cyclic_permutation(int k, Index d) {
  if (k < 1 || d < 1) throw ValidationError("cyclic_permutation: k and d must be positive");
  const Index n = checked_power(d, k);
  return apply_permutation([&](Index x) { return cyclic_shift_index(x, k, d); }, identity(n));
}

/// Tr(P_k rho^{(x)k} (O (x) I_{k-1})) by dense algebra.
inline cplx permutation_trace(const DensityMatrix& rho, const ComplexMatrix& o, int k) {
  if (o.rows() != rho.dim()) throw ValidationError("permutation_trace: dimension mismatch");
  const ComplexMatrix p = cyclic_permutation(k, rho.dim());
  ComplexMatrix big = rho.mat();
  ComplexMatrix obs = o;
  for (int i = 1; i < k; ++i) {
    big = kron(big, rho.mat());
    obs = kron(obs, identity(rho.dim()));
  }
  return (p * big * obs).trace();
}

/// Mean and variance of one swap-test shot: the eigenvalue of X_c (x) O read
/// after the controlled-P_k Hadamard circuit. Mean Re Tr(rho^k O); second
/// moment Tr(rho O^2) because (X (x) O)^2 = I (x) O^2.
struct ShotMoments {
  double mean = 0.0;
  double variance = 0.0;
};

inline ShotMoments swap_test_moments(const DensityMatrix& rho, const Observable& o, int k) {
  const double mean = trace_power_obs_oracle(rho, o, k).real();
  const double second = (rho.mat() * o.mat() * o.mat()).trace().real();
  return {mean, std::max(0.0, second - mean * mean)};
}

struct SwapTestResult {
  double mean = 0.0;
  double stderr_ = 0.0;
  long long copies_used = 0;
  long long shots = 0;
  bool surrogate = false;
  double exact_mean = 0.0;
  double shot_variance = 0.0;
};

namespace detail {

inline int sample_index(const std::vector<double>& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

// Circuit for one product input |psi_{i_1}> ... |psi_{i_k}>: H_c,
// controlled-P_k, then readout of X_c (x) O on the first register as a
// Z-basis measurement after H_c and the basis change to O's eigenvectors.
// Returns the probability of each (control bit, eigenvalue index) pair,
// control-major.
inline std::vector<double> swap_outcome_distribution(const std::vector<ComplexVector>& inputs, int k, int n,
                                                     const EighResult& o_eig) {
  const Index d = Index{1} << n;
  const int total = 1 + n * k;
  ComplexVector prod = inputs[0];
  for (int i = 1; i < k; ++i) {
    ComplexVector next(prod.size() * d);
    for (Index a = 0; a < prod.size(); ++a) next.segment(a * d, d) = prod(a) * inputs[static_cast<std::size_t>(i)];
    prod = std::move(next);
  }
  const Index half = prod.size();
  ComplexMatrix state(2 * half, 1);
  const double s = 1.0 / std::sqrt(2.0);
  state.topRows(half) = s * prod;
  ComplexVector shifted(half);
  for (Index x = 0; x < half; ++x) shifted(cyclic_shift_index(x, k, d)) = prod(x);
  state.bottomRows(half) = s * shifted;

  state = apply_on_qubits(hadamard(), {0}, state, total);
  std::vector<int> reg1;
  for (int i = 0; i < n; ++i) reg1.push_back(1 + i);
  state = apply_on_qubits(o_eig.eigenvectors.adjoint(), reg1, state, total);

  std::vector<double> probs(static_cast<std::size_t>(2 * d), 0.0);
  const int rest_bits = n * (k - 1);
  for (Index idx = 0; idx < state.rows(); ++idx) {
    const Index c = idx >> (total - 1);
    const Index j = (idx >> rest_bits) & (d - 1);
    probs[static_cast<std::size_t>(c * d + j)] += std::norm(state(idx, 0));
  }
  return probs;
}

}  // namespace detail

/// Generalized swap test with `shots` repetitions, each consuming k copies.
/// Exact circuit sampling when 1 + n k qubits fit under the cap (the mixed
/// input is sampled as a product of eigenstates, which reproduces
/// rho^{(x)k}); otherwise a Gaussian surrogate with the exact mean and
/// per-shot variance, flagged in the result.
inline SwapTestResult swap_test_estimate(const DensityMatrix& rho, const Observable& o, int k, long long shots,
                                         std::uint64_t seed) {
  if (shots < 2) throw ValidationError("swap_test_estimate: shots must be >= 2");
  if (k < 1) throw ValidationError("swap_test_estimate: k must be >= 1");
  if (!o.hermitian()) throw ValidationError("swap_test_estimate: observable must be Hermitian");
  if (o.dim() != rho.dim()) throw ValidationError("swap_test_estimate: dimension mismatch");
  const int n = rho.qubits();
  const ShotMoments mom = swap_test_moments(rho, o, k);
  SwapTestResult out;
  out.shots = shots;
  out.copies_used = static_cast<long long>(k) * shots;
  out.exact_mean = mom.mean;
  out.shot_variance = mom.variance;
  Rng rng = make_rng(seed);

  if (1 + n * k > qubit_cap()) {
    out.surrogate = true;
    const double se = std::sqrt(mom.variance / static_cast<double>(shots));
    out.mean = mom.mean + se * standard_normal(rng);
    out.stderr_ = se;
    return out;
  }

  const auto& spec = rho.spectrum();
  std::vector<double> weights(static_cast<std::size_t>(rho.dim()));
  for (Index i = 0; i < rho.dim(); ++i) weights[static_cast<std::size_t>(i)] = spec.eigenvalues(i);
  const EighResult o_eig = eigh(o.mat());
  const Index d = rho.dim();

  std::map<std::vector<int>, std::vector<double>> cache;
  double sum = 0.0, sum_sq = 0.0;
  std::vector<int> tuple(static_cast<std::size_t>(k));
  for (long long s = 0; s < shots; ++s) {
    for (int i = 0; i < k; ++i) tuple[static_cast<std::size_t>(i)] = detail::sample_index(weights, rng);
    auto it = cache.find(tuple);
    if (it == cache.end()) {
      std::vector<ComplexVector> inputs;
      for (int i : tuple) inputs.push_back(spec.eigenvectors.col(i));
      it = cache.emplace(tuple, detail::swap_outcome_distribution(inputs, k, n, o_eig)).first;
    }
    const int outcome = detail::sample_index(it->second, rng);
    const double sign = outcome < d ? 1.0 : -1.0;
    const double value = sign * o_eig.eigenvalues(outcome % d);
    sum += value;
    sum_sq += value * value;
  }
  const double nshots = static_cast<double>(shots);
  out.mean = sum / nshots;
  const double var = std::max(0.0, (sum_sq - nshots * out.mean * out.mean) / (nshots - 1.0));
  out.stderr_ = std::sqrt(var / nshots);
  return out;
}

/// Two-sided normal quantile for the given confidence level.
inline double z_for_confidence(double confidence) {
  if (!(confidence > 0.0 && confidence < 1.0)) throw ValidationError("confidence must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * confidence);
}

/// Copies k * ceil(z^2 Var / eps^2) a swap-test estimate needs to reach
/// accuracy eps at the given confidence.
inline long long swap_copies_for_eps(const DensityMatrix& rho, const Observable& o, int k, double eps,
                                     double confidence) {
  if (!(eps > 0.0)) throw ValidationError("swap_copies_for_eps: eps must be positive");
  const double z = z_for_confidence(confidence);
  const auto mom = swap_test_moments(rho, o, k);
  const auto shots = static_cast<long long>(std::ceil(z * z * mom.variance / (eps * eps)));
  return static_cast<long long>(k) * std::max(1LL, shots);
}

// ---------------------------------------------------------------------------
// Helstrom discrimination with m copies

struct HelstromRow {
  int m = 0;
  double fidelity = 1.0;           // (1 - c/k)^m
  double success_lower = 0.5;      // 1 - (1/2) sqrt(F)
  double helstrom_success = 0.5;   // 1/2 + T/2
};

struct HelstromTable {
  int k = 0;
  double c = 0.0;
  double eps_prime = 0.0;
  std::vector<HelstromRow> rows;
  int m_star = 0;  // smallest m with success_lower >= 2/3
};

/// rho_0 = |0><0|, rho_1 = (1 - c/k)|0><0| + (c/k)|1><1|.
inline DensityMatrix helstrom_rho1(double eps_prime) {
  ComplexMatrix m = ComplexMatrix::Zero(2, 2);
  m(0, 0) = 1.0 - eps_prime;
  m(1, 1) = eps_prime;
  return DensityMatrix(m);
}

inline int helstrom_threshold_copies(double eps_prime) {
  return static_cast<int>(std::ceil(std::log(4.0 / 9.0) / std::log(1.0 - eps_prime) - 1e-12));
}

inline HelstromTable helstrom_experiment(int k, double c, const std::vector<int>& m_values) {
  if (m_values.empty()) throw ValidationError("helstrom_experiment: m_values is empty");
  if (k < 1) throw ValidationError("helstrom_experiment: k must be >= 1");
  if (!(c > 0.0 && c < 1.0)) throw ValidationError("helstrom_experiment: c must lie in (0, 1)");
  HelstromTable t;
  t.k = k;
  t.c = c;
  t.eps_prime = c / k;
  for (int m : m_values) {
    if (m < 0) throw ValidationError("helstrom_experiment: m must be >= 0");
    HelstromRow row;
    row.m = m;
    row.fidelity = std::pow(1.0 - t.eps_prime, m);
    row.success_lower = 1.0 - 0.5 * std::sqrt(row.fidelity);
    // The states commute, so T = 1 - (1 - eps')^m exactly.
    row.helstrom_success = 0.5 + 0.5 * (1.0 - row.fidelity);
    t.rows.push_back(row);
  }
  t.m_star = helstrom_threshold_copies(t.eps_prime);
  return t;
}

// ---------------------------------------------------------------------------
// Two-point (Le Cam) construction

/// D(p || q) for Bernoulli distributions, in nats.
inline double bernoulli_kl(double p, double q) {
  auto term = [](double a, double b) { return a == 0.0 ? 0.0 : a * std::log(a / b); };
  return term(p, q) + term(1.0 - p, 1.0 - q);
}

struct LeCamInstance {
  DensityMatrix rho0;
  DensityMatrix rho1;
  double delta = 0.0;
  double kl = 0.0;
  double expectation0 = 0.0;
  double expectation1 = 0.0;
};

/// rho_0 = (1/2 + delta) P_+ + (1/2 - delta) P_-, rho_1 with the weights
/// swapped, where P_+- project onto eigenvectors of O at +-||O|| and
/// delta = eps / (2 ||O||).
inline LeCamInstance lecam_construction(const Observable& o, double eps) {
  if (!o.hermitian()) throw ConstructionError("lecam_construction: observable must be Hermitian");
  const double nrm = o.norm();
  if (!(nrm > 0.0)) throw ConstructionError("lecam_construction: observable is zero");
  const double delta = eps / (2.0 * nrm);
  if (!(delta > 0.0 && delta < 0.5)) throw ValidationError("lecam_construction: need 0 < eps / (2||O||) < 1/2");
  const EighResult e = eigh(o.mat());
  const Index last = e.eigenvalues.size() - 1;
  const double tol = 1e-9 * std::max(1.0, nrm);
  if (std::abs(e.eigenvalues(last) - nrm) > tol || std::abs(e.eigenvalues(0) + nrm) > tol) {
    throw ConstructionError("lecam_construction: spectrum of O must contain both +||O|| and -||O||");
  }
  const ComplexVector vp = e.eigenvectors.col(last);
  const ComplexVector vm = e.eigenvectors.col(0);
  const ComplexMatrix pp = vp * vp.adjoint();
  const ComplexMatrix pm = vm * vm.adjoint();
  DensityMatrix r0((0.5 + delta) * pp + (0.5 - delta) * pm);
  DensityMatrix r1((0.5 - delta) * pp + (0.5 + delta) * pm);
  const double e0 = (r0.mat() * o.mat()).trace().real();
  const double e1 = (r1.mat() * o.mat()).trace().real();
  if (std::abs(e0 - eps) > 1e-10 || std::abs(e1 + eps) > 1e-10) {
    throw ConstructionError("lecam_construction: expectation check failed");
  }
  return {std::move(r0), std::move(r1), delta, bernoulli_kl(0.5 + delta, 0.5 - delta), e0, e1};
}

// ---------------------------------------------------------------------------
// Hybrid argument on block-encoding queries

struct HybridRow {
  int t = 0;
  double cumulative_bound = 0.0;  // t ||U_0 - U_1||
};

struct HybridDemo {
  double delta = 0.0;
  double norm_direct = 0.0;
  double norm_closed_form = 0.0;
  double threshold = 1.0 / 3.0;
  int t_star = 0;  // smallest t with t ||U_0 - U_1|| >= threshold
  std::vector<HybridRow> rows;
};

/// sqrt(delta^2 + (1 - sqrt(1 - delta^2))^2).
inline double hybrid_closed_form(double delta) {
  const double g = 1.0 - std::sqrt(1.0 - delta * delta);
  return std::sqrt(delta * delta + g * g);
}

/// U_0 = Halmos(0), U_1 = Halmos(delta |nu><nu|) with delta = 2 eps / ||O||
/// and |nu> the top singular vector of O. `threshold` is the trace distance
/// that separates the two query sequences with success probability 2/3.
inline HybridDemo hybrid_bound_demo(const Observable& o, double eps, const std::vector<int>& t_values,
                                    double threshold = 1.0 / 3.0) {
  const double nrm = o.norm();
  if (!(nrm > 0.0)) throw ValidationError("hybrid_bound_demo: observable is zero");
  HybridDemo out;
  out.delta = 2.0 * eps / nrm;
  if (!(out.delta >= 0.0 && out.delta <= 1.0)) throw ValidationError("hybrid_bound_demo: delta must lie in [0, 1]");
  Eigen::JacobiSVD<ComplexMatrix> svd(o.mat(), Eigen::ComputeFullV);
  const ComplexVector nu = svd.matrixV().col(0);
  const Index d = o.dim();
  const ComplexMatrix u0 = halmos_dilate(ComplexMatrix::Zero(d, d));
  const ComplexMatrix u1 = halmos_dilate(out.delta * nu * nu.adjoint());
  out.norm_direct = op_norm(u0 - u1);
  out.norm_closed_form = hybrid_closed_form(out.delta);
  out.threshold = threshold;
  for (int t : t_values) out.rows.push_back({t, t * out.norm_direct});
  out.t_star = out.norm_direct > 0.0 ? static_cast<int>(std::ceil(threshold / out.norm_direct - 1e-12)) : 0;
  return out;
}

// ---------------------------------------------------------------------------
// BQP reduction

struct BqpInstance {
  double lambda = 0.0;
  int k = 0;
  double q = 0.0;
  double p_x = 0.0;
  PurifiedState purification;  // registers A (env) | S R (system)
  Observable obs;              // |0><0|_S (x) Pi_acc
  double threshold_a = 0.0;    // lambda^k 2/3
  double threshold_b = 0.0;    // lambda^k 1/3
  double oracle_value = 0.0;   // Tr(rho^k O)
  double identity_defect = 0.0;
  bool bernoulli_holds = false;
  Index phi_index = -1;        // basis index of |phi>, -1 when not a basis state
};

namespace detail {

// |phi> with Pi |phi> = 0: the last computational basis state annihilated by
// Pi, else a null eigenvector of Pi.
inline std::pair<ComplexVector, Index> null_state(const ComplexMatrix& pi) {
  const Index d = pi.rows();
  for (Index b = d - 1; b >= 0; --b) {
    if (std::abs(pi(b, b)) <= 1e-12) return {basis_state(d, b), b};
  }
  const EighResult e = eigh(pi);
  if (e.eigenvalues(0) <= 1e-12) return {e.eigenvectors.col(0), -1};
  throw ConstructionError("bqp_instance: no state annihilated by the accept projector");
}

}  // namespace detail

/// |Gamma_x> = sqrt(lambda)|0>_A|0>_S|psi_x> + sqrt(1 - lambda)|1>_A|1>_S|phi>
/// with lambda = 1 - 1/(q k) and |psi_x> = U_x |0...0>.
inline BqpInstance bqp_instance(const ComplexMatrix& u_x, const Observable& accept, double q, int k) {
  if (k < 1) throw ValidationError("bqp_instance: k must be >= 1");
  if (!(q * k > 1.0)) throw ValidationError("bqp_instance: need q k > 1 so that 0 < lambda < 1");
  if (u_x.rows() != u_x.cols()) throw ValidationError("bqp_instance: U_x must be square");
  const int r = qubits_for_dim(u_x.rows());
  require_within_cap(r + 2, "bqp_instance");
  if (unitarity_defect(u_x) > 1e-9) throw ValidationError("bqp_instance: U_x is not unitary");
  const ComplexMatrix& pi = accept.mat();
  if (pi.rows() != u_x.rows()) throw ValidationError("bqp_instance: projector acts on the wrong register");
  if ((pi * pi - pi).cwiseAbs().maxCoeff() > 1e-10) throw ValidationError("bqp_instance: Pi_acc is not a projector");

  const Index dr = u_x.rows();
  const ComplexVector psi = u_x.col(0);
  auto [phi, phi_index] = detail::null_state(pi);

  BqpInstance out{.lambda = 1.0 - 1.0 / (q * k), .k = k, .q = q, .p_x = 0.0, .purification = {}, .obs = Observable(kron(basis_op(2, 0, 0), pi))};
  out.p_x = psi.dot(pi * psi).real();
  out.phi_index = phi_index;

  ComplexVector gamma = ComplexVector::Zero(4 * dr);
  gamma.segment(0, dr) = std::sqrt(out.lambda) * psi;                  // A=0, S=0
  gamma.segment(3 * dr, dr) = std::sqrt(1.0 - out.lambda) * phi;       // A=1, S=1
  gamma /= gamma.norm();
  out.purification = make_purified_state(1, r + 1, std::move(gamma));

  const double lk = std::pow(out.lambda, k);
  out.threshold_a = lk * 2.0 / 3.0;
  out.threshold_b = lk / 3.0;
  const cplx oracle = trace_power_obs_oracle(out.purification.density(), out.obs, k);
  out.oracle_value = oracle.real();
  out.identity_defect = std::abs(oracle - lk * out.p_x);
  out.bernoulli_holds = lk >= 1.0 - 1.0 / q - 1e-15;
  return out;
}

}  // namespace powertrace::bounds
