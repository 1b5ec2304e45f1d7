#pragma once

// Singular value transformation simulated at the eigenvalue level: the
// transformed block is computed exactly from the eigendecomposition and
// dilated with one extra ancilla. Query counts follow the degree of the
// polynomial, as a phase-factor implementation would consume them.

#include <algorithm>
#include <cmath>

#include "powertrace/blockenc.hpp"
#include "powertrace/chebyshev.hpp"

namespace powertrace {

struct QueryLedger {
  long long u_rho_queries = 0;        // two per application of the rho encoding
  long long be_rho_applications = 0;  // one per polynomial degree
  int poly_degree = 0;
};

inline QueryLedger ledger_for_degree(int degree) {
  return {2LL * degree, static_cast<long long>(degree), degree};
}

/// p(A / alpha) as a (1, a + 1, 0) block encoding. The polynomial must have
/// a definite parity matching its degree and be bounded by 1 on [-1, 1].
inline BlockEncoding apply_poly(const BlockEncoding& source, const chebyshev::ChebyshevPoly& poly,
                                Materialize mode = Materialize::Auto) {
  using chebyshev::Parity;
  if (poly.parity() == Parity::None || poly.parity() != chebyshev::parity_of(poly.degree())) {
    throw ContractError("apply_poly: polynomial parity must equal degree mod 2");
  }
  const double sup = chebyshev::sup_norm_scan(poly, chebyshev::kScanNodes);
  if (sup > 1.0 + 1e-9) throw ContractError("apply_poly: polynomial exceeds 1 on [-1, 1]");
  if (hermitian_defect(source.block) > kHermitianTol * std::max(1.0, source.alpha)) {
    throw ValidationError("apply_poly: source block is not Hermitian");
  }
  const ComplexMatrix normalized = source.block / source.alpha;
  ComplexMatrix block = spectral_apply(normalized, [&](double x) {
    return chebyshev::clenshaw_eval(poly, std::clamp(x, -1.0, 1.0));
  });
  const int ancillas = source.ancillas + 1;
  std::optional<ComplexMatrix> dil;
  if (mode == Materialize::Auto && ancillas + source.sys_qubits() <= qubit_cap()) {
    dil = padded_halmos_dilation(block, 1.0, ancillas);
  }
  return make_block_encoding(std::move(block), 1.0, ancillas, 0.0, std::move(dil));
}

/// Block encoding of a polynomial approximation of rho^{k-1} plus the
/// bookkeeping that goes with it.
struct PowerEncoding {
  BlockEncoding be;
  QueryLedger ledger;
  chebyshev::ChebyshevPoly poly;
  double eps_poly = 0.0;        // requested ||p(rho) - rho^{k-1}|| budget
  double model_error = 0.0;     // measured ||p(rho) - rho^{k-1}||
  double chernoff_bound = 0.0;  // 2 exp(-m^2 / 2(k-1))
};

/// Truncated Chebyshev expansion of x^{k-1} at degree required_degree(k-1, eps).
inline chebyshev::ChebyshevPoly power_polynomial(int k, double eps) {
  const int m = chebyshev::required_degree(k - 1, eps);
  return chebyshev::truncate(chebyshev::power_expansion(k - 1), m).kept;
}

inline PowerEncoding power_block_encoding(const PurifiedState& pur, int k, double eps,
                                          Materialize mode = Materialize::Auto) {
  if (k < 2) throw ValidationError("power_block_encoding: k must be >= 2");
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("power_block_encoding: eps must lie in (0, 1]");
  const int degree = chebyshev::required_degree(k - 1, eps);
  auto poly = chebyshev::truncate(chebyshev::power_expansion(k - 1), degree).kept;
  const BlockEncoding source = density_block_encoding(pur, mode);
  BlockEncoding be = apply_poly(source, poly, mode);
  const DensityMatrix rho = pur.density();
  const double model_error = op_norm(be.block - rho.power(k - 1));
  return {std::move(be), ledger_for_degree(degree), std::move(poly), eps, model_error,
          chebyshev::chernoff_tail(k - 1, degree)};
}

/// Degree and query plan of the p(rho) O encoding without building matrices.
struct PowerObsPlan {
  double alpha_o = 1.0;
  double eps_poly = 0.0;     // eps_total / (2 ||O||), clipped to 1
  int degree = 0;            // required_degree(k - 1, eps_poly)
  int conservative_degree = 0;  // same formula with eps_total / (2 alpha_O ||O||)
  QueryLedger ledger;
};

inline PowerObsPlan plan_power_times_obs(int k, double eps_total, double obs_norm) {
  if (k < 2) throw ValidationError("power_times_obs: k must be >= 2");
  if (!(eps_total > 0.0 && eps_total <= 1.0)) throw ValidationError("power_times_obs: eps must lie in (0, 1]");
  PowerObsPlan plan;
  plan.alpha_o = std::max(1.0, obs_norm);
  plan.eps_poly = obs_norm > 0.0 ? std::min(1.0, eps_total / (2.0 * obs_norm)) : 1.0;
  plan.degree = chebyshev::required_degree(k - 1, plan.eps_poly);
  const double main_eps = obs_norm > 0.0 ? std::min(1.0, eps_total / (2.0 * plan.alpha_o * obs_norm)) : 1.0;
  plan.conservative_degree = chebyshev::required_degree(k - 1, main_eps);
  plan.ledger = ledger_for_degree(plan.degree);
  return plan;
}

struct PowerObsEncoding {
  BlockEncoding be;  // block = p(rho) O, alpha = alpha_O
  PowerEncoding power;
  PowerObsPlan plan;
};

/// (alpha_O, a + b + 1, alpha_O eps_poly) encoding of p(rho) O.
inline PowerObsEncoding power_times_obs(const PurifiedState& pur, const Observable& o, int k, double eps_total,
                                        Materialize mode = Materialize::Auto) {
  if (o.dim() != pur.sys_dim()) throw ValidationError("power_times_obs: observable dimension mismatch");
  const PowerObsPlan plan = plan_power_times_obs(k, eps_total, o.norm());
  PowerEncoding power = power_block_encoding(pur, k, plan.eps_poly, mode);
  const BlockEncoding obs_be = observable_block_encoding(o, mode);
  BlockEncoding be = be_product(power.be, obs_be, mode);
  be.err = obs_be.alpha * plan.eps_poly;
  return {std::move(be), std::move(power), plan};
}

}  // namespace powertrace
