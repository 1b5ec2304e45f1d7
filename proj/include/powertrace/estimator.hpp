#pragma once

// Hadamard-test readout of a block-encoded p(rho) O, simulated amplitude
// estimation, the end-to-end Tr(rho^k O) estimator and the entropy and
// ratio estimators built on it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "powertrace/qsvt.hpp"
#include "powertrace/rng.hpp"

namespace powertrace {

inline constexpr double kAeSuccessProbability = 8.0 / (std::numbers::pi * std::numbers::pi);

enum class WSetting { I, SDagger };
enum class AeMode { Sampled, Ideal };

inline std::string to_string(WSetting w) { return w == WSetting::I ? "I" : "S_dagger"; }
inline std::string to_string(AeMode m) { return m == AeMode::Sampled ? "sampled" : "ideal"; }

inline AeMode ae_mode_from_string(const std::string& s) {
  if (s == "sampled") return AeMode::Sampled;
  if (s == "ideal") return AeMode::Ideal;
  throw ValidationError("unknown amplitude-estimation mode '" + s + "'");
}

struct HadamardTestResult {
  double p_zero = 0.5;
  WSetting w_setting = WSetting::I;
  int circuit_qubits = 0;
  double p_closed_form = 0.5;  // 1/2 + Re or Im Tr(rho block) / (2 alpha)
};

/// Control qubit c, block-encoding ancillas b, purification registers E and
/// I, laid out in that order. Runs H_c, controlled dilation on (b, I),
/// optional S^dag on c, H_c on |0>_c |0>_b |rho>_EI and returns the exact
/// probability of reading 0 on c.
inline HadamardTestResult hadamard_test_prob(const BlockEncoding& be, const PurifiedState& pur, WSetting w) {
  if (!be.dilation) throw ValidationError("hadamard_test_prob: block encoding has no explicit dilation");
  if (be.sys_dim() != pur.sys_dim()) throw ValidationError("hadamard_test_prob: system dimension mismatch");
  const int b = be.ancillas;
  const int e = pur.env_qubits;
  const int n = pur.sys_qubits;
  const int total = 1 + b + e + n;
  require_within_cap(total, "hadamard test circuit");

  ComplexMatrix state = ComplexMatrix::Zero(Index{1} << total, 1);
  state.topRows(pur.vec.size()) = pur.vec;

  state = apply_on_qubits(hadamard(), {0}, state, total);

  const Index du = be.dilation->rows();
  ComplexMatrix controlled = ComplexMatrix::Identity(2 * du, 2 * du);
  controlled.bottomRightCorner(du, du) = *be.dilation;
  std::vector<int> targets{0};
  for (int i = 0; i < b; ++i) targets.push_back(1 + i);
  for (int i = 0; i < n; ++i) targets.push_back(1 + b + e + i);
  state = apply_on_qubits(controlled, targets, state, total);

  if (w == WSetting::SDagger) {
    ComplexMatrix sdg = identity(2);
    sdg(1, 1) = cplx(0.0, -1.0);
    state = apply_on_qubits(sdg, {0}, state, total);
  }
  state = apply_on_qubits(hadamard(), {0}, state, total);

  const Index half = Index{1} << (total - 1);
  const double p0 = state.topRows(half).squaredNorm();

  const cplx overlap = (pur.reduced() * be.block).trace() / be.alpha;
  const double signal = w == WSetting::I ? overlap.real() : overlap.imag();
  return {std::clamp(p0, 0.0, 1.0), w, total, 0.5 + 0.5 * signal};
}

struct AeOutcome {
  double p_estimate = 0.0;
  int grid_size_K = 0;
  int raw_outcome_index = -1;  // -1 in ideal mode
  bool within_bound = false;
};

/// 2 pi sqrt(p(1-p)) / K + pi^2 / K^2.
inline double ae_error_bound(double p, int K) {
  const double k = static_cast<double>(K);
  return 2.0 * std::numbers::pi * std::sqrt(std::max(0.0, p * (1.0 - p))) / k +
         std::numbers::pi * std::numbers::pi / (k * k);
}

/// Outcome distribution of canonical amplitude estimation on a K-point grid:
/// an equal mixture of the Fejer kernels centred at +theta and -theta, with
/// sin^2(pi theta) = p.
inline std::vector<double> ae_outcome_distribution(double p, int K) {
  const double theta = std::asin(std::sqrt(std::clamp(p, 0.0, 1.0))) / std::numbers::pi;
  auto fejer = [K](double delta) {
    const double s = std::sin(std::numbers::pi * delta);
    if (std::abs(s) < 1e-15) return 1.0;
    const double num = std::sin(std::numbers::pi * K * delta);
    return num * num / (static_cast<double>(K) * K * s * s);
  };
  std::vector<double> probs(static_cast<std::size_t>(K));
  double total = 0.0;
  for (int y = 0; y < K; ++y) {
    const double frac = static_cast<double>(y) / K;
    probs[static_cast<std::size_t>(y)] = 0.5 * fejer(frac - theta) + 0.5 * fejer(frac + theta);
    total += probs[static_cast<std::size_t>(y)];
  }
  for (double& q : probs) q /= total;
  return probs;
}

inline void require_valid_grid(int K) {
  if (K < 2 || !is_power_of_two(K)) throw ValidationError("amplitude_estimate: K must be a power of two >= 2");
}

inline AeOutcome amplitude_estimate(double p_true, int K, AeMode mode, std::uint64_t seed) {
  if (!(p_true >= -1e-12 && p_true <= 1.0 + 1e-12)) throw ValidationError("amplitude_estimate: p must lie in [0, 1]");
  require_valid_grid(K);
  const double p = std::clamp(p_true, 0.0, 1.0);
  const double bound = ae_error_bound(p, K);
  AeOutcome out;
  out.grid_size_K = K;
  if (mode == AeMode::Ideal) {
    out.p_estimate = p + bound <= 1.0 ? p + bound : std::max(0.0, p - bound);
    out.within_bound = true;
    return out;
  }
  const auto probs = ae_outcome_distribution(p, K);
  Rng rng = make_rng(seed);
  const double u = uniform01(rng);
  double acc = 0.0;
  int y = K - 1;
  for (int i = 0; i < K; ++i) {
    acc += probs[static_cast<std::size_t>(i)];
    if (u < acc) {
      y = i;
      break;
    }
  }
  const double s = std::sin(std::numbers::pi * y / K);
  out.p_estimate = std::clamp(s * s, 0.0, 1.0);
  out.raw_outcome_index = y;
  out.within_bound = std::abs(out.p_estimate - p) <= bound + 1e-12;
  return out;
}

/// Smallest power-of-two K whose amplitude-estimation bound at the worst
/// case p(1-p) = 1/4, pi/K + pi^2/K^2, is at most eps_prime.
inline int choose_ae_grid(double eps_prime) {
  if (!(eps_prime > 0.0)) throw ValidationError("choose_ae_grid: accuracy must be positive");
  int K = 2;
  while (ae_error_bound(0.5, K) > eps_prime) {
    if (K > (1 << 29)) throw ResourceError("choose_ae_grid: accuracy unreachable");
    K *= 2;
  }
  return K;
}

/// Query plan of the full estimator; needs no matrices.
struct EstimatorPlan {
  PowerObsPlan power;
  double eps_prime = 0.0;  // eps / (4 alpha_O)
  int K = 0;
  int passes = 1;
  long long u_rho_queries_total = 0;
};

/// `grid_override` > 0 fixes K instead of deriving it from eps.
inline EstimatorPlan plan_estimate(int k, double eps, double obs_norm, bool hermitian, int grid_override = 0) {
  if (k < 2) throw ValidationError("estimate_trace_power: k must be >= 2");
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("estimate_trace_power: eps must lie in (0, 1]");
  EstimatorPlan plan;
  plan.power = plan_power_times_obs(k, eps, obs_norm);
  plan.eps_prime = eps / (4.0 * plan.power.alpha_o);
  if (grid_override > 0) require_valid_grid(grid_override);
  plan.K = grid_override > 0 ? grid_override : choose_ae_grid(plan.eps_prime);
  plan.passes = hermitian ? 1 : 2;
  plan.u_rho_queries_total = 2LL * plan.power.degree * plan.K * plan.passes;
  return plan;
}

struct EstimationReport {
  cplx estimate = 0.0;
  cplx oracle_value = 0.0;
  int k = 0;
  double eps_requested = 0.0;
  double eps_poly_budget = 0.0;  // share of eps given to the polynomial stage
  double eps_ae_budget = 0.0;    // probability accuracy eps' of each AE call
  int ae_queries_K = 0;
  long long u_rho_queries_total = 0;
  std::uint64_t seed = 0;
  AeMode mode = AeMode::Sampled;

  double alpha_o = 1.0;
  double poly_operator_budget = 0.0;  // ||p(rho) - rho^{k-1}|| target
  int poly_degree = 0;
  int conservative_degree = 0;
  double model_error = 0.0;  // measured ||p(rho) - rho^{k-1}||
  bool hermitian = true;
  std::vector<HadamardTestResult> hadamard;
  std::vector<AeOutcome> ae;
  double error_bound = 0.0;  // eps, or sqrt(2) eps for two passes

  double abs_error() const { return std::abs(estimate - oracle_value); }
  bool success() const { return abs_error() <= error_bound; }
};

/// Tr(rho^k O) to additive error eps with probability >= 8/pi^2 (per pass).
inline EstimationReport estimate_trace_power(const PurifiedState& pur, const Observable& o, int k, double eps,
                                             AeMode mode, std::uint64_t seed, int grid_override = 0) {
  if (k < 2) throw ValidationError("estimate_trace_power: k must be >= 2");
  if (!(eps > 0.0)) throw ValidationError("estimate_trace_power: eps must be positive");
  const EstimatorPlan plan = plan_estimate(k, eps, o.norm(), o.hermitian(), grid_override);
  const PowerObsEncoding enc = power_times_obs(pur, o, k, eps);

  EstimationReport r;
  r.k = k;
  r.eps_requested = eps;
  r.eps_poly_budget = eps / 2.0;
  r.eps_ae_budget = plan.eps_prime;
  r.ae_queries_K = plan.K;
  r.u_rho_queries_total = plan.u_rho_queries_total;
  r.seed = seed;
  r.mode = mode;
  r.alpha_o = enc.be.alpha;
  r.poly_operator_budget = plan.power.eps_poly;
  r.poly_degree = plan.power.degree;
  r.conservative_degree = plan.power.conservative_degree;
  r.model_error = enc.power.model_error;
  r.hermitian = o.hermitian();
  r.oracle_value = trace_power_obs_oracle(pur.density(), o, k);
  r.error_bound = o.hermitian() ? eps : std::sqrt(2.0) * eps;

  std::vector<WSetting> passes{WSetting::I};
  if (!o.hermitian()) passes.push_back(WSetting::SDagger);
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < passes.size(); ++i) {
    const auto ht = hadamard_test_prob(enc.be, pur, passes[i]);
    const auto ae = amplitude_estimate(ht.p_zero, plan.K, mode, derive_seed(seed, i));
    const double part = enc.be.alpha * (2.0 * ae.p_estimate - 1.0);
    (passes[i] == WSetting::I ? re : im) = part;
    r.hadamard.push_back(ht);
    r.ae.push_back(ae);
  }
  r.estimate = cplx(re, im);
  return r;
}

// ---------------------------------------------------------------------------
// Applications

struct EntropyEstimate {
  double value = 0.0;
  double error_bound = 0.0;
  double trace_estimate = 0.0;  // estimate of Tr(rho^order)
  EstimationReport report;
};

inline Observable identity_observable(Index dim) { return Observable(identity(dim)); }

/// S_alpha = log(Tr rho^alpha) / (1 - alpha), natural log.
inline EntropyEstimate renyi_entropy(const PurifiedState& pur, int order, double eps, AeMode mode,
                                     std::uint64_t seed) {
  if (order < 2) throw ValidationError("renyi_entropy: order must be >= 2");
  auto report = estimate_trace_power(pur, identity_observable(pur.sys_dim()), order, eps, mode, seed);
  const double t = report.estimate.real();
  if (t - eps <= 0.0) throw UnreliableEstimateError("renyi_entropy: trace estimate indistinguishable from 0");
  const double floor = std::pow(static_cast<double>(pur.sys_dim()), 1.0 - order);
  const double lower = std::max(t - eps, floor);
  EntropyEstimate out;
  out.trace_estimate = t;
  out.value = std::log(t) / (1.0 - order);
  out.error_bound = eps / lower / (order - 1.0);
  out.report = std::move(report);
  return out;
}

enum class TsallisForm { Unshifted, Standard };

/// Unshifted: Tr(rho^q) / (1 - q). Standard: (1 - Tr(rho^q)) / (q - 1).
inline EntropyEstimate tsallis_entropy(const PurifiedState& pur, int q, double eps, AeMode mode, std::uint64_t seed,
                                       TsallisForm form = TsallisForm::Unshifted) {
  if (q < 2) throw ValidationError("tsallis_entropy: q must be >= 2");
  auto report = estimate_trace_power(pur, identity_observable(pur.sys_dim()), q, eps, mode, seed);
  const double t = report.estimate.real();
  EntropyEstimate out;
  out.trace_estimate = t;
  out.value = form == TsallisForm::Unshifted ? t / (1.0 - q) : (1.0 - t) / (q - 1.0);
  out.error_bound = eps / (q - 1.0);
  out.report = std::move(report);
  return out;
}

inline double tsallis_from_trace(double t, int q, TsallisForm form) {
  return form == TsallisForm::Unshifted ? t / (1.0 - q) : (1.0 - t) / (q - 1.0);
}

struct VdRatio {
  double ratio_estimate = 0.0;
  double error_bound = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;
  double oracle_ratio = 0.0;
  double joint_success_probability = kAeSuccessProbability * kAeSuccessProbability;
  std::vector<EstimationReport> numerator_runs;
  std::vector<EstimationReport> denominator_runs;
};

namespace detail {
inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}
}  // namespace detail

/// Tr(rho^k O) / Tr(rho^k) with the bound
/// |a/b - a~/b~| <= |a - a~| / b + |a| |b - b~| / b^2, evaluated at
/// b = b~ - eps_den and |a| = |a~| + eps_num. `votes` > 1 takes the median of
/// that many independent runs for each of numerator and denominator.
inline VdRatio vd_ratio(const PurifiedState& pur, const Observable& o, int k, double eps_num, double eps_den,
                        AeMode mode, std::uint64_t seed, int votes = 1) {
  if (k < 2) throw ValidationError("vd_ratio: k must be >= 2");
  if (votes < 1 || votes % 2 == 0) throw ValidationError("vd_ratio: votes must be a positive odd number");
  if (!o.hermitian()) throw ValidationError("vd_ratio: observable must be Hermitian");
  VdRatio out;
  std::vector<double> nums, dens;
  const Observable id = identity_observable(pur.sys_dim());
  for (int v = 0; v < votes; ++v) {
    out.numerator_runs.push_back(estimate_trace_power(pur, o, k, eps_num, mode, derive_seed(seed, 2 * v)));
    out.denominator_runs.push_back(estimate_trace_power(pur, id, k, eps_den, mode, derive_seed(seed, 2 * v + 1)));
    nums.push_back(out.numerator_runs.back().estimate.real());
    dens.push_back(out.denominator_runs.back().estimate.real());
  }
  out.numerator = detail::median(nums);
  out.denominator = detail::median(dens);
  const double b_low = out.denominator - eps_den;
  if (b_low <= 0.0) throw UnreliableEstimateError("vd_ratio: denominator indistinguishable from 0");
  out.ratio_estimate = out.numerator / out.denominator;
  out.error_bound = eps_num / b_low + (std::abs(out.numerator) + eps_num) * eps_den / (b_low * b_low);
  out.oracle_ratio = out.numerator_runs.front().oracle_value.real() / out.denominator_runs.front().oracle_value.real();
  return out;
}

}  // namespace powertrace
