#pragma once

// Chebyshev-basis expansion of x^k, truncation with exact and Chernoff tail
// bounds, Clenshaw evaluation, sup-norm scans and the degree lower-bound
// fixed point.

#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "powertrace/errors.hpp"

namespace powertrace::chebyshev {

enum class Parity { Even, Odd, None };

inline std::string to_string(Parity p) {
  switch (p) {
    case Parity::Even: return "even";
    case Parity::Odd: return "odd";
    case Parity::None: return "none";
  }
  return "none";
}

inline Parity parity_from_string(const std::string& s) {
  if (s == "even") return Parity::Even;
  if (s == "odd") return Parity::Odd;
  if (s == "none") return Parity::None;
  throw ValidationError("unknown parity '" + s + "'");
}

inline Parity parity_of(int n) { return (n % 2 == 0) ? Parity::Even : Parity::Odd; }

/// Polynomial sum_n c_n T_n(x) stored sparsely. Zero coefficients are never
/// stored, so degree() is the largest stored index.
class ChebyshevPoly {
 public:
  ChebyshevPoly() = default;

  ChebyshevPoly(std::map<int, double> coeffs, Parity parity) : parity_(parity) {
    for (const auto& [n, c] : coeffs) {
      if (n < 0) throw ValidationError("Chebyshev index must be nonnegative");
      if (!std::isfinite(c)) throw ValidationError("Chebyshev coefficient is not finite");
      if (c != 0.0) coeffs_.emplace(n, c);
    }
    for (const auto& [n, c] : coeffs_) {
      if ((parity_ == Parity::Even && n % 2 != 0) || (parity_ == Parity::Odd && n % 2 == 0)) {
        throw ValidationError("coefficient T_" + std::to_string(n) + " breaks declared parity " +
                              to_string(parity_));
      }
    }
  }

  /// The single basis polynomial T_n.
  static ChebyshevPoly basis(int n) { return ChebyshevPoly({{n, 1.0}}, parity_of(n)); }

  const std::map<int, double>& coeffs() const { return coeffs_; }
  Parity parity() const { return parity_; }
  int degree() const { return coeffs_.empty() ? 0 : coeffs_.rbegin()->first; }

  double coeff(int n) const {
    auto it = coeffs_.find(n);
    return it == coeffs_.end() ? 0.0 : it->second;
  }

  double abs_sum() const {
    double s = 0.0;
    for (const auto& [n, c] : coeffs_) s += std::abs(c);
    return s;
  }

 private:
  std::map<int, double> coeffs_;
  Parity parity_ = Parity::None;
};

inline constexpr int kMaxPower = 1024;

/// x^k = 2^{1-k} sum_{j <= k/2} alpha_j C(k, j) T_{k-2j}(x), alpha_{k/2} = 1/2
/// for even k and 1 otherwise. Binomials are evaluated in log space.
inline ChebyshevPoly power_expansion(int k) {
  if (k < 1 || k > kMaxPower) {
    throw ValidationError("power_expansion: k must lie in [1, " + std::to_string(kMaxPower) + "]");
  }
  std::map<int, double> coeffs;
  const double log_k_fact = std::lgamma(k + 1.0);
  for (int j = 0; 2 * j <= k; ++j) {
    const double alpha = (k % 2 == 0 && 2 * j == k) ? 0.5 : 1.0;
    const double log_c = log_k_fact - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0) +
                         (1.0 - k) * std::numbers::ln2 + std::log(alpha);
    const double c = std::exp(log_c);
    if (c >= 1e-300) coeffs[k - 2 * j] = c;
  }
  return ChebyshevPoly(std::move(coeffs), parity_of(k));
}

/// Smallest m >= sqrt(2k ln(2/eps)) with the parity of k, capped at k (the
/// exact expansion degree).
inline int required_degree(int k, double eps) {
  if (k < 1) throw ValidationError("required_degree: k must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0)) throw ValidationError("required_degree: eps must lie in (0, 1]");
  const double bound = std::sqrt(2.0 * k * std::log(2.0 / eps));
  int m = static_cast<int>(std::ceil(bound - 1e-12));
  if (m < 0) m = 0;
  if ((m - k) % 2 != 0) ++m;
  return std::min(m, k);
}

/// 2 exp(-m^2 / 2k).
inline double chernoff_tail(int k, int m) {
  return 2.0 * std::exp(-static_cast<double>(m) * m / (2.0 * k));
}

struct TruncationReport {
  ChebyshevPoly kept;
  double tail_exact = 0.0;
  double tail_chernoff = std::numeric_limits<double>::quiet_NaN();
  int degree = 0;
};

/// Keeps the modes T_n with n <= m. The Chernoff bound is filled in when the
/// exponent k of the expanded power is supplied.
inline TruncationReport truncate(const ChebyshevPoly& expansion, int m, std::optional<int> k = std::nullopt) {
  if (m < 0) throw ValidationError("truncate: m must be >= 0");
  std::map<int, double> kept;
  double tail = 0.0;
  for (const auto& [n, c] : expansion.coeffs()) {
    if (n <= m) {
      kept.emplace(n, c);
    } else {
      tail += c;
    }
  }
  TruncationReport r;
  r.kept = ChebyshevPoly(std::move(kept), expansion.parity());
  r.tail_exact = tail;
  r.degree = r.kept.degree();
  if (k) r.tail_chernoff = chernoff_tail(*k, m);
  return r;
}

/// Clenshaw backward recurrence for sum c_n T_n(x), |x| <= 1.
inline double clenshaw_eval(const ChebyshevPoly& p, double x) {
  if (!(std::abs(x) <= 1.0)) throw ValidationError("clenshaw_eval: |x| must be <= 1");
  const int n = p.degree();
  double b1 = 0.0;
  double b2 = 0.0;
  for (int j = n; j >= 1; --j) {
    const double b0 = p.coeff(j) + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return p.coeff(0) + x * b1 - b2;
}

/// Chebyshev nodes cos(pi (j + 1/2) / n) plus both endpoints.
inline std::vector<double> chebyshev_grid(int n) {
  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(n) + 2);
  xs.push_back(-1.0);
  for (int j = 0; j < n; ++j) xs.push_back(std::cos(std::numbers::pi * (j + 0.5) / n));
  xs.push_back(1.0);
  return xs;
}

/// max over the grid of |x^k - p(x)|; a lower bound on the sup norm on [-1, 1].
inline double sup_error_scan(const ChebyshevPoly& p, int k, int grid_size) {
  if (grid_size < 2) throw ValidationError("sup_error_scan: grid_size must be >= 2");
  double worst = 0.0;
  for (double x : chebyshev_grid(grid_size)) {
    worst = std::max(worst, std::abs(std::pow(x, k) - clenshaw_eval(p, x)));
  }
  return worst;
}

/// max over the grid of |p(x)|.
inline double sup_norm_scan(const ChebyshevPoly& p, int grid_size) {
  double worst = 0.0;
  for (double x : chebyshev_grid(grid_size)) worst = std::max(worst, std::abs(clenshaw_eval(p, x)));
  return worst;
}

inline constexpr int kScanNodes = 4096;

/// Smallest parity-respecting degree whose truncation of x^k scans at or
/// below eps. Binary search; the truncation error is monotone in m because
/// every dropped coefficient is positive.
inline int minimal_empirical_degree(int k, double eps, int grid_size = kScanNodes) {
  const ChebyshevPoly full = power_expansion(k);
  auto ok = [&](int m) { return sup_error_scan(truncate(full, m).kept, k, grid_size) <= eps; };
  // Candidate degrees share parity with k: m = (k % 2) + 2 i.
  int lo = 0;
  int hi = k / 2;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (ok(k % 2 + 2 * mid)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return k % 2 + 2 * lo;
}

/// Fixed point of d^2 = 2k [ln(pi^2 / 2 eps) - ln(pi^2 + ln d)] started from
/// d0 = sqrt(2k ln(pi^2 / 2 eps)).
inline double degree_lower_bound_solve(int k, double eps) {
  if (k < 2) throw ValidationError("degree_lower_bound_solve: k must be >= 2");
  if (!(eps > 0.0 && eps <= 0.1)) throw ValidationError("degree_lower_bound_solve: eps must lie in (0, 0.1]");
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  const double lead = std::log(pi2 / (2.0 * eps));
  double d = std::sqrt(2.0 * k * lead);
  for (int it = 0; it < 10000; ++it) {
    const double next = std::sqrt(2.0 * k * (lead - std::log(pi2 + std::log(d))));
    if (!std::isfinite(next)) throw NumericalError("degree_lower_bound_solve: non-finite iterate");
    if (std::abs(next - d) < 1e-9) return next;
    d = next;
  }
  throw NumericalError("degree_lower_bound_solve: no convergence in 10000 iterations");
}

}  // namespace powertrace::chebyshev
