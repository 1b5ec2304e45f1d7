#pragma once

// JSON encodings of the domain types (nlohmann::json objects keep keys sorted).

#include <nlohmann/json.hpp>

#include <string>

#include "powertrace/blockenc.hpp"
#include "powertrace/bounds_lab.hpp"
#include "powertrace/chebyshev.hpp"
#include "powertrace/estimator.hpp"
#include "powertrace/qsvt.hpp"

namespace powertrace {

using Json = nlohmann::json;

inline Json complex_to_json(cplx z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

inline cplx complex_from_json(const Json& j) { return {j.at("re").get<double>(), j.at("im").get<double>()}; }

/// {"dim", "re", "im"} with row-major flattened entries.
inline Json matrix_to_json(const ComplexMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
    }
  }
  return Json{{"dim", m.rows()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

inline ComplexMatrix matrix_from_json(const Json& j) {
  const auto d = j.at("dim").get<Index>();
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (d < 1 || re.size() != static_cast<std::size_t>(d * d) || im.size() != re.size()) {
    throw ValidationError("matrix json: entry count does not match dim");
  }
  ComplexMatrix m(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index c = 0; c < d; ++c) {
      const auto at = static_cast<std::size_t>(i * d + c);
      m(i, c) = cplx(re[at].get<double>(), im[at].get<double>());
    }
  }
  return m;
}

inline Json poly_to_json(const chebyshev::ChebyshevPoly& p) {
  Json coeffs = Json::object();
  for (const auto& [n, c] : p.coeffs()) coeffs[std::to_string(n)] = c;
  return Json{{"parity", chebyshev::to_string(p.parity())}, {"coeffs", std::move(coeffs)}};
}

inline chebyshev::ChebyshevPoly poly_from_json(const Json& j) {
  std::map<int, double> coeffs;
  for (const auto& [key, val] : j.at("coeffs").items()) {
    std::size_t used = 0;
    const int n = std::stoi(key, &used);
    if (used != key.size()) throw ValidationError("polynomial json: bad degree key '" + key + "'");
    coeffs[n] = val.get<double>();
  }
  return chebyshev::ChebyshevPoly(std::move(coeffs), chebyshev::parity_from_string(j.at("parity").get<std::string>()));
}

/// The dilation is not stored; a generic one is rebuilt on load when it fits.
inline Json block_encoding_to_json(const BlockEncoding& be) {
  return Json{{"block", matrix_to_json(be.block)},
              {"alpha", be.alpha},
              {"ancillas", be.ancillas},
              {"err", be.err},
              {"has_dilation", be.dilation.has_value()}};
}

inline BlockEncoding block_encoding_from_json(const Json& j) {
  ComplexMatrix block = matrix_from_json(j.at("block"));
  const double alpha = j.at("alpha").get<double>();
  const int ancillas = j.at("ancillas").get<int>();
  std::optional<ComplexMatrix> dil;
  if (j.value("has_dilation", false) && ancillas >= 1 && ancillas + qubits_for_dim(block.rows()) <= qubit_cap()) {
    dil = padded_halmos_dilation(block, alpha, ancillas);
  }
  return make_block_encoding(std::move(block), alpha, ancillas, j.at("err").get<double>(), std::move(dil));
}

inline Json to_json(const QueryLedger& l) {
  return Json{{"u_rho_queries", l.u_rho_queries}, {"be_rho_applications", l.be_rho_applications},
              {"poly_degree", l.poly_degree}};
}

inline Json to_json(const HadamardTestResult& h) {
  return Json{{"p_zero", h.p_zero}, {"w_setting", to_string(h.w_setting)}, {"circuit_qubits", h.circuit_qubits},
              {"p_closed_form", h.p_closed_form}};
}

inline Json to_json(const AeOutcome& a) {
  return Json{{"p_estimate", a.p_estimate}, {"grid_size_K", a.grid_size_K},
              {"raw_outcome_index", a.raw_outcome_index}, {"within_bound", a.within_bound}};
}

inline Json to_json(const EstimationReport& r) {
  Json hs = Json::array(), as = Json::array();
  for (const auto& h : r.hadamard) hs.push_back(to_json(h));
  for (const auto& a : r.ae) as.push_back(to_json(a));
  return Json{{"estimate", complex_to_json(r.estimate)},
              {"oracle_value", complex_to_json(r.oracle_value)},
              {"k", r.k},
              {"eps_requested", r.eps_requested},
              {"eps_poly_budget", r.eps_poly_budget},
              {"eps_ae_budget", r.eps_ae_budget},
              {"ae_queries_K", r.ae_queries_K},
              {"u_rho_queries_total", r.u_rho_queries_total},
              {"seed", r.seed},
              {"mode", to_string(r.mode)},
              {"alpha_o", r.alpha_o},
              {"poly_operator_budget", r.poly_operator_budget},
              {"poly_degree", r.poly_degree},
              {"conservative_degree", r.conservative_degree},
              {"model_error", r.model_error},
              {"hermitian", r.hermitian},
              {"hadamard", std::move(hs)},
              {"ae", std::move(as)},
              {"error_bound", r.error_bound},
              {"abs_error", r.abs_error()},
              {"pass", r.success()}};
}

inline Json to_json(const bounds::SwapTestResult& s) {
  return Json{{"mean", s.mean},         {"stderr", s.stderr_},       {"copies_used", s.copies_used},
              {"shots", s.shots},       {"surrogate", s.surrogate}, {"exact_mean", s.exact_mean},
              {"shot_variance", s.shot_variance}};
}

inline Json to_json(const bounds::BqpInstance& b) {
  return Json{{"lambda", b.lambda},
              {"k", b.k},
              {"q", b.q},
              {"p_x", b.p_x},
              {"threshold_a", b.threshold_a},
              {"threshold_b", b.threshold_b},
              {"oracle_value", b.oracle_value},
              {"identity_defect", b.identity_defect},
              {"bernoulli_holds", b.bernoulli_holds},
              {"phi_index", b.phi_index}};
}

}  // namespace powertrace
