#pragma once

// Experiment suites, configuration and on-disk persistence for the CLI.

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "powertrace/bounds_lab.hpp"
#include "powertrace/chebyshev.hpp"
#include "powertrace/estimator.hpp"
#include "powertrace/fit.hpp"
#include "powertrace/instances.hpp"
#include "powertrace/serialize.hpp"

#ifndef POWERTRACE_VERSION
#define POWERTRACE_VERSION "dev"
#endif

namespace powertrace::harness {

inline constexpr const char* kToolVersion = POWERTRACE_VERSION;

// ---------------------------------------------------------------------------
// Formatting and files

inline std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt(long long x) { return std::to_string(x); }
inline std::string fmt(int x) { return std::to_string(x); }
inline std::string fmt(bool x) { return x ? "true" : "false"; }
inline std::string fmt(const std::string& s) { return s; }
inline std::string fmt(const char* s) { return s; }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  template <class... Ts>
  void add(const Ts&... cells) {
    std::vector<std::string> row{fmt(cells)...};
    if (row.size() != header.size()) throw Error("csv row width does not match header");
    rows.push_back(std::move(row));
  }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

/// Write to a sibling temporary and rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot write " + tmp);
    f << content;
    if (!f.flush()) throw Error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Runs body(i) for i in [0, n) on `jobs` threads. Results must be written
/// to per-index slots so output order does not depend on scheduling.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
        next = n;
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// ---------------------------------------------------------------------------
// Configuration

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"approx", "estimate", "baseline", "bounds", "bqp", "apps", "separation"};
  return names;
}

/// Every key a suite accepts, with its default.
inline Json suite_defaults(const std::string& suite) {
  if (suite == "approx") {
    return {{"seed", 0}, {"k_values", {8, 16, 32, 64, 128}}, {"eps", 1e-3}, {"grid", chebyshev::kScanNodes}};
  }
  if (suite == "estimate") {
    return {{"seed", 1},
            {"qubits", 2},
            {"rank", 4},
            {"state_kind", "random_mixed"},
            {"state_name", "zero"},
            {"observable_kind", "random_hermitian"},
            {"observable_name", "proj0"},
            {"pauli", "ZZ"},
            {"k_values", {4, 8, 16}},
            {"eps", 0.05},
            {"runs", 200},
            {"mode", "sampled"},
            {"ae_grid", 0},
            {"pass_threshold", kAeSuccessProbability - 0.05}};
  }
  if (suite == "baseline") {
    return {{"seed", 2},      {"qubits", 1}, {"rank", 2},
            {"k", 3},         {"shots_values", {250, 1000, 4000, 16000, 64000}},
            {"repeats", 100},  {"slope_tolerance", 0.05}};
  }
  if (suite == "bounds") {
    return {{"seed", 0},
            {"helstrom_k_values", {10, 20, 40, 80}},
            {"helstrom_c", 0.5},
            {"eps_values", {0.05, 0.02, 0.01, 0.005, 0.002, 0.001}},
            {"hybrid_threshold", 1.0 / 3.0}};
  }
  if (suite == "bqp") {
    return {{"seed", 7}, {"circuits", 1}, {"register_qubits", 3}, {"q_values", {10}}, {"k_values", {5}}};
  }
  if (suite == "apps") {
    return {{"seed", 3},         {"renyi_eps", 0.05}, {"vd_runs", 200},  {"vd_qubits", 1}, {"vd_k", 2},
            {"vd_eps_num", 0.05}, {"vd_eps_den", 0.05}, {"vd_votes", 3}, {"mode", "sampled"},
            {"coverage_threshold", 0.95}};
  }
  if (suite == "separation") {
    return {{"seed", 4},
            {"qubits", 1},
            {"rank", 2},
            {"observable", "z0"},
            {"k_values", {4, 8, 16, 32, 64}},
            {"eps", 0.05},
            {"confidence", kAeSuccessProbability},
            {"swap_range", {0.85, 1.15}},
            {"qsvt_max_exponent", 0.65}};
  }
  throw ConfigError("unknown suite '" + suite + "'");
}

/// Parses a flat JSON config; syntax errors report line and column.
inline Json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) throw ConfigError(origin + ":1:1: config must be a JSON object");
    return j;
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < stop; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::string what = e.what();
    const auto pos = what.find("parse error");
    if (pos != std::string::npos) what = what.substr(pos);
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
  }
}

inline Json load_config_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path.string() + ": cannot open config");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

/// Defaults overlaid with `overrides`; unknown keys and type changes are errors.
inline Json merge_config(const std::string& suite, const Json& overrides) {
  Json cfg = suite_defaults(suite);
  for (const auto& [key, val] : overrides.items()) {
    if (key == "suite") continue;
    if (!cfg.contains(key)) throw ConfigError("config: unknown key '" + key + "' for suite " + suite);
    const Json& def = cfg[key];
    const bool ok = (def.is_number() && val.is_number()) || (def.is_string() && val.is_string()) ||
                    (def.is_array() && val.is_array()) || (def.is_boolean() && val.is_boolean());
    if (!ok) throw ConfigError("config: key '" + key + "' has the wrong type");
    cfg[key] = val;
  }
  cfg["suite"] = suite;
  return cfg;
}

inline std::string config_hash(const Json& cfg) { return hex16(fnv1a64(cfg.dump())); }

template <class T>
std::vector<T> list_of(const Json& cfg, const std::string& key) {
  auto v = cfg.at(key).get<std::vector<T>>();
  if (v.empty()) throw ConfigError("config: '" + key + "' must be non-empty");
  return v;
}

// ---------------------------------------------------------------------------
// Instances

struct InstanceSpec {
  int qubits = 1;
  int rank = 1;
  std::uint64_t seed = 0;
  std::string state_kind = "random_mixed";  // random_mixed | diagonal | pure | named
  std::string observable_kind = "random_hermitian";  // pauli_string | projector | random_hermitian | named
  std::string state_name = "zero";
  std::string observable_name = "proj0";
  std::string pauli = "Z";
  int k = 2;
  double eps = 0.05;

  Json to_json() const {
    return Json{{"qubits", qubits},       {"rank", rank},
                {"seed", seed},           {"state_kind", state_kind},
                {"observable_kind", observable_kind}, {"state_name", state_name},
                {"observable_name", observable_name}, {"pauli", pauli},
                {"k", k},                 {"eps", eps}};
  }
};

inline void validate(const InstanceSpec& s) {
  if (s.qubits < 1) throw ValidationError("instance: qubits must be >= 1");
  require_within_cap(s.qubits, "instance");
  if (s.rank < 1 || s.rank > (1 << s.qubits)) throw ValidationError("instance: rank must lie in [1, 2^qubits]");
}

inline DensityMatrix build_state(const InstanceSpec& s) {
  validate(s);
  const auto seed = derive_seed(s.seed, 0);
  if (s.state_kind == "random_mixed") return random_density(s.qubits, s.rank, seed);
  if (s.state_kind == "diagonal") return random_diagonal_density(s.qubits, s.rank, seed);
  if (s.state_kind == "pure") return random_pure_density(s.qubits, seed);
  if (s.state_kind == "named") return named_state(s.state_name, s.qubits);
  throw ValidationError("instance: unknown state_kind '" + s.state_kind + "'");
}

inline Observable build_observable(const InstanceSpec& s) {
  validate(s);
  if (s.observable_kind == "pauli_string") {
    if (static_cast<int>(s.pauli.size()) != s.qubits) throw ValidationError("instance: pauli string length != qubits");
    return Observable(pauli_string(s.pauli));
  }
  if (s.observable_kind == "projector") {
    Rng rng = make_rng(s.seed, 1);
    const ComplexMatrix u = random_unitary(Index{1} << s.qubits, rng);
    const ComplexVector v = u.col(0);
    return Observable(v * v.adjoint());
  }
  if (s.observable_kind == "random_hermitian") return random_hermitian(s.qubits, derive_seed(s.seed, 1));
  if (s.observable_kind == "named") return named_observable(s.observable_name, s.qubits);
  throw ValidationError("instance: unknown observable_kind '" + s.observable_kind + "'");
}

// ---------------------------------------------------------------------------
// Suites

struct SuiteOutput {
  Json records = Json::array();  // report or row objects, one per record
  CsvTable table;
  Json summary = Json::object();
  bool ok = true;
};

inline SuiteOutput run_approx(const Json& cfg) {
  const auto ks = list_of<int>(cfg, "k_values");
  const double eps = cfg.at("eps").get<double>();
  const int grid = cfg.at("grid").get<int>();
  SuiteOutput out;
  out.table.header = {"k", "eps", "formula_degree", "sup_error", "within_eps", "minimal_degree",
                      "transcendental_degree", "tail_exact", "tail_chernoff"};
  std::vector<double> xs, ys;
  for (int k : ks) {
    const int deg = chebyshev::required_degree(k, eps);
    const auto tr = chebyshev::truncate(chebyshev::power_expansion(k), deg, k);
    const double err = chebyshev::sup_error_scan(tr.kept, k, grid);
    const int mind = chebyshev::minimal_empirical_degree(k, eps, grid);
    const double lower = (eps <= 0.1 && k >= 2) ? chebyshev::degree_lower_bound_solve(k, eps) : std::nan("");
    const bool within = err <= eps;
    out.ok = out.ok && within;
    out.table.add(k, eps, deg, err, within, mind, lower, tr.tail_exact, tr.tail_chernoff);
    out.records.push_back({{"k", k}, {"eps", eps}, {"formula_degree", deg}, {"sup_error", err},
                           {"within_eps", within}, {"minimal_degree", mind}, {"transcendental_degree", lower},
                           {"tail_exact", tr.tail_exact}, {"tail_chernoff", tr.tail_chernoff}});
    xs.push_back(k);
    ys.push_back(mind);
  }
  out.summary["all_within_eps"] = out.ok;
  if (xs.size() >= 2) out.summary["minimal_degree_slope"] = loglog_slope(xs, ys);
  return out;
}

inline SuiteOutput run_estimate(const Json& cfg, int jobs) {
  const auto ks = list_of<int>(cfg, "k_values");
  const int runs = cfg.at("runs").get<int>();
  if (runs < 1) throw ConfigError("config: runs must be >= 1");
  const auto master = cfg.at("seed").get<std::uint64_t>();
  const AeMode mode = ae_mode_from_string(cfg.at("mode").get<std::string>());
  std::vector<InstanceSpec> specs(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i) {
    InstanceSpec& s = specs[static_cast<std::size_t>(i)];
    s.qubits = cfg.at("qubits").get<int>();
    s.rank = cfg.at("rank").get<int>();
    s.seed = derive_seed(master, static_cast<std::uint64_t>(i));
    s.state_kind = cfg.at("state_kind").get<std::string>();
    s.observable_kind = cfg.at("observable_kind").get<std::string>();
    s.state_name = cfg.at("state_name").get<std::string>();
    s.observable_name = cfg.at("observable_name").get<std::string>();
    s.pauli = cfg.at("pauli").get<std::string>();
    s.k = ks[static_cast<std::size_t>(i) % ks.size()];
    s.eps = cfg.at("eps").get<double>();
    validate(s);
  }
  std::vector<EstimationReport> reports(specs.size());
  parallel_for(specs.size(), jobs, [&](std::size_t i) {
    const auto& s = specs[i];
    const PurifiedState pur = purify(build_state(s));
    reports[i] = estimate_trace_power(pur, build_observable(s), s.k, s.eps, mode, derive_seed(s.seed, 2),
                                      cfg.at("ae_grid").get<int>());
  });
  SuiteOutput out;
  out.table.header = {"run", "k", "eps", "estimate_re", "estimate_im", "oracle_re", "oracle_im", "abs_error",
                      "error_bound", "pass", "poly_degree", "ae_queries_K", "u_rho_queries_total"};
  int passed = 0;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& r = reports[i];
    passed += r.success() ? 1 : 0;
    out.table.add(static_cast<long long>(i), r.k, r.eps_requested, r.estimate.real(), r.estimate.imag(),
                  r.oracle_value.real(), r.oracle_value.imag(), r.abs_error(), r.error_bound, r.success(),
                  r.poly_degree, r.ae_queries_K, r.u_rho_queries_total);
    out.records.push_back({{"spec", specs[i].to_json()}, {"report", to_json(r)}});
  }
  const double frac = static_cast<double>(passed) / runs;
  const double threshold = cfg.at("pass_threshold").get<double>();
  out.summary = {{"runs", runs}, {"passed", passed}, {"pass_fraction", frac}, {"pass_threshold", threshold}};
  out.ok = frac >= threshold;
  return out;
}

inline SuiteOutput run_baseline(const Json& cfg, int jobs) {
  InstanceSpec s;
  s.qubits = cfg.at("qubits").get<int>();
  s.rank = cfg.at("rank").get<int>();
  s.seed = cfg.at("seed").get<std::uint64_t>();
  s.k = cfg.at("k").get<int>();
  s.observable_kind = "random_hermitian";
  const DensityMatrix rho = build_state(s);
  const Observable o = build_observable(s);
  const auto shots_values = list_of<long long>(cfg, "shots_values");
  const int repeats = cfg.at("repeats").get<int>();
  if (repeats < 2) throw ConfigError("config: repeats must be >= 2");
  const double oracle = trace_power_obs_oracle(rho, o, s.k).real();
  const double identity_lhs = bounds::permutation_trace(rho, o.mat(), s.k).real();

  // RMS error over independent repeats at each shot count.
  const std::size_t n = shots_values.size() * static_cast<std::size_t>(repeats);
  std::vector<bounds::SwapTestResult> results(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const auto shots = shots_values[i / static_cast<std::size_t>(repeats)];
    results[i] = bounds::swap_test_estimate(rho, o, s.k, shots, derive_seed(s.seed, 100 + i));
  });
  SuiteOutput out;
  out.table.header = {"shots", "copies_used", "mean_of_means", "rms_error", "mean_reported_stderr", "oracle",
                      "surrogate"};
  std::vector<double> xs, ys;
  for (std::size_t j = 0; j < shots_values.size(); ++j) {
    double sum = 0.0, sq = 0.0, se = 0.0;
    bool sur = false;
    for (int r = 0; r < repeats; ++r) {
      const auto& res = results[j * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(r)];
      sum += res.mean;
      sq += (res.mean - oracle) * (res.mean - oracle);
      se += res.stderr_;
      sur = res.surrogate;
    }
    const double rms = std::sqrt(sq / repeats);
    out.table.add(shots_values[j], s.k * shots_values[j], sum / repeats, rms, se / repeats, oracle, sur);
    out.records.push_back({{"shots", shots_values[j]}, {"rms_error", rms}, {"mean_reported_stderr", se / repeats}});
    xs.push_back(static_cast<double>(shots_values[j]));
    ys.push_back(rms);
  }
  const double slope = xs.size() >= 2 ? loglog_slope(xs, ys) : std::nan("");
  const double tol = cfg.at("slope_tolerance").get<double>();
  const double defect = std::abs(identity_lhs - oracle);
  out.summary = {{"spec", s.to_json()},       {"oracle", oracle},         {"permutation_trace", identity_lhs},
                 {"identity_defect", defect}, {"stderr_exponent", slope}, {"slope_tolerance", tol}};
  out.ok = defect <= 1e-9 && (xs.size() < 2 || std::abs(slope + 0.5) <= tol);
  return out;
}

inline SuiteOutput run_bounds(const Json& cfg) {
  SuiteOutput out;
  out.table.header = {"experiment", "parameter", "value", "quantity", "result"};
  const auto hk = list_of<int>(cfg, "helstrom_k_values");
  const double c = cfg.at("helstrom_c").get<double>();
  std::vector<double> kx, mstar;
  for (int k : hk) {
    const auto t = bounds::helstrom_experiment(k, c, {0, 1});
    out.table.add("helstrom", "k", k, "m_star", t.m_star);
    kx.push_back(k);
    mstar.push_back(t.m_star);
  }
  const Observable z(pauli_z());
  const auto eps_values = list_of<double>(cfg, "eps_values");
  const double thr = cfg.at("hybrid_threshold").get<double>();
  std::vector<double> inv_eps, inv_kl, tstar;
  double max_closed_defect = 0.0;
  for (double eps : eps_values) {
    const auto lc = bounds::lecam_construction(z, eps);
    out.table.add("lecam", "eps", eps, "kl", lc.kl);
    out.table.add("lecam", "eps", eps, "kl_over_delta_sq", lc.kl / (lc.delta * lc.delta));
    const auto hy = bounds::hybrid_bound_demo(z, eps, {1}, thr);
    max_closed_defect = std::max(max_closed_defect, std::abs(hy.norm_direct - hy.norm_closed_form));
    out.table.add("hybrid", "eps", eps, "norm_direct", hy.norm_direct);
    out.table.add("hybrid", "eps", eps, "t_star", hy.t_star);
    inv_eps.push_back(z.norm() / eps);
    inv_kl.push_back(1.0 / lc.kl);
    tstar.push_back(hy.t_star);
  }
  const double ratio = mstar.back() / mstar.front();
  const double hel_slope = loglog_slope(kx, mstar);
  const double kl_exp = loglog_slope(inv_eps, inv_kl);
  const double t_exp = loglog_slope(inv_eps, tstar);
  out.summary = {{"helstrom_m_star_ratio", ratio},    {"helstrom_slope", hel_slope},
                 {"lecam_copy_exponent", kl_exp},     {"hybrid_t_star_exponent", t_exp},
                 {"hybrid_closed_form_defect", max_closed_defect}};
  for (std::size_t i = 0; i < out.table.rows.size(); ++i) {
    const auto& r = out.table.rows[i];
    out.records.push_back({{"experiment", r[0]}, {"value", r[2]}, {"quantity", r[3]}, {"result", r[4]}});
  }
  out.ok = max_closed_defect <= 1e-9 && std::abs(kl_exp - 2.0) <= 0.1 && std::abs(t_exp - 1.0) <= 0.05;
  return out;
}

/// U_x: seeded Haar unitary on `register_qubits`; Pi_acc = |1><1| on the
/// first register qubit.
inline SuiteOutput run_bqp(const Json& cfg, int jobs) {
  const int r = cfg.at("register_qubits").get<int>();
  const int circuits = cfg.at("circuits").get<int>();
  if (circuits < 1) throw ConfigError("config: circuits must be >= 1");
  const auto qs = list_of<double>(cfg, "q_values");
  const auto ks = list_of<int>(cfg, "k_values");
  const auto master = cfg.at("seed").get<std::uint64_t>();
  const Observable accept(embed(basis_op(2, 1, 1), {0}, r));
  struct Job {
    int circuit;
    double q;
    int k;
  };
  std::vector<Job> work;
  for (int c = 0; c < circuits; ++c)
    for (double q : qs)
      for (int k : ks) work.push_back({c, q, k});
  std::vector<std::optional<bounds::BqpInstance>> res(work.size());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const auto u = random_unitary(Index{1} << r, derive_seed(master, static_cast<std::uint64_t>(work[i].circuit)));
    res[i] = bounds::bqp_instance(u, accept, work[i].q, work[i].k);
  });
  SuiteOutput out;
  out.table.header = {"circuit", "q", "k", "lambda", "p_x", "oracle_value", "lambda_k_p_x", "identity_defect",
                      "bernoulli_holds"};
  double worst = 0.0;
  bool bern = true;
  for (std::size_t i = 0; i < work.size(); ++i) {
    const auto& b = *res[i];
    out.table.add(work[i].circuit, b.q, b.k, b.lambda, b.p_x, b.oracle_value, std::pow(b.lambda, b.k) * b.p_x,
                  b.identity_defect, b.bernoulli_holds);
    Json rec = to_json(b);
    rec["circuit"] = work[i].circuit;
    out.records.push_back(std::move(rec));
    worst = std::max(worst, b.identity_defect);
    bern = bern && b.bernoulli_holds;
  }
  out.summary = {{"instances", work.size()}, {"max_identity_defect", worst}, {"bernoulli_all", bern}};
  out.ok = worst <= 1e-10 && bern;
  return out;
}

inline SuiteOutput run_apps(const Json& cfg, int jobs) {
  const auto master = cfg.at("seed").get<std::uint64_t>();
  const AeMode mode = ae_mode_from_string(cfg.at("mode").get<std::string>());
  SuiteOutput out;
  out.table.header = {"run", "ratio_estimate", "oracle_ratio", "abs_error", "error_bound", "covered"};

  const double renyi_eps = cfg.at("renyi_eps").get<double>();
  const auto renyi = renyi_entropy(purify(maximally_mixed(1)), 2, renyi_eps, mode, derive_seed(master, 0));
  const double renyi_err = std::abs(renyi.value - std::log(2.0));
  const bool renyi_ok = renyi_err <= renyi.error_bound;

  const int runs = cfg.at("vd_runs").get<int>();
  const int qubits = cfg.at("vd_qubits").get<int>();
  const int k = cfg.at("vd_k").get<int>();
  const double en = cfg.at("vd_eps_num").get<double>();
  const double ed = cfg.at("vd_eps_den").get<double>();
  const int votes = cfg.at("vd_votes").get<int>();
  // A run whose denominator collapses to within eps of zero reports no finite
  // bound; it counts as not covered.
  std::vector<std::optional<VdRatio>> res(static_cast<std::size_t>(std::max(0, runs)));
  parallel_for(res.size(), jobs, [&](std::size_t i) {
    InstanceSpec s;
    s.qubits = qubits;
    s.rank = 1 << qubits;
    s.seed = derive_seed(master, 1 + i);
    const PurifiedState pur = purify(build_state(s));
    try {
      res[i] = vd_ratio(pur, build_observable(s), k, en, ed, mode, derive_seed(s.seed, 2), votes);
    } catch (const UnreliableEstimateError&) {
      res[i].reset();
    }
  });
  int covered = 0, unreliable = 0;
  const double inf = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < res.size(); ++i) {
    if (!res[i]) {
      ++unreliable;
      out.table.add(static_cast<long long>(i), std::nan(""), std::nan(""), std::nan(""), inf, false);
      out.records.push_back({{"unreliable", true}});
      continue;
    }
    const auto& v = *res[i];
    const double err = std::abs(v.ratio_estimate - v.oracle_ratio);
    const bool cov = err <= v.error_bound;
    covered += cov ? 1 : 0;
    out.table.add(static_cast<long long>(i), v.ratio_estimate, v.oracle_ratio, err, v.error_bound, cov);
    out.records.push_back({{"ratio_estimate", v.ratio_estimate}, {"oracle_ratio", v.oracle_ratio},
                           {"error_bound", v.error_bound}, {"numerator", v.numerator},
                           {"denominator", v.denominator}, {"joint_success_probability", v.joint_success_probability},
                           {"unreliable", false}});
  }
  const double coverage = runs > 0 ? static_cast<double>(covered) / runs : 1.0;
  const double threshold = cfg.at("coverage_threshold").get<double>();
  out.summary = {{"renyi2_mixed_value", renyi.value},
                 {"renyi2_error_bound", renyi.error_bound},
                 {"renyi2_abs_error", renyi_err},
                 {"renyi2_ok", renyi_ok},
                 {"vd_coverage", coverage},
                 {"vd_unreliable_runs", unreliable},
                 {"vd_votes", votes},
                 {"vd_coverage_threshold", threshold}};
  out.ok = renyi_ok && coverage >= threshold;
  return out;
}

/// Copies a swap test needs for accuracy eps at fixed confidence next to the
/// U_rho queries the block-encoding estimator records, as k grows.
inline SuiteOutput run_separation(const Json& cfg) {
  InstanceSpec s;
  s.qubits = cfg.at("qubits").get<int>();
  s.rank = cfg.at("rank").get<int>();
  s.seed = cfg.at("seed").get<std::uint64_t>();
  s.observable_kind = "named";
  s.observable_name = cfg.at("observable").get<std::string>();
  const DensityMatrix rho = build_state(s);
  const Observable o = build_observable(s);
  const auto ks = list_of<int>(cfg, "k_values");
  const double eps = cfg.at("eps").get<double>();
  const double conf = cfg.at("confidence").get<double>();
  SuiteOutput out;
  out.table.header = {"k", "swap_copies_for_eps", "swap_shot_variance", "qsvt_u_rho_queries_for_eps", "poly_degree",
                      "ae_queries_K"};
  std::vector<double> xs, swap, qsvt;
  for (int k : ks) {
    const long long copies = bounds::swap_copies_for_eps(rho, o, k, eps, conf);
    const auto mom = bounds::swap_test_moments(rho, o, k);
    const auto plan = plan_estimate(k, eps, o.norm(), o.hermitian());
    out.table.add(k, copies, mom.variance, plan.u_rho_queries_total, plan.power.degree, plan.K);
    out.records.push_back({{"k", k}, {"swap_copies_for_eps", copies}, {"qsvt_u_rho_queries_for_eps",
                           plan.u_rho_queries_total}, {"poly_degree", plan.power.degree}});
    xs.push_back(k);
    swap.push_back(static_cast<double>(copies));
    qsvt.push_back(static_cast<double>(plan.u_rho_queries_total));
  }
  const double se = loglog_slope(xs, swap);
  const double qe = loglog_slope(xs, qsvt);
  const auto range = cfg.at("swap_range").get<std::vector<double>>();
  const double qmax = cfg.at("qsvt_max_exponent").get<double>();
  if (range.size() != 2) throw ConfigError("config: swap_range must have two entries");
  out.summary = {{"spec", s.to_json()},       {"swap_copies_exponent", se}, {"qsvt_queries_exponent", qe},
                 {"swap_range", range},       {"qsvt_max_exponent", qmax},  {"eps", eps},
                 {"confidence", conf}};
  out.ok = se >= range[0] && se <= range[1] && qe <= qmax;
  return out;
}

inline SuiteOutput run_suite(const std::string& suite, const Json& cfg, int jobs = 1) {
  if (suite == "approx") return run_approx(cfg);
  if (suite == "estimate") return run_estimate(cfg, jobs);
  if (suite == "baseline") return run_baseline(cfg, jobs);
  if (suite == "bounds") return run_bounds(cfg);
  if (suite == "bqp") return run_bqp(cfg, jobs);
  if (suite == "apps") return run_apps(cfg, jobs);
  if (suite == "separation") return run_separation(cfg);
  throw ConfigError("unknown suite '" + suite + "'");
}

/// out/<suite>/<config_hash>/{records.json, table.csv, summary.json}.
inline std::filesystem::path persist(const std::filesystem::path& out_dir, const Json& cfg, const SuiteOutput& res) {
  const std::string suite = cfg.at("suite").get<std::string>();
  const std::string hash = config_hash(cfg);
  const auto dir = out_dir / suite / hash;
  const std::string stamp = utc_timestamp();
  Json records = Json::array();
  for (const auto& r : res.records) {
    records.push_back({{"record", r}, {"timestamp", stamp}, {"tool_version", kToolVersion}, {"config_hash", hash}});
  }
  write_atomic(dir / "table.csv", res.table.str());
  write_atomic(dir / "records.json", records.dump(1) + "\n");
  Json summary = res.summary;
  summary["ok"] = res.ok;
  summary["config"] = cfg;
  summary["config_hash"] = hash;
  summary["tool_version"] = kToolVersion;
  write_atomic(dir / "summary.json", summary.dump(1) + "\n");
  return dir;
}

}  // namespace powertrace::harness
