// powertrace: run an experiment suite and write records, table and summary.
//
//   powertrace <suite> [--config PATH] [--out DIR] [--seed N] [--jobs N] [overrides]
//
// Exit codes: 0 all checks passed, 1 a suite check failed (outputs kept),
// 2 bad config or arguments, 3 runtime error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>

#include "powertrace/harness.hpp"

namespace {

using powertrace::Json;
namespace h = powertrace::harness;

struct Overrides {
  std::optional<int> k;
  std::optional<double> eps;
  std::optional<int> qubits;
  std::optional<int> rank;
  std::optional<long long> shots;
  std::optional<int> K;
  std::optional<double> q;
};

// Which config key each flag writes, per suite. Arrays take the single value.
void apply_overrides(const std::string& suite, const Overrides& ov, Json& cfg) {
  auto set = [&](const char* flag, bool present, const std::map<std::string, std::vector<std::string>>& targets,
                 const Json& value) {
    if (!present) return;
    const auto it = targets.find(suite);
    if (it == targets.end()) throw h::ConfigError(std::string("--") + flag + " does not apply to suite " + suite);
    for (const auto& key : it->second) {
      const Json def = h::suite_defaults(suite).at(key);
      if (def.is_array()) {
        cfg[key] = Json::array();
        cfg[key].push_back(value);
      } else {
        cfg[key] = value;
      }
    }
  };
  set("k", ov.k.has_value(),
      {{"approx", {"k_values"}}, {"estimate", {"k_values"}}, {"separation", {"k_values"}}, {"bqp", {"k_values"}},
       {"baseline", {"k"}}, {"apps", {"vd_k"}}, {"bounds", {"helstrom_k_values"}}},
      ov.k ? Json(*ov.k) : Json());
  set("eps", ov.eps.has_value(),
      {{"approx", {"eps"}}, {"estimate", {"eps"}}, {"separation", {"eps"}}, {"bounds", {"eps_values"}},
       {"apps", {"renyi_eps", "vd_eps_num", "vd_eps_den"}}},
      ov.eps ? Json(*ov.eps) : Json());
  set("qubits", ov.qubits.has_value(),
      {{"estimate", {"qubits"}}, {"baseline", {"qubits"}}, {"separation", {"qubits"}}, {"apps", {"vd_qubits"}},
       {"bqp", {"register_qubits"}}},
      ov.qubits ? Json(*ov.qubits) : Json());
  set("rank", ov.rank.has_value(), {{"estimate", {"rank"}}, {"baseline", {"rank"}}, {"separation", {"rank"}}},
      ov.rank ? Json(*ov.rank) : Json());
  set("shots", ov.shots.has_value(), {{"baseline", {"shots_values"}}}, ov.shots ? Json(*ov.shots) : Json());
  set("K", ov.K.has_value(), {{"estimate", {"ae_grid"}}}, ov.K ? Json(*ov.K) : Json());
  set("q", ov.q.has_value(), {{"bqp", {"q_values"}}}, ov.q ? Json(*ov.q) : Json());
}

int run(const std::string& suite, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, int jobs, const Overrides& ov) {
  Json file_cfg = Json::object();
  if (!config_path.empty()) {
    file_cfg = h::load_config_file(config_path);
    if (file_cfg.contains("suite") && file_cfg["suite"] != suite) {
      throw h::ConfigError(config_path + ": config is for suite " + file_cfg["suite"].dump());
    }
  }
  Json cfg = h::merge_config(suite, file_cfg);
  if (const char* env = std::getenv("POWERTRACE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      cfg["seed"] = std::stoull(env, &used);
      if (env[used] != '\0') throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw h::ConfigError(std::string("POWERTRACE_SEED is not an unsigned integer: ") + env);
    }
  }
  if (seed) cfg["seed"] = *seed;
  apply_overrides(suite, ov, cfg);

  const auto result = h::run_suite(suite, cfg, jobs);
  const auto dir = h::persist(out_dir, cfg, result);
  Json summary = result.summary;
  summary["ok"] = result.ok;
  std::cout << dir.string() << "\n" << summary.dump(1) << "\n";
  return result.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trace-of-power estimation experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out";
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  Overrides ov;
  app.add_option("--config", config_path, "flat JSON config")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "master seed (overrides config and POWERTRACE_SEED)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--k", ov.k, "power k");
  app.add_option("--eps", ov.eps, "target accuracy");
  app.add_option("--qubits", ov.qubits, "system qubits");
  app.add_option("--rank", ov.rank, "state rank");
  app.add_option("--shots", ov.shots, "swap-test shots");
  app.add_option("--K", ov.K, "amplitude-estimation grid size");
  app.add_option("--q", ov.q, "BQP amplification parameter q");
  for (const auto& name : h::suite_names()) app.add_subcommand(name, "run the " + name + " suite")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string suite = app.get_subcommands().front()->get_name();
  try {
    return run(suite, config_path, out_dir, seed, jobs, ov);
  } catch (const h::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const powertrace::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
