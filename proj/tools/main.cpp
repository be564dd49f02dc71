#include <openssl/opensslv.h>

#include <Eigen/Core>
#include <chrono>
#include <fstream>
#include <iostream>

#include "cli.hpp"
#include "pblab/ensemble.hpp"
#include "pblab/io.hpp"

#ifndef PBLAB_VERSION
#define PBLAB_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace pblab;
using namespace pblab::cli;

namespace {

constexpr int kOk = 0, kParameter = 2, kNumerical = 3, kInternal = 1;

std::string canonical_config(const std::string& command, const Globals& g,
                             const std::map<std::string, std::string>& opts) {
  std::string s = "command=" + command + "\nseed=" + std::to_string(g.seed) + "\ntol=" +
                  (g.tol ? fmt17(*g.tol) : std::string("default")) + "\n";
  for (const auto& [k, v] : opts) s += k + "=" + v + "\n";
  return s;
}

json versions() {
  return {{"pblab", PBLAB_VERSION},
          {"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"cli11", CLI11_VERSION},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"openssl", OPENSSL_VERSION_TEXT}};
}

int run_cli(std::vector<std::string> args);

/// Re-executes the command recorded in a manifest and compares artifact digests.
int rerun(const std::string& manifest_path, const std::optional<std::string>& out) {
  std::ifstream in(manifest_path);
  if (!in) throw ParameterError("cannot read manifest " + manifest_path);
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ParameterError("manifest is not valid JSON: " + std::string(e.what()));
  }
  for (const char* key : {"command", "seed", "options"})
    require(m.contains(key), std::string("manifest lacks '") + key + "'");
  const std::string command = m["command"];
  require(command != "rerun", "manifest records a rerun");
  const std::string dir = out.value_or((fs::path(manifest_path).parent_path() / "rerun").string());

  std::vector<std::string> args = {"--seed=" + std::to_string(m["seed"].get<std::uint64_t>()), "--out=" + dir};
  if (m.contains("tol") && !m["tol"].is_null()) args.push_back("--tol=" + m["tol"].get<std::string>());
  args.push_back(command);
  for (const auto& [k, v] : m["options"].items()) args.push_back("--" + k + "=" + v.get<std::string>());
  const int status = run_cli(args);

  std::ifstream again(fs::path(dir) / "manifest.json");
  json m2;
  again >> m2;
  bool identical = m2["config_hash"] == m["config_hash"] && m2["artifacts"].size() == m["artifacts"].size();
  for (std::size_t i = 0; identical && i < m["artifacts"].size(); ++i)
    identical = m["artifacts"][i]["sha256"] == m2["artifacts"][i]["sha256"] &&
                m["artifacts"][i]["name"] == m2["artifacts"][i]["name"];
  std::cout << (identical ? "artifacts identical to " : "artifacts differ from ") << manifest_path << "\n";
  return status;
}

int run_cli(std::vector<std::string> args) {
  CLI::App app{"pblab: beta-ensemble, quantum Painleve II and ODE/IM numerics"};
  app.set_config("--config", "", "sectioned key=value file, one [section] per command");
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  double tol = 0;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  CLI::Option* out_opt = app.add_option("--out", g.out, "output directory")->capture_default_str();
  CLI::Option* tol_opt = app.add_option("--tol", tol, "override the command's numerical tolerance");

  std::vector<std::unique_ptr<Params>> params;
  std::vector<std::pair<CLI::App*, Runner>> runners;
  for (const Command& c : commands()) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    params.push_back(std::make_unique<Params>(sub));
    runners.emplace_back(sub, c.setup(*params.back()));
  }
  std::string manifest;
  CLI::App* rerun_cmd = app.add_subcommand("rerun", "re-execute a command from its manifest.json");
  rerun_cmd->add_option("--manifest", manifest, "manifest path")->required();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return kParameter;
  }
  if (tol_opt->count()) g.tol = tol;

  auto report = [](const char* kind, const std::exception& e) { std::cerr << "pblab: " << kind << ": " << e.what() << "\n"; };

  if (rerun_cmd->parsed()) {
    try {
      return rerun(manifest, out_opt->count() ? std::optional<std::string>(g.out) : std::nullopt);
    } catch (const ParameterError& e) {
      report("invalid parameter", e);
      return kParameter;
    } catch (const std::exception& e) {
      report("error", e);
      return kNumerical;
    }
  }

  for (std::size_t i = 0; i < runners.size(); ++i) {
    CLI::App* sub = runners[i].first;
    if (!sub->parsed()) continue;
    const std::string command = sub->get_name();
    const auto opts = params[i]->values();
    const std::string hash = sha256_hex(canonical_config(command, g, opts));
    RunContext ctx(g, hash);

    const auto t0 = std::chrono::steady_clock::now();
    int status = kOk;
    std::string error;
    try {
      runners[i].second(ctx);
    } catch (const ParameterError& e) {
      report("invalid parameter", e);
      status = kParameter;
      error = e.what();
    } catch (const NumericalError& e) {
      report("numerical failure", e);
      status = kNumerical;
      error = e.what();
    } catch (const std::exception& e) {
      report("error", e);
      status = kInternal;
      error = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json arts = json::array();
    for (const auto& [name, sha] : ctx.artifacts()) arts.push_back({{"name", name}, {"sha256", sha}});
    json m{{"command", command},
           {"options", opts},
           {"seed", g.seed},
           {"tol", g.tol ? json(fmt17(*g.tol)) : json(nullptr)},
           {"config_hash", hash},
           {"versions", versions()},
           {"threads", worker_threads()},
           {"wall_time_s", wall},
           {"exit_status", status},
           {"artifacts", arts}};
    if (!error.empty()) m["error"] = error;
    try {
      write_atomic(fs::path(g.out) / "manifest.json", m.dump(2) + "\n");
    } catch (const std::exception& e) {
      report("error", e);
      return status == kOk ? kInternal : status;
    }
    return status;
  }
  return kParameter;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(std::move(args));
}
