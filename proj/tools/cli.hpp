#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pblab/common.hpp"

namespace pblab::cli {

using json = nlohmann::json;

/// Registers command options and remembers how to print each bound value
/// canonically, for the config hash and the manifest.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  CLI::Option* add(const std::string& key, double& v, const std::string& help);
  CLI::Option* add(const std::string& key, int& v, const std::string& help);
  CLI::Option* add(const std::string& key, std::string& v, const std::string& help);

  std::map<std::string, std::string> values() const;

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> getters_;
};

struct Globals {
  std::uint64_t seed = 0;
  std::string out = "pblab_out";
  std::optional<double> tol;
};

class RunContext {
 public:
  RunContext(const Globals& g, std::string hash) : globals_(g), hash_(std::move(hash)) {}

  std::uint64_t seed() const { return globals_.seed; }
  double tol(double fallback) const { return globals_.tol.value_or(fallback); }
  const std::string& hash() const { return hash_; }

  /// CSV with a "# config_hash=..." first line; body must start with the header row.
  void write_csv(const std::string& name, const std::string& body);
  /// JSON with a "config_hash" field added.
  void write_json(const std::string& name, json doc);

  const std::vector<std::pair<std::string, std::string>>& artifacts() const { return artifacts_; }

 private:
  void write(const std::string& name, const std::string& contents);

  Globals globals_;
  std::string hash_;
  std::vector<std::pair<std::string, std::string>> artifacts_;  ///< name, sha256
};

using Runner = std::function<void(RunContext&)>;

struct Command {
  std::string name;
  std::string help;
  /// Binds options on the subcommand and returns the action.
  std::function<Runner(Params&)> setup;
};

const std::vector<Command>& commands();

std::string sha256_hex(const std::string& data);

// parsing helpers for list-valued options; throw ParameterError
std::vector<int> parse_int_range(const std::string& s);
std::vector<double> parse_doubles(const std::string& s);
/// "re,im;re,im;re" -> complex list.
std::vector<cplx> parse_complex_list(const std::string& s);
long as_count(double v, const std::string& name);

json cplx_json(cplx z);
std::string num(double v);

}  // namespace pblab::cli
