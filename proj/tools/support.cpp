#include <openssl/evp.h>

#include <cmath>
#include <sstream>

#include "cli.hpp"
#include "pblab/io.hpp"

namespace pblab::cli {

CLI::Option* Params::add(const std::string& key, double& v, const std::string& help) {
  getters_.emplace_back(key, [&v] { return fmt17(v); });
  return app_->add_option("--" + key, v, help)->capture_default_str();
}

CLI::Option* Params::add(const std::string& key, int& v, const std::string& help) {
  getters_.emplace_back(key, [&v] { return std::to_string(v); });
  return app_->add_option("--" + key, v, help)->capture_default_str();
}

CLI::Option* Params::add(const std::string& key, std::string& v, const std::string& help) {
  getters_.emplace_back(key, [&v] { return v; });
  return app_->add_option("--" + key, v, help)->capture_default_str();
}

std::map<std::string, std::string> Params::values() const {
  std::map<std::string, std::string> m;
  for (const auto& [k, g] : getters_) m[k] = g();
  return m;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

void RunContext::write(const std::string& name, const std::string& contents) {
  write_atomic(std::filesystem::path(globals_.out) / name, contents);
  artifacts_.emplace_back(name, sha256_hex(contents));
}

void RunContext::write_csv(const std::string& name, const std::string& body) {
  write(name, "# config_hash=" + hash_ + "\n" + body);
}

void RunContext::write_json(const std::string& name, json doc) {
  doc["config_hash"] = hash_;
  write(name, doc.dump(2) + "\n");
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ParameterError("not a number: '" + s + "'");
  }
  require(used == s.size() || s.find_first_not_of(' ', used) == std::string::npos,
          "not a number: '" + s + "'");
  require(std::isfinite(v), "not finite: '" + s + "'");
  return v;
}

int to_int(const std::string& s) {
  const double v = to_double(s);
  require(v == std::floor(v) && std::abs(v) < 1e9, "not an integer: '" + s + "'");
  return int(v);
}

}  // namespace

std::vector<int> parse_int_range(const std::string& s) {
  std::vector<int> out;
  for (const std::string& part : split(s, ',')) {
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(part));
      continue;
    }
    const int a = to_int(part.substr(0, dots)), b = to_int(part.substr(dots + 2));
    require(a <= b, "empty range '" + part + "'");
    for (int i = a; i <= b; ++i) out.push_back(i);
  }
  require(!out.empty(), "empty integer list");
  return out;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const std::string& part : split(s, ',')) out.push_back(to_double(part));
  return out;
}

std::vector<cplx> parse_complex_list(const std::string& s) {
  std::vector<cplx> out;
  for (const std::string& part : split(s, ';')) {
    const auto v = parse_doubles(part);
    require(v.size() == 1 || v.size() == 2, "complex value must be 're' or 're,im': '" + part + "'");
    out.emplace_back(v[0], v.size() == 2 ? v[1] : 0.0);
  }
  require(!out.empty(), "empty complex list");
  return out;
}

long as_count(double v, const std::string& name) {
  require(v >= 1 && v == std::floor(v) && v <= 1e12, name + " must be a positive integer");
  return long(v);
}

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

std::string num(double v) { return fmt17(v); }

}  // namespace pblab::cli
