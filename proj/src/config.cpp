#include "fklab/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include "json.hpp"
#include <sstream>

namespace fklab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

void flatten(const nlohmann::json& j, const std::string& prefix, std::map<std::string, std::string>& out) {
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) flatten(*it, prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    std::vector<std::string> parts;
    for (const auto& e : j) parts.push_back(e.is_string() ? e.get<std::string>() : e.dump());
    out[prefix] = join(parts, ",");
  } else if (j.is_string()) {
    out[prefix] = j.get<std::string>();
  } else {
    out[prefix] = j.dump();
  }
}

}  // namespace

MissingKeys::MissingKeys(std::vector<std::string> k)
    : ConfigError("missing config keys: " + join(k, ", ")), keys(std::move(k)) {}

Config Config::parse(const std::string& text) {
  Config c;
  const std::string t = trim(text);
  if (!t.empty() && t.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(t);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("invalid JSON config: ") + e.what());
    }
    flatten(j, "", c.kv_);
    return c;
  }
  std::istringstream in(text);
  std::string line;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto hashPos = line.find('#');
    if (hashPos != std::string::npos) line = line.substr(0, hashPos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(no) + ": empty key");
    c.kv_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string Config::str(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) {
    if (std::find(missing_.begin(), missing_.end(), key) == missing_.end()) missing_.push_back(key);
    return "";
  }
  return it->second;
}

double Config::num(const std::string& key) const {
  const std::string s = str(key);
  if (s.empty()) return 0.0;
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": '" + s + "' is not a number");
  }
}

int Config::integer(const std::string& key) const {
  const double v = num(key);
  if (v != double(int(v))) throw ConfigError("config key " + key + " must be an integer");
  return int(v);
}

std::string Config::str(const std::string& key, const std::string& def) const { return has(key) ? str(key) : def; }
double Config::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }
int Config::integer(const std::string& key, int def) const { return has(key) ? integer(key) : def; }

bool Config::flag(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string s = str(key);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config key " + key + ": '" + s + "' is not a boolean");
}

void Config::check() const {
  if (missing_.empty()) return;
  auto keys = missing_;
  missing_.clear();
  std::sort(keys.begin(), keys.end());
  throw MissingKeys(keys);
}

std::string Config::canonical(const std::vector<std::string>& prefixes) const {
  std::string out;
  for (const auto& [k, v] : kv_) {
    bool keep = prefixes.empty();
    for (const auto& p : prefixes) keep = keep || k.rfind(p, 0) == 0;
    if (keep) out += k + "=" + v + "\n";
  }
  return out;
}

std::string Config::hash(const std::vector<std::string>& prefixes) const { return sha256_hex(canonical(prefixes)); }

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

}  // namespace fklab
