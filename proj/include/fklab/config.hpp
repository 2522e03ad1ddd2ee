#pragma once
#include <map>
#include <string>
#include <vector>

#include "fklab/error.hpp"

namespace fklab {

struct MissingKeys : ConfigError {
  explicit MissingKeys(std::vector<std::string> k);
  std::vector<std::string> keys;
};

// Flat dotted key = value pairs; JSON objects are flattened into the same form.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  const std::map<std::string, std::string>& entries() const { return kv_; }

  // Missing required keys are collected; check() throws them all at once.
  std::string str(const std::string& key) const;
  double num(const std::string& key) const;
  int integer(const std::string& key) const;
  std::string str(const std::string& key, const std::string& def) const;
  double num(const std::string& key, double def) const;
  int integer(const std::string& key, int def) const;
  bool flag(const std::string& key, bool def) const;
  void check() const;

  // sorted key=value lines restricted to the given prefixes (all keys when empty)
  std::string canonical(const std::vector<std::string>& prefixes = {}) const;
  std::string hash(const std::vector<std::string>& prefixes = {}) const;

 private:
  std::map<std::string, std::string> kv_;
  mutable std::vector<std::string> missing_;
};

std::string sha256_hex(const std::string& data);

}  // namespace fklab
