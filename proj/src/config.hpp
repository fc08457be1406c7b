#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "experiment.hpp"

namespace mdiqkd {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat view of a TOML document: dotted keys -> scalar values. The parser
// covers the subset the experiment files use: [section] and [a.b] headers,
// key = value with numbers, booleans and double-quoted strings, and `#`
// comments. Arrays and multi-line constructs are not supported.
class TomlDoc {
 public:
  struct Value {
    enum class Kind { Number, Boolean, Text };
    Kind kind = Kind::Number;
    double number = 0.0;
    bool boolean = false;
    std::string text;
    int line = 0;
  };

  static TomlDoc parse(const std::string& text);       // throws ConfigError
  static TomlDoc parse_file(const std::string& path);  // throws ConfigError

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;

  // Typed override for CLI flags; the value string is parsed like a TOML
  // scalar (bare words become text).
  void set(const std::string& key, const std::string& value);

  const std::map<std::string, Value>& values() const { return values_; }

 private:
  const Value* find(const std::string& key) const;
  std::map<std::string, Value> values_;
};

// Builds the resolved experiment description, validating field combinations.
ExperimentSpec load_experiment_spec(const TomlDoc& doc);

}  // namespace mdiqkd
