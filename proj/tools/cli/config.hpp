#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

#include "skipmon/distribution.hpp"
#include "skipmon/experiments.hpp"
#include "skipmon/repeat_pricing.hpp"
#include "skipmon/simulator.hpp"
#include "skipmon/value_function.hpp"

namespace skipmon::cli {

/// Bad or missing configuration; maps to exit code 2. `field` is a dotted
/// path into the document ("types.lambda") when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Reads and parses a JSON document. Empty files and syntax errors are
/// ConfigErrors that carry the byte offset.
nlohmann::json load_json(const std::filesystem::path& path);

/// {"kind": "impatience_exponential", "lambda": 3} and friends.
Distribution parse_distribution(const nlohmann::json& j, const std::string& field);
/// Short label used in study tables, e.g. "impexp(3)".
std::string distribution_label(const nlohmann::json& j, const std::string& field);

/// {"kind": "poly", "k": 4, "p_bar": 1}; c-linear functions default to `types`.
ValueFunction parse_value_function(const nlohmann::json& j, const std::string& field,
                                   const Distribution& types);

/// "mt", "known-types", {"kind": "scaled-mt", "c": 0.5}, {"kind": "fixed", "price": 0.3}.
PricingScheme parse_scheme(const nlohmann::json& j, const std::string& field);

RetentionMode parse_retention_mode(const std::string& s, const std::string& field);

SimConfig parse_sim_config(const nlohmann::json& j);

/// Starts from GridSpec::for_study(kind) and overrides any axis present in `j`.
GridSpec parse_grid(const nlohmann::json& j, StudyKind kind);

}  // namespace skipmon::cli
