#include "config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

#include "skipmon/error.hpp"

namespace skipmon::cli {

using nlohmann::json;

ConfigError::ConfigError(const std::string& field, const std::string& what)
    : std::runtime_error(field.empty() ? what : fmt::format("field '{}': {}", field, what)),
      field_(field) {}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ConfigError("", "config file " + path.string() + " is empty");
  }
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(
                                     std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
    throw ConfigError("", fmt::format("{} line {}: {}", path.string(), line, e.what()));
  }
}

namespace {

std::string join(const std::string& field, const std::string& key) {
  return field.empty() ? key : field + "." + key;
}

const json& require(const json& j, const std::string& field, const std::string& key) {
  if (!j.is_object()) throw ConfigError(field, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(join(field, key), "missing");
  return *it;
}

double number(const json& j, const std::string& field, const std::string& key) {
  const json& v = require(j, field, key);
  if (!v.is_number()) throw ConfigError(join(field, key), "expected a number");
  return v.get<double>();
}

double number_or(const json& j, const std::string& field, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return number(j, field, key);
}

std::string kind_of(const json& j, const std::string& field) {
  const json& k = require(j, field, "kind");
  if (!k.is_string()) throw ConfigError(join(field, "kind"), "expected a string");
  return k.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(fmt::format("{}[{}]", field, i), "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

// Domain validation errors raised while building objects are config errors.
template <class F>
auto guarded(const std::string& field, F&& build) {
  try {
    return build();
  } catch (const Error& e) {
    throw ConfigError(field, e.what());
  }
}

}  // namespace

Distribution parse_distribution(const json& j, const std::string& field) {
  const std::string kind = kind_of(j, field);
  return guarded(field, [&]() -> Distribution {
    if (kind == "uniform") {
      return Distribution::uniform(number_or(j, field, "lo", 0.0), number_or(j, field, "hi", 1.0));
    }
    if (kind == "impatience_exponential") {
      return Distribution::impatience_exponential(number(j, field, "lambda"));
    }
    if (kind == "flattened_impatience_exponential") {
      return Distribution::flattened_impatience_exponential(number(j, field, "lambda"),
                                                            number(j, field, "tau"));
    }
    if (kind == "exponential") return Distribution::exponential(number(j, field, "lambda"));
    if (kind == "lomax") return Distribution::lomax(number(j, field, "alpha"));
    if (kind == "equal_revenue") return Distribution::equal_revenue();
    if (kind == "discrete") {
      return Distribution::discrete(numbers(require(j, field, "values"), join(field, "values")),
                                    numbers(require(j, field, "probs"), join(field, "probs")));
    }
    if (kind == "empirical") {
      return Distribution::empirical(numbers(require(j, field, "samples"), join(field, "samples")));
    }
    throw ConfigError(join(field, "kind"), "unknown distribution kind '" + kind + "'");
  });
}

std::string distribution_label(const json& j, const std::string& field) {
  if (j.contains("label")) {
    const json& l = j["label"];
    if (!l.is_string()) throw ConfigError(join(field, "label"), "expected a string");
    return l.get<std::string>();
  }
  const std::string kind = kind_of(j, field);
  if (kind == "uniform") return "uniform";
  if (kind == "impatience_exponential") return fmt::format("impexp({:g})", number(j, field, "lambda"));
  if (kind == "flattened_impatience_exponential") {
    return fmt::format("impexp({:g},{:g})", number(j, field, "lambda"), number(j, field, "tau"));
  }
  if (kind == "exponential") return fmt::format("exp({:g})", number(j, field, "lambda"));
  if (kind == "lomax") return fmt::format("lomax({:g})", number(j, field, "alpha"));
  return kind;
}

ValueFunction parse_value_function(const json& j, const std::string& field, const Distribution& types) {
  const std::string kind = kind_of(j, field);
  return guarded(field, [&]() -> ValueFunction {
    if (kind == "poly") return ValueFunction::poly(number(j, field, "k"), number(j, field, "p_bar"));
    if (kind == "insensitive") {
      return ValueFunction::insensitive(number(j, field, "level"),
                                        number_or(j, field, "threshold", 0.0));
    }
    if (kind == "clinear") {
      const Distribution base =
          j.contains("type_dist") ? parse_distribution(j["type_dist"], join(field, "type_dist")) : types;
      return ValueFunction::clinear(number_or(j, field, "c", 1.0), base);
    }
    throw ConfigError(join(field, "kind"), "unknown value function kind '" + kind + "'");
  });
}

PricingScheme parse_scheme(const json& j, const std::string& field) {
  return guarded(field, [&]() -> PricingScheme {
    if (j.is_string()) return PricingScheme::parse(j.get<std::string>());
    const std::string kind = kind_of(j, field);
    if (kind == "scaled-mt") return PricingScheme::scaled_myerson_threshold(number(j, field, "c"));
    if (kind == "fixed") return PricingScheme::fixed_price(number(j, field, "price"));
    return PricingScheme::parse(kind);
  });
}

RetentionMode parse_retention_mode(const std::string& s, const std::string& field) {
  if (s == "shared") return RetentionMode::Shared;
  if (s == "independent") return RetentionMode::Independent;
  throw ConfigError(field, "expected 'shared' or 'independent', got '" + s + "'");
}

SimConfig parse_sim_config(const json& j) {
  if (!j.is_object()) throw ConfigError("", "simulation config must be an object");
  SimConfig cfg;
  if (j.contains("n")) {
    const double n = number(j, "", "n");
    if (!(n >= 1.0)) throw ConfigError("n", "must be at least 1");
    cfg.n_initial = static_cast<std::size_t>(n);
  }
  if (j.contains("types")) cfg.type_dist = parse_distribution(j["types"], "types");
  cfg.value = number_or(j, "", "value", 1.0);
  const json& ret = require(j, "", "retention");
  cfg.retention = guarded("retention", [&] {
    return RetentionModel::make(parse_distribution(require(ret, "retention", "dist"), "retention.dist"),
                                number(ret, "retention", "beta"));
  });
  if (j.contains("scheme")) cfg.scheme = parse_scheme(j["scheme"], "scheme");
  if (j.contains("retention_mode")) {
    const json& m = j["retention_mode"];
    if (!m.is_string()) throw ConfigError("retention_mode", "expected a string");
    cfg.retention_mode = parse_retention_mode(m.get<std::string>(), "retention_mode");
  }
  cfg.growth_rate = number_or(j, "", "growth_rate", 0.0);
  if (j.contains("seed")) {
    const json& s = j["seed"];
    if (!s.is_number_unsigned()) throw ConfigError("seed", "expected a non-negative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.max_rounds = static_cast<std::size_t>(number_or(j, "", "max_rounds", 5000.0));
  cfg.revenue_eps = number_or(j, "", "revenue_eps", 0.0);
  cfg.population_cap = number_or(j, "", "population_cap", cfg.population_cap);
  return cfg;
}

GridSpec parse_grid(const json& j, StudyKind kind) {
  GridSpec spec = GridSpec::for_study(kind);
  if (j.is_null()) return spec;
  if (!j.is_object()) throw ConfigError("grid", "expected an object");
  const auto dists = [&](const std::string& key) {
    const json& arr = j[key];
    const std::string field = "grid." + key;
    if (!arr.is_array()) throw ConfigError(field, "expected an array");
    std::vector<LabeledDist> out;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = fmt::format("{}[{}]", field, i);
      out.push_back({distribution_label(arr[i], f), parse_distribution(arr[i], f)});
    }
    return out;
  };
  if (j.contains("type_dists")) spec.type_dists = dists("type_dists");
  if (j.contains("retention_dists")) spec.retention_dists = dists("retention_dists");
  if (j.contains("betas")) spec.betas = numbers(j["betas"], "grid.betas");
  if (j.contains("growth_rates")) spec.growth_rates = numbers(j["growth_rates"], "grid.growth_rates");
  if (j.contains("scales")) spec.scales = numbers(j["scales"], "grid.scales");
  if (j.contains("retention_modes")) {
    spec.retention_modes.clear();
    const json& arr = j["retention_modes"];
    if (!arr.is_array()) throw ConfigError("grid.retention_modes", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = fmt::format("grid.retention_modes[{}]", i);
      if (!arr[i].is_string()) throw ConfigError(f, "expected a string");
      spec.retention_modes.push_back(parse_retention_mode(arr[i].get<std::string>(), f));
    }
  }
  if (j.contains("exclusions")) {
    spec.exclusions.clear();
    const json& arr = j["exclusions"];
    if (!arr.is_array()) throw ConfigError("grid.exclusions", "expected an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string f = fmt::format("grid.exclusions[{}]", i);
      const json& t = require(arr[i], f, "type_dist");
      const json& r = require(arr[i], f, "retention_prefix");
      if (!t.is_string() || !r.is_string()) throw ConfigError(f, "expected string fields");
      spec.exclusions.push_back({t.get<std::string>(), r.get<std::string>()});
    }
  }
  for (double b : spec.betas) {
    if (!(b > 0.0) || b > 1.0) throw ConfigError("grid.betas", fmt::format("beta {} outside (0, 1]", b));
  }
  for (double g : spec.growth_rates) {
    if (!(g >= 0.0) || g >= 1.0) throw ConfigError("grid.growth_rates", fmt::format("growth {} outside [0, 1)", g));
  }
  for (double c : spec.scales) {
    if (!(c > 0.0) || c > 1.0) throw ConfigError("grid.scales", fmt::format("scale {} outside (0, 1]", c));
  }
  if (kind == StudyKind::Scaling && (spec.scales.empty() || spec.scales.front() != 1.0)) {
    // Ratios are reported against scale 1, so keep it first.
    spec.scales.insert(spec.scales.begin(), 1.0);
  }
  return spec;
}

}  // namespace skipmon::cli
