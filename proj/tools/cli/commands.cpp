#include "commands.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "skipmon/csv.hpp"
#include "skipmon/error.hpp"
#include "skipmon/experiments.hpp"
#include "skipmon/repeat_pricing.hpp"
#include "skipmon/rng.hpp"
#include "skipmon/simulator.hpp"
#include "skipmon/single_task.hpp"
#include "skipmon/version.hpp"

namespace skipmon::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> n;
  unsigned threads = 0;
  std::string study;
  std::string objective = "both";
  std::string scheme;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> max_rounds;
};

// Errors while a command is still reading its inputs are config errors;
// anything later is a runtime error.
struct Phase {
  bool loading = true;
};

std::string timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                     fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

std::string read_text(const std::string& path) {
  if (path.empty()) return {};
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class Manifest {
 public:
  Manifest(std::string command, std::string command_line, const Flags& flags)
      : command_(std::move(command)), command_line_(std::move(command_line)), started_(timestamp()) {
    config_text_ = read_text(flags.config);
    flags_ = fmt::format("seed={} n={} study={} objective={} scheme={} replicates={} max_rounds={}",
                         flags.seed ? std::to_string(*flags.seed) : "-",
                         flags.n ? std::to_string(*flags.n) : "-", flags.study, flags.objective,
                         flags.scheme, flags.replicates ? std::to_string(*flags.replicates) : "-",
                         flags.max_rounds ? std::to_string(*flags.max_rounds) : "-");
    config_path_ = flags.config;
  }

  void write(const fs::path& dir, std::optional<std::uint64_t> seed,
             const std::vector<std::string>& outputs) const {
    json j;
    j["command"] = command_;
    j["command_line"] = command_line_;
    j["config_path"] = config_path_;
    j["config_hash"] = fmt::format("{:016x}", fnv1a(config_text_ + "\n" + flags_));
    j["master_seed"] = seed ? json(*seed) : json(nullptr);
    j["version"] = version();
    j["git_hash"] = git_hash();
    j["started_at"] = started_;
    j["finished_at"] = timestamp();
    j["outputs"] = outputs;
    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error(Errc::Io, "cannot write manifest in " + dir.string());
    out << j.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::string command_line_;
  std::string started_;
  std::string config_text_;
  std::string config_path_;
  std::string flags_;
};

json config_or_empty(const Flags& flags) {
  return flags.config.empty() ? json::object() : load_json(flags.config);
}

std::size_t count_field(const json& j, const std::string& key, std::size_t fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number_unsigned()) throw ConfigError(key, "expected a non-negative integer");
  return v.get<std::size_t>();
}

double number_field(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) throw ConfigError(key, "expected a number");
  return j[key].get<double>();
}

OptimizeOptions parse_optimize(const json& j) {
  OptimizeOptions o;
  if (!j.contains("optimize")) return o;
  const json& opt = j["optimize"];
  o.grid_n = count_field(opt, "grid_n", o.grid_n);
  o.refine_tol = number_field(opt, "refine_tol", o.refine_tol);
  if (o.grid_n < 100) throw ConfigError("optimize.grid_n", "must be at least 100");
  if (!(o.refine_tol > 0.0)) throw ConfigError("optimize.refine_tol", "must be positive");
  return o;
}

json nullable(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

// ---------------------------------------------------------------------------

int cmd_single(const Flags& flags, Phase& phase, const std::string& cmdline, std::ostream& out) {
  const Manifest manifest("single", cmdline, flags);
  const json cfg = load_json(flags.config);
  if (!cfg.is_object()) throw ConfigError("", "config must be an object");
  struct Case {
    std::string label;
    Distribution types;
    ValueFunction vf;
  };
  std::vector<Case> cases;
  const auto parse_case = [&](const json& c, const std::string& field, std::size_t i) {
    const Distribution types = parse_distribution(
        c.contains("types") ? c["types"] : json(), field.empty() ? "types" : field + ".types");
    if (!c.contains("value_function")) {
      throw ConfigError(field.empty() ? "value_function" : field + ".value_function", "missing");
    }
    const ValueFunction vf = parse_value_function(
        c["value_function"], field.empty() ? "value_function" : field + ".value_function", types);
    std::string label = c.contains("label") && c["label"].is_string() ? c["label"].get<std::string>()
                                                                       : fmt::format("case{}", i);
    cases.push_back({label, types, vf});
  };
  if (cfg.contains("cases")) {
    const json& arr = cfg["cases"];
    if (!arr.is_array() || arr.empty()) throw ConfigError("cases", "expected a non-empty array");
    for (std::size_t i = 0; i < arr.size(); ++i) parse_case(arr[i], fmt::format("cases[{}]", i), i);
  } else {
    if (!cfg.contains("types")) throw ConfigError("types", "missing");
    parse_case(cfg, "", 0);
  }
  const OptimizeOptions opt = parse_optimize(cfg);
  const std::size_t curve_points = count_field(cfg, "curve_points", 500);
  phase.loading = false;

  const fs::path dir = fs::path(flags.out) / "single";
  fs::create_directories(dir);
  const bool util = flags.objective != "revenue";
  const bool rev = flags.objective != "utility";

  json reports = json::array();
  std::vector<std::string> outputs{"report.json", "single.csv"};
  CsvWriter table(dir / "single.csv", {"case", "p_util", "u_max", "p_rev", "rev_max",
                                       "nosale_condition", "lemma44_frontier", "cor45_floor"});
  std::string header = fmt::format("{:<14}", "case");
  if (util) header += fmt::format(" {:>12} {:>12} {:>7} {:>12}", "p_util", "u_max", "nosale", "util_floor");
  if (rev) header += fmt::format(" {:>12} {:>12} {:>12}", "p_rev", "rev_max", "frontier");
  out << header << '\n';
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const SingleTaskReport r = analyze_single_task(c.types, c.vf, opt);
    std::string line = fmt::format("{:<14}", c.label);
    if (util) {
      line += fmt::format(" {:>12.6f} {:>12.6f} {:>7} {:>12}", r.p_util, r.u_max,
                          r.nosale_condition_holds ? "yes" : "no",
                          r.cor45_floor ? fmt::format("{:.6f}", *r.cor45_floor) : "-");
    }
    if (rev) line += fmt::format(" {:>12.6f} {:>12.6f} {:>12.6f}", r.p_rev, r.rev_max, r.lemma44_frontier);
    out << line << '\n';

    json j{{"case", c.label},
           {"types", c.types.describe()},
           {"value_function", c.vf.describe()},
           {"p_bar", c.vf.p_nosale()},
           {"p_util", r.p_util},
           {"u_max", r.u_max},
           {"p_rev", r.p_rev},
           {"rev_max", r.rev_max},
           {"nosale_condition", r.nosale_condition_holds},
           {"lemma44_frontier", r.lemma44_frontier},
           {"cor45_floor", nullable(r.cor45_floor)}};
    reports.push_back(j);
    table.row({c.label, r.p_util, r.u_max, r.p_rev, r.rev_max,
               static_cast<long long>(r.nosale_condition_holds), r.lemma44_frontier,
               r.cor45_floor ? *r.cor45_floor : std::nan("")});

    const std::string curve_name = fmt::format("curve_{}.csv", i);
    CsvWriter curve(dir / curve_name, {"p", "v", "U", "REV"});
    const double p_bar = c.vf.p_nosale();
    for (std::size_t k = 0; k < curve_points; ++k) {
      const double p = curve_points < 2 ? p_bar
                                        : p_bar * static_cast<double>(k) /
                                              static_cast<double>(curve_points - 1);
      curve.row({p, c.vf.eval(p), expected_utility(c.types, c.vf, p),
                 expected_revenue(c.types, c.vf, p)});
    }
    curve.close();
    outputs.push_back(curve_name);
  }
  table.close();
  {
    std::ofstream f(dir / "report.json");
    f << reports.dump(2) << '\n';
  }
  out << reports.dump(2) << '\n';
  manifest.write(dir, std::nullopt, outputs);
  return kExitOk;
}

int cmd_simulate(const Flags& flags, Phase& phase, const std::string& cmdline, std::ostream& out) {
  const Manifest manifest("simulate", cmdline, flags);
  SimConfig cfg = parse_sim_config(load_json(flags.config));
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.n) cfg.n_initial = *flags.n;
  if (flags.max_rounds) cfg.max_rounds = *flags.max_rounds;
  if (!flags.scheme.empty()) {
    try {
      cfg.scheme = PricingScheme::parse(flags.scheme);
    } catch (const Error& e) {
      throw ConfigError("--scheme", e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError("", e.what());
  }
  phase.loading = false;

  const SimResult res = run(cfg);
  const fs::path dir = fs::path(flags.out) / "simulate";
  fs::create_directories(dir);
  const bool has_myerson = !res.myerson_trajectory.empty();
  std::vector<std::string> cols{"round", "price", "alive", "buyers"};
  if (has_myerson) cols.push_back("myerson_price");
  CsvWriter traj(dir / "trajectory.csv", cols);
  for (std::size_t k = 0; k < res.rounds_run; ++k) {
    std::vector<CsvField> row{static_cast<long long>(k), res.price_trajectory[k],
                              res.alive_trajectory[k], res.buyer_trajectory[k]};
    if (has_myerson) row.push_back(res.myerson_trajectory[k]);
    traj.row(row);
  }
  traj.close();

  json j{{"scheme", cfg.scheme.name()},
         {"types", cfg.type_dist.describe()},
         {"retention", cfg.retention.dist.describe()},
         {"beta", cfg.retention.beta},
         {"retention_mode", to_string(cfg.retention_mode)},
         {"growth_rate", cfg.growth_rate},
         {"n_initial", cfg.n_initial},
         {"seed", cfg.seed},
         {"discounted_revenue", res.discounted_revenue},
         {"rounds_run", res.rounds_run},
         {"final_alive_fraction", res.final_alive_fraction},
         {"thinning_events", res.thinning_events}};
  if (cfg.scheme.kind != PricingScheme::Kind::FixedPrice &&
      cfg.scheme.kind != PricingScheme::Kind::MyersonOnly) {
    j["threshold_price"] = res.threshold_price;
    j["threshold_binding"] = res.threshold_binding;
  }
  out << fmt::format("scheme                 {}\n", cfg.scheme.name());
  out << fmt::format("discounted revenue     {:.10g} per initial player\n", res.discounted_revenue);
  out << fmt::format("rounds                 {}\n", res.rounds_run);
  out << fmt::format("final alive fraction   {:.6g}\n", res.final_alive_fraction);
  if (cfg.scheme.kind == PricingScheme::Kind::KnownTypes && cfg.growth_rate == 0.0) {
    const double closed = known_types_expected_revenue(cfg.type_dist, cfg.value, cfg.retention);
    const double rel = std::abs(res.discounted_revenue - closed) / closed;
    j["closed_form_revenue"] = closed;
    j["relative_error"] = rel;
    out << fmt::format("closed form            {:.10g} (relative error {:.3g})\n", closed, rel);
  }
  {
    std::ofstream f(dir / "result.json");
    f << j.dump(2) << '\n';
  }
  manifest.write(dir, cfg.seed, {"trajectory.csv", "result.json"});
  return kExitOk;
}

int cmd_study(const Flags& flags, Phase& phase, const std::string& cmdline, std::ostream& out,
              std::ostream& err) {
  StudyKind kind;
  try {
    kind = parse_study_kind(flags.study);
  } catch (const Error& e) {
    throw ConfigError("--study", e.what());
  }
  const json cfg = config_or_empty(flags);
  if (!cfg.is_object()) throw ConfigError("", "config must be an object");
  const GridSpec spec = parse_grid(cfg.contains("grid") ? cfg["grid"] : json(), kind);
  StudyOptions opt;
  opt.n = count_field(cfg, "n", opt.n);
  opt.replicates = count_field(cfg, "replicates", opt.replicates);
  opt.seed = cfg.contains("seed") ? count_field(cfg, "seed", 0) : opt.seed;
  opt.max_rounds = count_field(cfg, "max_rounds", opt.max_rounds);
  opt.population_cap = number_field(cfg, "population_cap", opt.population_cap);
  opt.strict_slack_se = number_field(cfg, "strict_slack_se", opt.strict_slack_se);
  if (flags.n) opt.n = *flags.n;
  if (flags.seed) opt.seed = *flags.seed;
  if (flags.replicates) opt.replicates = *flags.replicates;
  if (flags.max_rounds) opt.max_rounds = *flags.max_rounds;
  opt.threads = flags.threads;
  opt.command_line = cmdline;
  if (opt.n < 1) throw ConfigError("n", "must be at least 1");
  if (opt.replicates < 1) throw ConfigError("replicates", "must be at least 1");
  if (opt.max_rounds < 1) throw ConfigError("max_rounds", "must be at least 1");
  if (enumerate_grid(spec).empty()) throw ConfigError("grid", "grid has no cells");
  std::size_t last_pct = 0;
  opt.progress = [&](std::size_t done, std::size_t total) {
    const std::size_t pct = done * 100 / total;
    if (pct >= last_pct + 10 || done == total) {
      last_pct = pct;
      err << fmt::format("{}: {}/{} runs\n", flags.study, done, total);
    }
  };
  phase.loading = false;

  const StudySummary s = run_study(kind, spec, opt);
  const fs::path dir = fs::path(flags.out) / to_string(kind);
  write_study(s, spec, opt, dir);
  out << fmt::format("study {}: {} cells ({} failed), n={}, replicates={}, seed={}\n", to_string(kind),
                     s.cells, s.failed_cells, opt.n, opt.replicates, opt.seed);
  if (kind == StudyKind::Scaling) {
    out << fmt::format("{:>8} {:>12} {:>12} {:>12} {:>12}\n", "c", "median", "min", "max", "frac>1");
    for (const auto& x : s.scales) {
      out << fmt::format("{:>8.4f} {:>12.6f} {:>12.6f} {:>12.6f} {:>12.4f}\n", x.scale, x.median_ratio,
                         x.min_ratio, x.max_ratio, x.frac_above_one);
    }
  } else {
    out << fmt::format("frac_mt_within_1pct            {:.4f}\n", s.frac_mt_within_1pct);
    out << fmt::format("frac_mt_strictly_best          {:.4f}\n", s.frac_mt_strictly_best);
    out << fmt::format("frac_threshold_beats_myerson   {:.4f}\n", s.frac_threshold_beats_myerson);
    out << fmt::format("min REV(MT)/REV(known types)   {:.4f}\n", s.min_mt_over_known);
  }
  out << "wrote " << dir.string() << '\n';
  return kExitOk;
}

int cmd_figures(const Flags& flags, Phase& phase, const std::string& cmdline, std::ostream& out) {
  const Manifest manifest("figures", cmdline, flags);
  const json cfg = config_or_empty(flags);
  if (!cfg.is_object()) throw ConfigError("", "config must be an object");
  std::vector<FigureFamily> families;
  std::vector<std::string> names = figure_family_names();
  if (cfg.contains("families")) {
    const json& arr = cfg["families"];
    if (!arr.is_array()) throw ConfigError("families", "expected an array of names");
    names.clear();
    for (const auto& x : arr) {
      if (!x.is_string()) throw ConfigError("families", "expected an array of names");
      names.push_back(x.get<std::string>());
    }
  }
  for (const auto& name : names) {
    try {
      families.push_back(figure_family(name));
    } catch (const Error& e) {
      throw ConfigError("families", e.what());
    }
  }
  const OptimizeOptions opt = parse_optimize(cfg);
  const std::size_t curve_points = count_field(cfg, "curve_points", 500);
  phase.loading = false;

  const fs::path dir = fs::path(flags.out) / "figures";
  std::vector<std::string> outputs;
  out << fmt::format("{:<8} {:<20} {:>10} {:>10} {:>12} {:>12} {:>12}\n", "family", "member", "p_util",
                     "p_rev", "u(p_util)", "rev(p_rev)", "p_rev_const");
  for (const auto& fam : families) {
    const auto rows = figure_sweep(fam, dir, opt, curve_points, flags.threads);
    outputs.push_back(fam.name + ".csv");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      out << fmt::format("{:<8} {:<20} {:>10.6f} {:>10.6f} {:>12.6f} {:>12.6f} {:>12.6f}\n", fam.name,
                         r.label, r.p_util, r.p_rev, r.u_at_p_util, r.rev_at_p_rev, r.p_rev_constant);
      outputs.push_back(fmt::format("curve_{}_{}.csv", fam.name, i));
    }
  }
  manifest.write(dir, std::nullopt, outputs);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skip pricing: single-task price optimization, repeated-task simulation and studies",
               "skipmon"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version()) + " (" + git_hash() + ")");
  Flags flags;

  auto* single = app.add_subcommand("single", "Optimize the skip price for one or more single-task cases");
  single->add_option("--config", flags.config, "JSON config with types and value_function (or cases)")
      ->required();
  single->add_option("--objective", flags.objective, "utility, revenue or both")
      ->check(CLI::IsMember({"utility", "revenue", "both"}));

  auto* simulate = app.add_subcommand("simulate", "Simulate repeated tasks for one configuration");
  simulate->add_option("--config", flags.config, "JSON simulation config")->required();
  simulate->add_option("--scheme", flags.scheme,
                       "Override the pricing scheme: mt, myerson, threshold, known-types");
  simulate->add_option("--max-rounds", flags.max_rounds, "Override the round limit")
      ->check(CLI::PositiveNumber);

  auto* study = app.add_subcommand("study", "Run a configuration-grid study");
  study->add_option("--study", flags.study, "main, scaling or independent")->required();
  study->add_option("--config", flags.config, "Optional JSON with n, replicates, seed and grid overrides");
  study->add_option("--replicates", flags.replicates, "Seeds per cell")->check(CLI::PositiveNumber);
  study->add_option("--max-rounds", flags.max_rounds, "Round limit per simulation")
      ->check(CLI::PositiveNumber);

  auto* figures = app.add_subcommand("figures", "Export single-task figure data (fig2 .. fig6)");
  figures->add_option("--config", flags.config, "Optional JSON with families, curve_points, optimize");

  for (auto* sub : {single, simulate, study, figures}) {
    sub->add_option("--out", flags.out, "Output directory root")->capture_default_str();
    sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
  }
  for (auto* sub : {simulate, study}) {
    sub->add_option("--seed", flags.seed, "Master seed");
    sub->add_option("--n", flags.n, "Initial population size")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::string cmdline;
  for (int i = 0; i < argc; ++i) cmdline += (i ? " " : "") + std::string(argv[i]);

  Phase phase;
  try {
    if (single->parsed()) return cmd_single(flags, phase, cmdline, out);
    if (simulate->parsed()) return cmd_simulate(flags, phase, cmdline, out);
    if (study->parsed()) return cmd_study(flags, phase, cmdline, out, err);
    if (figures->parsed()) return cmd_figures(flags, phase, cmdline, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << (phase.loading ? "config error: " : "error: ") << e.what() << '\n';
    return phase.loading ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return phase.loading ? kExitConfig : kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace skipmon::cli
