#include "skipmon/experiments.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>

#include "skipmon/csv.hpp"
#include "skipmon/error.hpp"
#include "skipmon/parallel.hpp"
#include "skipmon/rng.hpp"
#include "skipmon/version.hpp"


namespace skipmon {

const char* to_string(StudyKind kind) noexcept {
  switch (kind) {
    case StudyKind::Main: return "main";
    case StudyKind::Independent: return "independent";
    case StudyKind::Scaling: return "scaling";
  }
  return "unknown";
}

StudyKind parse_study_kind(const std::string& name) {
  if (name == "main") return StudyKind::Main;
  if (name == "independent") return StudyKind::Independent;
  if (name == "scaling") return StudyKind::Scaling;
  throw Error(Errc::ConfigInvalid, "unknown study '" + name + "' (expected main, independent or scaling)");
}

namespace {

std::vector<LabeledDist> standard_types() {
  return {{"impexp(1)", Distribution::impatience_exponential(1.0)},
          {"impexp(2)", Distribution::impatience_exponential(2.0)},
          {"impexp(3)", Distribution::impatience_exponential(3.0)},
          {"uniform", Distribution::uniform_unit()}};
}

std::vector<LabeledDist> exponential_retention() {
  return {{"exp(1)", Distribution::exponential(1.0)},
          {"exp(3)", Distribution::exponential(3.0)},
          {"exp(5)", Distribution::exponential(5.0)}};
}

std::vector<LabeledDist> standard_retention() {
  auto out = exponential_retention();
  out.push_back({"lomax(3)", Distribution::lomax(3.0)});
  out.push_back({"lomax(5)", Distribution::lomax(5.0)});
  return out;
}

}  // namespace

GridSpec GridSpec::main_grid() {
  GridSpec g;
  g.type_dists = standard_types();
  g.retention_dists = standard_retention();
  g.betas = {0.97, 0.99, 0.999};
  g.growth_rates = {0.0, 0.01, 0.05};
  g.retention_modes = {RetentionMode::Shared, RetentionMode::Independent};
  g.scales = {1.0};
  g.exclusions = {{"impexp(2)", "lomax"}};
  return g;
}

GridSpec GridSpec::independent_grid() {
  GridSpec g = main_grid();
  g.retention_modes = {RetentionMode::Independent};
  return g;
}

GridSpec GridSpec::scaling_grid() {
  GridSpec g;
  g.type_dists = {{"uniform", Distribution::uniform_unit()}};
  g.retention_dists = exponential_retention();
  g.betas = {0.97, 0.99, 0.999};
  g.growth_rates = {0.0, 0.01, 0.05};
  g.retention_modes = {RetentionMode::Shared};
  g.scales = {1.0, 2.0 / 3.0, 0.5, 1.0 / 3.0};
  return g;
}

GridSpec GridSpec::for_study(StudyKind kind) {
  switch (kind) {
    case StudyKind::Main: return main_grid();
    case StudyKind::Independent: return independent_grid();
    case StudyKind::Scaling: return scaling_grid();
  }
  return main_grid();
}

std::string Cell::key() const {
  return fmt::format("{}|{}|{}|{}|{}", type_label, retention_label, beta, growth_rate,
                     to_string(mode));
}

std::vector<Cell> enumerate_grid(const GridSpec& spec) {
  std::vector<Cell> cells;
  const auto excluded = [&](const LabeledDist& t, const LabeledDist& r) {
    return std::any_of(spec.exclusions.begin(), spec.exclusions.end(), [&](const Exclusion& e) {
      return t.label == e.type_label && r.label.starts_with(e.retention_prefix);
    });
  };
  for (const auto& t : spec.type_dists) {
    for (const auto& r : spec.retention_dists) {
      if (excluded(t, r)) continue;
      for (double beta : spec.betas) {
        for (double g : spec.growth_rates) {
          for (RetentionMode mode : spec.retention_modes) {
            cells.push_back(
                Cell{cells.size(), t.label, r.label, t.dist, r.dist, beta, g, mode});
          }
        }
      }
    }
  }
  return cells;
}

std::uint64_t cell_seed(std::uint64_t master, const Cell& cell, std::size_t replicate) {
  return hash_words(master, fnv1a(cell.key()), replicate);
}

SimConfig make_sim_config(const Cell& cell, const PricingScheme& scheme, const StudyOptions& options,
                          std::size_t replicate) {
  SimConfig cfg;
  cfg.n_initial = options.n;
  cfg.type_dist = cell.type_dist;
  cfg.value = 1.0;
  cfg.retention = RetentionModel::make(cell.retention_dist, cell.beta);
  cfg.scheme = scheme;
  cfg.retention_mode = cell.mode;
  cfg.growth_rate = cell.growth_rate;
  cfg.seed = cell_seed(options.seed, cell, replicate);
  cfg.max_rounds = options.max_rounds;
  cfg.population_cap = options.population_cap;
  cfg.record_trajectories = false;
  return cfg;
}

const SchemeStats* CellResult::find(const std::string& scheme) const {
  for (const auto& s : schemes) {
    if (s.scheme == scheme) return &s;
  }
  return nullptr;
}

double median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

std::vector<PricingScheme> study_schemes(StudyKind kind, const GridSpec& spec) {
  if (kind == StudyKind::Scaling) {
    std::vector<PricingScheme> out{PricingScheme::myerson_threshold()};
    // Scale 1 is MT itself and reuses its runs.
    for (double c : spec.scales) {
      if (c != 1.0) out.push_back(PricingScheme::scaled_myerson_threshold(c));
    }
    return out;
  }
  return {PricingScheme::myerson_threshold(), PricingScheme::myerson_only(),
          PricingScheme::threshold_only(), PricingScheme::known_types()};
}

double safe_ratio(double num, double den) {
  if (den > 0.0) return num / den;
  return num > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
}

double standard_error(const std::vector<double>& xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

void finish_cell(StudyKind kind, const GridSpec& spec, const StudyOptions& options, CellResult& r) {
  for (auto& s : r.schemes) {
    double total = 0.0;
    for (double x : s.revenue) total += x;
    s.mean_revenue = total / static_cast<double>(s.revenue.size());
  }
  const SchemeStats& mt = *r.find("mt");
  if (kind == StudyKind::Scaling) {
    for (double c : spec.scales) {
      const SchemeStats* s = c == 1.0 ? &mt : r.find(PricingScheme::scaled_myerson_threshold(c).name());
      r.scaled_ratios.push_back(safe_ratio(s->mean_revenue, mt.mean_revenue));
    }
    return;
  }
  const SchemeStats& my = *r.find("myerson");
  const SchemeStats& th = *r.find("threshold");
  const SchemeStats& kt = *r.find("known-types");
  r.ratio = safe_ratio(mt.mean_revenue, std::max(my.mean_revenue, th.mean_revenue));
  std::vector<double> per_rep;
  for (std::size_t j = 0; j < mt.revenue.size(); ++j) {
    per_rep.push_back(safe_ratio(mt.revenue[j], std::max(my.revenue[j], th.revenue[j])));
  }
  r.ratio_se = std::isfinite(r.ratio) ? standard_error(per_rep) : 0.0;
  r.within_1pct = r.ratio >= 0.99;
  r.strictly_best = r.ratio > 1.0 + std::max(options.strict_slack_se * r.ratio_se, 1e-9);
  r.threshold_beats_myerson = th.mean_revenue > my.mean_revenue;
  r.mt_over_known = safe_ratio(mt.mean_revenue, kt.mean_revenue);
}

}  // namespace

StudySummary run_study(StudyKind kind, const GridSpec& spec, const StudyOptions& options) {
  if (options.n < 1) throw Error(Errc::ConfigInvalid, "study needs n >= 1");
  if (options.replicates < 1) throw Error(Errc::ConfigInvalid, "study needs at least one replicate");
  const std::vector<Cell> cells = enumerate_grid(spec);
  const std::vector<PricingScheme> schemes = study_schemes(kind, spec);
  const std::size_t reps = options.replicates;

  StudySummary summary;
  summary.kind = kind;
  summary.cells = cells.size();
  summary.results.reserve(cells.size());
  std::vector<std::optional<std::string>> task_errors(cells.size() * reps);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult& r = summary.results.emplace_back(
        CellResult{cells[c], std::nullopt, {}, 0.0, 0.0, false, false, false, 0.0, {}});
    for (const auto& s : schemes) {
      SchemeStats st;
      st.scheme = s.name();
      st.revenue.assign(reps, 0.0);
      st.rounds.assign(reps, 0);
      st.final_alive.assign(reps, 0.0);
      r.schemes.push_back(std::move(st));
    }
  }

  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  const std::size_t total = cells.size() * reps;
  parallel_for(total, options.threads, [&](std::size_t task) {
    const std::size_t c = task / reps;
    const std::size_t rep = task % reps;
    CellResult& r = summary.results[c];
    try {
      std::vector<SimConfig> configs;
      for (const auto& s : schemes) configs.push_back(make_sim_config(cells[c], s, options, rep));
      const std::vector<SimResult> results = run_pair(configs);
      for (std::size_t s = 0; s < schemes.size(); ++s) {
        r.schemes[s].revenue[rep] = results[s].discounted_revenue;
        r.schemes[s].rounds[rep] = results[s].rounds_run;
        r.schemes[s].final_alive[rep] = results[s].final_alive_fraction;
      }
    } catch (const std::exception& e) {
      task_errors[task] = e.what();
    }
    const std::size_t finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, total);
    }
  });

  std::size_t within = 0;
  std::size_t strict = 0;
  std::size_t thr = 0;
  double min_known = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> per_scale(spec.scales.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellResult& r = summary.results[c];
    for (std::size_t rep = 0; rep < reps; ++rep) {
      if (task_errors[c * reps + rep] && !r.error) r.error = task_errors[c * reps + rep];
    }
    if (r.error) {
      ++summary.failed_cells;
      continue;
    }
    finish_cell(kind, spec, options, r);
    if (kind == StudyKind::Scaling) {
      for (std::size_t i = 0; i < spec.scales.size(); ++i) per_scale[i].push_back(r.scaled_ratios[i]);
      continue;
    }
    within += r.within_1pct ? 1 : 0;
    strict += r.strictly_best ? 1 : 0;
    thr += r.threshold_beats_myerson ? 1 : 0;
    min_known = std::min(min_known, r.mt_over_known);
  }

  const std::size_t ok = summary.cells - summary.failed_cells;
  if (kind != StudyKind::Scaling && ok > 0) {
    const double denom = static_cast<double>(ok);
    summary.frac_mt_within_1pct = static_cast<double>(within) / denom;
    summary.frac_mt_strictly_best = static_cast<double>(strict) / denom;
    summary.frac_threshold_beats_myerson = static_cast<double>(thr) / denom;
    summary.min_mt_over_known = min_known;
  }
  for (std::size_t i = 0; i < spec.scales.size() && kind == StudyKind::Scaling; ++i) {
    const auto& xs = per_scale[i];
    ScaleSummary s{spec.scales[i], median(xs), std::nan(""), std::nan(""), 0.0};
    if (!xs.empty()) {
      s.min_ratio = *std::min_element(xs.begin(), xs.end());
      s.max_ratio = *std::max_element(xs.begin(), xs.end());
      s.frac_above_one = static_cast<double>(std::count_if(xs.begin(), xs.end(),
                                                           [](double x) { return x > 1.0; })) /
                         static_cast<double>(xs.size());
    }
    summary.scales.push_back(s);
  }
  return summary;
}

namespace {

std::vector<CsvField> axis_fields(const Cell& c) {
  return {static_cast<long long>(c.index), c.type_label, c.retention_label, c.beta, c.growth_rate,
          std::string(to_string(c.mode))};
}

std::vector<std::string> with_axes(std::vector<std::string> rest) {
  std::vector<std::string> h{"cell", "type_dist", "retention_dist", "beta", "growth_rate",
                             "retention_mode"};
  h.insert(h.end(), rest.begin(), rest.end());
  return h;
}

std::string grid_description(const GridSpec& spec) {
  nlohmann::json j;
  for (const auto& t : spec.type_dists) j["type_dists"].push_back(t.label);
  for (const auto& r : spec.retention_dists) j["retention_dists"].push_back(r.label);
  j["betas"] = spec.betas;
  j["growth_rates"] = spec.growth_rates;
  for (auto m : spec.retention_modes) j["retention_modes"].push_back(to_string(m));
  j["scales"] = spec.scales;
  for (const auto& e : spec.exclusions) {
    j["exclusions"].push_back({{"type_dist", e.type_label}, {"retention_prefix", e.retention_prefix}});
  }
  return j.dump();
}

void write_manifest(const StudySummary& summary, const GridSpec& spec, const StudyOptions& options,
                    const std::filesystem::path& out_dir, const std::vector<std::string>& files) {
  nlohmann::json j;
  j["study"] = to_string(summary.kind);
  j["command_line"] = options.command_line;
  j["version"] = version();
  j["git_hash"] = git_hash();
  j["master_seed"] = options.seed;
  j["n"] = options.n;
  j["replicates"] = options.replicates;
  j["max_rounds"] = options.max_rounds;
  j["population_cap"] = options.population_cap;
  j["strict_slack_se"] = options.strict_slack_se;
  j["value"] = 1.0;
  j["recruits_join"] = "next round, not retention-tested on arrival";
  j["lomax_scale"] = 1.0;
  j["grid"] = nlohmann::json::parse(grid_description(spec));
  j["cell_count"] = summary.cells;
  j["failed_cells"] = summary.failed_cells;
  const std::string hashed = fmt::format("{}|{}|{}|{}|{}|{}|{}|{}", grid_description(spec),
                                         to_string(summary.kind), options.seed, options.n,
                                         options.replicates, options.max_rounds,
                                         options.population_cap, options.strict_slack_se);
  j["config_hash"] = fmt::format("{:016x}", fnv1a(hashed));
  j["written_at"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}",
                                fmt::gmtime(std::chrono::system_clock::to_time_t(
                                    std::chrono::system_clock::now())));
  j["outputs"] = files;
  std::ofstream out(out_dir / "manifest.json");
  if (!out) throw Error(Errc::Io, "cannot write manifest in " + out_dir.string());
  out << j.dump(2) << '\n';
}

}  // namespace

void write_study(const StudySummary& summary, const GridSpec& spec, const StudyOptions& options,
                 const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::string> files{"revenues.csv", "ratios.csv", "summary.csv"};

  CsvWriter revenues(out_dir / "revenues.csv",
                     with_axes({"scheme", "replicate", "seed", "revenue", "rounds",
                                "final_alive_fraction"}));
  for (const auto& r : summary.results) {
    if (r.error) continue;
    for (const auto& s : r.schemes) {
      for (std::size_t j = 0; j < s.revenue.size(); ++j) {
        auto row = axis_fields(r.cell);
        row.insert(row.end(), {s.scheme, static_cast<long long>(j),
                               fmt::format("{}", cell_seed(options.seed, r.cell, j)), s.revenue[j],
                               static_cast<long long>(s.rounds[j]), s.final_alive[j]});
        revenues.row(row);
      }
    }
  }
  revenues.close();

  if (summary.kind == StudyKind::Scaling) {
    std::vector<std::string> cols;
    for (const auto& s : study_schemes(summary.kind, spec)) cols.push_back("rev_" + s.name());
    for (double c : spec.scales) cols.push_back(fmt::format("ratio_c{:.4f}", c));
    cols.push_back("status");
    CsvWriter ratios(out_dir / "ratios.csv", with_axes(cols));
    CsvWriter hist(out_dir / "hist_scaled.csv", {"cell", "c", "ratio"});
    for (const auto& r : summary.results) {
      auto row = axis_fields(r.cell);
      for (const auto& s : r.schemes) row.push_back(r.error ? std::nan("") : s.mean_revenue);
      for (std::size_t i = 0; i < spec.scales.size(); ++i) {
        row.push_back(r.error ? std::nan("") : r.scaled_ratios[i]);
        if (!r.error) hist.row({static_cast<long long>(r.cell.index), spec.scales[i], r.scaled_ratios[i]});
      }
      row.push_back(r.error ? *r.error : std::string("ok"));
      ratios.row(row);
    }
    ratios.close();
    hist.close();

    CsvWriter sum(out_dir / "summary.csv",
                  {"study", "c", "median_ratio", "min_ratio", "max_ratio", "frac_above_one", "cells",
                   "failed_cells"});
    for (const auto& s : summary.scales) {
      sum.row({std::string(to_string(summary.kind)), s.scale, s.median_ratio, s.min_ratio, s.max_ratio,
               s.frac_above_one, static_cast<long long>(summary.cells),
               static_cast<long long>(summary.failed_cells)});
    }
    sum.close();
    files.push_back("hist_scaled.csv");
    write_manifest(summary, spec, options, out_dir, files);
    return;
  }

  CsvWriter ratios(out_dir / "ratios.csv",
                   with_axes({"rev_mt", "rev_myerson", "rev_threshold", "rev_known_types", "ratio",
                              "ratio_se", "within_1pct", "strictly_best", "threshold_beats_myerson",
                              "mt_over_known", "status"}));
  CsvWriter hist(out_dir / "hist_mt_vs_best.csv", {"cell", "retention_mode", "ratio"});
  CsvWriter indep(out_dir / "hist_indep.csv", {"cell", "ratio"});
  for (const auto& r : summary.results) {
    auto row = axis_fields(r.cell);
    if (r.error) {
      for (int i = 0; i < 10; ++i) row.push_back(std::nan(""));
      row.push_back(*r.error);
      ratios.row(row);
      continue;
    }
    row.insert(row.end(), {r.find("mt")->mean_revenue, r.find("myerson")->mean_revenue,
                           r.find("threshold")->mean_revenue, r.find("known-types")->mean_revenue,
                           r.ratio, r.ratio_se, static_cast<long long>(r.within_1pct),
                           static_cast<long long>(r.strictly_best),
                           static_cast<long long>(r.threshold_beats_myerson), r.mt_over_known,
                           std::string("ok")});
    ratios.row(row);
    hist.row({static_cast<long long>(r.cell.index), std::string(to_string(r.cell.mode)), r.ratio});
    if (r.cell.mode == RetentionMode::Independent) {
      indep.row({static_cast<long long>(r.cell.index), r.ratio});
    }
  }
  ratios.close();
  hist.close();
  indep.close();

  CsvWriter sum(out_dir / "summary.csv",
                {"study", "cells", "failed_cells", "frac_mt_within_1pct", "frac_mt_strictly_best",
                 "frac_threshold_beats_myerson", "min_mt_over_known"});
  sum.row({std::string(to_string(summary.kind)), static_cast<long long>(summary.cells),
           static_cast<long long>(summary.failed_cells), summary.frac_mt_within_1pct,
           summary.frac_mt_strictly_best, summary.frac_threshold_beats_myerson,
           summary.min_mt_over_known});
  sum.close();
  files.push_back("hist_mt_vs_best.csv");
  files.push_back("hist_indep.csv");
  write_manifest(summary, spec, options, out_dir, files);
}

}  // namespace skipmon
