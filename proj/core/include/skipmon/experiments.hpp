#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "skipmon/distribution.hpp"
#include "skipmon/simulator.hpp"

namespace skipmon {

struct LabeledDist {
  std::string label;  ///< e.g. "impexp(2)", "uniform", "exp(3)", "lomax(5)"
  Distribution dist;
};

/// Drops every cell whose type label equals `type_label` and whose retention
/// label starts with `retention_prefix`.
struct Exclusion {
  std::string type_label;
  std::string retention_prefix;
};

enum class StudyKind { Main, Independent, Scaling };

const char* to_string(StudyKind kind) noexcept;
/// Throws ConfigInvalid for names other than main, independent and scaling.
StudyKind parse_study_kind(const std::string& name);

struct GridSpec {
  std::vector<LabeledDist> type_dists;
  std::vector<LabeledDist> retention_dists;
  std::vector<double> betas;
  std::vector<double> growth_rates;
  std::vector<RetentionMode> retention_modes;
  std::vector<double> scales;  ///< Myerson scale factors; used by the scaling study
  std::vector<Exclusion> exclusions;

  /// The full grid in both retention modes.
  static GridSpec main_grid();
  /// The main grid restricted to independent retention.
  static GridSpec independent_grid();
  /// Uniform types with exponential retention, shared mode, scales {1, 2/3, 1/2, 1/3}.
  static GridSpec scaling_grid();
  static GridSpec for_study(StudyKind kind);
};

struct Cell {
  std::size_t index;
  std::string type_label;
  std::string retention_label;
  Distribution type_dist;
  Distribution retention_dist;
  double beta;
  double growth_rate;
  RetentionMode mode;

  /// Stable identifier built from the axis labels; per-cell seeds hash it.
  std::string key() const;
};

/// Cross product in axis order (types, retention, beta, growth, mode), minus
/// exclusions.
std::vector<Cell> enumerate_grid(const GridSpec& spec);

/// Seed for one replicate of one cell; depends only on the master seed, the
/// cell key and the replicate index.
std::uint64_t cell_seed(std::uint64_t master, const Cell& cell, std::size_t replicate);

struct StudyOptions {
  std::size_t n = 100000;
  std::uint64_t seed = 1;
  std::size_t replicates = 5;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  std::size_t max_rounds = 1000;
  double population_cap = 2.0;
  double strict_slack_se = 2.0;  ///< "strictly best" needs ratio > 1 + slack * SE
  std::string command_line;      ///< echoed into the manifest
  std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Builds the simulator config for one replicate of one cell.
SimConfig make_sim_config(const Cell& cell, const PricingScheme& scheme, const StudyOptions& options,
                          std::size_t replicate);

struct SchemeStats {
  std::string scheme;
  std::vector<double> revenue;  ///< one entry per replicate
  std::vector<std::size_t> rounds;
  std::vector<double> final_alive;
  double mean_revenue = 0.0;
};

struct CellResult {
  Cell cell;
  std::optional<std::string> error;  ///< set when the cell failed; the cell is then skipped
  std::vector<SchemeStats> schemes;

  double ratio = 0.0;     ///< main: MT / max(Myerson, Threshold) on replicate means
  double ratio_se = 0.0;  ///< standard error of the per-replicate ratios
  bool within_1pct = false;
  bool strictly_best = false;
  bool threshold_beats_myerson = false;
  double mt_over_known = 0.0;
  std::vector<double> scaled_ratios;  ///< scaling: Scaled(c) / MT, in spec.scales order

  const SchemeStats* find(const std::string& scheme) const;
};

struct ScaleSummary {
  double scale;
  double median_ratio;
  double min_ratio;
  double max_ratio;
  double frac_above_one;
};

struct StudySummary {
  StudyKind kind;
  std::size_t cells = 0;
  std::size_t failed_cells = 0;
  double frac_mt_within_1pct = 0.0;
  double frac_mt_strictly_best = 0.0;
  double frac_threshold_beats_myerson = 0.0;
  double min_mt_over_known = 0.0;
  std::vector<ScaleSummary> scales;
  std::vector<CellResult> results;
};

/// Runs every cell and replicate (in parallel; results in cell order) and
/// computes the summary. Writes nothing.
StudySummary run_study(StudyKind kind, const GridSpec& spec, const StudyOptions& options);

/// Writes manifest.json, ratios.csv, revenues.csv, summary.csv and the
/// histogram files for the study kind into `out_dir`.
void write_study(const StudySummary& summary, const GridSpec& spec, const StudyOptions& options,
                 const std::filesystem::path& out_dir);

double median(std::vector<double> values);

}  // namespace skipmon
