#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kvwave/config_file.hpp"
#include "kvwave/evolve.hpp"
#include "kvwave/model.hpp"
#include "kvwave/spectrum.hpp"

namespace kvwave {

enum class ExperimentKind {
  simulate,
  spectrum,
  resolvent_sweep,
  huang_pruss,
  char_roots,
  kernel_check,
  aux_check,
};

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view text);

/// One batch experiment. Fields that a kind does not use keep their defaults
/// and are not echoed in its metadata.
struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::simulate;
  ProblemConfig config;

  int n_cells = 400;
  double dt = 1e-3;
  double T = 200.0;
  FitWindow fit_window{10.0, 200.0};

  std::pair<int, int> n_range{1, 200};
  /// Sample points: kπ/L for k in k_range, or lambda_count points spread
  /// evenly over lambda_range when k_range is unset.
  std::optional<std::pair<int, int>> k_range;
  std::pair<double, double> lambda_range{1.0, 200.0};
  int lambda_count = 200;
  ResolventMethod method = ResolventMethod::automatic;

  int count = 20;
  Complex near{0.0, 0.0};

  std::vector<int> mesh_cells{100, 200, 400, 800};
  int witness_n = 3;

  int draws = 1000;
  std::uint64_t seed = 1;

  std::filesystem::path output_dir = "out";
  int jobs = 1;
};

/// Spec with the documented defaults of `kind` (e.g. T = 50 and fit window
/// [5, 50] for aux_check, n_range [10, 60] for char_roots).
ExperimentSpec default_spec(ExperimentKind kind, ProblemConfig config);

/// Strict parser. The root section holds `preset` (required) and the preset's
/// scalar parameters; `[damping.u]` / `[damping.y]` replace the preset's
/// damping on that equation; `[experiment]` holds `kind` and the numeric
/// parameters. `kind_hint` supplies the kind when the file has none and must
/// agree with it otherwise. Unknown keys, missing required keys and malformed
/// values raise ConfigError with the offending line number. The problem
/// config itself is not validated here.
ExperimentSpec parse_config(const std::filesystem::path& path,
                            std::optional<ExperimentKind> kind_hint = std::nullopt);
ExperimentSpec parse_config_text(std::string_view text, std::string_view source,
                                 std::optional<ExperimentKind> kind_hint = std::nullopt);

/// Every problem with the spec for its kind, model violations included.
/// Empty means run_experiment can start.
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

struct ExperimentResult {
  std::vector<std::filesystem::path> artifacts;
  /// Short human-readable digest of the headline numbers.
  std::string summary;
};

/// Validates, computes everything in memory, then writes CSV tables, gnuplot
/// scripts and `metadata.json` into the output directory. Errors carry the
/// experiment kind and parameters: ConfigError for invalid input, DomainError
/// for out-of-range parameters, NumericalError otherwise. Files written
/// before a failure are removed.
ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Splits the samples into `windows` consecutive groups and returns the
/// largest group maximum divided by the smallest.
double upper_envelope_ratio(const std::vector<double>& values, int windows = 10);

/// `count` evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, int count);

/// Sample points of a resolvent sweep as described on ExperimentSpec.
std::vector<double> sweep_points(const ExperimentSpec& spec);

}  // namespace kvwave
