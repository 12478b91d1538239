#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "polsar/inversion.hpp"
#include "polsar/scenario.hpp"
#include "polsar/speckle.hpp"

namespace polsar {

struct TrialRecord {
  int trial_index = 0;
  ModelParams params;
  double frac_v = 0.0;
  double frac_s = 0.0;
  double frac_d = 0.0;
  double cost = 0.0;
  bool converged = false;
  Identifiability identifiable;
  /// trace of the speckled observation; the fitted span may differ by the
  /// residual trace
  double observed_span = 0.0;
};

/// Truth and provenance shared by every trial of one Monte Carlo run.
struct RunInfo {
  Scenario scenario;
  ModelParams truth;
  CoherencyMatrix t_true;
  double entropy = 0.0;
  MechanismPowers true_powers;
  SpeckleConfig speckle;
  FitOptions fit;
  int n_trials = 0;
};

struct TrialSet {
  RunInfo info;
  std::vector<TrialRecord> records;

  [[nodiscard]] int n_converged() const;
};

enum class StatUnit { Power, Unitless, Degrees, Fraction };

/// Estimator quality of one parameter. For fractions, truth/mean are
/// fractions while `bias`, `abs_error` and `std` are percentage points.
/// Angles are in degrees.
struct ParamStats {
  std::string name;
  StatUnit unit = StatUnit::Unitless;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double abs_error = 0.0;
  /// 100 |mean - truth| / |truth|; NaN when the truth is zero (angles
  /// substitute the absolute error in degrees below |truth| < 1e-9).
  double rel_error_pct = 0.0;
  double std = 0.0;
  int n_effective = 0;
};

struct Histogram {
  std::string parameter;
  double truth = 0.0;
  std::vector<double> edges;
  std::vector<int> counts;
  int underflow = 0;
  int overflow = 0;

  [[nodiscard]] int total() const;
};

/// One point of the volume sweep: fixed double bounce, growing f_v.
struct SweepPoint {
  double f_v = 0.0;
  double entropy = 0.0;
  std::vector<ParamStats> stats;
  int n_converged = 0;

  [[nodiscard]] const ParamStats& stat(const std::string& name) const;
};

/// Names of the summarized quantities, in report order.
[[nodiscard]] const std::vector<std::string>& stat_names();

/// Monte Carlo over n_trials speckled copies of the scenario's noise-free
/// matrix. Trial i draws speckle from stream (speckle.seed, i) and random
/// starts from (fit_opts.start_seed, i). Trials run in parallel under OpenMP;
/// records come back in trial order and do not depend on the thread count.
[[nodiscard]] TrialSet run_trials(const Scenario& scenario, int n_trials,
                                  const SpeckleConfig& speckle, const FitOptions& fit_opts);

/// Serial reference for run_trials.
[[nodiscard]] TrialSet run_trials_serial(const Scenario& scenario, int n_trials,
                                         const SpeckleConfig& speckle,
                                         const FitOptions& fit_opts);

/// Per-parameter bias and spread over converged trials whose parameter is
/// identifiable (shape and angle of a mechanism need positive true power).
/// Sample standard deviation with n-1. Angles are averaged as offsets from
/// the truth, wrapped into (-45, 45] degrees. Throws InsufficientDataError
/// with fewer than two converged records.
[[nodiscard]] std::vector<ParamStats> summarize(const std::vector<TrialRecord>& records,
                                                const ModelParams& truth);

/// Values of one named quantity over the records `summarize` would use
/// (angles in degrees, fractions as fractions).
[[nodiscard]] std::vector<double> effective_values(const std::vector<TrialRecord>& records,
                                                   const ModelParams& truth,
                                                   const std::string& name);

/// Uniform histogram over `range` (half-open, out-of-range values go to
/// underflow/overflow) or over [min, max] of the data with the maximum in
/// the last bin. A degenerate data range is widened by +-0.5.
[[nodiscard]] Histogram histogram(const std::vector<double>& values, int n_bins,
                                  std::optional<std::pair<double, double>> range = std::nullopt);

/// Volume sweep at fixed double-bounce power. `base` must have no surface
/// power; its double-bounce power span * fractions.double_bounce is held
/// fixed while f_v walks the (increasing) grid.
[[nodiscard]] std::vector<SweepPoint> entropy_sweep(const Scenario& base,
                                                    const std::vector<double>& fv_grid,
                                                    int n_trials, const SpeckleConfig& speckle,
                                                    const FitOptions& fit_opts);

/// Scenario of one sweep point.
[[nodiscard]] Scenario sweep_scenario(const Scenario& base, double f_v);

/// Spearman rank correlation (average ranks for ties).
[[nodiscard]] double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace polsar
