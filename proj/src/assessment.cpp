#include "polsar/assessment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "polsar/error.hpp"

namespace polsar {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Mechanism { None, Double, Surface };

struct Quantity {
  const char* name;
  StatUnit unit;
  Mechanism needs;  // shape/angle quantities need that mechanism present
};

constexpr Quantity kQuantities[] = {
    {"f_v", StatUnit::Power, Mechanism::None},
    {"f_d", StatUnit::Power, Mechanism::None},
    {"f_s", StatUnit::Power, Mechanism::None},
    {"alpha_re", StatUnit::Unitless, Mechanism::Double},
    {"alpha_im", StatUnit::Unitless, Mechanism::Double},
    {"beta", StatUnit::Unitless, Mechanism::Surface},
    {"psi_d", StatUnit::Degrees, Mechanism::Double},
    {"psi_s", StatUnit::Degrees, Mechanism::Surface},
    {"pv_span", StatUnit::Fraction, Mechanism::None},
    {"ps_span", StatUnit::Fraction, Mechanism::None},
    {"pd_span", StatUnit::Fraction, Mechanism::None},
};

const Quantity& find_quantity(const std::string& name) {
  for (const auto& q : kQuantities) {
    if (name == q.name) return q;
  }
  throw std::invalid_argument("unknown statistic: " + name);
}

double extract(const ModelParams& p, double fv, double fs, double fd, const std::string& name) {
  if (name == "f_v") return p.f_v;
  if (name == "f_d") return p.f_d;
  if (name == "f_s") return p.f_s;
  if (name == "alpha_re") return p.alpha.real();
  if (name == "alpha_im") return p.alpha.imag();
  if (name == "beta") return p.beta;
  if (name == "psi_d") return rad_to_deg(p.psi_d);
  if (name == "psi_s") return rad_to_deg(p.psi_s);
  if (name == "pv_span") return fv;
  if (name == "ps_span") return fs;
  if (name == "pd_span") return fd;
  throw std::invalid_argument("unknown statistic: " + name);
}

double truth_value(const ModelParams& truth, const std::string& name) {
  const auto mp = mechanism_powers(truth);
  return extract(truth, mp.volume_fraction(), mp.surface_fraction(), mp.double_fraction(), name);
}

/// Shortest signed offset under the quarter-turn symmetry, in (-45, 45].
double wrap_degrees(double d) {
  return rad_to_deg(reduce_orientation(deg_to_rad(d)).angle);
}

bool mechanism_present(const ModelParams& truth, Mechanism m) {
  const double span = mechanism_powers(truth).span;
  switch (m) {
    case Mechanism::Double: return truth.f_d > kIdentifiablePower * span;
    case Mechanism::Surface: return truth.f_s > kIdentifiablePower * span;
    case Mechanism::None: return true;
  }
  return true;
}

bool record_identifiable(const TrialRecord& r, const std::string& name) {
  if (name == "alpha_re" || name == "alpha_im") return r.identifiable.alpha;
  if (name == "beta") return r.identifiable.beta;
  if (name == "psi_d") return r.identifiable.psi_d;
  if (name == "psi_s") return r.identifiable.psi_s;
  return true;
}

TrialRecord make_record(int index, const CoherencyMatrix& sample, const FitResult& fr) {
  TrialRecord rec;
  rec.trial_index = index;
  rec.params = fr.params;
  const auto mp = mechanism_powers(fr.params);
  if (mp.span > 0.0) {
    rec.frac_v = mp.volume_fraction();
    rec.frac_s = mp.surface_fraction();
    rec.frac_d = mp.double_fraction();
  }
  rec.cost = fr.cost;
  rec.converged = fr.converged;
  rec.identifiable = fr.identifiable;
  rec.observed_span = sample.trace();
  return rec;
}

RunInfo make_info(const Scenario& scenario, int n_trials, const SpeckleConfig& speckle,
                  const FitOptions& fit_opts) {
  speckle.validate();
  fit_opts.validate();
  if (n_trials < 1) throw ValidationError("trials: must be at least 1");
  RunInfo info;
  info.scenario = scenario;
  info.truth = scenario_to_params(scenario);
  info.t_true = assemble(info.truth);
  info.entropy = entropy(info.t_true);
  info.true_powers = mechanism_powers(info.truth);
  info.speckle = speckle;
  info.fit = fit_opts;
  info.n_trials = n_trials;
  return info;
}

TrialRecord run_one(const LowerTriangularFactor& l, const SpeckleConfig& speckle,
                    const FitOptions& fit_opts, int i) {
  CounterStream rng(speckle.seed, static_cast<std::uint64_t>(i));
  const CoherencyMatrix sample = multilook_sample(l, speckle.n_looks, rng);
  FitOptions opts = fit_opts;
  opts.start_stream = fit_opts.start_stream + static_cast<std::uint64_t>(i);
  return make_record(i, sample, fit(sample, opts));
}

}  // namespace

int TrialSet::n_converged() const {
  return static_cast<int>(
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.converged; }));
}

int Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0) + underflow + overflow;
}

const ParamStats& SweepPoint::stat(const std::string& name) const {
  for (const auto& s : stats) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("sweep point has no statistic " + name);
}

const std::vector<std::string>& stat_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& q : kQuantities) n.emplace_back(q.name);
    return n;
  }();
  return names;
}

TrialSet run_trials(const Scenario& scenario, int n_trials, const SpeckleConfig& speckle,
                    const FitOptions& fit_opts) {
  TrialSet set;
  set.info = make_info(scenario, n_trials, speckle, fit_opts);
  const auto l = cholesky_hermitian(set.info.t_true);
  set.records.resize(static_cast<std::size_t>(n_trials));
  // Fit time varies per trial.
#pragma omp parallel for schedule(dynamic, 4)
  for (int i = 0; i < n_trials; ++i) {
    set.records[static_cast<std::size_t>(i)] = run_one(l, speckle, fit_opts, i);
  }
  return set;
}

TrialSet run_trials_serial(const Scenario& scenario, int n_trials, const SpeckleConfig& speckle,
                           const FitOptions& fit_opts) {
  TrialSet set;
  set.info = make_info(scenario, n_trials, speckle, fit_opts);
  const auto l = cholesky_hermitian(set.info.t_true);
  set.records.reserve(static_cast<std::size_t>(n_trials));
  for (int i = 0; i < n_trials; ++i) set.records.push_back(run_one(l, speckle, fit_opts, i));
  return set;
}

std::vector<double> effective_values(const std::vector<TrialRecord>& records,
                                     const ModelParams& truth, const std::string& name) {
  const Quantity& q = find_quantity(name);
  std::vector<double> values;
  if (!mechanism_present(truth, q.needs)) return values;
  for (const auto& r : records) {
    if (!r.converged || !record_identifiable(r, name)) continue;
    values.push_back(extract(r.params, r.frac_v, r.frac_s, r.frac_d, name));
  }
  return values;
}

std::vector<ParamStats> summarize(const std::vector<TrialRecord>& records,
                                  const ModelParams& truth) {
  const auto converged =
      std::count_if(records.begin(), records.end(), [](const auto& r) { return r.converged; });
  if (converged < 2) {
    throw InsufficientDataError("summarize: fewer than two converged trials");
  }

  std::vector<ParamStats> out;
  for (const auto& q : kQuantities) {
    ParamStats s;
    s.name = q.name;
    s.unit = q.unit;
    s.truth = truth_value(truth, q.name);

    // Offsets from the truth; sorted so the sums do not depend on record order.
    std::vector<double> offsets;
    for (double v : effective_values(records, truth, q.name)) {
      const double d = v - s.truth;
      offsets.push_back(q.unit == StatUnit::Degrees ? wrap_degrees(d) : d);
    }
    std::sort(offsets.begin(), offsets.end());
    s.n_effective = static_cast<int>(offsets.size());
    if (s.n_effective < 2) {
      s.mean = s.bias = s.abs_error = s.rel_error_pct = s.std = kNaN;
      out.push_back(s);
      continue;
    }

    const double n = static_cast<double>(offsets.size());
    const double mean_offset = std::accumulate(offsets.begin(), offsets.end(), 0.0) / n;
    double ss = 0.0;
    for (double d : offsets) ss += (d - mean_offset) * (d - mean_offset);
    const double std = std::sqrt(ss / (n - 1.0));

    s.mean = s.truth + mean_offset;
    const double pct = q.unit == StatUnit::Fraction ? 100.0 : 1.0;
    s.bias = pct * mean_offset;
    s.abs_error = std::abs(s.bias);
    s.std = pct * std;
    if (std::abs(s.truth) > 1e-9) {
      s.rel_error_pct = 100.0 * std::abs(mean_offset) / std::abs(s.truth);
    } else {
      s.rel_error_pct = q.unit == StatUnit::Degrees ? std::abs(mean_offset) : kNaN;
    }
    out.push_back(s);
  }
  return out;
}

Histogram histogram(const std::vector<double>& values, int n_bins,
                    std::optional<std::pair<double, double>> range) {
  if (values.empty()) throw InsufficientDataError("histogram: no values");
  if (n_bins < 1) throw ValidationError("bins: must be at least 1");

  double lo, hi;
  const bool data_range = !range.has_value();
  if (range) {
    std::tie(lo, hi) = *range;
    if (!(hi > lo)) throw ValidationError("histogram: range must be increasing");
  } else {
    const auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    lo = *mn;
    hi = *mx;
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
  }

  Histogram h;
  h.edges.resize(static_cast<std::size_t>(n_bins) + 1);
  const double width = (hi - lo) / n_bins;
  for (int i = 0; i <= n_bins; ++i) h.edges[i] = lo + width * i;
  h.edges.back() = hi;
  h.counts.assign(static_cast<std::size_t>(n_bins), 0);

  for (double v : values) {
    if (v < lo || std::isnan(v)) {
      ++h.underflow;
      continue;
    }
    if (v >= hi) {
      if (data_range && v == hi) {
        ++h.counts.back();
      } else {
        ++h.overflow;
      }
      continue;
    }
    auto bin = static_cast<int>((v - lo) / width);
    bin = std::clamp(bin, 0, n_bins - 1);
    // keep the half-open convention exact at interior edges
    if (v < h.edges[bin]) --bin;
    else if (bin + 1 < n_bins && v >= h.edges[bin + 1]) ++bin;
    ++h.counts[bin];
  }
  return h;
}

Scenario sweep_scenario(const Scenario& base, double f_v) {
  if (base.fractions.surface != 0.0) {
    throw ValidationError("fractions.surface: sweep base scenario must have no surface power");
  }
  const double p_d = base.span * base.fractions.double_bounce;
  if (!(p_d > 0.0)) throw ValidationError("fractions.double: sweep needs double-bounce power");
  if (!(f_v >= 0.0) || !std::isfinite(f_v)) throw ValidationError("fv-grid: values must be >= 0");
  Scenario s = base;
  s.span = p_d + f_v;
  s.fractions = {f_v / s.span, 0.0, p_d / s.span};
  // exact complement so the fraction-sum check never trips on rounding
  s.fractions.double_bounce = 1.0 - s.fractions.volume;
  return s;
}

std::vector<SweepPoint> entropy_sweep(const Scenario& base, const std::vector<double>& fv_grid,
                                      int n_trials, const SpeckleConfig& speckle,
                                      const FitOptions& fit_opts) {
  if (fv_grid.empty()) throw ValidationError("fv-grid: must not be empty");
  for (std::size_t i = 1; i < fv_grid.size(); ++i) {
    if (!(fv_grid[i] > fv_grid[i - 1])) throw ValidationError("fv-grid: must be increasing");
  }
  std::vector<SweepPoint> points;
  points.reserve(fv_grid.size());
  for (double f_v : fv_grid) {
    const TrialSet set = run_trials(sweep_scenario(base, f_v), n_trials, speckle, fit_opts);
    SweepPoint pt;
    pt.f_v = f_v;
    pt.entropy = set.info.entropy;
    pt.n_converged = set.n_converged();
    pt.stats = summarize(set.records, set.info.truth);
    points.push_back(std::move(pt));
  }
  return points;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InsufficientDataError("spearman: need two equal-length samples of size >= 2");
  }
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace polsar
