#include "polsar/inversion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "polsar/error.hpp"
#include "polsar/rng.hpp"

namespace polsar {
namespace {

// Optimizer state: span-normalized powers, shape parameters, angles.
constexpr int kParams = 8;
enum Index { kFv, kFd, kFs, kAlphaRe, kAlphaIm, kBeta, kPsiD, kPsiS };

using Vec8 = Eigen::Matrix<double, kParams, 1>;
using Vec9 = Eigen::Matrix<double, kObservables, 1>;
using Jac = Eigen::Matrix<double, kObservables, kParams>;
using Mat8 = Eigen::Matrix<double, kParams, kParams>;

constexpr double kPowerUpper = 2.0;
constexpr double kZeroCost = 1e-28;
constexpr double kDiffStep = 1e-6;
constexpr double kSeedPower = 0.02;
// A start is stationary once the cost drops by less than this relative
// amount over kStallWindow iterations.
constexpr double kStallReduction = 1e-9;
constexpr int kStallWindow = 20;

Vec8 to_vector(const ModelParams& p, double span) {
  Vec8 x;
  x << p.f_v / span, p.f_d / span, p.f_s / span, p.alpha.real(), p.alpha.imag(), p.beta, p.psi_d,
      p.psi_s;
  return x;
}

ModelParams from_vector(const Vec8& x, double span) {
  ModelParams p;
  p.f_v = x[kFv] * span;
  p.f_d = x[kFd] * span;
  p.f_s = x[kFs] * span;
  p.alpha = {x[kAlphaRe], x[kAlphaIm]};
  p.beta = x[kBeta];
  p.psi_d = x[kPsiD];
  p.psi_s = x[kPsiS];
  return p;
}

/// Model components minus observation, all in span units.
Vec9 model_minus_obs(const Vec8& x, const Vec9& obs) {
  const auto t = assemble_unchecked(from_vector(x, 1.0)).components();
  Vec9 r;
  for (int i = 0; i < kObservables; ++i) r[i] = t[i] - obs[i];
  return r;
}

void project(Vec8& x, bool fix_imag_alpha) {
  for (int i : {kFv, kFd, kFs}) x[i] = std::clamp(x[i], 0.0, kPowerUpper);
  if (fix_imag_alpha) x[kAlphaIm] = 0.0;
  const double mag = std::hypot(x[kAlphaRe], x[kAlphaIm]);
  if (mag > 1.0) {
    x[kAlphaRe] /= mag;
    x[kAlphaIm] /= mag;
  }
  x[kBeta] = std::clamp(x[kBeta], -1.0, 1.0);
}

Jac jacobian(const Vec8& x, const Vec9& obs) {
  Jac j;
  for (int k = 0; k < kParams; ++k) {
    const double h = kDiffStep * std::max(1.0, std::abs(x[k]));
    Vec8 xp = x;
    Vec8 xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (model_minus_obs(xp, obs) - model_minus_obs(xm, obs)) / (2.0 * h);
  }
  return j;
}

struct LocalResult {
  Vec8 x;
  double cost;
  int iterations;
  StopReason reason;
};

// Projected Levenberg-Marquardt with More scaling. Box-bounded variables
// sitting on a bound with the gradient pointing outward are frozen for the
// iteration; alpha on the unit circle moves along its tangent.
LocalResult levenberg_marquardt(Vec8 x, const Vec9& obs, const FitOptions& opts) {
  project(x, opts.fix_imag_alpha);
  Vec9 r = model_minus_obs(x, obs);
  double cost = r.squaredNorm();
  double lambda = 1e-3;
  Vec8 scale = Vec8::Zero();
  std::array<double, kStallWindow> history{};

  for (int it = 0; it < opts.max_iterations; ++it) {
    if (cost <= kZeroCost) return {x, cost, it, StopReason::CostTolerance};
    double& past = history[static_cast<std::size_t>(it % kStallWindow)];
    if (it >= kStallWindow && past - cost <= kStallReduction * past) {
      return {x, cost, it, StopReason::Stationary};
    }
    past = cost;

    const Jac j = jacobian(x, obs);
    const Mat8 a = j.transpose() * j;
    const Vec8 g = j.transpose() * r;

    // Search subspace: free coordinates, plus the tangent of the unit circle
    // when alpha sits on it and the descent direction points outward.
    Eigen::Matrix<double, kParams, kParams> basis = Eigen::Matrix<double, kParams, kParams>::Zero();
    int n_free = 0;
    for (int k = 0; k < kParams; ++k) scale[k] = std::max(scale[k], a(k, k));
    for (int k : {kFv, kFd, kFs, kBeta}) {
      const double lo = k == kBeta ? -1.0 : 0.0;
      const double hi = k == kBeta ? 1.0 : kPowerUpper;
      const bool active = (x[k] <= lo && g[k] > 0.0) || (x[k] >= hi && g[k] < 0.0);
      if (!active) basis(k, n_free++) = 1.0;
    }
    basis(kPsiD, n_free++) = 1.0;
    basis(kPsiS, n_free++) = 1.0;
    const double ar = x[kAlphaRe];
    const double ai = x[kAlphaIm];
    const double mag = std::hypot(ar, ai);
    const bool on_circle =
        mag >= 1.0 - 1e-12 && -(g[kAlphaRe] * ar + g[kAlphaIm] * ai) > 0.0;
    if (opts.fix_imag_alpha) {
      if (!on_circle) basis(kAlphaRe, n_free++) = 1.0;
    } else if (on_circle) {
      basis(kAlphaRe, n_free) = -ai / mag;
      basis(kAlphaIm, n_free) = ar / mag;
      ++n_free;
    } else {
      basis(kAlphaRe, n_free++) = 1.0;
      basis(kAlphaIm, n_free++) = 1.0;
    }

    const Eigen::MatrixXd b = basis.leftCols(n_free);
    const Eigen::MatrixXd a_sub = b.transpose() * a * b;
    const Eigen::VectorXd g_sub = b.transpose() * g;
    Eigen::VectorXd d_sub(n_free);
    for (int p = 0; p < n_free; ++p) {
      d_sub[p] = std::max((b.col(p).array().square() * scale.array()).sum(), 1e-12);
    }
    if (g_sub.cwiseAbs().maxCoeff() <= 1e-16) return {x, cost, it, StopReason::Stationary};

    bool accepted = false;
    while (!accepted) {
      Eigen::MatrixXd lhs = a_sub;
      lhs.diagonal() += lambda * d_sub;
      const Eigen::VectorXd step = lhs.ldlt().solve(-g_sub);

      Vec8 trial = x + b * step;
      project(trial, opts.fix_imag_alpha);
      const Vec9 r_trial = model_minus_obs(trial, obs);
      const double cost_trial = r_trial.squaredNorm();

      if (std::isfinite(cost_trial) && cost_trial < cost) {
        const double dx = (trial - x).norm();
        x = trial;
        r = r_trial;
        cost = cost_trial;
        lambda = std::max(lambda / 3.0, 1e-15);
        accepted = true;
        if (cost <= kZeroCost) return {x, cost, it + 1, StopReason::CostTolerance};
        if (dx <= opts.step_tolerance * (x.norm() + opts.step_tolerance)) {
          return {x, cost, it + 1, StopReason::StepTolerance};
        }
      } else {
        lambda *= 4.0;
        if (lambda > 1e16) return {x, cost, it + 1, StopReason::Stationary};
      }
    }
  }
  return {x, cost, opts.max_iterations, StopReason::MaxIterations};
}

ModelParams algebraic_guess(const CoherencyMatrix& t_obs) {
  const double span = t_obs.trace();
  const CoherencyMatrix t = t_obs * (1.0 / span);

  // Orientation of the dominant rank-one part under `rotate`'s convention.
  const double psi = -0.25 * std::atan2(2.0 * t.t23.real(), t.t22 - t.t33);
  const CoherencyMatrix d = rotate(t, -psi);

  ModelParams g;
  g.f_v = std::clamp(4.0 * d.t33, 0.0, 1.0);
  const double a = d.t11 - 0.5 * g.f_v;
  const double b = d.t22 - 0.25 * g.f_v;
  const cdouble c = d.t12;
  if (a >= b) {
    g.f_s = std::max(a, 0.0);
    g.beta = g.f_s > 0.0 ? std::clamp(c.real() / g.f_s, -1.0, 1.0) : 0.0;
    g.f_d = std::max(b - g.f_s * g.beta * g.beta, 0.0);
  } else {
    g.f_d = std::max(b, 0.0);
    g.alpha = g.f_d > 0.0 ? c / g.f_d : cdouble{};
    if (std::abs(g.alpha) > 1.0) g.alpha /= std::abs(g.alpha);
    g.f_s = std::max(a - g.f_d * std::norm(g.alpha), 0.0);
  }
  // Keep both mechanisms alive so their shape gradients are nonzero.
  g.f_d = std::max(g.f_d, kSeedPower);
  g.f_s = std::max(g.f_s, kSeedPower);
  g.psi_d = psi;
  g.psi_s = psi;
  // Only the double bounce contributes imaginary parts:
  //   Im t12 = f_d Im(alpha) cos2psi_d,  Im t13 = -f_d Im(alpha) sin2psi_d.
  const double im12 = t.t12.imag();
  const double im13 = t.t13.imag();
  if (std::hypot(im12, im13) > 1e-3) {
    g.psi_d = 0.5 * std::atan2(-im13, im12);
  }

  g = canonicalize(g);
  g.f_v *= span;
  g.f_d *= span;
  g.f_s *= span;
  return g;
}

}  // namespace

void FitOptions::validate() const {
  if (n_random_starts < 0) throw ValidationError("fit.n_random_starts: must be >= 0");
  if (max_iterations < 1) throw ValidationError("fit.max_iterations: must be >= 1");
  if (!(cost_tolerance > 0.0)) throw ValidationError("fit.cost_tolerance: must be positive");
  if (!(step_tolerance > 0.0)) throw ValidationError("fit.step_tolerance: must be positive");
}

std::array<double, kObservables> residual(const CoherencyMatrix& t_obs, const ModelParams& params) {
  return (t_obs - assemble_unchecked(params)).components();
}

std::vector<ModelParams> initial_guesses(const CoherencyMatrix& t_obs, const FitOptions& opts) {
  opts.validate();
  const double span = t_obs.trace();
  if (!(span > 0.0)) throw DomainError("initial_guesses: trace must be positive");

  std::vector<ModelParams> guesses;
  guesses.reserve(static_cast<std::size_t>(opts.n_random_starts) + 1);
  ModelParams first = algebraic_guess(t_obs);
  if (opts.fix_imag_alpha) first.alpha = first.alpha.real();
  guesses.push_back(first);

  CounterStream rng(opts.start_seed, opts.start_stream);
  for (int i = 0; i < opts.n_random_starts; ++i) {
    ModelParams g;
    const double wv = rng.uniform();
    const double wd = rng.uniform();
    const double ws = rng.uniform();
    double ar, ai;
    do {
      ar = rng.uniform(-1.0, 1.0);
      ai = rng.uniform(-1.0, 1.0);
    } while (ar * ar + ai * ai > 1.0);
    g.alpha = {ar, opts.fix_imag_alpha ? 0.0 : ai};
    g.beta = rng.uniform(-1.0, 1.0);
    g.psi_d = reduce_orientation(rng.uniform(-kQuarterPi, kQuarterPi)).angle;
    g.psi_s = reduce_orientation(rng.uniform(-kQuarterPi, kQuarterPi)).angle;
    const double power = wv + wd * (1.0 + std::norm(g.alpha)) + ws * (1.0 + g.beta * g.beta);
    g.f_v = span * wv / power;
    g.f_d = span * wd / power;
    g.f_s = span * ws / power;
    guesses.push_back(g);
  }
  return guesses;
}

FitResult fit(const CoherencyMatrix& t_obs, const FitOptions& opts) {
  opts.validate();
  const double span = t_obs.trace();
  if (!(span > 0.0) || !std::isfinite(span)) {
    throw DomainError("fit: observed matrix must have positive finite trace");
  }
  Vec9 obs;
  {
    const auto c = t_obs.components();
    for (int i = 0; i < kObservables; ++i) obs[i] = c[i] / span;
  }

  const auto guesses = initial_guesses(t_obs, opts);
  LocalResult best{Vec8::Zero(), std::numeric_limits<double>::infinity(), 0,
                   StopReason::MaxIterations};
  FitResult out;
  int total_iterations = 0;
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    const LocalResult local = levenberg_marquardt(to_vector(guesses[i], span), obs, opts);
    total_iterations += local.iterations;
    out.n_starts_used = static_cast<int>(i) + 1;
    if (local.cost < best.cost) {
      best = local;
      out.start_index_of_winner = static_cast<int>(i);
    }
    if (best.cost <= opts.cost_tolerance) break;
  }

  out.params = canonicalize(from_vector(best.x, span));
  const auto res = residual(t_obs, out.params);
  out.cost = 0.0;
  for (double v : res) out.cost += v * v;
  out.t_residual = CoherencyMatrix::from_components(res);
  out.stop_reason = best.reason;
  out.converged = best.reason != StopReason::MaxIterations || best.cost <= opts.cost_tolerance;
  out.n_iterations = total_iterations;
  out.identifiable.alpha = out.identifiable.psi_d = out.params.f_d >= kIdentifiablePower * span;
  out.identifiable.beta = out.identifiable.psi_s = out.params.f_s >= kIdentifiablePower * span;
  return out;
}

}  // namespace polsar
