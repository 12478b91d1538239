#include "polsar/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "polsar/error.hpp"

namespace polsar {
namespace {

constexpr double kShapeSlack = 1e-9;
constexpr double kAngleSlack = 1e-12;

void require_power(double f, const char* name) {
  if (!(f >= 0.0) || !std::isfinite(f)) {
    throw DomainError(std::string(name) + " must be a finite nonnegative power");
  }
}

}  // namespace

void ModelParams::validate() const {
  require_power(f_v, "f_v");
  require_power(f_d, "f_d");
  require_power(f_s, "f_s");
  if (!(std::abs(alpha) <= 1.0)) throw DomainError("|alpha| must not exceed 1");
  if (!(std::abs(beta) <= 1.0)) throw DomainError("|beta| must not exceed 1");
  for (double psi : {psi_d, psi_s}) {
    if (!(psi > -kQuarterPi - kAngleSlack && psi <= kQuarterPi + kAngleSlack)) {
      throw DomainError("orientation angle outside (-pi/4, pi/4]");
    }
  }
}

CoherencyMatrix surface_coherency(double f_s, double beta) {
  require_power(f_s, "f_s");
  if (!(std::abs(beta) <= 1.0)) throw DomainError("surface_coherency: |beta| > 1");
  return {f_s, f_s * beta * beta, 0.0, f_s * beta, {}, {}};
}

CoherencyMatrix double_bounce_coherency(double f_d, cdouble alpha) {
  require_power(f_d, "f_d");
  if (!(std::abs(alpha) <= 1.0)) throw DomainError("double_bounce_coherency: |alpha| > 1");
  return {f_d * std::norm(alpha), f_d, 0.0, f_d * alpha, {}, {}};
}

CoherencyMatrix volume_coherency(double f_v) {
  require_power(f_v, "f_v");
  return diagonal_coherency(0.5 * f_v, 0.25 * f_v, 0.25 * f_v);
}

CoherencyMatrix assemble_unchecked(const ModelParams& p) {
  // Rotated scattering vectors:
  //   double bounce  sqrt(f_d) (alpha, cos2psi_d, -sin2psi_d)
  //   surface        sqrt(f_s) (1, beta cos2psi_s, -beta sin2psi_s)
  const double cd = std::cos(2.0 * p.psi_d);
  const double sd = std::sin(2.0 * p.psi_d);
  const double cs = std::cos(2.0 * p.psi_s);
  const double ss = std::sin(2.0 * p.psi_s);
  const double b = p.beta;
  const double bb = b * b;
  const double fd = p.f_d;
  const double fs = p.f_s;
  const double fv4 = 0.25 * p.f_v;

  CoherencyMatrix t;
  t.t11 = 2.0 * fv4 + fd * std::norm(p.alpha) + fs;
  t.t22 = fv4 + fd * cd * cd + fs * bb * cs * cs;
  t.t33 = fv4 + fd * sd * sd + fs * bb * ss * ss;
  t.t12 = fd * cd * p.alpha + fs * b * cs;
  t.t13 = -fd * sd * p.alpha - fs * b * ss;
  t.t23 = -fd * cd * sd - fs * bb * cs * ss;
  return t;
}

CoherencyMatrix assemble(const ModelParams& p) {
  p.validate();
  return assemble_unchecked(p);
}

MechanismPowers mechanism_powers(const ModelParams& p) {
  MechanismPowers m;
  m.p_v = p.f_v;
  m.p_s = p.f_s * (1.0 + p.beta * p.beta);
  m.p_d = p.f_d * (1.0 + std::norm(p.alpha));
  m.span = m.p_v + m.p_s + m.p_d;
  return m;
}

double entropy(const CoherencyMatrix& t) {
  const double span = t.trace();
  if (!(span > 0.0)) throw DomainError("entropy: trace must be positive");
  const auto ev = t.eigenvalues();
  if (ev[0] < -1e-9 * span) throw DomainError("entropy: matrix is not positive semidefinite");

  std::array<double, 3> lambda{};
  double total = 0.0;
  for (int i = 0; i < 3; ++i) {
    lambda[i] = std::max(ev[i], 0.0);
    total += lambda[i];
  }
  double h = 0.0;
  for (double l : lambda) {
    const double p = l / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::clamp(h / std::log(3.0), 0.0, 1.0);
}

ReducedAngle reduce_orientation(double psi) {
  auto turns = static_cast<long long>(std::ceil((psi - kQuarterPi) / kHalfPi));
  double reduced = psi - static_cast<double>(turns) * kHalfPi;
  // rounding at the cell edges
  if (reduced <= -kQuarterPi) {
    reduced += kHalfPi;
    --turns;
  } else if (reduced > kQuarterPi) {
    reduced -= kHalfPi;
    ++turns;
  }
  return {reduced, turns % 2 != 0};
}

ModelParams canonicalize(const ModelParams& raw) {
  ModelParams p = raw;
  const double scale = std::abs(p.f_v) + std::abs(p.f_d) + std::abs(p.f_s);
  for (double* f : {&p.f_v, &p.f_d, &p.f_s}) {
    if (!std::isfinite(*f)) throw DomainError("canonicalize: non-finite power");
    if (*f < 0.0) {
      if (*f < -1e-12 * std::max(scale, 1e-300)) {
        throw DomainError("canonicalize: negative power");
      }
      *f = 0.0;
    }
  }

  const double mag_alpha = std::abs(p.alpha);
  if (!std::isfinite(mag_alpha) || mag_alpha > 1.0 + kShapeSlack) {
    throw DomainError("canonicalize: |alpha| exceeds 1");
  }
  if (mag_alpha > 1.0) p.alpha /= mag_alpha;

  if (!std::isfinite(p.beta) || std::abs(p.beta) > 1.0 + kShapeSlack) {
    throw DomainError("canonicalize: |beta| exceeds 1");
  }
  p.beta = std::clamp(p.beta, -1.0, 1.0);

  if (!std::isfinite(p.psi_d) || !std::isfinite(p.psi_s)) {
    throw DomainError("canonicalize: non-finite orientation angle");
  }
  const auto rd = reduce_orientation(p.psi_d);
  p.psi_d = rd.angle;
  if (rd.flip) p.alpha = -p.alpha;
  const auto rs = reduce_orientation(p.psi_s);
  p.psi_s = rs.angle;
  if (rs.flip) p.beta = -p.beta;
  return p;
}

}  // namespace polsar
