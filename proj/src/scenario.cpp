#include "polsar/scenario.hpp"

#include <cmath>
#include <string>

#include "polsar/error.hpp"
#include "polsar/physics.hpp"

namespace polsar {
namespace {

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ValidationError(field + ": " + what);
}

}  // namespace

void Scenario::validate() const {
  require(std::isfinite(epsilon_soil) && epsilon_soil > 1.0, "epsilon_soil", "must exceed 1");
  require(theta_deg > 0.0 && theta_deg < 90.0, "theta_deg", "must lie in (0, 90)");
  require(std::isfinite(psi_d_deg), "psi_d_deg", "must be finite");
  require(std::isfinite(psi_s_deg), "psi_s_deg", "must be finite");
  require(std::isfinite(span) && span > 0.0, "span", "must be positive");
  for (double f : {fractions.volume, fractions.surface, fractions.double_bounce}) {
    require(f >= 0.0 && f <= 1.0, "fractions", "each fraction must lie in [0, 1]");
  }
  require(std::abs(fractions.sum() - 1.0) <= 1e-9, "fractions",
          "must sum to 1 (got " + std::to_string(fractions.sum()) + ")");
  if (const auto* a = std::get_if<cdouble>(&alpha)) {
    require(std::abs(*a) <= 1.0, "alpha", "|alpha| must not exceed 1");
  } else {
    const auto& d = std::get<DihedralSpec>(alpha);
    require(std::isfinite(d.epsilon_trunk) && d.epsilon_trunk > 1.0, "alpha.epsilon_trunk",
            "must exceed 1");
    require(std::isfinite(d.phase_deg), "alpha.phase_deg", "must be finite");
  }
}

Scenario make_scenario(double epsilon_soil, double theta_deg, double psi_d_deg, double psi_s_deg,
                       PowerFractions fractions, double span) {
  Scenario s;
  s.epsilon_soil = epsilon_soil;
  s.theta_deg = theta_deg;
  s.psi_d_deg = psi_d_deg;
  s.psi_s_deg = psi_s_deg;
  s.alpha = DihedralSpec{epsilon_soil, 180.0};
  s.fractions = fractions;
  s.span = span;
  return s;
}

cdouble resolve_alpha(const Scenario& s) {
  if (const auto* a = std::get_if<cdouble>(&s.alpha)) return *a;
  const auto& d = std::get<DihedralSpec>(s.alpha);
  return dihedral_alpha(s.epsilon_soil, d.epsilon_trunk, deg_to_rad(s.theta_deg),
                        deg_to_rad(d.phase_deg));
}

ModelParams scenario_to_params(const Scenario& s) {
  s.validate();
  const double theta = deg_to_rad(s.theta_deg);
  ModelParams p;
  p.beta = bragg_beta(s.epsilon_soil, theta);
  p.alpha = resolve_alpha(s);
  p.f_v = s.span * s.fractions.volume;
  p.f_s = s.span * s.fractions.surface / (1.0 + p.beta * p.beta);
  p.f_d = s.span * s.fractions.double_bounce / (1.0 + std::norm(p.alpha));
  p.psi_d = deg_to_rad(s.psi_d_deg);
  p.psi_s = deg_to_rad(s.psi_s_deg);
  return canonicalize(p);
}

}  // namespace polsar
