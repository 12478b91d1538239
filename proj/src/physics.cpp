#include "polsar/physics.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include <boost/math/tools/roots.hpp>

#include "polsar/error.hpp"

namespace polsar {
namespace {

void check_domain(double epsilon, double theta, const char* who) {
  if (!(epsilon > 1.0) || !std::isfinite(epsilon)) {
    throw DomainError(std::string(who) + ": permittivity must exceed 1");
  }
  if (!(theta > 0.0 && theta < std::numbers::pi / 2.0)) {
    throw DomainError(std::string(who) + ": incidence angle must lie in (0, pi/2)");
  }
}

double root_term(double epsilon, double theta) {
  const double s = std::sin(theta);
  return std::sqrt(epsilon - s * s);
}

}  // namespace

double fresnel_h(double epsilon, double theta) {
  check_domain(epsilon, theta, "fresnel_h");
  const double c = std::cos(theta);
  const double q = root_term(epsilon, theta);
  return (c - q) / (c + q);
}

double fresnel_v(double epsilon, double theta) {
  check_domain(epsilon, theta, "fresnel_v");
  const double c = std::cos(theta);
  const double q = root_term(epsilon, theta);
  return (epsilon * c - q) / (epsilon * c + q);
}

double bragg_v(double epsilon, double theta) {
  check_domain(epsilon, theta, "bragg_v");
  const double s2 = std::sin(theta) * std::sin(theta);
  const double den = epsilon * std::cos(theta) + root_term(epsilon, theta);
  return (epsilon - 1.0) * (s2 - epsilon * (1.0 + s2)) / (den * den);
}

double bragg_beta(double epsilon, double theta) {
  check_domain(epsilon, theta, "bragg_beta");
  const double rh = fresnel_h(epsilon, theta);
  const double rv = bragg_v(epsilon, theta);
  return (rh - rv) / (rh + rv);
}

double epsilon_from_beta(double beta, double theta, bool sign_agnostic) {
  if (!std::isfinite(beta)) throw DomainError("epsilon_from_beta: non-finite beta");
  const double lo_beta = bragg_beta(kEpsilonMin, theta);
  const double hi_beta = bragg_beta(kEpsilonMax, theta);
  double target = beta;
  if (sign_agnostic) {
    target = std::copysign(std::abs(beta), lo_beta);
  }
  const double f_lo = lo_beta - target;
  const double f_hi = hi_beta - target;
  if (f_lo == 0.0) return kEpsilonMin;
  if (f_hi == 0.0) return kEpsilonMax;
  if ((f_lo > 0.0) == (f_hi > 0.0)) {
    throw DomainError("epsilon_from_beta: beta not attainable for permittivity in [" +
                      std::to_string(kEpsilonMin) + ", " + std::to_string(kEpsilonMax) + "]");
  }

  auto g = [&](double eps) { return bragg_beta(eps, theta) - target; };
  boost::math::tools::eps_tolerance<double> tol(50);
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(g, kEpsilonMin, kEpsilonMax, f_lo, f_hi,
                                                       tol, max_iter);
  return 0.5 * (a + b);
}

cdouble dihedral_alpha(double epsilon_ground, double epsilon_trunk, double theta, double phase) {
  check_domain(epsilon_ground, theta, "dihedral_alpha");
  check_domain(epsilon_trunk, theta, "dihedral_alpha");
  const double trunk_incidence = std::numbers::pi / 2.0 - theta;
  const double hh = fresnel_h(epsilon_ground, theta) * fresnel_h(epsilon_trunk, trunk_incidence);
  const cdouble vv = std::polar(1.0, phase) * fresnel_v(epsilon_ground, theta) *
                     fresnel_v(epsilon_trunk, trunk_incidence);
  const cdouble num = hh + vv;
  const cdouble den = hh - vv;
  if (std::abs(den) < 1e-12) throw DomainError("dihedral_alpha: degenerate denominator");
  cdouble alpha = num / den;
  if (std::abs(alpha) > 1.0) {
    if (std::abs(num) < 1e-12) throw DomainError("dihedral_alpha: degenerate numerator");
    alpha = den / num;
  }
  return alpha;
}

}  // namespace polsar
