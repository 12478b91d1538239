#pragma once

#include "polsar/coherency.hpp"

namespace polsar {

// Reflection physics for real relative permittivity epsilon > 1 and local
// incidence theta in (0, pi/2), both radians.

/// Fresnel horizontal reflection coefficient (also the Bragg HH coefficient).
[[nodiscard]] double fresnel_h(double epsilon, double theta);
/// Fresnel vertical reflection coefficient.
[[nodiscard]] double fresnel_v(double epsilon, double theta);
/// First-order small-perturbation VV Bragg coefficient.
[[nodiscard]] double bragg_v(double epsilon, double theta);

/// Surface shape parameter beta = (R_H - R_V) / (R_H + R_V) from the
/// small-perturbation Bragg coefficients. Negative for every epsilon > 1.
[[nodiscard]] double bragg_beta(double epsilon, double theta);

/// Permittivity bracket searched by epsilon_from_beta.
inline constexpr double kEpsilonMin = 1.1;
inline constexpr double kEpsilonMax = 80.0;

/// Inverts bragg_beta at fixed incidence by bracketed root finding on
/// [kEpsilonMin, kEpsilonMax]. With `sign_agnostic`, only |beta| is matched
/// (for literature using the opposite sign convention). Throws DomainError
/// when beta is not attainable in the bracket.
[[nodiscard]] double epsilon_from_beta(double beta, double theta, bool sign_agnostic = false);

/// Ground-trunk dihedral shape parameter
///   alpha = (Rgh Rth + e^{j phase} Rgv Rtv) / (Rgh Rth - e^{j phase} Rgv Rtv)
/// with trunk reflections evaluated at pi/2 - theta. If |alpha| > 1 the
/// reciprocal is returned so the mechanism stays t22-dominant.
[[nodiscard]] cdouble dihedral_alpha(double epsilon_ground, double epsilon_trunk, double theta,
                                     double phase);

}  // namespace polsar
