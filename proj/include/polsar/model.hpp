#pragma once

#include <numbers>

#include "polsar/coherency.hpp"

namespace polsar {

/// The eight real degrees of freedom of the three-mechanism model
///   T = f_v T_vol + T_dbl(f_d, alpha; psi_d) + T_surf(f_s, beta; psi_s).
/// Powers are linear, angles in radians.
struct ModelParams {
  double f_v = 0.0;
  double f_d = 0.0;
  double f_s = 0.0;
  cdouble alpha{};
  double beta = 0.0;
  double psi_d = 0.0;
  double psi_s = 0.0;

  /// Throws DomainError unless f >= 0, |alpha| <= 1, |beta| <= 1 and both
  /// angles lie in (-pi/4, pi/4].
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct MechanismPowers {
  double p_v = 0.0;
  double p_s = 0.0;
  double p_d = 0.0;
  double span = 0.0;

  [[nodiscard]] double volume_fraction() const { return p_v / span; }
  [[nodiscard]] double surface_fraction() const { return p_s / span; }
  [[nodiscard]] double double_fraction() const { return p_d / span; }
};

inline constexpr double kQuarterPi = std::numbers::pi / 4.0;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

/// f_s [[1, b, 0], [b, b^2, 0], [0, 0, 0]]
[[nodiscard]] CoherencyMatrix surface_coherency(double f_s, double beta);
/// f_d [[|a|^2, a, 0], [a*, 1, 0], [0, 0, 0]]
[[nodiscard]] CoherencyMatrix double_bounce_coherency(double f_d, cdouble alpha);
/// Uniformly oriented thin dipoles: (f_v / 4) diag(2, 1, 1).
[[nodiscard]] CoherencyMatrix volume_coherency(double f_v);

/// Forward model with zero residual. Evaluated in closed form from the two
/// rank-one scattering vectors; equal to
/// volume + rotate(double_bounce, psi_d) + rotate(surface, psi_s).
[[nodiscard]] CoherencyMatrix assemble(const ModelParams& p);

/// Same as `assemble` but without validating the parameters, for optimizer
/// iterates that may sit marginally outside the feasible set.
[[nodiscard]] CoherencyMatrix assemble_unchecked(const ModelParams& p);

[[nodiscard]] MechanismPowers mechanism_powers(const ModelParams& p);

/// Cloude-Pottier entropy with base-3 logarithm, in [0, 1].
[[nodiscard]] double entropy(const CoherencyMatrix& t);

/// Maps an angle into the canonical cell (-pi/4, pi/4] by multiples of
/// pi/2. Returns the reduced angle and whether an odd number of quarter
/// turns was removed (which flips the sign of the matching shape parameter).
struct ReducedAngle {
  double angle;
  bool flip;
};
[[nodiscard]] ReducedAngle reduce_orientation(double psi);

/// Resolves the (shape, psi) ~ (-shape, psi +- pi/2) symmetry so both angles
/// land in (-pi/4, pi/4]. Magnitudes of alpha or beta exceeding 1 by less
/// than 1e-9 are clamped, as are powers in [-1e-12, 0). Anything further out
/// raises DomainError. The result assembles to the same matrix.
[[nodiscard]] ModelParams canonicalize(const ModelParams& raw);

[[nodiscard]] inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
[[nodiscard]] inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace polsar
