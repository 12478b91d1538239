#pragma once

#include <numbers>
#include <variant>

#include "polsar/model.hpp"

namespace polsar {

/// Dihedral description of alpha: ground permittivity is the scenario's
/// epsilon_soil, the trunk has its own permittivity, phase is the HH-VV
/// propagation phase difference.
struct DihedralSpec {
  double epsilon_trunk = 0.0;
  double phase_deg = 180.0;
};

using AlphaSpec = std::variant<cdouble, DihedralSpec>;

/// Relative backscattered powers P/SPAN of the three mechanisms.
struct PowerFractions {
  double volume = 0.0;
  double surface = 0.0;
  double double_bounce = 0.0;

  [[nodiscard]] double sum() const { return volume + surface + double_bounce; }
};

/// Physical description of a simulated scene.
struct Scenario {
  double epsilon_soil = 5.0;
  double theta_deg = 45.0;
  double psi_d_deg = 0.0;
  double psi_s_deg = 0.0;
  AlphaSpec alpha = DihedralSpec{5.0, 180.0};
  PowerFractions fractions{};
  double span = 1.0;

  /// Throws ValidationError naming the offending field.
  void validate() const;
};

/// Scenario with the default dihedral alpha (trunk permittivity equal to the
/// soil, phase pi).
[[nodiscard]] Scenario make_scenario(double epsilon_soil, double theta_deg, double psi_d_deg,
                                     double psi_s_deg, PowerFractions fractions,
                                     double span = 1.0);

/// Resolves alpha for a scenario (explicit or via dihedral_alpha).
[[nodiscard]] cdouble resolve_alpha(const Scenario& s);

/// beta from the Bragg model, alpha from the spec, f coefficients from the
/// power fractions; angles converted to radians and canonicalized.
[[nodiscard]] ModelParams scenario_to_params(const Scenario& s);

}  // namespace polsar
