#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "polsar/coherency.hpp"
#include "polsar/model.hpp"

namespace polsar {

struct FitOptions {
  /// Uniform random starts in addition to the deterministic algebraic start.
  int n_random_starts = 8;
  int max_iterations = 200;
  /// Squared-residual threshold in units of SPAN^2. A start reaching it
  /// ends the multi-start search early.
  double cost_tolerance = 1e-12;
  /// Relative step size (on span-normalized variables) that ends a start.
  double step_tolerance = 1e-10;
  std::uint64_t start_seed = 0x5eed5eedULL;
  /// Substream for the random starts; the Monte Carlo driver sets it to the
  /// trial index so trials draw independent starts.
  std::uint64_t start_stream = 0;
  /// Pin Im(alpha) to zero.
  bool fix_imag_alpha = false;

  void validate() const;
};

/// Shape parameters of a mechanism whose fitted power is below 1e-6 SPAN
/// carry no information and are flagged here.
struct Identifiability {
  bool alpha = true;
  bool beta = true;
  bool psi_d = true;
  bool psi_s = true;
};

enum class StopReason { CostTolerance, StepTolerance, Stationary, MaxIterations };

struct FitResult {
  ModelParams params;
  /// Squared norm of `residual(T_obs, params)`.
  double cost = 0.0;
  /// T_obs - assemble(params); Hermitian, possibly indefinite.
  CoherencyMatrix t_residual;
  bool converged = false;
  StopReason stop_reason = StopReason::MaxIterations;
  int n_starts_used = 0;
  int n_iterations = 0;
  int start_index_of_winner = 0;
  Identifiability identifiable;
};

/// Components of T_obs - assemble(params) in observable order
/// (t11, t22, t33, Re/Im t12, Re/Im t13, Re/Im t23).
[[nodiscard]] std::array<double, kObservables> residual(const CoherencyMatrix& t_obs,
                                                        const ModelParams& params);

/// Starting points for the multi-start search. The first is an algebraic
/// split of the deoriented matrix; the remaining n_random_starts are uniform
/// draws from stream (start_seed, start_stream), rescaled to match the trace.
[[nodiscard]] std::vector<ModelParams> initial_guesses(const CoherencyMatrix& t_obs,
                                                       const FitOptions& opts);

/// Bounded Levenberg-Marquardt least squares over all nine observables,
/// from every initial guess; returns the lowest-cost canonicalized result.
/// Non-convergence is reported through the flag, never thrown.
[[nodiscard]] FitResult fit(const CoherencyMatrix& t_obs, const FitOptions& opts = {});

/// Powers below this fraction of SPAN leave their shape parameters unidentifiable.
inline constexpr double kIdentifiablePower = 1e-6;

}  // namespace polsar
