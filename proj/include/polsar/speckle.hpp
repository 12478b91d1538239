#pragma once

#include <cstdint>
#include <vector>

#include "polsar/coherency.hpp"
#include "polsar/rng.hpp"

namespace polsar {

/// Multilook speckle settings. Defaults to a 7x7 boxcar (49 looks).
struct SpeckleConfig {
  int n_looks = 49;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  void validate() const;
};

/// Lower-triangular Cholesky factor L with L L^H = T. Diagonal is real and
/// nonnegative.
struct LowerTriangularFactor {
  double l11 = 0.0;
  double l22 = 0.0;
  double l33 = 0.0;
  cdouble l21{};
  cdouble l31{};
  cdouble l32{};

  [[nodiscard]] Eigen::Matrix3cd dense() const;
  /// L L^H
  [[nodiscard]] CoherencyMatrix product() const;
};

/// Cholesky factorization of a Hermitian PSD matrix. Pivots below
/// 1e-12 SPAN are lifted to 1e-12 SPAN so rank-deficient inputs factor
/// with an element-wise reconstruction error of at most that amount.
/// Throws DomainError when T has an eigenvalue below -1e-9 SPAN.
[[nodiscard]] LowerTriangularFactor cholesky_hermitian(const CoherencyMatrix& t);

/// (1/n) sum_i k_i k_i^H with k_i = L z_i, z_i unit circular complex
/// Gaussian vectors drawn from `rng`. The expected value is L L^H.
[[nodiscard]] CoherencyMatrix multilook_sample(const LowerTriangularFactor& l, int n_looks,
                                               CounterStream& rng);

/// Convenience overload drawing from the stream (cfg.seed, cfg.stream_id).
[[nodiscard]] CoherencyMatrix multilook_sample(const LowerTriangularFactor& l,
                                               const SpeckleConfig& cfg);

/// n_trials independent multilook samples of T; trial i draws from stream
/// (cfg.seed, i). Trials run in parallel under OpenMP; the result does not
/// depend on the thread count.
[[nodiscard]] std::vector<CoherencyMatrix> batch_samples(const CoherencyMatrix& t, int n_trials,
                                                         const SpeckleConfig& cfg);

/// Serial reference for batch_samples built from dense Eigen products
/// (L z, k k^H) instead of the unrolled kernel. Agrees to rounding.
[[nodiscard]] std::vector<CoherencyMatrix> batch_samples_serial(const CoherencyMatrix& t,
                                                                int n_trials,
                                                                const SpeckleConfig& cfg);

}  // namespace polsar
