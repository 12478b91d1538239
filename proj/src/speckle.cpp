#include "polsar/speckle.hpp"

#include <algorithm>
#include <cmath>

#include "polsar/error.hpp"

namespace polsar {

void SpeckleConfig::validate() const {
  if (n_looks < 1) throw ValidationError("looks: must be at least 1");
}

Eigen::Matrix3cd LowerTriangularFactor::dense() const {
  Eigen::Matrix3cd m = Eigen::Matrix3cd::Zero();
  m(0, 0) = l11;
  m(1, 0) = l21;
  m(1, 1) = l22;
  m(2, 0) = l31;
  m(2, 1) = l32;
  m(2, 2) = l33;
  return m;
}

CoherencyMatrix LowerTriangularFactor::product() const {
  CoherencyMatrix t;
  t.t11 = l11 * l11;
  t.t22 = std::norm(l21) + l22 * l22;
  t.t33 = std::norm(l31) + std::norm(l32) + l33 * l33;
  t.t12 = l11 * std::conj(l21);
  t.t13 = l11 * std::conj(l31);
  t.t23 = l21 * std::conj(l31) + l22 * std::conj(l32);
  return t;
}

LowerTriangularFactor cholesky_hermitian(const CoherencyMatrix& t) {
  const double span = t.trace();
  const auto ev = t.eigenvalues();
  if (ev[0] < -1e-9 * std::max(span, 0.0) || !(span >= 0.0)) {
    throw DomainError("cholesky_hermitian: matrix is not positive semidefinite");
  }
  const double floor = 1e-12 * span;
  auto pivot = [floor](double d) { return std::sqrt(std::max(d, floor)); };
  auto divide = [](cdouble x, double d) { return d > 0.0 ? x / d : cdouble{}; };

  LowerTriangularFactor l;
  l.l11 = pivot(t.t11);
  l.l21 = divide(std::conj(t.t12), l.l11);
  l.l31 = divide(std::conj(t.t13), l.l11);
  l.l22 = pivot(t.t22 - std::norm(l.l21));
  l.l32 = divide(std::conj(t.t23) - l.l31 * std::conj(l.l21), l.l22);
  l.l33 = pivot(t.t33 - std::norm(l.l31) - std::norm(l.l32));
  return l;
}

CoherencyMatrix multilook_sample(const LowerTriangularFactor& l, int n_looks, CounterStream& rng) {
  if (n_looks < 1) throw ValidationError("looks: must be at least 1");
  double a11 = 0.0, a22 = 0.0, a33 = 0.0;
  cdouble a12{}, a13{}, a23{};
  for (int look = 0; look < n_looks; ++look) {
    const cdouble z1 = rng.complex_normal();
    const cdouble z2 = rng.complex_normal();
    const cdouble z3 = rng.complex_normal();
    const cdouble k1 = l.l11 * z1;
    const cdouble k2 = l.l21 * z1 + l.l22 * z2;
    const cdouble k3 = l.l31 * z1 + l.l32 * z2 + l.l33 * z3;
    a11 += std::norm(k1);
    a22 += std::norm(k2);
    a33 += std::norm(k3);
    a12 += k1 * std::conj(k2);
    a13 += k1 * std::conj(k3);
    a23 += k2 * std::conj(k3);
  }
  CoherencyMatrix t{a11, a22, a33, a12, a13, a23};
  t *= 1.0 / n_looks;
  return t;
}

CoherencyMatrix multilook_sample(const LowerTriangularFactor& l, const SpeckleConfig& cfg) {
  cfg.validate();
  CounterStream rng(cfg.seed, cfg.stream_id);
  return multilook_sample(l, cfg.n_looks, rng);
}

std::vector<CoherencyMatrix> batch_samples(const CoherencyMatrix& t, int n_trials,
                                           const SpeckleConfig& cfg) {
  cfg.validate();
  if (n_trials < 1) throw ValidationError("trials: must be at least 1");
  const auto l = cholesky_hermitian(t);
  std::vector<CoherencyMatrix> out(static_cast<std::size_t>(n_trials));
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_trials; ++i) {
    CounterStream rng(cfg.seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = multilook_sample(l, cfg.n_looks, rng);
  }
  return out;
}

std::vector<CoherencyMatrix> batch_samples_serial(const CoherencyMatrix& t, int n_trials,
                                                  const SpeckleConfig& cfg) {
  cfg.validate();
  if (n_trials < 1) throw ValidationError("trials: must be at least 1");
  const Eigen::Matrix3cd l = cholesky_hermitian(t).dense();
  std::vector<CoherencyMatrix> out;
  out.reserve(static_cast<std::size_t>(n_trials));
  for (int i = 0; i < n_trials; ++i) {
    CounterStream rng(cfg.seed, static_cast<std::uint64_t>(i));
    Eigen::Matrix3cd acc = Eigen::Matrix3cd::Zero();
    for (int look = 0; look < cfg.n_looks; ++look) {
      Eigen::Vector3cd z;
      for (int j = 0; j < 3; ++j) z(j) = rng.complex_normal();
      const Eigen::Vector3cd k = l * z;
      acc += k * k.adjoint();
    }
    acc /= static_cast<double>(cfg.n_looks);
    out.push_back(CoherencyMatrix::from_dense(acc));
  }
  return out;
}

}  // namespace polsar
