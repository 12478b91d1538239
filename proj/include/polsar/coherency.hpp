#pragma once

#include <array>
#include <complex>

#include <Eigen/Core>

namespace polsar {

using cdouble = std::complex<double>;

/// Number of independent real observables in a 3x3 Hermitian matrix.
inline constexpr int kObservables = 9;

/// 3x3 Hermitian coherency matrix T in the Pauli basis.
///
/// Only the upper triangle is stored, so Hermiticity holds by construction:
/// element (j, i) is the conjugate of element (i, j) for i < j.
struct CoherencyMatrix {
  double t11 = 0.0;
  double t22 = 0.0;
  double t33 = 0.0;
  cdouble t12{};
  cdouble t13{};
  cdouble t23{};

  /// Zero-based element access, lower triangle resolved by conjugation.
  [[nodiscard]] cdouble operator()(int row, int col) const;

  /// SPAN, the total power.
  [[nodiscard]] double trace() const { return t11 + t22 + t33; }

  [[nodiscard]] Eigen::Matrix3cd dense() const;

  /// Builds from the upper triangle of `m`; diagonal imaginary parts and the
  /// strict lower triangle are ignored.
  static CoherencyMatrix from_dense(const Eigen::Matrix3cd& m);

  /// Independent components in observable order:
  /// t11, t22, t33, Re t12, Im t12, Re t13, Im t13, Re t23, Im t23.
  [[nodiscard]] std::array<double, kObservables> components() const;
  static CoherencyMatrix from_components(const std::array<double, kObservables>& c);

  /// Eigenvalues in ascending order.
  [[nodiscard]] std::array<double, 3> eigenvalues() const;

  /// Largest absolute element-wise difference (over the 9 components).
  [[nodiscard]] double max_abs_diff(const CoherencyMatrix& other) const;

  CoherencyMatrix& operator+=(const CoherencyMatrix& o);
  CoherencyMatrix& operator-=(const CoherencyMatrix& o);
  CoherencyMatrix& operator*=(double s);

  friend CoherencyMatrix operator+(CoherencyMatrix a, const CoherencyMatrix& b) { return a += b; }
  friend CoherencyMatrix operator-(CoherencyMatrix a, const CoherencyMatrix& b) { return a -= b; }
  friend CoherencyMatrix operator*(CoherencyMatrix a, double s) { return a *= s; }
  friend CoherencyMatrix operator*(double s, CoherencyMatrix a) { return a *= s; }
  friend bool operator==(const CoherencyMatrix&, const CoherencyMatrix&) = default;
};

inline CoherencyMatrix identity_coherency() { return {1.0, 1.0, 1.0, {}, {}, {}}; }

inline CoherencyMatrix diagonal_coherency(double a, double b, double c) {
  return {a, b, c, {}, {}, {}};
}

/// Orientation rotation R(psi) T R(psi)^H about the radar line of sight with
/// R = [[1,0,0],[0,cos2psi,sin2psi],[0,-sin2psi,cos2psi]].
/// Preserves t11, the trace and the eigenvalues.
[[nodiscard]] CoherencyMatrix rotate(const CoherencyMatrix& t, double psi);

}  // namespace polsar
