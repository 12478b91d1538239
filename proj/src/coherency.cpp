#include "polsar/coherency.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace polsar {

cdouble CoherencyMatrix::operator()(int row, int col) const {
  if (row > col) {
    return std::conj((*this)(col, row));
  }
  switch (row * 3 + col) {
    case 0: return t11;
    case 1: return t12;
    case 2: return t13;
    case 4: return t22;
    case 5: return t23;
    case 8: return t33;
    default: throw std::out_of_range("coherency index out of range");
  }
}

Eigen::Matrix3cd CoherencyMatrix::dense() const {
  Eigen::Matrix3cd m;
  m << t11, t12, t13,
       std::conj(t12), t22, t23,
       std::conj(t13), std::conj(t23), t33;
  return m;
}

CoherencyMatrix CoherencyMatrix::from_dense(const Eigen::Matrix3cd& m) {
  return {m(0, 0).real(), m(1, 1).real(), m(2, 2).real(), m(0, 1), m(0, 2), m(1, 2)};
}

std::array<double, kObservables> CoherencyMatrix::components() const {
  return {t11, t22, t33, t12.real(), t12.imag(), t13.real(), t13.imag(), t23.real(), t23.imag()};
}

CoherencyMatrix CoherencyMatrix::from_components(const std::array<double, kObservables>& c) {
  return {c[0], c[1], c[2], {c[3], c[4]}, {c[5], c[6]}, {c[7], c[8]}};
}

std::array<double, 3> CoherencyMatrix::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> solver(dense(), Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev(0), ev(1), ev(2)};
}

double CoherencyMatrix::max_abs_diff(const CoherencyMatrix& other) const {
  const auto a = components();
  const auto b = other.components();
  double worst = 0.0;
  for (int i = 0; i < kObservables; ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]));
  }
  return worst;
}

CoherencyMatrix& CoherencyMatrix::operator+=(const CoherencyMatrix& o) {
  t11 += o.t11;
  t22 += o.t22;
  t33 += o.t33;
  t12 += o.t12;
  t13 += o.t13;
  t23 += o.t23;
  return *this;
}

CoherencyMatrix& CoherencyMatrix::operator-=(const CoherencyMatrix& o) {
  t11 -= o.t11;
  t22 -= o.t22;
  t33 -= o.t33;
  t12 -= o.t12;
  t13 -= o.t13;
  t23 -= o.t23;
  return *this;
}

CoherencyMatrix& CoherencyMatrix::operator*=(double s) {
  t11 *= s;
  t22 *= s;
  t33 *= s;
  t12 *= s;
  t13 *= s;
  t23 *= s;
  return *this;
}

CoherencyMatrix rotate(const CoherencyMatrix& t, double psi) {
  if (!std::isfinite(psi)) {
    throw std::invalid_argument("rotate: non-finite orientation angle");
  }
  const double c = std::cos(2.0 * psi);
  const double s = std::sin(2.0 * psi);
  const double cc = c * c;
  const double ss = s * s;
  const double cs = c * s;
  const double re23 = t.t23.real();

  CoherencyMatrix r;
  r.t11 = t.t11;
  r.t12 = c * t.t12 + s * t.t13;
  r.t13 = -s * t.t12 + c * t.t13;
  r.t22 = cc * t.t22 + 2.0 * cs * re23 + ss * t.t33;
  r.t33 = ss * t.t22 - 2.0 * cs * re23 + cc * t.t33;
  r.t23 = -cs * t.t22 + cc * t.t23 - ss * std::conj(t.t23) + cs * t.t33;
  return r;
}

}  // namespace polsar
