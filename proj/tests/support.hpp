// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>

#include "layerflow/field.hpp"
#include "layerflow/lagrangian.hpp"

namespace testsupport {

inline double max_abs_diff(const layerflow::SpectralField& a, const layerflow::SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double rel_diff(const layerflow::SpectralField& a, const layerflow::SpectralField& b) {
  const double s = std::max(a.max_abs(), b.max_abs());
  return s > 0.0 ? max_abs_diff(a, b) / s : 0.0;
}

// Hand-derived manufactured Stokes state in two dimensions:
//   v1 = sin x A(z) + F(z),  v2 = cos x B(z) + G(z),  q = cos x C(z) + E(z)
// with A = z e^z, B = z^2 cos z, F = z sin z, G = z^2, C = sin 2z + 1, E = z^3.
// Data: f = lambda v - Div T(v, q), g = div v, h = T(v, q) e_2.
struct Manufactured2D {
  double mu;
  static double A(double z) { return z * std::exp(z); }
  static double A1(double z) { return (1 + z) * std::exp(z); }
  static double A2(double z) { return (2 + z) * std::exp(z); }
  static double B(double z) { return z * z * std::cos(z); }
  static double B1(double z) { return 2 * z * std::cos(z) - z * z * std::sin(z); }
  static double B2(double z) { return 2 * std::cos(z) - 4 * z * std::sin(z) - z * z * std::cos(z); }
  static double F(double z) { return z * std::sin(z); }
  static double F1(double z) { return std::sin(z) + z * std::cos(z); }
  static double F2(double z) { return 2 * std::cos(z) - z * std::sin(z); }
  static double G(double z) { return z * z; }
  static double G1(double z) { return 2 * z; }
  static double G2(double) { return 2.0; }
  static double C(double z) { return std::sin(2 * z) + 1; }
  static double C1(double z) { return 2 * std::cos(2 * z); }
  static double E(double z) { return z * z * z; }
  static double E1(double z) { return 3 * z * z; }

  void velocity(double x, double z, double* o) const {
    o[0] = std::sin(x) * A(z) + F(z);
    o[1] = std::cos(x) * B(z) + G(z);
  }
  double pressure(double x, double z) const { return std::cos(x) * C(z) + E(z); }
  // -Div T(v, q), component-wise, without the lambda v term
  void minus_div_stress(double x, double z, double* o) const {
    o[0] = std::sin(x) * (-mu * (A2(z) - 2 * A(z) - B1(z)) - C(z)) - mu * F2(z);
    o[1] = std::cos(x) * (-mu * (B2(z) - B(z) + A1(z) + B2(z)) + C1(z)) - 2 * mu * G2(z) + E1(z);
  }
  double divergence(double x, double z) const { return std::cos(x) * (A(z) + B1(z)) + G1(z); }
  void top_traction(double x, double z, double* o) const {
    o[0] = mu * (std::sin(x) * (A1(z) - B(z)) + F1(z));
    o[1] = std::cos(x) * (2 * mu * B1(z) - C(z)) + 2 * mu * G1(z) - E(z);
  }
};

// Shear-then-lift map with unit Jacobian determinant:
// Theta = (x + t alpha(z), z + t beta(x + t alpha(z)))
struct ShearLift {
  double t;
  static double alpha(double z) { return 0.3 * std::sin(z); }
  static double alpha1(double z) { return 0.3 * std::cos(z); }
  static double beta(double s) { return 0.2 * std::sin(s) + 0.1 * std::cos(2 * s); }
  static double beta1(double s) { return 0.2 * std::cos(s) - 0.2 * std::sin(2 * s); }
  static double beta2(double s) { return -0.2 * std::sin(s) - 0.4 * std::cos(2 * s); }
  // velocity d_t Theta at label (x, z) and time t
  void velocity(double x, double z, double* o) const {
    const double s = x + t * alpha(z);
    o[0] = alpha(z);
    o[1] = beta(s) + t * beta1(s) * alpha(z);
  }
  void displacement(double x, double z, double* o) const {
    o[0] = t * alpha(z);
    o[1] = t * beta(x + t * alpha(z));
  }
};

inline layerflow::PhysicalField exact_shear_lift_B(const layerflow::GridPtr& g, double t) {
  return layerflow::sample(g, 4, [&](const double* x, double z, double* o) {
    const double s = x[0] + t * ShearLift::alpha(z);
    o[0] = 0;
    o[1] = t * ShearLift::alpha1(z);
    o[2] = t * ShearLift::beta1(s);
    o[3] = t * t * ShearLift::beta1(s) * ShearLift::alpha1(z);
  });
}

// B accumulated by the trapezoid rule from the shear-lift velocity
inline layerflow::DeformationState accumulated_shear_lift(const layerflow::GridPtr& g, double horizon, int steps) {
  const double tau = horizon / steps;
  auto grad_at = [&](double t) {
    ShearLift m{t};
    return layerflow::gradient(layerflow::forward_transform(
        layerflow::sample(g, 2, [&](const double* x, double z, double* o) { m.velocity(x[0], z, o); })));
  };
  layerflow::DeformationState s = layerflow::initial_deformation(grad_at(0.0));
  for (int n = 1; n <= steps; ++n) s = layerflow::accumulate_deformation(s, grad_at(n * tau), tau);
  return s;
}

inline double piola_gap(const layerflow::DeformationState& s, const layerflow::SpectralField& u) {
  const layerflow::SpectralField lhs = layerflow::divergence(layerflow::nonlinear_Gvec(s, u));
  const layerflow::SpectralField rhs = layerflow::nonlinear_G(s, layerflow::gradient(u));
  return max_abs_diff(lhs, rhs) / rhs.max_abs();
}

}  // namespace testsupport
