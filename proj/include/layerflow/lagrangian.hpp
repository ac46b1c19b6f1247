// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "layerflow/norms.hpp"

namespace layerflow {

/// Accumulated deformation at one time. Matrix fields use entry (i,j) at
/// component i*dim+j with B_ij = int_0^t d_j u_i.
struct DeformationState {
  PhysicalField B;
  PhysicalField A;      // I + B
  PhysicalField Ainv;   // true inverse of A
  PhysicalField calB;   // Ainv - I
  PhysicalField detA;
  SpectralField calB_hat;   // for derivatives of calB
  PhysicalField last_grad;  // grad u at the latest accumulated time

  const GridPtr& grid() const { return B.grid(); }
};

/// Derived quantities for a given B; throws Degenerate when det A < 0.1.
DeformationState make_deformation(const PhysicalField& B);
/// B = 0 with grad u(0) remembered for the first trapezoid step.
DeformationState initial_deformation(const SpectralField& grad_u0);
/// Trapezoid update with grad u at the next time level.
DeformationState accumulate_deformation(const DeformationState& state, const SpectralField& grad_u,
                                        double tau);

/// -B^T d_t u + mu B^T Lap u + mu grad(calB^T : grad u) + mu (I + B^T)(L2 u + L1 u)
/// with L2 = sum calB_ji (2 delta_ik + calB_ki) d_j d_k and
/// L1 = sum (delta_ji + calB_ji)(d_j calB_ki) d_k, assembled pointwise.
/// hess_u is gradient(gradient(u)).
SpectralField nonlinear_F(const DeformationState& s, const SpectralField& du_dt,
                          const SpectralField& grad_u, const SpectralField& hess_u, double mu);
/// -sum_ij calB_ji d_j u_i
SpectralField nonlinear_G(const DeformationState& s, const SpectralField& grad_u);
/// -calB u
SpectralField nonlinear_Gvec(const DeformationState& s, const SpectralField& u);
/// -mu [D(u) calB^T + (grad u calB + B^T grad u (I + calB))(I + calB^T)]
SpectralField nonlinear_H(const DeformationState& s, const SpectralField& grad_u, double mu);
/// Column e_N of a matrix field as a vector field.
SpectralField normal_column(const SpectralField& m);

struct FlowMap {
  std::vector<double> times;
  std::vector<SpectralField> displacement;  // Theta - xi
  std::vector<PhysicalField> jacobian;      // grad Theta = I + grad displacement
};

/// Displacement by the trapezoid rule in time, Jacobian spectrally.
FlowMap flow_map(const Trajectory& traj);

struct JacobianReport {
  double min_singular_value = 1.0;
  double max_det_error = 0.0;
  double integrated_gradient = 0.0;  // sum over left endpoints of tau max|grad u|_2
  bool pass = true;                  // integrated_gradient <= 1/4 implies min sv >= 3/4
};
JacobianReport jacobian_diagnostics(const FlowMap& map, const Trajectory& traj);

struct EulerianSamples {
  int dim = 2;
  std::vector<double> x;         // dim entries per sample
  std::vector<double> velocity;  // dim entries per sample
  std::vector<double> pressure;
  std::vector<double> weight;    // quadrature weight times |det grad Theta|
  std::size_t size() const { return pressure.size(); }
};

/// Forward sampling v(Theta(xi, t), t) = u(xi, t) at the grid points.
EulerianSamples push_forward(const SpectralField& u, const SpectralField& p, const FlowMap& map,
                             std::size_t time_index);
double eulerian_lq_norm(const EulerianSamples& s, double q);

}  // namespace layerflow
