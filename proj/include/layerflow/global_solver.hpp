// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "layerflow/linear_mr.hpp"

namespace layerflow {

struct SmallnessGate {
  double delta0 = 0.0;  // radius of the iteration ball
  double eps0 = 0.0;    // admissible size of the initial data
};

/// Extremal choice of 4 c0 M4 delta0^2 <= delta0 / 4 and c0 eps0 <= delta0 / 2.
SmallnessGate smallness_gate(double c0, double m4);

struct DecayFit {
  double rate = 0.0;       // minus the fitted slope of log(series)
  double r_squared = 0.0;
  std::size_t used = 0;    // samples entering the fit
};

/// Least-squares line through log(values) over the tail after dropping the
/// first burn_in fraction. The tail is truncated at the first non-positive
/// value; fewer than 10 remaining samples is an error.
DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& values,
                   double burn_in);

struct GlobalConfig {
  double tau = 0.05;
  double horizon = 5.0;
  double gamma0 = 0.0;     // weight of the X-norm
  double p = 2.0;          // time exponent of the X-norm
  double q = 2.0;          // space exponent of the X-norm
  double tolerance = 1e-8; // on the relative X-norm gap
  int max_iter = 30;
  double eps0 = 0.0;       // admissible data size; 0 disables the warning
};

/// Weighted norm of (d_t u, u, grad u, grad^2 u) plus weighted W^1_q pressure norm.
double x_norm(const Trajectory& traj, double p, double q, double gamma);

/// F(u), G(u) and H(u) e_N along a trajectory, with B accumulated by the
/// trapezoid rule. vector_potential receives -calB u when non-null.
LinearData nonlinear_data(const Trajectory& traj, double mu,
                          std::vector<SpectralField>* vector_potential = nullptr);

/// One application of the fixed-point map: the linear problem with the
/// nonlinear data of traj and initial value a.
Trajectory picard_step(const StokesSolver& solver, const SpectralField& a, const Trajectory& traj,
                       const GlobalConfig& cfg);

struct ContractionReport {
  int iterates = 0;               // applications of the fixed-point map
  std::vector<double> x_norms;    // X-norm of each iterate
  std::vector<double> gaps;       // X-norm of successive differences
  std::vector<double> ratios;     // gaps[k] / gaps[k-1]
  bool converged = false;
  double final_gap = 0.0;         // last gap relative to the last X-norm
};

struct PicardResult {
  Trajectory trajectory;
  ContractionReport report;
  std::vector<std::string> warnings;
};

/// Picard iteration warm-started from the linear solve with zero
/// nonlinearity. Stops when the relative gap is at most cfg.tolerance or
/// after cfg.max_iter iterates. Throws Diverged when an iterate's X-norm
/// exceeds ten times the first, Degenerate when the deformation collapses.
PicardResult picard_solve(const StokesSolver& solver, const SpectralField& a,
                          const GlobalConfig& cfg);

struct SmallnessMeasurement {
  double c0 = 0.0;   // max(1, maximal-regularity ratio of the data-free run)
  double m4 = 0.0;   // max(1, m4_measured)
  double m4_measured = 0.0;  // nonlinear data norm / (4 X-norm^2) at the probe size
  SmallnessGate gate;
};

/// Measures c0 and M4 with the shape of a scaled to W^2_q size probe and
/// feeds them to smallness_gate.
SmallnessMeasurement measure_smallness(const StokesSolver& solver, const SpectralField& a,
                                       const GlobalConfig& cfg, double probe = 1e-3);

/// Stream function sin(2 pi x_1 / L)(z^2 + c z^3) with c chosen for zero
/// tangential stress at z = d; velocity (d_z psi, 0, -d_1 psi). Scaled to
/// the given W^2_q norm when amplitude > 0.
SpectralField single_mode_data(const GridPtr& grid, double amplitude, double q = 2.0);

}  // namespace layerflow
