// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "layerflow/stokes.hpp"

namespace layerflow {

/// Time samples of the linear data at t_n = n * tau, n = 0..steps. An empty
/// series means identically zero. h is a vector field whose top-node values
/// are the prescribed traction.
struct LinearData {
  std::vector<SpectralField> f;
  std::vector<SpectralField> g;
  std::vector<SpectralField> h;
};

int step_count(double horizon, double tau);

/// Smooth random data on steps+1 time levels: f = cos(2t) e^{-t} F and
/// g = t e^{-t} G, h = t e^{-t} H with fixed random fields F, G, H, so the
/// boundary data vanish at t = 0.
LinearData smooth_random_data(const GridPtr& grid, std::mt19937_64& rng, int steps, double tau);

/// Implicit Euler for d_t u - Div T(u, p) = f, div u = g, T(u, p) e_N = h on
/// the top, u = 0 at the bottom, u(0) = a. Each step is one resolvent solve
/// at 1/tau with f(t_{n+1}) + u^n / tau. The t = 0 pressure is K(a).
/// Compatibility problems of a and g(0), h(0) are appended to warnings.
Trajectory solve_linear_ibvp(const StokesSolver& solver, const LinearData& data,
                             const SpectralField& a, double horizon, double tau,
                             std::vector<std::string>* warnings = nullptr);

/// Same scheme for d_t u + 2 delta u - Div T = f with zero initial data.
Trajectory solve_time_shifted(const StokesSolver& solver, double delta, const LinearData& data,
                              double horizon, double tau);

/// Per-step relative residual of the discrete equations solved by the
/// linear schemes (shift = 0 for the plain problem).
std::vector<double> linear_step_residuals(const StokesSolver& solver, double shift,
                                          const LinearData& data, const Trajectory& traj);

struct Decomposition {
  Trajectory total;
  std::array<Trajectory, 4> parts;
};

/// Four-way split: u1 from the semigroup on a; u2 time-shifted with (0, g, h);
/// f + 2 sigma0 u2 split by the Helmholtz projection into P + grad Q; u3
/// time-shifted with (grad Q, 0, 0); u4 the Duhamel integral of
/// P + 2 sigma0 u3. total is the sum of the parts.
Decomposition solve_linear_decomposed(const StokesSolver& solver, const LinearData& data,
                                      const SpectralField& a, double sigma0, double horizon,
                                      double tau);

struct MrReport {
  double left = 0.0;
  double right = 0.0;
  double ratio = 0.0;
  bool defined = false;  // false when right == 0
};

/// Discrete maximal-regularity ratio. Left: weighted norm of
/// (d_t u, u, grad u, grad^2 u) plus weighted W^1_q norm of the pressure.
/// Right: weighted norms of f, of the divergence data (d_t G plus g in W^1
/// and a first time difference), of h the same way, and ||a||_{W^2_q}. G is
/// the given vector potential series when nonempty, else grad psi with
/// Lap psi = g from the Dirichlet-Neumann solver.
MrReport mr_estimate_report(const Trajectory& traj, const LinearData& data, const SpectralField& a,
                            double p, double q, double gamma,
                            const std::vector<SpectralField>& vector_potential = {});

}  // namespace layerflow
