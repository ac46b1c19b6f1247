// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "layerflow/field.hpp"

namespace layerflow {

/// Velocity/pressure samples at t_n = n * step.
struct Trajectory {
  double step = 0.0;
  std::vector<double> times;
  std::vector<SpectralField> velocity;
  std::vector<SpectralField> pressure;

  std::size_t size() const { return times.size(); }
  void push(double t, SpectralField u, SpectralField p) {
    times.push_back(t);
    velocity.push_back(std::move(u));
    pressure.push_back(std::move(p));
  }
};

/// Quadrature L_q norm with the Euclidean norm over components pointwise.
double lq_norm(const PhysicalField& f, double q);
double lq_norm(const SpectralField& f, double q);
/// ||f|| + ||grad f||, and additionally + ||grad^2 f|| for w2.
double w1_norm(const SpectralField& f, double q);
double w2_norm(const SpectralField& f, double q);

/// Backward difference (u_n - u_{n-1}) / step; the first sample uses the
/// forward difference and a single sample gives zero.
SpectralField time_derivative(const std::vector<SpectralField>& series, double step, std::size_t n);

/// (sum_n step * (e^{gamma t_n} N_n)^p)^{1/p} where N_n is the sum of the L_q
/// norms of (d_t u, u, grad u, grad^2 u) at t_n.
double weighted_trajectory_norm(const Trajectory& traj, double p, double q, double gamma);
/// Same weighting for an arbitrary series measured by per_sample(n).
double weighted_series_norm(const std::vector<double>& times, double step,
                            const std::vector<double>& per_sample, double p, double gamma);
/// Weighted W^1_q norm of the pressure series.
double weighted_pressure_norm(const Trajectory& traj, double p, double q, double gamma);

}  // namespace layerflow
