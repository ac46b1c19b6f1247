// SPDX-License-Identifier: Apache-2.0

#include "layerflow/norms.hpp"

#include <cmath>

#include "layerflow/error.hpp"

namespace layerflow {

double lq_norm(const PhysicalField& f, double q) {
  if (!(q >= 1.0) || !std::isfinite(q)) throw Error(ErrorCode::InvalidArgument, "q must be in [1, inf)");
  const GridPtr& g = f.grid();
  const auto& wz = g->vertical_weights();
  const int nz = g->n_vertical();
  double total = 0.0;
  for (std::size_t p = 0; p < g->points(); ++p) {
    for (int j = 0; j < nz; ++j) {
      double s = 0.0;
      for (int c = 0; c < f.components(); ++c) s += f.at(c, p, j) * f.at(c, p, j);
      total += wz[j] * (q == 2.0 ? s : std::pow(std::sqrt(s), q));
    }
  }
  return std::pow(total * g->horizontal_weight(), 1.0 / q);
}

double lq_norm(const SpectralField& f, double q) { return lq_norm(inverse_transform(f), q); }

double w1_norm(const SpectralField& f, double q) {
  return lq_norm(f, q) + lq_norm(gradient(f), q);
}

double w2_norm(const SpectralField& f, double q) {
  const SpectralField g1 = gradient(f);
  return lq_norm(f, q) + lq_norm(g1, q) + lq_norm(gradient(g1), q);
}

SpectralField time_derivative(const std::vector<SpectralField>& series, double step, std::size_t n) {
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "empty series");
  if (series.size() == 1) return SpectralField(series[0].grid(), series[0].components());
  SpectralField d = n == 0 ? series[1] - series[0] : series[n] - series[n - 1];
  d *= 1.0 / step;
  return d;
}

double weighted_series_norm(const std::vector<double>& times, double step,
                            const std::vector<double>& per_sample, double p, double gamma) {
  if (times.empty()) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  if (!(p >= 1.0) || !std::isfinite(p)) throw Error(ErrorCode::InvalidArgument, "p must be in [1, inf)");
  const double dt = step > 0.0 ? step : 1.0;
  double total = 0.0;
  for (std::size_t n = 0; n < times.size(); ++n)
    total += dt * std::pow(std::exp(gamma * times[n]) * per_sample[n], p);
  return std::pow(total, 1.0 / p);
}

double weighted_trajectory_norm(const Trajectory& traj, double p, double q, double gamma) {
  if (traj.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  std::vector<double> per(traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const SpectralField dt = time_derivative(traj.velocity, traj.step, n);
    per[n] = lq_norm(dt, q) + w2_norm(traj.velocity[n], q);
  }
  return weighted_series_norm(traj.times, traj.step, per, p, gamma);
}

double weighted_pressure_norm(const Trajectory& traj, double p, double q, double gamma) {
  if (traj.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty trajectory");
  std::vector<double> per(traj.size());
  for (std::size_t n = 0; n < traj.size(); ++n) per[n] = w1_norm(traj.pressure[n], q);
  return weighted_series_norm(traj.times, traj.step, per, p, gamma);
}

}  // namespace layerflow
