// SPDX-License-Identifier: Apache-2.0

#include "layerflow/global_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "layerflow/error.hpp"
#include "layerflow/lagrangian.hpp"

namespace layerflow {

SmallnessGate smallness_gate(double c0, double m4) {
  if (!(c0 > 0.0) || !(m4 > 0.0) || !std::isfinite(c0) || !std::isfinite(m4))
    throw Error(ErrorCode::InvalidArgument, "smallness gate needs positive finite constants");
  SmallnessGate g;
  g.delta0 = 1.0 / (16.0 * c0 * m4);
  g.eps0 = g.delta0 / (2.0 * c0);
  return g;
}

DecayFit decay_fit(const std::vector<double>& times, const std::vector<double>& values,
                   double burn_in) {
  if (times.size() != values.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  if (!(burn_in >= 0.0 && burn_in < 1.0)) throw Error(ErrorCode::InvalidArgument, "burn_in must be in [0,1)");
  const std::size_t start = static_cast<std::size_t>(std::floor(burn_in * times.size()));
  std::vector<double> t, y;
  for (std::size_t i = start; i < times.size(); ++i) {
    if (!(values[i] > 0.0)) break;
    t.push_back(times[i]);
    y.push_back(std::log(values[i]));
  }
  if (t.size() < 10) throw Error(ErrorCode::InvalidArgument, "fewer than 10 positive samples to fit");
  const double n = static_cast<double>(t.size());
  double mt = 0.0, my = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    my += y[i];
  }
  mt /= n;
  my /= n;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(stt > 0.0)) throw Error(ErrorCode::InvalidArgument, "fit needs distinct times");
  const double slope = sty / stt;
  double sse = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (my + slope * (t[i] - mt));
    sse += r * r;
  }
  DecayFit fit;
  fit.rate = -slope;
  // a constant series counts as a perfect (flat) fit
  fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  const bool flat = std::all_of(y.begin(), y.end(), [&](double v) { return v == y.front(); });
  if (flat) fit.rate = 0.0;
  fit.used = t.size();
  return fit;
}

double x_norm(const Trajectory& traj, double p, double q, double gamma) {
  return weighted_trajectory_norm(traj, p, q, gamma) + weighted_pressure_norm(traj, p, q, gamma);
}

LinearData nonlinear_data(const Trajectory& traj, double mu,
                          std::vector<SpectralField>* vector_potential) {
  if (traj.size() == 0) throw Error(ErrorCode::InvalidArgument, "nonlinear_data: empty trajectory");
  LinearData d;
  if (vector_potential) vector_potential->clear();
  DeformationState state;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const SpectralField& u = traj.velocity[n];
    const SpectralField gu = gradient(u);
    state = n == 0 ? initial_deformation(gu) : accumulate_deformation(state, gu, traj.step);
    const SpectralField ut = time_derivative(traj.velocity, traj.step, n);
    d.f.push_back(nonlinear_F(state, ut, gu, gradient(gu), mu));
    d.g.push_back(nonlinear_G(state, gu));
    d.h.push_back(normal_column(nonlinear_H(state, gu, mu)));
    if (vector_potential) vector_potential->push_back(nonlinear_Gvec(state, u));
  }
  return d;
}

Trajectory picard_step(const StokesSolver& solver, const SpectralField& a, const Trajectory& traj,
                       const GlobalConfig& cfg) {
  return solve_linear_ibvp(solver, nonlinear_data(traj, solver.mu()), a, cfg.horizon, cfg.tau);
}

namespace {

Trajectory difference(const Trajectory& a, const Trajectory& b) {
  Trajectory d;
  d.step = a.step;
  for (std::size_t n = 0; n < a.size(); ++n)
    d.push(a.times[n], a.velocity[n] - b.velocity[n], a.pressure[n] - b.pressure[n]);
  return d;
}

}  // namespace

PicardResult picard_solve(const StokesSolver& solver, const SpectralField& a,
                          const GlobalConfig& cfg) {
  if (cfg.max_iter < 1 || !(cfg.tolerance > 0.0))
    throw Error(ErrorCode::InvalidArgument, "picard_solve needs max_iter >= 1 and tolerance > 0");
  PicardResult res;
  Trajectory prev = solve_linear_ibvp(solver, LinearData{}, a, cfg.horizon, cfg.tau, &res.warnings);
  if (cfg.eps0 > 0.0 && w2_norm(a, cfg.q) > cfg.eps0 * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "initial data size " << w2_norm(a, cfg.q) << " exceeds eps0 = " << cfg.eps0;
    res.warnings.push_back(os.str());
  }
  ContractionReport& rep = res.report;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    Trajectory next = picard_step(solver, a, prev, cfg);
    const double xn = x_norm(next, cfg.p, cfg.q, cfg.gamma0);
    const double gap = x_norm(difference(next, prev), cfg.p, cfg.q, cfg.gamma0);
    rep.iterates = k;
    rep.x_norms.push_back(xn);
    if (!rep.gaps.empty()) rep.ratios.push_back(rep.gaps.back() > 0.0 ? gap / rep.gaps.back() : 0.0);
    rep.gaps.push_back(gap);
    rep.final_gap = xn > 0.0 ? gap / xn : 0.0;
    prev = std::move(next);
    if (!std::isfinite(xn) || xn > 10.0 * rep.x_norms.front()) {
      std::ostringstream os;
      os << "Picard iterates diverge: X-norm " << xn << " at iterate " << k << " against "
         << rep.x_norms.front() << " at the first";
      throw Error(ErrorCode::Diverged, os.str());
    }
    if (rep.final_gap <= cfg.tolerance) {
      rep.converged = true;
      break;
    }
  }
  res.trajectory = std::move(prev);
  return res;
}

SmallnessMeasurement measure_smallness(const StokesSolver& solver, const SpectralField& a,
                                       const GlobalConfig& cfg, double probe) {
  const double size = w2_norm(a, cfg.q);
  if (!(size > 0.0) || !(probe > 0.0))
    throw Error(ErrorCode::InvalidArgument, "measure_smallness needs nonzero data and probe");
  SpectralField scaled = a;
  scaled *= probe / size;
  const Trajectory lin = solve_linear_ibvp(solver, LinearData{}, scaled, cfg.horizon, cfg.tau);
  SmallnessMeasurement m;
  m.c0 = std::max(1.0, mr_estimate_report(lin, LinearData{}, scaled, cfg.p, cfg.q, cfg.gamma0).ratio);
  std::vector<SpectralField> pot;
  const LinearData nl = nonlinear_data(lin, solver.mu(), &pot);
  const SpectralField zero(a.grid(), a.components());
  const double data_norm = mr_estimate_report(lin, nl, zero, cfg.p, cfg.q, cfg.gamma0, pot).right;
  const double xn = x_norm(lin, cfg.p, cfg.q, cfg.gamma0);
  m.m4_measured = data_norm / (4.0 * xn * xn);
  m.m4 = std::max(1.0, m.m4_measured);
  m.gate = smallness_gate(m.c0, m.m4);
  return m;
}

SpectralField single_mode_data(const GridPtr& grid, double amplitude, double q) {
  const double d = grid->depth();
  const double k = 2.0 * std::numbers::pi / grid->period();
  const double c = -(2.0 + k * k * d * d) / (6.0 * d + k * k * d * d * d);
  const int dim = grid->dim();
  SpectralField u = forward_transform(sample(grid, dim, [&](const double* x, double z, double* o) {
    for (int i = 0; i < dim; ++i) o[i] = 0.0;
    o[0] = std::sin(k * x[0]) * (2 * z + 3 * c * z * z);
    o[dim - 1] = -k * std::cos(k * x[0]) * (z * z + c * z * z * z);
  }));
  if (amplitude > 0.0) u *= amplitude / w2_norm(u, q);
  return u;
}

}  // namespace layerflow
