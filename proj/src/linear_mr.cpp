// SPDX-License-Identifier: Apache-2.0

#include "layerflow/linear_mr.hpp"

#include <cmath>
#include <sstream>

#include "layerflow/error.hpp"
#include "layerflow/helmholtz.hpp"

namespace layerflow {

namespace {

void check_series(const std::vector<SpectralField>& s, int steps, const GridPtr& g, int comps,
                  const char* name) {
  if (s.empty()) return;
  if (static_cast<int>(s.size()) != steps + 1) {
    std::ostringstream os;
    os << name << " has " << s.size() << " samples, expected " << steps + 1;
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
  for (const auto& f : s) {
    if (!f.grid()->same_as(*g)) throw Error(ErrorCode::GridMismatch, std::string(name) + " grid mismatch");
    if (f.components() != comps) throw Error(ErrorCode::InvalidArgument, std::string(name) + " has wrong shape");
  }
}

const SpectralField* at(const std::vector<SpectralField>& s, std::size_t n) {
  return s.empty() ? nullptr : &s[n];
}

Trajectory march(const StokesSolver& solver, double shift, const LinearData& data,
                 const SpectralField& u0, const SpectralField& p0, int steps, double tau) {
  Trajectory traj;
  traj.step = tau;
  traj.push(0.0, u0, p0);
  SpectralField u = u0;
  const cplx lambda(1.0 / tau + shift, 0.0);
  for (int s = 1; s <= steps; ++s) {
    SpectralField rhs = u;
    rhs *= 1.0 / tau;
    if (!data.f.empty()) rhs += data.f[s];
    auto r = solver.solve(lambda, rhs, at(data.g, s), at(data.h, s));
    u = r.v;
    traj.push(s * tau, std::move(r.v), std::move(r.q));
  }
  return traj;
}

}  // namespace

int step_count(double horizon, double tau) {
  if (!(tau > 0.0) || !(horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "need tau > 0 and horizon >= 0");
  return static_cast<int>(std::llround(horizon / tau));
}

LinearData smooth_random_data(const GridPtr& grid, std::mt19937_64& rng, int steps, double tau) {
  const int dim = grid->dim();
  const SpectralField F = random_smooth_field(grid, dim, rng, 2, 6);
  const SpectralField G = random_smooth_field(grid, 1, rng, 2, 6);
  const SpectralField H = random_smooth_field(grid, dim, rng, 2, 6);
  LinearData d;
  for (int n = 0; n <= steps; ++n) {
    const double t = n * tau;
    d.f.push_back(std::cos(2 * t) * std::exp(-t) * F);
    d.g.push_back(t * std::exp(-t) * G);
    d.h.push_back(t * std::exp(-t) * H);
  }
  return d;
}

Trajectory solve_linear_ibvp(const StokesSolver& solver, const LinearData& data,
                             const SpectralField& a, double horizon, double tau,
                             std::vector<std::string>* warnings) {
  const GridPtr& g = solver.grid();
  const int dim = g->dim();
  const int steps = step_count(horizon, tau);
  if (!a.grid()->same_as(*g) || a.components() != dim)
    throw Error(ErrorCode::InvalidArgument, "initial data has the wrong grid or shape");
  check_series(data.f, steps, g, dim, "f");
  check_series(data.g, steps, g, 1, "g");
  check_series(data.h, steps, g, dim, "h");
  if (warnings) {
    const double scale = std::max(a.max_abs(), 1e-300);
    const DomainViolation dv = domain_violation(a, solver.mu());
    if (dv.bottom_velocity > 1e-8 * scale) warnings->push_back("initial data does not vanish at the bottom");
    if (dv.tangential_stress > 1e-6 * std::max(gradient(a).max_abs(), 1e-300))
      warnings->push_back("initial data has tangential stress at the top");
    if (!data.g.empty() && data.g[0].max_abs() > 0.0) warnings->push_back("g(0) is not zero");
    if (!data.h.empty() && data.h[0].max_abs() > 0.0) warnings->push_back("h(0) is not zero");
  }
  return march(solver, 0.0, data, a, pressure_operator_K(a, solver.mu()), steps, tau);
}

Trajectory solve_time_shifted(const StokesSolver& solver, double delta, const LinearData& data,
                              double horizon, double tau) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "shift must be positive");
  const GridPtr& g = solver.grid();
  const int steps = step_count(horizon, tau);
  check_series(data.f, steps, g, g->dim(), "f");
  check_series(data.g, steps, g, 1, "g");
  check_series(data.h, steps, g, g->dim(), "h");
  return march(solver, 2.0 * delta, data, SpectralField(g, g->dim()), SpectralField(g, 1), steps, tau);
}

std::vector<double> linear_step_residuals(const StokesSolver& solver, double shift,
                                          const LinearData& data, const Trajectory& traj) {
  std::vector<double> out;
  const double tau = traj.step;
  const cplx lambda(1.0 / tau + shift, 0.0);
  for (std::size_t s = 1; s < traj.size(); ++s) {
    SpectralField rhs = traj.velocity[s - 1];
    rhs *= 1.0 / tau;
    if (!data.f.empty()) rhs += data.f[s];
    StokesSolver::Result r{traj.velocity[s], traj.pressure[s]};
    out.push_back(solver.residual(lambda, r, rhs, at(data.g, s), at(data.h, s)));
  }
  return out;
}

Decomposition solve_linear_decomposed(const StokesSolver& solver, const LinearData& data,
                                      const SpectralField& a, double sigma0, double horizon,
                                      double tau) {
  if (!(sigma0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma0 must be positive");
  const GridPtr& g = solver.grid();
  const int dim = g->dim();
  const int steps = step_count(horizon, tau);
  Decomposition d;
  d.parts[0] = semigroup_run(solver, a, tau, steps);

  LinearData boundary{{}, data.g, data.h};
  d.parts[1] = solve_time_shifted(solver, sigma0, boundary, horizon, tau);

  WeakDnSolver dn(g);
  std::vector<SpectralField> solenoidal, gradient_part;
  for (int s = 0; s <= steps; ++s) {
    SpectralField total = d.parts[1].velocity[s];
    total *= 2.0 * sigma0;
    if (!data.f.empty()) total += data.f[s];
    HelmholtzParts hp = helmholtz_project(dn, total);
    gradient_part.push_back(total - hp.solenoidal);
    solenoidal.push_back(std::move(hp.solenoidal));
  }
  d.parts[2] = solve_time_shifted(solver, sigma0, LinearData{gradient_part, {}, {}}, horizon, tau);

  for (int s = 0; s <= steps; ++s) {
    SpectralField extra = d.parts[2].velocity[s];
    extra *= 2.0 * sigma0;
    solenoidal[s] += extra;
  }
  d.parts[3] = duhamel_convolve(solver, solenoidal, tau);

  d.total.step = tau;
  for (int s = 0; s <= steps; ++s) {
    SpectralField u(g, dim), p(g, 1);
    for (const auto& part : d.parts) {
      u += part.velocity[s];
      p += part.pressure[s];
    }
    d.total.push(s * tau, std::move(u), std::move(p));
  }
  return d;
}

MrReport mr_estimate_report(const Trajectory& traj, const LinearData& data, const SpectralField& a,
                            double p, double q, double gamma,
                            const std::vector<SpectralField>& vector_potential) {
  MrReport rep;
  rep.left = weighted_trajectory_norm(traj, p, q, gamma) + weighted_pressure_norm(traj, p, q, gamma);
  const double tau = traj.step;
  const std::size_t n = traj.size();
  auto series = [&](auto&& per) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = per(i);
    return weighted_series_norm(traj.times, tau, v, p, gamma);
  };
  double right = 0.0;
  if (!data.f.empty()) right += series([&](std::size_t i) { return lq_norm(data.f[i], q); });
  if (!data.g.empty()) {
    std::vector<SpectralField> pot = vector_potential;
    if (pot.empty()) {
      WeakDnSolver dn(traj.velocity[0].grid());
      for (std::size_t i = 0; i < n; ++i) pot.push_back(gradient(dn.solve_general(data.g[i], {}, {})));
    }
    right += series([&](std::size_t i) {
      return lq_norm(time_derivative(pot, tau, i), q) + w1_norm(data.g[i], q) +
             lq_norm(time_derivative(data.g, tau, i), q);
    });
  }
  if (!data.h.empty())
    right += series([&](std::size_t i) {
      return w1_norm(data.h[i], q) + lq_norm(time_derivative(data.h, tau, i), q);
    });
  right += w2_norm(a, q);
  rep.right = right;
  rep.defined = right > 0.0;
  rep.ratio = rep.defined ? rep.left / right : std::nan("");
  return rep;
}

}  // namespace layerflow
