// SPDX-License-Identifier: Apache-2.0

#include "layerflow/stokes.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "layerflow/error.hpp"
#include "layerflow/norms.hpp"
#include "layerflow/parallel.hpp"

namespace layerflow {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using LU = Eigen::PartialPivLU<MatrixXcd>;

struct StokesSolver::Factors {
  // nonzero modes: one coupled system; zero mode: tangential, vertical and
  // pressure blocks solved in sequence
  std::vector<std::optional<LU>> coupled;
  std::optional<LU> tangential0, vertical0, pressure0;
};

SpectralField stress_tensor(const SpectralField& v, const SpectralField& q, double mu) {
  require_same_grid(v, q);
  const int n = v.grid()->dim();
  if (v.components() != n || q.components() != 1)
    throw Error(ErrorCode::InvalidArgument, "stress tensor needs a vector and a scalar field");
  const SpectralField gv = gradient(v);
  SpectralField t(v.grid(), n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      SpectralField e = gv.component(i * n + j) + gv.component(j * n + i);
      e *= mu;
      if (i == j) e -= q;
      t.set_component(i * n + j, e);
    }
  return t;
}

StokesSolver::StokesSolver(GridPtr grid, double mu) : grid_(std::move(grid)), mu_(mu) {
  if (!grid_) throw Error(ErrorCode::InvalidArgument, "null grid");
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidArgument, "viscosity must be positive");
}

namespace {

void check_lu(const LU& lu, std::size_t mode, cplx lambda, const char* what) {
  const double rc = lu.rcond();
  if (!(rc > 1e-15)) {
    std::ostringstream os;
    os << "singular " << what << " resolvent matrix at mode " << mode << ", lambda = ("
       << lambda.real() << "," << lambda.imag() << "), rcond " << rc;
    throw Error(ErrorCode::Singular, os.str());
  }
}

}  // namespace

std::shared_ptr<const StokesSolver::Factors> StokesSolver::factors(cplx lambda) const {
  const auto key = std::make_pair(lambda.real(), lambda.imag());
  std::lock_guard lock(mutex_);
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  if (cache_.size() >= 16) cache_.clear();

  const int n = grid_->n_vertical();
  const int dim = grid_->dim();
  const int blocks = dim + 1;
  const int size = blocks * n;
  const MatrixXcd d = grid_->d1().cast<cplx>();
  const MatrixXcd d2 = grid_->d2().cast<cplx>();
  const MatrixXcd id = MatrixXcd::Identity(n, n);
  const double mu = mu_;
  auto fac = std::make_shared<Factors>();
  fac->coupled.resize(grid_->modes());

  parallel_for(grid_->modes(), [&](std::size_t m) {
    const HorizontalMode& hm = grid_->mode(m);
    if (m == 0 || hm.nyquist) return;
    const double k2 = hm.magnitude * hm.magnitude;
    const MatrixXcd lap = d2 - k2 * id;
    cplx ixi[2] = {cplx(0.0, hm.frequency[0]), cplx(0.0, hm.frequency[1])};
    MatrixXcd a = MatrixXcd::Zero(size, size);
    auto blk = [&](int r, int c) { return a.block(r * n, c * n, n, n); };
    const int nb = dim - 1;  // normal velocity block, pressure block is dim
    // momentum, all rows first; boundary rows overwritten below
    for (int r = 0; r < nb; ++r) {
      for (int c = 0; c < nb; ++c)
        blk(r, c) = (r == c ? MatrixXcd(lambda * id - mu * lap) : MatrixXcd::Zero(n, n)) -
                    mu * ixi[r] * ixi[c] * id;
      blk(r, nb) = -mu * ixi[r] * d;
      blk(r, dim) = ixi[r] * id;
    }
    for (int c = 0; c < nb; ++c) blk(nb, c) = -mu * ixi[c] * d;
    blk(nb, nb) = lambda * id - mu * lap - mu * d2;
    blk(nb, dim) = d;
    // continuity at every node
    for (int c = 0; c < nb; ++c) blk(dim, c) = ixi[c] * id;
    blk(dim, nb) = d;
    // no-slip bottom and stress top for each velocity component
    for (int r = 0; r <= nb; ++r) {
      const int bottom = r * n, top = r * n + n - 1;
      a.row(bottom).setZero();
      a(bottom, bottom) = 1.0;
      a.row(top).setZero();
      if (r < nb) {
        a.block(top, r * n, 1, n) = mu * d.row(n - 1);
        a(top, nb * n + n - 1) = mu * ixi[r];
      } else {
        a.block(top, nb * n, 1, n) = 2.0 * mu * d.row(n - 1);
        a(top, dim * n + n - 1) = -1.0;
      }
    }
    fac->coupled[m].emplace(a);
    check_lu(*fac->coupled[m], m, lambda, "coupled");
  });

  MatrixXcd t0 = lambda * id - mu * d2;
  t0.row(0).setZero();
  t0(0, 0) = 1.0;
  t0.row(n - 1) = mu * d.row(n - 1);
  fac->tangential0.emplace(t0);
  check_lu(*fac->tangential0, 0, lambda, "tangential");
  MatrixXcd v0 = d;
  v0.row(0).setZero();
  v0(0, 0) = 1.0;
  fac->vertical0.emplace(v0);
  check_lu(*fac->vertical0, 0, lambda, "vertical");
  MatrixXcd p0 = d;
  p0.row(n - 1).setZero();
  p0(n - 1, n - 1) = 1.0;
  fac->pressure0.emplace(p0);
  check_lu(*fac->pressure0, 0, lambda, "pressure");

  cache_.emplace(key, fac);
  return fac;
}

StokesSolver::Result StokesSolver::solve(cplx lambda, const SpectralField& f, const SpectralField* g,
                                         const SpectralField* h) const {
  const int dim = grid_->dim();
  const int n = grid_->n_vertical();
  if (!f.grid()->same_as(*grid_) || (g && !g->grid()->same_as(*grid_)) ||
      (h && !h->grid()->same_as(*grid_)))
    throw Error(ErrorCode::GridMismatch, "resolvent data on a different grid");
  if (f.components() != dim || (g && g->components() != 1) || (h && h->components() != dim))
    throw Error(ErrorCode::InvalidArgument, "resolvent data has the wrong shape");

  const auto fac = factors(lambda);
  Result out{SpectralField(grid_, dim), SpectralField(grid_, 1)};
  const int nb = dim - 1;
  const double mu = mu_;

  parallel_for(grid_->modes(), [&](std::size_t m) {
    if (grid_->mode(m).nyquist) return;
    if (m == 0) {
      for (int c = 0; c < nb; ++c) {
        VectorXcd rhs = Eigen::Map<const VectorXcd>(f.column(c, 0), n);
        rhs[0] = 0.0;
        rhs[n - 1] = h ? h->column(c, 0)[n - 1] : cplx(0.0);
        Eigen::Map<VectorXcd>(out.v.column(c, 0), n) = fac->tangential0->solve(rhs);
      }
      VectorXcd rhs = g ? VectorXcd(Eigen::Map<const VectorXcd>(g->column(0, 0), n))
                        : VectorXcd(VectorXcd::Zero(n));
      rhs[0] = 0.0;
      const VectorXcd vn = fac->vertical0->solve(rhs);
      Eigen::Map<VectorXcd>(out.v.column(nb, 0), n) = vn;
      const VectorXcd dvn = grid_->d1() * vn;
      VectorXcd prhs = Eigen::Map<const VectorXcd>(f.column(nb, 0), n) - lambda * vn +
                       2.0 * mu * (grid_->d2() * vn);
      prhs[n - 1] = 2.0 * mu * dvn[n - 1] - (h ? h->column(nb, 0)[n - 1] : cplx(0.0));
      Eigen::Map<VectorXcd>(out.q.column(0, 0), n) = fac->pressure0->solve(prhs);
      return;
    }
    VectorXcd rhs = VectorXcd::Zero((dim + 1) * n);
    for (int c = 0; c < dim; ++c) {
      rhs.segment(c * n, n) = Eigen::Map<const VectorXcd>(f.column(c, m), n);
      rhs[c * n] = 0.0;
      rhs[c * n + n - 1] = h ? h->column(c, m)[n - 1] : cplx(0.0);
    }
    if (g) rhs.segment(dim * n, n) = Eigen::Map<const VectorXcd>(g->column(0, m), n);
    const VectorXcd sol = fac->coupled[m]->solve(rhs);
    for (int c = 0; c < dim; ++c)
      Eigen::Map<VectorXcd>(out.v.column(c, m), n) = sol.segment(c * n, n);
    Eigen::Map<VectorXcd>(out.q.column(0, m), n) = sol.segment(dim * n, n);
  });
  return out;
}

double StokesSolver::residual(cplx lambda, const Result& r, const SpectralField& f,
                              const SpectralField* g, const SpectralField* h) const {
  const int dim = grid_->dim();
  const int n = grid_->n_vertical();
  const SpectralField lap = laplacian(r.v);
  const SpectralField divv = divergence(r.v);
  const SpectralField gdiv = gradient(divv);
  const SpectralField gq = gradient(r.q);
  const SpectralField t = stress_tensor(r.v, r.q, mu_);

  double mom = 0.0, mom_scale = 0.0, cont = 0.0, cont_scale = 0.0;
  double bc = 0.0, bc_scale = 0.0;
  for (std::size_t m = 0; m < grid_->modes(); ++m) {
    for (int c = 0; c < dim; ++c) {
      for (int j = 1; j < n - 1; ++j) {
        const cplx lv = lambda * r.v.at(c, m, j);
        const cplx visc = mu_ * (lap.at(c, m, j) + gdiv.at(c, m, j));
        const cplx res = lv - visc + gq.at(c, m, j) - f.at(c, m, j);
        mom = std::max(mom, std::abs(res));
        mom_scale = std::max({mom_scale, std::abs(lv), std::abs(visc), std::abs(gq.at(c, m, j)),
                              std::abs(f.at(c, m, j))});
      }
      bc = std::max(bc, std::abs(r.v.at(c, m, 0)));
      const cplx top = t.at(c * dim + dim - 1, m, n - 1);
      const cplx hv = h ? h->at(c, m, n - 1) : cplx(0.0);
      bc = std::max(bc, std::abs(top - hv));
      bc_scale = std::max({bc_scale, std::abs(top), std::abs(hv), std::abs(r.q.at(0, m, n - 1))});
    }
    for (int j = 0; j < n; ++j) {
      const cplx gv = g ? g->at(0, m, j) : cplx(0.0);
      cont = std::max(cont, std::abs(divv.at(0, m, j) - gv));
      cont_scale = std::max(cont_scale, std::abs(gv));
    }
  }
  // continuity is measured against the velocity gradient scale
  cont_scale = std::max(cont_scale, gradient(r.v).max_abs());
  auto rel = [](double a, double s) { return s > 0.0 ? a / s : a; };
  return std::max({rel(mom, mom_scale), rel(cont, cont_scale), rel(bc, std::max(bc_scale, mom_scale))});
}

SpectralField pressure_operator_K(const WeakDnSolver& dn, const SpectralField& v, double mu) {
  const GridPtr& g = v.grid();
  const int dim = g->dim();
  const int n = g->n_vertical();
  const SpectralField divv = divergence(v);
  const SpectralField gdiv = gradient(divv);
  SpectralField data = laplacian(v) + gdiv;
  data *= mu;
  data -= gdiv;
  const SpectralField dvn = vertical_derivative(v.component(dim - 1), 1);
  std::vector<cplx> top(g->modes());
  for (std::size_t m = 0; m < g->modes(); ++m)
    top[m] = 2.0 * mu * dvn.at(0, m, n - 1) - divv.at(0, m, n - 1);
  std::vector<cplx> bottom(g->modes());
  for (std::size_t m = 0; m < g->modes(); ++m) bottom[m] = data.at(dim - 1, m, 0);
  return dn.solve_general(divergence(data), bottom, top);
}

SpectralField pressure_operator_K(const SpectralField& v, double mu) {
  return pressure_operator_K(WeakDnSolver(v.grid()), v, mu);
}

SpectralField apply_reduced_stokes(const WeakDnSolver& dn, const SpectralField& v, double mu) {
  return divergence(stress_tensor(v, pressure_operator_K(dn, v, mu), mu));
}

SpectralField apply_reduced_stokes(const SpectralField& v, double mu) {
  return apply_reduced_stokes(WeakDnSolver(v.grid()), v, mu);
}

DomainViolation domain_violation(const SpectralField& v, double mu) {
  const GridPtr& g = v.grid();
  const int dim = g->dim();
  const int n = g->n_vertical();
  DomainViolation out;
  const PhysicalField pv = inverse_transform(v);
  const SpectralField t = stress_tensor(v, SpectralField(g, 1), mu);
  const PhysicalField pt = inverse_transform(t);
  for (std::size_t p = 0; p < g->points(); ++p) {
    for (int c = 0; c < dim; ++c) out.bottom_velocity = std::max(out.bottom_velocity, std::abs(pv.at(c, p, 0)));
    for (int c = 0; c < dim - 1; ++c)
      out.tangential_stress =
          std::max(out.tangential_stress, std::abs(pt.at(c * dim + dim - 1, p, n - 1)));
  }
  out.weak_divergence = weak_divergence(v).relative();
  return out;
}

SpectralField random_solenoidal(const GridPtr& grid, std::mt19937_64& rng, int max_mode,
                                int max_degree) {
  const int dim = grid->dim();
  const int n = grid->n_vertical();
  if (max_degree + 2 > n - 1) throw Error(ErrorCode::InvalidArgument, "stream function degree too high");
  const auto& z = grid->vertical_nodes();
  SpectralField u(grid, dim);
  SpectralField vertical(grid, 1);
  for (int a = 0; a < dim - 1; ++a) {
    SpectralField psi = random_smooth_field(grid, 1, rng, max_mode, max_degree);
    for (std::size_t m = 0; m < grid->modes(); ++m)
      for (int j = 0; j < n; ++j) psi.at(0, m, j) *= z[j] * z[j];
    u.set_component(a, vertical_derivative(psi, 1));
    vertical -= partial(psi, a);
  }
  u.set_component(dim - 1, vertical);
  return u;
}

StokesSolver::Result semigroup_step(const StokesSolver& solver, const SpectralField& u, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  SpectralField f = u;
  f *= 1.0 / tau;
  return solver.solve(cplx(1.0 / tau, 0.0), f);
}

Trajectory semigroup_run(const StokesSolver& solver, const SpectralField& u0, double tau, int steps) {
  Trajectory traj;
  traj.step = tau;
  traj.push(0.0, u0, pressure_operator_K(u0, solver.mu()));
  SpectralField u = u0;
  for (int s = 1; s <= steps; ++s) {
    auto r = semigroup_step(solver, u, tau);
    u = r.v;
    traj.push(s * tau, std::move(r.v), std::move(r.q));
  }
  return traj;
}

Trajectory duhamel_convolve(const StokesSolver& solver, const std::vector<SpectralField>& forcing,
                            double tau) {
  if (forcing.empty()) throw Error(ErrorCode::InvalidArgument, "empty forcing");
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  for (const auto& f : forcing) {
    const WeakResidual w = weak_divergence(f);
    if (w.residual > 1e-6 * std::max(w.scale, 1e-300) && w.residual > 1e-14)
      throw Error(ErrorCode::InvalidArgument, "Duhamel forcing is not weakly divergence free");
  }
  const GridPtr& g = solver.grid();
  Trajectory traj;
  traj.step = tau;
  SpectralField u(g, g->dim());
  traj.push(0.0, u, SpectralField(g, 1));
  for (std::size_t s = 1; s < forcing.size(); ++s) {
    // S u + tau S F = resolvent(1/tau) applied to u/tau + F
    SpectralField rhs = u;
    rhs *= 1.0 / tau;
    rhs += forcing[s];
    auto r = solver.solve(cplx(1.0 / tau, 0.0), rhs);
    u = r.v;
    traj.push(s * tau, std::move(r.v), std::move(r.q));
  }
  return traj;
}

std::vector<cplx> resolvent_sample_set() {
  std::vector<cplx> out;
  const double angle = 0.75 * std::acos(-1.0);
  for (int sign : {1, -1})
    for (double r : {1e-2, 1e-1, 1.0, 1e1, 1e2}) out.push_back(std::polar(r, sign * angle));
  out.push_back(1e-2);
  out.push_back(1e-1);
  return out;
}

std::vector<ResolventSample> resolvent_sweep(const StokesSolver& solver, const SpectralField& f,
                                             const std::vector<cplx>& lambdas, double q) {
  const double fn = lq_norm(f, q);
  if (!(fn > 0.0)) throw Error(ErrorCode::InvalidArgument, "resolvent_sweep needs nonzero forcing");
  std::vector<ResolventSample> out;
  for (cplx lam : lambdas) {
    const auto r = solver.solve(lam, f, nullptr, nullptr);
    const double a = std::abs(lam);
    ResolventSample s;
    s.lambda = lam;
    s.literal = a * lq_norm(r.v, q) / fn;
    s.full = (a * lq_norm(r.v, q) + std::sqrt(a) * lq_norm(gradient(r.v), q) + w2_norm(r.v, q) +
              w1_norm(r.q, q)) /
             fn;
    s.residual = solver.residual(lam, r, f, nullptr, nullptr);
    out.push_back(s);
  }
  return out;
}

}  // namespace layerflow
