// SPDX-License-Identifier: Apache-2.0

#include "layerflow/weak_dn.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

#include "layerflow/error.hpp"
#include "layerflow/kernels.hpp"
#include "layerflow/parallel.hpp"

namespace layerflow {

namespace {

long long mode_key(const HorizontalMode& hm) {
  return static_cast<long long>(hm.index[0]) * hm.index[0] +
         static_cast<long long>(hm.index[1]) * hm.index[1];
}

// Horizontal part of the divergence, i xi' . f', for one mode.
void horizontal_divergence(const SpectralField& f, std::size_t m, cplx* out) {
  const GridPtr& g = f.grid();
  const HorizontalMode& hm = g->mode(m);
  const int nz = g->n_vertical();
  for (int j = 0; j < nz; ++j) out[j] = 0.0;
  for (int a = 0; a < g->horizontal_dims(); ++a) {
    const cplx factor(0.0, hm.frequency[a]);
    const cplx* col = f.column(a, m);
    for (int j = 0; j < nz; ++j) out[j] += factor * col[j];
  }
}

}  // namespace

WeakDnSolver::WeakDnSolver(GridPtr grid) : grid_(std::move(grid)) {
  if (!grid_) throw Error(ErrorCode::InvalidArgument, "null grid");
}

const Eigen::PartialPivLU<Eigen::MatrixXd>& WeakDnSolver::factor(std::size_t mode) const {
  const HorizontalMode& hm = grid_->mode(mode);
  const long long key = mode_key(hm);
  std::lock_guard lock(mutex_);
  auto it = cache_.find(key);
  if (it != cache_.end()) return *it->second;

  const int n = grid_->n_vertical();
  const double k2 = hm.magnitude * hm.magnitude;
  const double w0 = grid_->vertical_weights()[0];
  Eigen::MatrixXd a = grid_->d2() - k2 * Eigen::MatrixXd::Identity(n, n);
  a.row(0) = w0 * a.row(0) + grid_->d1().row(0);
  a.row(n - 1).setZero();
  a(n - 1, n - 1) = 1.0;
  auto lu = std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(a);
  const double rcond = lu->rcond();
  if (!(rcond > 1e-14))
    throw Error(ErrorCode::Singular, "weak Dirichlet-Neumann matrix is singular for mode |k|^2=" +
                                         std::to_string(key) + "; increase vertical resolution");
  auto& ref = *lu;
  cache_.emplace(key, std::move(lu));
  return ref;
}

SpectralField WeakDnSolver::solve_general(const SpectralField& source,
                                          const std::vector<cplx>& bottom_flux,
                                          const std::vector<cplx>& top_value) const {
  if (!source.grid()->same_as(*grid_)) throw Error(ErrorCode::GridMismatch, "source grid mismatch");
  if (source.components() != 1) throw Error(ErrorCode::InvalidArgument, "source must be scalar");
  const std::size_t nm = grid_->modes();
  if ((!bottom_flux.empty() && bottom_flux.size() != nm) || (!top_value.empty() && top_value.size() != nm))
    throw Error(ErrorCode::InvalidArgument, "boundary data must have one entry per mode");
  const int n = grid_->n_vertical();
  const double w0 = grid_->vertical_weights()[0];
  // factor every distinct matrix serially so workers only read the cache
  for (std::size_t m = 0; m < nm; ++m)
    if (!grid_->mode(m).nyquist) factor(m);

  SpectralField u(grid_, 1);
  parallel_for(nm, [&](std::size_t m) {
    if (grid_->mode(m).nyquist) return;
    const cplx* s = source.column(0, m);
    Eigen::MatrixXd rhs(n, 2);
    for (int j = 0; j < n; ++j) {
      rhs(j, 0) = s[j].real();
      rhs(j, 1) = s[j].imag();
    }
    const cplx beta = bottom_flux.empty() ? cplx(0.0) : bottom_flux[m];
    const cplx alpha = top_value.empty() ? cplx(0.0) : top_value[m];
    rhs(0, 0) = w0 * rhs(0, 0) + beta.real();
    rhs(0, 1) = w0 * rhs(0, 1) + beta.imag();
    rhs(n - 1, 0) = alpha.real();
    rhs(n - 1, 1) = alpha.imag();
    const Eigen::MatrixXd sol = factor(m).solve(rhs);
    cplx* out = u.column(0, m);
    for (int j = 0; j < n; ++j) out[j] = cplx(sol(j, 0), sol(j, 1));
  });
  return u;
}

SpectralField WeakDnSolver::solve(const SpectralField& f) const {
  if (!f.grid()->same_as(*grid_)) throw Error(ErrorCode::GridMismatch, "data grid mismatch");
  const int dim = grid_->dim();
  if (f.components() != dim) throw Error(ErrorCode::InvalidArgument, "data must be a vector field");
  const std::size_t nm = grid_->modes();
  const int n = grid_->n_vertical();
  SpectralField s(grid_, 1);
  std::vector<cplx> beta(nm);
  const Eigen::MatrixXd& d = grid_->d1();
  for (std::size_t m = 0; m < nm; ++m) {
    cplx* col = s.column(0, m);
    horizontal_divergence(f, m, col);
    Eigen::Map<const Eigen::VectorXcd> fn(f.column(dim - 1, m), n);
    Eigen::Map<Eigen::VectorXcd> out(col, n);
    out += d * fn;
    beta[m] = f.column(dim - 1, m)[0];
  }
  return solve_general(s, beta, {});
}

SpectralField solve_weak_dn(const SpectralField& f) { return WeakDnSolver(f.grid()).solve(f); }

KernelPathResult solve_weak_dn_kernel_path(const SpectralField& f, int quadrature_order) {
  const GridPtr& g = f.grid();
  const int dim = g->dim();
  if (f.components() != dim) throw Error(ErrorCode::InvalidArgument, "data must be a vector field");
  const int n = g->n_vertical();
  const double depth = g->depth();
  const double fmax = f.max_abs();
  for (int c = 0; c < dim; ++c)
    for (std::size_t m = 0; m < g->modes(); ++m) {
      const cplx* col = f.column(c, m);
      if (std::abs(col[0]) > 1e-10 * fmax || std::abs(col[n - 1]) > 1e-10 * fmax)
        throw Error(ErrorCode::InvalidArgument,
                    "kernel path needs data vanishing at both boundaries");
    }
  if (quadrature_order != 64) throw Error(ErrorCode::InvalidArgument, "only order 64 is available");

  KernelPathResult r{SpectralField(g, 1), SpectralField(g, 1), SpectralField(g, 1)};
  const auto& z = g->vertical_nodes();
  using gauss = boost::math::quadrature::gauss<double, 64>;

  // zero mode: no kernel form, fall back to the two-point problem
  {
    SpectralField f0(g, dim);
    for (int c = 0; c < dim; ++c) std::copy_n(f.column(c, 0), n, f0.column(c, 0));
    const SpectralField u0 = solve_weak_dn(f0);
    std::copy_n(u0.column(0, 0), n, r.v.column(0, 0));
    std::copy_n(u0.column(0, 0), n, r.u.column(0, 0));
  }

  parallel_for(g->modes(), [&](std::size_t m) {
    const HorizontalMode& hm = g->mode(m);
    if (m == 0 || hm.nyquist) return;
    const double k = hm.magnitude;
    std::vector<cplx> tang(n);
    horizontal_divergence(f, m, tang.data());  // i xi' . f'
    const cplx* fn = f.column(dim - 1, m);
    cplx* v = r.v.column(0, m);
    for (int i = 0; i < n; ++i) {
      const double x = z[i];
      auto integrand = [&](double y) {
        const KernelPair minus = residue_kernel_pair(x - y, k);
        const KernelPair plus = residue_kernel_pair(x + y, k);
        const cplx ft = lobatto_interpolate(z, tang.data(), y);
        const cplx fv = lobatto_interpolate(z, fn, y);
        return (minus.even + plus.even) * ft + (minus.odd - plus.odd) * fv;
      };
      auto re = [&](double y) { return integrand(y).real(); };
      auto im = [&](double y) { return integrand(y).imag(); };
      cplx total(0.0);
      // split at y = x where e^{-k|x-y|} has a kink
      if (x > 0.0) total += cplx(gauss::integrate(re, 0.0, x), gauss::integrate(im, 0.0, x));
      if (x < depth) total += cplx(gauss::integrate(re, x, depth), gauss::integrate(im, x, depth));
      v[i] = -total / (2.0 * std::numbers::pi);
    }
    const cplx top = v[n - 1];
    cplx* w = r.w.column(0, m);
    cplx* u = r.u.column(0, m);
    for (int i = 0; i < n; ++i) {
      const double h = layer_harmonic_kernel(1, z[i], depth, k, depth) +
                       layer_harmonic_kernel(2, z[i], depth, k, depth);
      w[i] = -h * top;
      u[i] = v[i] + w[i];
    }
  });
  return r;
}

WeakResidual weak_divergence(const SpectralField& p) {
  const GridPtr& g = p.grid();
  const int dim = g->dim();
  if (p.components() != dim) throw Error(ErrorCode::InvalidArgument, "need a vector field");
  const int n = g->n_vertical();
  const auto& w = g->vertical_weights();
  std::vector<cplx> hdiv(n);
  double res = 0.0, scale = 0.0;
  for (std::size_t m = 0; m < g->modes(); ++m) {
    horizontal_divergence(p, m, hdiv.data());
    Eigen::Map<const Eigen::VectorXcd> pn(p.column(dim - 1, m), n);
    const Eigen::VectorXcd dpn = g->d1() * pn;
    for (int j = 0; j < n - 1; ++j) {
      cplx r = w[j] * (hdiv[j] + dpn[j]);
      double s = w[j] * (std::abs(hdiv[j]) + std::abs(dpn[j]));
      if (j == 0) {
        r += pn[0];
        s += std::abs(pn[0]);
      }
      res += std::norm(r);
      scale += s * s;
    }
  }
  return {std::sqrt(res), std::sqrt(scale)};
}

cplx weak_identity_residual(const SpectralField& u, const SpectralField& f, const SpectralField& phi) {
  const GridPtr& g = u.grid();
  SpectralField p = gradient(u) - f;
  const SpectralField divp = divergence(p);
  const int n = g->n_vertical();
  const int dim = g->dim();
  const auto& w = g->vertical_weights();
  cplx acc(0.0);
  for (std::size_t m = 0; m < g->modes(); ++m) {
    const cplx* ph = phi.column(0, m);
    const cplx* dv = divp.column(0, m);
    for (int j = 0; j < n - 1; ++j) acc -= w[j] * dv[j] * std::conj(ph[j]);
    acc -= p.column(dim - 1, m)[0] * std::conj(ph[0]);
  }
  return acc * std::pow(g->period(), dim - 1);
}

}  // namespace layerflow
