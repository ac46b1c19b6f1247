// SPDX-License-Identifier: Apache-2.0

#include "layerflow/field.hpp"

#include <algorithm>
#include <cmath>

#include "layerflow/error.hpp"

namespace layerflow {

SpectralField::SpectralField(GridPtr grid, int components)
    : grid_(std::move(grid)), ncomp_(components) {
  if (!grid_ || components <= 0) throw Error(ErrorCode::InvalidArgument, "bad field shape");
  data_.assign(std::size_t(components) * grid_->modes() * grid_->n_vertical(), cplx(0.0, 0.0));
}

SpectralField SpectralField::component(int comp) const {
  SpectralField out(grid_, 1);
  const std::size_t block = grid_->modes() * grid_->n_vertical();
  std::copy_n(data_.begin() + comp * block, block, out.data_.begin());
  return out;
}

void SpectralField::set_component(int comp, const SpectralField& scalar) {
  require_same_grid(*this, scalar);
  const std::size_t block = grid_->modes() * grid_->n_vertical();
  std::copy_n(scalar.data_.begin(), block, data_.begin() + comp * block);
}

void require_same_grid(const SpectralField& a, const SpectralField& b) {
  if (!a.grid() || !b.grid() || !a.grid()->same_as(*b.grid()))
    throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same_grid(*this, o);
  if (o.ncomp_ != ncomp_) throw Error(ErrorCode::GridMismatch, "component count mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same_grid(*this, o);
  if (o.ncomp_ != ncomp_) throw Error(ErrorCode::GridMismatch, "component count mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

double SpectralField::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) m = std::max(m, std::abs(v));
  return m;
}

void SpectralField::enforce_real() {
  const int nz = grid_->n_vertical();
  for (int c = 0; c < ncomp_; ++c) {
    for (std::size_t m = 0; m < grid_->modes(); ++m) {
      cplx* col = column(c, m);
      if (grid_->mode(m).nyquist) {
        std::fill_n(col, nz, cplx(0.0, 0.0));
        continue;
      }
      const std::size_t mc = grid_->conjugate_mode(m);
      if (mc < m) continue;
      cplx* mirror = column(c, mc);
      for (int j = 0; j < nz; ++j) {
        const cplx avg = 0.5 * (col[j] + std::conj(mirror[j]));
        col[j] = avg;
        mirror[j] = std::conj(avg);
      }
    }
  }
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

PhysicalField::PhysicalField(GridPtr grid, int components)
    : grid_(std::move(grid)), ncomp_(components) {
  if (!grid_ || components <= 0) throw Error(ErrorCode::InvalidArgument, "bad field shape");
  data_.assign(std::size_t(components) * grid_->points() * grid_->n_vertical(), 0.0);
}

PhysicalField sample(const GridPtr& grid, int components,
                     const std::function<void(const double*, double, double*)>& fn) {
  PhysicalField out(grid, components);
  const auto& z = grid->vertical_nodes();
  std::vector<double> buf(components);
  double x[2] = {0.0, 0.0};
  for (std::size_t p = 0; p < grid->points(); ++p) {
    for (int a = 0; a < grid->horizontal_dims(); ++a) x[a] = grid->horizontal_coordinate(p, a);
    for (int j = 0; j < grid->n_vertical(); ++j) {
      fn(x, z[j], buf.data());
      for (int c = 0; c < components; ++c) out.at(c, p, j) = buf[c];
    }
  }
  return out;
}

SpectralField random_smooth_field(const GridPtr& grid, int components, std::mt19937_64& rng,
                                  int max_mode, int max_degree) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SpectralField out(grid, components);
  const int nz = grid->n_vertical();
  const auto& z = grid->vertical_nodes();
  std::vector<cplx> coef(max_degree + 1);
  for (int c = 0; c < components; ++c) {
    for (std::size_t m = 0; m < grid->modes(); ++m) {
      const HorizontalMode& hm = grid->mode(m);
      if (hm.nyquist || std::abs(hm.index[0]) > max_mode || std::abs(hm.index[1]) > max_mode)
        continue;
      const std::size_t mc = grid->conjugate_mode(m);
      if (mc < m) continue;
      for (auto& a : coef) a = cplx(u(rng), mc == m ? 0.0 : u(rng));
      cplx* col = out.column(c, m);
      for (int j = 0; j < nz; ++j) {
        const double x = 2.0 * z[j] / grid->depth() - 1.0;
        double t0 = 1.0, t1 = x;
        cplx acc = coef[0];
        for (int l = 1; l <= max_degree; ++l) {
          acc += coef[l] * t1;
          const double t2 = 2.0 * x * t1 - t0;
          t0 = t1;
          t1 = t2;
        }
        col[j] = acc;
      }
      if (mc != m) {
        cplx* mirror = out.column(c, mc);
        for (int j = 0; j < nz; ++j) mirror[j] = std::conj(col[j]);
      }
    }
  }
  return out;
}

SpectralField forward_transform(const PhysicalField& f) {
  const GridPtr& g = f.grid();
  SpectralField out(g, f.components());
  const std::size_t block = g->modes() * g->n_vertical();
  for (int c = 0; c < f.components(); ++c) {
    cplx* dst = out.data().data() + c * block;
    const double* src = f.data().data() + c * block;
    for (std::size_t i = 0; i < block; ++i) dst[i] = cplx(src[i], 0.0);
    g->fft_forward(dst);
    for (std::size_t m = 0; m < g->modes(); ++m)
      if (g->mode(m).nyquist) std::fill_n(dst + m * g->n_vertical(), g->n_vertical(), cplx(0.0));
  }
  return out;
}

namespace {
std::vector<cplx> backward_raw(const SpectralField& f, int c) {
  const GridPtr& g = f.grid();
  const std::size_t block = g->modes() * g->n_vertical();
  std::vector<cplx> buf(f.data().begin() + c * block, f.data().begin() + (c + 1) * block);
  g->fft_backward(buf.data());
  return buf;
}
}  // namespace

PhysicalField inverse_transform(const SpectralField& f) {
  const GridPtr& g = f.grid();
  PhysicalField out(g, f.components());
  const std::size_t block = g->modes() * g->n_vertical();
  for (int c = 0; c < f.components(); ++c) {
    const auto buf = backward_raw(f, c);
    double* dst = out.data().data() + c * block;
    for (std::size_t i = 0; i < block; ++i) dst[i] = buf[i].real();
  }
  return out;
}

double imaginary_leakage(const SpectralField& f) {
  double re = 0.0, im = 0.0;
  for (int c = 0; c < f.components(); ++c) {
    for (const auto& v : backward_raw(f, c)) {
      re = std::max(re, std::abs(v.real()));
      im = std::max(im, std::abs(v.imag()));
    }
  }
  return re > 0.0 ? im / re : im;
}

SpectralField vertical_derivative(const SpectralField& f, int order) {
  if (order != 1 && order != 2)
    throw Error(ErrorCode::InvalidArgument, "vertical derivative order must be 1 or 2");
  const GridPtr& g = f.grid();
  const int nz = g->n_vertical();
  if (nz < order + 2) throw Error(ErrorCode::InvalidArgument, "too few vertical nodes");
  const Eigen::MatrixXd& d = order == 1 ? g->d1() : g->d2();
  SpectralField out(g, f.components());
  const std::size_t cols = std::size_t(f.components()) * g->modes();
  Eigen::Map<const Eigen::MatrixXcd> in(f.data().data(), nz, Eigen::Index(cols));
  Eigen::Map<Eigen::MatrixXcd> res(out.data().data(), nz, Eigen::Index(cols));
  res.noalias() = d * in;
  return out;
}

SpectralField partial(const SpectralField& f, int dir) {
  const GridPtr& g = f.grid();
  if (dir < 0 || dir >= g->dim()) throw Error(ErrorCode::InvalidArgument, "bad direction");
  if (dir == g->dim() - 1) return vertical_derivative(f, 1);
  SpectralField out(g, f.components());
  const int nz = g->n_vertical();
  for (int c = 0; c < f.components(); ++c) {
    for (std::size_t m = 0; m < g->modes(); ++m) {
      const HorizontalMode& hm = g->mode(m);
      const cplx factor = hm.nyquist ? cplx(0.0) : cplx(0.0, hm.frequency[dir]);
      const cplx* src = f.column(c, m);
      cplx* dst = out.column(c, m);
      for (int j = 0; j < nz; ++j) dst[j] = factor * src[j];
    }
  }
  return out;
}

SpectralField gradient(const SpectralField& f) {
  const GridPtr& g = f.grid();
  const int n = g->dim();
  SpectralField out(g, f.components() * n);
  for (int dir = 0; dir < n; ++dir) {
    const SpectralField d = partial(f, dir);
    for (int c = 0; c < f.components(); ++c) out.set_component(c * n + dir, d.component(c));
  }
  return out;
}

SpectralField divergence(const SpectralField& f) {
  const GridPtr& g = f.grid();
  const int n = g->dim();
  if (f.components() != n && f.components() != n * n)
    throw Error(ErrorCode::InvalidArgument, "divergence needs a vector or matrix field");
  const int rows = f.components() / n;
  SpectralField out(g, rows);
  for (int dir = 0; dir < n; ++dir) {
    const SpectralField d = partial(f, dir);
    for (int i = 0; i < rows; ++i) {
      SpectralField acc = out.component(i);
      acc += d.component(i * n + dir);
      out.set_component(i, acc);
    }
  }
  return out;
}

SpectralField laplacian(const SpectralField& f) {
  const GridPtr& g = f.grid();
  SpectralField out = vertical_derivative(f, 2);
  const int nz = g->n_vertical();
  for (int c = 0; c < f.components(); ++c) {
    for (std::size_t m = 0; m < g->modes(); ++m) {
      const HorizontalMode& hm = g->mode(m);
      const double k2 = hm.nyquist ? 0.0 : hm.magnitude * hm.magnitude;
      const cplx* src = f.column(c, m);
      cplx* dst = out.column(c, m);
      for (int j = 0; j < nz; ++j) dst[j] -= k2 * src[j];
    }
  }
  return out;
}

}  // namespace layerflow
