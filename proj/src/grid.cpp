// SPDX-License-Identifier: Apache-2.0

#include "layerflow/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "layerflow/error.hpp"

namespace layerflow {

namespace {

// The FFTW planner is not reentrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

int signed_index(int i, int n) { return i < n / 2 ? i : i - n; }

template <class T>
T barycentric(const std::vector<double>& z, const T* f, double x) {
  const int n = static_cast<int>(z.size());
  T num{};
  double den = 0.0;
  for (int j = 0; j < n; ++j) {
    const double diff = x - z[j];
    if (diff == 0.0) return f[j];
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    if (j == 0 || j == n - 1) w *= 0.5;
    w /= diff;
    num += w * f[j];
    den += w;
  }
  return num / den;
}

}  // namespace

std::vector<double> lobatto_nodes(int n, double depth) {
  std::vector<double> z(n);
  const int m = n - 1;
  for (int j = 0; j < n; ++j) {
    // sin^2 form keeps symmetric nodes symmetric in floating point
    const double s = std::sin(std::numbers::pi * j / (2.0 * m));
    z[j] = depth * s * s;
  }
  z[0] = 0.0;
  z[m] = depth;
  return z;
}

Eigen::MatrixXd lobatto_derivative_matrix(int n, double depth) {
  const int m = n - 1;
  const double h = std::numbers::pi / (2.0 * m);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  auto weight = [&](int j) {
    double w = (j % 2 == 0) ? 1.0 : -1.0;
    return (j == 0 || j == m) ? 0.5 * w : w;
  };
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double diff = depth * std::sin((i + j) * h) * std::sin((i - j) * h);
      d(i, j) = weight(j) / (weight(i) * diff);
      row += d(i, j);
    }
    d(i, i) = -row;
  }
  return d;
}

std::vector<double> clenshaw_curtis_weights(int n, double depth) {
  std::vector<double> w(n, 0.0);
  const int m = n - 1;
  if (m == 0) {
    w[0] = depth;
    return w;
  }
  for (int j = 0; j <= m; ++j) {
    const double theta = std::numbers::pi * j / m;
    double s = 1.0;
    const int kmax = m / 2;
    for (int k = 1; k <= kmax; ++k) {
      const double b = (2 * k == m) ? 1.0 : 2.0;
      s -= b * std::cos(2.0 * k * theta) / (4.0 * k * k - 1.0);
    }
    const double c = (j == 0 || j == m) ? 1.0 : 2.0;
    w[j] = c * s / m * 0.5 * depth;
  }
  return w;
}

double lobatto_interpolate(const std::vector<double>& nodes, const double* values, double z) {
  return barycentric(nodes, values, z);
}

cplx lobatto_interpolate(const std::vector<double>& nodes, const cplx* values, double z) {
  return barycentric(nodes, values, z);
}

std::shared_ptr<const LayerGrid> LayerGrid::make(int dim, double depth, double period,
                                                 int n_horizontal, int n_vertical) {
  if (dim != 2 && dim != 3)
    throw Error(ErrorCode::InvalidArgument, "dimension must be 2 or 3");
  if (!(depth > 0.0) || !(period > 0.0))
    throw Error(ErrorCode::InvalidArgument, "depth and period must be positive");
  if (n_horizontal <= 0 || n_horizontal % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "n_horizontal must be positive and even");
  if (n_vertical < 3)
    throw Error(ErrorCode::InvalidArgument, "n_vertical must be at least 3");

  std::shared_ptr<LayerGrid> g(new LayerGrid());
  g->dim_ = dim;
  g->depth_ = depth;
  g->period_ = period;
  g->nh_ = n_horizontal;
  g->nz_ = n_vertical;
  g->nmodes_ = dim == 2 ? n_horizontal : std::size_t(n_horizontal) * n_horizontal;
  g->wh_ = std::pow(period / n_horizontal, dim - 1);
  g->z_ = lobatto_nodes(n_vertical, depth);
  g->wz_ = clenshaw_curtis_weights(n_vertical, depth);
  g->d1_ = lobatto_derivative_matrix(n_vertical, depth);
  g->d2_ = g->d1_ * g->d1_;

  const double k0 = 2.0 * std::numbers::pi / period;
  g->mode_table_.resize(g->nmodes_);
  g->conj_table_.resize(g->nmodes_);
  const int nh = n_horizontal;
  for (std::size_t m = 0; m < g->nmodes_; ++m) {
    HorizontalMode& hm = g->mode_table_[m];
    int raw[2] = {0, 0};
    if (dim == 2) {
      raw[0] = static_cast<int>(m);
    } else {
      raw[0] = static_cast<int>(m / nh);
      raw[1] = static_cast<int>(m % nh);
    }
    double mag2 = 0.0;
    for (int a = 0; a < dim - 1; ++a) {
      hm.index[a] = signed_index(raw[a], nh);
      hm.nyquist = hm.nyquist || raw[a] == nh / 2;
      hm.frequency[a] = k0 * hm.index[a];
      mag2 += hm.frequency[a] * hm.frequency[a];
    }
    hm.magnitude = std::sqrt(mag2);
    int craw[2] = {0, 0};
    for (int a = 0; a < dim - 1; ++a) craw[a] = (nh - raw[a]) % nh;
    g->conj_table_[m] = dim == 2 ? std::size_t(craw[0]) : std::size_t(craw[0]) * nh + craw[1];
  }

  int shape[2] = {nh, nh};
  const int howmany = n_vertical;
  {
    std::lock_guard lock(planner_mutex());
    auto* buf = fftw_alloc_complex(g->nmodes_ * n_vertical);
    g->forward_plan_ = fftw_plan_many_dft(dim - 1, shape, howmany, buf, nullptr, howmany, 1, buf,
                                          nullptr, howmany, 1, FFTW_FORWARD,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
    g->backward_plan_ = fftw_plan_many_dft(dim - 1, shape, howmany, buf, nullptr, howmany, 1, buf,
                                           nullptr, howmany, 1, FFTW_BACKWARD,
                                           FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
  }
  if (!g->forward_plan_ || !g->backward_plan_)
    throw Error(ErrorCode::InvalidArgument, "FFT planning failed");
  return g;
}

LayerGrid::~LayerGrid() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

double LayerGrid::horizontal_coordinate(std::size_t p, int dir) const {
  const std::size_t i = (dim_ == 2 || dir == 1) ? p % nh_ : p / nh_;
  return period_ * static_cast<double>(i) / nh_;
}

bool LayerGrid::same_as(const LayerGrid& o) const {
  return this == &o || (dim_ == o.dim_ && depth_ == o.depth_ && period_ == o.period_ &&
                        nh_ == o.nh_ && nz_ == o.nz_);
}

void LayerGrid::fft_forward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
  const double s = 1.0 / static_cast<double>(nmodes_);
  const std::size_t total = nmodes_ * nz_;
  for (std::size_t i = 0; i < total; ++i) data[i] *= s;
}

void LayerGrid::fft_backward(cplx* data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), p, p);
}

}  // namespace layerflow
