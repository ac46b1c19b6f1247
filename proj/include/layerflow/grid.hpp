// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace layerflow {

using cplx = std::complex<double>;

/// Discrete frequency of one horizontal Fourier mode.
struct HorizontalMode {
  std::array<int, 2> index{0, 0};
  std::array<double, 2> frequency{0.0, 0.0};
  double magnitude = 0.0;
  bool nyquist = false;
};

/// Periodic-in-x', Chebyshev-in-z grid on the layer of depth d. Vertical
/// nodes are Gauss-Lobatto points mapped to [0, d], increasing, with node 0
/// on the rigid bottom and node n_vertical-1 on the free top.
class LayerGrid : public std::enable_shared_from_this<LayerGrid> {
 public:
  static std::shared_ptr<const LayerGrid> make(int dim, double depth, double period,
                                               int n_horizontal, int n_vertical);
  ~LayerGrid();

  int dim() const { return dim_; }
  int horizontal_dims() const { return dim_ - 1; }
  double depth() const { return depth_; }
  double period() const { return period_; }
  int n_horizontal() const { return nh_; }
  int n_vertical() const { return nz_; }
  /// Number of horizontal modes, equal to the number of horizontal points.
  std::size_t modes() const { return nmodes_; }
  std::size_t points() const { return nmodes_; }

  const std::vector<double>& vertical_nodes() const { return z_; }
  /// Clenshaw-Curtis weights on [0, d].
  const std::vector<double>& vertical_weights() const { return wz_; }
  /// Area element of one horizontal point, (L/n)^(N-1).
  double horizontal_weight() const { return wh_; }

  const Eigen::MatrixXd& d1() const { return d1_; }
  const Eigen::MatrixXd& d2() const { return d2_; }

  const HorizontalMode& mode(std::size_t m) const { return mode_table_[m]; }
  /// Mode holding the frequency -xi' of mode m.
  std::size_t conjugate_mode(std::size_t m) const { return conj_table_[m]; }
  /// Physical coordinate of horizontal point p along direction dir.
  double horizontal_coordinate(std::size_t p, int dir) const;

  bool same_as(const LayerGrid& other) const;

  /// Fourier transforms over the horizontal directions of nz interleaved
  /// columns (index = point * nz + node). Forward is normalized by 1/points.
  void fft_forward(cplx* data) const;
  void fft_backward(cplx* data) const;

 private:
  LayerGrid() = default;

  int dim_ = 2;
  double depth_ = 1.0;
  double period_ = 1.0;
  int nh_ = 0;
  int nz_ = 0;
  std::size_t nmodes_ = 0;
  double wh_ = 0.0;
  std::vector<double> z_;
  std::vector<double> wz_;
  Eigen::MatrixXd d1_;
  Eigen::MatrixXd d2_;
  std::vector<HorizontalMode> mode_table_;
  std::vector<std::size_t> conj_table_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

using GridPtr = std::shared_ptr<const LayerGrid>;

/// Gauss-Lobatto nodes on [0, d] and the matching differentiation matrix
/// and Clenshaw-Curtis weights.
std::vector<double> lobatto_nodes(int n, double depth);
Eigen::MatrixXd lobatto_derivative_matrix(int n, double depth);
std::vector<double> clenshaw_curtis_weights(int n, double depth);

/// Barycentric interpolation of nodal values on the Lobatto grid to z.
double lobatto_interpolate(const std::vector<double>& nodes, const double* values, double z);
cplx lobatto_interpolate(const std::vector<double>& nodes, const cplx* values, double z);

}  // namespace layerflow
