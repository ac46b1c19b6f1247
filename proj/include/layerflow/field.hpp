// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "layerflow/grid.hpp"

namespace layerflow {

/// Horizontal Fourier coefficients at the vertical nodes. Storage is
/// component-major, then mode, then node; a column (component, mode) is
/// contiguous so per-mode vertical operators act on plain arrays.
/// Vector fields have dim components, matrix fields dim*dim with entry (i,j)
/// at component i*dim+j.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(GridPtr grid, int components);

  const GridPtr& grid() const { return grid_; }
  int components() const { return ncomp_; }
  std::size_t size() const { return data_.size(); }

  cplx* column(int comp, std::size_t mode) { return data_.data() + offset(comp, mode); }
  const cplx* column(int comp, std::size_t mode) const { return data_.data() + offset(comp, mode); }
  cplx& at(int comp, std::size_t mode, int node) { return data_[offset(comp, mode) + node]; }
  const cplx& at(int comp, std::size_t mode, int node) const {
    return data_[offset(comp, mode) + node];
  }

  std::vector<cplx>& data() { return data_; }
  const std::vector<cplx>& data() const { return data_; }

  SpectralField component(int comp) const;
  void set_component(int comp, const SpectralField& scalar);

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(double s);
  double max_abs() const;
  /// Zeroes Nyquist modes and averages each coefficient with the conjugate
  /// of its mirror so the field is exactly the transform of a real field.
  void enforce_real();

 private:
  std::size_t offset(int comp, std::size_t mode) const {
    return (std::size_t(comp) * grid_->modes() + mode) * grid_->n_vertical();
  }
  GridPtr grid_;
  int ncomp_ = 0;
  std::vector<cplx> data_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

/// Nodal samples; index (component, horizontal point, node) laid out like
/// SpectralField.
class PhysicalField {
 public:
  PhysicalField() = default;
  PhysicalField(GridPtr grid, int components);

  const GridPtr& grid() const { return grid_; }
  int components() const { return ncomp_; }
  double& at(int comp, std::size_t point, int node) { return data_[offset(comp, point) + node]; }
  double at(int comp, std::size_t point, int node) const {
    return data_[offset(comp, point) + node];
  }
  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t offset(int comp, std::size_t point) const {
    return (std::size_t(comp) * grid_->points() + point) * grid_->n_vertical();
  }
  GridPtr grid_;
  int ncomp_ = 0;
  std::vector<double> data_;
};

/// Samples fn(x, z) into a physical field; x has dim-1 entries.
PhysicalField sample(const GridPtr& grid, int components,
                     const std::function<void(const double* x, double z, double* out)>& fn);

/// Real field built from random coefficients on horizontal modes with
/// |k_a| <= max_mode and Chebyshev polynomials of degree <= max_degree in z.
SpectralField random_smooth_field(const GridPtr& grid, int components, std::mt19937_64& rng,
                                  int max_mode = 3, int max_degree = 8);

SpectralField forward_transform(const PhysicalField& f);
PhysicalField inverse_transform(const SpectralField& f);
/// Largest imaginary part produced by the inverse transform, relative to the
/// largest real part. Diagnoses broken Hermitian symmetry.
double imaginary_leakage(const SpectralField& f);

void require_same_grid(const SpectralField& a, const SpectralField& b);

/// Derivative along direction dir (dir < dim-1 horizontal, dim-1 vertical).
SpectralField partial(const SpectralField& f, int dir);
SpectralField vertical_derivative(const SpectralField& f, int order);
/// Scalar -> vector, vector -> matrix with entry (i,j) = d_j f_i.
SpectralField gradient(const SpectralField& f);
/// Vector -> scalar; matrix -> vector with entry i = sum_j d_j T_ij.
SpectralField divergence(const SpectralField& f);
SpectralField laplacian(const SpectralField& f);

}  // namespace layerflow
