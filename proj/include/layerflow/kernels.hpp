// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "layerflow/grid.hpp"

namespace layerflow {

struct KernelPair {
  double even = 0.0;  // integral of e^{i a s} / (s^2 + k^2) over s
  double odd = 0.0;   // integral of i s e^{i a s} / (s^2 + k^2) over s
};

/// Closed forms pi e^{-|a|k}/k and -pi e^{-|a|k} sign(a), k = xi_mag.
KernelPair residue_kernel_pair(double a, double xi_mag);

/// Numerical evaluation of the same two integrals: adaptive Gauss-Kronrod
/// on [-window, window] plus oscillatory Ooura quadrature for the tails,
/// which decay too slowly to drop.
KernelPair residue_kernel_quadrature(double a, double xi_mag, double window = 200.0);

/// e^{-k (y + (-1)^branch x)} / (1 + e^{-2 k d}); 1/2 at k = 0.
double layer_harmonic_kernel(int branch, double x, double y, double xi_mag, double depth);

/// Symbol of horizontal frequency; receives horizontal_dims entries.
using Symbol = std::function<cplx(const double* xi)>;

struct SymbolBoundReport {
  std::vector<double> worst_ratio;  // per derivative order
  double cap = 0.0;
  bool pass = false;
};

/// Samples sup |d^alpha m(xi)| |xi|^{|alpha|} over |alpha| = order using
/// central differences with step 0.01|xi| at log-spaced magnitudes in
/// [1e-3, 1e3] and seeded random directions. Passes when every order is
/// finite and at most cap_factor times the order-0 supremum.
SymbolBoundReport symbol_bound_check(const Symbol& symbol, int horizontal_dims, int max_order,
                                     int sample_count, std::uint64_t seed,
                                     double cap_factor = 10.0);

}  // namespace layerflow
