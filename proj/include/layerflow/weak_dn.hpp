// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "layerflow/field.hpp"

namespace layerflow {

/// Per-mode solver for (d_N^2 - |xi'|^2) u = s with u(d) = alpha and the
/// natural bottom condition d_N u(0) = beta. The bottom row is the
/// quadrature-weighted combination w_0 (Lu - s)_0 + (d_N u(0) - beta) = 0,
/// which is the test-function-at-node-0 row of the discrete weak form. The
/// interior rows are collocation, so the discrete weak identity holds to
/// round-off while the strong Neumann trace is spectrally accurate.
class WeakDnSolver {
 public:
  explicit WeakDnSolver(GridPtr grid);

  const GridPtr& grid() const { return grid_; }

  /// Weak Dirichlet-Neumann problem with data f (vector field): s = div f,
  /// beta = f_N(0), alpha = 0.
  SpectralField solve(const SpectralField& f) const;

  /// General form: source s (scalar field), bottom flux beta and top value
  /// alpha given per mode (empty means zero).
  SpectralField solve_general(const SpectralField& source, const std::vector<cplx>& bottom_flux,
                              const std::vector<cplx>& top_value) const;

 private:
  const Eigen::PartialPivLU<Eigen::MatrixXd>& factor(std::size_t mode) const;

  GridPtr grid_;
  mutable std::mutex mutex_;
  mutable std::map<long long, std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>>> cache_;
};

SpectralField solve_weak_dn(const SpectralField& f);

struct KernelPathResult {
  SpectralField u;  // v + w
  SpectralField v;  // half-line part from the residue kernels
  SpectralField w;  // harmonic correction restoring u(d) = 0
};

/// Same problem assembled from the explicit layer kernels: v by vertical
/// quadrature of the even/odd-extension kernels, w from the harmonic kernel
/// applied to -v(d). Requires f to vanish at both boundaries. The zero
/// horizontal mode has no kernel representation and uses the BVP.
KernelPathResult solve_weak_dn_kernel_path(const SpectralField& f, int quadrature_order = 64);

/// Weak divergence of p against test functions vanishing at z = d:
/// component j of mode m is w_j (div p)_j + [j = 0] p_N(0), j < n-1.
struct WeakResidual {
  double residual = 0.0;  // l2 over modes and nodes
  double scale = 0.0;     // same functional with each term in absolute value
  double relative() const { return scale > 0.0 ? residual / scale : residual; }
};
WeakResidual weak_divergence(const SpectralField& p);

/// Discrete weak identity (grad u - f, grad phi) for a test function phi
/// (scalar field with phi(d) = 0), written in integrated-by-parts form.
cplx weak_identity_residual(const SpectralField& u, const SpectralField& f, const SpectralField& phi);

}  // namespace layerflow
