// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <utility>
#include <vector>

#include "layerflow/norms.hpp"
#include "layerflow/weak_dn.hpp"

namespace layerflow {

/// T(v, q) = mu (grad v + grad v^T) - q I as a matrix field.
SpectralField stress_tensor(const SpectralField& v, const SpectralField& q, double mu);

/// Resolvent of the layer Stokes problem, no-slip at z = 0 and prescribed
/// stress at z = d, one dense LU per horizontal mode and spectral parameter:
///   lambda v - Div T(v, q) = f,  div v = g,  v(0) = 0,  T(v, q) e_N (d) = h(d).
/// The momentum rows carry the full Div T = mu (Lap v + grad div v) - grad q
/// so nonzero g is handled consistently.
class StokesSolver {
 public:
  struct Result {
    SpectralField v;
    SpectralField q;
  };

  StokesSolver(GridPtr grid, double mu);

  const GridPtr& grid() const { return grid_; }
  double mu() const { return mu_; }

  /// g and h may be null (zero data). h is a vector field; only its values
  /// at the top node are used.
  Result solve(cplx lambda, const SpectralField& f, const SpectralField* g = nullptr,
               const SpectralField* h = nullptr) const;

  /// Largest relative residual over momentum (interior nodes), continuity,
  /// no-slip and top-stress equations.
  double residual(cplx lambda, const Result& r, const SpectralField& f,
                  const SpectralField* g = nullptr, const SpectralField* h = nullptr) const;

 private:
  struct Factors;
  std::shared_ptr<const Factors> factors(cplx lambda) const;

  GridPtr grid_;
  double mu_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const Factors>> cache_;
};

/// Pressure operator K(v): weak Dirichlet-Neumann solve with data
/// mu (Lap v + grad div v) - grad div v and top value 2 mu d_N v_N - div v.
SpectralField pressure_operator_K(const WeakDnSolver& dn, const SpectralField& v, double mu);
SpectralField pressure_operator_K(const SpectralField& v, double mu);

/// Reduced Stokes operator A v = Div T(v, K(v)).
SpectralField apply_reduced_stokes(const WeakDnSolver& dn, const SpectralField& v, double mu);
SpectralField apply_reduced_stokes(const SpectralField& v, double mu);

struct DomainViolation {
  double bottom_velocity = 0.0;   // max |v| at z = 0
  double tangential_stress = 0.0; // max |(mu D(v) e_N)_tau| at z = d
  double weak_divergence = 0.0;   // relative weak divergence
};
DomainViolation domain_violation(const SpectralField& v, double mu);

/// Divergence-free velocity vanishing at z = 0, built from random stream
/// functions z^2 P(x', z): u' = d_N psi, u_N = -div' psi.
SpectralField random_solenoidal(const GridPtr& grid, std::mt19937_64& rng, int max_mode = 3,
                                int max_degree = 6);

/// One implicit Euler step of the Stokes semigroup: resolvent at 1/tau.
StokesSolver::Result semigroup_step(const StokesSolver& solver, const SpectralField& u, double tau);

/// Repeated semigroup steps from u0; samples at t = 0, tau, ..., steps*tau.
/// The pressure at t = 0 is K(u0).
Trajectory semigroup_run(const StokesSolver& solver, const SpectralField& u0, double tau, int steps);

/// Discrete Duhamel integral u^{n+1} = S u^n + tau S F^{n+1}, u^0 = 0, where
/// S is one semigroup step. forcing[n] is F at t_n. Rejects forcing whose
/// relative weak divergence exceeds 1e-6.
Trajectory duhamel_convolve(const StokesSolver& solver, const std::vector<SpectralField>& forcing,
                            double tau);

struct ResolventSample {
  cplx lambda;
  double literal = 0.0;   // |lambda| ||v|| / ||f||
  double full = 0.0;      // (|lambda| ||v|| + |lambda|^{1/2} ||grad v|| + ||v||_{W^2} + ||q||_{W^1}) / ||f||
  double residual = 0.0;  // relative residual of the solve
};

/// Rays arg lambda = +-3pi/4 with |lambda| in {1e-2, ..., 1e2} and the real
/// points 1e-2, 1e-1 near zero.
std::vector<cplx> resolvent_sample_set();
/// Resolvent solves with g = h = 0 for each lambda, measured in L_q.
std::vector<ResolventSample> resolvent_sweep(const StokesSolver& solver, const SpectralField& f,
                                             const std::vector<cplx>& lambdas, double q);

}  // namespace layerflow
