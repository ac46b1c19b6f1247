// SPDX-License-Identifier: Apache-2.0

#include "layerflow/helmholtz.hpp"

#include "layerflow/norms.hpp"

namespace layerflow {

HelmholtzParts helmholtz_project(const WeakDnSolver& solver, const SpectralField& f) {
  HelmholtzParts out;
  out.potential = solver.solve(f);
  out.solenoidal = f - gradient(out.potential);
  return out;
}

HelmholtzParts helmholtz_project(const SpectralField& f) {
  return helmholtz_project(WeakDnSolver(f.grid()), f);
}

IdempotencyReport idempotency_check(const SpectralField& f) {
  WeakDnSolver solver(f.grid());
  const SpectralField once = helmholtz_project(solver, f).solenoidal;
  const SpectralField twice = helmholtz_project(solver, once).solenoidal;
  const double base = lq_norm(once, 2.0);
  const double diff = lq_norm(twice - once, 2.0);
  IdempotencyReport r;
  r.residual = base > 0.0 ? diff / base : diff;
  r.fixpoint = r.residual < 1e-10;
  return r;
}

}  // namespace layerflow
