// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "layerflow/weak_dn.hpp"

namespace layerflow {

struct HelmholtzParts {
  SpectralField solenoidal;  // f - grad potential
  SpectralField potential;   // weak Dirichlet-Neumann solution, zero at z = d
};

HelmholtzParts helmholtz_project(const SpectralField& f);
HelmholtzParts helmholtz_project(const WeakDnSolver& solver, const SpectralField& f);

struct IdempotencyReport {
  double residual = 0.0;  // ||P(P f) - P f|| / ||P f||, or absolute when P f = 0
  bool fixpoint = false;  // residual below 1e-10
};

IdempotencyReport idempotency_check(const SpectralField& f);

}  // namespace layerflow
