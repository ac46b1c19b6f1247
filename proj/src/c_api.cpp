// SPDX-License-Identifier: Apache-2.0

#include "layerflow/layerflow.h"

#include <exception>
#include <new>
#include <string>

#include "layerflow/config.hpp"
#include "layerflow/error.hpp"
#include "layerflow/global_solver.hpp"
#include "layerflow/helmholtz.hpp"
#include "layerflow/kernels.hpp"
#include "layerflow/scenarios.hpp"
#include "layerflow/weak_dn.hpp"

struct lf_config {
  layerflow::RunConfig cfg;
};

struct lf_grid {
  layerflow::GridPtr grid;
};

namespace {

thread_local std::string last_error;

template <class Body>
lf_status guarded(Body&& body) {
  try {
    body();
    last_error.clear();
    return LF_OK;
  } catch (const layerflow::Error& e) {
    last_error = e.what();
    return static_cast<lf_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return LF_ERR_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw layerflow::Error(layerflow::ErrorCode::InvalidArgument, what);
}

layerflow::SpectralField load(const layerflow::GridPtr& g, int comps, const double* data) {
  layerflow::PhysicalField f(g, comps);
  f.data().assign(data, data + f.data().size());
  return layerflow::forward_transform(f);
}

void store(const layerflow::SpectralField& f, double* out) {
  const layerflow::PhysicalField p = layerflow::inverse_transform(f);
  std::copy(p.data().begin(), p.data().end(), out);
}

}  // namespace

extern "C" {

const char* lf_last_error(void) { return last_error.c_str(); }
const char* lf_version(void) { return "1.0.0"; }

lf_status lf_config_parse(const char* text, lf_config** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new lf_config{layerflow::parse_config(text)};
  });
}

lf_status lf_config_load(const char* path, lf_config** out) {
  return guarded([&] {
    require(path && out, "null argument");
    *out = new lf_config{layerflow::load_config(path)};
  });
}

lf_status lf_config_set_seed(lf_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "null config");
    cfg->cfg.seed = seed;
  });
}

void lf_config_free(lf_config* cfg) { delete cfg; }

int lf_scenario_count(void) { return static_cast<int>(layerflow::scenario_names().size()); }

const char* lf_scenario_name(int index) {
  const auto& names = layerflow::scenario_names();
  if (index < 0 || index >= static_cast<int>(names.size())) return nullptr;
  return names[index].c_str();
}

lf_status lf_run_scenario(const char* subcommand, const lf_config* cfg, const char* out_dir,
                          int* all_passed) {
  return guarded([&] {
    require(subcommand && cfg && out_dir && all_passed, "null argument");
    const auto rep = layerflow::run_scenario(subcommand, cfg->cfg, out_dir);
    *all_passed = rep.passed() ? 1 : 0;
  });
}

lf_status lf_residue_kernel_pair(double a, double xi_mag, double* even, double* odd) {
  return guarded([&] {
    require(even && odd, "null output");
    const auto k = layerflow::residue_kernel_pair(a, xi_mag);
    *even = k.even;
    *odd = k.odd;
  });
}

lf_status lf_layer_harmonic_kernel(int branch, double x, double y, double xi_mag, double depth,
                                   double* out) {
  return guarded([&] {
    require(out, "null output");
    *out = layerflow::layer_harmonic_kernel(branch, x, y, xi_mag, depth);
  });
}

lf_status lf_smallness_gate(double c0, double m4, double* delta0, double* eps0) {
  return guarded([&] {
    require(delta0 && eps0, "null output");
    const auto g = layerflow::smallness_gate(c0, m4);
    *delta0 = g.delta0;
    *eps0 = g.eps0;
  });
}

lf_status lf_decay_fit(const double* times, const double* values, size_t n, double burn_in,
                       double* rate, double* r_squared) {
  return guarded([&] {
    require(times && values && rate && r_squared, "null argument");
    const auto f = layerflow::decay_fit({times, times + n}, {values, values + n}, burn_in);
    *rate = f.rate;
    *r_squared = f.r_squared;
  });
}

lf_status lf_grid_create(int dim, double depth, double period, int n_horizontal, int n_vertical,
                         lf_grid** out) {
  return guarded([&] {
    require(out, "null output");
    *out = new lf_grid{layerflow::LayerGrid::make(dim, depth, period, n_horizontal, n_vertical)};
  });
}

void lf_grid_free(lf_grid* grid) { delete grid; }

lf_status lf_grid_sample_count(const lf_grid* grid, size_t* count) {
  return guarded([&] {
    require(grid && count, "null argument");
    *count = grid->grid->points() * static_cast<size_t>(grid->grid->n_vertical());
  });
}

lf_status lf_grid_coordinates(const lf_grid* grid, double* coords) {
  return guarded([&] {
    require(grid && coords, "null argument");
    const auto& g = *grid->grid;
    const int dim = g.dim();
    for (std::size_t p = 0; p < g.points(); ++p)
      for (int j = 0; j < g.n_vertical(); ++j) {
        double* c = coords + (p * g.n_vertical() + j) * dim;
        for (int a = 0; a < dim - 1; ++a) c[a] = g.horizontal_coordinate(p, a);
        c[dim - 1] = g.vertical_nodes()[j];
      }
  });
}

lf_status lf_solve_weak_dn(const lf_grid* grid, const double* f, double* u) {
  return guarded([&] {
    require(grid && f && u, "null argument");
    store(layerflow::solve_weak_dn(load(grid->grid, grid->grid->dim(), f)), u);
  });
}

lf_status lf_helmholtz_project(const lf_grid* grid, const double* f, double* solenoidal,
                               double* potential) {
  return guarded([&] {
    require(grid && f && solenoidal && potential, "null argument");
    const auto parts = layerflow::helmholtz_project(load(grid->grid, grid->grid->dim(), f));
    store(parts.solenoidal, solenoidal);
    store(parts.potential, potential);
  });
}

}  // extern "C"
