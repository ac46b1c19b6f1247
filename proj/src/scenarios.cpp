// SPDX-License-Identifier: Apache-2.0

#include "layerflow/scenarios.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <random>
#include <sstream>

#include "layerflow/error.hpp"
#include "layerflow/global_solver.hpp"
#include "layerflow/helmholtz.hpp"
#include "layerflow/kernels.hpp"
#include "layerflow/lagrangian.hpp"
#include "layerflow/parallel.hpp"
#include "layerflow/weak_dn.hpp"

namespace layerflow {

bool ScenarioReport::passed() const {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

namespace {

namespace fs = std::filesystem;

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& header) : path_(path) {
    file_ = std::fopen(path.c_str(), "w");
    if (!file_) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (std::size_t i = 0; i < header.size(); ++i)
      std::fprintf(file_, "%s%s", i ? "," : "", header[i].c_str());
    std::fputc('\n', file_);
  }
  ~Csv() {
    if (file_) std::fclose(file_);
  }
  Csv(const Csv&) = delete;
  Csv& operator=(const Csv&) = delete;

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i)
      std::fprintf(file_, "%s%.17g", i ? "," : "", values[i]);
    std::fputc('\n', file_);
  }

 private:
  fs::path path_;
  std::FILE* file_ = nullptr;
};

struct Context {
  const RunConfig& cfg;
  fs::path dir;
  ScenarioReport& report;

  GridPtr grid() const {
    return LayerGrid::make(cfg.dim, cfg.depth, cfg.period, cfg.n_horizontal, cfg.n_vertical);
  }
  void check(const std::string& name, bool pass, double value) {
    report.checks.push_back({name, pass && std::isfinite(value), value});
  }
  void note(const std::string& text) { report.notes.push_back(text); }
  template <class T>
  void note(const std::string& key, T value) {
    std::ostringstream os;
    os.precision(17);
    os << key << " = " << value;
    note(os.str());
  }
  std::unique_ptr<Csv> csv(const std::string& name, const std::vector<std::string>& header) {
    report.files.push_back(name);
    return std::make_unique<Csv>(dir / name, header);
  }
};

double rel_max_diff(const SpectralField& a, const SpectralField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  const double s = std::max(a.max_abs(), b.max_abs());
  return s > 0 ? m / s : m;
}

std::vector<double> norm_series(const Trajectory& t, double q) {
  std::vector<double> v;
  for (const auto& u : t.velocity) v.push_back(lq_norm(u, q));
  return v;
}

double det_error(const PhysicalField& jac) {
  const GridPtr& g = jac.grid();
  const int dim = g->dim();
  double worst = 0.0;
  for (std::size_t p = 0; p < g->points(); ++p)
    for (int j = 0; j < g->n_vertical(); ++j) {
      Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
      for (int r = 0; r < dim; ++r)
        for (int s = 0; s < dim; ++s) m(r, s) = jac.at(r * dim + s, p, j);
      worst = std::max(worst, std::abs(m.determinant() - 1.0));
    }
  return worst;
}

// half the fitted decay rate of the semigroup started from the single-mode shape
double auto_gamma(const StokesSolver& solver, const RunConfig& cfg) {
  if (cfg.gamma0 > 0.0) return cfg.gamma0;
  const int steps = std::max(step_count(cfg.horizon, cfg.tau), 20);
  const Trajectory free = semigroup_run(solver, single_mode_data(solver.grid(), 1.0, cfg.q), cfg.tau, steps);
  return 0.5 * decay_fit(free.times, norm_series(free, 2.0), 0.2).rate;
}

void verify_kernels(Context& ctx) {
  const std::vector<double> values{0.25, 0.5, 1.0, 2.0, 4.0};
  const std::vector<std::string> header{"a", "xi_mag", "closed_form_1", "quadrature_1", "rel_err_1",
                                        "closed_form_2", "quadrature_2", "rel_err_2"};
  auto out = ctx.csv("verify-kernels.csv", header);
  auto alias = ctx.csv("kernels.csv", header);
  double worst = 0.0;
  for (double a : values)
    for (double k : values) {
      const KernelPair c = residue_kernel_pair(a, k);
      const KernelPair q = residue_kernel_quadrature(a, k);
      const double e1 = std::abs(q.even - c.even) / std::abs(c.even);
      const double e2 = std::abs(q.odd - c.odd) / std::abs(c.odd);
      worst = std::max({worst, e1, e2});
      const std::vector<double> row{a, k, c.even, q.even, e1, c.odd, q.odd, e2};
      out->row(row);
      alias->row(row);
    }
  ctx.check("residue_kernels", worst < 1e-4, worst);

  const int hd = ctx.cfg.dim - 1;
  const double d = ctx.cfg.depth;
  auto mag = [hd](const double* xi) {
    double s = 0;
    for (int i = 0; i < hd; ++i) s += xi[i] * xi[i];
    return std::sqrt(s);
  };
  std::vector<std::pair<std::string, Symbol>> symbols;
  for (int j = 0; j < hd; ++j)
    symbols.push_back({"riesz_" + std::to_string(j + 1),
                       [j, mag](const double* xi) { return cplx(0.0, xi[j] / mag(xi)); }});
  for (double a : {0.0, 1.0})
    symbols.push_back({a == 0.0 ? "exp_a0" : "exp_a1",
                       [a, mag](const double* xi) { return cplx(std::exp(-a * mag(xi)), 0.0); }});
  symbols.push_back({"layer_denominator", [d, mag](const double* xi) {
                       return cplx(1.0 / (1.0 + std::exp(-2.0 * mag(xi) * d)), 0.0);
                     }});
  auto sym = ctx.csv("symbols.csv", {"symbol", "order", "worst_ratio", "cap"});
  std::uint64_t seed = ctx.cfg.seed;
  for (std::size_t s = 0; s < symbols.size(); ++s) {
    const SymbolBoundReport r = symbol_bound_check(symbols[s].second, hd, 3, 200, seed++);
    double worst_ratio = 0.0;
    for (std::size_t o = 0; o < r.worst_ratio.size(); ++o) {
      sym->row({double(s), double(o), r.worst_ratio[o], r.cap});
      worst_ratio = std::max(worst_ratio, r.worst_ratio[o]);
    }
    ctx.check("symbol_bound_" + symbols[s].first, r.pass, worst_ratio);
  }
}

void weak_dn(Context& ctx) {
  const GridPtr g = ctx.grid();
  const int dim = g->dim();
  const double k = 2 * std::numbers::pi / g->period(), c = std::numbers::pi / (2 * g->depth());
  const SpectralField grad = forward_transform(sample(g, dim, [&](const double* x, double z, double* o) {
    for (int i = 0; i < dim; ++i) o[i] = 0.0;
    o[0] = k * std::cos(k * x[0]) * std::cos(c * z);
    o[dim - 1] = -c * std::sin(k * x[0]) * std::sin(c * z);
  }));
  const PhysicalField exact = sample(g, 1, [&](const double* x, double z, double* o) {
    o[0] = std::sin(k * x[0]) * std::cos(c * z);
  });
  const PhysicalField u = inverse_transform(solve_weak_dn(grad));
  double err = 0.0;
  for (std::size_t i = 0; i < u.data().size(); ++i) err = std::max(err, std::abs(u.data()[i] - exact.data()[i]));
  ctx.check("manufactured_recovery", err < 1e-8, err);

  // interior-supported data for the kernel path
  const double d = g->depth();
  const SpectralField f = forward_transform(sample(g, dim, [&](const double* x, double z, double* o) {
    const double b = std::pow(z * (d - z) * 4.0 / (d * d), 4);
    for (int i = 0; i < dim; ++i) o[i] = 0.0;
    o[0] = std::sin(k * x[0]) * b;
    o[dim - 1] = (std::cos(k * x[0]) * (1 + z) + 0.3) * b;
  }));
  const SpectralField bvp = solve_weak_dn(f);
  const KernelPathResult kp = solve_weak_dn_kernel_path(f);
  const double gap = rel_max_diff(bvp, kp.u);
  ctx.check("kernel_path_agreement", gap < 1e-6, gap);

  // profile at the horizontal point where sin(k x) peaks
  auto out = ctx.csv("weak-dn.csv", {"z", "exact", "bvp", "bvp_interior_data", "kernel_path"});
  const PhysicalField bp = inverse_transform(bvp), kq = inverse_transform(kp.u);
  const std::size_t pt = std::size_t(g->n_horizontal() / 4) * (dim == 3 ? g->n_horizontal() : 1);
  for (int j = 0; j < g->n_vertical(); ++j)
    out->row({g->vertical_nodes()[j], exact.at(0, pt, j), u.at(0, pt, j), bp.at(0, pt, j), kq.at(0, pt, j)});
}

void helmholtz(Context& ctx) {
  const GridPtr g = ctx.grid();
  std::mt19937_64 rng(ctx.cfg.seed);
  WeakDnSolver dn(g);
  auto out = ctx.csv("helmholtz.csv", {"field", "reconstruction", "idempotency", "weak_divergence"});
  double rec = 0, idem = 0, wdiv = 0;
  for (int t = 0; t < 10; ++t) {
    const SpectralField f = random_smooth_field(g, g->dim(), rng);
    const HelmholtzParts parts = helmholtz_project(dn, f);
    const double r = lq_norm(f - parts.solenoidal - gradient(parts.potential), ctx.cfg.q) / lq_norm(f, ctx.cfg.q);
    const double i = idempotency_check(f).residual;
    const double w = weak_divergence(parts.solenoidal).relative();
    rec = std::max(rec, r);
    idem = std::max(idem, i);
    wdiv = std::max(wdiv, w);
    out->row({double(t), r, i, w});
  }
  ctx.check("reconstruction", rec < 1e-10, rec);
  ctx.check("idempotency", idem < 1e-10, idem);
  ctx.check("weak_divergence", wdiv < 1e-8, wdiv);
}

void resolvent_sweep(Context& ctx) {
  const GridPtr g = ctx.grid();
  const int dim = g->dim();
  const double mu = ctx.cfg.mu;
  StokesSolver solver(g, mu);

  // polynomial-in-z single-mode state: spectral derivatives are exact for it
  const double k = 2 * std::numbers::pi / g->period();
  const SpectralField v = forward_transform(sample(g, dim, [&](const double* x, double z, double* o) {
    for (int i = 0; i < dim; ++i) o[i] = 0.0;
    o[0] = std::sin(k * x[0]) * z * z * (1 + z);
    o[dim - 1] = std::cos(k * x[0]) * z * z * z + z;
  }));
  const SpectralField q = forward_transform(sample(g, 1, [&](const double* x, double z, double* o) {
    o[0] = std::cos(k * x[0]) * (1 + z * z) + z;
  }));
  double recovery = 0.0;
  for (cplx lam : resolvent_sample_set()) {
    SpectralField f = divergence(stress_tensor(v, q, mu));
    f *= -1.0;
    SpectralField lv = v;
    for (auto& c : lv.data()) c *= lam;
    f += lv;
    const SpectralField gdat = divergence(v);
    const SpectralField h = normal_column(stress_tensor(v, q, mu));
    const auto r = solver.solve(lam, f, &gdat, &h);
    recovery = std::max({recovery, rel_max_diff(r.v, v), rel_max_diff(r.q, q)});
  }
  ctx.check("manufactured_recovery", recovery < 1e-8, recovery);

  std::mt19937_64 rng(ctx.cfg.seed);
  const SpectralField f = random_smooth_field(g, dim, rng);
  const auto samples = resolvent_sweep(solver, f, resolvent_sample_set(), ctx.cfg.q);
  auto out = ctx.csv("resolvent-sweep.csv",
                     {"lambda_re", "lambda_im", "lambda_abs", "literal_ratio", "full_ratio", "residual"});
  double fmin = 1e300, fmax = 0, lmin = 1e300, lmax = 0, res = 0;
  for (const auto& s : samples) {
    out->row({s.lambda.real(), s.lambda.imag(), std::abs(s.lambda), s.literal, s.full, s.residual});
    fmin = std::min(fmin, s.full);
    fmax = std::max(fmax, s.full);
    lmin = std::min(lmin, s.literal);
    lmax = std::max(lmax, s.literal);
    res = std::max(res, s.residual);
  }
  ctx.check("resolvent_bound_full_ratio", fmax / fmin < 50.0, fmax / fmin);
  ctx.check("literal_ratio_bounded", std::isfinite(lmax), lmax);
  ctx.note("literal_ratio_max_over_min", lmax / lmin);
  ctx.check("resolvent_residual", res < 1e-8, res);

  double reduced = 0.0;
  for (int t = 0; t < 3; ++t) {
    const SpectralField fs = helmholtz_project(random_smooth_field(g, dim, rng)).solenoidal;
    const auto r = solver.solve(1.0, fs);
    reduced = std::max(reduced, rel_max_diff(r.q, pressure_operator_K(r.v, mu)));
  }
  ctx.check("reduced_pressure", reduced < 1e-6, reduced);
}

SpectralField initial_data(const Context& ctx, const GridPtr& g, std::mt19937_64& rng, double size) {
  const std::string& kind = ctx.cfg.initial_data;
  if (kind == "zero") return SpectralField(g, g->dim());
  if (kind == "single_mode") return single_mode_data(g, size, ctx.cfg.q);
  SpectralField a = random_solenoidal(g, rng);
  if (size > 0.0) a *= size / w2_norm(a, ctx.cfg.q);
  return a;
}

void semigroup_decay(Context& ctx) {
  const GridPtr g = ctx.grid();
  StokesSolver solver(g, ctx.cfg.mu);
  std::mt19937_64 rng(ctx.cfg.seed);
  const SpectralField a = initial_data(ctx, g, rng, ctx.cfg.amplitude > 0 ? ctx.cfg.amplitude : 1.0);
  const Trajectory traj = semigroup_run(solver, a, ctx.cfg.tau, step_count(ctx.cfg.horizon, ctx.cfg.tau));
  const std::vector<std::string> header{"t", "l2_norm", "lq_norm"};
  auto out = ctx.csv("semigroup-decay.csv", header);
  auto alias = ctx.csv("decay.csv", header);
  std::vector<double> l2;
  double wdiv = 0.0;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    l2.push_back(lq_norm(traj.velocity[n], 2.0));
    const std::vector<double> row{traj.times[n], l2.back(), lq_norm(traj.velocity[n], ctx.cfg.q)};
    out->row(row);
    alias->row(row);
    wdiv = std::max(wdiv, weak_divergence(traj.velocity[n]).relative());
  }
  const DecayFit fit = decay_fit(traj.times, l2, 0.2);
  ctx.check("decay_rate", fit.rate > 0.0, fit.rate);
  ctx.check("decay_fit_r_squared", fit.r_squared > 0.99, fit.r_squared);
  ctx.check("divergence_preserved", wdiv < 1e-6, wdiv);
}

void linear_mr(Context& ctx) {
  const GridPtr g = ctx.grid();
  StokesSolver solver(g, ctx.cfg.mu);
  std::mt19937_64 rng(ctx.cfg.seed);
  const double sigma0 = ctx.cfg.sigma0 > 0 ? ctx.cfg.sigma0 : auto_gamma(solver, ctx.cfg);
  ctx.note("sigma0", sigma0);
  const int steps = step_count(ctx.cfg.horizon, ctx.cfg.tau);
  const LinearData data = smooth_random_data(g, rng, steps, ctx.cfg.tau);
  const SpectralField a = random_solenoidal(g, rng);
  const Trajectory mono = solve_linear_ibvp(solver, data, a, ctx.cfg.horizon, ctx.cfg.tau);
  const Decomposition dec = solve_linear_decomposed(solver, data, a, sigma0, ctx.cfg.horizon, ctx.cfg.tau);
  auto out = ctx.csv("linear-mr.csv", {"t", "monolithic_l2", "decomposed_l2", "part1_l2", "part2_l2",
                                       "part3_l2", "part4_l2", "difference_l2"});
  Trajectory diff;
  diff.step = ctx.cfg.tau;
  for (std::size_t n = 0; n < mono.size(); ++n) {
    diff.push(mono.times[n], mono.velocity[n] - dec.total.velocity[n], mono.pressure[n] - dec.total.pressure[n]);
    std::vector<double> row{mono.times[n], lq_norm(mono.velocity[n], 2), lq_norm(dec.total.velocity[n], 2)};
    for (const auto& part : dec.parts) row.push_back(lq_norm(part.velocity[n], 2));
    row.push_back(lq_norm(diff.velocity.back(), 2));
    out->row(row);
  }
  const double p = ctx.cfg.p, q = ctx.cfg.q;
  const double gap = weighted_trajectory_norm(diff, p, q, 0.0) / weighted_trajectory_norm(mono, p, q, 0.0);
  ctx.check("decomposition_gap", gap < 1e-4, gap);
  const MrReport mr = mr_estimate_report(mono, data, a, p, q, sigma0);
  ctx.check("mr_ratio_finite", mr.defined, mr.ratio);
}

void global_solve(Context& ctx) {
  const RunConfig& c = ctx.cfg;
  const GridPtr g = ctx.grid();
  StokesSolver solver(g, c.mu);
  GlobalConfig gc;
  gc.tau = c.tau;
  gc.horizon = c.horizon;
  gc.p = c.p;
  gc.q = c.q;
  gc.tolerance = c.tolerance;
  gc.max_iter = c.max_iter;
  gc.gamma0 = auto_gamma(solver, c);
  ctx.note("gamma0", gc.gamma0);
  const SmallnessMeasurement sm = measure_smallness(solver, single_mode_data(g, 0.0, c.q), gc);
  gc.eps0 = sm.gate.eps0;
  ctx.note("c0", sm.c0);
  ctx.note("M4_measured", sm.m4_measured);
  ctx.note("M4", sm.m4);
  ctx.note("delta0", sm.gate.delta0);
  ctx.note("eps0", sm.gate.eps0);

  std::mt19937_64 rng(c.seed);
  const SpectralField a = initial_data(ctx, g, rng, c.amplitude > 0 ? c.amplitude : sm.gate.eps0);
  ctx.note("initial_data_w2", w2_norm(a, c.q));
  const PicardResult res = picard_solve(solver, a, gc);
  for (const auto& w : res.warnings) ctx.note("warning: " + w);
  const ContractionReport& rep = res.report;

  auto it = ctx.csv("contraction.csv", {"iterate", "x_norm", "gap", "ratio"});
  for (int k = 0; k < rep.iterates; ++k)
    it->row({double(k + 1), rep.x_norms[k], rep.gaps[k], k > 0 ? rep.ratios[k - 1] : 0.0});
  ctx.check("converged", rep.converged, rep.final_gap);
  const double worst_ratio = rep.ratios.empty() ? 0.0 : *std::max_element(rep.ratios.begin(), rep.ratios.end());
  ctx.check("contraction_ratio_max", worst_ratio <= 0.6, worst_ratio);
  ctx.note("iterates", rep.iterates);

  const Trajectory& traj = res.trajectory;
  const FlowMap map = flow_map(traj);
  const JacobianReport jr = jacobian_diagnostics(map, traj);
  auto out = ctx.csv("global-solve.csv", {"t", "l2_norm", "lq_norm", "eulerian_lq_norm", "det_error"});
  std::vector<double> l2;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    l2.push_back(lq_norm(traj.velocity[n], 2));
    const EulerianSamples e = push_forward(traj.velocity[n], traj.pressure[n], map, n);
    out->row({traj.times[n], l2.back(), lq_norm(traj.velocity[n], c.q), eulerian_lq_norm(e, c.q),
              det_error(map.jacobian[n])});
  }

  const double final_det = det_error(map.jacobian.back());
  ctx.check("det_final", final_det <= 1e-4, final_det);
  ctx.check("flow_map_bijective",
            jr.pass && jr.integrated_gradient <= 0.25 && jr.min_singular_value >= 0.75,
            jr.integrated_gradient);
  ctx.note("min_singular_value", jr.min_singular_value);

  if (a.max_abs() > 0.0) {
    const DecayFit fit = decay_fit(traj.times, l2, 0.2);
    ctx.check("decay_rate", fit.rate > 0.0, fit.rate);
    ctx.check("decay_fit_r_squared", fit.r_squared > 0.95, fit.r_squared);
    double pf = 0.0;
    const std::size_t last = traj.size() - 1;
    for (int s = 1; s <= 5; ++s) {
      const std::size_t n = last * s / 5;
      const EulerianSamples e = push_forward(traj.velocity[n], traj.pressure[n], map, n);
      const double ln = lq_norm(traj.velocity[n], c.q);
      pf = std::max(pf, std::abs(eulerian_lq_norm(e, c.q) - ln) / ln);
    }
    ctx.check("push_forward_norm", pf < 1e-6, pf);
  } else {
    ctx.check("converged_in_one", rep.iterates == 1, rep.iterates);
  }
}

using Runner = void (*)(Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r{
      {"verify-kernels", verify_kernels}, {"weak-dn", weak_dn},
      {"helmholtz", helmholtz},           {"resolvent-sweep", resolvent_sweep},
      {"semigroup-decay", semigroup_decay}, {"linear-mr", linear_mr},
      {"global-solve", global_solve}};
  return r;
}

void write_summary(const fs::path& dir, const ScenarioReport& rep) {
  std::FILE* f = std::fopen((dir / "summary.txt").c_str(), "w");
  if (!f) throw Error(ErrorCode::Io, "cannot write summary.txt");
  std::fprintf(f, "# %s\n", rep.subcommand.c_str());
  for (const auto& n : rep.notes) std::fprintf(f, "# %s\n", n.c_str());
  for (const auto& c : rep.checks)
    std::fprintf(f, "CHECK %s %s %.17g\n", c.name.c_str(), c.pass ? "PASS" : "FAIL", c.value);
  std::fclose(f);
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"verify-kernels",  "weak-dn",   "helmholtz",
                                              "resolvent-sweep", "semigroup-decay", "linear-mr",
                                              "global-solve"};
  return names;
}

ScenarioReport run_scenario(const std::string& subcommand, const RunConfig& cfg,
                            const std::string& out_dir) {
  const auto it = runners().find(subcommand);
  if (it == runners().end()) throw Error(ErrorCode::InvalidArgument, "unknown subcommand " + subcommand);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + out_dir + ": " + ec.message());
  set_worker_count(cfg.workers);
  ScenarioReport rep;
  rep.subcommand = subcommand;
  Context ctx{cfg, fs::path(out_dir), rep};
  try {
    it->second(ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    ctx.note(std::string("error: ") + e.what());
    ctx.check("run_completed", false, double(static_cast<int>(e.code())));
  }
  write_summary(ctx.dir, rep);
  return rep;
}

}  // namespace layerflow
