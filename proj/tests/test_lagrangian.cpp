// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "layerflow/error.hpp"
#include "layerflow/lagrangian.hpp"
#include "support.hpp"

using namespace layerflow;
using testsupport::accumulated_shear_lift;
using testsupport::exact_shear_lift_B;
using testsupport::piola_gap;
using testsupport::rel_diff;
using testsupport::ShearLift;
constexpr double kPi = std::numbers::pi;

namespace {

PhysicalField constant_matrix(const GridPtr& g, const Eigen::MatrixXd& m) {
  const int n = g->dim();
  return sample(g, n * n, [&](const double*, double, double* o) {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) o[a * n + b] = m(a, b);
  });
}

double max_abs(const PhysicalField& f) {
  double m = 0;
  for (double v : f.data()) m = std::max(m, std::abs(v));
  return m;
}

// F through the untransformed route: with Lap_x and grad_x div_x assembled
// as nested products of Ainv with spectral derivatives,
// F = d_t u - mu (Lap u + grad div u) - (I + B^T)[d_t u - mu (Lap_x u + grad_x div_x u)]
SpectralField dual_assembly_F(const DeformationState& s, const SpectralField& u,
                              const SpectralField& du_dt, double mu) {
  const GridPtr& g = s.grid();
  const int n = g->dim();
  const PhysicalField gu = inverse_transform(gradient(u));
  // w_{l,i} = sum_k Ainv_ki d_k u_l  (d/dx_i of u_l)
  PhysicalField w(g, n * n);
  PhysicalField divx(g, 1);
  for (std::size_t p = 0; p < g->points(); ++p)
    for (int j = 0; j < g->n_vertical(); ++j) {
      for (int l = 0; l < n; ++l)
        for (int i = 0; i < n; ++i) {
          double acc = 0;
          for (int k = 0; k < n; ++k) acc += s.Ainv.at(k * n + i, p, j) * gu.at(l * n + k, p, j);
          w.at(l * n + i, p, j) = acc;
        }
      double d = 0;
      for (int i = 0; i < n; ++i) d += w.at(i * n + i, p, j);
      divx.at(0, p, j) = d;
    }
  const PhysicalField gw = inverse_transform(gradient(forward_transform(w)));
  const PhysicalField gd = inverse_transform(gradient(forward_transform(divx)));
  const PhysicalField ut = inverse_transform(du_dt);
  const SpectralField lin_hat = laplacian(u) + gradient(divergence(u));
  const PhysicalField lin = inverse_transform(lin_hat);
  PhysicalField out(g, n);
  for (std::size_t p = 0; p < g->points(); ++p)
    for (int j = 0; j < g->n_vertical(); ++j) {
      std::vector<double> e(n);
      for (int l = 0; l < n; ++l) {
        double lapx = 0, gdx = 0;
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < n; ++k) {
            const double aki = s.Ainv.at(k * n + i, p, j);
            lapx += aki * gw.at((l * n + i) * n + k, p, j);
            if (i == 0) gdx += s.Ainv.at(k * n + l, p, j) * gd.at(k, p, j);
          }
        e[l] = ut.at(l, p, j) - mu * (lapx + gdx);
      }
      for (int a = 0; a < n; ++a) {
        double v = ut.at(a, p, j) - mu * lin.at(a, p, j) - e[a];
        for (int b = 0; b < n; ++b) v -= s.B.at(b * n + a, p, j) * e[b];
        out.at(a, p, j) = v;
      }
    }
  return forward_transform(out);
}

}  // namespace

TEST_CASE("zero deformation gives exact zeros") {
  for (int dim : {2, 3}) {
    auto g = LayerGrid::make(dim, 1.0, 2 * kPi, 8, 9);
    std::mt19937_64 rng(3);
    auto u = random_smooth_field(g, dim, rng);
    auto ut = random_smooth_field(g, dim, rng);
    auto s = initial_deformation(gradient(u));
    for (std::size_t i = 0; i < s.Ainv.data().size(); ++i) {
      const int c = int(i / (g->points() * g->n_vertical()));
      CHECK(s.Ainv.data()[i] == (c % (dim + 1) == 0 ? 1.0 : 0.0));
      CHECK(s.calB.data()[i] == 0.0);
    }
    for (double d : s.detA.data()) CHECK(d == 1.0);
    auto gu = gradient(u);
    CHECK(nonlinear_F(s, ut, gu, gradient(gu), 1.3).max_abs() == 0.0);
    CHECK(nonlinear_G(s, gu).max_abs() == 0.0);
    CHECK(nonlinear_Gvec(s, u).max_abs() == 0.0);
    CHECK(nonlinear_H(s, gu, 1.3).max_abs() == 0.0);
    // zero velocity keeps B = 0 under accumulation
    SpectralField zero(g, dim * dim);
    auto s2 = accumulate_deformation(initial_deformation(zero), zero, 0.1);
    CHECK(max_abs(s2.B) == 0.0);
    for (double d : s2.detA.data()) CHECK(d == 1.0);
  }
}

TEST_CASE("isotropic accumulation matches closed form") {
  for (int dim : {2, 3}) {
    auto g = LayerGrid::make(dim, 1.0, 2 * kPi, 8, 9);
    const double eps = 0.07, tau = 0.1;
    auto grad = forward_transform(constant_matrix(g, eps * Eigen::MatrixXd::Identity(dim, dim)));
    auto s = initial_deformation(grad);
    for (int n = 0; n < 10; ++n) s = accumulate_deformation(s, grad, tau);
    const double b = 1.0 * eps;  // t = 1
    for (std::size_t p = 0; p < g->points(); ++p)
      for (int j = 0; j < g->n_vertical(); ++j) {
        CHECK(std::abs(s.detA.at(0, p, j) - std::pow(1 + b, dim)) < 1e-13);
        for (int a = 0; a < dim; ++a)
          for (int c = 0; c < dim; ++c) {
            const double delta = a == c ? 1.0 : 0.0;
            CHECK(std::abs(s.B.at(a * dim + c, p, j) - b * delta) < 1e-14);
            CHECK(std::abs(s.calB.at(a * dim + c, p, j) + b / (1 + b) * delta) < 1e-14);
          }
      }
  }
}

TEST_CASE("A times Ainv is the identity") {
  auto g = LayerGrid::make(3, 1.0, 2 * kPi, 8, 9);
  std::mt19937_64 rng(5);
  auto field = random_smooth_field(g, 9, rng);
  PhysicalField B = inverse_transform(field);
  double scale = max_abs(B);
  for (double& v : B.data()) v *= 0.3 / scale;
  auto s = make_deformation(B);
  double worst = 0;
  for (std::size_t p = 0; p < g->points(); ++p)
    for (int j = 0; j < g->n_vertical(); ++j) {
      Eigen::Matrix3d a, ai;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          a(r, c) = s.A.at(r * 3 + c, p, j);
          ai(r, c) = s.Ainv.at(r * 3 + c, p, j);
        }
      worst = std::max(worst, (a * ai - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    }
  CHECK(worst < 1e-10);
}

TEST_CASE("degenerate deformation is rejected") {
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 8, 9);
  CHECK_THROWS_AS(make_deformation(constant_matrix(g, -0.95 * Eigen::MatrixXd::Identity(2, 2))),
                  Error);
  try {
    make_deformation(constant_matrix(g, -0.95 * Eigen::MatrixXd::Identity(2, 2)));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Degenerate);
  }
}

TEST_CASE("isotropic nonlinear terms match closed forms") {
  for (int dim : {2, 3}) {
    auto g = LayerGrid::make(dim, 1.0, 2 * kPi, 12, 13);
    std::mt19937_64 rng(11);
    auto u = random_smooth_field(g, dim, rng);
    auto ut = random_smooth_field(g, dim, rng);
    const double mu = 0.8;
    for (double b : {0.05, 0.4}) {
      auto s = make_deformation(constant_matrix(g, b * Eigen::MatrixXd::Identity(dim, dim)));
      const double r = b / (1 + b);
      auto gu = gradient(u);
      SpectralField F_expected = (-b) * ut - (mu * r) * (laplacian(u) + gradient(divergence(u)));
      CHECK(rel_diff(nonlinear_F(s, ut, gu, gradient(gu), mu), F_expected) < 1e-12);
      CHECK(rel_diff(nonlinear_G(s, gu), r * divergence(u)) < 1e-12);
      CHECK(rel_diff(nonlinear_Gvec(s, u), r * u) < 1e-12);
      SpectralField D = gu;
      for (int a = 0; a < dim; ++a)
        for (int c = 0; c < dim; ++c) D.set_component(a * dim + c, gu.component(a * dim + c) + gu.component(c * dim + a));
      CHECK(rel_diff(nonlinear_H(s, gu, mu), (mu * r) * D) < 1e-12);
    }
  }
}

TEST_CASE("shear flow H by hand") {
  // u = (z, 0), mu = 1, B = b I: grad u = [[0,1],[0,0]], D(u) = [[0,1],[1,0]],
  // calB = -r I with r = b/(1+b); the cross terms cancel since b(1 - r) = r,
  // leaving H = r D(u).
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 8, 9);
  const double b = 0.25, r = b / (1 + b);
  auto s = make_deformation(constant_matrix(g, b * Eigen::MatrixXd::Identity(2, 2)));
  auto u = forward_transform(sample(g, 2, [](const double*, double z, double* o) {
    o[0] = z;
    o[1] = 0;
  }));
  auto H = inverse_transform(nonlinear_H(s, gradient(u), 1.0));
  const double expected[4] = {0, r, r, 0};
  double worst = 0;
  for (int c = 0; c < 4; ++c)
    for (std::size_t p = 0; p < g->points(); ++p)
      for (int j = 0; j < g->n_vertical(); ++j)
        worst = std::max(worst, std::abs(H.at(c, p, j) - expected[c]));
  CHECK(worst < 1e-13);
  auto top = inverse_transform(normal_column(nonlinear_H(s, gradient(u), 1.0)));
  CHECK(std::abs(top.at(0, 0, 8) - r) < 1e-13);
  CHECK(std::abs(top.at(1, 0, 8)) < 1e-13);
}

TEST_CASE("F agrees with the untransformed assembly on a flow-map state") {
  std::vector<double> gaps;
  for (int n : {16, 32}) {
    auto g = LayerGrid::make(2, 1.0, 2 * kPi, n, n + 1);
    std::mt19937_64 rng(17);
    auto u = random_smooth_field(g, 2, rng, 2, 5);
    auto ut = random_smooth_field(g, 2, rng, 2, 5);
    auto s = make_deformation(exact_shear_lift_B(g, 0.5));
    auto gu = gradient(u);
    auto F = nonlinear_F(s, ut, gu, gradient(gu), 0.7);
    auto Falt = dual_assembly_F(s, u, ut, 0.7);
    gaps.push_back(rel_diff(F, Falt));
    MESSAGE("dual-assembly gap at " << n << ": " << gaps.back());
  }
  // both routes agree to roundoff already on the coarse grid
  CHECK(gaps[0] < 1e-10);
  CHECK(gaps[1] < 1e-10);
  // constant B: both routes are exact
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 12, 13);
  std::mt19937_64 rng(2);
  auto u = random_smooth_field(g, 2, rng);
  auto ut = random_smooth_field(g, 2, rng);
  Eigen::MatrixXd B(2, 2);
  B << 0.1, -0.05, 0.2, 0.03;
  auto s = make_deformation(constant_matrix(g, B));
  auto gu = gradient(u);
  CHECK(rel_diff(nonlinear_F(s, ut, gu, gradient(gu), 1.1), dual_assembly_F(s, u, ut, 1.1)) < 1e-12);
}

TEST_CASE("H reproduces the transformed free-surface traction") {
  // |Ainv^T e_N| (I + B^T)[-p I + mu(grad u Ainv + Ainv^T grad u^T)] n with
  // n = Ainv^T e_N / |Ainv^T e_N| equals T(u, p) e_N - H e_N.
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 16, 17);
  std::mt19937_64 rng(23);
  auto u = random_smooth_field(g, 2, rng);
  auto p = random_smooth_field(g, 1, rng);
  const double mu = 0.9;
  auto s = make_deformation(exact_shear_lift_B(g, 0.7));
  auto gu_hat = gradient(u);
  const PhysicalField gu = inverse_transform(gu_hat);
  const PhysicalField pp = inverse_transform(p);
  // both sides are compared on the resolved modes; the products carry
  // Nyquist content that the forward transform drops
  PhysicalField lhs(g, 2), traction(g, 2);
  for (std::size_t pt = 0; pt < g->points(); ++pt)
    for (int j = 0; j < g->n_vertical(); ++j) {
      Eigen::Matrix2d G, Ai, B;
      for (int a = 0; a < 2; ++a)
        for (int c = 0; c < 2; ++c) {
          G(a, c) = gu.at(a * 2 + c, pt, j);
          Ai(a, c) = s.Ainv.at(a * 2 + c, pt, j);
          B(a, c) = s.B.at(a * 2 + c, pt, j);
        }
      const Eigen::Vector2d m = Ai.transpose() * Eigen::Vector2d(0, 1);
      const Eigen::Vector2d normal = m / m.norm();
      const Eigen::Matrix2d Tx =
          -pp.at(0, pt, j) * Eigen::Matrix2d::Identity() + mu * (G * Ai + Ai.transpose() * G.transpose());
      const Eigen::Vector2d l = m.norm() * (Eigen::Matrix2d::Identity() + B.transpose()) * Tx * normal;
      const Eigen::Matrix2d T = mu * (G + G.transpose()) - pp.at(0, pt, j) * Eigen::Matrix2d::Identity();
      for (int a = 0; a < 2; ++a) {
        lhs.at(a, pt, j) = l(a);
        traction.at(a, pt, j) = T(a, 1);
      }
    }
  const SpectralField rhs = forward_transform(traction) - normal_column(nonlinear_H(s, gu_hat, mu));
  const double gap = rel_diff(forward_transform(lhs), rhs);
  MESSAGE("traction gap " << gap);
  CHECK(gap < 1e-12);
}

TEST_CASE("Piola consistency under spatial refinement") {
  std::vector<double> gaps;
  for (int n : {6, 10, 32}) {
    auto g = LayerGrid::make(2, 1.0, 2 * kPi, n, n + 1);
    auto u = forward_transform(sample(g, 2, [](const double* x, double z, double* o) {
      o[0] = std::sin(x[0]) * z * std::exp(z);
      o[1] = std::cos(2 * x[0]) * std::cos(z) + z;
    }));
    auto disp = forward_transform(sample(g, 2, [](const double* x, double z, double* o) {
      ShearLift{0.6}.displacement(x[0], z, o);
    }));
    auto s = make_deformation(inverse_transform(gradient(disp)));
    gaps.push_back(piola_gap(s, u));
    MESSAGE("Piola gap at " << n << ": " << gaps.back());
  }
  // spectral convergence down to a roundoff floor
  CHECK(gaps[1] < gaps[0]);
  CHECK(gaps[2] < std::max(gaps[1], 1e-10));
  CHECK(gaps[2] < 1e-4);
}

TEST_CASE("Piola consistency is second order in the accumulation step") {
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 32, 33);
  std::mt19937_64 rng(29);
  auto u = random_smooth_field(g, 2, rng, 2, 5);
  std::vector<double> gaps;
  for (int steps : {10, 20, 40}) gaps.push_back(piola_gap(accumulated_shear_lift(g, 0.5, steps), u));
  const double o1 = std::log2(gaps[0] / gaps[1]), o2 = std::log2(gaps[1] / gaps[2]);
  MESSAGE("gaps " << gaps[0] << " " << gaps[1] << " " << gaps[2] << " orders " << o1 << " " << o2);
  CHECK(o2 >= 1.95);
}

TEST_CASE("incompressible accumulation keeps det near one at second order") {
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 16, 17);
  std::vector<double> errs;
  for (int steps : {10, 20}) {
    auto s = accumulated_shear_lift(g, 0.5, steps);
    double e = 0;
    for (double d : s.detA.data()) e = std::max(e, std::abs(d - 1));
    errs.push_back(e);
  }
  MESSAGE("det errors " << errs[0] << " " << errs[1]);
  CHECK(errs[1] < errs[0] / 3.5);
}

TEST_CASE("polynomial dependence on a unit-determinant family") {
  // B0 = [[0, c], [0, 0]] is nilpotent so det(I + s B0) = 1 and calB = -s B0.
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 12, 13);
  std::mt19937_64 rng(31);
  auto u = random_smooth_field(g, 2, rng);
  auto ut = random_smooth_field(g, 2, rng);
  auto gu = gradient(u);
  auto hu = gradient(gu);
  PhysicalField B0 = sample(g, 4, [](const double* x, double z, double* o) {
    o[0] = 0;
    o[1] = std::sin(x[0]) * (1 + z);
    o[2] = 0;
    o[3] = 0;
  });
  const std::vector<double> svals{-0.4, -0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<std::vector<cplx>> samples;
  for (double sv : svals) {
    PhysicalField B = B0;
    for (double& v : B.data()) v *= sv;
    auto st = make_deformation(B);
    std::vector<cplx> row;
    auto F = nonlinear_F(st, ut, gu, hu, 1.0);
    auto G = nonlinear_G(st, gu);
    auto H = nonlinear_H(st, gu, 1.0);
    row.insert(row.end(), F.data().begin(), F.data().end());
    row.insert(row.end(), G.data().begin(), G.data().end());
    row.insert(row.end(), H.data().begin(), H.data().end());
    samples.push_back(std::move(row));
  }
  Eigen::MatrixXd V(svals.size(), 5);
  for (std::size_t i = 0; i < svals.size(); ++i)
    for (int k = 0; k < 5; ++k) V(i, k) = std::pow(svals[i], k);
  Eigen::MatrixXcd Y(svals.size(), samples[0].size());
  for (std::size_t i = 0; i < svals.size(); ++i)
    for (std::size_t c = 0; c < samples[0].size(); ++c) Y(i, c) = samples[i][c];
  const Eigen::MatrixXcd coef = V.cast<cplx>().colPivHouseholderQr().solve(Y);
  const double resid = (V.cast<cplx>() * coef - Y).cwiseAbs().maxCoeff();
  const double scale = Y.cwiseAbs().maxCoeff();
  MESSAGE("polynomial fit residual " << resid / scale);
  CHECK(resid / scale < 1e-10);
}

TEST_CASE("F is linear in small deformations") {
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 16, 17);
  std::mt19937_64 rng(37);
  auto u = random_smooth_field(g, 2, rng);
  auto ut = random_smooth_field(g, 2, rng);
  auto gu = gradient(u);
  auto hu = gradient(gu);
  const double data = lq_norm(ut, 2) + lq_norm(hu, 2) + lq_norm(gu, 2);
  PhysicalField B0 = inverse_transform(gradient(forward_transform(
      sample(g, 2, [](const double* x, double z, double* o) { ShearLift{1.0}.displacement(x[0], z, o); }))));
  std::vector<double> C;
  for (double sv : {0.2, 0.1, 0.05, 0.025}) {
    PhysicalField B = B0;
    for (double& v : B.data()) v *= sv;
    auto st = make_deformation(B);
    C.push_back(lq_norm(nonlinear_F(st, ut, gu, hu, 1.0), 2) / (max_abs(B) * data));
  }
  MESSAGE("linearization constants " << C[0] << " " << C[1] << " " << C[2] << " " << C[3]);
  CHECK(std::abs(C[3] - C[2]) < 0.05 * C[3]);
  CHECK(std::abs(C[3] - C[2]) < std::abs(C[1] - C[0]));
}

TEST_CASE("flow map of trivial motions") {
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 8, 9);
  Trajectory still, drift;
  still.step = drift.step = 0.1;
  auto c = forward_transform(sample(g, 2, [](const double*, double, double* o) {
    o[0] = 0.3;
    o[1] = -0.2;
  }));
  for (int n = 0; n <= 5; ++n) {
    still.push(0.1 * n, SpectralField(g, 2), SpectralField(g, 1));
    drift.push(0.1 * n, c, SpectralField(g, 1));
  }
  auto m0 = flow_map(still);
  auto r0 = jacobian_diagnostics(m0, still);
  CHECK(r0.min_singular_value == 1.0);
  CHECK(r0.max_det_error == 0.0);
  CHECK(r0.integrated_gradient == 0.0);
  CHECK(r0.pass);
  auto e0 = push_forward(still.velocity[5], still.pressure[5], m0, 5);
  for (std::size_t k = 0; k < e0.size(); ++k) {
    CHECK(e0.velocity[2 * k] == 0.0);
    CHECK(e0.x[2 * k] == g->horizontal_coordinate(k / 9, 0));
  }
  auto m1 = flow_map(drift);
  auto r1 = jacobian_diagnostics(m1, drift);
  // vertical differentiation of a constant is zero to roundoff only
  CHECK(r1.max_det_error < 1e-14);
  auto e1 = push_forward(drift.velocity[5], drift.pressure[5], m1, 5);
  double worst = 0;
  for (std::size_t k = 0; k < e1.size(); ++k) {
    const double xi = g->horizontal_coordinate(k / 9, 0), z = g->vertical_nodes()[k % 9];
    worst = std::max({worst, std::abs(e1.x[2 * k] - (xi + 0.15)), std::abs(e1.x[2 * k + 1] - (z - 0.1)),
                      std::abs(e1.velocity[2 * k] - 0.3), std::abs(e1.velocity[2 * k + 1] + 0.2)});
  }
  CHECK(worst < 1e-14);
  CHECK(std::abs(eulerian_lq_norm(e1, 2) - lq_norm(drift.velocity[5], 2)) < 1e-13);
}

TEST_CASE("flow map of the shear-lift motion") {
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 32, 33);
  Trajectory traj;
  traj.step = 0.01;
  for (int n = 0; n <= 50; ++n) {
    ShearLift m{0.01 * n};
    traj.push(m.t, forward_transform(sample(g, 2, [&](const double* x, double z, double* o) { m.velocity(x[0], z, o); })),
              SpectralField(g, 1));
  }
  auto map = flow_map(traj);
  auto r = jacobian_diagnostics(map, traj);
  MESSAGE("det error " << r.max_det_error << " min sv " << r.min_singular_value << " IG "
                       << r.integrated_gradient);
  CHECK(r.max_det_error < 1e-3);
  CHECK(r.pass);
  auto exact = forward_transform(sample(g, 2, [](const double* x, double z, double* o) {
    ShearLift{0.5}.displacement(x[0], z, o);
  }));
  CHECK(testsupport::max_abs_diff(map.displacement.back(), exact) < 1e-4);
}

TEST_CASE("push-forward rejects an inverted map") {
  auto g = LayerGrid::make(2, 1.0, 2 * kPi, 8, 9);
  FlowMap map;
  map.times = {0.0};
  map.displacement = {SpectralField(g, 2)};
  map.jacobian = {constant_matrix(g, Eigen::Vector2d(-1, 1).asDiagonal().toDenseMatrix())};
  CHECK_THROWS_AS(push_forward(SpectralField(g, 2), SpectralField(g, 1), map, 0), Error);
  CHECK_THROWS_AS(push_forward(SpectralField(g, 2), SpectralField(g, 1), map, 1), Error);
}
