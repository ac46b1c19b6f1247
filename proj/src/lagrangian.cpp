// SPDX-License-Identifier: Apache-2.0

#include "layerflow/lagrangian.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "layerflow/error.hpp"

namespace layerflow {
namespace {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;

constexpr double kMinDet = 0.1;

Mat load(const PhysicalField& f, int n, std::size_t p, int j) {
  Mat m(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) m(a, b) = f.at(a * n + b, p, j);
  return m;
}

void store(PhysicalField& f, const Mat& m, std::size_t p, int j) {
  const int n = int(m.rows());
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) f.at(a * n + b, p, j) = m(a, b);
}

Vec load_vec(const PhysicalField& f, int n, std::size_t p, int j, int offset = 0) {
  Vec v(n);
  for (int a = 0; a < n; ++a) v(a) = f.at(offset + a, p, j);
  return v;
}

template <class Body>
void for_each_point(const GridPtr& g, Body&& body) {
  for (std::size_t p = 0; p < g->points(); ++p)
    for (int j = 0; j < g->n_vertical(); ++j) body(p, j);
}

void check_matrix(const SpectralField& f, const DeformationState& s, const char* what) {
  const int n = s.grid()->dim();
  if (!f.grid()->same_as(*s.grid())) throw Error(ErrorCode::GridMismatch, what);
  if (f.components() != n * n)
    throw Error(ErrorCode::InvalidArgument, std::string(what) + ": expected a matrix field");
}

}  // namespace

DeformationState make_deformation(const PhysicalField& B) {
  const GridPtr& g = B.grid();
  const int n = g->dim();
  if (B.components() != n * n)
    throw Error(ErrorCode::InvalidArgument, "make_deformation: expected a matrix field");
  DeformationState s;
  s.B = B;
  s.A = PhysicalField(g, n * n);
  s.Ainv = PhysicalField(g, n * n);
  s.calB = PhysicalField(g, n * n);
  s.detA = PhysicalField(g, 1);
  const Mat eye = Mat::Identity(n, n);
  double worst = 1e300;
  std::size_t worst_p = 0;
  int worst_j = 0;
  for_each_point(g, [&](std::size_t p, int j) {
    const Mat a = eye + load(B, n, p, j);
    const double det = a.determinant();
    s.detA.at(0, p, j) = det;
    if (det < worst) {
      worst = det;
      worst_p = p;
      worst_j = j;
    }
    store(s.A, a, p, j);
    if (det >= kMinDet) {
      const Mat inv = a.inverse();
      store(s.Ainv, inv, p, j);
      store(s.calB, inv - eye, p, j);
    }
  });
  if (worst < kMinDet) {
    std::ostringstream msg;
    msg << "deformation degenerate: det A = " << worst << " at point " << worst_p << ", node "
        << worst_j;
    throw Error(ErrorCode::Degenerate, msg.str());
  }
  s.calB_hat = forward_transform(s.calB);
  s.last_grad = PhysicalField(g, n * n);
  return s;
}

DeformationState initial_deformation(const SpectralField& grad_u0) {
  const GridPtr& g = grad_u0.grid();
  const int n = g->dim();
  if (grad_u0.components() != n * n)
    throw Error(ErrorCode::InvalidArgument, "initial_deformation: expected a matrix field");
  DeformationState s = make_deformation(PhysicalField(g, n * n));
  s.last_grad = inverse_transform(grad_u0);
  return s;
}

DeformationState accumulate_deformation(const DeformationState& state, const SpectralField& grad_u,
                                        double tau) {
  check_matrix(grad_u, state, "accumulate_deformation");
  if (!(tau > 0)) throw Error(ErrorCode::InvalidArgument, "accumulate_deformation: tau <= 0");
  PhysicalField next = inverse_transform(grad_u);
  PhysicalField B = state.B;
  for (std::size_t i = 0; i < B.data().size(); ++i)
    B.data()[i] += 0.5 * tau * (state.last_grad.data()[i] + next.data()[i]);
  DeformationState s = make_deformation(B);
  s.last_grad = std::move(next);
  return s;
}

SpectralField nonlinear_F(const DeformationState& s, const SpectralField& du_dt,
                          const SpectralField& grad_u, const SpectralField& hess_u, double mu) {
  const GridPtr& g = s.grid();
  const int n = g->dim();
  check_matrix(grad_u, s, "nonlinear_F");
  if (du_dt.components() != n || hess_u.components() != n * n * n)
    throw Error(ErrorCode::InvalidArgument, "nonlinear_F: component mismatch");
  if (!du_dt.grid()->same_as(*g) || !hess_u.grid()->same_as(*g))
    throw Error(ErrorCode::GridMismatch, "nonlinear_F");

  const PhysicalField ut = inverse_transform(du_dt);
  const PhysicalField gu = inverse_transform(grad_u);
  const PhysicalField hu = inverse_transform(hess_u);
  const PhysicalField dcb = inverse_transform(gradient(s.calB_hat));

  // calB^T : grad u as a scalar, differentiated spectrally
  PhysicalField contraction(g, 1);
  for_each_point(g, [&](std::size_t p, int j) {
    double acc = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc += s.calB.at(b * n + a, p, j) * gu.at(a * n + b, p, j);
    contraction.at(0, p, j) = acc;
  });
  const PhysicalField grad_c = inverse_transform(gradient(forward_transform(contraction)));

  PhysicalField out(g, n);
  const Mat eye = Mat::Identity(n, n);
  for_each_point(g, [&](std::size_t p, int j) {
    const Mat B = load(s.B, n, p, j);
    const Mat cb = load(s.calB, n, p, j);
    const Vec dudt = load_vec(ut, n, p, j);
    Vec lap = Vec::Zero(n);
    for (int l = 0; l < n; ++l)
      for (int k = 0; k < n; ++k) lap(l) += hu.at((l * n + k) * n + k, p, j);
    // second-order coefficient matrix C_jk = sum_i calB_ji (2 delta_ik + calB_ki)
    const Mat c2 = cb * (2.0 * eye + cb.transpose());
    // first-order coefficients c1_k = sum_ij (delta_ji + calB_ji) d_j calB_ki
    Vec c1 = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        const double w = eye(jj, i) + cb(jj, i);
        for (int k = 0; k < n; ++k) c1(k) += w * dcb.at((k * n + i) * n + jj, p, j);
      }
    Vec lam = Vec::Zero(n);
    for (int l = 0; l < n; ++l)
      for (int a = 0; a < n; ++a) {
        lam(l) += c1(a) * gu.at(l * n + a, p, j);
        for (int b = 0; b < n; ++b) lam(l) += c2(a, b) * hu.at((l * n + a) * n + b, p, j);
      }
    Vec f = -B.transpose() * dudt + mu * B.transpose() * lap + mu * (eye + B.transpose()) * lam;
    for (int a = 0; a < n; ++a) out.at(a, p, j) = f(a) + mu * grad_c.at(a, p, j);
  });
  return forward_transform(out);
}

SpectralField nonlinear_G(const DeformationState& s, const SpectralField& grad_u) {
  check_matrix(grad_u, s, "nonlinear_G");
  const GridPtr& g = s.grid();
  const int n = g->dim();
  const PhysicalField gu = inverse_transform(grad_u);
  PhysicalField out(g, 1);
  for_each_point(g, [&](std::size_t p, int j) {
    double acc = 0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) acc += s.calB.at(b * n + a, p, j) * gu.at(a * n + b, p, j);
    out.at(0, p, j) = -acc;
  });
  return forward_transform(out);
}

SpectralField nonlinear_Gvec(const DeformationState& s, const SpectralField& u) {
  const GridPtr& g = s.grid();
  const int n = g->dim();
  if (!u.grid()->same_as(*g)) throw Error(ErrorCode::GridMismatch, "nonlinear_Gvec");
  if (u.components() != n)
    throw Error(ErrorCode::InvalidArgument, "nonlinear_Gvec: expected a vector field");
  const PhysicalField up = inverse_transform(u);
  PhysicalField out(g, n);
  for_each_point(g, [&](std::size_t p, int j) {
    const Vec v = -load(s.calB, n, p, j) * load_vec(up, n, p, j);
    for (int a = 0; a < n; ++a) out.at(a, p, j) = v(a);
  });
  return forward_transform(out);
}

SpectralField nonlinear_H(const DeformationState& s, const SpectralField& grad_u, double mu) {
  check_matrix(grad_u, s, "nonlinear_H");
  const GridPtr& g = s.grid();
  const int n = g->dim();
  const PhysicalField gu = inverse_transform(grad_u);
  PhysicalField out(g, n * n);
  const Mat eye = Mat::Identity(n, n);
  for_each_point(g, [&](std::size_t p, int j) {
    const Mat B = load(s.B, n, p, j);
    const Mat cb = load(s.calB, n, p, j);
    const Mat G = load(gu, n, p, j);
    const Mat D = G + G.transpose();
    const Mat h = -mu * (D * cb.transpose() +
                         (G * cb + B.transpose() * G * (eye + cb)) * (eye + cb.transpose()));
    store(out, h, p, j);
  });
  return forward_transform(out);
}

SpectralField normal_column(const SpectralField& m) {
  const int n = m.grid()->dim();
  if (m.components() != n * n)
    throw Error(ErrorCode::InvalidArgument, "normal_column: expected a matrix field");
  SpectralField out(m.grid(), n);
  for (int a = 0; a < n; ++a) out.set_component(a, m.component(a * n + n - 1));
  return out;
}

FlowMap flow_map(const Trajectory& traj) {
  if (traj.size() == 0) throw Error(ErrorCode::InvalidArgument, "flow_map: empty trajectory");
  const GridPtr& g = traj.velocity[0].grid();
  const int n = g->dim();
  FlowMap map;
  SpectralField disp(g, n);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (k > 0) {
      SpectralField inc = traj.velocity[k - 1] + traj.velocity[k];
      inc *= 0.5 * traj.step;
      disp += inc;
    }
    PhysicalField jac = inverse_transform(gradient(disp));
    for (int a = 0; a < n; ++a)
      for_each_point(g, [&](std::size_t p, int j) { jac.at(a * n + a, p, j) += 1.0; });
    map.times.push_back(traj.times[k]);
    map.displacement.push_back(disp);
    map.jacobian.push_back(std::move(jac));
  }
  return map;
}

JacobianReport jacobian_diagnostics(const FlowMap& map, const Trajectory& traj) {
  if (map.jacobian.empty() || map.jacobian.size() != traj.size())
    throw Error(ErrorCode::InvalidArgument, "jacobian_diagnostics: size mismatch");
  const GridPtr& g = map.jacobian[0].grid();
  const int n = g->dim();
  JacobianReport r;
  for (const PhysicalField& jac : map.jacobian)
    for_each_point(g, [&](std::size_t p, int j) {
      const Mat a = load(jac, n, p, j);
      Eigen::JacobiSVD<Mat> svd(a);
      r.min_singular_value = std::min(r.min_singular_value, svd.singularValues()(n - 1));
      r.max_det_error = std::max(r.max_det_error, std::abs(a.determinant() - 1.0));
    });
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const PhysicalField gu = inverse_transform(gradient(traj.velocity[k]));
    double worst = 0;
    for_each_point(g, [&](std::size_t p, int j) {
      Eigen::JacobiSVD<Mat> svd(load(gu, n, p, j));
      worst = std::max(worst, svd.singularValues()(0));
    });
    r.integrated_gradient += traj.step * worst;
  }
  r.pass = r.integrated_gradient > 0.25 || r.min_singular_value >= 0.75;
  return r;
}

EulerianSamples push_forward(const SpectralField& u, const SpectralField& p, const FlowMap& map,
                             std::size_t time_index) {
  if (time_index >= map.jacobian.size())
    throw Error(ErrorCode::InvalidArgument, "push_forward: time index out of range");
  const GridPtr& g = u.grid();
  const int n = g->dim();
  if (!p.grid()->same_as(*g) || !map.jacobian[time_index].grid()->same_as(*g))
    throw Error(ErrorCode::GridMismatch, "push_forward");
  const PhysicalField up = inverse_transform(u);
  const PhysicalField pp = inverse_transform(p);
  const PhysicalField disp = inverse_transform(map.displacement[time_index]);
  const PhysicalField& jac = map.jacobian[time_index];
  const auto& z = g->vertical_nodes();
  const auto& wz = g->vertical_weights();
  EulerianSamples s;
  s.dim = n;
  for_each_point(g, [&](std::size_t pt, int j) {
    const double det = load(jac, n, pt, j).determinant();
    if (!(det > 0))
      throw Error(ErrorCode::Degenerate, "push_forward: flow map is not orientation preserving");
    for (int a = 0; a < n; ++a) {
      const double xi = a < n - 1 ? g->horizontal_coordinate(pt, a) : z[j];
      s.x.push_back(xi + disp.at(a, pt, j));
      s.velocity.push_back(up.at(a, pt, j));
    }
    s.pressure.push_back(pp.at(0, pt, j));
    s.weight.push_back(g->horizontal_weight() * wz[j] * det);
  });
  return s;
}

double eulerian_lq_norm(const EulerianSamples& s, double q) {
  if (!(q >= 1) || !std::isfinite(q))
    throw Error(ErrorCode::InvalidArgument, "eulerian_lq_norm: q must be finite and >= 1");
  double acc = 0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    double m2 = 0;
    for (int a = 0; a < s.dim; ++a) m2 += s.velocity[k * s.dim + a] * s.velocity[k * s.dim + a];
    acc += s.weight[k] * std::pow(std::sqrt(m2), q);
  }
  return std::pow(acc, 1.0 / q);
}

}  // namespace layerflow
