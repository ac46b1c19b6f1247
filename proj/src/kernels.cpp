// SPDX-License-Identifier: Apache-2.0

#include "layerflow/kernels.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>
#include <cmath>
#include <numbers>
#include <random>

#include "layerflow/error.hpp"

namespace layerflow {

KernelPair residue_kernel_pair(double a, double xi_mag) {
  if (a == 0.0 || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be nonzero");
  if (!(xi_mag > 0.0)) throw Error(ErrorCode::InvalidArgument, "xi_mag must be positive");
  const double e = std::exp(-std::abs(a) * xi_mag);
  return {std::numbers::pi * e / xi_mag, -std::numbers::pi * e * (a > 0.0 ? 1.0 : -1.0)};
}

KernelPair residue_kernel_quadrature(double a, double xi_mag, double window) {
  using boost::math::quadrature::gauss_kronrod;
  if (a == 0.0 || !(xi_mag > 0.0) || !(window > 0.0))
    throw Error(ErrorCode::InvalidArgument, "quadrature needs a != 0, xi_mag > 0, window > 0");
  const double k2 = xi_mag * xi_mag;
  // Both integrands are even in s, so integrate over s > 0 and double.
  auto cos_part = [&](double s) { return std::cos(a * s) / (s * s + k2); };
  auto sin_part = [&](double s) { return -s * std::sin(a * s) / (s * s + k2); };
  double even = 0.0, odd = 0.0;
  const int pieces = static_cast<int>(std::ceil(window));
  const double width = window / pieces;
  for (int i = 0; i < pieces; ++i) {
    const double lo = i * width, hi = (i + 1) * width;
    even += gauss_kronrod<double, 61>::integrate(cos_part, lo, hi, 15, 1e-14);
    odd += gauss_kronrod<double, 61>::integrate(sin_part, lo, hi, 15, 1e-14);
  }
  // Tail: substitute s = window + t and expand the shifted phase.
  const double w = std::abs(a);
  const double sgn = a > 0.0 ? 1.0 : -1.0;
  boost::math::quadrature::ooura_fourier_cos<double> fcos(1e-13);
  boost::math::quadrature::ooura_fourier_sin<double> fsin(1e-13);
  auto g_even = [&](double t) { const double s = window + t; return 1.0 / (s * s + k2); };
  auto g_odd = [&](double t) { const double s = window + t; return s / (s * s + k2); };
  const double c0 = std::cos(w * window), s0 = std::sin(w * window);
  const double ec = fcos.integrate(g_even, w).first, es = fsin.integrate(g_even, w).first;
  const double oc = fcos.integrate(g_odd, w).first, os = fsin.integrate(g_odd, w).first;
  // int cos(w(window+t)) g = c0 C - s0 S ; int sin(w(window+t)) g = s0 C + c0 S
  even += c0 * ec - s0 * es;
  odd += -sgn * (s0 * oc + c0 * os);
  return {2.0 * even, 2.0 * odd};
}

double layer_harmonic_kernel(int branch, double x, double y, double xi_mag, double depth) {
  if (branch != 1 && branch != 2) throw Error(ErrorCode::InvalidArgument, "branch must be 1 or 2");
  if (!(depth > 0.0)) throw Error(ErrorCode::InvalidArgument, "depth must be positive");
  if (xi_mag < 0.0) throw Error(ErrorCode::InvalidArgument, "xi_mag must be non-negative");
  if (xi_mag == 0.0) return 0.5;
  const double arg = y + (branch == 1 ? -x : x);
  return std::exp(-xi_mag * arg) / (1.0 + std::exp(-2.0 * xi_mag * depth));
}

namespace {

// Central-difference stencil for the p-th derivative: offsets and weights
// (before division by h^p).
struct Stencil {
  std::vector<int> offset;
  std::vector<double> weight;
};

Stencil stencil(int p) {
  switch (p) {
    case 0: return {{0}, {1.0}};
    case 1: return {{-1, 1}, {-0.5, 0.5}};
    case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}};
    case 3: return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}};
    default: throw Error(ErrorCode::InvalidArgument, "derivative order above 3");
  }
}

cplx mixed_difference(const Symbol& m, const double* xi, int hd, const int* alpha, double h) {
  const Stencil s0 = stencil(alpha[0]);
  const Stencil s1 = stencil(hd > 1 ? alpha[1] : 0);
  cplx acc(0.0);
  double pt[2];
  for (std::size_t a = 0; a < s0.offset.size(); ++a) {
    for (std::size_t b = 0; b < s1.offset.size(); ++b) {
      pt[0] = xi[0] + s0.offset[a] * h;
      if (hd > 1) pt[1] = xi[1] + s1.offset[b] * h;
      const cplx v = m(pt);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw Error(ErrorCode::InvalidArgument, "symbol is not finite at a sample point");
      acc += s0.weight[a] * s1.weight[b] * v;
    }
  }
  const int order = alpha[0] + (hd > 1 ? alpha[1] : 0);
  return acc / std::pow(h, order);
}

}  // namespace

SymbolBoundReport symbol_bound_check(const Symbol& symbol, int horizontal_dims, int max_order,
                                     int sample_count, std::uint64_t seed, double cap_factor) {
  if (horizontal_dims != 1 && horizontal_dims != 2)
    throw Error(ErrorCode::InvalidArgument, "horizontal_dims must be 1 or 2");
  if (max_order < 0 || max_order > 3) throw Error(ErrorCode::InvalidArgument, "max_order must be 0..3");
  if (sample_count < 2) throw Error(ErrorCode::InvalidArgument, "need at least two samples");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SymbolBoundReport rep;
  rep.worst_ratio.assign(max_order + 1, 0.0);
  for (int s = 0; s < sample_count; ++s) {
    const double mag = std::pow(10.0, -3.0 + 6.0 * s / (sample_count - 1));
    double dir[2] = {normal(rng), horizontal_dims > 1 ? normal(rng) : 0.0};
    const double len = std::hypot(dir[0], dir[1]);
    const double xi[2] = {mag * dir[0] / len, mag * dir[1] / len};
    const double h = 0.01 * mag;
    for (int order = 0; order <= max_order; ++order) {
      for (int a0 = 0; a0 <= order; ++a0) {
        const int alpha[2] = {a0, order - a0};
        if (horizontal_dims == 1 && alpha[1] != 0) continue;
        const cplx d = mixed_difference(symbol, xi, horizontal_dims, alpha, h);
        rep.worst_ratio[order] = std::max(rep.worst_ratio[order], std::abs(d) * std::pow(mag, order));
      }
    }
  }
  rep.cap = cap_factor * rep.worst_ratio[0];
  rep.pass = true;
  for (double r : rep.worst_ratio) rep.pass = rep.pass && std::isfinite(r) && r <= rep.cap;
  return rep;
}

}  // namespace layerflow
