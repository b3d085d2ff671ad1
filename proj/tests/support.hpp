// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Nets and fields shared by the test binaries. Every construction here is
// independent of the code under test except where it calls the generator on
// purpose.
#pragma once

#include <quadaffine/definite.hpp>
#include <quadaffine/generate.hpp>
#include <quadaffine/grid.hpp>
#include <quadaffine/indefinite.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <random>

namespace quadaffine::testing {

// q = (j, i, -ij): M = Omega = lambda = 1, A = B = H = 0.
inline AsymptoticNet hand_asymptotic(int n = 5) {
  return AsymptoticNet(make_vertex_field<Vec3>(GridDomain(n, n), [](int i, int j) {
    return Vec3(j, i, -double(i) * j);
  }));
}

// q = (-i, -j, (i^2 + j^2)/2): every Delta, Omega and parameter is 1.
inline ConjugateNet hand_paraboloid(int n = 6) {
  return ConjugateNet(make_vertex_field<Vec3>(GridDomain(n, n), [](int i, int j) {
    return Vec3(-i, -j, 0.5 * (double(i) * i + double(j) * j));
  }));
}

// nu = (i, j, 1) on vertices; its Lelieuvre net is hand_asymptotic.
inline VectorField planar_conormal(int n) {
  return make_vertex_field<Vec3>(GridDomain(n, n), [](int i, int j) { return Vec3(i, j, 1.0); });
}

inline double max_abs(const ScalarField& f) {
  double m = 0.0;
  f.for_each_defined([&](int, int, double x) { m = std::max(m, std::abs(x)); });
  return m;
}

inline double max_abs_deviation(const ScalarField& f, double value) {
  double m = 0.0;
  f.for_each_defined([&](int, int, double x) { m = std::max(m, std::abs(x - value)); });
  return m;
}

// Worst |a - b| / max(|a|, |b|, floor) over entries defined in both.
inline double max_rel_diff(const ScalarField& a, const ScalarField& b, double floor = 1e-300) {
  double m = 0.0;
  a.for_each_defined([&](int i, int j, double x) {
    if (!b.defined(i, j)) return;
    const double y = b(i, j);
    m = std::max(m, std::abs(x - y) / std::max({std::abs(x), std::abs(y), floor}));
  });
  return m;
}

inline double max_rel_diff(const VectorField& a, const VectorField& b) {
  double m = 0.0;
  a.for_each_defined([&](int i, int j, const Vec3& x) {
    if (!b.defined(i, j)) return;
    m = std::max(m, (x - b(i, j)).norm() / std::max({x.norm(), b(i, j).norm(), 1e-300}));
  });
  return m;
}

// Closed forms of the sampled one-sheet hyperboloid, evaluated at the lower
// left vertex (u, v) of a face.
struct HyperboloidForms {
  double c = 1.0, du = 2.0 / 50, dv = 2.0 / 51;

  double omega(double u, double v) const {
    const double s = u + v;
    return 2.0 * std::pow(c, 1.5) * std::sinh(du) * std::sinh(dv) /
           std::sqrt(std::sinh(s + du + dv) * std::sinh(s + du) * std::sinh(s + dv) * std::sinh(s));
  }
  double lambda(double u, double v) const {
    const double s = u + v;
    return std::sqrt(std::sinh(s + du + dv) * std::sinh(s) / (std::sinh(s + du) * std::sinh(s + dv)));
  }
  Vec3 xi(double u, double v) const {
    const double s = u + v;
    const double den =
        2.0 * std::sqrt(c) * std::sqrt(std::sinh(s + dv) * std::sinh(s + du + dv) * std::sinh(s) * std::sinh(s + du));
    return Vec3(-std::cosh(du) * std::sinh(2 * v + dv) - std::cosh(dv) * std::sinh(2 * u + du),
                std::cosh(du) * std::cosh(2 * v + dv) - std::cosh(dv) * std::cosh(2 * u + du),
                std::sinh(2 * u + 2 * v + du + dv)) /
           den;
  }
};

// Linear part with det exactly 1 up to rounding, condition number bounded.
inline Mat3 random_unimodular(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  Mat3 L;
  for (;;) {
    L = Mat3::Identity();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) L(r, c) += u(rng);
    const double det = L.determinant();
    if (std::abs(det) < 0.2) continue;
    if (det < 0) L.col(0) = -L.col(0);
    L /= std::cbrt(std::abs(det));
    return L;
  }
}

inline VectorField affine_image(const VectorField& q, const Mat3& L, const Vec3& t) {
  VectorField out = q;
  for (auto& x : out.values()) x = L * x + t;
  return out;
}

// Goursat seed perturbed from nu = (i h, j h, 1) with H* near 1. The result is
// an exact Moutard field; its Lelieuvre net is a valid asymptotic net for the
// perturbation sizes used here.
inline VectorField random_moutard_conormal(std::mt19937_64& rng, int n, double h = 0.5, double noise = 0.04,
                                           double hnoise = 0.03) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  IndefiniteSeed seed;
  seed.shape = IndefiniteSeed::Shape::Goursat;
  for (int i = 0; i < n; ++i) seed.first.push_back(Vec3(i * h, 0.0, 1.0) + noise * Vec3(u(rng), u(rng), u(rng)));
  seed.second.push_back(seed.first.front());
  for (int j = 1; j < n; ++j) seed.second.push_back(Vec3(0.0, j * h, 1.0) + noise * Vec3(u(rng), u(rng), u(rng)));
  ScalarField hs(GridDomain(n, n), Carrier::Face);
  for (auto& x : hs.values()) x = 1.0 + hnoise * u(rng);
  seed.hstar = field_schedule(hs);
  return moutard_extend_indefinite(seed);
}

// Rows j = 0, 1 sampled from a sphere-like surface, later rows from
// q(j+1) = (4 - 2 Omega) q - q(i+1) - q(i-1) - q(j-1) with Omega chosen so the
// definite metric is consistent. The result satisfies xi = -q exactly: a
// proper definite affine sphere centred at the origin. Needs no co-normal.
inline ConjugateNet definite_sphere(double a = 0.2, double b = 0.25, int width = 16, int rows = 7, int lo = 4,
                                    int hi = 11) {
  const double c = std::acos(std::cos(a) + std::cos(b) - 1.0);
  auto f = [&](int i, int j) {
    return Vec3(std::cos(a * i) * std::cos(b * j), std::sin(a * i) * std::cos(b * j), -std::sin(c * j));
  };
  std::vector<std::vector<std::optional<Vec3>>> r(rows, std::vector<std::optional<Vec3>>(width));
  for (int i = 0; i < width; ++i) {
    r[0][i] = f(i, 0);
    r[1][i] = f(i, 1);
  }
  for (int j = 2; j < rows; ++j)
    for (int i = 1; i + 1 < width; ++i) {
      if (!r[j - 1][i - 1] || !r[j - 1][i + 1] || !r[j - 2][i]) continue;
      const Vec3 d = *r[j - 1][i + 1] - *r[j - 1][i - 1], s = *r[j - 1][i + 1] + *r[j - 1][i - 1];
      const Vec3& q = *r[j - 1][i];
      const double omega = triple_product(d, s + 2.0 * *r[j - 2][i], q) / 4.0;
      r[j][i] = (4.0 - 2.0 * omega) * q - s - *r[j - 2][i];
    }
  return ConjugateNet(make_vertex_field<Vec3>(GridDomain(hi - lo + 1, rows - 2), [&](int i, int j) {
    return *r[j][lo + i];
  }));
}

}  // namespace quadaffine::testing
