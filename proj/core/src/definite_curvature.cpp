// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Gauss I, weighted derivatives of xi, diagonal curvatures and the three
// compatibility equations of definite nets.
#include <quadaffine/definite.hpp>

#include "tracked.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace quadaffine {

using detail::rel_residual;
using detail::Tracked;

namespace {

bool interior(const GridDomain& d, int i, int j) { return i >= 1 && j >= 1 && i + 1 < d.nu && j + 1 < d.nv; }

// Parameters at one vertex with their magnitudes.
struct V {
  Tracked a, b, g, d, O, l;
};

V at(const DefiniteParameters& p, int i, int j) {
  return {p.alpha(i, j), p.beta(i, j), p.gamma(i, j), p.delta(i, j), p.Omega(i, j), p.lambda(i, j)};
}

const Tracked one = 1.0;
const Tracked two = 2.0;

// E at vertex 0 = (i,j); needs 1 = (i+1,j), 2 = (i,j+1), 2bar = (i,j-1).
Tracked E_at(const DefiniteParameters& p, int i, int j) {
  const V v0 = at(p, i, j), v1 = at(p, i + 1, j), v2 = at(p, i, j + 1), v2b = at(p, i, j - 1);
  const Tracked a0O0 = v0.a * v0.O, d0O0 = v0.d * v0.O;
  return (v2.d * v2.O - a0O0) / (a0O0 * v1.b * v1.O) +
         one / (v1.l * v1.l) * (v2b.a * v2b.O - d0O0) / (d0O0 * v1.g * v1.O) +
         (two * v0.l - v0.d - v0.a * v0.l * v0.l) / (v0.a * v0.d * v0.O) +
         (two / v1.l - v1.g - v1.b / (v1.l * v1.l)) / (v1.g * v1.b * v1.O);
}

// F at vertex 0; needs 1bar = (i-1,j), 1 = (i+1,j), 2 = (i,j+1).
Tracked F_at(const DefiniteParameters& p, int i, int j) {
  const V v0 = at(p, i, j), v1 = at(p, i + 1, j), v2 = at(p, i, j + 1), v1b = at(p, i - 1, j);
  const Tracked a0O0 = v0.a * v0.O, b0O0 = v0.b * v0.O;
  return (v1b.a * v1b.O - b0O0) / (b0O0 * v2.g * v2.O) +
         v2.l * v2.l * (v1.b * v1.O - a0O0) / (a0O0 * v2.d * v2.O) +
         (two / v0.l - v0.a - v0.b / (v0.l * v0.l)) / (v0.a * v0.b * v0.O) +
         (two * v2.l - v2.d - v2.g * v2.l * v2.l) / (v2.g * v2.d * v2.O);
}

// E' at vertex 0; same stencil as F.
Tracked Eprime_at(const DefiniteParameters& p, int i, int j) {
  const V v0 = at(p, i, j), v1 = at(p, i + 1, j), v2 = at(p, i, j + 1), v1b = at(p, i - 1, j);
  const Tracked a0O0 = v0.a * v0.O, b0O0 = v0.b * v0.O;
  return (v1.b * v1.O - a0O0) / (a0O0 * v2.d * v2.O) +
         one / (v2.l * v2.l) * (v1b.a * v1b.O - b0O0) / (b0O0 * v2.g * v2.O) +
         (two * v0.l - v0.b - v0.a * v0.l * v0.l) / (v0.a * v0.b * v0.O) +
         (two / v2.l - v2.g - v2.d / (v2.l * v2.l)) / (v2.g * v2.d * v2.O);
}

bool has_E(const GridDomain& d, int i, int j) {
  return interior(d, i, j) && interior(d, i + 1, j) && interior(d, i, j + 1) && interior(d, i, j - 1);
}
bool has_F(const GridDomain& d, int i, int j) {
  return interior(d, i, j) && interior(d, i + 1, j) && interior(d, i, j + 1) && interior(d, i - 1, j);
}

// P coefficient of D1p: lambda1^2 E0 + (lambda1^2 - lambda0^-2)(alpha0 lambda0^2 - beta0)/(alpha0 Omega0 delta0).
Tracked D1p_u(const DefiniteParameters& p, int i, int j) {
  const V v0 = at(p, i, j), v1 = at(p, i + 1, j);
  return v1.l * v1.l * E_at(p, i, j) +
         (v1.l * v1.l - one / (v0.l * v0.l)) * (v0.a * v0.l * v0.l - v0.b) / (v0.a * v0.O * v0.d);
}

double expansion_residual(const Vec3& lhs, double lhs_scale, Tracked a, const Vec3& X, Tracked b, const Vec3& Y,
                          Tracked c = 0.0, const Vec3& Z = Vec3::Zero()) {
  const Vec3 rhs = a.v * X + b.v * Y + c.v * Z;
  return rel_residual(lhs, rhs, lhs_scale + a.m * X.norm() + b.m * Y.norm() + c.m * Z.norm());
}

}  // namespace

ResidualReport gauss_residuals_definite(const ConjugateNet& net, const DefiniteParameters& p, const VectorField& xi) {
  const GridDomain& d = net.domain();
  const VectorField& q = net.q;
  ResidualReport r;
  for (const char* n : {"gauss_def_q11", "gauss_def_q22", "gauss_def_q12"}) r.touch(n);
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Vec3 P = q(i + 1, j) - q(i, j), Pm = q(i, j) - q(i - 1, j);
      const Vec3 Q = q(i, j + 1) - q(i, j), Qm = q(i, j) - q(i, j - 1);
      const V v = at(p, i, j);
      const Tracked l2 = v.l * v.l;
      const Index w{i, j};
      const double s1 = P.norm() + Pm.norm(), s2 = Q.norm() + Qm.norm();
      r.record("gauss_def_q11",
               expansion_residual(P - Pm, s1, (v.a - v.b / l2) / v.a, P, (v.d / l2 - v.a) / v.a, Q, v.b * v.O / v.l,
                                  xi(i, j)),
               w);
      r.record("gauss_def_q22",
               expansion_residual(Q - Qm, s2, (v.b / l2 - v.a) / v.a, P, (v.a - v.d / l2) / v.a, Q, v.d * v.O / v.l,
                                  xi(i, j)),
               w);
      if (interior(d, i + 1, j) && interior(d, i, j + 1)) {
        const Vec3 q12 = (q(i + 1, j + 1) - q(i + 1, j)) - (q(i, j + 1) - q(i, j));
        const V v1 = at(p, i + 1, j), v2 = at(p, i, j + 1);
        const Tracked a0O0 = v.a * v.O;
        r.record("gauss_def_q12",
                 expansion_residual(q12, s1 + s2, (v2.d * v2.O - a0O0) / a0O0, P, (v1.b * v1.O - a0O0) / a0O0, Q), w);
      }
    }
  return r;
}

WeightedDerivatives weighted_normal_derivatives(const VectorField& xi, const ConjugateNet& net,
                                                const DefiniteParameters& p, const VectorField& nu) {
  const GridDomain& d = net.domain();
  const VectorField& q = net.q;
  WeightedDerivatives w{VectorField(d, Carrier::EdgeU, false), VectorField(d, Carrier::EdgeU, false),
                        VectorField(d, Carrier::EdgeV, false), VectorField(d, Carrier::EdgeV, false),
                        ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
                        ScalarField(d, Carrier::Vertex, false), {}};
  ResidualReport& r = w.report;
  for (const char* n : {"expansion_d1p", "expansion_d1m", "expansion_d2p", "expansion_d2m", "orth_def_d1p",
                        "orth_def_d1m", "orth_def_d2p", "orth_def_d2m"})
    r.touch(n);

  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      if (has_E(d, i, j)) w.E.set(i, j, E_at(p, i, j).v);
      if (has_F(d, i, j)) {
        w.F.set(i, j, F_at(p, i, j).v);
        w.Eprime.set(i, j, Eprime_at(p, i, j).v);
      }
    }

  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const V v0 = at(p, i, j);
      const Vec3 P = q(i + 1, j) - q(i, j), Pm = q(i, j) - q(i - 1, j);
      const Vec3 Q = q(i, j + 1) - q(i, j), Qm = q(i, j) - q(i, j - 1);
      const Vec3& x0 = xi(i, j);
      const Index at0{i, j};
      const double l0 = v0.l.v;

      if (interior(d, i + 1, j)) {
        const V v1 = at(p, i + 1, j);
        const double l1 = v1.l.v;
        const Vec3& x1 = xi(i + 1, j);
        const Vec3 Dp = l1 * x1 - x0 / l0, Dm = x1 / l1 - l0 * x0;
        const double sp = l1 * x1.norm() + x0.norm() / l0, sm = x1.norm() / l1 + l0 * x0.norm();
        w.D1p.set(i, j, Dp);
        w.D1m.set(i, j, Dm);
        r.record("orth_def_d1p", std::abs(Dp.dot(nu(i, j))) / (sp * nu(i, j).norm()), at0);
        r.record("orth_def_d1m", std::abs(Dm.dot(nu(i, j - 1))) / (sm * nu(i, j - 1).norm()), at0);
        if (has_E(d, i, j)) {
          const Tracked cross = v1.l * v1.l - one / (v0.l * v0.l);
          r.record("expansion_d1p", expansion_residual(Dp, sp, D1p_u(p, i, j), P, cross / (v0.a * v0.O), Q), at0);
          r.record("expansion_d1m",
                   expansion_residual(Dm, sm, E_at(p, i, j), P, (v0.l * v0.l - one / (v1.l * v1.l)) / (v0.d * v0.O), Qm),
                   at0);
        }
      }
      if (interior(d, i, j + 1)) {
        const V v2 = at(p, i, j + 1);
        const double l2 = v2.l.v;
        const Vec3& x2 = xi(i, j + 1);
        const Vec3 Dp = l2 * x2 - x0 / l0, Dm = x2 / l2 - l0 * x0;
        const double sp = l2 * x2.norm() + x0.norm() / l0, sm = x2.norm() / l2 + l0 * x0.norm();
        w.D2p.set(i, j, Dp);
        w.D2m.set(i, j, Dm);
        r.record("orth_def_d2p", std::abs(Dp.dot(nu(i, j))) / (sp * nu(i, j).norm()), at0);
        r.record("orth_def_d2m", std::abs(Dm.dot(nu(i - 1, j))) / (sm * nu(i - 1, j).norm()), at0);
        if (has_F(d, i, j)) {
          r.record("expansion_d2p",
                   expansion_residual(Dp, sp, (v2.l * v2.l - one / (v0.l * v0.l)) / (v0.a * v0.O), P, F_at(p, i, j), Q),
                   at0);
          r.record("expansion_d2m",
                   expansion_residual(Dm, sm, (v0.l * v0.l - one / (v2.l * v2.l)) / (v0.b * v0.O), Pm,
                                      Eprime_at(p, i, j), Q),
                   at0);
        }
      }
    }
  return w;
}

DiagonalCurvature diagonal_curvature(const VectorField& nu, const ScalarField& Hstar, const ConjugateNet& net,
                                     const VectorField& xi, const DefiniteParameters& p) {
  const GridDomain& d = net.domain();
  const VectorField& q = net.q;
  DiagonalCurvature k{ScalarField(d, Carrier::Face, false), ScalarField(d, Carrier::Face, false),
                      ScalarField(d, Carrier::Face, false), {}};
  k.report.touch("diagonal_h1");
  k.report.touch("diagonal_h2");
  for (int j = 1; j + 2 < d.nv; ++j)
    for (int i = 1; i + 2 < d.nu; ++i) {
      if (!Hstar.defined(i, j)) continue;
      const V v0 = at(p, i, j), v1 = at(p, i + 1, j), v2 = at(p, i, j + 1), v12 = at(p, i + 1, j + 1);
      const Tracked hs = Hstar(i, j);
      const Tracked four = 4.0;
      const Tracked H1 = four + hs - two / (v12.l * v12.l) - two / (v0.l * v0.l);
      const Tracked H2 = four + hs - two * v1.l * v1.l - two * v2.l * v2.l;
      const double den = v1.b.v * v1.O.v + v2.d.v * v2.O.v;
      if (!(std::abs(den) > 0.0)) throw Error(ErrorCode::DegenerateNet, "vanishing curvature denominator", Index{i, j});
      const double H = (hs.v + 4.0 - 1.0 / (v0.l.v * v0.l.v) - 1.0 / (v12.l.v * v12.l.v) - v1.l.v * v1.l.v -
                        v2.l.v * v2.l.v) /
                       den;
      k.H1star.set(i, j, H1.v);
      k.H2star.set(i, j, H2.v);
      k.H.set(i, j, H);

      const Vec3 d1 = q(i + 1, j + 1) - q(i, j), d2 = q(i, j + 1) - q(i + 1, j);
      const Vec3 Dd1 = xi(i + 1, j + 1) / v12.l.v - xi(i, j) / v0.l.v;
      const Vec3 Dd2 = v2.l.v * xi(i, j + 1) - v1.l.v * xi(i + 1, j);
      const double m1 = xi(i + 1, j + 1).norm() / v12.l.v + xi(i, j).norm() / v0.l.v;
      const double m2 = v2.l.v * xi(i, j + 1).norm() + v1.l.v * xi(i + 1, j).norm();
      const Vec3& n = nu(i, j);
      k.report.record("diagonal_h2", rel_residual(H2.v * n, d1.cross(Dd2), H2.m * n.norm() + d1.norm() * m2), {i, j});
      k.report.record("diagonal_h1", rel_residual(H1.v * n, -d2.cross(Dd1), H1.m * n.norm() + d2.norm() * m1), {i, j});
    }
  return k;
}

DiagonalFit diagonal_coefficients_fit(const ConjugateNet& net, const VectorField& xi, const ScalarField& lambda) {
  const GridDomain& d = net.domain();
  const VectorField& q = net.q;
  DiagonalFit f{ScalarField(d, Carrier::Face, false), ScalarField(d, Carrier::Face, false),
                ScalarField(d, Carrier::Face, false), ScalarField(d, Carrier::Face, false), 0.0};
  for (int j = 1; j + 2 < d.nv; ++j)
    for (int i = 1; i + 2 < d.nu; ++i) {
      const double l0 = lambda(i, j), l1 = lambda(i + 1, j), l2 = lambda(i, j + 1), l12 = lambda(i + 1, j + 1);
      const Vec3 Dd1 = xi(i + 1, j + 1) / l12 - xi(i, j) / l0;
      const Vec3 Dd2 = l2 * xi(i, j + 1) - l1 * xi(i + 1, j);
      Eigen::Matrix<double, 3, 2> B1, B2;
      B1 << q(i + 1, j) - q(i, j), q(i + 1, j + 1) - q(i + 1, j);
      B2 << q(i + 1, j) - q(i, j), q(i, j + 1) - q(i, j);
      const Eigen::Vector2d c1 = B1.colPivHouseholderQr().solve(Dd1);
      const Eigen::Vector2d c2 = B2.colPivHouseholderQr().solve(Dd2);
      f.a.set(i, j, c1(0));
      f.b.set(i, j, c1(1));
      f.c.set(i, j, c2(0));
      f.d.set(i, j, c2(1));
      const double s1 = std::max(Dd1.norm(), 1e-300), s2 = std::max(Dd2.norm(), 1e-300);
      f.residual = std::max({f.residual, (B1 * c1 - Dd1).norm() / s1, (B2 * c2 - Dd2).norm() / s2});
    }
  return f;
}

DefiniteCompatibility compatibility_residuals_definite(const DefiniteParameters& p, const WeightedDerivatives& w,
                                                       const DiagonalCurvature& k) {
  const GridDomain& d = p.Omega.domain();
  DefiniteCompatibility c{ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
                          ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Face, false),
                          ScalarField(d, Carrier::Face, false),   ScalarField(d, Carrier::Face, false),
                          ScalarField(d, Carrier::Face, false),   {}};
  for (const char* n : {"def_comp1", "def_comp2", "def_comp3"}) c.report.touch(n);
  for (int j = 1; j + 2 < d.nv; ++j)
    for (int i = 1; i + 2 < d.nu; ++i) {
      const V v0 = at(p, i, j), v1 = at(p, i + 1, j), v2 = at(p, i, j + 1), v12 = at(p, i + 1, j + 1);
      const Tracked a0O0 = v0.a * v0.O, b1O1 = v1.b * v1.O, d2O2 = v2.d * v2.O, g12O12 = v12.g * v12.O;
      const Index w0{i, j};
      c.comp1.set(i, j, rel_residual(a0O0 + g12O12, b1O1 + d2O2));
      c.report.record("def_comp1", c.comp1(i, j), w0);
      if (!k.H1star.defined(i, j)) continue;

      // H1*, H2* with the magnitudes of the sums that produced them.
      const double r0 = 2.0 / (v0.l.v * v0.l.v), r12 = 2.0 / (v12.l.v * v12.l.v);
      const double s1 = 2.0 * v1.l.v * v1.l.v, s2 = 2.0 * v2.l.v * v2.l.v;
      const double hs = std::abs(k.H1star(i, j) - 4.0 + r0 + r12);
      const Tracked H1(k.H1star(i, j), 4.0 + hs + r0 + r12), H2(k.H2star(i, j), 4.0 + hs + s1 + s2);
      const Tracked gap = v1.l * v1.l - one / (v0.l * v0.l);
      if (w.E.defined(i, j)) {
        const Tracked u = D1p_u(p, i, j);
        const Tracked a = u + (v1.l * v1.l - one / (v12.l * v12.l)) / b1O1 + (a0O0 - d2O2) / b1O1 * gap / a0O0;
        c.a.set(i, j, a.v);
        if (w.Eprime.defined(i + 1, j)) {
          const Tracked b = Eprime_at(p, i + 1, j) + gap / b1O1;
          c.b.set(i, j, b.v);
          c.comp2.set(i, j, rel_residual(H1, a0O0 * a + g12O12 * b));
          c.report.record("def_comp2", c.comp2(i, j), w0);
        }
        const Tracked cc = (v2.l * v2.l - one / (v0.l * v0.l)) / a0O0 - u;
        c.c.set(i, j, cc.v);
        if (w.F.defined(i, j)) {
          const Tracked dd = F_at(p, i, j) - gap / a0O0;
          c.d.set(i, j, dd.v);
          c.comp3.set(i, j, rel_residual(H2, d2O2 * dd - b1O1 * cc));
          c.report.record("def_comp3", c.comp3(i, j), w0);
        }
      }
    }
  return c;
}

}  // namespace quadaffine

namespace quadaffine {

ResidualReport structure_compatibility(const DefiniteStructure& s) {
  const GridDomain& d = s.Omega.domain();
  DefiniteParameters p{s.Omega, s.alpha, s.beta, ScalarField(d, Carrier::Vertex, false),
                       ScalarField(d, Carrier::Vertex, false), s.lambda, ScalarField(d, Carrier::Vertex, false), 0.0};
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      p.gamma.set(i, j, 2.0 / s.lambda(i, j) - s.alpha(i, j));
      p.delta.set(i, j, 2.0 * s.lambda(i, j) - s.beta(i, j));
    }
  ResidualReport r;
  r.touch("def_comp1");
  r.touch("def_comp23");
  for (int j = 1; j + 2 < d.nv; ++j)
    for (int i = 1; i + 2 < d.nu; ++i) {
      const V v0 = at(p, i, j), v1 = at(p, i + 1, j), v2 = at(p, i, j + 1), v12 = at(p, i + 1, j + 1);
      const Tracked a0O0 = v0.a * v0.O, b1O1 = v1.b * v1.O, d2O2 = v2.d * v2.O, g12O12 = v12.g * v12.O;
      const Index w0{i, j};
      r.record("def_comp1", rel_residual(a0O0 + g12O12, b1O1 + d2O2), w0);
      if (!(has_E(d, i, j) && has_F(d, i + 1, j) && has_F(d, i, j))) continue;
      const Tracked gap = v1.l * v1.l - one / (v0.l * v0.l);
      const Tracked u = D1p_u(p, i, j);
      const Tracked a = u + (v1.l * v1.l - one / (v12.l * v12.l)) / b1O1 + (a0O0 - d2O2) / b1O1 * gap / a0O0;
      const Tracked b = Eprime_at(p, i + 1, j) + gap / b1O1;
      const Tracked c = (v2.l * v2.l - one / (v0.l * v0.l)) / a0O0 - u;
      const Tracked dd = F_at(p, i, j) - gap / a0O0;
      const Tracked lhs = a0O0 * a + g12O12 * b - (d2O2 * dd - b1O1 * c);
      const Tracked rhs = two * (v1.l * v1.l + v2.l * v2.l - one / (v0.l * v0.l) - one / (v12.l * v12.l));
      r.record("def_comp23", rel_residual(lhs, rhs), w0);
    }
  return r;
}

}  // namespace quadaffine
