// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include <quadaffine/indefinite.hpp>

#include "tracked.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <deque>
#include <limits>

namespace quadaffine {

using detail::rel_residual;
using detail::Tracked;

AsymptoticNet::AsymptoticNet(VectorField positions) : q(std::move(positions)) {
  if (q.carrier() != Carrier::Vertex) throw Error(ErrorCode::MalformedInput, "net positions must live on vertices");
  if (!q.all_defined() || !q.all_finite()) throw Error(ErrorCode::MalformedInput, "net positions must be finite");
}

namespace {

double normalized_triple(const Vec3& a, const Vec3& b, const Vec3& c) {
  const double s = a.norm() * b.norm() * c.norm();
  const double t = triple_product(a, b, c);
  return s > 0.0 ? std::abs(t) / s : std::abs(t);
}

struct Edges {
  VectorField q1, q2;
  explicit Edges(const VectorField& q) : q1(first_difference(q, Axis::U)), q2(first_difference(q, Axis::V)) {}
};

void require_net(const AsymptoticNet& net) {
  const GridDomain& d = net.domain();
  if (d.nu < 2 || d.nv < 2) throw Error(ErrorCode::DomainTooSmall, "asymptotic net needs 2x2 vertices");
  if (!net.q.all_finite()) throw Error(ErrorCode::MalformedInput, "non-finite vertex position");
}

}  // namespace

ValidationReport validate_asymptotic(const AsymptoticNet& net, double tol) {
  require_net(net);
  const GridDomain& d = net.domain();
  const Edges e(net.q);
  ValidationReport r;
  r.planarity_ok = true;
  r.nondegenerate_ok = true;

  // Crosses: any three of the edges at a vertex must be coplanar.
  for (int j = 0; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) {
      std::vector<Vec3> edges;
      if (i + 1 < d.nu) edges.push_back(e.q1(i, j));
      if (i > 0) edges.push_back(e.q1(i - 1, j));
      if (j + 1 < d.nv) edges.push_back(e.q2(i, j));
      if (j > 0) edges.push_back(e.q2(i, j - 1));
      if (edges.size() < 3) continue;
      double worst = 0.0;
      for (std::size_t a = 0; a < edges.size(); ++a)
        for (std::size_t b = a + 1; b < edges.size(); ++b)
          for (std::size_t c = b + 1; c < edges.size(); ++c)
            worst = std::max(worst, normalized_triple(edges[a], edges[b], edges[c]));
      r.max_planarity = std::max(r.max_planarity, worst);
      if (!(worst <= tol)) {
        r.planarity_ok = false;
        r.failures.push_back({i, j});
      }
    }

  r.min_metric = std::numeric_limits<double>::infinity();
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      const Vec3& a = e.q1(i, j);
      const Vec3& b = e.q2(i, j);
      const Vec3& c = e.q2(i + 1, j);
      const double M = triple_product(a, b, c);
      r.min_metric = std::min(r.min_metric, M);
      const double s = a.norm() * b.norm() * c.norm();
      if (!(M > tol * s)) {
        r.nondegenerate_ok = false;
        r.failures.push_back({i, j});
      }
    }
  r.pass = r.planarity_ok && r.nondegenerate_ok;
  return r;
}

bool orient_asymptotic(AsymptoticNet& net) {
  require_net(net);
  const GridDomain& d = net.domain();
  const Edges e(net.q);
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i)
      if (!(triple_product(e.q1(i, j), e.q2(i, j), e.q2(i + 1, j)) < 0.0)) return false;
  VectorField swapped(GridDomain(d.nv, d.nu), Carrier::Vertex);
  for (int j = 0; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) swapped(j, i) = net.q(i, j);
  net.q = std::move(swapped);
  return true;
}

FaceMetric face_metric(const AsymptoticNet& net) {
  require_net(net);
  const GridDomain& d = net.domain();
  const Edges e(net.q);
  FaceMetric fm{ScalarField(d, Carrier::Face), ScalarField(d, Carrier::Face)};
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      const double M = triple_product(e.q1(i, j), e.q2(i, j), e.q2(i + 1, j));
      if (!(M > 0.0)) throw Error(ErrorCode::DegenerateNet, "non-positive M", Index{i, j});
      fm.M(i, j) = M;
      fm.Omega(i, j) = std::sqrt(M);
    }
  return fm;
}

namespace {

// Co-normal of vertex (i,j) seen from face (fi,fj): nu = lambda^expo * c.
struct CornerCross {
  Vec3 c;
  int expo;
};

CornerCross corner_cross(const Edges& e, const ScalarField& Omega, int i, int j, int fi, int fj) {
  const int du = fi == i ? 1 : -1;
  const int dv = fj == j ? 1 : -1;
  const Vec3& e1 = du == 1 ? e.q1(i, j) : e.q1(i - 1, j);
  const Vec3& e2 = dv == 1 ? e.q2(i, j) : e.q2(i, j - 1);
  return {e1.cross(e2) / Omega(fi, fj), du * dv == 1 ? -1 : 1};
}

double lambda_power(double lambda, int expo) { return expo > 0 ? lambda : 1.0 / lambda; }

}  // namespace

ConormalField conormal_field(const AsymptoticNet& net, double seed_lambda, Index seed_face) {
  if (!(seed_lambda > 0.0) || !std::isfinite(seed_lambda))
    throw Error(ErrorCode::InvalidParameter, "seed lambda must be positive");
  const FaceMetric fm = face_metric(net);
  const GridDomain& d = net.domain();
  if (seed_face.i < 0 || seed_face.j < 0 || seed_face.i >= d.nu - 1 || seed_face.j >= d.nv - 1)
    throw Error(ErrorCode::InvalidParameter, "seed face outside the grid", seed_face);
  const Edges e(net.q);

  ConormalField out{VectorField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Face, false), 0.0};
  std::vector<std::uint8_t> seen(d.face_count(), 0);
  std::deque<Index> queue{seed_face};
  seen[out.lambda.flat(seed_face.i, seed_face.j)] = 1;
  out.lambda.set(seed_face.i, seed_face.j, seed_lambda);

  while (!queue.empty()) {
    const Index f = queue.front();
    queue.pop_front();
    const std::array<Index, 4> corners{Index{f.i, f.j}, Index{f.i + 1, f.j}, Index{f.i, f.j + 1},
                                       Index{f.i + 1, f.j + 1}};
    if (!out.lambda.defined(f.i, f.j)) {
      for (const Index& w : corners) {
        if (!out.nu.defined(w.i, w.j)) continue;
        const CornerCross cc = corner_cross(e, fm.Omega, w.i, w.j, f.i, f.j);
        const double s = out.nu(w.i, w.j).dot(cc.c) / cc.c.squaredNorm();
        if (!(s > 0.0) || !std::isfinite(s))
          throw Error(ErrorCode::InconsistentNet, "co-normal propagation produced lambda <= 0", f);
        out.lambda.set(f.i, f.j, lambda_power(s, cc.expo));
        break;
      }
    }
    const double lam = out.lambda(f.i, f.j);
    for (const Index& w : corners) {
      const CornerCross cc = corner_cross(e, fm.Omega, w.i, w.j, f.i, f.j);
      const Vec3 v = lambda_power(lam, cc.expo) * cc.c;
      if (!v.allFinite()) throw Error(ErrorCode::InconsistentNet, "non-finite co-normal", w);
      if (!out.nu.defined(w.i, w.j)) {
        out.nu.set(w.i, w.j, v);
      } else {
        out.path_residual = std::max(out.path_residual, (out.nu(w.i, w.j) - v).norm() / v.norm());
      }
    }
    const std::array<Index, 4> next{Index{f.i + 1, f.j}, Index{f.i - 1, f.j}, Index{f.i, f.j + 1},
                                    Index{f.i, f.j - 1}};
    for (const Index& g : next) {
      if (g.i < 0 || g.j < 0 || g.i >= d.nu - 1 || g.j >= d.nv - 1) continue;
      auto& s = seen[out.lambda.flat(g.i, g.j)];
      if (!s) {
        s = 1;
        queue.push_back(g);
      }
    }
  }
  return out;
}

VectorField rho_rescale(const VectorField& nu, double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw Error(ErrorCode::InvalidParameter, "rho must be positive");
  VectorField out = nu;
  for (int j = 0; j < nu.nj(); ++j)
    for (int i = 0; i < nu.ni(); ++i)
      if (nu.defined(i, j)) out(i, j) = ((i + j) % 2 == 0 ? rho : 1.0 / rho) * nu(i, j);
  return out;
}

MoutardFit moutard_coefficient(const VectorField& nu) {
  if (nu.carrier() != Carrier::Vertex) throw Error(ErrorCode::MalformedInput, "indefinite co-normals live on vertices");
  const GridDomain& d = nu.domain();
  if (d.nu < 2 || d.nv < 2) throw Error(ErrorCode::DomainTooSmall, "Moutard fit needs 2x2 vertices");
  double scale = 0.0;
  nu.for_each_defined([&](int, int, const Vec3& v) { scale = std::max(scale, v.norm()); });
  MoutardFit out{ScalarField(d, Carrier::Face, false), ScalarField(d, Carrier::Face, false), 0.0};
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      if (!(nu.defined(i, j) && nu.defined(i + 1, j) && nu.defined(i, j + 1) && nu.defined(i + 1, j + 1))) continue;
      const Vec3 a = nu(i, j) + nu(i + 1, j + 1);
      const Vec3 b = nu(i + 1, j) + nu(i, j + 1);
      if (!(a.norm() > 1e-14 * scale)) throw Error(ErrorCode::DegenerateNet, "vanishing diagonal sum", Index{i, j});
      const double h = a.dot(b) / a.squaredNorm();
      const double res = (b - h * a).norm() / std::max(b.norm(), a.norm() * std::abs(h));
      out.Hstar.set(i, j, h);
      out.residual.set(i, j, res);
      out.max_residual = std::max(out.max_residual, res);
    }
  return out;
}

VectorField affine_normal(const AsymptoticNet& net, const ScalarField& Omega) {
  VectorField xi = mixed_difference(net.q);
  for (int j = 0; j < xi.nj(); ++j)
    for (int i = 0; i < xi.ni(); ++i) {
      if (!(Omega(i, j) > 0.0)) throw Error(ErrorCode::DegenerateNet, "non-positive Omega", Index{i, j});
      xi(i, j) /= Omega(i, j);
    }
  return xi;
}

CubicCoefficients cubic_coefficients(const AsymptoticNet& net, const VectorField& xi, const ScalarField& lambda) {
  require_net(net);
  const GridDomain& d = net.domain();
  const Edges e(net.q);
  CubicCoefficients out{ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false), 0.0};

  // The four face vectors around (i,j) that each give the same triple product:
  // lambda12 xi12, xi1 / lambda1, xi2 / lambda2, lambda0 xi0 (missing faces skipped).
  auto forms = [&](int i, int j) {
    std::vector<Vec3> w;
    if (i < d.nu - 1 && j < d.nv - 1) w.push_back(lambda(i, j) * xi(i, j));
    if (i < d.nu - 1 && j > 0) w.push_back(xi(i, j - 1) / lambda(i, j - 1));
    if (i > 0 && j < d.nv - 1) w.push_back(xi(i - 1, j) / lambda(i - 1, j));
    if (i > 0 && j > 0) w.push_back(lambda(i - 1, j - 1) * xi(i - 1, j - 1));
    return w;
  };
  auto spread = [](const Vec3& a, const Vec3& b, const std::vector<Vec3>& w) {
    const Vec3 n = a.cross(b);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, mag = 0.0;
    for (const Vec3& v : w) {
      const double t = n.dot(v);
      lo = std::min(lo, t);
      hi = std::max(hi, t);
      mag = std::max(mag, a.norm() * b.norm() * v.norm());
    }
    return mag > 0.0 ? (hi - lo) / mag : 0.0;
  };

  for (int j = 0; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) {
      const auto w = forms(i, j);
      if (i >= 1 && i <= d.nu - 2) {
        out.A.set(i, j, triple_product(e.q1(i - 1, j), e.q1(i, j), w.front()));
        out.consistency = std::max(out.consistency, spread(e.q1(i - 1, j), e.q1(i, j), w));
      }
      if (j >= 1 && j <= d.nv - 2) {
        out.B.set(i, j, triple_product(e.q2(i, j), e.q2(i, j - 1), w.front()));
        out.consistency = std::max(out.consistency, spread(e.q2(i, j), e.q2(i, j - 1), w));
      }
    }
  return out;
}

ScalarField mean_curvature(const ScalarField& lambda) {
  const GridDomain& d = lambda.domain();
  ScalarField H(d, Carrier::Vertex, false);
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      if (!(lambda.defined(i - 1, j - 1) && lambda.defined(i, j - 1) && lambda.defined(i - 1, j) &&
            lambda.defined(i, j)))
        continue;
      const double l0 = lambda(i - 1, j - 1), l1 = lambda(i, j - 1), l2 = lambda(i - 1, j), l12 = lambda(i, j);
      H.set(i, j, l12 * l12 - 1.0 / (l1 * l1) - 1.0 / (l2 * l2) + l0 * l0);
    }
  return H;
}

namespace {

// |lhs - (a X + b Y)| over the magnitude of every term, coefficients included.
double expansion_residual(const Vec3& lhs, Tracked a, const Vec3& X, Tracked b, const Vec3& Y, double lhs_scale) {
  const Vec3 rhs = a.v * X + b.v * Y;
  return rel_residual(lhs, rhs, lhs_scale + a.m * X.norm() + b.m * Y.norm());
}

}  // namespace

ResidualReport gauss_residuals(const AsymptoticNet& net, const ScalarField& Omega, const ScalarField& lambda,
                               const ScalarField& A, const ScalarField& B, const VectorField& xi,
                               const VectorField* nu) {
  require_net(net);
  const GridDomain& d = net.domain();
  const Edges e(net.q);
  ResidualReport r;
  for (const char* n : {"gauss_q11_pp", "gauss_q11_pm", "gauss_q11_mp", "gauss_q11_mm", "gauss_q22_pp",
                        "gauss_q22_pm", "gauss_q22_mp", "gauss_q22_mm", "gauss_d1m_0", "gauss_d1m_1", "gauss_d1p_0",
                        "gauss_d1p_1", "gauss_d2m_0", "gauss_d2m_1", "gauss_d2p_0", "gauss_d2p_1"})
    r.touch(n);

  // Gauss I at interior vertices.
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Tracked l0 = lambda(i - 1, j - 1), l1 = lambda(i, j - 1), l2 = lambda(i - 1, j), l12 = lambda(i, j);
      const Tracked O0 = Omega(i - 1, j - 1), O1 = Omega(i, j - 1), O2 = Omega(i - 1, j), O12 = Omega(i, j);
      const Vec3 &P = e.q1(i, j), &Pm = e.q1(i - 1, j), &Q = e.q2(i, j), &Qm = e.q2(i, j - 1);
      const Tracked A0 = A(i, j), B0 = B(i, j);
      const Vec3 q11 = P - Pm, q22 = Q - Qm;
      const double s1 = P.norm() + Pm.norm(), s2 = Q.norm() + Qm.norm();
      const Index at{i, j};
      // q11 forms; pp and mp are written for P, pm and mm for P-.
      r.record("gauss_q11_pp", expansion_residual(q11, (O12 - O2 / (l2 * l12)) / O12, P, A0 / (l12 * O12), Q, s1), at);
      r.record("gauss_q11_pm", expansion_residual(q11, (O1 - l0 * l1 * O0) / O1, P, l1 * A0 / O1, Qm, s1), at);
      r.record("gauss_q11_mp", expansion_residual(q11, (l2 * l12 * O12 - O2) / O2, Pm, l2 * A0 / O2, Q, s1), at);
      r.record("gauss_q11_mm", expansion_residual(q11, (O1 / (l0 * l1) - O0) / O0, Pm, A0 / (l0 * O0), Qm, s1), at);
      r.record("gauss_q22_pp", expansion_residual(q22, B0 / (l12 * O12), P, (O12 - O1 / (l1 * l12)) / O12, Q, s2), at);
      r.record("gauss_q22_pm", expansion_residual(q22, l1 * B0 / O1, P, (l1 * l12 * O12 - O1) / O1, Qm, s2), at);
      r.record("gauss_q22_mp", expansion_residual(q22, l2 * B0 / O2, Pm, (O2 - l0 * l2 * O0) / O2, Q, s2), at);
      r.record("gauss_q22_mm", expansion_residual(q22, B0 / (l0 * O0), Pm, (O2 / (l0 * l2) - O0) / O0, Qm, s2), at);
    }

  // Gauss II, u-direction: vertex (i,j) between faces (i-1,j) and (i,j).
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Tracked l2 = lambda(i - 1, j), l12 = lambda(i, j), O2 = Omega(i - 1, j), O12 = Omega(i, j);
      const Tracked A0 = A(i, j), A2 = A(i, j + 1);
      const Vec3 &x12 = xi(i, j), &x2 = xi(i - 1, j);
      const Vec3 D1m = l12.v * x12 - x2 / l2.v;
      const Vec3 D1p = x12 / l12.v - l2.v * x2;
      const double sm = l12.v * x12.norm() + x2.norm() / l2.v, sp = x12.norm() / l12.v + l2.v * x2.norm();
      const Index at{i, j};
      const Tracked one = 1.0;
      const Tracked cu = (one / (l2 * l2) - l12 * l12), cv = (l12 * A2 - A0 / l12), cw = (A2 / l2 - l2 * A0);
      r.record("gauss_d1m_0", expansion_residual(D1m, cu / (O12 * l12), e.q1(i, j), cv / (O12 * O2 * l2), e.q2(i, j), sm), at);
      r.record("gauss_d1m_1", expansion_residual(D1m, cu / (O2 / l2), e.q1(i - 1, j), cw / (O2 * O12 / l12), e.q2(i, j), sm), at);
      const Tracked cp = (one / (l12 * l12) - l2 * l2);
      r.record("gauss_d1p_0", expansion_residual(D1p, cp / (O12 / l12), e.q1(i, j + 1), cv / (O12 * O2 / l2), e.q2(i, j), sp), at);
      r.record("gauss_d1p_1", expansion_residual(D1p, cp / (O2 * l2), e.q1(i - 1, j + 1), cw / (O2 * O12 * l12), e.q2(i, j), sp), at);
      if (nu) {
        r.record("orth_d1m_nu", std::abs(D1m.dot((*nu)(i, j))) / (sm * (*nu)(i, j).norm()), at);
        r.record("orth_d1p_nu", std::abs(D1p.dot((*nu)(i, j + 1))) / (sp * (*nu)(i, j + 1).norm()), at);
      }
    }

  // Gauss II, v-direction: vertex (i,j) between faces (i,j-1) and (i,j).
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      const Tracked l1 = lambda(i, j - 1), l12 = lambda(i, j), O1 = Omega(i, j - 1), O12 = Omega(i, j);
      const Tracked B0 = B(i, j), B1 = B(i + 1, j);
      const Vec3 &x12 = xi(i, j), &x1 = xi(i, j - 1);
      const Vec3 D2m = l12.v * x12 - x1 / l1.v;
      const Vec3 D2p = x12 / l12.v - l1.v * x1;
      const double sm = l12.v * x12.norm() + x1.norm() / l1.v, sp = x12.norm() / l12.v + l1.v * x1.norm();
      const Index at{i, j};
      const Tracked one = 1.0;
      const Tracked cv = (one / (l1 * l1) - l12 * l12), cu = (l12 * B1 - B0 / l12), cw = (B1 / l1 - l1 * B0);
      r.record("gauss_d2m_0", expansion_residual(D2m, cu / (O12 * O1 * l1), e.q1(i, j), cv / (O12 * l12), e.q2(i, j), sm), at);
      r.record("gauss_d2m_1", expansion_residual(D2m, cw / (O1 * O12 / l12), e.q1(i, j), cv / (O1 / l1), e.q2(i, j - 1), sm), at);
      const Tracked cp = (one / (l12 * l12) - l1 * l1);
      r.record("gauss_d2p_0", expansion_residual(D2p, cu / (O12 * O1 / l1), e.q1(i, j), cp / (O12 / l12), e.q2(i + 1, j), sp), at);
      r.record("gauss_d2p_1", expansion_residual(D2p, cw / (O1 * O12 * l12), e.q1(i, j), cp / (O1 * l1), e.q2(i + 1, j - 1), sp), at);
      if (nu) {
        r.record("orth_d2m_nu", std::abs(D2m.dot((*nu)(i, j))) / (sm * (*nu)(i, j).norm()), at);
        r.record("orth_d2p_nu", std::abs(D2p.dot((*nu)(i + 1, j))) / (sp * (*nu)(i + 1, j).norm()), at);
      }
    }
  return r;
}

ResidualReport normal_pairing_residuals(const VectorField& nu, const VectorField& xi, const ScalarField& lambda) {
  ResidualReport r;
  r.touch("nu_xi_pairing");
  for (int j = 0; j < xi.nj(); ++j)
    for (int i = 0; i < xi.ni(); ++i) {
      const double l = lambda(i, j);
      const Vec3& x = xi(i, j);
      const std::array<std::pair<Index, double>, 4> cyc{std::pair{Index{i, j}, 1.0 / l}, std::pair{Index{i + 1, j}, l},
                                                       std::pair{Index{i, j + 1}, l},
                                                       std::pair{Index{i + 1, j + 1}, 1.0 / l}};
      for (const auto& [w, target] : cyc) {
        const Vec3& n = nu(w.i, w.j);
        r.record("nu_xi_pairing", std::abs(n.dot(x) - target) / std::max(n.norm() * x.norm(), target), {i, j});
      }
    }
  return r;
}

SphereTest affine_sphere_test(const ScalarField& lambda, const ScalarField& A, const ScalarField& B,
                              const ScalarField& Omega, double tol) {
  const GridDomain& d = lambda.domain();
  SphereTest out;
  // lambda12 A2 = lambda2 A0 at (i,j), faces (i-1,j) and (i,j).
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      if (!(A.defined(i, j) && A.defined(i, j + 1))) continue;
      const double lhs = lambda(i, j) * A(i, j + 1), rhs = lambda(i - 1, j) * A(i, j);
      out.identity_residual = std::max(out.identity_residual,
                                       std::abs(lhs - rhs) / (Omega(i, j) + std::abs(lhs) + std::abs(rhs)));
    }
  // lambda12 B1 = lambda1 B0 at (i,j), faces (i,j-1) and (i,j).
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      if (!(B.defined(i, j) && B.defined(i + 1, j))) continue;
      const double lhs = lambda(i, j) * B(i + 1, j), rhs = lambda(i, j - 1) * B(i, j);
      out.identity_residual = std::max(out.identity_residual,
                                       std::abs(lhs - rhs) / (Omega(i, j) + std::abs(lhs) + std::abs(rhs)));
    }
  out.is_sphere = out.identity_residual <= tol;

  // c by least squares over c Omega = 1/lambda - lambda; the misfit is
  // normalized by 1/lambda + lambda since the difference cancels near lambda = 1.
  double oo = 0.0, orr = 0.0;
  std::size_t n = 0;
  lambda.for_each_defined([&](int i, int j, double l) {
    oo += Omega(i, j) * Omega(i, j);
    orr += Omega(i, j) * (1.0 / l - l);
    ++n;
  });
  if (n > 0) {
    const double c = orr / oo;
    lambda.for_each_defined([&](int i, int j, double l) {
      const double r = std::abs(c * Omega(i, j) - (1.0 / l - l)) / (1.0 / l + l + std::abs(c) * Omega(i, j));
      out.ratio_residual = std::max(out.ratio_residual, r);
    });
    if (out.is_sphere && out.ratio_residual <= tol) out.bobenko_constant = c;
  }
  return out;
}

IndefiniteCompatibility compatibility_residuals(const ScalarField& Omega, const ScalarField& lambda,
                                                const ScalarField& A, const ScalarField& B) {
  const GridDomain& d = lambda.domain();
  IndefiniteCompatibility out{ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
                              ScalarField(d, Carrier::Vertex, false), {}};
  for (const char* n : {"indef_comp1", "indef_comp2", "indef_comp3"}) out.report.touch(n);
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Tracked l0 = lambda(i - 1, j - 1), l1 = lambda(i, j - 1), l2 = lambda(i - 1, j), l12 = lambda(i, j);
      const Tracked O0 = Omega(i - 1, j - 1), O1 = Omega(i, j - 1), O2 = Omega(i - 1, j), O12 = Omega(i, j);
      const Tracked A0 = A(i, j), B0 = B(i, j);
      const Index at{i, j};

      const Tracked lhs1 = O2 / (l2 * l12 * O12);
      const Tracked rhs1 = l0 * l1 * O0 / O1 + A0 * B0 * l1 / (l12 * O12 * O1);
      out.comp1.set(i, j, rel_residual(lhs1, rhs1));
      out.report.record("indef_comp1", out.comp1(i, j), at);

      if (!(A.defined(i, j + 1) && A.defined(i, j - 1) && B.defined(i + 1, j) && B.defined(i - 1, j))) continue;
      const Tracked A2 = A(i, j + 1), A2b = A(i, j - 1), B1 = B(i + 1, j), B1b = B(i - 1, j);
      const Tracked one = 1.0;
      const Tracked a = (one / (l2 * l2) - l12 * l12) / (O12 * l12);
      const Tracked b = (l12 * A2 - A0 / l12) / (O12 * O2 * l2);
      const Tracked c = (one / (l1 * l1) - l0 * l0) * l1 / O1;
      const Tracked dd = (l1 * A0 - A2b / l1) * l0 / (O1 * O0);
      const Tracked e = (l12 * B1 - B0 / l12) / (O12 * O1 * l1);
      const Tracked f = (one / (l1 * l1) - l12 * l12) / (O12 * l12);
      const Tracked g = (l2 * B0 - B1b / l2) * l0 / (O2 * O0);
      const Tracked h = (one / (l2 * l2) - l0 * l0) * l2 / O2;
      const Tracked c2 = a - c + dd * B0 / (l12 * O12) - e + g * O2 / (l2 * l12 * O12);
      const Tracked c3 = b - dd * O1 / (l1 * l12 * O12) - f - g * A0 / (l12 * O12) + h;
      out.comp2.set(i, j, rel_residual(c2, 0.0));
      out.comp3.set(i, j, rel_residual(c3, 0.0));
      out.report.record("indef_comp2", out.comp2(i, j), at);
      out.report.record("indef_comp3", out.comp3(i, j), at);
    }
  return out;
}

Registration affine_register(const VectorField& qa, const VectorField& qb, const RegistrationFrame& frame) {
  if (!(qa.domain() == qb.domain())) throw Error(ErrorCode::MalformedInput, "registration needs identical domains");
  auto col = [](const VectorField& q, Index k, Index base) { return Vec3(q.at(k) - q.at(base)); };
  Mat3 Ea, Eb;
  Ea << col(qa, frame.a, frame.base), col(qa, frame.b, frame.base), col(qa, frame.c, frame.base);
  Eb << col(qb, frame.a, frame.base), col(qb, frame.b, frame.base), col(qb, frame.c, frame.base);
  const double scale = Ea.col(0).norm() * Ea.col(1).norm() * Ea.col(2).norm();
  if (!(std::abs(Ea.determinant()) > 1e-12 * scale))
    throw Error(ErrorCode::DegenerateNet, "registration frame is degenerate", frame.base);
  Registration r;
  r.L = Eb * Ea.inverse();
  r.t = qb.at(frame.base) - r.L * qa.at(frame.base);
  r.det = r.L.determinant();

  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  qb.for_each_defined([&](int, int, const Vec3& p) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  });
  const double diameter = (hi - lo).norm();
  double worst = 0.0;
  for (int j = 0; j < qa.nj(); ++j)
    for (int i = 0; i < qa.ni(); ++i)
      if (qa.defined(i, j) && qb.defined(i, j)) worst = std::max(worst, (r.L * qa(i, j) + r.t - qb(i, j)).norm());
  r.residual = diameter > 0.0 ? worst / diameter : worst;
  return r;
}

namespace {

// Cross products of nearly parallel co-normals cancel; |nu||nu'| bounds their
// rounding error, so it joins the scale.
ResidualReport lelieuvre_residuals(const AsymptoticNet& net, const VectorField& nu) {
  const GridDomain& d = net.domain();
  const Edges e(net.q);
  ResidualReport r;
  r.touch("lelieuvre");
  for (int j = 0; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) {
      if (i + 1 < d.nu) {
        const Vec3 c = nu(i, j).cross(nu(i + 1, j));
        const double scale = e.q1(i, j).norm() + nu(i, j).norm() * nu(i + 1, j).norm();
        r.record("lelieuvre", (c - e.q1(i, j)).norm() / scale, {i, j});
      }
      if (j + 1 < d.nv) {
        const Vec3 c = nu(i, j).cross(nu(i, j + 1));
        const double scale = e.q2(i, j).norm() + nu(i, j).norm() * nu(i, j + 1).norm();
        r.record("lelieuvre", (c + e.q2(i, j)).norm() / scale, {i, j});
      }
    }
  return r;
}

}  // namespace

IndefiniteInvariants analyze_indefinite(const AsymptoticNet& net, const IndefiniteOptions& opt) {
  IndefiniteInvariants inv;
  const FaceMetric fm = face_metric(net);
  inv.M = fm.M;
  inv.Omega = fm.Omega;
  ConormalField cf = conormal_field(net, opt.seed_lambda, opt.seed_face);
  inv.nu = std::move(cf.nu);
  inv.lambda = std::move(cf.lambda);
  inv.path_residual = cf.path_residual;
  const MoutardFit mf = moutard_coefficient(inv.nu);
  inv.Hstar = mf.Hstar;
  inv.moutard_residual = mf.max_residual;
  inv.xi = affine_normal(net, inv.Omega);

  const GridDomain& d = net.domain();
  if (d.nu >= 3 || d.nv >= 3) {
    const CubicCoefficients cc = cubic_coefficients(net, inv.xi, inv.lambda);
    inv.A = cc.A;
    inv.B = cc.B;
    inv.cubic_consistency = cc.consistency;
  } else {
    inv.A = ScalarField(d, Carrier::Vertex, false);
    inv.B = ScalarField(d, Carrier::Vertex, false);
  }
  inv.H = mean_curvature(inv.lambda);

  ResidualReport& r = inv.residuals;
  r.merge(lelieuvre_residuals(net, inv.nu));
  r.record("conormal_path", inv.path_residual, {-1, -1});
  r.record("moutard_parallelism", inv.moutard_residual, {-1, -1});
  r.touch("hstar_lambda2");
  inv.Hstar.for_each_defined([&](int i, int j, double h) {
    const double l2 = inv.lambda(i, j) * inv.lambda(i, j);
    r.record("hstar_lambda2", std::abs(h - l2) / l2, {i, j});
  });
  r.record("cubic_consistency", inv.cubic_consistency, {-1, -1});
  r.merge(normal_pairing_residuals(inv.nu, inv.xi, inv.lambda));
  r.merge(gauss_residuals(net, inv.Omega, inv.lambda, inv.A, inv.B, inv.xi, &inv.nu));
  r.merge(compatibility_residuals(inv.Omega, inv.lambda, inv.A, inv.B).report);
  return inv;
}

IndefiniteStructure structure_of(const IndefiniteInvariants& inv) { return {inv.Omega, inv.lambda, inv.A, inv.B}; }

}  // namespace quadaffine
