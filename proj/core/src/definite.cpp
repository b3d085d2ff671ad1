// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include <quadaffine/definite.hpp>

#include "tracked.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

namespace quadaffine {

ConjugateNet::ConjugateNet(VectorField positions) : q(std::move(positions)) {
  if (q.carrier() != Carrier::Vertex) throw Error(ErrorCode::MalformedInput, "net positions must live on vertices");
  if (!q.all_defined() || !q.all_finite()) throw Error(ErrorCode::MalformedInput, "net positions must be finite");
}

namespace {

void require_net(const ConjugateNet& net, int min_size) {
  const GridDomain& d = net.domain();
  if (d.nu < min_size || d.nv < min_size) throw Error(ErrorCode::DomainTooSmall, "conjugate net too small");
  if (!net.q.all_finite()) throw Error(ErrorCode::MalformedInput, "non-finite vertex position");
}

bool interior(const GridDomain& d, int i, int j) { return i >= 1 && j >= 1 && i + 1 < d.nu && j + 1 < d.nv; }

struct Cross {
  Vec3 P, Pm, Q, Qm;
};

Cross cross_at(const VectorField& q, int i, int j) {
  return {q(i + 1, j) - q(i, j), q(i, j) - q(i - 1, j), q(i, j + 1) - q(i, j), q(i, j) - q(i, j - 1)};
}

std::array<double, 4> delta_values(const Cross& c) {
  return {triple_product(c.P, c.Pm, c.Q), triple_product(c.Pm, c.Qm, c.Q), triple_product(c.P, c.Pm, c.Qm),
          triple_product(c.P, c.Qm, c.Q)};
}

// Face crosses in label order alpha, beta, gamma, delta.
std::array<Vec3, 4> face_crosses(const Cross& c) {
  return {c.P.cross(c.Q), c.Pm.cross(c.Q), c.Pm.cross(c.Qm), c.P.cross(c.Qm)};
}

// Faces in label order around vertex (i,j).
std::array<Index, 4> label_faces(int i, int j) {
  return {Index{i, j}, Index{i - 1, j}, Index{i - 1, j - 1}, Index{i, j - 1}};
}

}  // namespace

ValidationReport validate_conjugate(const ConjugateNet& net, double tol) {
  require_net(net, 2);
  const GridDomain& d = net.domain();
  const VectorField& q = net.q;
  ValidationReport r;
  r.planarity_ok = true;
  r.nondegenerate_ok = true;
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      const Vec3 a = q(i + 1, j) - q(i, j), b = q(i, j + 1) - q(i, j), c = q(i + 1, j + 1) - q(i, j);
      const double s = a.norm() * b.norm() * c.norm();
      const double t = std::abs(triple_product(a, b, c));
      const double res = s > 0.0 ? t / s : t;
      r.max_planarity = std::max(r.max_planarity, res);
      if (!(res <= tol)) {
        r.planarity_ok = false;
        r.failures.push_back({i, j});
      }
    }
  r.min_metric = std::numeric_limits<double>::infinity();
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const auto D = delta_values(cross_at(q, i, j));
      const double lo = *std::min_element(D.begin(), D.end());
      r.min_metric = std::min(r.min_metric, lo);
      if (!(lo > 0.0)) {
        r.nondegenerate_ok = false;
        r.failures.push_back({i, j});
      }
    }
  if (!std::isfinite(r.min_metric)) r.min_metric = 0.0;
  r.pass = r.planarity_ok && r.nondegenerate_ok;
  return r;
}

bool orient_conjugate(ConjugateNet& net) {
  require_net(net, 3);
  const GridDomain& d = net.domain();
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i)
      for (double x : delta_values(cross_at(net.q, i, j)))
        if (!(x < 0.0)) return false;
  VectorField flipped(d, Carrier::Vertex);
  for (int j = 0; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) flipped(i, d.nv - 1 - j) = net.q(i, j);
  net.q = std::move(flipped);
  return true;
}

Deltas deltas(const ConjugateNet& net) {
  require_net(net, 3);
  const GridDomain& d = net.domain();
  Deltas out{ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
             ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
             ScalarField(d, Carrier::Vertex, false)};
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const auto D = delta_values(cross_at(net.q, i, j));
      for (double x : D)
        if (!(x > 0.0)) throw Error(ErrorCode::NonConvex, "Delta values must all be positive", Index{i, j});
      out.D1.set(i, j, D[0]);
      out.D2.set(i, j, D[1]);
      out.D3.set(i, j, D[2]);
      out.D4.set(i, j, D[3]);
      out.special.set(i, j, std::abs(D[0] * D[2] / (D[1] * D[3]) - 1.0));
    }
  return out;
}

ScalarField vertex_metric(const ConjugateNet& net) {
  require_net(net, 3);
  const GridDomain& d = net.domain();
  ScalarField O(d, Carrier::Vertex, false);
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Cross c = cross_at(net.q, i, j);
      const auto f = face_crosses(c);
      const Vec3 avg = (f[0] + f[1] + f[2] + f[3]) / 4.0;
      const double two_o2 = avg.dot(c.P - c.Pm + c.Q - c.Qm);
      if (!(two_o2 > 0.0)) throw Error(ErrorCode::NonConvex, "non-positive definite metric", Index{i, j});
      O.set(i, j, std::sqrt(two_o2 / 2.0));
    }
  return O;
}

DefiniteConormal conormal_field_definite(const ConjugateNet& net, double seed_alpha, Index seed_vertex,
                                         double special_tol) {
  if (!(seed_alpha > 0.0) || !std::isfinite(seed_alpha))
    throw Error(ErrorCode::InvalidParameter, "seed alpha must be positive");
  const Deltas D = deltas(net);
  const GridDomain& d = net.domain();
  if (!interior(d, seed_vertex.i, seed_vertex.j))
    throw Error(ErrorCode::InvalidParameter, "seed vertex must be interior", seed_vertex);
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i)
      if (!(D.special(i, j) <= special_tol))
        throw Error(ErrorCode::NoConormal, "net is not special: D1 D3 != D2 D4", Index{i, j});
  const ScalarField Om = vertex_metric(net);

  DefiniteConormal out{VectorField(d, Carrier::Face, false), ScalarField(d, Carrier::Vertex, false),
                       ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
                       ScalarField(d, Carrier::Vertex, false), 0.0};
  std::vector<std::uint8_t> seen(d.vertex_count(), 0);
  std::deque<Index> queue{seed_vertex};
  seen[out.alpha.flat(seed_vertex.i, seed_vertex.j)] = 1;

  while (!queue.empty()) {
    const auto [i, j] = queue.front();
    queue.pop_front();
    const Cross c = cross_at(net.q, i, j);
    const auto cr = face_crosses(c);
    const auto faces = label_faces(i, j);
    const double O = Om(i, j), O2 = O * O;
    const double D1 = D.D1(i, j), D2 = D.D2(i, j), D3 = D.D3(i, j);

    double a = seed_alpha;
    if (!(Index{i, j} == seed_vertex)) {
      a = std::numeric_limits<double>::quiet_NaN();
      for (int k = 0; k < 4; ++k) {
        const Index f = faces[k];
        if (!out.nu.defined(f.i, f.j)) continue;
        // nu = c / (kappa Omega)
        const double kappa = cr[k].squaredNorm() / (O * out.nu(f.i, f.j).dot(cr[k]));
        switch (k) {
          case 0: a = kappa; break;
          case 1: a = D1 / (kappa * O2); break;
          case 2: a = kappa * D1 / D2; break;
          default: a = D.D4(i, j) / (kappa * O2); break;
        }
        break;
      }
      if (!(a > 0.0) || !std::isfinite(a))
        throw Error(ErrorCode::InconsistentNet, "co-normal propagation produced alpha <= 0", Index{i, j});
    }
    const double b = D1 / (a * O2), g = D2 / (b * O2), dl = D3 / (g * O2);
    out.alpha.set(i, j, a);
    out.beta.set(i, j, b);
    out.gamma.set(i, j, g);
    out.delta.set(i, j, dl);
    const std::array<double, 4> label{a, b, g, dl};
    for (int k = 0; k < 4; ++k) {
      const Index f = faces[k];
      const Vec3 v = cr[k] / (label[k] * O);
      if (!v.allFinite()) throw Error(ErrorCode::InconsistentNet, "non-finite co-normal", f);
      if (!out.nu.defined(f.i, f.j))
        out.nu.set(f.i, f.j, v);
      else
        out.path_residual = std::max(out.path_residual, (out.nu(f.i, f.j) - v).norm() / v.norm());
    }
    for (const Index& w : {Index{i + 1, j}, Index{i - 1, j}, Index{i, j + 1}, Index{i, j - 1}}) {
      if (!interior(d, w.i, w.j)) continue;
      auto& s = seen[out.alpha.flat(w.i, w.j)];
      if (!s) {
        s = 1;
        queue.push_back(w);
      }
    }
  }
  // Every face has an interior corner once the grid is at least 3x3.
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i)
      if (!out.nu.defined(i, j)) throw Error(ErrorCode::DomainTooSmall, "face without an interior corner", Index{i, j});
  return out;
}

DefiniteParameters parameters_from_conormal(const VectorField& nu) {
  if (nu.carrier() != Carrier::Face) throw Error(ErrorCode::MalformedInput, "definite co-normals live on faces");
  const GridDomain& d = nu.domain();
  if (d.nu < 3 || d.nv < 3) throw Error(ErrorCode::DomainTooSmall, "parameters need an interior vertex");
  DefiniteParameters p{ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
                       ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
                       ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false),
                       ScalarField(d, Carrier::Vertex, false), 0.0};
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Vec3 &pp = nu(i, j), &mp = nu(i - 1, j), &mm = nu(i - 1, j - 1), &pm = nu(i, j - 1);
      const double four_o2 = triple_product(pp - mm, mp, pm) * triple_product(pp, mp - pm, mm);
      if (!(four_o2 > 0.0) || !std::isfinite(four_o2))
        throw Error(ErrorCode::NonConvex, "non-positive metric from co-normals", Index{i, j});
      const double O = std::sqrt(four_o2) / 2.0;
      const double a = triple_product(pm, pp, mp) / O, b = triple_product(pp, mp, mm) / O;
      const double g = triple_product(mp, mm, pm) / O, dl = triple_product(mm, pm, pp) / O;
      p.Omega.set(i, j, O);
      p.alpha.set(i, j, a);
      p.beta.set(i, j, b);
      p.gamma.set(i, j, g);
      p.delta.set(i, j, dl);
      p.lambda.set(i, j, (b + dl) / 2.0);
      const Vec3 cl = b * pm + dl * mp - a * mm - g * pp;
      const double scale = b * pm.norm() + dl * mp.norm() + a * mm.norm() + g * pp.norm();
      const double res = scale > 0.0 ? cl.norm() / scale : cl.norm();
      p.closure.set(i, j, res);
      p.max_closure = std::max(p.max_closure, res);
    }
  return p;
}

MoutardFit moutard_coefficient_definite(const VectorField& nu) {
  if (nu.carrier() != Carrier::Face) throw Error(ErrorCode::MalformedInput, "definite co-normals live on faces");
  const GridDomain& d = nu.domain();
  const int fi = nu.ni(), fj = nu.nj();
  MoutardFit out{ScalarField(d, Carrier::Face, false), ScalarField(d, Carrier::Face, false), 0.0};
  double scale = 0.0;
  nu.for_each_defined([&](int, int, const Vec3& v) { scale = std::max(scale, v.norm()); });
  for (int j = 1; j + 1 < fj; ++j)
    for (int i = 1; i + 1 < fi; ++i) {
      const Vec3& v = nu(i, j);
      if (!(v.norm() > 1e-14 * scale)) throw Error(ErrorCode::DegenerateNet, "vanishing co-normal", Index{i, j});
      const Vec3 lap = nu(i + 1, j) + nu(i - 1, j) + nu(i, j + 1) + nu(i, j - 1) - 4.0 * v;
      const double h = lap.dot(v) / v.squaredNorm();
      const double mag = nu(i + 1, j).norm() + nu(i - 1, j).norm() + nu(i, j + 1).norm() + nu(i, j - 1).norm() +
                         4.0 * v.norm();
      const double res = (lap - h * v).norm() / mag;
      out.Hstar.set(i, j, h);
      out.residual.set(i, j, res);
      out.max_residual = std::max(out.max_residual, res);
    }
  return out;
}

VectorField affine_normal_definite(const ConjugateNet& net, const ScalarField& Omega) {
  const GridDomain& d = net.domain();
  VectorField xi(d, Carrier::Vertex, false);
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      if (!Omega.defined(i, j) || !(Omega(i, j) > 0.0))
        throw Error(ErrorCode::DegenerateNet, "non-positive Omega", Index{i, j});
      const Cross c = cross_at(net.q, i, j);
      xi.set(i, j, (c.P - c.Pm + c.Q - c.Qm) / (2.0 * Omega(i, j)));
    }
  return xi;
}

ResidualReport dual_lelieuvre_residuals(const VectorField& nu, const ScalarField& lambda, const ConjugateNet& net,
                                        const VectorField& xi) {
  const GridDomain& d = net.domain();
  ResidualReport r;
  for (const char* n : {"dual_lelieuvre_1", "dual_lelieuvre_2", "dual_lelieuvre_3", "dual_lelieuvre_4",
                        "nu_xi_pairing_def"})
    r.touch(n);
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Cross c = cross_at(net.q, i, j);
      const Vec3 &pp = nu(i, j), &mp = nu(i - 1, j), &mm = nu(i - 1, j - 1), &pm = nu(i, j - 1);
      const double l0 = lambda(i, j);
      const Vec3& x0 = xi(i, j);
      const Index at{i, j};
      auto rec = [&](const char* name, const Vec3& lhs, const Vec3& rhs, double scale) {
        r.record(name, detail::rel_residual(lhs, rhs, scale), at);
      };
      rec("dual_lelieuvre_1", pp / l0 - l0 * mp, -c.Q.cross(x0), pp.norm() / l0 + l0 * mp.norm() + c.Q.norm() * x0.norm());
      rec("dual_lelieuvre_3", pp / l0 - l0 * pm, c.P.cross(x0), pp.norm() / l0 + l0 * pm.norm() + c.P.norm() * x0.norm());
      if (interior(d, i, j + 1)) {
        const double l2 = lambda(i, j + 1);
        const Vec3& x2 = xi(i, j + 1);
        rec("dual_lelieuvre_2", l2 * pp - mp / l2, -c.Q.cross(x2), l2 * pp.norm() + mp.norm() / l2 + c.Q.norm() * x2.norm());
      }
      if (interior(d, i + 1, j)) {
        const double l1 = lambda(i + 1, j);
        const Vec3& x1 = xi(i + 1, j);
        rec("dual_lelieuvre_4", l1 * pp - pm / l1, c.P.cross(x1), l1 * pp.norm() + pm.norm() / l1 + c.P.norm() * x1.norm());
      }
      const std::array<std::pair<const Vec3*, double>, 4> cyc{std::pair{&pp, l0}, std::pair{&mp, 1.0 / l0},
                                                             std::pair{&mm, l0}, std::pair{&pm, 1.0 / l0}};
      for (const auto& [n, target] : cyc)
        r.record("nu_xi_pairing_def", std::abs(n->dot(x0) - target) / std::max(n->norm() * x0.norm(), target), at);
    }
  return r;
}

DefiniteInvariants analyze_definite(const ConjugateNet& net, const DefiniteOptions& opt) {
  DefiniteInvariants inv;
  inv.D = deltas(net);
  const DefiniteConormal cn = conormal_field_definite(net, opt.seed_alpha, opt.seed_vertex, opt.special_tol);
  inv.nu = cn.nu;
  inv.path_residual = cn.path_residual;
  inv.params = parameters_from_conormal(inv.nu);
  const ScalarField Om = vertex_metric(net);
  inv.xi = affine_normal_definite(net, inv.params.Omega);
  const MoutardFit mf = moutard_coefficient_definite(inv.nu);
  inv.Hstar = mf.Hstar;
  inv.moutard_residual = mf.max_residual;

  ResidualReport& r = inv.residuals;
  r.record("conormal_path_def", inv.path_residual, {-1, -1});
  r.record("moutard_parallelism_def", inv.moutard_residual, {-1, -1});
  r.touch("special");
  inv.D.special.for_each_defined([&](int i, int j, double s) { r.record("special", s, {i, j}); });
  r.touch("parameter_closure");
  inv.params.closure.for_each_defined([&](int i, int j, double s) { r.record("parameter_closure", s, {i, j}); });

  // Parameters read back from nu must agree with the net and with the propagation.
  const DefiniteParameters& p = inv.params;
  for (const char* n : {"metric_consistency", "parameter_consistency", "lambda_identity", "alpha_gamma_identity",
                        "lelieuvre_def"})
    r.touch(n);
  const GridDomain& d = net.domain();
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i) {
      const Index at{i, j};
      r.record("metric_consistency", std::abs(p.Omega(i, j) - Om(i, j)) / Om(i, j), at);
      const double pairs[4][2] = {{p.alpha(i, j), cn.alpha(i, j)},
                                  {p.beta(i, j), cn.beta(i, j)},
                                  {p.gamma(i, j), cn.gamma(i, j)},
                                  {p.delta(i, j), cn.delta(i, j)}};
      for (const auto& pr : pairs) r.record("parameter_consistency", std::abs(pr[0] - pr[1]) / std::abs(pr[1]), at);
      const double ag = p.alpha(i, j) + p.gamma(i, j), bd = p.beta(i, j) + p.delta(i, j);
      r.record("alpha_gamma_identity", std::abs(ag * bd - 4.0) / 4.0, at);
      r.record("lambda_identity", std::abs(p.lambda(i, j) - 2.0 / ag) / p.lambda(i, j), at);
    }
  for (int j = 0; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) {
      if (i + 1 < d.nu && j >= 1 && j + 1 < d.nv) {
        const Vec3 e = net.q(i + 1, j) - net.q(i, j);
        r.record("lelieuvre_def", (inv.nu(i, j - 1).cross(inv.nu(i, j)) - e).norm() / e.norm(), {i, j});
      }
      if (j + 1 < d.nv && i >= 1 && i + 1 < d.nu) {
        const Vec3 e = net.q(i, j + 1) - net.q(i, j);
        r.record("lelieuvre_def", (inv.nu(i - 1, j).cross(inv.nu(i, j)) + e).norm() / e.norm(), {i, j});
      }
    }

  r.merge(gauss_residuals_definite(net, p, inv.xi));
  r.merge(dual_lelieuvre_residuals(inv.nu, p.lambda, net, inv.xi));
  inv.derivatives = weighted_normal_derivatives(inv.xi, net, p, inv.nu);
  r.merge(inv.derivatives.report);
  inv.curvature = diagonal_curvature(inv.nu, inv.Hstar, net, inv.xi, p);
  r.merge(inv.curvature.report);
  inv.compatibility = compatibility_residuals_definite(p, inv.derivatives, inv.curvature);
  r.merge(inv.compatibility.report);
  return inv;
}

DefiniteStructure structure_of(const DefiniteInvariants& inv) {
  return {inv.params.Omega, inv.params.lambda, inv.params.alpha, inv.params.beta};
}

}  // namespace quadaffine
