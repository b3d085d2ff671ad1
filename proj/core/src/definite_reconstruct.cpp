// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Reconstruction of a definite net from (Omega, lambda, alpha, beta).
//
// Seed: three co-normals around vertex (1,1) along e3, e2, e1 scaled so that
// alpha(1,1) holds, the fourth from the closure relation, and the five
// vertices they fix by Lelieuvre. Phase 1 solves one sparse least-squares
// system in the remaining vertices and the normals: Gauss I for q11, q22 at
// interior vertices, q12 at faces, and the coincidence relations next to the
// seed. The corners of the interior block are excluded there because their
// outer neighbours are underdetermined; phase 2 fills them with a local solve.
// Grid corners are parallelograms.
#include <quadaffine/definite.hpp>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseQR>
#include <Eigen/OrderingMethods>

#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace quadaffine {

namespace {

Mat3 skew(const Vec3& a) {
  Mat3 s;
  s << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  return s;
}

struct Params {
  const DefiniteStructure& s;
  ScalarField gamma, delta;

  double label(Index v, int su, int sv) const {
    if (su > 0 && sv > 0) return s.alpha.at(v);
    if (su < 0 && sv > 0) return s.beta.at(v);
    if (su < 0 && sv < 0) return gamma.at(v);
    return delta.at(v);
  }
  double kappa(Index v, int su, int sv) const { return label(v, su, sv) * s.Omega.at(v); }

  // Gauss I coefficients of (P, Q, xi) for q11 and q22.
  std::array<double, 6> gauss(Index v) const {
    const double a = s.alpha.at(v), b = s.beta.at(v), d = delta.at(v), O = s.Omega.at(v), l = s.lambda.at(v);
    const double l2 = l * l;
    return {(a - b / l2) / a, (d / l2 - a) / a, b * O / l, (b / l2 - a) / a, (a - d / l2) / a, d * O / l};
  }
};

void check_structure(const DefiniteStructure& s) {
  const GridDomain& d = s.Omega.domain();
  if (d.nu < 5 || d.nv < 5) throw Error(ErrorCode::DomainTooSmall, "definite reconstruction needs 5x5 vertices");
  for (const ScalarField* f : {&s.Omega, &s.lambda, &s.alpha, &s.beta}) {
    if (!(f->domain() == d) || f->carrier() != Carrier::Vertex)
      throw Error(ErrorCode::MalformedInput, "structure fields must be vertex fields on one domain");
    for (int j = 1; j + 1 < d.nv; ++j)
      for (int i = 1; i + 1 < d.nu; ++i)
        if (!f->defined(i, j) || !((*f)(i, j) > 0.0) || !std::isfinite((*f)(i, j)))
          throw Error(ErrorCode::MalformedInput, "structure values must be positive at interior vertices", Index{i, j});
  }
}

// Linear system over 3-vector unknowns keyed by vertex and kind.
class System {
 public:
  enum Kind { Q = 0, Xi = 1 };

  int add_var(Kind k, Index v) {
    const int id = int(vars_.size());
    vars_[{k, v.i, v.j}] = id;
    return id;
  }
  bool has(Kind k, Index v) const { return vars_.count({k, v.i, v.j}) != 0; }
  int id(Kind k, Index v) const { return vars_.at({k, v.i, v.j}); }
  int count() const { return int(vars_.size()); }

  // Adds sum M_k x_k + c = 0; terms on known vertices move to the right side.
  void add(const std::vector<std::pair<Mat3, std::pair<Kind, Index>>>& terms, const Vec3& c,
           const VectorField& known) {
    Vec3 rhs = -c;
    for (const auto& [M, key] : terms) {
      if (has(key.first, key.second)) {
        const int base = 3 * id(key.first, key.second);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if (M(a, b) != 0.0) trip_.emplace_back(rows_ + a, base + b, M(a, b));
      } else {
        rhs -= M * known.at(key.second);
      }
    }
    for (int a = 0; a < 3; ++a) rhs_.push_back(rhs(a));
    rows_ += 3;
  }

  Eigen::VectorXd solve(double& misfit) const {
    Eigen::SparseMatrix<double> A(rows_, 3 * count());
    A.setFromTriplets(trip_.begin(), trip_.end());
    A.makeCompressed();
    const Eigen::Map<const Eigen::VectorXd> b(rhs_.data(), Eigen::Index(rhs_.size()));
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.compute(A);
    if (qr.info() != Eigen::Success) throw Error(ErrorCode::NumericFailure, "sparse QR factorization failed");
    Eigen::VectorXd x = qr.solve(b);
    if (qr.info() != Eigen::Success || !x.allFinite())
      throw Error(ErrorCode::NumericFailure, "sparse least-squares solve failed");
    const double bn = b.norm();
    misfit = bn > 0.0 ? (A * x - b).norm() / bn : (A * x - b).norm();
    return x;
  }

 private:
  std::map<std::tuple<int, int, int>, int> vars_;
  std::vector<Eigen::Triplet<double>> trip_;
  std::vector<double> rhs_;
  int rows_ = 0;
};

using Term = std::pair<Mat3, std::pair<System::Kind, Index>>;

Term qt(double c, Index v) { return {c * Mat3::Identity(), {System::Q, v}}; }

}  // namespace

DefiniteReconstruction reconstruct_definite(const DefiniteStructure& s, const Vec3& q00, double gate_tol) {
  check_structure(s);
  const GridDomain& d = s.Omega.domain();
  const int n = d.nu, m = d.nv;

  const ResidualReport gate = structure_compatibility(s);
  for (const auto& [name, st] : gate.entries())
    if (st.max > gate_tol) {
      std::ostringstream os;
      os << name << " residual " << st.max << " exceeds " << gate_tol;
      throw Error(ErrorCode::CompatibilityViolation, os.str(), st.where);
    }

  Params P{s, ScalarField(d, Carrier::Vertex, false), ScalarField(d, Carrier::Vertex, false)};
  for (int j = 1; j + 1 < m; ++j)
    for (int i = 1; i + 1 < n; ++i) {
      P.gamma.set(i, j, 2.0 / s.lambda(i, j) - s.alpha(i, j));
      P.delta.set(i, j, 2.0 * s.lambda(i, j) - s.beta(i, j));
    }
  auto inside = [&](Index v) { return v.i >= 1 && v.j >= 1 && v.i + 1 < n && v.j + 1 < m; };

  // Seed co-normals at the faces around (1,1).
  const Index s11{1, 1};
  const double k = std::cbrt(s.Omega(1, 1) * s.alpha(1, 1));
  std::map<Index, Vec3> seed_nu;
  seed_nu[{1, 1}] = k * Vec3::UnitZ();
  seed_nu[{1, 0}] = k * Vec3::UnitY();
  seed_nu[{0, 1}] = k * Vec3::UnitX();
  seed_nu[{0, 0}] = (-P.gamma(1, 1) * seed_nu[{1, 1}] + P.delta(1, 1) * seed_nu[{0, 1}] +
                     s.beta(1, 1) * seed_nu[{1, 0}]) /
                    s.alpha(1, 1);
  const Vec3 &npp = seed_nu[{1, 1}], &npm = seed_nu[{1, 0}], &nmp = seed_nu[{0, 1}], &nmm = seed_nu[{0, 0}];

  VectorField q(d, Carrier::Vertex, false);
  q.set(1, 1, Vec3::Zero());
  q.set(2, 1, npm.cross(npp));
  q.set(0, 1, -nmm.cross(nmp));
  q.set(1, 2, npp.cross(nmp));
  q.set(1, 0, -npm.cross(nmm));
  const std::set<Index> fixed{{1, 1}, {2, 1}, {0, 1}, {1, 2}, {1, 0}};

  // Interior block corners other than the seed, with their outward directions.
  const std::array<std::pair<Index, std::array<int, 2>>, 3> corners{
      std::pair{Index{n - 2, 1}, std::array<int, 2>{1, -1}}, std::pair{Index{1, m - 2}, std::array<int, 2>{-1, 1}},
      std::pair{Index{n - 2, m - 2}, std::array<int, 2>{1, 1}}};
  std::set<Index> excluded, corner_set;
  for (const auto& [c, dir] : corners) {
    corner_set.insert(c);
    excluded.insert({c.i + dir[0], c.j});
    excluded.insert({c.i, c.j + dir[1]});
  }
  const std::set<Index> grid_corners{{0, 0}, {n - 1, 0}, {0, m - 1}, {n - 1, m - 1}};

  System sys;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      const Index v{i, j};
      if (!fixed.count(v) && !excluded.count(v) && !grid_corners.count(v)) sys.add_var(System::Q, v);
    }
  for (int j = 1; j + 1 < m; ++j)
    for (int i = 1; i + 1 < n; ++i)
      if (!corner_set.count({i, j})) sys.add_var(System::Xi, {i, j});

  // Gauss I, q11 and q22.
  for (int j = 1; j + 1 < m; ++j)
    for (int i = 1; i + 1 < n; ++i) {
      const Index v{i, j};
      if (corner_set.count(v)) continue;
      const auto c = P.gauss(v);
      const Index ip{i + 1, j}, im{i - 1, j}, jp{i, j + 1}, jm{i, j - 1};
      // (P - P-) - c0 P - c1 Q - c2 xi, with P = q(i+1) - q, P- = q - q(i-1).
      sys.add({qt(1.0 - c[0], ip), qt(-2.0 + c[0] + c[1], v), qt(1.0, im), qt(-c[1], jp),
               {-c[2] * Mat3::Identity(), {System::Xi, v}}},
              Vec3::Zero(), q);
      sys.add({qt(1.0 - c[4], jp), qt(-2.0 + c[3] + c[4], v), qt(1.0, jm), qt(-c[3], ip),
               {-c[5] * Mat3::Identity(), {System::Xi, v}}},
              Vec3::Zero(), q);
    }
  // Gauss I, q12 at face (i,j).
  for (int j = 1; j + 2 < m; ++j)
    for (int i = 1; i + 2 < n; ++i) {
      const Index v{i, j};
      const double a0O0 = s.alpha(i, j) * s.Omega(i, j);
      const double e1 = (P.delta(i, j + 1) * s.Omega(i, j + 1) - a0O0) / a0O0;
      const double e2 = (s.beta(i + 1, j) * s.Omega(i + 1, j) - a0O0) / a0O0;
      sys.add({qt(1.0, {i + 1, j + 1}), qt(-1.0 - e1, {i + 1, j}), qt(-1.0 - e2, {i, j + 1}), qt(1.0 + e1 + e2, v)},
              Vec3::Zero(), q);
    }
  // Coincidence relations at the neighbours of the seed vertex.
  auto all_fixed = [&](Index a, Index b) { return fixed.count(a) && fixed.count(b); };
  for (const auto& [f, nv] : seed_nu) {
    for (const Index w : {f, Index{f.i + 1, f.j}, Index{f.i, f.j + 1}, Index{f.i + 1, f.j + 1}}) {
      if (w == s11 || !inside(w) || corner_set.count(w)) continue;
      const int su = f.i == w.i ? 1 : -1, sv = f.j == w.j ? 1 : -1;
      const Index ua = su > 0 ? w : Index{w.i - 1, w.j}, ub = su > 0 ? Index{w.i + 1, w.j} : w;
      const Index va = sv > 0 ? w : Index{w.i, w.j - 1}, vb = sv > 0 ? Index{w.i, w.j + 1} : w;
      const Vec3 c = -P.kappa(w, su, sv) * nv;
      if (all_fixed(ua, ub)) {
        const Mat3 S = skew(q.at(ub) - q.at(ua));
        sys.add({{S, {System::Q, vb}}, {-S, {System::Q, va}}}, c, q);
      } else if (all_fixed(va, vb)) {
        const Mat3 S = -skew(q.at(vb) - q.at(va));
        sys.add({{S, {System::Q, ub}}, {-S, {System::Q, ua}}}, c, q);
      }
    }
  }

  DefiniteReconstruction out;
  const Eigen::VectorXd x = sys.solve(out.system_residual);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i)
      if (sys.has(System::Q, {i, j})) q.set(i, j, x.segment<3>(3 * sys.id(System::Q, {i, j})));

  // Phase 2: local solve for the two outer neighbours of each remaining corner.
  auto nu_at = [&](Index v, int fu, int fv) {
    const Vec3 eu = fu > 0 ? Vec3(q(v.i + 1, v.j) - q.at(v)) : Vec3(q.at(v) - q(v.i - 1, v.j));
    const Vec3 ev = fv > 0 ? Vec3(q(v.i, v.j + 1) - q.at(v)) : Vec3(q.at(v) - q(v.i, v.j - 1));
    return Vec3(eu.cross(ev) / P.kappa(v, fu, fv));
  };
  for (const auto& [c, dir] : corners) {
    const int su = dir[0], sv = dir[1];
    const int i = c.i, j = c.j;
    const auto g = P.gauss(c);
    const Vec3 nuF1 = nu_at({i, j - sv}, su, sv);
    const Vec3 nuF2 = nu_at({i - su, j}, su, sv);
    const double kF1 = P.kappa(c, su, -sv), kF2 = P.kappa(c, -su, sv);
    const Vec3 qc = q.at(c);
    const Vec3 ev_known = sv > 0 ? Vec3(q(i, j) - q(i, j - 1)) : Vec3(q(i, j + 1) - q(i, j));
    const Vec3 eu_known = su > 0 ? Vec3(q(i, j) - q(i - 1, j)) : Vec3(q(i + 1, j) - q(i, j));
    const Mat3 I = Mat3::Identity(), Z = Mat3::Zero();

    // Unknown x = (q(i+su, j), q(i, j+sv), xi(i,j)); edges as affine maps of x.
    using Row = Eigen::Matrix<double, 3, 9>;
    auto edge = [&](bool along_u, bool plus) -> std::pair<Row, Vec3> {
      Row M = Row::Zero();
      const int s_dir = along_u ? su : sv;
      const int slot = along_u ? 0 : 3;
      if ((plus && s_dir > 0) || (!plus && s_dir < 0)) {
        M.block<3, 3>(0, slot) = plus ? I : Mat3(-I);
        return {M, plus ? Vec3(-qc) : qc};
      }
      const Index o = along_u ? Index{plus ? i + 1 : i - 1, j} : Index{i, plus ? j + 1 : j - 1};
      return {M, plus ? Vec3(q.at(o) - qc) : Vec3(qc - q.at(o))};
    };
    const auto [PM, Pc] = edge(true, true);
    const auto [PmM, Pmc] = edge(true, false);
    const auto [QM, Qc] = edge(false, true);
    const auto [QmM, Qmc] = edge(false, false);
    Row XI = Row::Zero();
    XI.block<3, 3>(0, 6) = I;

    Eigen::Matrix<double, 12, 9> M;
    Eigen::Matrix<double, 12, 1> r;
    M.block<3, 9>(0, 0) << -su * skew(ev_known), Z, Z;
    r.segment<3>(0) = kF1 * nuF1 + (-skew(ev_known)) * (su * qc);
    M.block<3, 9>(3, 0) << Z, sv * skew(eu_known), Z;
    r.segment<3>(3) = kF2 * nuF2 + skew(eu_known) * (sv * qc);
    M.block<3, 9>(6, 0) = (1.0 - g[0]) * PM - PmM - g[1] * QM - g[2] * XI;
    r.segment<3>(6) = -((1.0 - g[0]) * Pc - Pmc - g[1] * Qc);
    M.block<3, 9>(9, 0) = (1.0 - g[4]) * QM - QmM - g[3] * PM - g[5] * XI;
    r.segment<3>(9) = -((1.0 - g[4]) * Qc - Qmc - g[3] * Pc);
    const Eigen::Matrix<double, 9, 1> sol = M.colPivHouseholderQr().solve(r);
    if (!sol.allFinite()) throw Error(ErrorCode::NumericFailure, "corner solve failed", c);
    q.set(i + su, j, sol.segment<3>(0));
    q.set(i, j + sv, sol.segment<3>(3));
  }

  for (const Index& c : grid_corners) {
    const int ni = c.i == 0 ? 1 : n - 2, nj = c.j == 0 ? 1 : m - 2;
    q.set(c.i, c.j, q(ni, c.j) + q(c.i, nj) - q(ni, nj));
  }
  const Vec3 shift = q00 - q(0, 0);
  for (auto& v : q.values()) v += shift;
  if (!q.all_defined() || !q.all_finite()) throw Error(ErrorCode::NumericFailure, "reconstruction left gaps");
  out.net = ConjugateNet(std::move(q));
  return out;
}

}  // namespace quadaffine
