// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include <quadaffine/indefinite.hpp>

#include <cmath>
#include <sstream>

namespace quadaffine {

namespace {

void check_structure(const IndefiniteStructure& s) {
  const GridDomain& d = s.Omega.domain();
  if (d.nu < 2 || d.nv < 2) throw Error(ErrorCode::DomainTooSmall, "structure needs 2x2 vertices");
  if (!(s.lambda.domain() == d && s.A.domain() == d && s.B.domain() == d))
    throw Error(ErrorCode::MalformedInput, "structure fields on different domains");
  if (s.Omega.carrier() != Carrier::Face || s.lambda.carrier() != Carrier::Face || s.A.carrier() != Carrier::Vertex ||
      s.B.carrier() != Carrier::Vertex)
    throw Error(ErrorCode::MalformedInput, "structure fields on the wrong carriers");
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      const double O = s.Omega(i, j), l = s.lambda(i, j);
      if (!s.Omega.defined(i, j) || !s.lambda.defined(i, j) || !(O > 0.0) || !(l > 0.0) || !std::isfinite(O) ||
          !std::isfinite(l))
        throw Error(ErrorCode::MalformedInput, "Omega and lambda must be positive on every face", Index{i, j});
    }
  for (int j = 0; j < d.nv; ++j)
    for (int i = 1; i + 1 < d.nu; ++i)
      if (!s.A.defined(i, j) || !std::isfinite(s.A(i, j)))
        throw Error(ErrorCode::MalformedInput, "A missing", Index{i, j});
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i)
      if (!s.B.defined(i, j) || !std::isfinite(s.B(i, j)))
        throw Error(ErrorCode::MalformedInput, "B missing", Index{i, j});
}

void gate(const IndefiniteStructure& s, double tol) {
  const IndefiniteCompatibility c = compatibility_residuals(s.Omega, s.lambda, s.A, s.B);
  for (const auto& [name, st] : c.report.entries()) {
    if (st.max <= tol) continue;
    std::ostringstream os;
    os << name << " residual " << st.max << " exceeds " << tol;
    throw Error(ErrorCode::CompatibilityViolation, os.str(), st.where);
  }
}

}  // namespace

IndefiniteReconstruction reconstruct(const IndefiniteStructure& s, std::optional<QuadSeed> seed, double gate_tol) {
  check_structure(s);
  gate(s, gate_tol);
  const GridDomain& d = s.Omega.domain();
  const ScalarField& O = s.Omega;
  const ScalarField& L = s.lambda;

  const double h = std::cbrt(O(0, 0) * O(0, 0));
  const QuadSeed qs = seed ? *seed : QuadSeed{Vec3::Zero(), h * Vec3::UnitX(), h * Vec3::UnitY(), Vec3(h, h, h)};
  VectorField q(d, Carrier::Vertex, false);
  q.set(0, 0, qs.q00);
  q.set(1, 0, qs.q10);
  q.set(0, 1, qs.q01);
  q.set(1, 1, qs.q11);

  auto put = [&](int i, int j, const Vec3& v) {
    if (!v.allFinite()) throw Error(ErrorCode::NumericFailure, "non-finite vertex during reconstruction", Index{i, j});
    q.set(i, j, v);
  };

  // Rows 0 and 1 along u. Vertex (i,0) uses faces (i-1,0),(i,0); vertex (i,1) uses them from above.
  for (int i = 1; i + 1 < d.nu; ++i) {
    {
      const double l2 = L(i - 1, 0), l12 = L(i, 0), O2 = O(i - 1, 0), O12 = O(i, 0);
      const Vec3 Pm = q(i, 0) - q(i - 1, 0);
      const Vec3 Q = q(i, 1) - q(i, 0);
      const Vec3 q11 = (l2 * l12 * O12 - O2) / O2 * Pm + l2 * s.A(i, 0) / O2 * Q;
      put(i + 1, 0, q(i, 0) + Pm + q11);
    }
    {
      const double l0 = L(i - 1, 0), l1 = L(i, 0), O0 = O(i - 1, 0), O1 = O(i, 0);
      const Vec3 Pm = q(i, 1) - q(i - 1, 1);
      const Vec3 Qm = q(i, 1) - q(i, 0);
      const Vec3 q11 = (O1 / (l0 * l1) - O0) / O0 * Pm + s.A(i, 1) / (l0 * O0) * Qm;
      put(i + 1, 1, q(i, 1) + Pm + q11);
    }
  }

  // Every column along v; the last column has no face on its +u side.
  for (int j = 1; j + 1 < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) {
      const Vec3 Qm = q(i, j) - q(i, j - 1);
      const double B0 = s.B(i, j);
      Vec3 q22;
      if (i + 1 < d.nu) {
        const double l1 = L(i, j - 1), l12 = L(i, j), O1 = O(i, j - 1), O12 = O(i, j);
        const Vec3 P = q(i + 1, j) - q(i, j);
        q22 = l1 * B0 / O1 * P + (l1 * l12 * O12 - O1) / O1 * Qm;
      } else {
        const double l0 = L(i - 1, j - 1), l2 = L(i - 1, j), O0 = O(i - 1, j - 1), O2 = O(i - 1, j);
        const Vec3 Pm = q(i, j) - q(i - 1, j);
        q22 = B0 / (l0 * O0) * Pm + (O2 / (l0 * l2) - O0) / O0 * Qm;
      }
      put(i, j + 1, q(i, j) + Qm + q22);
    }

  IndefiniteReconstruction out{AsymptoticNet(std::move(q)), 0.0};
  const VectorField xi = affine_normal(out.net, O);
  const ResidualReport r = gauss_residuals(out.net, O, L, s.A, s.B, xi);
  for (const auto& [name, st] : r.entries())
    if (name.rfind("gauss_q", 0) == 0) out.gauss_residual = std::max(out.gauss_residual, st.max);
  return out;
}

}  // namespace quadaffine
