// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Indefinite discrete affine surfaces: non-degenerate asymptotic nets.
//
// Stencil table at an interior vertex (i,j):
//   faces    lambda0 = (i-1,j-1)  lambda1 = (i,j-1)  lambda2 = (i-1,j)  lambda12 = (i,j)
//   edges    P = q1(i,j)  P- = q1(i-1,j)  Q = q2(i,j)  Q- = q2(i,j-1)
//   cubic    A0 = A(i,j), A2 = A(i,j+1), A2bar = A(i,j-1); B1 = B(i+1,j), B1bar = B(i-1,j)
//
// Sign conventions:
//   Lelieuvre  nu(i,j) x nu(i+1,j) = q1(i,j),  nu(i,j) x nu(i,j+1) = -q2(i,j)
//   cubic      A = [P-, P, lambda12 xi12],  B = [Q, Q-, lambda12 xi12]
#pragma once

#include <quadaffine/grid.hpp>
#include <quadaffine/residual.hpp>

#include <optional>
#include <string>

namespace quadaffine {

struct AsymptoticNet {
  VectorField q;  // vertex positions

  AsymptoticNet() = default;
  explicit AsymptoticNet(VectorField positions);
  const GridDomain& domain() const { return q.domain(); }
};

// Pass iff every interior cross is planar within tol (triple product over the
// product of the three edge lengths) and M > 0 on every face.
ValidationReport validate_asymptotic(const AsymptoticNet& net, double tol = 1e-8);

// Swaps the u and v axes when M < 0 on every face. Returns true if swapped.
bool orient_asymptotic(AsymptoticNet& net);

struct FaceMetric {
  ScalarField M;      // [q1(i,j), q2(i,j), q2(i+1,j)]
  ScalarField Omega;  // sqrt(M)
};
FaceMetric face_metric(const AsymptoticNet& net);

struct ConormalField {
  VectorField nu;        // vertices
  ScalarField lambda;    // faces, > 0
  double path_residual;  // worst disagreement between quad paths, relative
};
// Breadth-first propagation over faces from seed_face.
ConormalField conormal_field(const AsymptoticNet& net, double seed_lambda = 1.0, Index seed_face = {0, 0});

// rho on even (i+j), 1/rho on odd. Works for any carrier.
VectorField rho_rescale(const VectorField& nu, double rho);

struct MoutardFit {
  ScalarField Hstar;     // faces
  ScalarField residual;  // non-parallel remainder relative to the diagonal sum
  double max_residual = 0.0;
};
// Least-squares H* with H*(nu0 + nu12) = nu1 + nu2 per face.
MoutardFit moutard_coefficient(const VectorField& nu);

// xi = q12 / Omega per face.
VectorField affine_normal(const AsymptoticNet& net, const ScalarField& Omega);

struct CubicCoefficients {
  ScalarField A;  // defined for 1 <= i <= nu-2
  ScalarField B;  // defined for 1 <= j <= nv-2
  double consistency = 0.0;  // spread of the equivalent expressions, relative
};
CubicCoefficients cubic_coefficients(const AsymptoticNet& net, const VectorField& xi, const ScalarField& lambda);

// H = lambda12^2 - lambda1^-2 - lambda2^-2 + lambda0^2 on interior vertices.
ScalarField mean_curvature(const ScalarField& lambda);

// Gauss I (four forms each of q11 and q22) and Gauss II (two forms each of
// the four weighted derivatives of xi), plus orthogonality of the weighted
// derivatives to nu when nu is supplied.
ResidualReport gauss_residuals(const AsymptoticNet& net, const ScalarField& Omega, const ScalarField& lambda,
                               const ScalarField& A, const ScalarField& B, const VectorField& xi,
                               const VectorField* nu = nullptr);

// nu.xi cycle around each face: 1/lambda, lambda, lambda, 1/lambda.
ResidualReport normal_pairing_residuals(const VectorField& nu, const VectorField& xi, const ScalarField& lambda);

struct SphereTest {
  bool is_sphere = false;
  double identity_residual = 0.0;  // worst of lambda12 A2 = lambda2 A0 and lambda12 B1 = lambda1 B0
  std::optional<double> bobenko_constant;  // present iff (1/lambda - lambda)/Omega is constant
  double ratio_residual = 0.0;  // worst normalized misfit of c Omega = 1/lambda - lambda
};
SphereTest affine_sphere_test(const ScalarField& lambda, const ScalarField& A, const ScalarField& B,
                              const ScalarField& Omega, double tol = 1e-9);

struct IndefiniteCompatibility {
  ScalarField comp1, comp2, comp3;  // normalized residuals at interior vertices
  ResidualReport report;
};
IndefiniteCompatibility compatibility_residuals(const ScalarField& Omega, const ScalarField& lambda,
                                                const ScalarField& A, const ScalarField& B);

// Data of the reconstruction theorem.
struct IndefiniteStructure {
  ScalarField Omega;   // faces
  ScalarField lambda;  // faces
  ScalarField A;       // vertices, 1 <= i <= nu-2
  ScalarField B;       // vertices, 1 <= j <= nv-2
};

struct QuadSeed {
  Vec3 q00, q10, q01, q11;
};

struct IndefiniteReconstruction {
  AsymptoticNet net;
  double gauss_residual = 0.0;  // Gauss I forms not used by the march, on the result
};

// Marches rows 0 and 1 along u, then every column along v. The default seed is
// the cube corner q00 = 0, q10 = h e1, q01 = h e2, q11 = h (e1 + e2 + e3) with
// h^3 = Omega(0,0)^2, so that M(0,0) = Omega(0,0)^2.
IndefiniteReconstruction reconstruct(const IndefiniteStructure& s, std::optional<QuadSeed> seed = std::nullopt,
                                     double gate_tol = 1e-8);

// Four vertices whose three difference vectors span space in a generic net.
struct RegistrationFrame {
  Index base{0, 0};
  Index a{1, 0};
  Index b{0, 1};
  Index c{1, 1};
};

struct Registration {
  Mat3 L = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  double residual = 0.0;  // max |L qa + t - qb| over the diameter of qb
  double det = 1.0;
};
// Solves qb = L qa + t exactly on the frame and reports the fit elsewhere.
Registration affine_register(const VectorField& qa, const VectorField& qb, const RegistrationFrame& frame = {});

struct IndefiniteInvariants {
  ScalarField M, Omega, lambda, Hstar;
  VectorField nu, xi;
  ScalarField A, B, H;
  double path_residual = 0.0;
  double moutard_residual = 0.0;
  double cubic_consistency = 0.0;
  ResidualReport residuals;
};

struct IndefiniteOptions {
  double seed_lambda = 1.0;
  Index seed_face{0, 0};
};

// Full pipeline: metric, co-normal, normal, cubic form, curvature and every
// residual family. The net must already pass validate_asymptotic.
IndefiniteInvariants analyze_indefinite(const AsymptoticNet& net, const IndefiniteOptions& opt = {});

IndefiniteStructure structure_of(const IndefiniteInvariants& inv);

}  // namespace quadaffine
