// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Definite discrete affine surfaces: special non-degenerate conjugate nets.
//
// Co-normals live on faces, everything else on vertices. Face (i,j) has the
// lower-left corner (i,j). Around an interior vertex (i,j):
//   faces    ++ = (i,j)   -+ = (i-1,j)   -- = (i-1,j-1)   +- = (i,j-1)
//   labels   alpha        beta           gamma            delta
//   edges    P = q1(i,j)  P- = q1(i-1,j)  Q = q2(i,j)  Q- = q2(i,j-1)
//   deltas   D1 = [P,P-,Q]  D2 = [P-,Q-,Q]  D3 = [P,P-,Q-]  D4 = [P,Q-,Q]
// Neighbouring vertices: 0 = (i,j), 1 = (i+1,j), 2 = (i,j+1), 12 = (i+1,j+1),
// 1bar = (i-1,j), 2bar = (i,j-1).
//
// Lelieuvre:  q1(i,j) = nu(i,j-1) x nu(i,j),  q2(i,j) = -nu(i-1,j) x nu(i,j)
// Coincidence: nu++ = P x Q / (alpha Omega), nu-+ = P- x Q / (beta Omega),
//              nu-- = P- x Q- / (gamma Omega), nu+- = P x Q- / (delta Omega)
#pragma once

#include <quadaffine/grid.hpp>
#include <quadaffine/indefinite.hpp>
#include <quadaffine/residual.hpp>

#include <optional>

namespace quadaffine {

struct ConjugateNet {
  VectorField q;  // vertex positions

  ConjugateNet() = default;
  explicit ConjugateNet(VectorField positions);
  const GridDomain& domain() const { return q.domain(); }
};

// Pass iff every face is planar within tol: [q1, q2, d] over the product of
// the three lengths, where d spans the far corner.
ValidationReport validate_conjugate(const ConjugateNet& net, double tol = 1e-8);

// Flips the v axis when every Delta is negative. Returns true if flipped.
bool orient_conjugate(ConjugateNet& net);

struct Deltas {
  ScalarField D1, D2, D3, D4;  // interior vertices
  ScalarField special;         // |D1 D3 / (D2 D4) - 1|
};
// Throws NonConvex on mixed signs or a vanishing Delta.
Deltas deltas(const ConjugateNet& net);

// 2 Omega^2 = mean(P x Q, P- x Q, P- x Q-, P x Q-) . (q11 + q22).
ScalarField vertex_metric(const ConjugateNet& net);

struct DefiniteConormal {
  VectorField nu;                      // faces
  ScalarField alpha, beta, gamma, delta;  // interior vertices
  double path_residual = 0.0;
};
// Breadth-first over interior vertices from seed_vertex with alpha fixed
// there. Refuses nets whose special residual exceeds special_tol.
DefiniteConormal conormal_field_definite(const ConjugateNet& net, double seed_alpha = 1.0,
                                         Index seed_vertex = {1, 1}, double special_tol = 1e-8);

struct DefiniteParameters {
  ScalarField Omega, alpha, beta, gamma, delta, lambda;  // interior vertices
  ScalarField closure;  // |beta nu+- + delta nu-+ - alpha nu-- - gamma nu++| over the term norms
  double max_closure = 0.0;
};
DefiniteParameters parameters_from_conormal(const VectorField& nu);

// Least-squares H* with nu11 + nu22 = H* nu at interior faces.
MoutardFit moutard_coefficient_definite(const VectorField& nu);

// xi = (q11 + q22) / (2 Omega) at interior vertices.
VectorField affine_normal_definite(const ConjugateNet& net, const ScalarField& Omega);

// Gauss I: q11 and q22 at interior vertices, q12 at faces whose corners 0, 1
// and 2 are interior.
ResidualReport gauss_residuals_definite(const ConjugateNet& net, const DefiniteParameters& p, const VectorField& xi);

// The four dual Lelieuvre identities and the nu.xi cycle lambda, 1/lambda,
// lambda, 1/lambda over ++, -+, --, +-.
ResidualReport dual_lelieuvre_residuals(const VectorField& nu, const ScalarField& lambda, const ConjugateNet& net,
                                        const VectorField& xi);

struct WeightedDerivatives {
  VectorField D1p, D1m;  // u-edges: lambda1 xi1 - xi0/lambda0, xi1/lambda1 - lambda0 xi0
  VectorField D2p, D2m;  // v-edges: lambda2 xi2 - xi0/lambda0, xi2/lambda2 - lambda0 xi0
  ScalarField E, F;      // vertices where their stencils fit
  ScalarField Eprime;    // Q coefficient of D2m, the v-analogue of E
  ResidualReport report; // expansions and orthogonality
};
WeightedDerivatives weighted_normal_derivatives(const VectorField& xi, const ConjugateNet& net,
                                                const DefiniteParameters& p, const VectorField& nu);

struct DiagonalCurvature {
  ScalarField H1star, H2star, H;  // faces with four interior corners
  ResidualReport report;          // H2* nu = d1 x Dd2 and H1* nu = -d2 x Dd1
};
DiagonalCurvature diagonal_curvature(const VectorField& nu, const ScalarField& Hstar, const ConjugateNet& net,
                                     const VectorField& xi, const DefiniteParameters& p);

// Least-squares coefficients of Dd1 in (q1(i,j), q2(i+1,j)) and of Dd2 in
// (q1(i,j), q2(i,j)) per face. Needs only a net and its normal; used where no
// co-normal exists.
struct DiagonalFit {
  ScalarField a, b, c, d;
  double residual = 0.0;  // worst out-of-plane remainder, relative
};
DiagonalFit diagonal_coefficients_fit(const ConjugateNet& net, const VectorField& xi, const ScalarField& lambda);

struct DefiniteCompatibility {
  ScalarField comp1, comp2, comp3;  // at vertex 0 of each applicable face
  ScalarField a, b, c, d;
  ResidualReport report;
};
DefiniteCompatibility compatibility_residuals_definite(const DefiniteParameters& p, const WeightedDerivatives& w,
                                                       const DiagonalCurvature& k);

// Data of the reconstruction theorem; gamma and delta follow from lambda.
struct DefiniteStructure {
  ScalarField Omega, lambda, alpha, beta;  // interior vertices
};

// Compatibility of reconstruction data alone: DefComp1, and DefComp2 minus
// DefComp3 with H* eliminated through H1* - H2*.
ResidualReport structure_compatibility(const DefiniteStructure& s);

struct DefiniteReconstruction {
  ConjugateNet net;
  double system_residual = 0.0;  // least-squares misfit of the Gauss system, relative
};

// Needs at least 5x5 vertices. The result has q(0,0) = q00.
DefiniteReconstruction reconstruct_definite(const DefiniteStructure& s, const Vec3& q00 = Vec3::Zero(),
                                            double gate_tol = 1e-8);

struct DefiniteInvariants {
  Deltas D;
  DefiniteParameters params;
  VectorField nu, xi;
  ScalarField Hstar;
  WeightedDerivatives derivatives;
  DiagonalCurvature curvature;
  DefiniteCompatibility compatibility;
  double path_residual = 0.0;
  double moutard_residual = 0.0;
  ResidualReport residuals;
};

struct DefiniteOptions {
  double seed_alpha = 1.0;
  Index seed_vertex{1, 1};
  double special_tol = 1e-8;
};

// Full pipeline. The net must pass validate_conjugate and be special.
DefiniteInvariants analyze_definite(const ConjugateNet& net, const DefiniteOptions& opt = {});

DefiniteStructure structure_of(const DefiniteInvariants& inv);

}  // namespace quadaffine
