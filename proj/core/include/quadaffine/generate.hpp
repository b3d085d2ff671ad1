// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Forward constructions: co-normal fields from Moutard-type recursions,
// Lelieuvre integration into nets, and the built-in examples.
#pragma once

#include <quadaffine/definite.hpp>
#include <quadaffine/grid.hpp>
#include <quadaffine/indefinite.hpp>

#include <functional>
#include <map>
#include <string>
#include <vector>

namespace quadaffine {

// Value per face, addressed by lattice coordinates of its lower-left corner.
using Schedule = std::function<double(int i, int j)>;

Schedule constant_schedule(double value);
// `even` where i + j is even, `odd` elsewhere.
Schedule parity_schedule(double even, double odd);
// Reads a face field; lattice (i,j) maps to field entry (i - di, j - dj).
Schedule field_schedule(ScalarField hstar, int di = 0, int dj = 0);

struct IndefiniteSeed {
  enum class Shape {
    Goursat,   // first = nu(i,0), second = nu(0,j), sharing nu(0,0)
    Diagonal,  // first = nu(k,-k) for k = 0..L, second = nu(k+1,-k) for k = 0..L-1
  };
  Shape shape = Shape::Diagonal;
  std::vector<Vec3> first, second;
  Schedule hstar;  // H* = lambda^2, must be positive
};

// Solves H*(nu0 + nu12) = nu1 + nu2 for nu12 face by face.
// Goursat: a first.size() x second.size() vertex field.
// Diagonal: lattice (a,b) stored at (a, b + L) of an (L+1) x (L+1) field;
// defined on the triangle a <= L, b <= 0, a + b >= 0.
VectorField moutard_extend_indefinite(const IndefiniteSeed& seed);

struct DefiniteSeed {
  std::vector<Vec3> col0, col1;  // nu on faces (0,j) and (1,j), j = 0..N
  Schedule hstar;                // H* with nu(i+1,j) + nu(i-1,j) + nu(i,j+1) + nu(i,j-1) = (4 + H*) nu(i,j)
  int columns = 0;               // face columns to produce, at least 2
};

// Face field of a columns x (N+1) face grid. Column i >= 2 is defined for
// i - 1 <= j <= N - i + 1, the rows where the five-point stencil closes.
VectorField moutard_extend_definite(const DefiniteSeed& seed);

// Rectangle [first, last] of a field's own entries, on the matching domain.
// Throws MalformedInput if any entry in the rectangle is undefined.
template <class T>
Field<T> crop(const Field<T>& f, Index first, Index last);

struct LelieuvreClosure {
  ScalarField closure;  // |q1(i,j) + q2(i+1,j) - q1(i,j+1) - q2(i,j)| per face
  double max = 0.0;
  double scale = 0.0;  // largest edge vector norm
};
// Indefinite: how far the Lelieuvre edges of a vertex co-normal field fail to
// close around each face.
LelieuvreClosure lelieuvre_closure(const VectorField& nu);

// q(0,0) = q0. Throws NonIntegrable when the Moutard residual exceeds tol.
AsymptoticNet lelieuvre_integrate_indefinite(const VectorField& nu, const Vec3& q0 = Vec3::Zero(), double tol = 1e-9);

// nu on faces, vertex domain at least 3x3. Boundary vertices come from the
// edge formula that exists there; grid corners close as parallelograms.
// q(0,0) = q0. Throws NonIntegrable when the five-point residual exceeds tol.
ConjugateNet lelieuvre_integrate_definite(const VectorField& nu, const Vec3& q0 = Vec3::Zero(), double tol = 1e-9);

enum class NetKind { Asymptotic, Conjugate };

const char* to_string(NetKind kind);

struct BuiltinSample {
  std::string name;
  NetKind kind = NetKind::Asymptotic;
  VectorField nu;                        // vertices (asymptotic) or faces (conjugate)
  ScalarField U, V;                      // continuous parameters per vertex
  Vec3 q0 = Vec3::Zero();                // position of vertex (0,0)
  std::map<std::string, double> params;  // every parameter, defaults resolved
};

// Names: hyperboloid, minimal, indefinite-cubic, paraboloid-definite,
// definite-cubic, definite-cubic-alt. Unknown names or parameters and
// out-of-range values throw InvalidParameter.
BuiltinSample sample_builtin(const std::string& name, const std::map<std::string, double>& params = {});
const std::vector<std::string>& builtin_names();
// Parameter names with their defaults.
std::map<std::string, double> builtin_defaults(const std::string& name);

struct GeneratedNet {
  BuiltinSample sample;
  VectorField q;
};
GeneratedNet generate_builtin(const std::string& name, const std::map<std::string, double>& params = {});

}  // namespace quadaffine
