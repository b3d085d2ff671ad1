// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Rectangular index space, typed fields and discrete difference operators.
//
// Carrier conventions (integer keys for half-integer positions):
//   vertex (i,j)      -> (i, j)
//   face   (i,j)      -> (i+1/2, j+1/2), corners (i,j),(i+1,j),(i,j+1),(i+1,j+1)
//   u-edge (i,j)      -> (i+1/2, j),     joins (i,j) and (i+1,j)
//   v-edge (i,j)      -> (i, j+1/2),     joins (i,j) and (i,j+1)
// Storage is row-major by j then i: flat index = j * ni + i.
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadaffine {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Index {
  int i = 0;
  int j = 0;
  auto operator<=>(const Index&) const = default;
};

enum class ErrorCode {
  DomainTooSmall,
  MalformedInput,
  DegenerateNet,
  InconsistentNet,
  InvalidParameter,
  NonConvex,
  NoConormal,
  NonIntegrable,
  CompatibilityViolation,
  NumericFailure,
  Parse,
  Io,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library. `where` locates the offending stencil
// when one exists.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, std::optional<Index> where = std::nullopt);
  ErrorCode code() const noexcept { return code_; }
  const std::optional<Index>& where() const noexcept { return where_; }

 private:
  ErrorCode code_;
  std::optional<Index> where_;
};

enum class Carrier { Vertex, Face, EdgeU, EdgeV };
enum class Axis { U, V };

struct GridDomain {
  int nu = 0;  // vertices along u
  int nv = 0;  // vertices along v

  GridDomain() = default;
  GridDomain(int nu_, int nv_);

  std::size_t vertex_count() const { return std::size_t(nu) * std::size_t(nv); }
  std::size_t face_count() const;
  std::size_t edge_u_count() const;
  std::size_t edge_v_count() const;

  // Index extents of a carrier; zero when the carrier is empty.
  int extent_i(Carrier c) const;
  int extent_j(Carrier c) const;

  bool operator==(const GridDomain&) const = default;
};

namespace detail {
template <class T>
T zero_value() {
  if constexpr (std::is_arithmetic_v<T>) {
    return T(0);
  } else {
    return T::Zero();
  }
}
inline bool finite_value(double x) { return std::isfinite(x); }
inline bool finite_value(const Vec3& x) { return x.allFinite(); }
}  // namespace detail

// Dense field with an explicit defined-mask. Undefined entries hold zero and
// are skipped by every reduction.
template <class T>
class Field {
 public:
  Field() = default;
  Field(GridDomain domain, Carrier carrier, bool defined = true)
      : domain_(domain),
        carrier_(carrier),
        ni_(domain.extent_i(carrier)),
        nj_(domain.extent_j(carrier)),
        values_(std::size_t(ni_) * std::size_t(nj_), detail::zero_value<T>()),
        mask_(values_.size(), defined ? 1 : 0) {}

  const GridDomain& domain() const { return domain_; }
  Carrier carrier() const { return carrier_; }
  int ni() const { return ni_; }
  int nj() const { return nj_; }
  std::size_t size() const { return values_.size(); }

  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < ni_ && j < nj_; }
  bool defined(int i, int j) const { return contains(i, j) && mask_[flat(i, j)] != 0; }

  const T& operator()(int i, int j) const { return values_[flat(i, j)]; }
  T& operator()(int i, int j) { return values_[flat(i, j)]; }
  const T& at(Index k) const { return (*this)(k.i, k.j); }

  void set(int i, int j, const T& v) {
    values_[flat(i, j)] = v;
    mask_[flat(i, j)] = 1;
  }
  void undefine(int i, int j) {
    values_[flat(i, j)] = detail::zero_value<T>();
    mask_[flat(i, j)] = 0;
  }

  std::size_t defined_count() const {
    std::size_t n = 0;
    for (auto m : mask_) n += m != 0;
    return n;
  }
  bool all_defined() const { return defined_count() == values_.size(); }

  bool all_finite() const {
    for (std::size_t k = 0; k < values_.size(); ++k)
      if (mask_[k] && !detail::finite_value(values_[k])) return false;
    return true;
  }

  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  std::size_t flat(int i, int j) const { return std::size_t(j) * std::size_t(ni_) + std::size_t(i); }

  template <class F>
  void for_each_defined(F&& f) const {
    for (int j = 0; j < nj_; ++j)
      for (int i = 0; i < ni_; ++i)
        if (mask_[flat(i, j)]) f(i, j, values_[flat(i, j)]);
  }

 private:
  GridDomain domain_{};
  Carrier carrier_ = Carrier::Vertex;
  int ni_ = 0;
  int nj_ = 0;
  std::vector<T> values_;
  std::vector<std::uint8_t> mask_;
};

using ScalarField = Field<double>;
using VectorField = Field<Vec3>;

struct FieldStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

FieldStats stats(const ScalarField& f);
// Statistics of the Euclidean norms of a vector field.
FieldStats norm_stats(const VectorField& f);

inline double triple_product(const Vec3& a, const Vec3& b, const Vec3& c) { return a.cross(b).dot(c); }

// f1(i+1/2, j) = f(i+1, j) - f(i, j) along u, f2(i, j+1/2) analogous along v.
template <class T>
Field<T> first_difference(const Field<T>& f, Axis axis) {
  const GridDomain& d = f.domain();
  if (f.carrier() != Carrier::Vertex) throw Error(ErrorCode::MalformedInput, "first_difference: vertex field required");
  if ((axis == Axis::U ? d.nu : d.nv) < 2)
    throw Error(ErrorCode::DomainTooSmall, "first_difference: fewer than 2 vertices along axis");
  const Carrier c = axis == Axis::U ? Carrier::EdgeU : Carrier::EdgeV;
  Field<T> out(d, c, false);
  const int di = axis == Axis::U ? 1 : 0;
  const int dj = 1 - di;
  for (int j = 0; j < out.nj(); ++j)
    for (int i = 0; i < out.ni(); ++i)
      if (f.defined(i, j) && f.defined(i + di, j + dj)) out.set(i, j, f(i + di, j + dj) - f(i, j));
  return out;
}

// f11 or f22 on interior vertices along the axis; boundary entries undefined.
template <class T>
Field<T> second_difference(const Field<T>& f, Axis axis) {
  const GridDomain& d = f.domain();
  if (f.carrier() != Carrier::Vertex) throw Error(ErrorCode::MalformedInput, "second_difference: vertex field required");
  if ((axis == Axis::U ? d.nu : d.nv) < 3)
    throw Error(ErrorCode::DomainTooSmall, "second_difference: fewer than 3 vertices along axis");
  Field<T> out(d, Carrier::Vertex, false);
  const int di = axis == Axis::U ? 1 : 0;
  const int dj = 1 - di;
  for (int j = dj; j < d.nv - dj; ++j)
    for (int i = di; i < d.nu - di; ++i)
      if (f.defined(i - di, j - dj) && f.defined(i, j) && f.defined(i + di, j + dj))
        out.set(i, j, (f(i + di, j + dj) - f(i, j)) - (f(i, j) - f(i - di, j - dj)));
  return out;
}

// f12 at face (i+1/2, j+1/2) = f(i+1,j+1) + f(i,j) - f(i+1,j) - f(i,j+1).
template <class T>
Field<T> mixed_difference(const Field<T>& f) {
  const GridDomain& d = f.domain();
  if (f.carrier() != Carrier::Vertex) throw Error(ErrorCode::MalformedInput, "mixed_difference: vertex field required");
  if (d.nu < 2 || d.nv < 2) throw Error(ErrorCode::DomainTooSmall, "mixed_difference: grid needs 2x2 vertices");
  Field<T> out(d, Carrier::Face, false);
  for (int j = 0; j < out.nj(); ++j)
    for (int i = 0; i < out.ni(); ++i)
      if (f.defined(i, j) && f.defined(i + 1, j) && f.defined(i, j + 1) && f.defined(i + 1, j + 1))
        out.set(i, j, (f(i + 1, j + 1) - f(i + 1, j)) - (f(i, j + 1) - f(i, j)));
  return out;
}

// Build a vertex field from a generator g(i, j).
template <class T, class G>
Field<T> make_vertex_field(GridDomain d, G&& g) {
  Field<T> out(d, Carrier::Vertex);
  for (int j = 0; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) out(i, j) = g(i, j);
  return out;
}

}  // namespace quadaffine
