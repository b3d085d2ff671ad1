// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// Value paired with the magnitude of the terms that produced it. Residuals of
// long sums are normalized by this magnitude so that cancellation between
// large terms is measured against the terms, not against the small result.
#pragma once

#include <quadaffine/grid.hpp>

#include <cmath>

namespace quadaffine::detail {

struct Tracked {
  double v = 0.0;  // value
  double m = 0.0;  // magnitude, >= |v| up to rounding

  Tracked() = default;
  Tracked(double x) : v(x), m(std::abs(x)) {}  // NOLINT: implicit by design
  Tracked(double x, double mag) : v(x), m(mag) {}
};

inline Tracked operator+(Tracked a, Tracked b) { return {a.v + b.v, a.m + b.m}; }
inline Tracked operator-(Tracked a, Tracked b) { return {a.v - b.v, a.m + b.m}; }
inline Tracked operator-(Tracked a) { return {-a.v, a.m}; }
inline Tracked operator*(Tracked a, Tracked b) { return {a.v * b.v, a.m * b.m}; }
inline Tracked operator/(Tracked a, Tracked b) { return {a.v / b.v, a.m / std::abs(b.v)}; }

// |a - b| relative to the magnitude of both sides; 0 when both vanish.
inline double rel_residual(Tracked a, Tracked b) {
  const double s = a.m + b.m;
  const double d = std::abs(a.v - b.v);
  return s > 0.0 ? d / s : d;
}

// Vector residual normalized by a supplied scale.
inline double rel_residual(const Vec3& lhs, const Vec3& rhs, double scale) {
  const double d = (lhs - rhs).norm();
  return scale > 0.0 ? d / scale : d;
}

}  // namespace quadaffine::detail
