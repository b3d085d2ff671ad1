// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include <quadaffine/grid.hpp>
#include <quadaffine/residual.hpp>

#include <algorithm>
#include <limits>

namespace quadaffine {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DomainTooSmall: return "domain-too-small";
    case ErrorCode::MalformedInput: return "malformed-input";
    case ErrorCode::DegenerateNet: return "degenerate-net";
    case ErrorCode::InconsistentNet: return "inconsistent-net";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::NonConvex: return "non-convex";
    case ErrorCode::NoConormal: return "no-conormal";
    case ErrorCode::NonIntegrable: return "non-integrable";
    case ErrorCode::CompatibilityViolation: return "compatibility-violation";
    case ErrorCode::NumericFailure: return "numeric-failure";
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::Io: return "io-error";
  }
  return "unknown";
}

namespace {
std::string located(const std::string& what, const std::optional<Index>& where) {
  if (!where) return what;
  return what + " at (" + std::to_string(where->i) + ", " + std::to_string(where->j) + ")";
}
}  // namespace

Error::Error(ErrorCode code, const std::string& what, std::optional<Index> where)
    : std::runtime_error(located(what, where)), code_(code), where_(where) {}

GridDomain::GridDomain(int nu_, int nv_) : nu(nu_), nv(nv_) {
  if (nu_ < 1 || nv_ < 1) throw Error(ErrorCode::DomainTooSmall, "grid needs at least one vertex per axis");
}

std::size_t GridDomain::face_count() const { return std::size_t(extent_i(Carrier::Face)) * extent_j(Carrier::Face); }
std::size_t GridDomain::edge_u_count() const { return std::size_t(extent_i(Carrier::EdgeU)) * extent_j(Carrier::EdgeU); }
std::size_t GridDomain::edge_v_count() const { return std::size_t(extent_i(Carrier::EdgeV)) * extent_j(Carrier::EdgeV); }

int GridDomain::extent_i(Carrier c) const {
  switch (c) {
    case Carrier::Vertex:
    case Carrier::EdgeV: return nu;
    case Carrier::Face:
    case Carrier::EdgeU: return std::max(nu - 1, 0);
  }
  return 0;
}

int GridDomain::extent_j(Carrier c) const {
  switch (c) {
    case Carrier::Vertex:
    case Carrier::EdgeU: return nv;
    case Carrier::Face:
    case Carrier::EdgeV: return std::max(nv - 1, 0);
  }
  return 0;
}

namespace {
template <class F>
FieldStats reduce(std::size_t n, const std::vector<std::uint8_t>& mask, F value) {
  FieldStats s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!mask[k]) continue;
    const double x = value(k);
    s.min = std::min(s.min, x);
    s.max = std::max(s.max, x);
    sum += x;
    ++s.count;
  }
  if (s.count == 0) return FieldStats{};
  s.mean = sum / double(s.count);
  return s;
}
}  // namespace

FieldStats stats(const ScalarField& f) {
  return reduce(f.size(), f.mask(), [&](std::size_t k) { return f.values()[k]; });
}

FieldStats norm_stats(const VectorField& f) {
  return reduce(f.size(), f.mask(), [&](std::size_t k) { return f.values()[k].norm(); });
}

void ResidualReport::record(const std::string& name, double value, Index where) {
  ResidualStat& s = entries_[name];
  ++s.samples;
  // NaN is treated as the worst possible residual.
  if (std::isnan(value)) value = std::numeric_limits<double>::infinity();
  if (value > s.max || s.where.i < 0) {
    if (value >= s.max) {
      s.max = value;
      s.where = where;
    }
  }
}

void ResidualReport::touch(const std::string& name) { entries_.try_emplace(name); }

void ResidualReport::merge(const ResidualReport& other) {
  for (const auto& [name, st] : other.entries_) {
    ResidualStat& s = entries_[name];
    s.samples += st.samples;
    if (st.max > s.max || (s.where.i < 0 && st.where.i >= 0)) {
      s.max = std::max(s.max, st.max);
      s.where = st.where;
    }
  }
}

double ResidualReport::worst() const {
  double w = 0.0;
  for (const auto& [name, s] : entries_) w = std::max(w, s.max);
  return w;
}

std::map<std::string, ResidualStat> ResidualReport::failures(double tol) const {
  std::map<std::string, ResidualStat> out;
  for (const auto& [name, s] : entries_)
    if (s.max > tol) out.emplace(name, s);
  return out;
}

}  // namespace quadaffine
