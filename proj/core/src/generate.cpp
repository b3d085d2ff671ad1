// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include <quadaffine/generate.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace quadaffine {

Schedule constant_schedule(double value) {
  return [value](int, int) { return value; };
}

Schedule parity_schedule(double even, double odd) {
  return [even, odd](int i, int j) { return ((i + j) % 2 == 0) ? even : odd; };
}

Schedule field_schedule(ScalarField hstar, int di, int dj) {
  return [h = std::move(hstar), di, dj](int i, int j) {
    const int a = i - di, b = j - dj;
    if (!h.defined(a, b)) throw Error(ErrorCode::InvalidParameter, "schedule undefined", Index{i, j});
    return h(a, b);
  };
}

namespace {

void check_finite(const std::vector<Vec3>& v, const char* what) {
  for (const Vec3& x : v)
    if (!x.allFinite()) throw Error(ErrorCode::InvalidParameter, std::string(what) + " has non-finite entries");
}

double positive_hstar(const Schedule& h, int i, int j) {
  const double s = h(i, j);
  if (!(s > 0.0) || !std::isfinite(s)) throw Error(ErrorCode::InvalidParameter, "H* must be positive", Index{i, j});
  return s;
}

using WideVec = Eigen::Matrix<long double, 3, 1>;

WideVec widen(const Vec3& v) { return v.cast<long double>(); }
WideVec wide_cross(const Vec3& a, const Vec3& b) { return widen(a).cross(widen(b)); }

struct ExtendedField {
  GridDomain d;
  std::vector<WideVec> values;
  explicit ExtendedField(const GridDomain& dom) : d(dom), values(dom.vertex_count(), WideVec::Zero()) {}
  WideVec& operator()(int i, int j) { return values[std::size_t(j) * std::size_t(d.nu) + std::size_t(i)]; }
  VectorField narrow() const {
    VectorField q(d, Carrier::Vertex);
    for (std::size_t k = 0; k < values.size(); ++k) q.values()[k] = values[k].cast<double>();
    return q;
  }
};

}  // namespace

VectorField moutard_extend_indefinite(const IndefiniteSeed& seed) {
  if (!seed.hstar) throw Error(ErrorCode::InvalidParameter, "missing H* schedule");
  check_finite(seed.first, "seed");
  check_finite(seed.second, "seed");

  if (seed.shape == IndefiniteSeed::Shape::Goursat) {
    const int n = int(seed.first.size()), m = int(seed.second.size());
    if (n < 2 || m < 2) throw Error(ErrorCode::DomainTooSmall, "Goursat seed needs two entries per side");
    if (seed.first[0] != seed.second[0]) throw Error(ErrorCode::InvalidParameter, "seed row and column disagree at (0,0)");
    VectorField nu(GridDomain(n, m), Carrier::Vertex, false);
    for (int i = 0; i < n; ++i) nu.set(i, 0, seed.first[i]);
    for (int j = 0; j < m; ++j) nu.set(0, j, seed.second[j]);
    for (int j = 0; j + 1 < m; ++j)
      for (int i = 0; i + 1 < n; ++i)
        nu.set(i + 1, j + 1, (nu(i + 1, j) + nu(i, j + 1)) / positive_hstar(seed.hstar, i, j) - nu(i, j));
    return nu;
  }

  const int L = int(seed.first.size()) - 1;
  if (L < 1 || int(seed.second.size()) != L)
    throw Error(ErrorCode::InvalidParameter, "diagonal seed needs L+1 and L entries");
  VectorField nu(GridDomain(L + 1, L + 1), Carrier::Vertex, false);
  for (int k = 0; k <= L; ++k) nu.set(k, L - k, seed.first[k]);
  for (int k = 0; k < L; ++k) nu.set(k + 1, L - k, seed.second[k]);
  // Diagonal c = a + b holds a = c..L; its entry (a,b) closes face (a-1, b-1).
  for (int c = 2; c <= L; ++c)
    for (int a = c; a <= L; ++a) {
      const int b = c - a;
      const int fa = a - 1, fb = b - 1;
      const double h = positive_hstar(seed.hstar, fa, fb);
      nu.set(a, b + L, (nu(a, b - 1 + L) + nu(a - 1, b + L)) / h - nu(a - 1, b - 1 + L));
    }
  return nu;
}

VectorField moutard_extend_definite(const DefiniteSeed& seed) {
  if (!seed.hstar) throw Error(ErrorCode::InvalidParameter, "missing H* schedule");
  check_finite(seed.col0, "seed");
  check_finite(seed.col1, "seed");
  const int rows = int(seed.col0.size());
  if (rows < 1 || int(seed.col1.size()) != rows)
    throw Error(ErrorCode::InvalidParameter, "seed columns must have equal length");
  if (seed.columns < 2) throw Error(ErrorCode::InvalidParameter, "at least two columns");
  VectorField nu(GridDomain(seed.columns + 1, rows + 1), Carrier::Face, false);
  for (int j = 0; j < rows; ++j) {
    nu.set(0, j, seed.col0[j]);
    nu.set(1, j, seed.col1[j]);
  }
  for (int i = 1; i + 1 < seed.columns; ++i)
    for (int j = 0; j < rows; ++j) {
      if (!nu.defined(i, j - 1) || !nu.defined(i, j + 1) || !nu.defined(i - 1, j)) continue;
      const double h = seed.hstar(i, j);
      if (!std::isfinite(h)) throw Error(ErrorCode::InvalidParameter, "H* must be finite", Index{i, j});
      nu.set(i + 1, j, (4.0 + h) * nu(i, j) - nu(i - 1, j) - nu(i, j + 1) - nu(i, j - 1));
    }
  return nu;
}

template <class T>
Field<T> crop(const Field<T>& f, Index first, Index last) {
  if (last.i < first.i || last.j < first.j || !f.contains(first.i, first.j) || !f.contains(last.i, last.j))
    throw Error(ErrorCode::InvalidParameter, "crop rectangle outside the field");
  const int ni = last.i - first.i + 1, nj = last.j - first.j + 1;
  GridDomain d;
  switch (f.carrier()) {
    case Carrier::Vertex: d = GridDomain(ni, nj); break;
    case Carrier::Face: d = GridDomain(ni + 1, nj + 1); break;
    case Carrier::EdgeU: d = GridDomain(ni + 1, nj); break;
    case Carrier::EdgeV: d = GridDomain(ni, nj + 1); break;
  }
  Field<T> out(d, f.carrier(), false);
  for (int j = 0; j < nj; ++j)
    for (int i = 0; i < ni; ++i) {
      if (!f.defined(first.i + i, first.j + j))
        throw Error(ErrorCode::MalformedInput, "crop rectangle has undefined entries", Index{first.i + i, first.j + j});
      out.set(i, j, f(first.i + i, first.j + j));
    }
  return out;
}

template ScalarField crop(const ScalarField&, Index, Index);
template VectorField crop(const VectorField&, Index, Index);

LelieuvreClosure lelieuvre_closure(const VectorField& nu) {
  const GridDomain& d = nu.domain();
  if (nu.carrier() != Carrier::Vertex || !nu.all_defined())
    throw Error(ErrorCode::MalformedInput, "closure needs a fully defined vertex field");
  if (d.nu < 2 || d.nv < 2) throw Error(ErrorCode::DomainTooSmall, "closure needs 2x2 vertices");
  auto q1 = [&](int i, int j) { return Vec3(nu(i, j).cross(nu(i + 1, j))); };
  auto q2 = [&](int i, int j) { return Vec3(-nu(i, j).cross(nu(i, j + 1))); };
  LelieuvreClosure out{ScalarField(d, Carrier::Face), 0.0, 0.0};
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      const Vec3 a = q1(i, j), b = q2(i + 1, j), c = q1(i, j + 1), e = q2(i, j);
      const double r = (a + b - c - e).norm();
      out.closure.set(i, j, r);
      out.max = std::max(out.max, r);
      out.scale = std::max({out.scale, a.norm(), b.norm(), c.norm(), e.norm()});
    }
  return out;
}

AsymptoticNet lelieuvre_integrate_indefinite(const VectorField& nu, const Vec3& q0, double tol) {
  const GridDomain& d = nu.domain();
  if (nu.carrier() != Carrier::Vertex || !nu.all_defined() || !nu.all_finite())
    throw Error(ErrorCode::MalformedInput, "integration needs a finite vertex co-normal field");
  if (d.nu < 2 || d.nv < 2) throw Error(ErrorCode::DomainTooSmall, "integration needs 2x2 vertices");
  const MoutardFit fit = moutard_coefficient(nu);
  if (!(fit.max_residual <= tol)) {
    std::ostringstream os;
    os << "Moutard residual " << fit.max_residual << " exceeds " << tol;
    throw Error(ErrorCode::NonIntegrable, os.str());
  }
  // Extended precision keeps the running sums at the rounding level of a
  // single evaluation; edges are tiny next to positions on fine nets.
  ExtendedField acc(d);
  acc(0, 0) = widen(q0);
  for (int i = 1; i < d.nu; ++i) acc(i, 0) = acc(i - 1, 0) + wide_cross(nu(i - 1, 0), nu(i, 0));
  for (int j = 1; j < d.nv; ++j)
    for (int i = 0; i < d.nu; ++i) acc(i, j) = acc(i, j - 1) - wide_cross(nu(i, j - 1), nu(i, j));
  VectorField q = acc.narrow();
  return AsymptoticNet(std::move(q));
}

ConjugateNet lelieuvre_integrate_definite(const VectorField& nu, const Vec3& q0, double tol) {
  const GridDomain& d = nu.domain();
  if (nu.carrier() != Carrier::Face || !nu.all_defined() || !nu.all_finite())
    throw Error(ErrorCode::MalformedInput, "integration needs a finite face co-normal field");
  const int n = d.nu, m = d.nv;
  if (n < 3 || m < 3) throw Error(ErrorCode::DomainTooSmall, "integration needs 3x3 vertices");
  if (n >= 4 && m >= 4) {
    const MoutardFit fit = moutard_coefficient_definite(nu);
    if (!(fit.max_residual <= tol)) {
      std::ostringstream os;
      os << "five-point residual " << fit.max_residual << " exceeds " << tol;
      throw Error(ErrorCode::NonIntegrable, os.str());
    }
  }
  // q1(i,j) = nu(i,j-1) x nu(i,j) for 1 <= j <= m-2; q2(i,j) = -nu(i-1,j) x nu(i,j) for 1 <= i <= n-2.
  auto q1 = [&](int i, int j) { return wide_cross(nu(i, j - 1), nu(i, j)); };
  auto q2 = [&](int i, int j) -> WideVec { return -wide_cross(nu(i - 1, j), nu(i, j)); };
  ExtendedField q(d);
  q(1, 1) = WideVec::Zero();
  for (int j = 1; j + 1 < m; ++j) q(1, j + 1) = q(1, j) + q2(1, j);
  q(1, 0) = q(1, 1) - q2(1, 0);
  for (int j = 1; j + 1 < m; ++j) {
    for (int i = 1; i + 1 < n; ++i) q(i + 1, j) = q(i, j) + q1(i, j);
    q(0, j) = q(1, j) - q1(0, j);
  }
  for (int i = 2; i + 1 < n; ++i) {
    q(i, 0) = q(i, 1) - q2(i, 0);
    q(i, m - 1) = q(i, m - 2) + q2(i, m - 2);
  }
  for (const auto& [ci, cj] : {std::pair{0, 0}, {n - 1, 0}, {0, m - 1}, {n - 1, m - 1}}) {
    const int ni = ci == 0 ? 1 : n - 2, nj = cj == 0 ? 1 : m - 2;
    q(ci, cj) = q(ni, cj) + q(ci, nj) - q(ni, nj);
  }
  const WideVec shift = widen(q0) - q(0, 0);
  for (auto& v : q.values) v += shift;
  return ConjugateNet(q.narrow());
}

const char* to_string(NetKind kind) { return kind == NetKind::Asymptotic ? "asymptotic" : "conjugate"; }

namespace {

using Params = std::map<std::string, double>;

const std::map<std::string, Params>& defaults_table() {
  static const std::map<std::string, Params> table{
      {"hyperboloid", {{"c", 1.0}, {"du", 2.0 / 50}, {"dv", 2.0 / 51}, {"u0", 1.0}, {"u1", 3.0}, {"v0", 1.0}, {"v1", 3.0}}},
      {"minimal", {{"du", 0.1}, {"dv", 2.0 / 21}, {"u0", 2.0}, {"u1", 4.0}, {"v0", 0.0}, {"v1", 2.0}}},
      {"indefinite-cubic",
       {{"du", 0.14}, {"dv", 0.12}, {"u0", 0.3}, {"v0", 1.0}, {"L", 8}, {"even", 0.9}, {"odd", 1.2}}},
      {"paraboloid-definite", {{"n", 10}}},
      {"definite-cubic", {{"N", 12}, {"du", 1.0 / 12}, {"dv", 1.0 / 11}, {"u0", 1.0}, {"v0", 1.0}, {"K", 3}}},
      {"definite-cubic-alt",
       {{"N", 12}, {"du", 1.0 / 12}, {"dv", 1.0 / 11}, {"u0", 1.0}, {"v0", 1.0}, {"K", 3}, {"odd", 0.1}}},
  };
  return table;
}

Params resolve(const std::string& name, const Params& given) {
  Params p = builtin_defaults(name);
  for (const auto& [k, v] : given) {
    if (!p.count(k)) throw Error(ErrorCode::InvalidParameter, "unknown parameter '" + k + "' for " + name);
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidParameter, "parameter '" + k + "' is not finite");
    p[k] = v;
  }
  return p;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, what);
}

int as_count(double v, const char* name, int lo) {
  require(v == std::floor(v) && v >= lo && v <= 100000, std::string(name) + " must be an integer >= " + std::to_string(lo));
  return int(v);
}

// Samples along [a, b] with step h; the end must land on the lattice.
int sample_count(double a, double b, double h, const char* axis) {
  require(h > 0.0 && b > a, std::string(axis) + " range must be increasing with a positive step");
  const double k = (b - a) / h;
  const double r = std::round(k);
  require(std::abs(k - r) <= 1e-9 * std::max(1.0, k), std::string(axis) + " range is not a multiple of the step");
  require(r >= 1 && r <= 100000, std::string(axis) + " sample count out of range");
  return int(r) + 1;
}

void fill_uv(BuiltinSample& s, int n, int m, double u0, double v0, double du, double dv) {
  const GridDomain d(n, m);
  s.U = ScalarField(d, Carrier::Vertex);
  s.V = ScalarField(d, Carrier::Vertex);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      s.U.set(i, j, u0 + i * du);
      s.V.set(i, j, v0 + j * dv);
    }
}

BuiltinSample hyperboloid(const Params& p) {
  const double c = p.at("c"), du = p.at("du"), dv = p.at("dv"), u0 = p.at("u0"), v0 = p.at("v0");
  require(c > 0.0, "hyperboloid needs c > 0");
  require(u0 + v0 > 0.0, "hyperboloid needs u + v > 0");
  const int n = sample_count(u0, p.at("u1"), du, "u"), m = sample_count(v0, p.at("v1"), dv, "v");
  BuiltinSample s;
  s.kind = NetKind::Asymptotic;
  fill_uv(s, n, m, u0, v0, du, dv);
  s.nu = VectorField(GridDomain(n, m), Carrier::Vertex);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      const double u = s.U(i, j), v = s.V(i, j);
      s.nu.set(i, j, std::sqrt(c) / std::sinh(u + v) * Vec3(std::cosh(u - v), std::sinh(v - u), std::cosh(u + v)));
    }
  // The surface translated by -c e3: z = c e^{-(u+v)} / sinh(u+v) stays small
  // where positions would otherwise swamp the edges.
  s.q0 = c / std::sinh(u0 + v0) * Vec3(-std::cosh(u0 - v0), -std::sinh(u0 - v0), std::exp(-(u0 + v0)));
  return s;
}

BuiltinSample minimal(const Params& p) {
  const double du = p.at("du"), dv = p.at("dv"), u0 = p.at("u0"), v0 = p.at("v0");
  const int n = sample_count(u0, p.at("u1"), du, "u"), m = sample_count(v0, p.at("v1"), dv, "v");
  BuiltinSample s;
  s.kind = NetKind::Asymptotic;
  fill_uv(s, n, m, u0, v0, du, dv);
  s.nu = VectorField(GridDomain(n, m), Carrier::Vertex);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) {
      const double u = s.U(i, j), v = s.V(i, j);
      s.nu.set(i, j, Vec3((v * v - u * u) / 4.0, (u - v) / 2.0, -1.0));
    }
  return s;
}

// Seeds on the diagonals a + b = 0 and 1 of the lattice u = u0 + a du,
// v = v0 + b dv, extended over the triangle and cropped to the rectangle
// L/2 <= a <= L, -L/2 <= b <= 0.
BuiltinSample indefinite_cubic(const Params& p) {
  const double du = p.at("du"), dv = p.at("dv"), u0 = p.at("u0"), v0 = p.at("v0");
  const int L = as_count(p.at("L"), "L", 2);
  require(L % 2 == 0, "L must be even");
  require(du > 0.0 && dv > 0.0, "steps must be positive");
  require(p.at("even") > 0.0 && p.at("odd") > 0.0, "lambda^2 must be positive");
  auto f = [&](int a, int b) {
    const double u = u0 + a * du, v = v0 + b * dv;
    return Vec3(u, v, u * u + v * v);
  };
  IndefiniteSeed seed;
  seed.shape = IndefiniteSeed::Shape::Diagonal;
  for (int k = 0; k <= L; ++k) seed.first.push_back(f(k, -k));
  for (int k = 0; k < L; ++k) seed.second.push_back(f(k + 1, -k));
  seed.hstar = parity_schedule(p.at("even"), p.at("odd"));
  const VectorField tri = moutard_extend_indefinite(seed);
  const int h = L / 2;
  BuiltinSample s;
  s.kind = NetKind::Asymptotic;
  s.nu = crop(tri, {h, L - h}, {L, L});
  fill_uv(s, h + 1, h + 1, u0 + h * du, v0 - h * dv, du, dv);
  return s;
}

BuiltinSample paraboloid_definite(const Params& p) {
  const int n = as_count(p.at("n"), "n", 3);
  BuiltinSample s;
  s.kind = NetKind::Conjugate;
  s.nu = VectorField(GridDomain(n + 1, n + 1), Carrier::Face);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) s.nu.set(i, j, Vec3(i + 0.5, j + 0.5, 1.0));
  fill_uv(s, n + 1, n + 1, 0.0, 0.0, 1.0, 1.0);
  s.q0 = Vec3(0.0, 0.0, 0.0);
  return s;
}

// Face (i,j) carries (u, v, uv) at u = u0 + i du, v = v0 + j dv. Columns
// 0..K are extended and rows K..N-K kept, where every column is complete.
BuiltinSample definite_cubic(const Params& p, double odd) {
  const int N = as_count(p.at("N"), "N", 4);
  const int K = as_count(p.at("K"), "K", 2);
  require(2 * K <= N - 2, "K too large for N");
  const double du = p.at("du"), dv = p.at("dv"), u0 = p.at("u0"), v0 = p.at("v0");
  require(du > 0.0 && dv > 0.0, "steps must be positive");
  auto f = [&](int i, int j) {
    const double u = u0 + i * du, v = v0 + j * dv;
    return Vec3(u, v, u * v);
  };
  DefiniteSeed seed;
  for (int j = 0; j <= N; ++j) {
    seed.col0.push_back(f(0, j));
    seed.col1.push_back(f(1, j));
  }
  seed.hstar = parity_schedule(0.0, odd);
  seed.columns = K + 1;
  const VectorField tri = moutard_extend_definite(seed);
  BuiltinSample s;
  s.kind = NetKind::Conjugate;
  s.nu = crop(tri, {0, K}, {K, N - K});
  // Face centres sit on the lattice; vertices are offset by half a step.
  fill_uv(s, K + 2, N - 2 * K + 2, u0 - du / 2, v0 + (K - 0.5) * dv, du, dv);
  return s;
}

}  // namespace

const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"hyperboloid",         "minimal",        "indefinite-cubic",
                                              "paraboloid-definite", "definite-cubic", "definite-cubic-alt"};
  return names;
}

std::map<std::string, double> builtin_defaults(const std::string& name) {
  const auto& t = defaults_table();
  const auto it = t.find(name);
  if (it == t.end()) throw Error(ErrorCode::InvalidParameter, "unknown example '" + name + "'");
  return it->second;
}

BuiltinSample sample_builtin(const std::string& name, const std::map<std::string, double>& given) {
  const Params p = resolve(name, given);
  BuiltinSample s;
  if (name == "hyperboloid") s = hyperboloid(p);
  else if (name == "minimal") s = minimal(p);
  else if (name == "indefinite-cubic") s = indefinite_cubic(p);
  else if (name == "paraboloid-definite") s = paraboloid_definite(p);
  else if (name == "definite-cubic") s = definite_cubic(p, 0.0);
  else s = definite_cubic(p, p.at("odd"));
  s.name = name;
  s.params = p;
  return s;
}

GeneratedNet generate_builtin(const std::string& name, const std::map<std::string, double>& params) {
  GeneratedNet g{sample_builtin(name, params), {}};
  if (g.sample.kind == NetKind::Asymptotic)
    g.q = lelieuvre_integrate_indefinite(g.sample.nu, g.sample.q0).q;
  else
    g.q = lelieuvre_integrate_definite(g.sample.nu, g.sample.q0).q;
  return g;
}

}  // namespace quadaffine
