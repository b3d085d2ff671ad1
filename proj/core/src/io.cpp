// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include <quadaffine/io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace quadaffine {

using nlohmann::json;

namespace {

constexpr const char* kNetFormat = "quadaffine-net";
constexpr const char* kStructureFormat = "quadaffine-structure";
constexpr const char* kReportFormat = "quadaffine-report";
constexpr const char* kConormalFormat = "quadaffine-conormal";

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::Parse, what); }

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("malformed document: ") + e.what());
  }
}

const json& member(const json& doc, const char* key) {
  if (!doc.is_object()) parse_fail("document is not an object");
  const auto it = doc.find(key);
  if (it == doc.end()) parse_fail(std::string("missing field '") + key + "'");
  return *it;
}

int int_member(const json& doc, const char* key) {
  const json& v = member(doc, key);
  if (!v.is_number_integer()) parse_fail(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

void check_header(const json& doc, const char* format, int version) {
  const json& f = member(doc, "format");
  if (!f.is_string() || f.get<std::string>() != format) parse_fail(std::string("field 'format' must be '") + format + "'");
  const int v = int_member(doc, "version");
  if (v != version) parse_fail("unknown version " + std::to_string(v));
}

NetKind kind_from(const std::string& s) {
  if (s == "asymptotic") return NetKind::Asymptotic;
  if (s == "conjugate") return NetKind::Conjugate;
  parse_fail("field 'kind' must be 'asymptotic' or 'conjugate', got '" + s + "'");
}

json extra_members(const json& doc, std::initializer_list<const char*> known) {
  json extra = json::object();
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    bool k = false;
    for (const char* name : known) k = k || it.key() == name;
    if (!k) extra[it.key()] = it.value();
  }
  return extra;
}

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json scalar_array(const ScalarField& f) {
  json a = json::array();
  for (std::size_t k = 0; k < f.size(); ++k) a.push_back(f.mask()[k] ? number(f.values()[k]) : json(nullptr));
  return a;
}

ScalarField scalar_from(const json& doc, const char* key, const GridDomain& d, Carrier c) {
  const json& a = member(doc, key);
  ScalarField f(d, c, false);
  if (!a.is_array() || a.size() != f.size())
    parse_fail(std::string("field '") + key + "' must hold " + std::to_string(f.size()) + " entries");
  for (int j = 0; j < f.nj(); ++j)
    for (int i = 0; i < f.ni(); ++i) {
      const json& v = a[f.flat(i, j)];
      if (v.is_null()) continue;
      if (!v.is_number()) parse_fail(std::string("field '") + key + "' has a non-numeric entry");
      f.set(i, j, v.get<double>());
    }
  return f;
}

GridDomain domain_from(const json& doc) {
  const int nu = int_member(doc, "nu"), nv = int_member(doc, "nv");
  if (nu < 1 || nv < 1 || double(nu) * double(nv) > 1e8) parse_fail("dimensions out of range");
  return GridDomain(nu, nv);
}

void check_positive(const ScalarField& f, const char* name) {
  f.for_each_defined([&](int i, int j, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::Parse, std::string("field '") + name + "' must be positive", Index{i, j});
  });
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
}

NetFile parse_net(const std::string& text) {
  const json doc = parse_document(text);
  check_header(doc, kNetFormat, kNetFormatVersion);
  const json& k = member(doc, "kind");
  if (!k.is_string()) parse_fail("field 'kind' must be a string");
  NetFile f;
  f.kind = kind_from(k.get<std::string>());
  const GridDomain d = domain_from(doc);
  const json& pos = member(doc, "positions");
  if (!pos.is_array()) parse_fail("field 'positions' must be an array");
  if (pos.size() != 3 * d.vertex_count())
    parse_fail("field 'positions' holds " + std::to_string(pos.size()) + " numbers, expected 3*nu*nv = " +
               std::to_string(3 * d.vertex_count()));
  f.q = VectorField(d, Carrier::Vertex);
  for (std::size_t k3 = 0; k3 < d.vertex_count(); ++k3) {
    Vec3 p;
    for (int c = 0; c < 3; ++c) {
      const json& v = pos[3 * k3 + c];
      if (!v.is_number()) parse_fail("field 'positions' entry " + std::to_string(3 * k3 + c) + " is not a number");
      p(c) = v.get<double>();
    }
    f.q.values()[k3] = p;
  }
  if (const auto it = doc.find("metadata"); it != doc.end()) {
    if (!it->is_object()) parse_fail("field 'metadata' must be an object");
    f.metadata = *it;
  }
  f.extra = extra_members(doc, {"format", "version", "kind", "nu", "nv", "positions", "metadata"});
  return f;
}

std::string dump_net(const NetFile& f) {
  if (!f.q.all_defined() || !f.q.all_finite()) throw Error(ErrorCode::InvalidParameter, "net has undefined or non-finite positions");
  json doc = f.extra;
  doc["format"] = kNetFormat;
  doc["version"] = kNetFormatVersion;
  doc["kind"] = to_string(f.kind);
  doc["nu"] = f.q.domain().nu;
  doc["nv"] = f.q.domain().nv;
  json pos = json::array();
  for (const Vec3& p : f.q.values())
    for (int c = 0; c < 3; ++c) pos.push_back(p(c));
  doc["positions"] = std::move(pos);
  doc["metadata"] = f.metadata;
  return doc.dump(1) + "\n";
}

NetFile read_net(const std::filesystem::path& path) { return parse_net(read_text(path)); }

void write_net(const NetFile& f, const std::filesystem::path& path) { write_text(path, dump_net(f)); }

NetFile net_file_from(const GeneratedNet& g) {
  NetFile f;
  f.kind = g.sample.kind;
  f.q = g.q;
  f.metadata["generator"] = g.sample.name;
  f.metadata["params"] = g.sample.params;
  f.metadata["U"] = scalar_array(g.sample.U);
  f.metadata["V"] = scalar_array(g.sample.V);
  return f;
}

StructureFile parse_structure(const std::string& text) {
  const json doc = parse_document(text);
  check_header(doc, kStructureFormat, kStructureFormatVersion);
  const json& k = member(doc, "kind");
  if (!k.is_string()) parse_fail("field 'kind' must be a string");
  const std::string kind = k.get<std::string>();
  const GridDomain d = domain_from(doc);
  const json& tol = member(doc, "tolerance");
  if (!tol.is_number()) parse_fail("field 'tolerance' must be a number");
  const json& fields = member(doc, "fields");
  StructureFile f;
  f.tolerance = tol.get<double>();
  if (kind == "indefinite") {
    f.kind = NetKind::Asymptotic;
    f.indefinite.Omega = scalar_from(fields, "Omega", d, Carrier::Face);
    f.indefinite.lambda = scalar_from(fields, "lambda", d, Carrier::Face);
    f.indefinite.A = scalar_from(fields, "A", d, Carrier::Vertex);
    f.indefinite.B = scalar_from(fields, "B", d, Carrier::Vertex);
    check_positive(f.indefinite.Omega, "Omega");
    check_positive(f.indefinite.lambda, "lambda");
  } else if (kind == "definite") {
    f.kind = NetKind::Conjugate;
    f.definite.Omega = scalar_from(fields, "Omega", d, Carrier::Vertex);
    f.definite.lambda = scalar_from(fields, "lambda", d, Carrier::Vertex);
    f.definite.alpha = scalar_from(fields, "alpha", d, Carrier::Vertex);
    f.definite.beta = scalar_from(fields, "beta", d, Carrier::Vertex);
    check_positive(f.definite.Omega, "Omega");
    check_positive(f.definite.lambda, "lambda");
    check_positive(f.definite.alpha, "alpha");
    check_positive(f.definite.beta, "beta");
  } else {
    parse_fail("field 'kind' must be 'indefinite' or 'definite', got '" + kind + "'");
  }
  f.extra = extra_members(doc, {"format", "version", "kind", "nu", "nv", "tolerance", "fields"});
  return f;
}

std::string dump_structure(const StructureFile& f) {
  json doc = f.extra;
  doc["format"] = kStructureFormat;
  doc["version"] = kStructureFormatVersion;
  doc["tolerance"] = f.tolerance;
  json fields = json::object();
  GridDomain d;
  if (f.kind == NetKind::Asymptotic) {
    doc["kind"] = "indefinite";
    d = f.indefinite.Omega.domain();
    fields["Omega"] = scalar_array(f.indefinite.Omega);
    fields["lambda"] = scalar_array(f.indefinite.lambda);
    fields["A"] = scalar_array(f.indefinite.A);
    fields["B"] = scalar_array(f.indefinite.B);
  } else {
    doc["kind"] = "definite";
    d = f.definite.Omega.domain();
    fields["Omega"] = scalar_array(f.definite.Omega);
    fields["lambda"] = scalar_array(f.definite.lambda);
    fields["alpha"] = scalar_array(f.definite.alpha);
    fields["beta"] = scalar_array(f.definite.beta);
  }
  doc["nu"] = d.nu;
  doc["nv"] = d.nv;
  doc["fields"] = std::move(fields);
  return doc.dump(1) + "\n";
}

StructureFile read_structure(const std::filesystem::path& path) { return parse_structure(read_text(path)); }

void write_structure(const StructureFile& f, const std::filesystem::path& path) {
  write_text(path, dump_structure(f));
}

std::string dump_conormal(const VectorField& nu) {
  if (nu.carrier() != Carrier::Vertex && nu.carrier() != Carrier::Face)
    throw Error(ErrorCode::InvalidParameter, "co-normals live on vertices or faces");
  json doc;
  doc["format"] = kConormalFormat;
  doc["version"] = kNetFormatVersion;
  doc["carrier"] = nu.carrier() == Carrier::Vertex ? "vertex" : "face";
  doc["nu"] = nu.domain().nu;
  doc["nv"] = nu.domain().nv;
  json values = json::array();
  for (std::size_t k = 0; k < nu.size(); ++k) {
    const Vec3& v = nu.values()[k];
    values.push_back(nu.mask()[k] ? json::array({number(v.x()), number(v.y()), number(v.z())}) : json(nullptr));
  }
  doc["values"] = std::move(values);
  return doc.dump(1) + "\n";
}

VectorField parse_conormal(const std::string& text) {
  const json doc = parse_document(text);
  check_header(doc, kConormalFormat, kNetFormatVersion);
  const json& c = member(doc, "carrier");
  if (!c.is_string() || (c != "vertex" && c != "face")) parse_fail("field 'carrier' must be 'vertex' or 'face'");
  const GridDomain d = domain_from(doc);
  VectorField nu(d, c == "vertex" ? Carrier::Vertex : Carrier::Face, false);
  const json& values = member(doc, "values");
  if (!values.is_array() || values.size() != nu.size())
    parse_fail("field 'values' must hold " + std::to_string(nu.size()) + " entries");
  for (int j = 0; j < nu.nj(); ++j)
    for (int i = 0; i < nu.ni(); ++i) {
      const json& v = values[nu.flat(i, j)];
      if (v.is_null()) continue;
      if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        parse_fail("field 'values' entry " + std::to_string(nu.flat(i, j)) + " is not a 3-vector");
      nu.set(i, j, Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>()));
    }
  return nu;
}

namespace {

json where_json(Index w) { return w.i < 0 ? json(nullptr) : json::array({w.i, w.j}); }

json stats_json(const FieldStats& s) {
  return json{{"min", number(s.min)}, {"max", number(s.max)}, {"mean", number(s.mean)}, {"count", s.count}};
}

json residuals_json(const ResidualReport& r, double tol) {
  json out = json::object();
  for (const auto& [name, st] : r.entries())
    out[name] = json{{"max", number(st.max)}, {"where", where_json(st.where)}, {"samples", st.samples},
                     {"pass", st.max <= tol}};
  return out;
}

json indefinite_json(const IndefiniteInvariants& inv) {
  json fields = json::object();
  fields["M"] = stats_json(stats(inv.M));
  fields["Omega"] = stats_json(stats(inv.Omega));
  fields["lambda"] = stats_json(stats(inv.lambda));
  fields["Hstar"] = stats_json(stats(inv.Hstar));
  fields["A"] = stats_json(stats(inv.A));
  fields["B"] = stats_json(stats(inv.B));
  fields["H"] = stats_json(stats(inv.H));
  fields["nu_norm"] = stats_json(norm_stats(inv.nu));
  fields["xi_norm"] = stats_json(norm_stats(inv.xi));
  json out{{"fields", fields}};
  const SphereTest s = affine_sphere_test(inv.lambda, inv.A, inv.B, inv.Omega);
  out["affine_sphere"] = json{{"is_sphere", s.is_sphere},
                              {"identity_residual", number(s.identity_residual)},
                              {"ratio_residual", number(s.ratio_residual)},
                              {"bobenko_constant", s.bobenko_constant ? number(*s.bobenko_constant) : json(nullptr)}};
  return out;
}

json definite_json(const DefiniteInvariants& inv) {
  json fields = json::object();
  fields["Delta1"] = stats_json(stats(inv.D.D1));
  fields["Delta2"] = stats_json(stats(inv.D.D2));
  fields["Delta3"] = stats_json(stats(inv.D.D3));
  fields["Delta4"] = stats_json(stats(inv.D.D4));
  fields["Omega"] = stats_json(stats(inv.params.Omega));
  fields["alpha"] = stats_json(stats(inv.params.alpha));
  fields["beta"] = stats_json(stats(inv.params.beta));
  fields["gamma"] = stats_json(stats(inv.params.gamma));
  fields["delta"] = stats_json(stats(inv.params.delta));
  fields["lambda"] = stats_json(stats(inv.params.lambda));
  fields["Hstar"] = stats_json(stats(inv.Hstar));
  fields["E"] = stats_json(stats(inv.derivatives.E));
  fields["F"] = stats_json(stats(inv.derivatives.F));
  fields["H1star"] = stats_json(stats(inv.curvature.H1star));
  fields["H2star"] = stats_json(stats(inv.curvature.H2star));
  fields["H"] = stats_json(stats(inv.curvature.H));
  fields["nu_norm"] = stats_json(norm_stats(inv.nu));
  fields["xi_norm"] = stats_json(norm_stats(inv.xi));
  return json{{"fields", fields}};
}

}  // namespace

json build_report(const ReportInput& in) {
  json doc;
  doc["format"] = kReportFormat;
  doc["version"] = kReportFormatVersion;
  doc["kind"] = to_string(in.kind);
  doc["tolerances"] = json{{"validation", in.tol.validation}, {"residual", in.tol.residual}};
  json failures = json::array();
  // The first stencils suffice to locate a defect; the count gives the extent.
  constexpr std::size_t kListed = 20;
  for (std::size_t k = 0; k < std::min(kListed, in.validation.failures.size()); ++k)
    failures.push_back(json::array({in.validation.failures[k].i, in.validation.failures[k].j}));
  doc["validation"] = json{{"pass", in.validation.pass},
                           {"planarity_ok", in.validation.planarity_ok},
                           {"nondegenerate_ok", in.validation.nondegenerate_ok},
                           {"max_planarity", number(in.validation.max_planarity)},
                           {"min_metric", number(in.validation.min_metric)},
                           {"failures", failures},
                           {"failure_count", in.validation.failures.size()}};
  bool pass = in.validation.pass && !in.failure;
  if (in.failure) doc["failure"] = *in.failure;
  const ResidualReport* residuals = nullptr;
  if (in.validation.pass && !in.failure) {
    json analysis;
    if (in.kind == NetKind::Asymptotic && in.indefinite) {
      analysis = indefinite_json(*in.indefinite);
      residuals = &in.indefinite->residuals;
    } else if (in.kind == NetKind::Conjugate && in.definite) {
      analysis = definite_json(*in.definite);
      residuals = &in.definite->residuals;
    }
    if (residuals) {
      analysis["residuals"] = residuals_json(*residuals, in.tol.residual);
      analysis["worst_residual"] = number(residuals->worst());
      pass = pass && residuals->passes(in.tol.residual);
      doc["analysis"] = std::move(analysis);
    } else {
      pass = false;
    }
  }
  doc["pass"] = pass;
  return doc;
}

bool report_passes(const json& report) { return report.value("pass", false); }

std::string dump_report(const json& report) { return report.dump(2) + "\n"; }

void write_report(const ReportInput& in, const std::filesystem::path& path) {
  write_text(path, dump_report(build_report(in)));
}

std::string obj_text(const VectorField& q) {
  const GridDomain& d = q.domain();
  if (q.carrier() != Carrier::Vertex || !q.all_defined() || !q.all_finite())
    throw Error(ErrorCode::InvalidParameter, "export needs a fully defined finite net");
  std::string out = "# quadaffine net " + std::to_string(d.nu) + " x " + std::to_string(d.nv) + "\n";
  char buf[128];
  for (const Vec3& p : q.values()) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out += buf;
  }
  auto id = [&](int i, int j) { return std::size_t(j) * std::size_t(d.nu) + std::size_t(i) + 1; };
  for (int j = 0; j + 1 < d.nv; ++j)
    for (int i = 0; i + 1 < d.nu; ++i) {
      std::snprintf(buf, sizeof buf, "f %zu %zu %zu %zu\n", id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
      out += buf;
    }
  return out;
}

void export_obj(const VectorField& q, const std::filesystem::path& path) { write_text(path, obj_text(q)); }

}  // namespace quadaffine
