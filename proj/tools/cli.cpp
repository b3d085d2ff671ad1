// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <quadaffine/definite.hpp>
#include <quadaffine/generate.hpp>
#include <quadaffine/indefinite.hpp>
#include <quadaffine/io.hpp>

#include <CLI11.hpp>

#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace quadaffine::cli {

namespace {

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::Parse:
    case ErrorCode::Io:
    case ErrorCode::MalformedInput:
    case ErrorCode::InvalidParameter:
    case ErrorCode::DomainTooSmall:
      return kUsage;
    case ErrorCode::NumericFailure:
    case ErrorCode::NonIntegrable:
      return kNumeric;
    default:
      return kCheckFailed;
  }
}

std::string describe(const Error& e) {
  std::ostringstream os;
  os << to_string(e.code()) << ": " << e.what();
  if (e.where()) os << " at (" << e.where()->i << ", " << e.where()->j << ")";
  return os.str();
}

std::set<std::string> all_parameter_names() {
  std::set<std::string> names;
  for (const auto& n : builtin_names())
    for (const auto& [k, v] : builtin_defaults(n)) names.insert(k);
  return names;
}

struct GenerateConfig {
  std::string example, out, nu_out, range;
  std::map<std::string, double> values;
};

struct AnalyzeConfig {
  std::string in, report, structure_out, kind;
  Tolerances tol;
  std::optional<double> seed;
};

struct ReconstructConfig {
  std::string in, out;
  double gate_tol = 1e-8;
  Tolerances tol;
};

struct ExportConfig {
  std::string in, out;
};

int cmd_generate(const GenerateConfig& c, std::ostream& out) {
  std::map<std::string, double> params = c.values;
  if (!c.range.empty()) {
    const auto colon = c.range.find(':');
    double a = 0.0, b = 0.0;
    try {
      if (colon == std::string::npos) throw std::invalid_argument("no colon");
      a = std::stod(c.range.substr(0, colon));
      b = std::stod(c.range.substr(colon + 1));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidParameter, "--range expects lo:hi");
    }
    params["u0"] = params["v0"] = a;
    params["u1"] = params["v1"] = b;
  }
  const GeneratedNet g = generate_builtin(c.example, params);
  write_net(net_file_from(g), c.out);
  if (!c.nu_out.empty()) write_text(c.nu_out, dump_conormal(g.sample.nu));
  out << "wrote " << to_string(g.sample.kind) << " net " << g.q.domain().nu << " x " << g.q.domain().nv << " to "
      << c.out << "\n";
  return kPass;
}

void print_failures(std::ostream& out, const ResidualReport& r, double tol) {
  for (const auto& [name, st] : r.failures(tol))
    out << "  " << name << " " << st.max << " at (" << st.where.i << ", " << st.where.j << ")\n";
}

int cmd_analyze(const AnalyzeConfig& c, std::ostream& out, std::ostream& err) {
  const NetFile f = read_net(c.in);
  if (!c.kind.empty() && c.kind != to_string(f.kind)) {
    err << "error: --kind " << c.kind << " but the file holds a " << to_string(f.kind) << " net\n";
    return kUsage;
  }
  ReportInput in;
  in.kind = f.kind;
  in.tol = c.tol;
  std::optional<IndefiniteInvariants> indef;
  std::optional<DefiniteInvariants> def;
  int numeric = kPass;
  try {
    if (f.kind == NetKind::Asymptotic) {
      AsymptoticNet net(f.q);
      if (orient_asymptotic(net)) out << "note: u and v swapped to make M positive\n";
      in.validation = validate_asymptotic(net, c.tol.validation);
      if (in.validation.pass) {
        IndefiniteOptions opt;
        if (c.seed) opt.seed_lambda = *c.seed;
        indef = analyze_indefinite(net, opt);
        in.indefinite = &*indef;
      }
    } else {
      ConjugateNet net(f.q);
      if (orient_conjugate(net)) out << "note: v reversed to make the Deltas positive\n";
      in.validation = validate_conjugate(net, c.tol.validation);
      if (in.validation.pass) {
        DefiniteOptions opt;
        if (c.seed) opt.seed_alpha = *c.seed;
        def = analyze_definite(net, opt);
        in.definite = &*def;
      }
    }
  } catch (const Error& e) {
    in.failure = describe(e);
    if (exit_code_for(e.code()) == kNumeric) numeric = kNumeric;
  }
  const nlohmann::json report = build_report(in);
  if (!c.report.empty()) write_text(c.report, dump_report(report));
  if (!c.structure_out.empty() && (indef || def)) {
    StructureFile s;
    s.kind = f.kind;
    s.tolerance = c.tol.residual;
    if (indef) s.indefinite = structure_of(*indef);
    else s.definite = structure_of(*def);
    write_structure(s, c.structure_out);
  }

  const bool pass = report_passes(report);
  out << (pass ? "PASS" : "FAIL") << " " << to_string(f.kind) << " net " << f.q.domain().nu << " x "
      << f.q.domain().nv;
  if (const ResidualReport* r = indef ? &indef->residuals : def ? &def->residuals : nullptr) {
    out << " worst residual " << r->worst() << " (tol " << c.tol.residual << ")\n";
    print_failures(out, *r, c.tol.residual);
  } else {
    out << "\n";
  }
  if (!in.validation.pass && !in.failure) {
    out << "  validation: planarity " << (in.validation.planarity_ok ? "ok" : "failed") << " (max "
        << in.validation.max_planarity << "), non-degeneracy " << (in.validation.nondegenerate_ok ? "ok" : "failed")
        << " (min " << in.validation.min_metric << ")\n";
  }
  if (in.failure) err << "error: " << *in.failure << "\n";
  if (numeric != kPass) return numeric;
  return pass ? kPass : kCheckFailed;
}

int cmd_reconstruct(const ReconstructConfig& c, std::ostream& out, std::ostream& err) {
  const StructureFile s = read_structure(c.in);
  NetFile f;
  f.kind = s.kind;
  f.metadata["generator"] = "reconstruct";
  ResidualReport check;
  bool valid = false;
  if (s.kind == NetKind::Asymptotic) {
    const IndefiniteReconstruction r = reconstruct(s.indefinite, std::nullopt, c.gate_tol);
    f.q = r.net.q;
    const ValidationReport v = validate_asymptotic(r.net, c.tol.validation);
    valid = v.pass;
    if (valid) check = analyze_indefinite(r.net).residuals;
  } else {
    const DefiniteReconstruction r = reconstruct_definite(s.definite, Vec3::Zero(), c.gate_tol);
    f.q = r.net.q;
    f.metadata["system_residual"] = r.system_residual;
    const ValidationReport v = validate_conjugate(r.net, c.tol.validation);
    valid = v.pass;
    if (valid) check = analyze_definite(r.net).residuals;
  }
  write_net(f, c.out);
  out << "wrote " << to_string(f.kind) << " net " << f.q.domain().nu << " x " << f.q.domain().nv << " to " << c.out
      << "\n";
  if (!valid) {
    err << "error: reconstructed net fails validation\n";
    return kCheckFailed;
  }
  if (!check.passes(c.tol.residual)) {
    err << "error: reconstructed net fails re-analysis, worst residual " << check.worst() << "\n";
    print_failures(err, check, c.tol.residual);
    return kCheckFailed;
  }
  out << "re-analysis worst residual " << check.worst() << "\n";
  return kPass;
}

int cmd_export(const ExportConfig& c, std::ostream& out) {
  const NetFile f = read_net(c.in);
  export_obj(f.q, c.out);
  out << "wrote " << (f.q.domain().nu - 1) * (f.q.domain().nv - 1) << " faces to " << c.out << "\n";
  return kPass;
}

void add_tolerances(CLI::App* app, Tolerances& tol) {
  app->add_option("--tol", tol.residual, "Relative tolerance of the residual suites")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app->add_option("--validation-tol", tol.validation, "Relative tolerance of the validation gate")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete affine surfaces on quadrangular meshes"};
  app.name("quadaffine");
  app.require_subcommand(1);

  GenerateConfig gen;
  CLI::App* g = app.add_subcommand("generate", "Write a built-in example net");
  std::string names;
  for (const auto& n : builtin_names()) names += (names.empty() ? "" : ", ") + n;
  g->add_option("--example", gen.example, "One of: " + names)->required();
  g->add_option("--out", gen.out, "Net file to write")->required();
  g->add_option("--nu-out", gen.nu_out, "Also write the co-normal field here");
  g->add_option("--range", gen.range, "lo:hi for both parameter ranges");
  std::map<std::string, std::optional<double>> param_slots;
  for (const auto& p : all_parameter_names()) param_slots[p];
  for (auto& [name, slot] : param_slots) g->add_option("--" + name, slot, "Example parameter " + name);

  AnalyzeConfig an;
  CLI::App* a = app.add_subcommand("analyze", "Validate a net and run every residual suite");
  a->add_option("--in", an.in, "Net file")->required();
  a->add_option("--report", an.report, "Report file to write");
  a->add_option("--structure-out", an.structure_out, "Write reconstruction data here");
  a->add_option("--kind", an.kind, "Expected net kind")->check(CLI::IsMember({"asymptotic", "conjugate"}));
  a->add_option("--seed", an.seed, "lambda on the seed face (asymptotic) or alpha at the seed vertex (conjugate)")
      ->check(CLI::PositiveNumber);
  add_tolerances(a, an.tol);

  ReconstructConfig rc;
  CLI::App* r = app.add_subcommand("reconstruct", "Build a net from reconstruction data");
  r->add_option("--in", rc.in, "Structure file")->required();
  r->add_option("--out", rc.out, "Net file to write")->required();
  r->add_option("--gate-tol", rc.gate_tol, "Compatibility gate tolerance")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  add_tolerances(r, rc.tol);

  ExportConfig ex;
  CLI::App* e = app.add_subcommand("export", "Write a net as an OBJ quad mesh");
  e->add_option("--in", ex.in, "Net file")->required();
  e->add_option("--out", ex.out, "OBJ file to write")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& pe) {
    err << "error: " << pe.what() << "\n" << app.help();
    return kUsage;
  }

  try {
    if (g->parsed()) {
      for (const auto& [name, slot] : param_slots)
        if (slot) gen.values[name] = *slot;
      try {
        builtin_defaults(gen.example);
      } catch (const Error& unknown) {
        err << "error: " << unknown.what() << "\n" << g->help();
        return kUsage;
      }
      return cmd_generate(gen, out);
    }
    if (a->parsed()) return cmd_analyze(an, out, err);
    if (r->parsed()) return cmd_reconstruct(rc, out, err);
    return cmd_export(ex, out);
  } catch (const Error& failure) {
    err << "error: " << describe(failure) << "\n";
    return exit_code_for(failure.code());
  } catch (const std::exception& failure) {
    err << "error: " << failure.what() << "\n";
    return kNumeric;
  }
}

}  // namespace quadaffine::cli
