// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
//
// JSON documents for nets, reconstruction data and analysis reports, and OBJ
// export. Numbers are written with round-trip precision; undefined field
// entries are null. Schemas are documented in docs/formats.md.
#pragma once

#include <quadaffine/definite.hpp>
#include <quadaffine/generate.hpp>
#include <quadaffine/indefinite.hpp>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace quadaffine {

inline constexpr int kNetFormatVersion = 1;
inline constexpr int kStructureFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

struct NetFile {
  NetKind kind = NetKind::Asymptotic;
  VectorField q;  // fully defined vertex positions
  nlohmann::json metadata = nlohmann::json::object();
  nlohmann::json extra = nlohmann::json::object();  // unknown top-level members, kept on rewrite
};

// Throws Error(Parse) naming the offending member.
NetFile parse_net(const std::string& text);
std::string dump_net(const NetFile& f);
NetFile read_net(const std::filesystem::path& path);
void write_net(const NetFile& f, const std::filesystem::path& path);

// Metadata: generator name, resolved parameters and the U, V grids.
NetFile net_file_from(const GeneratedNet& g);

struct StructureFile {
  NetKind kind = NetKind::Asymptotic;  // asymptotic: indefinite data, conjugate: definite data
  IndefiniteStructure indefinite;
  DefiniteStructure definite;
  double tolerance = 0.0;  // residual tolerance of the analysis that produced it
  nlohmann::json extra = nlohmann::json::object();
};

StructureFile parse_structure(const std::string& text);
std::string dump_structure(const StructureFile& f);
StructureFile read_structure(const std::filesystem::path& path);
void write_structure(const StructureFile& f, const std::filesystem::path& path);

struct Tolerances {
  double validation = 1e-8;
  double residual = 1e-9;
};

// Everything a report needs. Invariants are absent when validation failed or
// analysis raised; `failure` then carries the message.
struct ReportInput {
  NetKind kind = NetKind::Asymptotic;
  Tolerances tol;
  ValidationReport validation;
  const IndefiniteInvariants* indefinite = nullptr;
  const DefiniteInvariants* definite = nullptr;
  std::optional<std::string> failure;
};

nlohmann::json build_report(const ReportInput& in);
// True iff validation passed, analysis ran and every residual is within tol.
bool report_passes(const nlohmann::json& report);
std::string dump_report(const nlohmann::json& report);
void write_report(const ReportInput& in, const std::filesystem::path& path);

// Co-normal field document: vertex or face carrier, null where undefined.
std::string dump_conormal(const VectorField& nu);
VectorField parse_conormal(const std::string& text);

// One `v` line per vertex in storage order, one quad per face.
std::string obj_text(const VectorField& q);
void export_obj(const VectorField& q, const std::filesystem::path& path);

// Whole-file helpers; failures raise Error(Io).
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace quadaffine
