// Copyright 2026 The quadaffine Authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <quadaffine/grid.hpp>

#include <map>
#include <string>
#include <vector>

namespace quadaffine {

// Worst normalized residual of one equation family and where it occurred.
struct ResidualStat {
  double max = 0.0;
  Index where{-1, -1};
  std::size_t samples = 0;
};

// Named residual summaries. Ordered by name so serialized reports are stable.
class ResidualReport {
 public:
  void record(const std::string& name, double value, Index where);
  // Registers a family with no applicable stencil so it still appears by name.
  void touch(const std::string& name);
  void merge(const ResidualReport& other);

  double worst() const;
  bool passes(double tol) const { return worst() <= tol; }
  // Families whose maximum exceeds tol.
  std::map<std::string, ResidualStat> failures(double tol) const;

  const std::map<std::string, ResidualStat>& entries() const { return entries_; }
  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  const ResidualStat& at(const std::string& name) const { return entries_.at(name); }

 private:
  std::map<std::string, ResidualStat> entries_;
};

}  // namespace quadaffine

namespace quadaffine {

// Outcome of a net validation gate.
struct ValidationReport {
  bool pass = false;
  bool planarity_ok = false;
  bool nondegenerate_ok = false;
  double max_planarity = 0.0;  // worst normalized coplanarity residual
  double min_metric = 0.0;     // min M (asymptotic) or min Delta_k (conjugate)
  std::vector<Index> failures; // stencils violating either check
};

}  // namespace quadaffine
