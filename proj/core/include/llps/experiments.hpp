#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llps/oracle.hpp"
#include "llps/solver.hpp"

namespace llps::harness {

// ---- decay experiment ------------------------------------------------------
// Line of `nodes` nodes; each run draws a fresh instance and one uniform
// random profile from the stream seeded with seed+run, then records the gap
// between the leaf's exact and truncated marginals for k = 1..k_max.

struct DecayOptions {
  int nodes = 10;
  int runs = 50;
  int k_max = 8;
  std::uint64_t seed = 1;
  bool uniform = false;  // force every parameter to 1/2 (all gaps vanish)
};

struct DecayRecord {
  int run;
  std::uint64_t seed;
  int k;
  double gap;
};

struct DecayResult {
  std::vector<DecayRecord> records;            // sorted by (run, k)
  std::vector<double> median_gap;              // [k-1] = median over runs
  std::vector<std::optional<double>> slope;    // per run: LS slope of log(gap) vs k,
                                               // gaps floored at 1e-14; empty when
                                               // every gap is below the floor
};

DecayResult run_decay(const DecayOptions& opts);

// Header `run,seed,k,gap`, one row per record, then summary rows
// `median,,<k>,<value>` and `slope,<run>,,<value>` (empty value for an
// undefined slope).
void write_decay_csv(const DecayResult& result, std::ostream& out);

// ---- case study -------------------------------------------------------------
// Exhaustive search followed by the tree solver for k = 1..k_max on one
// instance; rows report the true reward of each returned profile, its gap to
// the exhaustive optimum, and wall time.

struct CaseStudyRow {
  std::string algorithm;  // "exhaustive" or "llps"
  std::optional<int> k;   // absent for exhaustive
  double reward = 0.0;
  double gap = 0.0;
  double time_s = 0.0;
};

// Default 9-node, depth-3 topology: two children under the root, two under
// each of those, and one more leaf under each of the leftmost pair.
DirectedTree case_study_tree();

std::vector<CaseStudyRow> run_case_study(const ProblemInstance& inst, int k_max);

// Header `algorithm,k,reward,gap,time_s`.
void write_case_study_csv(std::span<const CaseStudyRow> rows, std::ostream& out);

// ---- command entry points ---------------------------------------------------
// Shared by the CLI and the tests. Return process exit codes:
// 0 ok, 1 validation failure, 2 parse/IO error, 3 resource guard.

int cmd_validate(const std::string& instance_path, std::ostream& out, std::ostream& err);

int cmd_solve(const std::string& instance_path, int k, const std::string& out_path,
              std::ostream& out, std::ostream& err);

int cmd_exhaustive(const std::string& instance_path, const std::string& out_path,
                   std::ostream& out, std::ostream& err);

int cmd_decay(const DecayOptions& opts, const std::string& csv_path,
              std::ostream& out, std::ostream& err);

struct CaseStudyOptions {
  std::optional<std::string> instance_path;  // default: seeded random instance
  std::uint64_t seed = 1;                    // on the default topology
  std::optional<int> k_max;                  // default: max(1, tree depth)
};

int cmd_case_study(const CaseStudyOptions& opts, const std::string& csv_path,
                   std::ostream& out, std::ostream& err);

}  // namespace llps::harness
