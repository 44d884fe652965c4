// Command-line front end: find near-optimal local policies for multi-agent
// MDPs on one-directional trees, and run the decay / case-study experiments.
//
// Exit codes: 0 ok, 1 validation failure, 2 parse or IO error, 3 resource
// guard refusal.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "llps/experiments.hpp"
#include "llps/solver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Local policy search on one-directional trees"};
  app.require_subcommand(1);

  std::string instance_path;
  std::string out_path;
  std::string csv_path;
  int k = 1;

  auto* validate = app.add_subcommand("validate", "Check every policy-induced chain is ergodic");
  validate->add_option("instance", instance_path, "instance JSON file")->required();

  auto* solve = app.add_subcommand("solve", "Run the tree DP at horizon k");
  solve->add_option("instance", instance_path, "instance JSON file")->required();
  solve->add_option("--k", k, "truncation horizon")->required();
  solve->add_option("--out", out_path, "policy JSON output path")->required();

  auto* exhaustive = app.add_subcommand("exhaustive", "Enumerate all 4^n policy profiles");
  exhaustive->add_option("instance", instance_path, "instance JSON file")->required();
  exhaustive->add_option("--out", out_path, "policy JSON output path")->required();

  llps::harness::DecayOptions decay_opts;
  auto* decay = app.add_subcommand("decay", "Truncation-gap experiment on a random line");
  decay->add_option("--nodes", decay_opts.nodes, "line length")->capture_default_str();
  decay->add_option("--runs", decay_opts.runs, "number of runs")->capture_default_str();
  decay->add_option("--kmax", decay_opts.k_max, "largest horizon")->capture_default_str();
  decay->add_option("--seed", decay_opts.seed, "base seed (run r uses seed+r)")
      ->capture_default_str();
  decay->add_flag("--uniform", decay_opts.uniform, "force all parameters to 1/2");
  decay->add_option("--csv", csv_path, "CSV output path")->required();

  llps::harness::CaseStudyOptions cs_opts;
  std::string cs_instance;
  int cs_kmax = 0;
  auto* casestudy =
      app.add_subcommand("casestudy", "Exhaustive search vs the DP at k = 1..kmax");
  auto* cs_inst_opt = casestudy->add_option("--instance", cs_instance, "instance JSON file");
  casestudy->add_option("--seed", cs_opts.seed, "seed for the default 9-node topology")
      ->capture_default_str()
      ->excludes(cs_inst_opt);
  auto* cs_kmax_opt = casestudy->add_option("--kmax", cs_kmax, "largest horizon (default: tree depth)");
  casestudy->add_option("--csv", csv_path, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  if (validate->parsed()) return llps::harness::cmd_validate(instance_path, std::cout, std::cerr);
  if (solve->parsed()) return llps::harness::cmd_solve(instance_path, k, out_path, std::cout, std::cerr);
  if (exhaustive->parsed())
    return llps::harness::cmd_exhaustive(instance_path, out_path, std::cout, std::cerr);
  if (decay->parsed()) return llps::harness::cmd_decay(decay_opts, csv_path, std::cout, std::cerr);
  if (casestudy->parsed()) {
    if (!cs_instance.empty()) cs_opts.instance_path = cs_instance;
    if (cs_kmax_opt->count() > 0) cs_opts.k_max = cs_kmax;
    return llps::harness::cmd_case_study(cs_opts, csv_path, std::cout, std::cerr);
  }
  return 2;
}
