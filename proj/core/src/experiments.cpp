#include "llps/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "llps/errors.hpp"

namespace llps::harness {

using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

constexpr double kGapFloor = 1e-14;

std::optional<double> log_gap_slope(std::span<const double> gaps) {
  bool any_above_floor = false;
  for (double g : gaps) any_above_floor = any_above_floor || g > kGapFloor;
  if (!any_above_floor) return std::nullopt;
  const int m = static_cast<int>(gaps.size());
  double xbar = 0.0, ybar = 0.0;
  for (int k = 1; k <= m; ++k) {
    xbar += k;
    ybar += std::log(std::max(gaps[static_cast<std::size_t>(k - 1)], kGapFloor));
  }
  xbar /= m;
  ybar /= m;
  double sxy = 0.0, sxx = 0.0;
  for (int k = 1; k <= m; ++k) {
    const double dx = k - xbar;
    sxy += dx * (std::log(std::max(gaps[static_cast<std::size_t>(k - 1)], kGapFloor)) - ybar);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

ProblemInstance uniform_instance(const DirectedTree& tree) {
  std::vector<TransitionParams> params(static_cast<std::size_t>(tree.size()),
                                       TransitionParams{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5});
  std::vector<RewardVector> rewards(static_cast<std::size_t>(tree.size()),
                                    RewardVector{0.5, 0.5});
  return ProblemInstance{tree, std::move(params), std::move(rewards)};
}

}  // namespace

DecayResult run_decay(const DecayOptions& opts) {
  if (opts.nodes < 2) throw std::invalid_argument("decay experiment needs at least 2 nodes");
  if (opts.runs < 1) throw std::invalid_argument("decay experiment needs at least 1 run");
  if (opts.k_max < 1 || opts.k_max > opts.nodes - 2)
    throw std::invalid_argument("k_max must lie in [1, nodes-2]");

  const DirectedTree line = DirectedTree::line(opts.nodes);
  const int leaf = opts.nodes - 1;
  DecayResult result;
  result.records.reserve(static_cast<std::size_t>(opts.runs) *
                         static_cast<std::size_t>(opts.k_max));

  std::vector<std::vector<double>> per_k(static_cast<std::size_t>(opts.k_max));
  for (int run = 0; run < opts.runs; ++run) {
    const std::uint64_t run_seed = opts.seed + static_cast<std::uint64_t>(run);
    Xoshiro256StarStar gen(run_seed);
    const ProblemInstance inst =
        opts.uniform ? uniform_instance(line) : random_instance(line, gen);
    const PolicyProfile profile = random_profile(opts.nodes, gen);

    const Distribution exact = node_marginal(inst, profile, leaf);
    std::vector<double> gaps(static_cast<std::size_t>(opts.k_max));
    for (int k = 1; k <= opts.k_max; ++k) {
      const std::vector<int> path = inst.tree.k_hop_path(leaf, k);
      std::vector<LocalPolicy> policies;
      policies.reserve(path.size());
      for (int id : path) policies.push_back(profile[static_cast<std::size_t>(id)]);
      const double gap =
          exact.l1_distance(approx_marginal(truncated_chain(inst, leaf, k, policies)));
      gaps[static_cast<std::size_t>(k - 1)] = gap;
      per_k[static_cast<std::size_t>(k - 1)].push_back(gap);
      result.records.push_back({run, run_seed, k, gap});
    }
    result.slope.push_back(log_gap_slope(gaps));
  }

  result.median_gap.reserve(per_k.size());
  for (auto& column : per_k) result.median_gap.push_back(median(std::move(column)));
  return result;
}

void write_decay_csv(const DecayResult& result, std::ostream& out) {
  out << "run,seed,k,gap\n";
  for (const DecayRecord& r : result.records)
    out << r.run << ',' << r.seed << ',' << r.k << ',' << fmt(r.gap) << '\n';
  for (std::size_t k = 0; k < result.median_gap.size(); ++k)
    out << "median,," << (k + 1) << ',' << fmt(result.median_gap[k]) << '\n';
  for (std::size_t run = 0; run < result.slope.size(); ++run) {
    out << "slope," << run << ",,";
    if (result.slope[run]) out << fmt(*result.slope[run]);
    out << '\n';
  }
}

DirectedTree case_study_tree() {
  const std::vector<std::optional<int>> parent = {std::nullopt, 0, 0, 1, 1, 2, 2, 3, 4};
  return DirectedTree::from_parents(parent);
}

std::vector<CaseStudyRow> run_case_study(const ProblemInstance& inst, int k_max) {
  if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
  std::vector<CaseStudyRow> rows;

  const auto t0 = std::chrono::steady_clock::now();
  const SearchResult best = exhaustive_search(inst);
  const double exhaustive_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rows.push_back({"exhaustive", std::nullopt, best.reward, 0.0, exhaustive_seconds});

  for (int k = 1; k <= k_max; ++k) {
    const SolveResult res = solve(inst, k);
    const double reward = exact_total_reward(inst, res.profile);
    rows.push_back({"llps", k, reward, best.reward - reward, res.stats.wall_seconds});
  }
  return rows;
}

void write_case_study_csv(std::span<const CaseStudyRow> rows, std::ostream& out) {
  out << "algorithm,k,reward,gap,time_s\n";
  for (const CaseStudyRow& r : rows) {
    out << r.algorithm << ',';
    if (r.k) out << *r.k;
    out << ',' << fmt(r.reward) << ',' << fmt(r.gap) << ',' << fmt(r.time_s) << '\n';
  }
}

// ---- command entry points -----------------------------------------------------

namespace {

int classify(const std::exception& e, std::ostream& err) {
  err << "error: " << e.what() << "\n";
  if (dynamic_cast<const ValidationError*>(&e)) return 1;
  if (dynamic_cast<const ResourceLimitError*>(&e)) return 3;
  return 2;  // parse / IO / bad arguments
}

int write_file(const std::string& path, const std::string& content, std::ostream& err) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) {
    err << "error: cannot write '" << path << "'\n";
    return 2;
  }
  return 0;
}

}  // namespace

int cmd_validate(const std::string& instance_path, std::ostream& out, std::ostream& err) {
  try {
    const ProblemInstance inst = load_instance(instance_path);
    const ValidationReport report = validate_instance(inst);
    out << report.summary();
    return report.ok() ? 0 : 1;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_solve(const std::string& instance_path, int k, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  try {
    const ProblemInstance inst = load_instance(instance_path);
    require_valid(inst);
    const SolveResult res = solve(inst, k);
    const double exact = exact_total_reward(inst, res.profile);

    json doc;
    json codes = json::array();
    for (LocalPolicy z : res.profile) codes.push_back(z.code());
    doc["policy"] = std::move(codes);
    doc["k"] = k;
    doc["approx_reward"] = res.approx_reward;
    doc["exact_reward"] = exact;
    doc["stats"] = {{"table_entries", res.stats.table_entries},
                    {"reward_evals", res.stats.reward_evals},
                    {"cache_hits", res.stats.cache_hits}};
    if (int rc = write_file(out_path, doc.dump(1) + "\n", err)) return rc;

    out << "k = " << k << ": approx reward " << fmt(res.approx_reward) << ", exact reward "
        << fmt(exact) << " (" << res.stats.wall_seconds << " s, " << res.stats.table_entries
        << " table entries, " << res.stats.reward_evals << " evals, " << res.stats.cache_hits
        << " cache hits)\n";
    return 0;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_exhaustive(const std::string& instance_path, const std::string& out_path,
                   std::ostream& out, std::ostream& err) {
  try {
    const ProblemInstance inst = load_instance(instance_path);
    const auto t0 = std::chrono::steady_clock::now();
    const SearchResult best = exhaustive_search(inst);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json doc;
    json codes = json::array();
    for (LocalPolicy z : best.profile) codes.push_back(z.code());
    doc["policy"] = std::move(codes);
    doc["reward"] = best.reward;
    if (int rc = write_file(out_path, doc.dump(1) + "\n", err)) return rc;

    out << "optimal reward " << fmt(best.reward) << " over " << (std::uint64_t{1} << (2 * inst.size()))
        << " profiles (" << seconds << " s)\n";
    return 0;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_decay(const DecayOptions& opts, const std::string& csv_path, std::ostream& out,
              std::ostream& err) {
  try {
    const DecayResult result = run_decay(opts);
    std::ostringstream csv;
    write_decay_csv(result, csv);
    if (int rc = write_file(csv_path, csv.str(), err)) return rc;

    int negative = 0, defined = 0;
    for (const auto& s : result.slope) {
      if (!s) continue;
      ++defined;
      if (*s < 0.0) ++negative;
    }
    out << result.records.size() << " records over " << opts.runs << " runs; " << negative
        << "/" << defined << " defined slopes negative\n";
    return 0;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

int cmd_case_study(const CaseStudyOptions& opts, const std::string& csv_path, std::ostream& out,
                   std::ostream& err) {
  try {
    const ProblemInstance inst = opts.instance_path
                                     ? load_instance(*opts.instance_path)
                                     : random_instance(case_study_tree(), opts.seed);
    const int k_max = opts.k_max ? *opts.k_max : std::max(1, inst.tree.max_depth());
    const std::vector<CaseStudyRow> rows = run_case_study(inst, k_max);
    std::ostringstream csv;
    write_case_study_csv(rows, csv);
    if (int rc = write_file(csv_path, csv.str(), err)) return rc;

    for (const CaseStudyRow& r : rows) {
      out << r.algorithm;
      if (r.k) out << " k=" << *r.k;
      out << ": reward " << fmt(r.reward) << ", gap " << fmt(r.gap) << ", " << r.time_s << " s\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return classify(e, err);
  }
}

}  // namespace llps::harness
