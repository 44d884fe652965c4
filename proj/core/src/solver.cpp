#include "llps/solver.hpp"

#include <chrono>
#include <limits>
#include <string>

#include "llps/errors.hpp"

namespace llps {

namespace {

void check_horizon(int k) {
  if (k < 1 || k > kMaxHorizon)
    throw ResourceLimitError("horizon " + std::to_string(k) + " outside [1, " +
                             std::to_string(kMaxHorizon) + "]");
}

// Key of child j's table given its parent i's policy and i's own key.
// Tables grow toward length k going down the tree; once both are at full
// length the farthest digit falls off.
inline std::uint32_t child_key(std::uint32_t key, int key_len, int child_key_len, int zi) {
  const std::uint32_t kept = (child_key_len - 1 == key_len) ? key : key >> 2;
  return (static_cast<std::uint32_t>(zi) << (2 * (child_key_len - 1))) | kept;
}

std::vector<ValueTable> backward_pass_impl(const ProblemInstance& inst, int k,
                                           NodeRewardCache& cache) {
  const auto& tree = inst.tree;
  std::vector<ValueTable> tables(static_cast<std::size_t>(inst.size()));
  const auto& order = tree.bfs_order();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const int i = *it;
    const int m = std::min(k, tree.depth(i));
    ValueTable& table = tables[static_cast<std::size_t>(i)];
    table.node = i;
    table.key_length = m;
    table.values.assign(std::size_t{1} << (2 * m), 0.0);
    for (std::uint32_t key = 0; key < table.values.size(); ++key) {
      double best = -std::numeric_limits<double>::infinity();
      for (int zi = 0; zi < LocalPolicy::kCount; ++zi) {
        double v = cache.reward(i, (static_cast<std::uint32_t>(zi) << (2 * m)) | key);
        for (int j : tree.children(i)) {
          const ValueTable& child = tables[static_cast<std::size_t>(j)];
          v += child.values[child_key(key, m, child.key_length, zi)];
        }
        if (v > best) best = v;
      }
      table.values[key] = best;
    }
  }
  return tables;
}

PolicyProfile forward_pass_impl(const ProblemInstance& inst, int k,
                                const std::vector<ValueTable>& tables, NodeRewardCache& cache) {
  const auto& tree = inst.tree;
  PolicyProfile profile(static_cast<std::size_t>(inst.size()));
  for (int i : tree.bfs_order()) {
    const int m = std::min(k, tree.depth(i));
    // policies of the 1..m-hop parents, nearest parent most significant
    std::uint32_t key = 0;
    int anc = i;
    for (int t = 0; t < m; ++t) {
      anc = *tree.parent(anc);
      key = (key << 2) | static_cast<std::uint32_t>(profile[static_cast<std::size_t>(anc)].code());
    }
    double best = -std::numeric_limits<double>::infinity();
    int best_code = 0;
    for (int zi = 0; zi < LocalPolicy::kCount; ++zi) {
      double v = cache.reward(i, (static_cast<std::uint32_t>(zi) << (2 * m)) | key);
      for (int j : tree.children(i)) {
        const ValueTable& child = tables[static_cast<std::size_t>(j)];
        v += child.values[child_key(key, m, child.key_length, zi)];
      }
      if (v > best) {
        best = v;
        best_code = zi;
      }
    }
    profile[static_cast<std::size_t>(i)] = LocalPolicy(best_code);
  }
  return profile;
}

}  // namespace

std::vector<ValueTable> backward_pass(const ProblemInstance& inst, int k) {
  check_horizon(k);
  NodeRewardCache cache(inst, k);
  return backward_pass_impl(inst, k, cache);
}

PolicyProfile forward_pass(const ProblemInstance& inst, int k,
                           const std::vector<ValueTable>& tables) {
  check_horizon(k);
  NodeRewardCache cache(inst, k);
  return forward_pass_impl(inst, k, tables, cache);
}

SolveResult solve(const ProblemInstance& inst, int k) {
  check_horizon(k);
  require_valid(inst);
  const auto start = std::chrono::steady_clock::now();

  NodeRewardCache cache(inst, k);
  const std::vector<ValueTable> tables = backward_pass_impl(inst, k, cache);
  PolicyProfile profile = forward_pass_impl(inst, k, tables, cache);

  double approx = 0.0;
  for (int i = 0; i < inst.size(); ++i) {
    const std::vector<int> path = inst.tree.k_hop_path(i, k);
    std::vector<LocalPolicy> policies;
    policies.reserve(path.size());
    for (int id : path) policies.push_back(profile[static_cast<std::size_t>(id)]);
    approx += cache.reward(i, encode_policy_path(policies));
  }

  SolveStats stats;
  stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (const ValueTable& t : tables) stats.table_entries += t.values.size();
  stats.reward_evals = cache.evals();
  stats.cache_hits = cache.hits();
  return SolveResult{std::move(profile), approx, stats};
}

}  // namespace llps
