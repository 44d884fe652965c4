#include "llps/truncation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "llps/errors.hpp"

namespace llps {

TruncatedModel truncated_chain(const ProblemInstance& inst, int node, int k,
                               std::span<const LocalPolicy> policies) {
  if (node < 0 || node >= inst.size()) throw std::invalid_argument("node id out of range");
  if (k < 1) throw std::invalid_argument("horizon must be at least 1");
  std::vector<int> path = inst.tree.k_hop_path(node, k);
  if (policies.size() != path.size())
    throw std::invalid_argument("expected one policy per path node, got " +
                                std::to_string(policies.size()));
  const bool truncated = inst.tree.depth(node) > k;

  const std::size_t L = path.size();
  std::vector<ChainPosition> pos(L);
  for (std::size_t t = 0; t < L; ++t) {
    // position L-1-t of the root-first chain corresponds to path[t]
    const std::size_t j = L - 1 - t;
    if (t + 1 == L && truncated) {
      pos[j] = ChainPosition::uniform();
      continue;
    }
    const InducedRows r =
        induced_transition(inst.params[static_cast<std::size_t>(path[t])], policies[t]);
    if (j == 0)
      pos[j] = {r.alpha, r.beta, r.alpha, r.beta};
    else
      pos[j] = {r.alpha, r.beta, r.gamma, r.omega};
  }

  std::reverse(path.begin(), path.end());
  return TruncatedModel{node, k, std::move(path), truncated, InducedChain(std::move(pos))};
}

Distribution approx_marginal(const TruncatedModel& tm) {
  const Distribution joint = stationary(tm.chain);
  const int last = tm.chain.length() - 1;
  return marginalize(joint, std::span<const int>(&last, 1));
}

double approx_node_reward(const ProblemInstance& inst, int node, int k,
                          std::span<const LocalPolicy> policies) {
  const Distribution m = approx_marginal(truncated_chain(inst, node, k, policies));
  const RewardVector& r = inst.rewards[static_cast<std::size_t>(node)];
  return r.r0 * m[0] + r.r1 * m[1];
}

double approx_total_reward(const ProblemInstance& inst, int k, const PolicyProfile& profile) {
  if (profile.size() != static_cast<std::size_t>(inst.size()))
    throw std::invalid_argument("profile length does not match instance");
  double total = 0.0;
  for (int i = 0; i < inst.size(); ++i) {
    const std::vector<int> path = inst.tree.k_hop_path(i, k);
    std::vector<LocalPolicy> policies;
    policies.reserve(path.size());
    for (int id : path) policies.push_back(profile[static_cast<std::size_t>(id)]);
    total += approx_node_reward(inst, i, k, policies);
  }
  return total;
}

std::uint32_t encode_policy_path(std::span<const LocalPolicy> policies) {
  std::uint32_t code = 0;
  for (LocalPolicy z : policies) code = (code << 2) | static_cast<std::uint32_t>(z.code());
  return code;
}

NodeRewardCache::NodeRewardCache(const ProblemInstance& inst, int k) : inst_(inst), k_(k) {
  const int n = inst.size();
  path_len_.resize(static_cast<std::size_t>(n));
  truncated_.resize(static_cast<std::size_t>(n));
  table_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int len = std::min(k, inst.tree.depth(i)) + 1;
    path_len_[static_cast<std::size_t>(i)] = len;
    truncated_[static_cast<std::size_t>(i)] = inst.tree.depth(i) > k;
    table_[static_cast<std::size_t>(i)].assign(std::size_t{1} << (2 * len),
                                               std::numeric_limits<double>::quiet_NaN());
  }
}

double NodeRewardCache::reward(int node, std::uint32_t path_code) {
  const std::size_t len = static_cast<std::size_t>(path_len_[static_cast<std::size_t>(node)]);
  if (truncated_[static_cast<std::size_t>(node)]) path_code &= ~std::uint32_t{3};
  double& slot = table_[static_cast<std::size_t>(node)][path_code];
  if (!std::isnan(slot)) {
    ++hits_;
    return slot;
  }
  std::vector<LocalPolicy> policies(len);
  for (std::size_t t = 0; t < len; ++t)
    policies[t] = LocalPolicy(static_cast<int>((path_code >> (2 * (len - 1 - t))) & 3u));
  slot = approx_node_reward(inst_, node, k_, policies);
  ++evals_;
  return slot;
}

}  // namespace llps
