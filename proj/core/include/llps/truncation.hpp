#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "llps/chain.hpp"

namespace llps {

// Chain over the k-hop parent path of one node. When the path is cut before
// reaching the root, the farthest position is replaced by the constant
// uniform node (all rows 1/2), which resamples its state uniformly each step
// and severs all upstream influence. When the path reaches the root
// (depth <= k) the chain is the exact root path and nothing is truncated.
struct TruncatedModel {
  int center;
  int horizon;
  std::vector<int> path;  // root-first
  bool truncated;
  InducedChain chain;
};

// policies are given along the path from the node upward: policies[0] is the
// node's own policy, policies[t] the t-hop parent's. When truncated, the
// entry for the farthest position is ignored (the uniform node has no
// policy).
TruncatedModel truncated_chain(const ProblemInstance& inst, int node, int k,
                               std::span<const LocalPolicy> policies);

// Marginal stationary law of the center node in the truncated chain.
Distribution approx_marginal(const TruncatedModel& tm);

// reward vector of the node dotted with approx_marginal.
double approx_node_reward(const ProblemInstance& inst, int node, int k,
                          std::span<const LocalPolicy> policies);

// Sum over nodes of approx_node_reward with each node's policy path taken
// from the profile.
double approx_total_reward(const ProblemInstance& inst, int k, const PolicyProfile& profile);

// Base-4 code of a policy tuple along a path; the first element becomes the
// most significant digit.
std::uint32_t encode_policy_path(std::span<const LocalPolicy> policies);

// Memo for per-node truncated rewards, keyed by the policy-path code over
// the node's k-hop path (most significant digit = the node itself). The
// solver queries each value up to 4^(k+1) times; entries are computed once.
// When the chain is truncated the farthest digit is canonicalized to 0
// before lookup since the uniform node ignores its policy. Not synchronized;
// use from one thread.
class NodeRewardCache {
 public:
  NodeRewardCache(const ProblemInstance& inst, int k);

  double reward(int node, std::uint32_t path_code);

  // Path length (nodes) of the key space at `node`.
  int path_length(int node) const { return path_len_[static_cast<std::size_t>(node)]; }

  std::size_t evals() const { return evals_; }
  std::size_t hits() const { return hits_; }

 private:
  const ProblemInstance& inst_;
  int k_;
  std::vector<int> path_len_;
  std::vector<bool> truncated_;
  std::vector<std::vector<double>> table_;  // NaN = not yet computed
  std::size_t evals_ = 0;
  std::size_t hits_ = 0;
};

}  // namespace llps
