#pragma once

#include <cstddef>
#include <vector>

#include "llps/truncation.hpp"

namespace llps {

// Horizons above this are refused: each table entry costs a stationary solve
// of dimension 2^(k+1) and the tables hold 4^k entries per node.
inline constexpr int kMaxHorizon = 10;

// Optimal-suffix values of one node: values[key] is the best total
// approximate reward attainable on the node's subtree given the policies of
// its 1..k-hop parents. Keys are base-4 codes of the parent-path policy
// tuple, most significant digit = nearest parent, so a child key is derived
// in O(1) by dropping the farthest digit and prepending the node's policy.
struct ValueTable {
  int node = 0;
  int key_length = 0;          // min(k, depth(node))
  std::vector<double> values;  // size 4^key_length
};

struct SolveStats {
  double wall_seconds = 0.0;
  std::size_t table_entries = 0;  // sum of value-table sizes
  std::size_t reward_evals = 0;   // stationary solves performed
  std::size_t cache_hits = 0;
};

// Reverse-BFS sweep filling each node's value table from its children's.
std::vector<ValueTable> backward_pass(const ProblemInstance& inst, int k);

// BFS sweep extracting the maximizing profile from the tables; argmax ties
// broken by lowest policy code.
PolicyProfile forward_pass(const ProblemInstance& inst, int k,
                           const std::vector<ValueTable>& tables);

struct SolveResult {
  PolicyProfile profile;
  double approx_reward = 0.0;  // value of the approximate objective at profile
  SolveStats stats;
};

// Runs both passes over a shared reward memo. The returned profile maximizes
// the k-hop approximate total reward exactly; with k at least the tree depth
// the approximation is the true objective and the profile is optimal.
// Validates the instance first.
SolveResult solve(const ProblemInstance& inst, int k);

}  // namespace llps
