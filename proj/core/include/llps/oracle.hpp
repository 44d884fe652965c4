#pragma once

#include <vector>

#include "llps/chain.hpp"
#include "llps/truncation.hpp"

namespace llps {

// 4^n profiles is the whole search space; 12 nodes is where enumeration
// stops being a reasonable request.
inline constexpr int kMaxExhaustiveNodes = 12;

// Average reward at one node / summed over all nodes, from the exact
// stationary marginals.
double exact_node_reward(const ProblemInstance& inst, const PolicyProfile& profile, int node);
double exact_total_reward(const ProblemInstance& inst, const PolicyProfile& profile);

struct SearchResult {
  PolicyProfile profile;
  double reward = 0.0;
};

// Enumerates all 4^n policy profiles against per-node path-marginal reward
// tables and returns the exact maximizer; ties broken by lowest
// lexicographic profile (root policy most significant). Profile ranges are
// scanned in parallel with a deterministic reduction. Validates the
// instance; refuses n > kMaxExhaustiveNodes.
SearchResult exhaustive_search(const ProblemInstance& inst);

// Stationary P(state = 1) at the last chain position via the closed-form
// one-step recursion
//   b_j = (1 - alpha_j)/(1 - mu_j) + (alpha_j - gamma_j)/(1 - mu_j) * b_{j-1},
// available when every position has a common row difference mu in (-1,1).
// The k-step product-sum expansion of the recursion is evaluated as well and
// must agree with the iterated form within 1e-12. k in [1, length-1].
double chain_tail_prob(const InducedChain& chain, int k);

// Per-node certificate of the geometric-decay parameter condition: the four
// cross-equalities e-f = g-h, e-f' = g-h', e'-f = g'-h, e'-f' = g'-h' must
// hold within 1e-9 with every difference inside (-1,1), and then each node
// contributes the worst of its four coupling ratios |e-g| / (1-(e-f)) etc.
// The certificate is all-or-nothing: rho is NaN unless satisfied.
struct DecayCertificate {
  bool satisfied = false;
  double rho = 0.0;                   // in [0,1) when satisfied, else NaN
  std::vector<double> node_ratio;     // worst ratio per node
  std::vector<double> node_residual;  // worst equality residual per node
};

DecayCertificate decay_certificate(const ProblemInstance& inst);

// ||pi_node - approximate pi_node at horizon k||_1: the quantity whose decay
// in k the certificate bounds by 2 rho^k.
double decay_gap(const ProblemInstance& inst, const PolicyProfile& profile, int node, int k);

}  // namespace llps
