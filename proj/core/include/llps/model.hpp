#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llps/rng.hpp"

namespace llps {

// A policy-induced two-state chain is accepted as ergodic iff the absolute
// difference of its rows is at most 1 - kErgodicityMargin. The margin keeps
// the stationary solves away from singular systems.
inline constexpr double kErgodicityMargin = 1e-9;

// Next-state probabilities of one node, conditioned on (parent state, own
// action). Each value is the probability of moving to state 0; within a
// matrix, rows are the current own state:
//
//   parent 0, action 0: [[e , 1-e ], [f , 1-f ]]
//   parent 1, action 0: [[g , 1-g ], [h , 1-h ]]
//   parent 0, action 1: [[ep, 1-ep], [fp, 1-fp]]
//   parent 1, action 1: [[gp, 1-gp], [hp, 1-hp]]
//
// The root has no parent; its parameters are stored mirrored so that
// e == g, f == h, ep == gp and fp == hp hold exactly.
struct TransitionParams {
  double e, f, g, h, ep, fp, gp, hp;
};

// Deterministic map from a node's binary state to its binary action. The
// code packs the pair as code = a(0) + 2*a(1); codes 0..3 enumerate all four
// maps, and this numeric order is the tie-breaking order everywhere.
class LocalPolicy {
 public:
  static constexpr int kCount = 4;

  constexpr LocalPolicy() = default;
  constexpr explicit LocalPolicy(int code) : code_(code) {}

  constexpr int code() const { return code_; }
  constexpr int action(int state) const { return (code_ >> state) & 1; }

  friend constexpr bool operator==(LocalPolicy a, LocalPolicy b) = default;

 private:
  int code_ = 0;
};

using PolicyProfile = std::vector<LocalPolicy>;

// The two-state transition rows induced at one node once a local policy
// fixes the action as a function of state: alpha/beta are the move-to-0
// probabilities from own state 0/1 under parent state 0, gamma/omega the
// same under parent state 1.
struct InducedRows {
  double alpha, beta, gamma, omega;
};

// Row s=0 of each parent-state matrix takes the action zeta(0), row s=1 the
// action zeta(1).
InducedRows induced_transition(const TransitionParams& p, LocalPolicy zeta);

// Rooted tree where every non-root node has exactly one parent and
// transitions flow parent -> child. Immutable after construction.
class DirectedTree {
 public:
  // Validates: exactly one root (null parent), every parent id in range,
  // no cycles. Throws ParseError on violation.
  static DirectedTree from_parents(const std::vector<std::optional<int>>& parent);

  // 0 -> 1 -> ... -> n-1 with node 0 as root.
  static DirectedTree line(int n);

  int size() const { return static_cast<int>(parent_.size()); }
  int root() const { return root_; }
  std::optional<int> parent(int i) const { return parent_[i]; }
  const std::vector<int>& children(int i) const { return children_[i]; }
  int depth(int i) const { return depth_[i]; }
  int max_depth() const { return max_depth_; }
  int max_degree() const { return max_degree_; }

  // Root first, parents before children, ascending ids within a level.
  const std::vector<int>& bfs_order() const { return bfs_; }

  // (i, 1-hop parent, ..., m-hop parent) with m = min(k, depth(i)); stops at
  // the root when depth(i) < k.
  std::vector<int> k_hop_path(int i, int k) const;

 private:
  DirectedTree() = default;

  std::vector<std::optional<int>> parent_;
  std::vector<std::vector<int>> children_;
  std::vector<int> depth_;
  std::vector<int> bfs_;
  int root_ = 0;
  int max_depth_ = 0;
  int max_degree_ = 0;
};

// Reward of one node viewed as a vector over its two states.
struct RewardVector {
  double r0, r1;
};

struct ProblemInstance {
  DirectedTree tree;
  std::vector<TransitionParams> params;
  std::vector<RewardVector> rewards;

  int size() const { return tree.size(); }

  // max_i max(|r0|, |r1|); computed from the data.
  double reward_bound() const;
};

struct ErgodicityViolation {
  int node;
  int parent_state;
  LocalPolicy policy;
  double row_gap;  // the offending |row difference|
};

struct ValidationReport {
  std::vector<ErgodicityViolation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Checks, for every node, parent state and local policy, that the induced
// two-state chain is ergodic under the margin criterion. Never throws;
// failures are report entries.
ValidationReport validate_instance(const ProblemInstance& inst);

// Throws ValidationError when validate_instance reports violations.
void require_valid(const ProblemInstance& inst);

// JSON instance documents; see README for the schema. The root's parameters
// may be given as [e, f, e', f'] (mirrored on parse) or as 8 values that
// must satisfy the mirror constraint exactly. Throws ParseError.
ProblemInstance parse_instance(const std::string& text);
ProblemInstance load_instance(const std::string& path);
std::string serialize_instance(const ProblemInstance& inst);

// JSON policy documents: {"policy": [codes 0..3]}.
PolicyProfile parse_policy(const std::string& text);
std::string serialize_policy(const PolicyProfile& profile);

// All transition parameters and rewards i.i.d. uniform on [0,1] from the
// given stream (draw order documented in the README); nodes failing the
// ergodicity margin are redrawn. Identical seeds yield identical instances.
ProblemInstance random_instance(const DirectedTree& tree, Xoshiro256StarStar& gen);
ProblemInstance random_instance(const DirectedTree& tree, std::uint64_t seed);

struct CertifiedInstance {
  ProblemInstance instance;
  double rho;  // certified decay rate, in [0, 1)
};

// Random instance whose parameters satisfy the equality constraints of the
// decay certificate at every node (h, h', g' derived from free draws;
// rejection-resampled per node, at most 10000 attempts). Returns the
// instance with its certified rate.
CertifiedInstance random_certified_instance(const DirectedTree& tree, Xoshiro256StarStar& gen);
CertifiedInstance random_certified_instance(const DirectedTree& tree, std::uint64_t seed);

// One uniform draw per node; code = floor(4u).
PolicyProfile random_profile(int n, Xoshiro256StarStar& gen);

}  // namespace llps
