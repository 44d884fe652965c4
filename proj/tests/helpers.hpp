#pragma once

// Test-side oracles and generators. Everything here is deliberately
// independent of the library's chain/truncation code paths: joints are built
// entry by entry from the factorization, and stationary vectors come from a
// plain dense power iteration.

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "llps/chain.hpp"
#include "llps/model.hpp"

namespace testutil {

// Whole-tree joint transition matrix: entry [x -> y] is the product over
// nodes of P_i(y_i | x_i, x_parent(i)) under the profile. node_bit[i] gives
// the bit position of node i (identity by default; any permutation works).
inline Eigen::MatrixXd tree_joint(const llps::ProblemInstance& inst,
                                  const llps::PolicyProfile& profile,
                                  const std::vector<int>& node_bit) {
  const int n = inst.size();
  const std::size_t dim = std::size_t{1} << n;
  Eigen::MatrixXd P(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  for (std::size_t x = 0; x < dim; ++x) {
    for (std::size_t y = 0; y < dim; ++y) {
      double prob = 1.0;
      for (int i = 0; i < n; ++i) {
        const llps::InducedRows r = llps::induced_transition(
            inst.params[static_cast<std::size_t>(i)], profile[static_cast<std::size_t>(i)]);
        const int own = static_cast<int>((x >> node_bit[static_cast<std::size_t>(i)]) & 1u);
        const int next = static_cast<int>((y >> node_bit[static_cast<std::size_t>(i)]) & 1u);
        const auto parent = inst.tree.parent(i);
        const int par =
            parent ? static_cast<int>((x >> node_bit[static_cast<std::size_t>(*parent)]) & 1u) : 0;
        double to_zero;
        if (par == 0)
          to_zero = own == 0 ? r.alpha : r.beta;
        else
          to_zero = own == 0 ? r.gamma : r.omega;
        prob *= next == 0 ? to_zero : 1.0 - to_zero;
      }
      P(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = prob;
    }
  }
  return P;
}

inline std::vector<int> identity_bits(int n) {
  std::vector<int> bits(static_cast<std::size_t>(n));
  std::iota(bits.begin(), bits.end(), 0);
  return bits;
}

// Plain power iteration on a dense row-stochastic matrix.
inline Eigen::VectorXd stationary_ref(const Eigen::MatrixXd& P) {
  const Eigen::Index dim = P.rows();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(dim, 1.0 / static_cast<double>(dim));
  for (int it = 0; it < 2000000; ++it) {
    Eigen::RowVectorXd next = pi * P;
    const double err = (next - pi).cwiseAbs().sum();
    pi = next;
    if (err <= 1e-14) return pi.transpose() / pi.sum();
  }
  throw std::runtime_error("reference power iteration did not converge");
}

// Marginal P(bit = 1) of a probability vector over bit tuples.
inline double marginal_one(const Eigen::VectorXd& pi, int bit) {
  double b = 0.0;
  for (Eigen::Index x = 0; x < pi.size(); ++x)
    if ((static_cast<std::size_t>(x) >> bit) & 1u) b += pi(x);
  return b;
}

// Stationary P(s=1) of the two-state chain [[a, 1-a], [b, 1-b]].
inline double two_state_one(double a, double b) { return (1.0 - a) / (1.0 - a + b); }

// Random chain with arbitrary parameters.
inline llps::InducedChain random_chain(int length, llps::Xoshiro256StarStar& gen) {
  std::vector<llps::ChainPosition> pos;
  pos.reserve(static_cast<std::size_t>(length));
  for (int j = 0; j < length; ++j) {
    const double a = gen.uniform01();
    const double b = gen.uniform01();
    if (j == 0) {
      pos.push_back({a, b, a, b});
    } else {
      pos.push_back({a, b, gen.uniform01(), gen.uniform01()});
    }
  }
  return llps::InducedChain(std::move(pos));
}

// Random chain whose positions all share a common row difference in (-1,1),
// the precondition of the closed-form tail recursion. The difference is kept
// away from +-1 so the stationary solves stay well conditioned.
inline llps::InducedChain random_mu_valid_chain(int length, llps::Xoshiro256StarStar& gen) {
  std::vector<llps::ChainPosition> pos;
  pos.reserve(static_cast<std::size_t>(length));
  for (int j = 0; j < length; ++j) {
    for (;;) {
      const double a = gen.uniform01();
      const double b = gen.uniform01();
      const double mu = a - b;
      if (std::abs(mu) > 0.98) continue;
      if (j == 0) {
        pos.push_back({a, b, a, b});
        break;
      }
      const double g = gen.uniform01();
      const double w = g - mu;
      if (w < 0.0 || w > 1.0) continue;
      pos.push_back({a, b, g, w});
      break;
    }
  }
  return llps::InducedChain(std::move(pos));
}

// Random tree: each node's parent is drawn uniformly among earlier nodes of
// depth < depth_cap, so depths never exceed the cap.
inline llps::DirectedTree random_tree(int n, int depth_cap, llps::Xoshiro256StarStar& gen) {
  std::vector<std::optional<int>> parent(static_cast<std::size_t>(n));
  std::vector<int> depth(static_cast<std::size_t>(n), 0);
  for (int i = 1; i < n; ++i) {
    for (;;) {
      const int p = static_cast<int>(gen.uniform01() * i);
      if (depth[static_cast<std::size_t>(p)] >= depth_cap) continue;
      parent[static_cast<std::size_t>(i)] = p;
      depth[static_cast<std::size_t>(i)] = depth[static_cast<std::size_t>(p)] + 1;
      break;
    }
  }
  return llps::DirectedTree::from_parents(parent);
}

// All 4^n policy profiles in ascending lexicographic order (node 0's policy
// is the most significant digit).
inline llps::PolicyProfile profile_from_code(std::uint64_t code, int n) {
  llps::PolicyProfile profile(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    profile[static_cast<std::size_t>(i)] =
        llps::LocalPolicy(static_cast<int>((code >> (2 * (n - 1 - i))) & 3u));
  return profile;
}

}  // namespace testutil
