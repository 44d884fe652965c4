#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "llps/model.hpp"

namespace llps {

// Joint state spaces are capped at 2^20; dense matrices are materialized and
// solved directly up to 2^12, matrix-free power iteration is used above.
inline constexpr int kMaxChainLength = 20;
inline constexpr int kMaxDenseChainLength = 12;

// Index of a binary state tuple: sum_j 2^j * s[j] (0-based form of the
// convention that puts the first tuple coordinate in the lowest bit).
std::size_t state_index(std::span<const int> states);

// One position of a parent-coupled binary chain. alpha/beta are the
// move-to-0 probabilities from own state 0/1 when the parent (the previous
// position) is in state 0; gamma/omega the same for parent state 1.
struct ChainPosition {
  double alpha, beta, gamma, omega;

  double mu() const { return alpha - beta; }
  // True when both parent-state matrices share one row difference, the
  // condition under which the closed-form tail recursion applies.
  bool mu_valid(double tol = 1e-9) const {
    return std::abs((alpha - beta) - (gamma - omega)) <= tol;
  }

  static ChainPosition uniform() { return {0.5, 0.5, 0.5, 0.5}; }
};

// A path chain stored source-first: position 0 has no parent and must carry
// gamma == alpha, omega == beta.
class InducedChain {
 public:
  explicit InducedChain(std::vector<ChainPosition> positions);

  int length() const { return static_cast<int>(pos_.size()); }
  const ChainPosition& at(int j) const { return pos_[static_cast<std::size_t>(j)]; }
  const std::vector<ChainPosition>& positions() const { return pos_; }

 private:
  std::vector<ChainPosition> pos_;
};

// Chain for a root-first path of tree nodes under the given policies
// (aligned with the path).
InducedChain induced_path_chain(const ProblemInstance& inst,
                                std::span<const int> path_root_first,
                                std::span<const LocalPolicy> policies);

// Probability vector over binary tuples of `coords` coordinates, indexed by
// state_index. Entries nonnegative, total mass 1 within 1e-12.
class Distribution {
 public:
  Distribution(int coords, std::vector<double> probs);

  int coords() const { return coords_; }
  const std::vector<double>& probs() const { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }

  // P(state = 1) of a single-coordinate distribution.
  double p1() const;

  double l1_distance(const Distribution& other) const;

 private:
  int coords_;
  std::vector<double> probs_;
};

// Dense 2^L x 2^L row-stochastic joint transition matrix of the chain:
// entry [x -> y] is the product of the per-position factors, each
// conditioned on the old own state and the old parent state.
Eigen::MatrixXd build_joint(const InducedChain& chain);

// Stationary distribution of a row-stochastic matrix of power-of-two
// dimension, by direct solve of the transposed balance equations with one
// row replaced by normalization. Guarantees ||pi P - pi||_1 <= 1e-10 or
// throws ValidationError.
Distribution stationary(const Eigen::MatrixXd& P);

// Stationary distribution of the chain's joint process; dispatches to the
// dense solve or to matrix-free power iteration by length.
Distribution stationary(const InducedChain& chain);

// Sums out all coordinates not listed; coords must be strictly increasing.
// The kept coordinates retain their relative order.
Distribution marginalize(const Distribution& d, std::span<const int> coords);

// Marginal stationary law of one node's state under a policy profile,
// computed on the root-to-node path chain (which is self-contained: nothing
// outside the path influences the node).
Distribution node_marginal(const ProblemInstance& inst, const PolicyProfile& profile, int node);

}  // namespace llps
