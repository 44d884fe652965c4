#include "llps/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "llps/errors.hpp"

namespace llps {

std::size_t state_index(std::span<const int> states) {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < states.size(); ++j) idx |= static_cast<std::size_t>(states[j]) << j;
  return idx;
}

InducedChain::InducedChain(std::vector<ChainPosition> positions) : pos_(std::move(positions)) {
  if (pos_.empty()) throw std::invalid_argument("chain must have at least one position");
  for (const ChainPosition& p : pos_)
    for (double v : {p.alpha, p.beta, p.gamma, p.omega})
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("chain parameter " + std::to_string(v) + " outside [0,1]");
  if (pos_[0].gamma != pos_[0].alpha || pos_[0].omega != pos_[0].beta)
    throw std::invalid_argument("source position must carry gamma == alpha, omega == beta");
}

InducedChain induced_path_chain(const ProblemInstance& inst, std::span<const int> path,
                                std::span<const LocalPolicy> policies) {
  if (path.size() != policies.size())
    throw std::invalid_argument("path and policy spans differ in length");
  std::vector<ChainPosition> pos;
  pos.reserve(path.size());
  for (std::size_t j = 0; j < path.size(); ++j) {
    const InducedRows r =
        induced_transition(inst.params[static_cast<std::size_t>(path[j])], policies[j]);
    if (j == 0)
      pos.push_back({r.alpha, r.beta, r.alpha, r.beta});
    else
      pos.push_back({r.alpha, r.beta, r.gamma, r.omega});
  }
  return InducedChain(std::move(pos));
}

// ---- Distribution ----------------------------------------------------------

Distribution::Distribution(int coords, std::vector<double> probs)
    : coords_(coords), probs_(std::move(probs)) {
  if (coords_ < 1 || coords_ > kMaxChainLength)
    throw std::invalid_argument("distribution coordinate count out of range");
  if (probs_.size() != (std::size_t{1} << coords_))
    throw std::invalid_argument("distribution size does not match coordinate count");
  double sum = 0.0;
  for (double& p : probs_) {
    if (p < 0.0) {
      if (p < -1e-12) throw std::invalid_argument("negative probability entry");
      p = 0.0;
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum) + ", not 1");
}

double Distribution::p1() const {
  if (coords_ != 1) throw std::invalid_argument("p1() needs a single-coordinate distribution");
  return probs_[1];
}

double Distribution::l1_distance(const Distribution& other) const {
  if (coords_ != other.coords_) throw std::invalid_argument("coordinate counts differ");
  double d = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) d += std::abs(probs_[i] - other.probs_[i]);
  return d;
}

// ---- joint matrix -----------------------------------------------------------

namespace {

// Probability that position j moves to state 0, given its own old state and
// its parent's old state (ignored at the source).
inline double move_to_zero(const ChainPosition& p, int own, int parent_state) {
  if (parent_state == 0) return own == 0 ? p.alpha : p.beta;
  return own == 0 ? p.gamma : p.omega;
}

}  // namespace

Eigen::MatrixXd build_joint(const InducedChain& chain) {
  const int L = chain.length();
  if (L > kMaxDenseChainLength)
    throw ResourceLimitError("dense joint matrix limited to length " +
                             std::to_string(kMaxDenseChainLength) + ", got " + std::to_string(L));
  const std::size_t dim = std::size_t{1} << L;
  Eigen::MatrixXd P(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  std::vector<double> row(dim);
  for (std::size_t x = 0; x < dim; ++x) {
    // Next-state coordinates are independent given x, so the row is an outer
    // product of per-position two-point factors.
    row[0] = 1.0;
    std::size_t filled = 1;
    for (int j = 0; j < L; ++j) {
      const int own = static_cast<int>((x >> j) & 1u);
      const int par = j == 0 ? 0 : static_cast<int>((x >> (j - 1)) & 1u);
      const double p0 = move_to_zero(chain.at(j), own, par);
      for (std::size_t y = 0; y < filled; ++y) {
        const double v = row[y];
        row[y] = v * p0;
        row[y + filled] = v * (1.0 - p0);
      }
      filled <<= 1;
    }
    for (std::size_t y = 0; y < dim; ++y) P(static_cast<Eigen::Index>(x),
                                            static_cast<Eigen::Index>(y)) = row[y];
  }
  return P;
}

// ---- stationary distributions ------------------------------------------------

namespace {

int log2_of(Eigen::Index n) {
  int bits = 0;
  while ((Eigen::Index{1} << bits) < n) ++bits;
  if ((Eigen::Index{1} << bits) != n)
    throw std::invalid_argument("matrix dimension must be a power of two");
  return bits;
}

Distribution finish_stationary(int coords, Eigen::VectorXd pi, const Eigen::MatrixXd& P) {
  pi = pi.cwiseMax(0.0);
  pi /= pi.sum();
  const double residual = (pi.transpose() * P - pi.transpose()).cwiseAbs().sum();
  if (!(residual <= 1e-10))
    throw ValidationError("stationary solve residual " + std::to_string(residual) +
                          " exceeds 1e-10; chain does not look ergodic");
  return Distribution(coords, std::vector<double>(pi.data(), pi.data() + pi.size()));
}

}  // namespace

Distribution stationary(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols()) throw std::invalid_argument("transition matrix must be square");
  const int coords = log2_of(P.rows());
  if (coords > kMaxDenseChainLength)
    throw ResourceLimitError("dense stationary solve limited to dimension 2^" +
                             std::to_string(kMaxDenseChainLength));
  // pi P = pi with sum(pi) = 1: transpose the balance equations and replace
  // the first row by the normalization.
  Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(P.rows(), P.cols());
  A.row(0).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(P.rows());
  b(0) = 1.0;
  Eigen::VectorXd pi = A.partialPivLu().solve(b);
  return finish_stationary(coords, std::move(pi), P);
}

namespace {

// One matrix-free application out = (as row vector) pi * P, contracting the
// old-state coordinates from the last position down. While position j is
// processed, bit j-1 still holds the old parent state. O(L 2^L).
void apply_chain(const InducedChain& chain, std::vector<double>& buf) {
  const int L = chain.length();
  const std::size_t dim = buf.size();
  for (int j = L - 1; j >= 0; --j) {
    const ChainPosition& cp = chain.at(j);
    const std::size_t bit = std::size_t{1} << j;
    for (std::size_t base = 0; base < dim; ++base) {
      if (base & bit) continue;
      const std::size_t i1 = base | bit;
      const int par = j == 0 ? 0 : static_cast<int>((base >> (j - 1)) & 1u);
      const double a0 = move_to_zero(cp, 0, par);
      const double a1 = move_to_zero(cp, 1, par);
      const double old0 = buf[base];
      const double old1 = buf[i1];
      buf[base] = old0 * a0 + old1 * a1;
      buf[i1] = old0 * (1.0 - a0) + old1 * (1.0 - a1);
    }
  }
}

Distribution stationary_power(const InducedChain& chain) {
  const int L = chain.length();
  const std::size_t dim = std::size_t{1} << L;
  std::vector<double> pi(dim, 1.0 / static_cast<double>(dim));
  std::vector<double> next(dim);
  constexpr int kMaxIterations = 1000000;
  for (int it = 0; it < kMaxIterations; ++it) {
    next = pi;
    apply_chain(chain, next);
    double err = 0.0;
    for (std::size_t i = 0; i < dim; ++i) err += std::abs(next[i] - pi[i]);
    pi.swap(next);
    if (err <= 1e-12) {
      double sum = std::accumulate(pi.begin(), pi.end(), 0.0);
      for (double& p : pi) p /= sum;
      return Distribution(L, std::move(pi));
    }
  }
  throw ValidationError("power iteration did not converge; chain does not look ergodic");
}

}  // namespace

Distribution stationary(const InducedChain& chain) {
  const int L = chain.length();
  if (L > kMaxChainLength)
    throw ResourceLimitError("chain length " + std::to_string(L) + " exceeds limit " +
                             std::to_string(kMaxChainLength));
  if (L <= kMaxDenseChainLength) return stationary(build_joint(chain));
  return stationary_power(chain);
}

Distribution marginalize(const Distribution& d, std::span<const int> coords) {
  if (coords.empty()) throw std::invalid_argument("coordinate subset must be nonempty");
  for (std::size_t t = 0; t < coords.size(); ++t) {
    if (coords[t] < 0 || coords[t] >= d.coords())
      throw std::invalid_argument("coordinate out of range");
    if (t > 0 && coords[t] <= coords[t - 1])
      throw std::invalid_argument("coordinates must be strictly increasing");
  }
  const int m = static_cast<int>(coords.size());
  std::vector<double> out(std::size_t{1} << m, 0.0);
  const auto& p = d.probs();
  for (std::size_t x = 0; x < p.size(); ++x) {
    std::size_t idx = 0;
    for (int t = 0; t < m; ++t) idx |= ((x >> coords[static_cast<std::size_t>(t)]) & 1u) << t;
    out[idx] += p[x];
  }
  return Distribution(m, std::move(out));
}

Distribution node_marginal(const ProblemInstance& inst, const PolicyProfile& profile, int node) {
  if (node < 0 || node >= inst.size()) throw std::invalid_argument("node id out of range");
  if (profile.size() != static_cast<std::size_t>(inst.size()))
    throw std::invalid_argument("profile length does not match instance");
  std::vector<int> path = inst.tree.k_hop_path(node, inst.tree.depth(node));
  std::reverse(path.begin(), path.end());  // root first
  const int L = static_cast<int>(path.size());
  if (L > kMaxChainLength)
    throw ResourceLimitError("path length " + std::to_string(L) + " exceeds limit " +
                             std::to_string(kMaxChainLength));
  std::vector<LocalPolicy> policies;
  policies.reserve(path.size());
  for (int id : path) policies.push_back(profile[static_cast<std::size_t>(id)]);
  const Distribution joint = stationary(induced_path_chain(inst, path, policies));
  const int last = L - 1;
  return marginalize(joint, std::span<const int>(&last, 1));
}

}  // namespace llps
