#include "llps/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "llps/errors.hpp"

namespace llps {

double exact_node_reward(const ProblemInstance& inst, const PolicyProfile& profile, int node) {
  const Distribution m = node_marginal(inst, profile, node);
  const RewardVector& r = inst.rewards[static_cast<std::size_t>(node)];
  return r.r0 * m[0] + r.r1 * m[1];
}

double exact_total_reward(const ProblemInstance& inst, const PolicyProfile& profile) {
  double total = 0.0;
  for (int i = 0; i < inst.size(); ++i) total += exact_node_reward(inst, profile, i);
  return total;
}

// ---- exhaustive search -------------------------------------------------------

namespace {

struct Candidate {
  double reward = -std::numeric_limits<double>::infinity();
  std::uint64_t code = 0;
};

// Scans [begin, end) in ascending order; strict improvement keeps the lowest
// code on ties.
Candidate scan_profiles(std::uint64_t begin, std::uint64_t end, int n,
                        const std::vector<std::vector<double>>& node_reward,
                        const std::vector<std::vector<int>>& node_path) {
  Candidate best;
  for (std::uint64_t code = begin; code < end; ++code) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      std::uint32_t path_code = 0;
      for (int id : node_path[static_cast<std::size_t>(i)]) {
        const auto digit = (code >> (2 * (n - 1 - id))) & 3u;
        path_code = (path_code << 2) | static_cast<std::uint32_t>(digit);
      }
      total += node_reward[static_cast<std::size_t>(i)][path_code];
    }
    if (total > best.reward) best = {total, code};
  }
  return best;
}

}  // namespace

SearchResult exhaustive_search(const ProblemInstance& inst) {
  require_valid(inst);
  const int n = inst.size();
  if (n > kMaxExhaustiveNodes)
    throw ResourceLimitError("exhaustive search refuses n = " + std::to_string(n) + " > " +
                             std::to_string(kMaxExhaustiveNodes));

  // Reward of node i depends only on the policies along its root path, so
  // tabulate r_i . pi_i once per (node, path-policy) combination.
  std::vector<std::vector<int>> node_path(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> node_reward(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<int> path = inst.tree.k_hop_path(i, inst.tree.depth(i));
    const std::size_t len = path.size();
    std::vector<int> rev(path.rbegin(), path.rend());
    std::vector<double>& table = node_reward[static_cast<std::size_t>(i)];
    table.resize(std::size_t{1} << (2 * len));
    std::vector<LocalPolicy> policies(len);
    for (std::uint32_t code = 0; code < table.size(); ++code) {
      for (std::size_t t = 0; t < len; ++t)
        policies[t] = LocalPolicy(static_cast<int>((code >> (2 * (len - 1 - t))) & 3u));
      // policies[t] belongs to path[t]; the chain wants them root-first
      std::vector<LocalPolicy> rev_policies(policies.rbegin(), policies.rend());
      const Distribution joint = stationary(induced_path_chain(inst, rev, rev_policies));
      const int last = static_cast<int>(len) - 1;
      const Distribution m = marginalize(joint, std::span<const int>(&last, 1));
      const RewardVector& r = inst.rewards[static_cast<std::size_t>(i)];
      table[code] = r.r0 * m[0] + r.r1 * m[1];
    }
    node_path[static_cast<std::size_t>(i)] = std::move(path);
  }

  const std::uint64_t total = std::uint64_t{1} << (2 * n);
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, 16);
  if (total < (std::uint64_t{1} << 14)) workers = 1;

  std::vector<Candidate> results(workers);
  if (workers == 1) {
    results[0] = scan_profiles(0, total, n, node_reward, node_path);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = std::min(total, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        results[w] = scan_profiles(begin, end, n, node_reward, node_path);
      });
    }
    for (auto& t : pool) t.join();
  }

  // Chunks cover ascending code ranges; merging in chunk order keeps the
  // lowest-code maximizer independent of the worker count.
  Candidate best = results[0];
  for (unsigned w = 1; w < workers; ++w)
    if (results[w].reward > best.reward) best = results[w];

  PolicyProfile profile(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    profile[static_cast<std::size_t>(i)] =
        LocalPolicy(static_cast<int>((best.code >> (2 * (n - 1 - i))) & 3u));
  return SearchResult{std::move(profile), best.reward};
}

// ---- closed-form tail probability ---------------------------------------------

double chain_tail_prob(const InducedChain& chain, int k) {
  const int L = chain.length();
  if (k < 1 || k > L - 1)
    throw std::invalid_argument("split point k must lie in [1, length-1]");

  std::vector<double> coupling(static_cast<std::size_t>(L));  // (alpha-gamma)/(1-mu)
  std::vector<double> drive(static_cast<std::size_t>(L));     // (1-alpha)/(1-mu)
  std::vector<double> b(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) {
    const ChainPosition& p = chain.at(j);
    if (!p.mu_valid())
      throw std::invalid_argument("position " + std::to_string(j) +
                                  " has no common row difference");
    const double mu = p.mu();
    if (!(std::abs(mu) < 1.0))
      throw std::invalid_argument("row difference at position " + std::to_string(j) +
                                  " outside (-1,1)");
    coupling[static_cast<std::size_t>(j)] = (p.alpha - p.gamma) / (1.0 - mu);
    drive[static_cast<std::size_t>(j)] = (1.0 - p.alpha) / (1.0 - mu);
    b[static_cast<std::size_t>(j)] =
        j == 0 ? drive[0]
               : drive[static_cast<std::size_t>(j)] +
                     coupling[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(j - 1)];
  }

  // k-step product-sum expansion seeded at position L-1-k; must match the
  // iterated recursion.
  const int seed = L - 1 - k;
  double expanded = b[static_cast<std::size_t>(seed)];
  for (int j = seed + 1; j < L; ++j) expanded *= coupling[static_cast<std::size_t>(j)];
  for (int j = seed + 1; j < L; ++j) {
    double term = drive[static_cast<std::size_t>(j)];
    for (int l = j + 1; l < L; ++l) term *= coupling[static_cast<std::size_t>(l)];
    expanded += term;
  }
  const double iterated = b[static_cast<std::size_t>(L - 1)];
  if (std::abs(expanded - iterated) > 1e-12)
    throw std::logic_error("expanded and iterated tail probabilities disagree by " +
                           std::to_string(std::abs(expanded - iterated)));
  return iterated;
}

// ---- decay certificate ---------------------------------------------------------

DecayCertificate decay_certificate(const ProblemInstance& inst) {
  constexpr double kEqualityTol = 1e-9;
  DecayCertificate cert;
  cert.satisfied = true;
  cert.node_ratio.resize(static_cast<std::size_t>(inst.size()));
  cert.node_residual.resize(static_cast<std::size_t>(inst.size()));

  for (int i = 0; i < inst.size(); ++i) {
    const TransitionParams& p = inst.params[static_cast<std::size_t>(i)];
    const double diffs[4] = {p.e - p.f, p.e - p.fp, p.ep - p.f, p.ep - p.fp};
    const double residuals[4] = {
        std::abs((p.e - p.f) - (p.g - p.h)),
        std::abs((p.e - p.fp) - (p.g - p.hp)),
        std::abs((p.ep - p.f) - (p.gp - p.h)),
        std::abs((p.ep - p.fp) - (p.gp - p.hp)),
    };
    const double numerators[4] = {std::abs(p.e - p.g), std::abs(p.e - p.g),
                                  std::abs(p.ep - p.gp), std::abs(p.ep - p.gp)};
    double worst_residual = 0.0;
    double worst_ratio = 0.0;
    bool node_ok = true;
    for (int t = 0; t < 4; ++t) {
      worst_residual = std::max(worst_residual, residuals[t]);
      if (residuals[t] > kEqualityTol) node_ok = false;
      if (!(std::abs(diffs[t]) < 1.0)) {
        node_ok = false;
        worst_ratio = std::numeric_limits<double>::infinity();
        continue;
      }
      const double ratio = numerators[t] / (1.0 - diffs[t]);
      worst_ratio = std::max(worst_ratio, ratio);
    }
    if (worst_ratio >= 1.0) node_ok = false;
    cert.node_ratio[static_cast<std::size_t>(i)] = worst_ratio;
    cert.node_residual[static_cast<std::size_t>(i)] = worst_residual;
    cert.satisfied = cert.satisfied && node_ok;
  }

  cert.rho = cert.satisfied
                 ? *std::max_element(cert.node_ratio.begin(), cert.node_ratio.end())
                 : std::numeric_limits<double>::quiet_NaN();
  return cert;
}

double decay_gap(const ProblemInstance& inst, const PolicyProfile& profile, int node, int k) {
  const Distribution exact = node_marginal(inst, profile, node);
  const std::vector<int> path = inst.tree.k_hop_path(node, k);
  std::vector<LocalPolicy> policies;
  policies.reserve(path.size());
  for (int id : path) policies.push_back(profile[static_cast<std::size_t>(id)]);
  const Distribution approx = approx_marginal(truncated_chain(inst, node, k, policies));
  return exact.l1_distance(approx);
}

}  // namespace llps
