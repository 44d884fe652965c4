#include "llps/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "llps/errors.hpp"
#include "llps/oracle.hpp"

namespace llps {

using nlohmann::json;

InducedRows induced_transition(const TransitionParams& p, LocalPolicy zeta) {
  return InducedRows{
      zeta.action(0) == 0 ? p.e : p.ep,
      zeta.action(1) == 0 ? p.f : p.fp,
      zeta.action(0) == 0 ? p.g : p.gp,
      zeta.action(1) == 0 ? p.h : p.hp,
  };
}

// ---- DirectedTree ----------------------------------------------------------

DirectedTree DirectedTree::from_parents(const std::vector<std::optional<int>>& parent) {
  const int n = static_cast<int>(parent.size());
  if (n == 0) throw ParseError("tree must have at least one node");

  DirectedTree t;
  t.parent_ = parent;
  t.children_.assign(parent.size(), {});
  t.depth_.assign(parent.size(), -1);

  int root = -1;
  for (int i = 0; i < n; ++i) {
    if (!parent[i]) {
      if (root >= 0) throw ParseError("multiple roots: nodes " + std::to_string(root) +
                                      " and " + std::to_string(i) + " both lack a parent");
      root = i;
    } else {
      const int p = *parent[i];
      if (p < 0 || p >= n) throw ParseError("parent id " + std::to_string(p) + " out of range");
      if (p == i) throw ParseError("cyclic parent structure: node " + std::to_string(i) +
                                   " is its own parent");
      t.children_[static_cast<std::size_t>(p)].push_back(i);
    }
  }
  if (root < 0) throw ParseError("no root: every node has a parent (cyclic parent structure)");
  t.root_ = root;
  t.depth_[static_cast<std::size_t>(root)] = 0;

  // Depths by walking parent links; a walk longer than n-1 steps means the
  // links loop without reaching the root.
  for (int i = 0; i < n; ++i) {
    std::vector<int> trail;
    int cur = i;
    while (t.depth_[static_cast<std::size_t>(cur)] < 0) {
      trail.push_back(cur);
      if (static_cast<int>(trail.size()) > n) throw ParseError("cyclic parent structure");
      cur = *parent[static_cast<std::size_t>(cur)];
    }
    int d = t.depth_[static_cast<std::size_t>(cur)];
    for (auto it = trail.rbegin(); it != trail.rend(); ++it)
      t.depth_[static_cast<std::size_t>(*it)] = ++d;
  }

  t.max_depth_ = *std::max_element(t.depth_.begin(), t.depth_.end());
  t.max_degree_ = 0;
  for (const auto& c : t.children_)
    t.max_degree_ = std::max(t.max_degree_, static_cast<int>(c.size()));

  // BFS: level by level, ascending ids inside a level.
  t.bfs_.reserve(parent.size());
  std::vector<int> level{root};
  while (!level.empty()) {
    std::sort(level.begin(), level.end());
    std::vector<int> next;
    for (int i : level) {
      t.bfs_.push_back(i);
      const auto& ci = t.children_[static_cast<std::size_t>(i)];
      next.insert(next.end(), ci.begin(), ci.end());
    }
    level = std::move(next);
  }
  return t;
}

DirectedTree DirectedTree::line(int n) {
  std::vector<std::optional<int>> parent(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) parent[static_cast<std::size_t>(i)] = i - 1;
  return from_parents(parent);
}

std::vector<int> DirectedTree::k_hop_path(int i, int k) const {
  std::vector<int> path{i};
  int cur = i;
  for (int t = 0; t < k && parent_[static_cast<std::size_t>(cur)]; ++t) {
    cur = *parent_[static_cast<std::size_t>(cur)];
    path.push_back(cur);
  }
  return path;
}

double ProblemInstance::reward_bound() const {
  double r = 0.0;
  for (const auto& rv : rewards) r = std::max(r, std::max(std::abs(rv.r0), std::abs(rv.r1)));
  return r;
}

// ---- validation ------------------------------------------------------------

ValidationReport validate_instance(const ProblemInstance& inst) {
  ValidationReport report;
  const double limit = 1.0 - kErgodicityMargin;
  for (int i = 0; i < inst.size(); ++i) {
    for (int code = 0; code < LocalPolicy::kCount; ++code) {
      const LocalPolicy zeta(code);
      const InducedRows rows = induced_transition(inst.params[static_cast<std::size_t>(i)], zeta);
      const double gap0 = std::abs(rows.alpha - rows.beta);
      const double gap1 = std::abs(rows.gamma - rows.omega);
      if (gap0 > limit) report.violations.push_back({i, 0, zeta, gap0});
      if (gap1 > limit) report.violations.push_back({i, 1, zeta, gap1});
    }
  }
  return report;
}

std::string ValidationReport::summary() const {
  if (ok()) return "ok: every policy-induced chain is ergodic\n";
  std::ostringstream os;
  os << violations.size() << " ergodicity violation(s):\n";
  for (const auto& v : violations)
    os << "  node " << v.node << ", parent state " << v.parent_state << ", policy "
       << v.policy.code() << ": |row difference| = " << v.row_gap << "\n";
  return os.str();
}

void require_valid(const ProblemInstance& inst) {
  const ValidationReport report = validate_instance(inst);
  if (!report.ok()) throw ValidationError(report.summary());
}

// ---- JSON documents ---------------------------------------------------------

namespace {

double read_probability(const json& v, const std::string& where) {
  if (!v.is_number()) throw ParseError(where + ": expected a number");
  const double x = v.get<double>();
  if (!(x >= 0.0 && x <= 1.0))
    throw ParseError(where + ": probability " + std::to_string(x) + " outside [0,1]");
  return x;
}

}  // namespace

ProblemInstance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
  for (const char* field : {"nodes", "parent", "params", "rewards"})
    if (!doc.contains(field)) throw ParseError(std::string("missing field '") + field + "'");

  if (!doc["nodes"].is_number_integer()) throw ParseError("'nodes' must be an integer");
  const int n = doc["nodes"].get<int>();
  if (n < 1) throw ParseError("'nodes' must be at least 1");

  const json& jparent = doc["parent"];
  if (!jparent.is_array() || static_cast<int>(jparent.size()) != n)
    throw ParseError("'parent' must be an array of length 'nodes'");
  std::vector<std::optional<int>> parent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const json& v = jparent[static_cast<std::size_t>(i)];
    if (v.is_null()) continue;
    if (!v.is_number_integer()) throw ParseError("'parent' entries must be integers or null");
    parent[static_cast<std::size_t>(i)] = v.get<int>();
  }
  DirectedTree tree = DirectedTree::from_parents(parent);

  const json& jparams = doc["params"];
  if (!jparams.is_array() || static_cast<int>(jparams.size()) != n)
    throw ParseError("'params' must be an array of length 'nodes'");
  std::vector<TransitionParams> params(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const json& row = jparams[static_cast<std::size_t>(i)];
    const std::string where = "params[" + std::to_string(i) + "]";
    if (!row.is_array()) throw ParseError(where + ": expected an array");
    std::vector<double> v;
    v.reserve(row.size());
    for (std::size_t t = 0; t < row.size(); ++t)
      v.push_back(read_probability(row[t], where + "[" + std::to_string(t) + "]"));
    TransitionParams& p = params[static_cast<std::size_t>(i)];
    const bool is_root = (i == tree.root());
    if (v.size() == 4) {
      if (!is_root) throw ParseError(where + ": only the root may use the 4-parameter form");
      p = {v[0], v[1], v[0], v[1], v[2], v[3], v[2], v[3]};
    } else if (v.size() == 8) {
      p = {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
      if (is_root && (p.e != p.g || p.f != p.h || p.ep != p.gp || p.fp != p.hp))
        throw ParseError(where + ": root parameters must mirror (e=g, f=h, e'=g', f'=h')");
    } else {
      throw ParseError(where + ": expected 8 values (root: 8 or 4)");
    }
  }

  const json& jrewards = doc["rewards"];
  if (!jrewards.is_array() || static_cast<int>(jrewards.size()) != n)
    throw ParseError("'rewards' must be an array of length 'nodes'");
  std::vector<RewardVector> rewards(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const json& row = jrewards[static_cast<std::size_t>(i)];
    const std::string where = "rewards[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != 2) throw ParseError(where + ": expected [r0, r1]");
    if (!row[0].is_number() || !row[1].is_number())
      throw ParseError(where + ": rewards must be numbers");
    rewards[static_cast<std::size_t>(i)] = {row[0].get<double>(), row[1].get<double>()};
  }

  return ProblemInstance{std::move(tree), std::move(params), std::move(rewards)};
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str());
}

std::string serialize_instance(const ProblemInstance& inst) {
  json doc;
  doc["nodes"] = inst.size();
  json jparent = json::array();
  json jparams = json::array();
  json jrewards = json::array();
  for (int i = 0; i < inst.size(); ++i) {
    const auto p = inst.tree.parent(i);
    jparent.push_back(p ? json(*p) : json(nullptr));
    const TransitionParams& tp = inst.params[static_cast<std::size_t>(i)];
    if (i == inst.tree.root())
      jparams.push_back({tp.e, tp.f, tp.ep, tp.fp});
    else
      jparams.push_back({tp.e, tp.f, tp.g, tp.h, tp.ep, tp.fp, tp.gp, tp.hp});
    const RewardVector& rv = inst.rewards[static_cast<std::size_t>(i)];
    jrewards.push_back({rv.r0, rv.r1});
  }
  doc["parent"] = std::move(jparent);
  doc["params"] = std::move(jparams);
  doc["rewards"] = std::move(jrewards);
  return doc.dump(1) + "\n";
}

PolicyProfile parse_policy(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("policy") || !doc["policy"].is_array())
    throw ParseError("policy document must contain an array field 'policy'");
  PolicyProfile profile;
  for (const json& v : doc["policy"]) {
    if (!v.is_number_integer()) throw ParseError("policy codes must be integers");
    const int code = v.get<int>();
    if (code < 0 || code > 3) throw ParseError("policy code " + std::to_string(code) +
                                               " outside 0..3");
    profile.emplace_back(code);
  }
  return profile;
}

std::string serialize_policy(const PolicyProfile& profile) {
  json codes = json::array();
  for (LocalPolicy z : profile) codes.push_back(z.code());
  json doc;
  doc["policy"] = std::move(codes);
  return doc.dump(1) + "\n";
}

// ---- random instances -------------------------------------------------------

namespace {

bool node_ergodic(const TransitionParams& p) {
  const double limit = 1.0 - kErgodicityMargin;
  for (int code = 0; code < LocalPolicy::kCount; ++code) {
    const InducedRows rows = induced_transition(p, LocalPolicy(code));
    if (std::abs(rows.alpha - rows.beta) > limit) return false;
    if (std::abs(rows.gamma - rows.omega) > limit) return false;
  }
  return true;
}

}  // namespace

ProblemInstance random_instance(const DirectedTree& tree, Xoshiro256StarStar& gen) {
  const int n = tree.size();
  std::vector<TransitionParams> params(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    TransitionParams& p = params[static_cast<std::size_t>(i)];
    do {
      if (i == tree.root()) {
        p.e = gen.uniform01();
        p.f = gen.uniform01();
        p.ep = gen.uniform01();
        p.fp = gen.uniform01();
        p.g = p.e;
        p.h = p.f;
        p.gp = p.ep;
        p.hp = p.fp;
      } else {
        p.e = gen.uniform01();
        p.f = gen.uniform01();
        p.g = gen.uniform01();
        p.h = gen.uniform01();
        p.ep = gen.uniform01();
        p.fp = gen.uniform01();
        p.gp = gen.uniform01();
        p.hp = gen.uniform01();
      }
    } while (!node_ergodic(p));
  }
  std::vector<RewardVector> rewards(static_cast<std::size_t>(n));
  for (auto& rv : rewards) {
    rv.r0 = gen.uniform01();
    rv.r1 = gen.uniform01();
  }
  return ProblemInstance{tree, std::move(params), std::move(rewards)};
}

ProblemInstance random_instance(const DirectedTree& tree, std::uint64_t seed) {
  Xoshiro256StarStar gen(seed);
  return random_instance(tree, gen);
}

CertifiedInstance random_certified_instance(const DirectedTree& tree, Xoshiro256StarStar& gen) {
  constexpr int kMaxAttempts = 10000;
  const double limit = 1.0 - kErgodicityMargin;
  const int n = tree.size();
  std::vector<TransitionParams> params(static_cast<std::size_t>(n));

  for (int i = 0; i < n; ++i) {
    TransitionParams& p = params[static_cast<std::size_t>(i)];
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxAttempts && !accepted; ++attempt) {
      const double e = gen.uniform01();
      const double f = gen.uniform01();
      const double ep = gen.uniform01();
      const double fp = gen.uniform01();
      if (i == tree.root()) {
        // Mirrored parameters satisfy the equality constraints with zero
        // coupling ratio; only the row differences need the margin.
        p = {e, f, e, f, ep, fp, ep, fp};
      } else {
        const double g = gen.uniform01();
        const double h = g - (e - f);
        const double hp = g - (e - fp);
        const double gp = ep - f + h;
        if (h < 0.0 || h > 1.0 || hp < 0.0 || hp > 1.0 || gp < 0.0 || gp > 1.0) continue;
        p = {e, f, g, h, ep, fp, gp, hp};
      }
      const double diffs[4] = {p.e - p.f, p.e - p.fp, p.ep - p.f, p.ep - p.fp};
      bool ok = true;
      for (double d : diffs) ok = ok && std::abs(d) <= limit;
      // Coupling ratios must stay strictly below 1 for a usable certificate.
      const double num0 = std::abs(p.e - p.g);
      const double num1 = std::abs(p.ep - p.gp);
      ok = ok && num0 / (1.0 - diffs[0]) <= limit && num0 / (1.0 - diffs[1]) <= limit &&
           num1 / (1.0 - diffs[2]) <= limit && num1 / (1.0 - diffs[3]) <= limit;
      // Construction guarantees the equalities up to rounding; re-check.
      ok = ok && std::abs((p.e - p.f) - (p.g - p.h)) <= 1e-12 &&
           std::abs((p.e - p.fp) - (p.g - p.hp)) <= 1e-12 &&
           std::abs((p.ep - p.f) - (p.gp - p.h)) <= 1e-12 &&
           std::abs((p.ep - p.fp) - (p.gp - p.hp)) <= 1e-12;
      accepted = ok;
    }
    if (!accepted)
      throw ResourceLimitError("could not sample certificate-feasible parameters for node " +
                               std::to_string(i) + " within 10000 attempts");
  }

  std::vector<RewardVector> rewards(static_cast<std::size_t>(n));
  for (auto& rv : rewards) {
    rv.r0 = gen.uniform01();
    rv.r1 = gen.uniform01();
  }
  ProblemInstance inst{tree, std::move(params), std::move(rewards)};
  const DecayCertificate cert = decay_certificate(inst);
  if (!cert.satisfied)
    throw ResourceLimitError("sampled instance failed its own certificate re-check");
  return CertifiedInstance{std::move(inst), cert.rho};
}

CertifiedInstance random_certified_instance(const DirectedTree& tree, std::uint64_t seed) {
  Xoshiro256StarStar gen(seed);
  return random_certified_instance(tree, gen);
}

PolicyProfile random_profile(int n, Xoshiro256StarStar& gen) {
  PolicyProfile profile;
  profile.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int code = std::min(3, static_cast<int>(gen.uniform01() * 4.0));
    profile.emplace_back(code);
  }
  return profile;
}

}  // namespace llps
