#include "hgad/injection.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <limits>
#include <stdexcept>

namespace hgad {

namespace {

// Shared state for one injection call. Mixtures draw the candidates for every
// kind up front (one pass over the rng stream) and then run the per-candidate
// phases in the listed kind order; a direct call is a one-entry mixture.
struct Session {
  Graph& g;
  Rng& rng;
  InjectionResult& result;
  std::vector<char> is_candidate;  // joint candidate set of the whole call

  Session(Graph& graph, Rng& r, InjectionResult& res)
      : g(graph), rng(r), result(res), is_candidate(static_cast<std::size_t>(graph.num_nodes()), 0) {}

  void mark(const std::vector<int>& candidates) {
    for (int c : candidates) {
      is_candidate[static_cast<std::size_t>(c)] = 1;
      result.outlier_labels[static_cast<std::size_t>(c)] = 1;
    }
  }

  // Nodes outside the joint candidate set, ascending. `connected_only` drops
  // isolated nodes (isolation judged on the call-start adjacency, captured in
  // `isolated`).
  std::vector<int> reference_pool(bool connected_only, const std::vector<char>& isolated) const {
    std::vector<int> pool;
    pool.reserve(static_cast<std::size_t>(g.num_nodes()));
    for (int v = 0; v < g.num_nodes(); ++v) {
      if (is_candidate[static_cast<std::size_t>(v)]) continue;
      if (connected_only && isolated[static_cast<std::size_t>(v)]) continue;
      pool.push_back(v);
    }
    return pool;
  }

  void add_edge(int u, int v) {
    if (u == v || g.has_edge(u, v)) return;
    g.add_edge(u, v);
    result.edges_added.emplace_back(std::min(u, v), std::max(u, v));
  }

  void remove_edge(int u, int v) {
    if (!g.has_edge(u, v)) return;
    g.remove_edge(u, v);
    result.edges_removed.emplace_back(std::min(u, v), std::max(u, v));
  }
};

Eigen::RowVectorXd l1_normalized_row(const Eigen::MatrixXd& x, int i) {
  const double s = x.row(i).cwiseAbs().sum();
  if (s <= 0.0) return x.row(i);
  return x.row(i) / s;
}

// Candidate rows are replaced only after their own reference draw, candidate
// sets are disjoint and references live outside the joint candidate set, so
// every row read below still holds its call-start value.
void run_contextual(Session& s, const std::vector<int>& candidates, int q,
                    const std::vector<char>& isolated) {
  const std::vector<int> pool = s.reference_pool(/*connected_only=*/false, isolated);
  if (static_cast<int>(pool.size()) < q)
    throw std::invalid_argument("contextual injection: not enough reference nodes");
  for (int c : candidates) {
    const std::vector<int> refs = s.rng.sample_from(pool, static_cast<std::size_t>(q));
    const Eigen::RowVectorXd xc = l1_normalized_row(s.g.x, c);
    int best = -1;
    double best_dist = -1.0;
    for (int r : refs) {
      const double d = (l1_normalized_row(s.g.x, r) - xc).norm();
      if (d > best_dist || (d == best_dist && r < best)) {
        best = r;
        best_dist = d;
      }
    }
    s.g.x.row(c) = s.g.x.row(best);
    s.result.features_replaced.emplace_back(c, best);
  }
}

void run_structural(Session& s, const std::vector<int>& candidates, int group_size, double p) {
  const int o = static_cast<int>(candidates.size());
  if (group_size < 2) throw std::invalid_argument("structural injection: group size must be >= 2");
  if (o % group_size != 0)
    throw std::invalid_argument("structural injection: group size must divide the outlier count");
  // The random partition is the candidate draw order itself: consecutive
  // chunks of `group_size`. One coin per in-group pair decides the final edge
  // state, overriding anything pre-existing.
  for (int g0 = 0; g0 < o; g0 += group_size) {
    for (int a = 0; a < group_size; ++a) {
      for (int b = a + 1; b < group_size; ++b) {
        const int u = candidates[static_cast<std::size_t>(g0 + a)];
        const int v = candidates[static_cast<std::size_t>(g0 + b)];
        if (s.rng.uniform() < p)
          s.remove_edge(u, v);
        else
          s.add_edge(u, v);
      }
    }
  }
}

void run_path(Session& s, const std::vector<int>& candidates, int q,
              const std::vector<char>& isolated) {
  const std::vector<int> pool = s.reference_pool(/*connected_only=*/true, isolated);
  if (static_cast<int>(pool.size()) < q)
    throw std::invalid_argument("path injection: not enough connected reference nodes");
  for (int c : candidates) {
    const std::vector<int> refs = s.rng.sample_from(pool, static_cast<std::size_t>(q));
    const std::vector<int> hops = bfs_hops(s.g, c);
    // Unreachable (-1) counts as infinitely far and beats every finite hop
    // count; ties go to the smaller node index.
    int best = -1;
    long best_hops = -2;
    for (int r : refs) {
      const int h = hops[static_cast<std::size_t>(r)];
      const long key = h < 0 ? std::numeric_limits<long>::max() : h;
      if (key > best_hops || (key == best_hops && r < best)) {
        best = r;
        best_hops = key;
      }
    }
    s.g.x.row(c) = s.g.x.row(best);
    s.result.features_replaced.emplace_back(c, best);
  }
}

void run_dice(Session& s, const std::vector<int>& candidates, double r) {
  if (!s.g.has_labels())
    throw std::invalid_argument("dice injection requires class labels");
  for (int c : candidates) {
    const int yc = s.g.labels[static_cast<std::size_t>(c)];
    const std::vector<int>& neighbors = s.g.adj[static_cast<std::size_t>(c)];
    int same_class = 0;
    for (int k : neighbors)
      if (s.g.labels[static_cast<std::size_t>(k)] == yc) ++same_class;
    const int want = static_cast<int>(std::ceil(static_cast<double>(same_class) * r));
    if (want == 0) continue;

    // Disconnect: sampled from all current neighbors regardless of class.
    int k_disc = want;
    if (k_disc > static_cast<int>(neighbors.size())) {
      s.result.warnings.push_back("dice: node " + std::to_string(c) + " has only " +
                                  std::to_string(neighbors.size()) + " neighbors; wanted to drop " +
                                  std::to_string(want));
      k_disc = static_cast<int>(neighbors.size());
    }
    const std::vector<int> drop = s.rng.sample_from(neighbors, static_cast<std::size_t>(k_disc));
    for (int j : drop) s.remove_edge(c, j);

    // Connect: different-class non-neighbors of the current (post-disconnect)
    // graph, ascending index order.
    std::vector<int> external;
    for (int v = 0; v < s.g.num_nodes(); ++v) {
      if (v == c || s.g.labels[static_cast<std::size_t>(v)] == yc || s.g.has_edge(c, v)) continue;
      external.push_back(v);
    }
    int k_conn = want;
    if (k_conn > static_cast<int>(external.size())) {
      s.result.warnings.push_back("dice: node " + std::to_string(c) + " has only " +
                                  std::to_string(external.size()) +
                                  " different-class non-neighbors; wanted to add " +
                                  std::to_string(want));
      k_conn = static_cast<int>(external.size());
    }
    const std::vector<int> add = s.rng.sample_from(external, static_cast<std::size_t>(k_conn));
    for (int j : add) s.add_edge(c, j);
  }
}

InjectionResult run(Graph& g, const std::vector<std::pair<InjectionKind, int>>& counts,
                    const InjectionParams& params, Rng& rng) {
  g.check_consistent();
  int total = 0;
  bool any_path = false;
  for (const auto& [kind, o] : counts) {
    if (o < 0) throw std::invalid_argument("injection: outlier count must be >= 0");
    total += o;
    if (kind == InjectionKind::path && o > 0) any_path = true;
  }
  if (total > g.num_nodes()) throw std::invalid_argument("injection: more outliers than nodes");

  InjectionResult result;
  result.outlier_labels.assign(static_cast<std::size_t>(g.num_nodes()), 0);
  Session session(g, rng, result);

  // Call-start isolation, used for path candidate/reference eligibility even
  // when an earlier kind in the mixture has already touched edges.
  std::vector<char> isolated(static_cast<std::size_t>(g.num_nodes()), 0);
  for (int v = 0; v < g.num_nodes(); ++v)
    isolated[static_cast<std::size_t>(v)] = g.is_isolated(v) ? 1 : 0;

  // Joint candidate draw: one pass without replacement, split into consecutive
  // chunks in the listed kind order. When a path component is present the pool
  // shrinks to connected nodes so that every chunk stays path-eligible.
  std::vector<int> joint;
  if (any_path) {
    std::vector<int> pool;
    for (int v = 0; v < g.num_nodes(); ++v)
      if (!isolated[static_cast<std::size_t>(v)]) pool.push_back(v);
    if (static_cast<int>(pool.size()) < total)
      throw std::invalid_argument("injection: more outliers than connected nodes");
    joint = rng.sample_from(pool, static_cast<std::size_t>(total));
  } else {
    joint = rng.sample_indices(static_cast<std::size_t>(g.num_nodes()),
                               static_cast<std::size_t>(total));
  }
  session.mark(joint);

  std::size_t offset = 0;
  for (const auto& [kind, o] : counts) {
    const std::vector<int> candidates(joint.begin() + static_cast<std::ptrdiff_t>(offset),
                                      joint.begin() + static_cast<std::ptrdiff_t>(offset + o));
    offset += static_cast<std::size_t>(o);
    switch (kind) {
      case InjectionKind::contextual:
        run_contextual(session, candidates, params.q, isolated);
        break;
      case InjectionKind::structural:
        run_structural(session, candidates, params.s, params.p);
        break;
      case InjectionKind::path:
        run_path(session, candidates, params.q, isolated);
        break;
      case InjectionKind::dice:
        run_dice(session, candidates, params.r);
        break;
    }
  }
  return result;
}

}  // namespace

InjectionKind injection_kind_from_string(const std::string& s) {
  if (s == "contextual") return InjectionKind::contextual;
  if (s == "structural") return InjectionKind::structural;
  if (s == "path") return InjectionKind::path;
  if (s == "dice") return InjectionKind::dice;
  throw std::invalid_argument("unknown injection kind: " + s);
}

std::string to_string(InjectionKind k) {
  switch (k) {
    case InjectionKind::contextual: return "contextual";
    case InjectionKind::structural: return "structural";
    case InjectionKind::path: return "path";
    case InjectionKind::dice: return "dice";
  }
  return "?";
}

std::vector<int> InjectionResult::outliers() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < outlier_labels.size(); ++i)
    if (outlier_labels[i]) out.push_back(static_cast<int>(i));
  return out;
}

std::string InjectionResult::to_json(const std::string& kind, const InjectionParams& params) const {
  nlohmann::json j;
  j["kind"] = kind;
  j["params"] = {{"o", params.o}, {"q", params.q}, {"s", params.s},
                 {"p", params.p}, {"r", params.r}};
  j["num_outliers"] = outliers().size();
  j["outliers"] = outliers();
  j["features_replaced"] = features_replaced;
  j["edges_added"] = edges_added;
  j["edges_removed"] = edges_removed;
  j["warnings"] = warnings;
  return j.dump(2);
}

InjectionResult inject_contextual(Graph& g, const InjectionParams& params, Rng& rng) {
  return run(g, {{InjectionKind::contextual, params.o}}, params, rng);
}

InjectionResult inject_structural(Graph& g, const InjectionParams& params, Rng& rng) {
  return run(g, {{InjectionKind::structural, params.o}}, params, rng);
}

InjectionResult inject_path(Graph& g, const InjectionParams& params, Rng& rng) {
  return run(g, {{InjectionKind::path, params.o}}, params, rng);
}

InjectionResult inject_dice(Graph& g, const InjectionParams& params, Rng& rng) {
  return run(g, {{InjectionKind::dice, params.o}}, params, rng);
}

InjectionResult inject_mixture(Graph& g, const std::vector<std::pair<InjectionKind, int>>& counts,
                               const InjectionParams& params, Rng& rng) {
  return run(g, counts, params, rng);
}

}  // namespace hgad
