#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hgad/graph.hpp"
#include "hgad/rng.hpp"

namespace hgad {

// The four node-outlier injection procedures plus joint mixtures.
enum class InjectionKind { contextual, structural, path, dice };

InjectionKind injection_kind_from_string(const std::string& s);
std::string to_string(InjectionKind k);

struct InjectionParams {
  int o = 0;        // number of outliers
  int q = 10;       // candidate references per node (contextual / path)
  int s = 10;       // clique size (structural); group count is o / s
  double p = 0.2;   // per-edge drop probability inside a clique (structural)
  double r = 0.5;   // disconnect ratio (dice)
};

struct InjectionResult {
  std::vector<int> outlier_labels;                // 0/1 per node
  std::vector<std::pair<int, int>> features_replaced;  // (node, source row)
  std::vector<std::pair<int, int>> edges_added;
  std::vector<std::pair<int, int>> edges_removed;
  std::vector<std::string> warnings;              // e.g. dice shortfalls (non-fatal)

  std::vector<int> outliers() const;  // indices with label 1
  // Change log as a JSON document; `kind` is free-form so mixtures can be
  // described as e.g. "contextual+structural".
  std::string to_json(const std::string& kind, const InjectionParams& params) const;
};

// All procedures mutate g in place and consume the rng stream in this
// documented order:
//   1. candidate draw         o distinct nodes (joint across kinds in mixtures)
//   2. per-candidate work     kind-specific, candidates processed in draw order:
//        contextual/path      q reference draws per candidate
//        structural           nothing (the candidate draw order is the random
//                             partition; groups are consecutive chunks of s),
//                             then s(s-1)/2 coin flips per group in ascending
//                             within-group pair order
//        dice                 per candidate: k disconnect draws from the current
//                             neighbors, then up to k connect draws
//
// Contextual: rows are l1-normalized only to measure farthest-ness among the q
// references (largest Euclidean distance, ties broken towards the smaller node
// index); the candidate's row is then overwritten with the reference's row as
// stored in the graph. References are drawn from nodes outside the candidate
// set.
InjectionResult inject_contextual(Graph& g, const InjectionParams& params, Rng& rng);

// Structural: o/s cliques (throws unless s >= 2 and s divides o). Every
// in-group pair is first connected and then dropped with probability p; the
// coin decides the pair's final state even where an edge pre-existed.
InjectionResult inject_structural(Graph& g, const InjectionParams& params, Rng& rng);

// Path: like contextual but farthest-ness is the BFS hop distance; unreachable
// references (infinite distance) win over every finite one. Isolated nodes are
// excluded from both candidate and reference sets.
InjectionResult inject_path(Graph& g, const InjectionParams& params, Rng& rng);

// Dice: per candidate i, k = ceil(|same-class neighbors| * r) edges to current
// neighbors (any class) are removed and k edges to different-class
// non-neighbors are added; when fewer than k such nodes exist the shortfall is
// logged as a warning and the degree invariant is relaxed for that node.
// Requires class labels.
InjectionResult inject_dice(Graph& g, const InjectionParams& params, Rng& rng);

// Joint mixture: candidates for all kinds are drawn in one pass without
// replacement (kind sets are disjoint); each kind's per-candidate phase then
// runs in the listed order on the shared stream. A mixture with a single
// (kind, o) entry is identical to calling that kind directly.
InjectionResult inject_mixture(Graph& g,
                               const std::vector<std::pair<InjectionKind, int>>& counts,
                               const InjectionParams& params, Rng& rng);

}  // namespace hgad
