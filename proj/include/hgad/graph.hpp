#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <string>
#include <vector>

namespace hgad {

// Row-wise feature normalization applied once at load time.
enum class NormalizationMode { none, l1_row, l2_row };

NormalizationMode normalization_from_string(const std::string& s);
std::string to_string(NormalizationMode m);

// Undirected attributed graph. Neighbor lists are kept sorted, symmetric and
// free of self-loops; where a formulation needs self-loops (message passing,
// the structural loss) they are added logically, never stored.
struct Graph {
  Eigen::MatrixXd x;                     // n x d node features
  std::vector<std::vector<int>> adj;     // sorted neighbor lists
  std::vector<int> labels;               // class id per node, -1 when absent
  std::vector<std::string> node_ids;     // external ids (empty for synthetic graphs)
  std::vector<std::string> class_names;  // class id -> name

  int num_nodes() const { return static_cast<int>(adj.size()); }
  int num_features() const { return static_cast<int>(x.cols()); }
  std::size_t num_edges() const;  // undirected edge count
  int degree(int i) const { return static_cast<int>(adj[static_cast<std::size_t>(i)].size()); }
  bool is_isolated(int i) const { return degree(i) == 0; }
  bool has_edge(int u, int v) const;
  void add_edge(int u, int v);     // no-op for duplicates and self-loops
  void remove_edge(int u, int v);  // no-op when absent
  bool has_labels() const;

  // Throws std::logic_error if adjacency is not sorted/symmetric/self-loop-free
  // or sizes disagree with x.
  void check_consistent() const;
};

// Counters for input rows that had to be repaired or dropped while loading.
struct LoadStats {
  std::size_t duplicate_edges = 0;
  std::size_t self_loops = 0;
  std::size_t unknown_endpoints = 0;
  std::vector<std::string> warnings;
};

// Numeric TSV, one row per node. Edge list: one "u v" pair of 0-based node
// indices per line; pairs are symmetrized and deduplicated, self-loops and
// out-of-range endpoints are dropped with a warning. Optional labels file has
// one class name per node line.
Graph load_edge_list(const std::string& features_path, const std::string& edges_path,
                     LoadStats* stats = nullptr, const std::string& labels_path = "");

// Citation-network format: content rows "id <d binary features> class_name",
// cites rows "id id". Node order follows the content file; unknown ids in the
// cites file are dropped with a warning.
Graph load_cora(const std::string& content_path, const std::string& cites_path,
                LoadStats* stats = nullptr);

// In-place row normalization; zero rows are left untouched.
void normalize_features(Graph& g, NormalizationMode mode);

// TSV with 17 significant digits (round-trips doubles exactly).
void write_features_tsv(const std::string& path, const Eigen::MatrixXd& x);
void write_edge_list(const std::string& path, const Graph& g);  // "u v", u < v
void write_labels_tsv(const std::string& path, const std::vector<int>& labels);

// Hop distance from source to every node; -1 where unreachable.
std::vector<int> bfs_hops(const Graph& g, int source);

}  // namespace hgad
