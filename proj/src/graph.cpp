#include "hgad/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace hgad {

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& msg) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

void note(LoadStats* stats, std::size_t LoadStats::*counter, const std::string& warning) {
  if (!stats) return;
  ++(stats->*counter);
  if (stats->warnings.size() < 50) stats->warnings.push_back(warning);
}

}  // namespace

NormalizationMode normalization_from_string(const std::string& s) {
  if (s == "none") return NormalizationMode::none;
  if (s == "l1") return NormalizationMode::l1_row;
  if (s == "l2") return NormalizationMode::l2_row;
  throw std::invalid_argument("unknown normalization mode: " + s);
}

std::string to_string(NormalizationMode m) {
  switch (m) {
    case NormalizationMode::none: return "none";
    case NormalizationMode::l1_row: return "l1";
    case NormalizationMode::l2_row: return "l2";
  }
  return "?";
}

std::size_t Graph::num_edges() const {
  std::size_t twice = 0;
  for (const auto& nbrs : adj) twice += nbrs.size();
  return twice / 2;
}

bool Graph::has_edge(int u, int v) const {
  const auto& nbrs = adj[static_cast<std::size_t>(u)];
  return std::binary_search(nbrs.begin(), nbrs.end(), v);
}

void Graph::add_edge(int u, int v) {
  if (u == v) return;
  auto insert_sorted = [this](int a, int b) {
    auto& nbrs = adj[static_cast<std::size_t>(a)];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b);
    if (it == nbrs.end() || *it != b) nbrs.insert(it, b);
  };
  insert_sorted(u, v);
  insert_sorted(v, u);
}

void Graph::remove_edge(int u, int v) {
  auto erase_sorted = [this](int a, int b) {
    auto& nbrs = adj[static_cast<std::size_t>(a)];
    auto it = std::lower_bound(nbrs.begin(), nbrs.end(), b);
    if (it != nbrs.end() && *it == b) nbrs.erase(it);
  };
  erase_sorted(u, v);
  erase_sorted(v, u);
}

bool Graph::has_labels() const {
  return !labels.empty() &&
         std::any_of(labels.begin(), labels.end(), [](int l) { return l >= 0; });
}

void Graph::check_consistent() const {
  const int n = num_nodes();
  if (x.rows() != n) throw std::logic_error("graph: feature rows != node count");
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw std::logic_error("graph: label count != node count");
  for (int u = 0; u < n; ++u) {
    const auto& nbrs = adj[static_cast<std::size_t>(u)];
    if (!std::is_sorted(nbrs.begin(), nbrs.end()) ||
        std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end())
      throw std::logic_error("graph: neighbor list not sorted/unique at node " + std::to_string(u));
    for (int v : nbrs) {
      if (v < 0 || v >= n) throw std::logic_error("graph: neighbor out of range");
      if (v == u) throw std::logic_error("graph: stored self-loop at node " + std::to_string(u));
      if (!has_edge(v, u)) throw std::logic_error("graph: asymmetric edge " + std::to_string(u) +
                                                  "-" + std::to_string(v));
    }
  }
}

Graph load_edge_list(const std::string& features_path, const std::string& edges_path,
                     LoadStats* stats, const std::string& labels_path) {
  std::ifstream fin(features_path);
  if (!fin) throw std::runtime_error("cannot open features file: " + features_path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(fin, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        parse_fail(features_path, lineno, "not a number: '" + tok + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      parse_fail(features_path, lineno, "inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(features_path + ": no feature rows");

  Graph g;
  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size());
  g.x.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) g.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  g.adj.assign(static_cast<std::size_t>(n), {});

  std::ifstream ein(edges_path);
  if (!ein) throw std::runtime_error("cannot open edges file: " + edges_path);
  lineno = 0;
  while (std::getline(ein, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) parse_fail(edges_path, lineno, "expected 'u v'");
    long u = 0, v = 0;
    try {
      u = std::stol(toks[0]);
      v = std::stol(toks[1]);
    } catch (const std::exception&) {
      parse_fail(edges_path, lineno, "endpoints must be integers");
    }
    if (u < 0 || u >= n || v < 0 || v >= n) {
      note(stats, &LoadStats::unknown_endpoints,
           edges_path + ":" + std::to_string(lineno) + ": endpoint out of range, edge dropped");
      continue;
    }
    if (u == v) {
      note(stats, &LoadStats::self_loops,
           edges_path + ":" + std::to_string(lineno) + ": self-loop dropped");
      continue;
    }
    if (g.has_edge(static_cast<int>(u), static_cast<int>(v)))
      note(stats, &LoadStats::duplicate_edges,
           edges_path + ":" + std::to_string(lineno) + ": duplicate edge");
    g.add_edge(static_cast<int>(u), static_cast<int>(v));
  }

  if (!labels_path.empty()) {
    std::ifstream lin(labels_path);
    if (!lin) throw std::runtime_error("cannot open labels file: " + labels_path);
    std::unordered_map<std::string, int> class_ids;
    lineno = 0;
    while (std::getline(lin, line)) {
      ++lineno;
      if (static_cast<int>(lineno) > n) parse_fail(labels_path, lineno, "more labels than nodes");
      auto toks = split_ws(line);
      if (toks.empty()) parse_fail(labels_path, lineno, "empty label");
      auto [it, inserted] = class_ids.emplace(toks[0], static_cast<int>(g.class_names.size()));
      if (inserted) g.class_names.push_back(toks[0]);
      g.labels.push_back(it->second);
    }
    if (static_cast<int>(g.labels.size()) != n)
      throw std::runtime_error(labels_path + ": fewer labels than nodes");
  }
  return g;
}

Graph load_cora(const std::string& content_path, const std::string& cites_path, LoadStats* stats) {
  std::ifstream cin_(content_path);
  if (!cin_) throw std::runtime_error("cannot open content file: " + content_path);

  Graph g;
  std::unordered_map<std::string, int> index_of;
  std::unordered_map<std::string, int> class_ids;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(cin_, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() < 3) parse_fail(content_path, lineno, "expected 'id features... class'");
    const std::string& id = toks.front();
    if (!index_of.emplace(id, static_cast<int>(rows.size())).second)
      parse_fail(content_path, lineno, "duplicate node id '" + id + "'");
    std::vector<double> row;
    row.reserve(toks.size() - 2);
    for (std::size_t j = 1; j + 1 < toks.size(); ++j) {
      try {
        row.push_back(std::stod(toks[j]));
      } catch (const std::exception&) {
        parse_fail(content_path, lineno, "not a number: '" + toks[j] + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      parse_fail(content_path, lineno, "inconsistent feature count");
    auto [it, inserted] = class_ids.emplace(toks.back(), static_cast<int>(g.class_names.size()));
    if (inserted) g.class_names.push_back(toks.back());
    g.labels.push_back(it->second);
    g.node_ids.push_back(id);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(content_path + ": no content rows");

  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size());
  g.x.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) g.x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  g.adj.assign(static_cast<std::size_t>(n), {});

  std::ifstream ein(cites_path);
  if (!ein) throw std::runtime_error("cannot open cites file: " + cites_path);
  lineno = 0;
  while (std::getline(ein, line)) {
    ++lineno;
    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    if (toks.size() != 2) parse_fail(cites_path, lineno, "expected 'id id'");
    const auto a = index_of.find(toks[0]);
    const auto b = index_of.find(toks[1]);
    if (a == index_of.end() || b == index_of.end()) {
      note(stats, &LoadStats::unknown_endpoints,
           cites_path + ":" + std::to_string(lineno) + ": unknown node id, edge dropped");
      continue;
    }
    if (a->second == b->second) {
      note(stats, &LoadStats::self_loops,
           cites_path + ":" + std::to_string(lineno) + ": self-citation dropped");
      continue;
    }
    if (g.has_edge(a->second, b->second))
      note(stats, &LoadStats::duplicate_edges,
           cites_path + ":" + std::to_string(lineno) + ": duplicate citation");
    g.add_edge(a->second, b->second);
  }
  return g;
}

void normalize_features(Graph& g, NormalizationMode mode) {
  if (mode == NormalizationMode::none) return;
  for (Eigen::Index i = 0; i < g.x.rows(); ++i) {
    const double nrm = mode == NormalizationMode::l1_row ? g.x.row(i).lpNorm<1>()
                                                         : g.x.row(i).norm();
    if (nrm > 0.0) g.x.row(i) /= nrm;
  }
}

void write_features_tsv(const std::string& path, const Eigen::MatrixXd& x) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x(i, j));
      if (j) out << '\t';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_edge_list(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int u = 0; u < g.num_nodes(); ++u)
    for (int v : g.adj[static_cast<std::size_t>(u)])
      if (u < v) out << u << ' ' << v << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_labels_tsv(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  for (int l : labels) out << l << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<int> bfs_hops(const Graph& g, int source) {
  std::vector<int> hops(static_cast<std::size_t>(g.num_nodes()), -1);
  std::queue<int> q;
  hops[static_cast<std::size_t>(source)] = 0;
  q.push(source);
  while (!q.empty()) {
    const int u = q.front();
    q.pop();
    for (int v : g.adj[static_cast<std::size_t>(u)]) {
      if (hops[static_cast<std::size_t>(v)] < 0) {
        hops[static_cast<std::size_t>(v)] = hops[static_cast<std::size_t>(u)] + 1;
        q.push(v);
      }
    }
  }
  return hops;
}

}  // namespace hgad
