#include "hgad/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hgad {

namespace {

void check_sizes(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw std::invalid_argument("metrics: scores and labels differ in length");
  if (scores.size() == 0) throw std::invalid_argument("metrics: empty input");
  if (!scores.allFinite()) throw std::invalid_argument("metrics: non-finite score");
}

}  // namespace

double roc_auc(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
  check_sizes(scores, labels);
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores(static_cast<Eigen::Index>(a)) <
                                                        scores(static_cast<Eigen::Index>(b)); });
  double pos = 0, neg = 0, rank_sum_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores(static_cast<Eigen::Index>(order[j])) ==
                        scores(static_cast<Eigen::Index>(order[i])))
      ++j;
    // ascending 1-based ranks i+1..j averaged across the tie group
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        pos += 1;
        rank_sum_pos += avg_rank;
      } else {
        neg += 1;
      }
    }
    i = j;
  }
  if (pos == 0 || neg == 0)
    throw std::invalid_argument("roc_auc: both classes must be present");
  return (rank_sum_pos - pos * (pos + 1) / 2.0) / (pos * neg);
}

double average_precision(const Eigen::VectorXd& scores, const std::vector<int>& labels) {
  check_sizes(scores, labels);
  const std::size_t n = labels.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores(static_cast<Eigen::Index>(a)) >
                                                        scores(static_cast<Eigen::Index>(b)); });
  const double total_pos =
      static_cast<double>(std::count(labels.begin(), labels.end(), 1));
  if (total_pos == 0) throw std::invalid_argument("average_precision: no positive labels");

  double tp = 0, fp = 0, ap = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    double tp_group = 0, fp_group = 0;
    while (j < n && scores(static_cast<Eigen::Index>(order[j])) ==
                        scores(static_cast<Eigen::Index>(order[i]))) {
      if (labels[order[j]] == 1)
        tp_group += 1;
      else
        fp_group += 1;
      ++j;
    }
    tp += tp_group;
    fp += fp_group;
    if (tp_group > 0) ap += (tp_group / total_pos) * (tp / (tp + fp));
    i = j;
  }
  return ap;
}

Aggregate aggregate(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("aggregate: empty input");
  Aggregate a;
  a.mean = std::accumulate(values.begin(), values.end(), 0.0) /
           static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return a;
}

Eigen::VectorXd norm_baseline_scores(const Graph& g, double alpha) {
  const int n = g.num_nodes();
  Eigen::VectorXd s(n);
  for (int i = 0; i < n; ++i)
    s(i) = alpha * g.x.row(i).norm() + (1.0 - alpha) * (g.degree(i) + 1.0);
  return s;
}

}  // namespace hgad
