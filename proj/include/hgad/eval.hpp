#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hgad/graph.hpp"

namespace hgad {

// Area under the ROC curve, computed in O(n log n) by rank-summing with
// averaged ranks for tied scores (ties count half). Throws
// std::invalid_argument unless both classes are present.
double roc_auc(const Eigen::VectorXd& scores, const std::vector<int>& labels);

// Average precision with step interpolation; tied scores are grouped into a
// single threshold. Throws std::invalid_argument when no positives exist.
double average_precision(const Eigen::VectorXd& scores, const std::vector<int>& labels);

struct Aggregate {
  double mean = 0.0;
  double std = 0.0;  // sample std (n-1); 0 for a single value
};

Aggregate aggregate(const std::vector<double>& values);

// Geometry-agnostic detector: alpha * ||x_i||_2 + (1-alpha) * (deg(i) + 1).
// The degree term is the l1 norm of the i-th adjacency row with the logical
// self-loop included.
Eigen::VectorXd norm_baseline_scores(const Graph& g, double alpha);

}  // namespace hgad
