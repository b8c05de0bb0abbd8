#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hgad/autodiff.hpp"
#include "hgad/graph.hpp"
#include "hgad/network.hpp"
#include "hgad/rng.hpp"

namespace hgad {

struct TrainConfig {
  double alpha = 0.0;           // score/loss mix: alpha*contextual + (1-alpha)*structural
  double fermi_r = 0.0;         // edge-probability radius
  double fermi_t = 1.0;         // edge-probability temperature
  double lr = 0.005;
  double weight_decay = 0.001;  // decoupled, applied to the w matrices only
  int epochs = 300;
  int batch_size = 0;           // 0 = full batch; otherwise per-epoch random partition
};

// Edge probability of the distance decoder: for embedding distance d,
// eta = (d^2 - r)/t and the result is (p_edge, p_nonedge) =
// (sigmoid(-eta), sigmoid(eta)); the two always sum to 1.
std::pair<double, double> fermi_dirac_prob(double d, double r, double t);

// Dense {0,1} adjacency-plus-self-loops mask (ones on the diagonal), over all
// nodes or the induced subset (rows/cols follow the order of `nodes`).
Eigen::MatrixXd connectivity_mask(const Graph& g);
Eigen::MatrixXd connectivity_mask(const Graph& g, const std::vector<int>& nodes);

// ---- per-node losses -----------------------------------------------------------
// Tape builders return an n x 1 column; batch means are taken by the caller.
// Pointer/shared_ptr arguments must stay alive until after Tape::backward.

// Balanced cross-entropy of the distance decoder over each mask row: the mean
// softplus(eta) over linked pairs plus the mean softplus(-eta) over unlinked
// pairs (self treated as linked at distance zero; an empty class adds zero).
ad::Var structural_loss_rows(ad::Tape& t, Geometry geo, ad::Var hs,
                             const Eigen::MatrixXd* conn_mask, const TrainConfig& cfg);

// Geometry distance between each reconstructed row and its embedded input.
ad::Var contextual_loss_rows(ad::Tape& t, Geometry geo,
                             const std::shared_ptr<const Eigen::MatrixXd>& x0, ad::Var xhat);

// Reference paths computed pairwise with scalar code; they pin the vectorized
// kernels in tests and back the verification suites.
Eigen::VectorXd structural_loss_rows_reference(Geometry geo, const Eigen::MatrixXd& hs,
                                               const Eigen::MatrixXd& conn_mask, double r,
                                               double t);
Eigen::VectorXd contextual_loss_rows_reference(Geometry geo, const Eigen::MatrixXd& x0,
                                               const Eigen::MatrixXd& xhat);

// ---- optimizer -----------------------------------------------------------------

// One flat span of parameters. When `manifold` names a curved geometry the
// block is a rows x cols column-major matrix whose rows are manifold points:
// gradients are rescaled by the inverse metric, moment-averaged in
// coordinates, and applied by exponential-map retraction. Plain blocks take
// the usual AdamW step (decoupled decay when `decay` is set).
struct AdamBlock {
  double* data = nullptr;
  Eigen::Index size = 0;
  bool decay = false;
  std::optional<Geometry> manifold;
  Eigen::Index rows = 0, cols = 0;
};

class Adam {
 public:
  struct Config {
    double lr = 0.005;
    double weight_decay = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam(std::vector<AdamBlock> blocks, Config cfg);

  // grads[i] is the flat gradient of block i in the block's storage order.
  void step(const std::vector<Eigen::VectorXd>& grads);

 private:
  std::vector<AdamBlock> blocks_;
  Config cfg_;
  std::vector<Eigen::VectorXd> m_, v_;
  long t_ = 0;
};

// Adam blocks of a model in checkpoint order (per block: w with decay, b,
// then lorentz v, bprime, log_lambda); all blocks are plain parameters.
std::vector<AdamBlock> adam_blocks(Model& m);

// ---- training --------------------------------------------------------------------

struct EpochStats {
  double loss = 0.0;  // alpha*lc + (1-alpha)*ls, node-weighted over batches
  double lc = 0.0;
  double ls = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> curve;  // one entry per epoch that started
  bool aborted = false;           // non-finite loss/gradient; model rolled back
  std::string abort_reason;       // empty unless aborted
};

// Trains a fresh model on g. Draw order from `seed`: parameter init, then per
// epoch the batch shuffle (when batch_size > 0) followed by dropout masks in
// forward order. Both loss terms are evaluated every epoch for the curve;
// only the terms with nonzero weight participate in the gradient. A
// non-finite loss or gradient stops training and rolls the parameters back to
// the end of the last fully finite epoch.
TrainResult train(const Graph& g, const ModelConfig& mcfg, const TrainConfig& tcfg,
                  std::uint64_t seed);

// Per-node outlier scores alpha*lc_i + (1-alpha)*ls_i of a trained model
// (dropout off, full batch).
std::vector<double> score_nodes(const Graph& g, const Model& m, const TrainConfig& cfg);

// ---- diagnostics -------------------------------------------------------------------

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst;  // "enc1 w[3]"-style location of the worst parameter
  bool pass(double tol) const { return max_rel_err <= tol; }
};

// Central finite differences (h = 1e-5 max(1,|theta|)) of the training loss
// against the tape gradient, every parameter, dropout off. Relative error
// uses max(1e-3, |fd|, |analytic|) as the denominator.
GradCheckReport grad_check(const Graph& g, const ModelConfig& mcfg, const TrainConfig& tcfg,
                           std::uint64_t seed);

// (distance, is_edge) samples of structural-embedding pair distances from a
// trained model: `per_class` uniform edges (with replacement) and `per_class`
// uniform non-adjacent pairs (rejection sampled).
std::vector<std::pair<double, int>> edge_distance_samples(const Graph& g, const Model& m,
                                                          int per_class, Rng& rng);

// ---- baseline detectors --------------------------------------------------------------
// Plain euclidean autoencoder (in -> hidden -> hidden -> hidden -> in, relu
// between layers, linear output) trained full-batch with Adam on the mean
// per-node mse; the score is each node's final mse. The gcnae variant premixes
// every layer with the symmetric normalized operator of g; on an edgeless
// graph that operator is the identity and the two detectors coincide exactly.
std::vector<double> mlpae_baseline_scores(const Graph& g, int hidden, int epochs,
                                          std::uint64_t seed);
std::vector<double> gcnae_baseline_scores(const Graph& g, int hidden, int epochs,
                                          std::uint64_t seed);

}  // namespace hgad
