#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "hgad/autodiff.hpp"
#include "hgad/graph.hpp"
#include "hgad/manifold.hpp"
#include "hgad/rng.hpp"

namespace hgad {

// ---- differentiable geometry maps -------------------------------------------
// Tape compositions matching the plain-matrix routines in manifold.hpp
// (same guards, same series switches), so values agree to the last ulp with
// the non-differentiable reference path.
namespace maps {

// exp_o: tangent rows (n x d) -> manifold rows. euclidean: identity;
// poincare: tanh(|v|) v/|v| (no ball projection -- callers project);
// lorentz: (cosh|v|, sinh(|v|)/|v| * v), ambient n x (d+1).
ad::Var exp_origin(ad::Tape& t, Geometry geo, ad::Var v);

// log_o: manifold rows -> tangent rows (n x d); inverse of exp_origin.
ad::Var log_origin(ad::Tape& t, Geometry geo, ad::Var x);

// Batch re-centering, one geometry-appropriate step:
//   euclidean: subtract the column mean;
//   poincare:  recenter log_o coordinates, then project back into the ball;
//   lorentz:   transport each log_mu(x) to the origin (mu = batch centroid).
ad::Var centralize(ad::Tape& t, Geometry geo, ad::Var x);

// Mobius scalar-projective matrix action on ball rows: |Wx|/|x| -scaled
// tanh-atanh radial remap of W x^T rows; zero rows map to zero exactly.
ad::Var mobius_matvec_rows(ad::Tape& t, ad::Var x, ad::Var w);

// Mobius addition x (+) u broadcasting a single ball row u (1 x d) over the
// rows of x.
ad::Var mobius_add_row(ad::Tape& t, ad::Var x, ad::Var u);

}  // namespace maps

// ---- model -------------------------------------------------------------------

// One transform block. Which fields are live depends on the geometry:
//   euclidean/poincare: w (out x in), b (1 x out)
//   lorentz:            w (out x (in+1)), b (1 x out), gate weight v
//                       (1 x (in+1)), gate bias bprime, and log_lambda --
//                       the gate range scale stored as a log so the
//                       effective lambda = exp(log_lambda) stays positive.
struct LayerParams {
  Eigen::MatrixXd w;
  Eigen::RowVectorXd b;
  Eigen::RowVectorXd v;
  double bprime = 0.0;
  double log_lambda = 0.0;
};

struct ModelConfig {
  Geometry geometry = Geometry::poincare;
  int in_dim = 0;        // raw feature dimension n_x
  int hidden_dim = 32;   // width of every internal layer
  bool message_passing = false;
  double dropout = 0.1;  // encoder-only, inverted, applied in tangent coords
};

// Reconstruction autoencoder with a fixed five-block topology:
//   enc1: n_x -> hidden      encoder
//   enc2: hidden -> hidden   encoder (output = latent)
//   sdec: hidden -> hidden   structural head (embedding H for edge recon)
//   cdec1/cdec2: hidden -> hidden -> n_x  attribute head (reconstruction)
// Every block is transform + centralize; encoder blocks optionally premix
// features over edges first and apply dropout last (training only).
struct Model {
  ModelConfig config;
  LayerParams enc1, enc2, sdec, cdec1, cdec2;

  // Weights uniform in +-1/sqrt(fan_in) (fan_in = columns of w), biases and
  // gate parameters zero (lambda = 1). Draw order: blocks as listed by
  // blocks(), within a block w row-major then (lorentz) v.
  static Model init(const ModelConfig& config, Rng& rng);

  std::array<LayerParams*, 5> blocks();
  std::array<const LayerParams*, 5> blocks() const;
  static const char* block_name(int i);  // "enc1", "enc2", "sdec", "cdec1", "cdec2"
};

// Symmetric normalized premix operator D^-1/2 (A + I) D^-1/2 with D the
// degree-plus-one diagonal. The subset overload builds the operator of the
// induced subgraph on `nodes` (rows/cols follow the order of `nodes`).
ad::SparseMatrix premix_matrix(const Graph& g);
ad::SparseMatrix premix_matrix(const Graph& g, const std::vector<int>& nodes);

// Tape handles for one block / for the whole model (insertion order = blocks()
// order; within a block w, b, then lorentz v, bprime, log_lambda).
struct LayerVars {
  ad::Var w, b, v, bprime, log_lambda;
};
struct ModelVars {
  LayerVars enc1, enc2, sdec, cdec1, cdec2;
  std::array<LayerVars*, 5> blocks() { return {&enc1, &enc2, &sdec, &cdec1, &cdec2}; }
};
ModelVars insert_params(ad::Tape& t, const Model& m);

struct ForwardOptions {
  bool training = false;  // enables dropout (requires rng)
  bool need_xhat = true;  // skip the attribute head entirely when false
  const ad::SparseMatrix* premix = nullptr;  // required iff message_passing
  Rng* rng = nullptr;
};

struct ForwardTrace {
  // Input embedded on the manifold, exp_o(features); the target the
  // attribute head is trained to reconstruct. Shared so downstream loss
  // closures can keep it alive past this scope.
  std::shared_ptr<const Eigen::MatrixXd> x0;
  ad::Var latent;  // encoder output, n x point_dim(hidden)
  ad::Var hs;      // structural embedding H, n x point_dim(hidden)
  ad::Var xhat;    // attribute reconstruction, n x point_dim(n_x); invalid
                   // when need_xhat = false
};

// Runs the five blocks over `features` (n x in_dim raw rows). Throws
// std::runtime_error naming the block when an activation goes non-finite and
// std::invalid_argument on option misuse (missing premix / rng).
//
// Dropout draw order: one uniform per tangent entry, row-major, blocks in
// enc1, enc2 order; an entry is dropped when the draw is < dropout rate.
ForwardTrace forward(ad::Tape& t, const Model& m, const ModelVars& vars,
                     const Eigen::MatrixXd& features, const ForwardOptions& opt);

// Closed-form reconstruction errors of two degenerate linear autoencoders on
// the idealized two-cluster instance (n_normal identical unit features,
// n_v - n_normal identical orthogonal unit features, n_normal > n_v / 2):
//   [0] rank-1 bottleneck AE, normal rows      -> 0
//   [1] rank-1 bottleneck AE, outlier rows     -> 1
//   [2] oversmoothed mean AE, normal rows      -> sqrt(2) (1 - n_normal/n_v)
//   [3] oversmoothed mean AE, outlier rows     -> sqrt(2) n_normal/n_v
// Throws std::invalid_argument outside the domain n_v/2 < n_normal <= n_v.
std::array<double, 4> lemma1_oracle(int n_normal, int n_v);

// ---- checkpoints ---------------------------------------------------------------
// Layout: uint32 little-endian header length, JSON header (geometry, dims,
// flags, block shapes), then all parameters as little-endian doubles in
// blocks() order (w row-major, b, then lorentz v, bprime, log_lambda).
void save_checkpoint(const std::string& path, const Model& m);
Model load_checkpoint(const std::string& path);

}  // namespace hgad
