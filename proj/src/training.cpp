#include "hgad/training.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "hgad/mathfn.hpp"

namespace hgad {

using ad::Matrix;
using ad::Tape;
using ad::Var;

std::pair<double, double> fermi_dirac_prob(double d, double r, double t) {
  if (t <= 0.0) throw std::invalid_argument("fermi_dirac_prob: t must be positive");
  const double eta = (d * d - r) / t;
  return {sigmoid(-eta), sigmoid(eta)};
}

Eigen::MatrixXd connectivity_mask(const Graph& g) {
  const int n = g.num_nodes();
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (int j : g.adj[static_cast<std::size_t>(i)]) m(i, j) = 1.0;
  }
  return m;
}

Eigen::MatrixXd connectivity_mask(const Graph& g, const std::vector<int>& nodes) {
  const int n = static_cast<int>(nodes.size());
  std::vector<int> local(static_cast<std::size_t>(g.num_nodes()), -1);
  for (int i = 0; i < n; ++i) {
    const int u = nodes[static_cast<std::size_t>(i)];
    if (u < 0 || u >= g.num_nodes())
      throw std::invalid_argument("connectivity_mask: node out of range");
    local[static_cast<std::size_t>(u)] = i;
  }
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = 1.0;
    for (int v : g.adj[static_cast<std::size_t>(nodes[static_cast<std::size_t>(i)])]) {
      const int j = local[static_cast<std::size_t>(v)];
      if (j != -1) m(i, j) = 1.0;
    }
  }
  return m;
}

Var structural_loss_rows(Tape& t, Geometry geo, Var hs, const Eigen::MatrixXd* conn_mask,
                         const TrainConfig& cfg) {
  if (cfg.fermi_t <= 0.0) throw std::invalid_argument("structural_loss_rows: fermi_t must be positive");
  return t.structural_row_loss(t.pairwise_sqdist(geo, hs), conn_mask, cfg.fermi_r, cfg.fermi_t);
}

Var contextual_loss_rows(Tape& t, Geometry geo,
                         const std::shared_ptr<const Eigen::MatrixXd>& x0, Var xhat) {
  if (!x0) throw std::invalid_argument("contextual_loss_rows: null target");
  return t.rowwise_dist_to_rows(geo, x0.get(), xhat);
}

Eigen::VectorXd structural_loss_rows_reference(Geometry geo, const Eigen::MatrixXd& hs,
                                               const Eigen::MatrixXd& conn_mask, double r,
                                               double t) {
  const Eigen::Index n = hs.rows();
  if (conn_mask.rows() != n || conn_mask.cols() != n)
    throw std::invalid_argument("structural_loss_rows_reference: mask shape mismatch");
  if (t <= 0.0) throw std::invalid_argument("structural_loss_rows_reference: t must be positive");
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double conn_sum = 0.0, disc_sum = 0.0;
    long conn_cnt = 0, disc_cnt = 0;
    const Vec hi = hs.row(i);
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = i == j ? 0.0 : dist(geo, hi, Vec(hs.row(j)));
      const double eta = (d * d - r) / t;
      if (conn_mask(i, j) > 0.5) {
        conn_sum += softplus(eta);
        ++conn_cnt;
      } else {
        disc_sum += softplus(-eta);
        ++disc_cnt;
      }
    }
    out(i) = (conn_cnt ? conn_sum / static_cast<double>(conn_cnt) : 0.0) +
             (disc_cnt ? disc_sum / static_cast<double>(disc_cnt) : 0.0);
  }
  return out;
}

Eigen::VectorXd contextual_loss_rows_reference(Geometry geo, const Eigen::MatrixXd& x0,
                                               const Eigen::MatrixXd& xhat) {
  if (x0.rows() != xhat.rows() || x0.cols() != xhat.cols())
    throw std::invalid_argument("contextual_loss_rows_reference: shape mismatch");
  Eigen::VectorXd out(x0.rows());
  for (Eigen::Index i = 0; i < x0.rows(); ++i)
    out(i) = dist(geo, Vec(x0.row(i)), Vec(xhat.row(i)));
  return out;
}

// ---- optimizer --------------------------------------------------------------

Adam::Adam(std::vector<AdamBlock> blocks, Config cfg) : blocks_(std::move(blocks)), cfg_(cfg) {
  m_.reserve(blocks_.size());
  v_.reserve(blocks_.size());
  for (const AdamBlock& b : blocks_) {
    if (b.data == nullptr || b.size <= 0) throw std::invalid_argument("Adam: empty block");
    if (b.manifold && b.rows * b.cols != b.size)
      throw std::invalid_argument("Adam: manifold block needs rows*cols == size");
    m_.push_back(Eigen::VectorXd::Zero(b.size));
    v_.push_back(Eigen::VectorXd::Zero(b.size));
  }
}

void Adam::step(const std::vector<Eigen::VectorXd>& grads) {
  if (grads.size() != blocks_.size()) throw std::invalid_argument("Adam::step: gradient count mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    AdamBlock& b = blocks_[i];
    if (grads[i].size() != b.size) throw std::invalid_argument("Adam::step: gradient size mismatch");
    Eigen::VectorXd grad = grads[i];
    const bool curved = b.manifold && *b.manifold != Geometry::euclidean;
    if (curved) {
      // metric-inverse rescale per point row (and tangent projection on the
      // hyperboloid), so the moments average Riemannian gradients
      Eigen::Map<Matrix> pts(b.data, b.rows, b.cols);
      Eigen::Map<Matrix> gm(grad.data(), b.rows, b.cols);
      for (Eigen::Index r = 0; r < b.rows; ++r) {
        if (*b.manifold == Geometry::lorentz) {
          Vec x = pts.row(r), gr = gm.row(r);
          gr(0) = -gr(0);
          gr += minkowski_inner(x, gr) * x;
          gm.row(r) = gr;
        } else {
          const double c = 1.0 - pts.row(r).squaredNorm();
          gm.row(r) *= c * c / 4.0;
        }
      }
    }
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    Eigen::VectorXd denom = (v_[i] / bc2).cwiseSqrt();
    denom.array() += cfg_.eps;
    Eigen::VectorXd delta = cfg_.lr * (m_[i] / bc1).cwiseQuotient(denom);
    if (curved) {
      Eigen::Map<Matrix> pts(b.data, b.rows, b.cols);
      Eigen::Map<Matrix> dm(delta.data(), b.rows, b.cols);
      for (Eigen::Index r = 0; r < b.rows; ++r) {
        const Vec x = pts.row(r);
        Vec u = -dm.row(r);
        if (*b.manifold == Geometry::lorentz) u += minkowski_inner(x, u) * x;
        pts.row(r) = exp_map(*b.manifold, x, u);
      }
    } else {
      Eigen::Map<Eigen::VectorXd> theta(b.data, b.size);
      if (b.decay && cfg_.weight_decay != 0.0) delta += (cfg_.lr * cfg_.weight_decay) * theta;
      theta -= delta;
    }
  }
}

std::vector<AdamBlock> adam_blocks(Model& m) {
  const bool lor = m.config.geometry == Geometry::lorentz;
  std::vector<AdamBlock> out;
  for (LayerParams* p : m.blocks()) {
    out.push_back({p->w.data(), p->w.size(), true, std::nullopt, p->w.rows(), p->w.cols()});
    out.push_back({p->b.data(), p->b.size(), false, std::nullopt, 1, p->b.size()});
    if (lor) {
      out.push_back({p->v.data(), p->v.size(), false, std::nullopt, 1, p->v.size()});
      out.push_back({&p->bprime, 1, false, std::nullopt, 1, 1});
      out.push_back({&p->log_lambda, 1, false, std::nullopt, 1, 1});
    }
  }
  return out;
}

// ---- training ------------------------------------------------------------------

namespace {

// Per-block parameter names in adam_blocks order.
std::string param_name(bool lorentz, std::size_t flat_index) {
  static const char* lor_parts[5] = {"w", "b", "v", "bprime", "log_lambda"};
  static const char* plain_parts[2] = {"w", "b"};
  const std::size_t parts = lorentz ? 5 : 2;
  const std::size_t block = flat_index / parts, part = flat_index % parts;
  return std::string(Model::block_name(static_cast<int>(block))) + " " +
         (lorentz ? lor_parts[part] : plain_parts[part]);
}

std::vector<Eigen::VectorXd> collect_grads(Tape& t, ModelVars& vars, bool lorentz) {
  std::vector<Eigen::VectorXd> out;
  const auto push = [&](Var v) {
    const Matrix g = t.grad(v);
    out.emplace_back(Eigen::Map<const Eigen::VectorXd>(g.data(), g.size()));
  };
  for (LayerVars* lv : vars.blocks()) {
    push(lv->w);
    push(lv->b);
    if (lorentz) {
      push(lv->v);
      push(lv->bprime);
      push(lv->log_lambda);
    }
  }
  return out;
}

void validate_train_config(const TrainConfig& cfg) {
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0)
    throw std::invalid_argument("train: alpha must be in [0, 1]");
  if (cfg.fermi_t <= 0.0) throw std::invalid_argument("train: fermi_t must be positive");
  if (cfg.lr < 0.0) throw std::invalid_argument("train: lr must be non-negative");
  if (cfg.epochs < 0) throw std::invalid_argument("train: epochs must be non-negative");
  if (cfg.batch_size < 0) throw std::invalid_argument("train: batch_size must be non-negative");
}

// Mixed loss node on the tape. For the pure cases the unused term is left out
// of the graph entirely (identical value, no wasted pullbacks).
Var mixed_total(Tape& t, double alpha, Var lc_mean, Var ls_mean) {
  if (alpha == 0.0) return ls_mean;
  if (alpha == 1.0) return lc_mean;
  return t.add(t.scale(lc_mean, alpha), t.scale(ls_mean, 1.0 - alpha));
}

}  // namespace

TrainResult train(const Graph& g, const ModelConfig& mcfg_in, const TrainConfig& tcfg,
                  std::uint64_t seed) {
  validate_train_config(tcfg);
  ModelConfig mcfg = mcfg_in;
  if (mcfg.in_dim == 0) mcfg.in_dim = g.num_features();
  if (mcfg.in_dim != g.num_features())
    throw std::invalid_argument("train: config in_dim disagrees with graph features");

  Rng rng(seed);
  TrainResult res;
  res.model = Model::init(mcfg, rng);
  const Geometry geo = mcfg.geometry;
  const bool lor = geo == Geometry::lorentz;
  const int n = g.num_nodes();
  if (n == 0 || tcfg.epochs == 0) return res;

  const Matrix full_mask = connectivity_mask(g);
  ad::SparseMatrix full_premix;
  if (mcfg.message_passing) full_premix = premix_matrix(g);

  Adam::Config acfg;
  acfg.lr = tcfg.lr;
  acfg.weight_decay = tcfg.weight_decay;
  Adam opt(adam_blocks(res.model), acfg);

  const bool minibatch = tcfg.batch_size > 0 && tcfg.batch_size < n;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);

  Model last_finite = res.model;
  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    last_finite = res.model;
    std::vector<std::pair<int, int>> spans;  // offset, count into order
    if (minibatch) {
      rng.shuffle(order);
      for (int at = 0; at < n; at += tcfg.batch_size)
        spans.emplace_back(at, std::min(tcfg.batch_size, n - at));
    } else {
      spans.emplace_back(0, n);
    }

    EpochStats stats;
    bool bad = false;
    std::string reason;
    for (const auto& [offset, count] : spans) {
      // batch views (full-batch uses the precomputed operators directly)
      std::vector<int> batch_nodes;
      Matrix batch_x_store, batch_mask_store;
      ad::SparseMatrix batch_premix_store;
      const Matrix* batch_x = &g.x;
      const Matrix* batch_mask = &full_mask;
      const ad::SparseMatrix* batch_premix = mcfg.message_passing ? &full_premix : nullptr;
      if (minibatch) {
        batch_nodes.assign(order.begin() + offset, order.begin() + offset + count);
        batch_x_store = g.x(batch_nodes, Eigen::all);
        batch_mask_store = full_mask(batch_nodes, batch_nodes);
        batch_x = &batch_x_store;
        batch_mask = &batch_mask_store;
        if (mcfg.message_passing) {
          batch_premix_store = premix_matrix(g, batch_nodes);
          batch_premix = &batch_premix_store;
        }
      }

      Tape tape;
      ModelVars vars = insert_params(tape, res.model);
      ForwardOptions fopt;
      fopt.training = true;
      fopt.need_xhat = true;  // the curve reports lc even when it carries no weight
      fopt.premix = batch_premix;
      fopt.rng = &rng;
      ForwardTrace trace;
      try {
        trace = forward(tape, res.model, vars, *batch_x, fopt);
      } catch (const std::runtime_error& e) {
        bad = true;
        reason = e.what();
        break;
      }
      const Var ls_mean =
          tape.colwise_mean(structural_loss_rows(tape, geo, trace.hs, batch_mask, tcfg));
      const Var lc_mean =
          tape.colwise_mean(contextual_loss_rows(tape, geo, trace.x0, trace.xhat));
      const double lsv = tape.value(ls_mean)(0, 0);
      const double lcv = tape.value(lc_mean)(0, 0);
      const double lossv = tcfg.alpha * lcv + (1.0 - tcfg.alpha) * lsv;
      const double w = static_cast<double>(count) / static_cast<double>(n);
      stats.ls += w * lsv;
      stats.lc += w * lcv;
      stats.loss += w * lossv;
      if (!std::isfinite(lsv) || !std::isfinite(lcv)) {
        bad = true;
        reason = "non-finite loss at epoch " + std::to_string(epoch);
        break;
      }

      tape.backward(mixed_total(tape, tcfg.alpha, lc_mean, ls_mean));
      const std::vector<Eigen::VectorXd> grads = collect_grads(tape, vars, lor);
      for (std::size_t k = 0; k < grads.size(); ++k) {
        if (!grads[k].allFinite()) {
          bad = true;
          reason = "non-finite gradient for " + param_name(lor, k) + " at epoch " +
                   std::to_string(epoch);
          break;
        }
      }
      if (bad) break;
      opt.step(grads);
    }

    res.curve.push_back(stats);
    if (bad) {
      res.aborted = true;
      res.abort_reason = reason;
      res.model = last_finite;
      break;
    }
  }
  return res;
}

std::vector<double> score_nodes(const Graph& g, const Model& m, const TrainConfig& cfg) {
  validate_train_config(cfg);
  const int n = g.num_nodes();
  if (n == 0) return {};
  if (m.config.in_dim != g.num_features())
    throw std::invalid_argument("score_nodes: model and graph feature dims disagree");
  const Geometry geo = m.config.geometry;

  Tape tape;
  ModelVars vars = insert_params(tape, m);
  ad::SparseMatrix premix;
  ForwardOptions opt;
  opt.training = false;
  opt.need_xhat = cfg.alpha > 0.0;
  if (m.config.message_passing) {
    premix = premix_matrix(g);
    opt.premix = &premix;
  }
  const ForwardTrace trace = forward(tape, m, vars, g.x, opt);

  Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
  Matrix mask;
  if (cfg.alpha < 1.0) {
    mask = connectivity_mask(g);
    const Var ls = structural_loss_rows(tape, geo, trace.hs, &mask, cfg);
    s += (1.0 - cfg.alpha) * tape.value(ls).col(0);
  }
  if (cfg.alpha > 0.0) {
    const Var lc = contextual_loss_rows(tape, geo, trace.x0, trace.xhat);
    s += cfg.alpha * tape.value(lc).col(0);
  }
  return std::vector<double>(s.data(), s.data() + n);
}

GradCheckReport grad_check(const Graph& g, const ModelConfig& mcfg_in, const TrainConfig& tcfg,
                           std::uint64_t seed) {
  validate_train_config(tcfg);
  ModelConfig mcfg = mcfg_in;
  if (mcfg.in_dim == 0) mcfg.in_dim = g.num_features();
  if (mcfg.in_dim != g.num_features())
    throw std::invalid_argument("grad_check: config in_dim disagrees with graph features");

  Rng rng(seed);
  Model model = Model::init(mcfg, rng);
  const Geometry geo = mcfg.geometry;
  const bool lor = geo == Geometry::lorentz;
  const Matrix mask = connectivity_mask(g);
  ad::SparseMatrix premix;
  const ad::SparseMatrix* premix_ptr = nullptr;
  if (mcfg.message_passing) {
    premix = premix_matrix(g);
    premix_ptr = &premix;
  }

  const auto loss_eval = [&](std::vector<Eigen::VectorXd>* grads) {
    Tape tape;
    ModelVars vars = insert_params(tape, model);
    ForwardOptions opt;
    opt.training = false;
    opt.need_xhat = tcfg.alpha > 0.0;
    opt.premix = premix_ptr;
    const ForwardTrace trace = forward(tape, model, vars, g.x, opt);
    Var lc_mean, ls_mean;
    if (tcfg.alpha < 1.0)
      ls_mean = tape.colwise_mean(structural_loss_rows(tape, geo, trace.hs, &mask, tcfg));
    if (tcfg.alpha > 0.0)
      lc_mean = tape.colwise_mean(contextual_loss_rows(tape, geo, trace.x0, trace.xhat));
    const Var total = mixed_total(tape, tcfg.alpha, lc_mean, ls_mean);
    const double value = tape.value(total)(0, 0);
    if (grads) {
      tape.backward(total);
      *grads = collect_grads(tape, vars, lor);
    }
    return value;
  };

  std::vector<Eigen::VectorXd> analytic;
  loss_eval(&analytic);

  GradCheckReport rep;
  const std::vector<AdamBlock> blocks = adam_blocks(model);
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    for (Eigen::Index k = 0; k < blocks[bi].size; ++k) {
      double& theta = blocks[bi].data[k];
      const double orig = theta;
      const double h = 1e-5 * std::max(1.0, std::abs(orig));
      theta = orig + h;
      const double fp = loss_eval(nullptr);
      theta = orig - h;
      const double fm = loss_eval(nullptr);
      theta = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double an = analytic[bi](k);
      const double err = std::abs(fd - an) / std::max({1e-3, std::abs(fd), std::abs(an)});
      if (err > rep.max_rel_err) {
        rep.max_rel_err = err;
        rep.worst = param_name(lor, bi) + "[" + std::to_string(k) + "]";
      }
    }
  }
  return rep;
}

std::vector<std::pair<double, int>> edge_distance_samples(const Graph& g, const Model& m,
                                                          int per_class, Rng& rng) {
  const int n = g.num_nodes();
  if (n < 2) throw std::invalid_argument("edge_distance_samples: need at least two nodes");
  if (per_class < 0) throw std::invalid_argument("edge_distance_samples: negative count");

  Tape tape;
  ModelVars vars = insert_params(tape, m);
  ad::SparseMatrix premix;
  ForwardOptions opt;
  opt.training = false;
  opt.need_xhat = false;
  if (m.config.message_passing) {
    premix = premix_matrix(g);
    opt.premix = &premix;
  }
  const Matrix hs = tape.value(forward(tape, m, vars, g.x, opt).hs);

  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v : g.adj[static_cast<std::size_t>(u)])
      if (v > u) edges.emplace_back(u, v);
  if (edges.empty() && per_class > 0)
    throw std::invalid_argument("edge_distance_samples: graph has no edges");

  const Geometry geo = m.config.geometry;
  std::vector<std::pair<double, int>> out;
  out.reserve(2 * static_cast<std::size_t>(per_class));
  for (int k = 0; k < per_class; ++k) {
    const auto& [u, v] = edges[static_cast<std::size_t>(rng.below(edges.size()))];
    out.emplace_back(dist(geo, Vec(hs.row(u)), Vec(hs.row(v))), 1);
  }
  for (int k = 0; k < per_class; ++k) {
    for (;;) {
      const int i = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
      if (i == j || g.has_edge(i, j)) continue;
      out.emplace_back(dist(geo, Vec(hs.row(i)), Vec(hs.row(j))), 0);
      break;
    }
  }
  return out;
}

// ---- baseline detectors ----------------------------------------------------------

namespace {

std::vector<double> euclid_ae_scores(const Graph& g, int hidden, int epochs, std::uint64_t seed,
                                     const ad::SparseMatrix* premix) {
  if (hidden <= 0) throw std::invalid_argument("baseline: hidden must be positive");
  if (epochs < 0) throw std::invalid_argument("baseline: epochs must be non-negative");
  const int n = g.num_nodes(), d = g.num_features();
  if (n == 0) return {};

  Rng rng(seed);
  const std::array<int, 5> dims = {d, hidden, hidden, hidden, d};
  std::array<Matrix, 4> w;
  std::array<Eigen::RowVectorXd, 4> b;
  for (int l = 0; l < 4; ++l) {
    const int in = dims[static_cast<std::size_t>(l)], out = dims[static_cast<std::size_t>(l) + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    w[static_cast<std::size_t>(l)].resize(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w[static_cast<std::size_t>(l)](i, j) = rng.uniform(-bound, bound);
    b[static_cast<std::size_t>(l)] = Eigen::RowVectorXd::Zero(out);
  }

  std::vector<AdamBlock> blocks;
  for (int l = 0; l < 4; ++l) {
    auto& wl = w[static_cast<std::size_t>(l)];
    auto& bl = b[static_cast<std::size_t>(l)];
    blocks.push_back({wl.data(), wl.size(), false, std::nullopt, wl.rows(), wl.cols()});
    blocks.push_back({bl.data(), bl.size(), false, std::nullopt, 1, bl.size()});
  }
  Adam::Config acfg;  // defaults: lr 0.005, no weight decay
  Adam opt(blocks, acfg);

  const auto run = [&](Tape& tape, std::vector<Var>* params) {
    std::array<Var, 4> wv, bv;
    for (int l = 0; l < 4; ++l) {
      wv[static_cast<std::size_t>(l)] = tape.input(w[static_cast<std::size_t>(l)]);
      bv[static_cast<std::size_t>(l)] = tape.input(b[static_cast<std::size_t>(l)]);
      if (params) {
        params->push_back(wv[static_cast<std::size_t>(l)]);
        params->push_back(bv[static_cast<std::size_t>(l)]);
      }
    }
    Var x = tape.constant(g.x);
    for (int l = 0; l < 4; ++l) {
      if (premix) x = tape.spmm(premix, x);
      x = tape.add_rowvec(tape.matmul_nt(x, wv[static_cast<std::size_t>(l)]),
                          bv[static_cast<std::size_t>(l)]);
      if (l < 3) x = tape.relu(x);
    }
    // per-node mse against the raw features
    return tape.scale(tape.rowwise_sqnorm(tape.sub(x, tape.constant(g.x))),
                      1.0 / static_cast<double>(d));
  };

  for (int epoch = 0; epoch < epochs; ++epoch) {
    Tape tape;
    std::vector<Var> params;
    const Var mse_rows = run(tape, &params);
    tape.backward(tape.colwise_mean(mse_rows));
    std::vector<Eigen::VectorXd> grads;
    grads.reserve(params.size());
    for (Var p : params) {
      const Matrix gm = tape.grad(p);
      grads.emplace_back(Eigen::Map<const Eigen::VectorXd>(gm.data(), gm.size()));
    }
    opt.step(grads);
  }

  Tape tape;
  const Var mse_rows = run(tape, nullptr);
  const Matrix& v = tape.value(mse_rows);
  return std::vector<double>(v.data(), v.data() + n);
}

}  // namespace

std::vector<double> mlpae_baseline_scores(const Graph& g, int hidden, int epochs,
                                          std::uint64_t seed) {
  return euclid_ae_scores(g, hidden, epochs, seed, nullptr);
}

std::vector<double> gcnae_baseline_scores(const Graph& g, int hidden, int epochs,
                                          std::uint64_t seed) {
  const ad::SparseMatrix premix = premix_matrix(g);
  return euclid_ae_scores(g, hidden, epochs, seed, &premix);
}

}  // namespace hgad
