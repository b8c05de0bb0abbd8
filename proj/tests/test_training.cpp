#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "hgad/autodiff.hpp"
#include "hgad/graph.hpp"
#include "hgad/injection.hpp"
#include "hgad/manifold.hpp"
#include "hgad/mathfn.hpp"
#include "hgad/network.hpp"
#include "hgad/rng.hpp"
#include "hgad/training.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using hgad::Geometry;
using hgad::Graph;
using hgad::Model;
using hgad::ModelConfig;
using hgad::Rng;
using hgad::TrainConfig;
using hgad::ad::Tape;

namespace {

Graph random_graph(int n, int d, double edge_prob, std::uint64_t seed) {
  Rng rng(seed);
  Graph g;
  g.x.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) g.x(i, j) = 0.5 * rng.normal();
  g.adj.assign(static_cast<std::size_t>(n), {});
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < edge_prob) g.add_edge(u, v);
  return g;
}

ModelConfig small_config(Geometry geo, int in_dim, bool mp = false) {
  ModelConfig mc;
  mc.geometry = geo;
  mc.in_dim = in_dim;
  mc.hidden_dim = 5;
  mc.message_passing = mp;
  mc.dropout = 0.1;
  return mc;
}

bool params_equal(const Model& a, const Model& b) {
  auto ba = a.blocks();
  auto bb = b.blocks();
  for (std::size_t i = 0; i < ba.size(); ++i) {
    if (ba[i]->w != bb[i]->w || ba[i]->b != bb[i]->b || ba[i]->v != bb[i]->v ||
        ba[i]->bprime != bb[i]->bprime || ba[i]->log_lambda != bb[i]->log_lambda)
      return false;
  }
  return true;
}

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("edge-probability decoder values") {
  // eta = (d^2 - r)/t; probabilities are the two sigmoids and sum to 1.
  auto [p_edge, p_non] = hgad::fermi_dirac_prob(1.0, 0.0, 1.0);
  CHECK(p_edge == doctest::Approx(hgad::sigmoid(-1.0)).epsilon(1e-15));
  CHECK(p_non == doctest::Approx(hgad::sigmoid(1.0)).epsilon(1e-15));
  CHECK(p_edge + p_non == doctest::Approx(1.0).epsilon(1e-15));

  auto [at_r, _] = hgad::fermi_dirac_prob(2.0, 4.0, 1.0);  // d^2 == r
  CHECK(at_r == doctest::Approx(0.5).epsilon(1e-15));

  auto [cold, __] = hgad::fermi_dirac_prob(3.0, 0.0, 0.1);  // sharp temperature
  CHECK(cold < 1e-30);
  CHECK(std::isfinite(cold));
  CHECK_THROWS_AS(hgad::fermi_dirac_prob(1.0, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("connectivity mask has unit diagonal and mirrors edges") {
  Graph g = random_graph(7, 2, 0.0, 1);
  g.add_edge(1, 4);
  g.add_edge(2, 3);
  const MatrixXd m = hgad::connectivity_mask(g);
  CHECK(m.diagonal() == VectorXd::Ones(7));
  CHECK(m(1, 4) == 1.0);
  CHECK(m(4, 1) == 1.0);
  CHECK(m(0, 1) == 0.0);
  CHECK(m.sum() == doctest::Approx(7 + 4));

  const MatrixXd sub = hgad::connectivity_mask(g, {4, 1, 0});
  CHECK(sub(0, 1) == 1.0);  // (4,1) edge survives in subset coordinates
  CHECK(sub(1, 0) == 1.0);
  CHECK(sub(2, 2) == 1.0);
  CHECK(sub(0, 2) == 0.0);
}

TEST_CASE("structural loss: worked three-node value") {
  // Embeddings at the origin twice (connected pair at distance 0) and one
  // disconnected point at distance 1. With r=0, t=1 every node's loss is
  // -log p(connected at 0) - log p(disconnected at 1)
  //   = log 2 + log(1 + e^-1) = 1.00640886807816814.
  Graph g;
  g.x = MatrixXd::Zero(3, 2);  // features unused here
  g.adj.assign(3, {});
  g.add_edge(0, 1);
  MatrixXd hs(3, 2);
  hs << 0, 0, 0, 0, 1, 0;

  const MatrixXd mask = hgad::connectivity_mask(g);
  const VectorXd ref =
      hgad::structural_loss_rows_reference(Geometry::euclidean, hs, mask, 0.0, 1.0);
  for (int i = 0; i < 3; ++i)
    CHECK(ref(i) == doctest::Approx(1.00640886807816814).epsilon(1e-14));

  Tape t;
  auto hv = t.input(hs);
  const auto lv = t.structural_row_loss(t.pairwise_sqdist(Geometry::euclidean, hv), &mask, 0.0, 1.0);
  for (int i = 0; i < 3; ++i)
    CHECK(t.value(lv)(i, 0) == doctest::Approx(1.00640886807816814).epsilon(1e-12));
}

TEST_CASE("tape losses agree with the scalar reference route") {
  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    Rng rng(42);
    Graph g = random_graph(9, 4, 0.3, 55);
    MatrixXd tang(9, 5);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 5; ++j) tang(i, j) = 0.4 * rng.normal();
    const MatrixXd hs = hgad::exp_map_origin_rows(geo, tang);
    const MatrixXd mask = hgad::connectivity_mask(g);

    MatrixXd tang2(9, 5);
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 5; ++j) tang2(i, j) = 0.4 * rng.normal();
    const MatrixXd x0 = hgad::exp_map_origin_rows(geo, tang2);
    const MatrixXd xhat = hgad::exp_map_origin_rows(geo, MatrixXd(0.9 * tang2));

    Tape t;
    auto hv = t.input(hs);
    auto xv = t.input(xhat);
    const VectorXd ls_tape =
        t.value(t.structural_row_loss(t.pairwise_sqdist(geo, hv), &mask, 0.2, 1.3)).col(0);
    const VectorXd ls_ref = hgad::structural_loss_rows_reference(geo, hs, mask, 0.2, 1.3);
    CHECK((ls_tape - ls_ref).cwiseAbs().maxCoeff() < 1e-7);

    const auto x0_ptr = std::make_shared<const MatrixXd>(x0);
    const VectorXd lc_tape = t.value(hgad::contextual_loss_rows(t, geo, x0_ptr, xv)).col(0);
    const VectorXd lc_ref = hgad::contextual_loss_rows_reference(geo, x0, xhat);
    CHECK((lc_tape - lc_ref).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("duplicating a disconnected partner leaves the class-balanced loss unchanged") {
  // Per-class means make the structural loss invariant to how many copies of
  // an identical disconnected point exist.
  MatrixXd hs3(3, 2), hs4(4, 2);
  hs3 << 0, 0, 0.3, 0, 0, 0.7;
  hs4 << 0, 0, 0.3, 0, 0, 0.7, 0, 0.7;  // row 3 duplicates row 2
  Graph g3, g4;
  g3.x = MatrixXd::Zero(3, 1);
  g3.adj.assign(3, {});
  g3.add_edge(0, 1);
  g4.x = MatrixXd::Zero(4, 1);
  g4.adj.assign(4, {});
  g4.add_edge(0, 1);

  const VectorXd l3 = hgad::structural_loss_rows_reference(
      Geometry::euclidean, hs3, hgad::connectivity_mask(g3), 0.0, 1.0);
  const VectorXd l4 = hgad::structural_loss_rows_reference(
      Geometry::euclidean, hs4, hgad::connectivity_mask(g4), 0.0, 1.0);
  CHECK(l3(0) == doctest::Approx(l4(0)).epsilon(1e-12));
  CHECK(l3(1) == doctest::Approx(l4(1)).epsilon(1e-12));
}

TEST_CASE("optimizer: hand-checked first step, decay only where requested") {
  double theta_plain = 1.0;
  double theta_decayed = 1.0;
  std::vector<hgad::AdamBlock> blocks;
  blocks.push_back({&theta_plain, 1, false, {}, 0, 0});
  blocks.push_back({&theta_decayed, 1, true, {}, 0, 0});
  hgad::Adam::Config cfg;
  cfg.lr = 0.005;
  cfg.weight_decay = 0.1;
  hgad::Adam opt(blocks, cfg);

  const double grad = 0.5;
  std::vector<VectorXd> grads{VectorXd::Constant(1, grad), VectorXd::Constant(1, grad)};
  opt.step(grads);

  // First step: m_hat = g, v_hat = g^2 -> delta = lr * g / (|g| + eps).
  const double delta = 0.005 * grad / (std::abs(grad) + 1e-8);
  CHECK(theta_plain == doctest::Approx(1.0 - delta).epsilon(1e-14));
  CHECK(theta_decayed == doctest::Approx(1.0 - delta - 0.005 * 0.1 * 1.0).epsilon(1e-14));
}

TEST_CASE("optimizer retracts manifold blocks onto the manifold") {
  for (Geometry geo : {Geometry::lorentz, Geometry::poincare}) {
    const int cols = hgad::point_dim(geo, 3);
    VectorXd tang(3);
    tang << 0.3, -0.2, 0.5;
    MatrixXd pts(1, cols);
    pts.row(0) = hgad::exp_map_origin(geo, tang).transpose();

    std::vector<hgad::AdamBlock> blocks;
    blocks.push_back({pts.data(), static_cast<int>(pts.size()), false, geo, 1, cols});
    hgad::Adam::Config cfg;
    cfg.lr = 0.05;
    hgad::Adam opt(blocks, cfg);

    Rng rng(3);
    VectorXd grad(pts.size());
    for (int i = 0; i < grad.size(); ++i) grad(i) = rng.normal();
    for (int step = 0; step < 5; ++step) opt.step({grad});

    std::string why;
    INFO(hgad::to_string(geo) << ": " << why);
    CHECK(hgad::on_manifold(geo, pts.row(0), 1e-9, &why));
  }
}

TEST_CASE("adam_blocks exposes every trainable scalar, decay on weight matrices only") {
  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    Rng rng(1);
    Model m = Model::init(small_config(geo, 4), rng);
    auto blocks = hgad::adam_blocks(m);
    const std::size_t per_layer = geo == Geometry::lorentz ? 5 : 2;
    CHECK(blocks.size() == 5 * per_layer);
    int decayed = 0;
    long long scalars = 0;
    for (const auto& b : blocks) {
      if (b.decay) ++decayed;
      scalars += b.size;
      CHECK_FALSE(b.manifold.has_value());  // every model parameter is flat
    }
    CHECK(decayed == 5);  // exactly the five weight matrices
    long long expect = 0;
    for (auto* blk : m.blocks()) {
      expect += blk->w.size() + blk->b.size();
      if (geo == Geometry::lorentz) expect += blk->v.size() + 2;
    }
    CHECK(scalars == expect);
  }
}

TEST_CASE("training is deterministic, and lr=0 freezes the parameters") {
  Graph g = random_graph(24, 6, 0.2, 77);
  const ModelConfig mc = small_config(Geometry::poincare, 6);

  TrainConfig tc;
  tc.alpha = 0.5;
  tc.epochs = 4;

  const auto r1 = hgad::train(g, mc, tc, 9);
  const auto r2 = hgad::train(g, mc, tc, 9);
  REQUIRE(r1.curve.size() == 4);
  for (std::size_t e = 0; e < r1.curve.size(); ++e) {
    CHECK(r1.curve[e].loss == r2.curve[e].loss);
    CHECK(r1.curve[e].lc == r2.curve[e].lc);
    CHECK(r1.curve[e].ls == r2.curve[e].ls);
  }
  CHECK(params_equal(r1.model, r2.model));
  const auto s1 = hgad::score_nodes(g, r1.model, tc);
  const auto s2 = hgad::score_nodes(g, r2.model, tc);
  CHECK(s1 == s2);

  TrainConfig frozen = tc;
  frozen.lr = 0.0;
  const auto rf = hgad::train(g, mc, frozen, 9);
  Rng ri(9);
  CHECK(params_equal(rf.model, Model::init(mc, ri)));
}

TEST_CASE("training reduces the loss on an injected graph in every geometry") {
  Graph g = random_graph(60, 8, 0.1, 31);
  hgad::InjectionParams params;
  params.o = 6;
  params.s = 3;
  params.p = 0.0;
  Rng inj(4);
  hgad::inject_structural(g, params, inj);

  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    TrainConfig tc;
    tc.alpha = 0.3;
    tc.epochs = 30;
    const auto res = hgad::train(g, small_config(geo, 8), tc, 3);
    CHECK_FALSE(res.aborted);
    INFO(hgad::to_string(geo) << " first=" << res.curve.front().loss
                              << " last=" << res.curve.back().loss);
    CHECK(res.curve.back().loss < res.curve.front().loss);
  }
}

TEST_CASE("scores mix the two loss routes and ignore the unused head") {
  Graph g = random_graph(20, 5, 0.25, 13);
  const ModelConfig mc = small_config(Geometry::poincare, 5);
  TrainConfig tc;
  tc.alpha = 0.0;
  tc.epochs = 3;
  auto res = hgad::train(g, mc, tc, 21);

  // alpha = 0: scores must not move when the attribute head is perturbed.
  const auto base = hgad::score_nodes(g, res.model, tc);
  Model perturbed = res.model;
  perturbed.cdec1.w.array() += 0.37;
  perturbed.cdec2.w.array() -= 0.21;
  CHECK(hgad::score_nodes(g, perturbed, tc) == base);

  // alpha = 1: the same perturbation must move them.
  TrainConfig tc1 = tc;
  tc1.alpha = 1.0;
  CHECK(hgad::score_nodes(g, res.model, tc1) != hgad::score_nodes(g, perturbed, tc1));

  // Mixed scores equal the mix of the pure scores.
  TrainConfig tc_half = tc;
  tc_half.alpha = 0.5;
  const auto s0 = hgad::score_nodes(g, res.model, tc);
  const auto s1 = hgad::score_nodes(g, res.model, tc1);
  const auto sh = hgad::score_nodes(g, res.model, tc_half);
  for (std::size_t i = 0; i < sh.size(); ++i)
    CHECK(sh[i] == doctest::Approx(0.5 * s0[i] + 0.5 * s1[i]).epsilon(1e-12));
}

TEST_CASE("single full-size minibatch matches full-batch training up to reduction order") {
  Graph g = random_graph(18, 4, 0.3, 71);
  ModelConfig mc = small_config(Geometry::euclidean, 4);
  mc.dropout = 0.0;  // keep the rng stream out of the comparison
  TrainConfig tc;
  tc.alpha = 0.5;
  tc.epochs = 1;

  TrainConfig tc_batched = tc;
  tc_batched.batch_size = 18;
  const auto full = hgad::train(g, mc, tc, 5);
  const auto batched = hgad::train(g, mc, tc_batched, 5);
  CHECK(full.curve[0].loss == doctest::Approx(batched.curve[0].loss).epsilon(1e-9));
}

TEST_CASE("minibatch training covers every node and stays finite") {
  Graph g = random_graph(30, 5, 0.2, 99);
  TrainConfig tc;
  tc.alpha = 0.5;
  tc.epochs = 5;
  tc.batch_size = 8;  // uneven split: batches of 8,8,8,6
  const auto res = hgad::train(g, small_config(Geometry::poincare, 5), tc, 12);
  CHECK_FALSE(res.aborted);
  for (const auto& e : res.curve) {
    CHECK(std::isfinite(e.loss));
    CHECK(std::isfinite(e.lc));
    CHECK(std::isfinite(e.ls));
  }
  const auto scores = hgad::score_nodes(g, res.model, tc);
  CHECK(scores.size() == 30);
}

TEST_CASE("gradient check passes on a quick configuration") {
  const Graph g = random_graph(12, 6, 0.3, 7);
  ModelConfig mc = small_config(Geometry::euclidean, 6);
  mc.hidden_dim = 4;
  TrainConfig tc;
  tc.alpha = 0.5;
  const auto rep = hgad::grad_check(g, mc, tc, 11);
  INFO("max rel err " << rep.max_rel_err << " at " << rep.worst);
  CHECK(rep.pass(1e-4));
}

TEST_CASE("edgeless neighborhood-aggregation baseline equals the plain autoencoder") {
  Graph g = random_graph(16, 5, 0.0, 41);  // no edges at all
  const auto mlp = hgad::mlpae_baseline_scores(g, 8, 10, 3);
  const auto gcn = hgad::gcnae_baseline_scores(g, 8, 10, 3);
  CHECK(mlp == gcn);  // identity premix must be bit-exact

  Graph h = random_graph(16, 5, 0.3, 41);
  CHECK(hgad::mlpae_baseline_scores(h, 8, 10, 3) != hgad::gcnae_baseline_scores(h, 8, 10, 3));
}

TEST_CASE("distance samples label connected and disconnected pairs") {
  Graph g = random_graph(20, 4, 0.25, 61);
  TrainConfig tc;
  tc.epochs = 2;
  const auto res = hgad::train(g, small_config(Geometry::poincare, 4), tc, 2);
  Rng rng(5);
  const auto samples = hgad::edge_distance_samples(g, res.model, 40, rng);
  CHECK(samples.size() == 80);
  int edges = 0;
  for (const auto& [d, is_edge] : samples) {
    CHECK(d >= 0.0);
    CHECK(std::isfinite(d));
    edges += is_edge;
  }
  CHECK(edges == 40);
}

TEST_SUITE_END();
