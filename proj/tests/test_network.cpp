#include <doctest.h>

#include <Eigen/Dense>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hgad/autodiff.hpp"
#include "hgad/graph.hpp"
#include "hgad/manifold.hpp"
#include "hgad/network.hpp"
#include "hgad/rng.hpp"

using Eigen::MatrixXd;
using hgad::ForwardOptions;
using hgad::ForwardTrace;
using hgad::Geometry;
using hgad::Graph;
using hgad::Model;
using hgad::ModelConfig;
using hgad::Rng;
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

ModelConfig config(Geometry geo, int in_dim, bool mp, double dropout = 0.0) {
  ModelConfig mc;
  mc.geometry = geo;
  mc.in_dim = in_dim;
  mc.hidden_dim = 6;
  mc.message_passing = mp;
  mc.dropout = dropout;
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

TEST_SUITE_BEGIN("network");

TEST_CASE("init shapes, bounds and determinism") {
  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    Rng rng(5);
    const ModelConfig mc = config(geo, 9, false);
    Model m = Model::init(mc, rng);
    const int ambient_in = hgad::point_dim(geo, 9);
    const int ambient_hidden = hgad::point_dim(geo, 6);

    CHECK(m.enc1.w.rows() == 6);
    CHECK(m.enc1.w.cols() == ambient_in);
    CHECK(m.enc2.w.rows() == 6);
    CHECK(m.enc2.w.cols() == ambient_hidden);
    CHECK(m.cdec2.w.rows() == 9);
    CHECK(m.cdec2.w.cols() == ambient_hidden);

    for (auto* blk : m.blocks()) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(blk->w.cols()));
      CHECK(blk->w.cwiseAbs().maxCoeff() <= bound);
      CHECK(blk->b.cwiseAbs().maxCoeff() == 0.0);
      CHECK(blk->bprime == 0.0);
      CHECK(blk->log_lambda == 0.0);
      if (geo == Geometry::lorentz) {
        CHECK(blk->v.size() == blk->w.cols());
      }
    }

    Rng rng2(5);
    CHECK(params_equal(m, Model::init(mc, rng2)));

    ModelConfig bad = mc;
    bad.in_dim = 0;
    Rng rng3(1);
    CHECK_THROWS_AS(Model::init(bad, rng3), std::invalid_argument);
  }
}

TEST_CASE("forward outputs live on the model manifold") {
  const Graph g = random_graph(10, 5, 0.3, 21);
  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    for (bool mp : {false, true}) {
      Rng rng(7);
      Model m = Model::init(config(geo, 5, mp), rng);
      Tape t;
      auto vars = hgad::insert_params(t, m);
      const auto premix = hgad::premix_matrix(g);
      ForwardOptions opt;
      if (mp) opt.premix = &premix;
      const ForwardTrace tr = hgad::forward(t, m, vars, g.x, opt);

      CHECK(t.value(tr.latent).rows() == 10);
      CHECK(t.value(tr.latent).cols() == hgad::point_dim(geo, 6));
      CHECK(t.value(tr.xhat).cols() == hgad::point_dim(geo, 5));
      for (const auto& mat : {t.value(tr.latent), t.value(tr.hs), t.value(tr.xhat)}) {
        for (Eigen::Index i = 0; i < mat.rows(); ++i) {
          std::string why;
          INFO(hgad::to_string(geo) << " mp=" << mp << " row " << i << ": " << why);
          CHECK(hgad::on_manifold(geo, mat.row(i), 1e-9, &why));
        }
      }
      // x0 is the embedded input.
      CHECK((*tr.x0 - hgad::exp_map_origin_rows(geo, g.x)).cwiseAbs().maxCoeff() < 1e-15);
    }
  }
}

TEST_CASE("without message passing the forward pass ignores the adjacency") {
  Graph a = random_graph(8, 4, 0.4, 31);
  Graph b = a;
  b.adj.assign(8, {});
  b.add_edge(0, 7);  // completely different edge set

  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    Rng rng(3);
    Model m = Model::init(config(geo, 4, false), rng);

    auto run = [&](const Graph& g) {
      Tape t;
      auto vars = hgad::insert_params(t, m);
      const ForwardTrace tr = hgad::forward(t, m, vars, g.x, ForwardOptions{});
      return std::pair<MatrixXd, MatrixXd>(t.value(tr.latent), t.value(tr.xhat));
    };
    const auto [la, xa] = run(a);
    const auto [lb, xb] = run(b);
    CHECK(la == lb);
    CHECK(xa == xb);
  }
}

TEST_CASE("with message passing the adjacency changes the outputs") {
  Graph a = random_graph(8, 4, 0.4, 32);
  Graph b = a;
  b.adj.assign(8, {});
  b.add_edge(0, 7);

  Rng rng(3);
  Model m = Model::init(config(Geometry::poincare, 4, true), rng);
  auto run = [&](const Graph& g) {
    Tape t;
    auto vars = hgad::insert_params(t, m);
    const auto premix = hgad::premix_matrix(g);
    ForwardOptions opt;
    opt.premix = &premix;
    return MatrixXd(t.value(hgad::forward(t, m, vars, g.x, opt).latent));
  };
  CHECK(run(a) != run(b));

  // Message passing without a premix operator is an option misuse.
  Tape t;
  auto vars = hgad::insert_params(t, m);
  CHECK_THROWS_AS(hgad::forward(t, m, vars, a.x, ForwardOptions{}), std::invalid_argument);
}

TEST_CASE("premix operator matches the normalized-aggregation oracle on a path graph") {
  Graph g;
  g.x = MatrixXd::Identity(3, 3);
  g.adj.assign(3, {});
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  const MatrixXd p = MatrixXd(hgad::premix_matrix(g));
  // Degrees+1: node 0 and 2 -> 2, node 1 -> 3.
  CHECK(p(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(p(0, 1) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK(p(0, 2) == doctest::Approx(0.0));
  CHECK(p(1, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(p(1, 2) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-15));
  CHECK((p - p.transpose()).cwiseAbs().maxCoeff() == 0.0);

  // Induced operator of a subset recomputes degrees inside the subset.
  const MatrixXd sub = MatrixXd(hgad::premix_matrix(g, {0, 1}));
  CHECK(sub.rows() == 2);
  CHECK(sub(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sub(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(hgad::premix_matrix(g, {0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(hgad::premix_matrix(g, {0, 5}), std::invalid_argument);
}

TEST_CASE("dropout is training-only and consumes the rng stream") {
  const Graph g = random_graph(8, 4, 0.3, 33);
  Rng rng(3);
  Model m = Model::init(config(Geometry::poincare, 4, false, 0.5), rng);

  auto run = [&](bool training, Rng* drop_rng) {
    Tape t;
    auto vars = hgad::insert_params(t, m);
    ForwardOptions opt;
    opt.training = training;
    opt.rng = drop_rng;
    return MatrixXd(t.value(hgad::forward(t, m, vars, g.x, opt).latent));
  };

  Rng d1(9);
  const MatrixXd first = run(true, &d1);
  const MatrixXd second = run(true, &d1);  // stream advanced -> different masks
  CHECK(first != second);

  Rng d2(9);
  CHECK(run(true, &d2) == first);  // same stream position -> same masks

  CHECK(run(false, nullptr) == run(false, nullptr));  // eval mode is deterministic

  // Training mode without an rng is an option misuse.
  Tape t;
  auto vars = hgad::insert_params(t, m);
  ForwardOptions opt;
  opt.training = true;
  CHECK_THROWS_AS(hgad::forward(t, m, vars, g.x, opt), std::invalid_argument);
}

TEST_CASE("need_xhat=false skips the attribute head") {
  const Graph g = random_graph(6, 3, 0.3, 34);
  Rng rng(4);
  Model m = Model::init(config(Geometry::lorentz, 3, false), rng);
  Tape t;
  auto vars = hgad::insert_params(t, m);
  ForwardOptions opt;
  opt.need_xhat = false;
  const ForwardTrace tr = hgad::forward(t, m, vars, g.x, opt);
  CHECK_FALSE(tr.xhat.valid());
  CHECK(tr.hs.valid());
}

TEST_CASE("degenerate-autoencoder oracle closed forms") {
  const auto v = hgad::lemma1_oracle(9, 10);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 1.0);
  CHECK(v[2] == doctest::Approx(std::sqrt(2.0) * 0.1).epsilon(1e-15));
  CHECK(v[3] == doctest::Approx(std::sqrt(2.0) * 0.9).epsilon(1e-15));

  const auto w = hgad::lemma1_oracle(6, 10);
  CHECK(w[2] == doctest::Approx(std::sqrt(2.0) * 0.4).epsilon(1e-15));
  CHECK(w[3] == doctest::Approx(std::sqrt(2.0) * 0.6).epsilon(1e-15));

  const auto full = hgad::lemma1_oracle(10, 10);
  CHECK(full[2] == 0.0);  // no minority left to smooth against

  CHECK_THROWS_AS(hgad::lemma1_oracle(5, 10), std::invalid_argument);   // needs majority
  CHECK_THROWS_AS(hgad::lemma1_oracle(11, 10), std::invalid_argument);  // more normals
  CHECK_THROWS_AS(hgad::lemma1_oracle(0, 0), std::invalid_argument);
}

TEST_CASE("checkpoints round-trip bit-exactly and reject malformed files") {
  const auto dir = std::filesystem::temp_directory_path() / "hgad_test_ckpt";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.bin").string();

  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    Rng rng(17);
    ModelConfig mc = config(geo, 7, geo == Geometry::poincare, 0.25);
    Model m = Model::init(mc, rng);
    m.enc1.w(0, 0) = 0.123456789012345678;  // arbitrary non-init values
    m.sdec.b(0) = -0.75;
    if (geo == Geometry::lorentz) m.sdec.log_lambda = -0.5;  // gate params exist here only
    hgad::save_checkpoint(path, m);
    const Model r = hgad::load_checkpoint(path);
    CHECK(r.config.geometry == mc.geometry);
    CHECK(r.config.in_dim == mc.in_dim);
    CHECK(r.config.hidden_dim == mc.hidden_dim);
    CHECK(r.config.message_passing == mc.message_passing);
    CHECK(r.config.dropout == mc.dropout);
    CHECK(params_equal(m, r));
  }

  // Truncated payload.
  {
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 9));
  }
  CHECK_THROWS_AS(hgad::load_checkpoint(path), std::runtime_error);

  // Not a checkpoint at all.
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << "definitely not a checkpoint";
  }
  CHECK_THROWS_AS(hgad::load_checkpoint(path), std::runtime_error);
  CHECK_THROWS_AS(hgad::load_checkpoint((dir / "missing.bin").string()), std::runtime_error);
}

TEST_SUITE_END();
