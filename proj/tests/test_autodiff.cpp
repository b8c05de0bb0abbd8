#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "hgad/autodiff.hpp"
#include "hgad/manifold.hpp"
#include "hgad/rng.hpp"

using Eigen::MatrixXd;
using hgad::Geometry;
using hgad::ad::Tape;
using hgad::ad::Var;

namespace {

// Fixed full-rank weighting so that every entry of a matrix-valued expression
// contributes to the scalar the harness differentiates.
MatrixXd mix_weights(Eigen::Index rows, Eigen::Index cols) {
  MatrixXd w(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = 0.2 + 0.15 * static_cast<double>((i * 7 + j * 3) % 5);
  return w;
}

using Builder = std::function<Var(Tape&, const std::vector<Var>&)>;

double eval_scalar(const std::vector<MatrixXd>& inputs, const Builder& build) {
  Tape t;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& m : inputs) vars.push_back(t.input(m));
  const Var out = build(t, vars);
  const auto& v = t.value(out);
  const Var scalar = t.sum_all(t.cmul(out, t.constant(mix_weights(v.rows(), v.cols()))));
  return t.value(scalar)(0, 0);
}

// Tape gradients of sum(weights .* build(inputs)) against central finite
// differences on every input entry.
void fd_check(const std::string& tag, const std::vector<MatrixXd>& inputs, const Builder& build,
              double h = 1e-6, double tol = 2e-5) {
  Tape t;
  std::vector<Var> vars;
  vars.reserve(inputs.size());
  for (const auto& m : inputs) vars.push_back(t.input(m));
  const Var out = build(t, vars);
  const auto& v = t.value(out);
  const Var scalar = t.sum_all(t.cmul(out, t.constant(mix_weights(v.rows(), v.cols()))));
  t.backward(scalar);

  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const MatrixXd g = t.grad(vars[k]);
    REQUIRE(g.rows() == inputs[k].rows());
    REQUIRE(g.cols() == inputs[k].cols());
    for (Eigen::Index i = 0; i < inputs[k].rows(); ++i) {
      for (Eigen::Index j = 0; j < inputs[k].cols(); ++j) {
        auto shifted = inputs;
        shifted[k](i, j) = inputs[k](i, j) + h;
        const double fp = eval_scalar(shifted, build);
        shifted[k](i, j) = inputs[k](i, j) - h;
        const double fm = eval_scalar(shifted, build);
        const double fd = (fp - fm) / (2.0 * h);
        const double an = g(i, j);
        const double rel = std::abs(fd - an) / std::max({1.0, std::abs(fd), std::abs(an)});
        INFO(tag << " input " << k << " entry (" << i << "," << j << "): fd=" << fd
                 << " analytic=" << an);
        CHECK(rel <= tol);
      }
    }
  }
}

MatrixXd rand_matrix(hgad::Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0,
                     double offset = 0.0) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal() + offset;
  return m;
}

}  // namespace

TEST_SUITE_BEGIN("autodiff");

TEST_CASE("arithmetic primitives differentiate correctly") {
  hgad::Rng rng(101);
  const MatrixXd a = rand_matrix(rng, 3, 4);
  const MatrixXd b = rand_matrix(rng, 3, 4, 1.0, 2.5);  // positive-ish divisor
  const MatrixXd one = rand_matrix(rng, 1, 1);

  fd_check("add", {a, b}, [](Tape& t, const std::vector<Var>& v) { return t.add(v[0], v[1]); });
  fd_check("sub", {a, b}, [](Tape& t, const std::vector<Var>& v) { return t.sub(v[0], v[1]); });
  fd_check("cmul", {a, b}, [](Tape& t, const std::vector<Var>& v) { return t.cmul(v[0], v[1]); });
  fd_check("cdiv", {a, b}, [](Tape& t, const std::vector<Var>& v) { return t.cdiv(v[0], v[1]); });
  fd_check("scale", {a}, [](Tape& t, const std::vector<Var>& v) { return t.scale(v[0], -1.7); });
  fd_check("add_const", {a},
           [](Tape& t, const std::vector<Var>& v) { return t.add_const(v[0], 0.3); });
  fd_check("scale_var", {a, one},
           [](Tape& t, const std::vector<Var>& v) { return t.scale_var(v[0], v[1]); });
  fd_check("add_scalar_var", {a, one},
           [](Tape& t, const std::vector<Var>& v) { return t.add_scalar_var(v[0], v[1]); });
  // Clip boundary at 0; entries are kept > 0.1 away from it.
  MatrixXd c = a;
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (std::abs(c(i)) < 0.1) c(i) = 0.5;
  fd_check("clip_min", {c},
           [](Tape& t, const std::vector<Var>& v) { return t.clip_min(v[0], 0.0); });
}

TEST_CASE("elementwise functions differentiate correctly") {
  hgad::Rng rng(102);
  MatrixXd a = rand_matrix(rng, 3, 3, 0.8);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    if (std::abs(a(i)) < 0.05) a(i) = 0.4;  // keep away from the relu kink
  const MatrixXd pos = a.cwiseAbs().array() + 0.2;
  const MatrixXd ball = 0.09 * a;                 // |entries| < 0.9 for atanh
  const MatrixXd above1 = pos.array() + 1.0001;   // acoshc domain, incl. near 1
  const MatrixXd unit = 0.04 * a.cwiseAbs();      // [0, ~0.4) for atanhc_sqrt

  fd_check("relu", {a}, [](Tape& t, const std::vector<Var>& v) { return t.relu(v[0]); });
  fd_check("sigmoid", {a}, [](Tape& t, const std::vector<Var>& v) { return t.sigmoid(v[0]); });
  fd_check("tanh", {a}, [](Tape& t, const std::vector<Var>& v) { return t.tanh(v[0]); });
  fd_check("exp", {a}, [](Tape& t, const std::vector<Var>& v) { return t.exp(v[0]); });
  fd_check("softplus", {a}, [](Tape& t, const std::vector<Var>& v) { return t.softplus(v[0]); });
  fd_check("sqrt", {pos}, [](Tape& t, const std::vector<Var>& v) { return t.sqrt(v[0]); });
  fd_check("inv", {pos}, [](Tape& t, const std::vector<Var>& v) { return t.inv(v[0]); });
  fd_check("atanh_c", {ball}, [](Tape& t, const std::vector<Var>& v) { return t.atanh_c(v[0]); });
  fd_check("acoshc", {above1}, [](Tape& t, const std::vector<Var>& v) { return t.acoshc(v[0]); });
  fd_check("cosh_sqrt", {pos},
           [](Tape& t, const std::vector<Var>& v) { return t.cosh_sqrt(v[0]); });
  fd_check("sinhc_sqrt", {pos},
           [](Tape& t, const std::vector<Var>& v) { return t.sinhc_sqrt(v[0]); });
  fd_check("tanhc_sqrt", {pos},
           [](Tape& t, const std::vector<Var>& v) { return t.tanhc_sqrt(v[0]); });
  fd_check("atanhc_sqrt", {unit},
           [](Tape& t, const std::vector<Var>& v) { return t.atanhc_sqrt(v[0]); });
}

TEST_CASE("matrix primitives differentiate correctly") {
  hgad::Rng rng(103);
  const MatrixXd a = rand_matrix(rng, 3, 4);
  const MatrixXd b = rand_matrix(rng, 4, 2);
  const MatrixXd bt = rand_matrix(rng, 2, 4);
  const MatrixXd row = rand_matrix(rng, 1, 4);
  const MatrixXd col = rand_matrix(rng, 3, 1);
  const MatrixXd b2 = rand_matrix(rng, 3, 4);

  fd_check("matmul", {a, b},
           [](Tape& t, const std::vector<Var>& v) { return t.matmul(v[0], v[1]); });
  fd_check("matmul_nt", {a, bt},
           [](Tape& t, const std::vector<Var>& v) { return t.matmul_nt(v[0], v[1]); });
  fd_check("add_rowvec", {a, row},
           [](Tape& t, const std::vector<Var>& v) { return t.add_rowvec(v[0], v[1]); });
  fd_check("sub_rowvec", {a, row},
           [](Tape& t, const std::vector<Var>& v) { return t.sub_rowvec(v[0], v[1]); });
  fd_check("row_scale", {a, col},
           [](Tape& t, const std::vector<Var>& v) { return t.row_scale(v[0], v[1]); });
  fd_check("hcat", {a, b2},
           [](Tape& t, const std::vector<Var>& v) { return t.hcat(v[0], v[1]); });
  fd_check("slice_cols", {a},
           [](Tape& t, const std::vector<Var>& v) { return t.slice_cols(v[0], 1, 2); });
  fd_check("rowwise_sqnorm", {a},
           [](Tape& t, const std::vector<Var>& v) { return t.rowwise_sqnorm(v[0]); });
  fd_check("rowwise_sum", {a},
           [](Tape& t, const std::vector<Var>& v) { return t.rowwise_sum(v[0]); });
  fd_check("rowwise_dot", {a, b2},
           [](Tape& t, const std::vector<Var>& v) { return t.rowwise_dot(v[0], v[1]); });
  fd_check("colwise_sum", {a},
           [](Tape& t, const std::vector<Var>& v) { return t.colwise_sum(v[0]); });
  fd_check("colwise_mean", {a},
           [](Tape& t, const std::vector<Var>& v) { return t.colwise_mean(v[0]); });
  fd_check("sum_all", {a},
           [](Tape& t, const std::vector<Var>& v) { return t.sum_all(v[0]); });
}

TEST_CASE("sparse multiply matches dense and differentiates correctly") {
  hgad::ad::SparseMatrix s(4, 4);
  std::vector<Eigen::Triplet<double>> trip{{0, 1, 0.5}, {1, 0, 0.5}, {2, 3, 1.0},
                                           {3, 2, 1.0}, {0, 0, 0.25}, {1, 1, 0.75},
                                           {2, 2, 0.3}, {3, 3, 0.9}};
  s.setFromTriplets(trip.begin(), trip.end());

  hgad::Rng rng(104);
  const MatrixXd x = rand_matrix(rng, 4, 3);
  {
    Tape t;
    Var xv = t.input(x);
    Var y = t.spmm(&s, xv);
    CHECK((t.value(y) - MatrixXd(s) * x).cwiseAbs().maxCoeff() < 1e-14);
  }
  fd_check("spmm", {x}, [&s](Tape& t, const std::vector<Var>& v) { return t.spmm(&s, v[0]); });
}

TEST_CASE("ball projection differentiates on both sides of the boundary") {
  MatrixXd x(3, 2);
  x << 0.2, 0.1,      // well inside: identity region
      1.5, -0.7,      // outside: rescaled onto the boundary
      -0.05, 0.3;     // inside
  fd_check("proj_ball", {x},
           [](Tape& t, const std::vector<Var>& v) { return t.proj_ball(v[0]); });
}

TEST_CASE("fused distance kernels match the plain kernels and differentiate") {
  hgad::Rng rng(105);
  for (Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    const MatrixXd tang = rand_matrix(rng, 5, 3, 0.5);
    const MatrixXd pts = hgad::exp_map_origin_rows(geo, tang);

    {
      Tape t;
      Var p = t.input(pts);
      Var d2 = t.pairwise_sqdist(geo, p);
      const MatrixXd plain = hgad::pairwise_sqdist_matrix(geo, pts);
      CHECK((t.value(d2) - plain).cwiseAbs().maxCoeff() < 1e-9);
    }
    fd_check("pairwise_sqdist/" + hgad::to_string(geo), {pts},
             [geo](Tape& t, const std::vector<Var>& v) { return t.pairwise_sqdist(geo, v[0]); });

    const MatrixXd tang2 = rand_matrix(rng, 5, 3, 0.5);
    const MatrixXd target = hgad::exp_map_origin_rows(geo, tang2);
    {
      Tape t;
      Var p = t.input(pts);
      Var d = t.rowwise_dist_to_rows(geo, &target, p);
      const Eigen::VectorXd plain = hgad::rowwise_dist(geo, pts, target);
      CHECK((t.value(d).col(0) - plain).cwiseAbs().maxCoeff() < 1e-9);
    }
    fd_check("rowwise_dist_to_rows/" + hgad::to_string(geo), {pts},
             [geo, &target](Tape& t, const std::vector<Var>& v) {
               return t.rowwise_dist_to_rows(geo, &target, v[0]);
             },
             1e-6, 5e-5);
  }
}

TEST_CASE("structural row loss differentiates through the distance kernel") {
  hgad::Rng rng(106);
  const MatrixXd tang = rand_matrix(rng, 5, 3, 0.5);
  const MatrixXd pts = hgad::exp_map_origin_rows(Geometry::euclidean, tang);
  MatrixXd mask = MatrixXd::Zero(5, 5);
  mask.diagonal().setOnes();
  auto connect = [&](int i, int j) { mask(i, j) = mask(j, i) = 1.0; };
  connect(0, 1);
  connect(1, 2);
  connect(3, 4);
  fd_check("structural_row_loss", {pts},
           [&mask](Tape& t, const std::vector<Var>& v) {
             return t.structural_row_loss(t.pairwise_sqdist(Geometry::euclidean, v[0]), &mask,
                                          0.0, 1.0);
           });
}

TEST_CASE("tape bookkeeping: constants, gradients, scalar requirement") {
  Tape t;
  MatrixXd m(2, 2);
  m << 1, 2, 3, 4;
  Var x = t.input(m);
  Var c = t.constant(m);
  CHECK(t.requires_grad(x));
  CHECK_FALSE(t.requires_grad(c));

  Var y = t.cmul(x, c);
  CHECK_THROWS_AS(t.backward(y), std::invalid_argument);  // 2x2, not scalar

  Var s = t.sum_all(y);
  CHECK(t.grad(x).cwiseAbs().maxCoeff() == 0.0);  // no gradient before backward
  t.backward(s);
  CHECK(t.grad(x) == m);                          // d/dx sum(x .* c) = c
  CHECK(t.grad(c).cwiseAbs().maxCoeff() == 0.0);  // constants accumulate nothing
}

TEST_SUITE_END();
