#include "hgad/autodiff.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace hgad::ad {

namespace {

void expect(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("tape: ") + what);
}

// Squared Euclidean distances between rows via the Gram matrix, clamped at 0.
Matrix euclid_pairwise_sq(const Matrix& x) {
  const Eigen::VectorXd r = x.rowwise().squaredNorm();
  Matrix sq = -2.0 * (x * x.transpose());
  sq.colwise() += r;
  sq.rowwise() += r.transpose();
  sq = sq.cwiseMax(0.0);
  sq.diagonal().setZero();
  return sq;
}

// d/du acosh(u)^2 evaluated from e = u - 1 and the cached value d2 = acosh(u)^2;
// the series branch also covers e <= 0.
double acosh_sq_grad_from(double e, double d2) {
  if (e < kSeriesCut) return 2.0 + e * (-2.0 / 3.0 + e * (4.0 / 15.0));
  return 2.0 * std::sqrt(d2) / std::sqrt(e * (e + 2.0));
}

// X with its spatial columns negated, i.e. rows x_i^T g with g = diag(1,-1..-1),
// so that (X g X^T)_ij = -<x_i, x_j>_L.
Matrix lorentz_gflip(const Matrix& x) {
  Matrix xg = x;
  xg.rightCols(xg.cols() - 1) *= -1.0;
  return xg;
}

}  // namespace

Var Tape::make(Matrix value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::input(Matrix value) { return make(std::move(value), true); }
Var Tape::constant(Matrix value) { return make(std::move(value), false); }

Matrix Tape::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::backward(Var out) {
  expect(out.valid() && out.id < static_cast<int>(nodes_.size()), "backward on invalid var");
  expect(node(out).value.size() == 1, "backward needs a 1x1 output");
  node(out).grad = Matrix::Ones(1, 1);
  for (int i = out.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.backward && n.grad.size() != 0) n.backward();
  }
}

// ---- elementwise and scalar broadcast ---------------------------------------

Var Tape::add(Var a, Var b) {
  expect(node(a).value.rows() == node(b).value.rows() &&
             node(a).value.cols() == node(b).value.cols(),
         "add: shape mismatch");
  Var r = make(node(a).value + node(b).value, node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r]() {
      accum(a, node(r).grad);
      accum(b, node(r).grad);
    };
  return r;
}

Var Tape::sub(Var a, Var b) {
  expect(node(a).value.rows() == node(b).value.rows() &&
             node(a).value.cols() == node(b).value.cols(),
         "sub: shape mismatch");
  Var r = make(node(a).value - node(b).value, node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r]() {
      accum(a, node(r).grad);
      accum(b, -node(r).grad);
    };
  return r;
}

Var Tape::cmul(Var a, Var b) {
  expect(node(a).value.rows() == node(b).value.rows() &&
             node(a).value.cols() == node(b).value.cols(),
         "cmul: shape mismatch");
  Var r = make(node(a).value.cwiseProduct(node(b).value),
               node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r]() {
      accum(a, node(r).grad.cwiseProduct(node(b).value));
      accum(b, node(r).grad.cwiseProduct(node(a).value));
    };
  return r;
}

Var Tape::cdiv(Var a, Var b) {
  expect(node(a).value.rows() == node(b).value.rows() &&
             node(a).value.cols() == node(b).value.cols(),
         "cdiv: shape mismatch");
  Var r = make(node(a).value.cwiseQuotient(node(b).value),
               node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r]() {
      accum(a, node(r).grad.cwiseQuotient(node(b).value));
      accum(b, -node(r).grad.cwiseProduct(node(r).value).cwiseQuotient(node(b).value));
    };
  return r;
}

Var Tape::scale(Var a, double k) {
  Var r = make(k * node(a).value, node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r, k]() { accum(a, k * node(r).grad); };
  return r;
}

Var Tape::add_const(Var a, double k) {
  Var r = make(node(a).value.array() + k, node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r]() { accum(a, node(r).grad); };
  return r;
}

Var Tape::scale_var(Var a, Var k) {
  expect(node(k).value.size() == 1, "scale_var: scalar must be 1x1");
  Var r = make(node(k).value(0, 0) * node(a).value,
               node(a).requires_grad || node(k).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, k, r]() {
      accum(a, node(k).value(0, 0) * node(r).grad);
      Matrix gk(1, 1);
      gk(0, 0) = node(r).grad.cwiseProduct(node(a).value).sum();
      accum(k, gk);
    };
  return r;
}

Var Tape::add_scalar_var(Var a, Var k) {
  expect(node(k).value.size() == 1, "add_scalar_var: scalar must be 1x1");
  Var r = make(node(a).value.array() + node(k).value(0, 0),
               node(a).requires_grad || node(k).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, k, r]() {
      accum(a, node(r).grad);
      Matrix gk(1, 1);
      gk(0, 0) = node(r).grad.sum();
      accum(k, gk);
    };
  return r;
}

Var Tape::clip_min(Var a, double lo) {
  Var r = make(node(a).value.cwiseMax(lo), node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r, lo]() {
      accum(a, node(r).grad.cwiseProduct(
                   (node(a).value.array() > lo).cast<double>().matrix()));
    };
  return r;
}

// ---- named elementwise functions ---------------------------------------------

Var Tape::relu(Var a) {
  return cwise(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var Tape::sigmoid(Var a) {
  return cwise(
      a, [](double x) { return hgad::sigmoid(x); },
      [](double x) {
        const double s = hgad::sigmoid(x);
        return s * (1.0 - s);
      });
}

Var Tape::tanh(Var a) {
  return cwise(
      a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

Var Tape::exp(Var a) {
  return cwise(
      a, [](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
}

Var Tape::sqrt(Var a) {
  return cwise(
      a, [](double x) { return std::sqrt(std::max(x, 0.0)); },
      [](double x) { return x > 0.0 ? 0.5 / std::sqrt(x) : 0.0; });
}

Var Tape::inv(Var a) {
  return cwise(
      a, [](double x) { return 1.0 / x; }, [](double x) { return -1.0 / (x * x); });
}

Var Tape::softplus(Var a) {
  return cwise(
      a, [](double x) { return hgad::softplus(x); },
      [](double x) { return hgad::sigmoid(x); });
}

Var Tape::atanh_c(Var a) {
  return cwise(
      a, [](double x) { return hgad::atanh_c(x); },
      [](double x) {
        const double xc = std::clamp(x, -(1.0 - 1e-12), 1.0 - 1e-12);
        return 1.0 / (1.0 - xc * xc);
      });
}

Var Tape::acoshc(Var a) {
  return cwise(
      a, [](double x) { return hgad::acoshc(x); },
      [](double x) { return hgad::acoshc_grad(x); });
}

Var Tape::cosh_sqrt(Var a) {
  return cwise(
      a, [](double x) { return hgad::cosh_sqrt(x); },
      [](double x) { return hgad::cosh_sqrt_grad(x); });
}

Var Tape::sinhc_sqrt(Var a) {
  return cwise(
      a, [](double x) { return hgad::sinhc_sqrt(x); },
      [](double x) { return hgad::sinhc_sqrt_grad(x); });
}

Var Tape::tanhc_sqrt(Var a) {
  return cwise(
      a, [](double x) { return hgad::tanhc_sqrt(x); },
      [](double x) { return hgad::tanhc_sqrt_grad(x); });
}

Var Tape::atanhc_sqrt(Var a) {
  return cwise(
      a, [](double x) { return hgad::atanhc_sqrt(x); },
      [](double x) { return hgad::atanhc_sqrt_grad(x); });
}

// ---- shape and linear algebra --------------------------------------------------

Var Tape::matmul(Var a, Var b) {
  expect(node(a).value.cols() == node(b).value.rows(), "matmul: inner dims differ");
  Var r = make(node(a).value * node(b).value, node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r]() {
      accum(a, node(r).grad * node(b).value.transpose());
      accum(b, node(a).value.transpose() * node(r).grad);
    };
  return r;
}

Var Tape::matmul_nt(Var a, Var b) {
  expect(node(a).value.cols() == node(b).value.cols(), "matmul_nt: inner dims differ");
  Var r = make(node(a).value * node(b).value.transpose(),
               node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r]() {
      accum(a, node(r).grad * node(b).value);
      accum(b, node(r).grad.transpose() * node(a).value);
    };
  return r;
}

Var Tape::add_rowvec(Var a, Var rv) {
  expect(node(rv).value.rows() == 1 && node(rv).value.cols() == node(a).value.cols(),
         "add_rowvec: need a 1 x cols(a) row");
  Matrix out = node(a).value;
  out.rowwise() += node(rv).value.row(0);
  Var r = make(std::move(out), node(a).requires_grad || node(rv).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, rv, r]() {
      accum(a, node(r).grad);
      accum(rv, node(r).grad.colwise().sum());
    };
  return r;
}

Var Tape::sub_rowvec(Var a, Var rv) {
  expect(node(rv).value.rows() == 1 && node(rv).value.cols() == node(a).value.cols(),
         "sub_rowvec: need a 1 x cols(a) row");
  Matrix out = node(a).value;
  out.rowwise() -= node(rv).value.row(0);
  Var r = make(std::move(out), node(a).requires_grad || node(rv).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, rv, r]() {
      accum(a, node(r).grad);
      accum(rv, -node(r).grad.colwise().sum());
    };
  return r;
}

Var Tape::row_scale(Var a, Var s) {
  expect(node(s).value.cols() == 1 && node(s).value.rows() == node(a).value.rows(),
         "row_scale: need a rows(a) x 1 scale");
  Var r = make((node(a).value.array().colwise() * node(s).value.col(0).array()).matrix(),
               node(a).requires_grad || node(s).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, s, r]() {
      accum(a, (node(r).grad.array().colwise() * node(s).value.col(0).array()).matrix());
      accum(s, node(r).grad.cwiseProduct(node(a).value).rowwise().sum());
    };
  return r;
}

Var Tape::hcat(Var a, Var b) {
  expect(node(a).value.rows() == node(b).value.rows(), "hcat: row counts differ");
  const Eigen::Index ca = node(a).value.cols(), cb = node(b).value.cols();
  Matrix out(node(a).value.rows(), ca + cb);
  out.leftCols(ca) = node(a).value;
  out.rightCols(cb) = node(b).value;
  Var r = make(std::move(out), node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r, ca, cb]() {
      accum(a, node(r).grad.leftCols(ca));
      accum(b, node(r).grad.rightCols(cb));
    };
  return r;
}

Var Tape::slice_cols(Var a, int first, int count) {
  expect(first >= 0 && count >= 0 && first + count <= node(a).value.cols(),
         "slice_cols: out of range");
  Var r = make(node(a).value.middleCols(first, count), node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r, first, count]() {
      Matrix ga = Matrix::Zero(node(a).value.rows(), node(a).value.cols());
      ga.middleCols(first, count) = node(r).grad;
      accum(a, ga);
    };
  return r;
}

Var Tape::rowwise_sqnorm(Var a) {
  Var r = make(node(a).value.rowwise().squaredNorm(), node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r]() {
      accum(a, (node(a).value.array().colwise() * (2.0 * node(r).grad.col(0).array())).matrix());
    };
  return r;
}

Var Tape::rowwise_sum(Var a) {
  Var r = make(node(a).value.rowwise().sum(), node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r]() {
      accum(a, node(r).grad.col(0).replicate(1, node(a).value.cols()));
    };
  return r;
}

Var Tape::rowwise_dot(Var a, Var b) {
  expect(node(a).value.rows() == node(b).value.rows() &&
             node(a).value.cols() == node(b).value.cols(),
         "rowwise_dot: shape mismatch");
  Var r = make(node(a).value.cwiseProduct(node(b).value).rowwise().sum(),
               node(a).requires_grad || node(b).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, b, r]() {
      accum(a, (node(b).value.array().colwise() * node(r).grad.col(0).array()).matrix());
      accum(b, (node(a).value.array().colwise() * node(r).grad.col(0).array()).matrix());
    };
  return r;
}

Var Tape::colwise_sum(Var a) {
  Var r = make(node(a).value.colwise().sum(), node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r]() {
      accum(a, node(r).grad.replicate(node(a).value.rows(), 1));
    };
  return r;
}

Var Tape::colwise_mean(Var a) {
  const double n = static_cast<double>(node(a).value.rows());
  Var r = make(node(a).value.colwise().sum() / n, node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r, n]() {
      accum(a, node(r).grad.replicate(node(a).value.rows(), 1) / n);
    };
  return r;
}

Var Tape::sum_all(Var a) {
  Matrix out(1, 1);
  out(0, 0) = node(a).value.sum();
  Var r = make(std::move(out), node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r]() {
      accum(a, Matrix::Constant(node(a).value.rows(), node(a).value.cols(),
                                node(r).grad(0, 0)));
    };
  return r;
}

Var Tape::spmm(const SparseMatrix* m, Var x) {
  expect(m != nullptr, "spmm: null matrix");
  expect(m->rows() == m->cols(), "spmm: matrix must be square (and symmetric)");
  expect(m->cols() == node(x).value.rows(), "spmm: inner dims differ");
  Var r = make((*m) * node(x).value, node(x).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, m, x, r]() { accum(x, (*m) * node(r).grad); };
  return r;
}

Var Tape::proj_ball(Var a) {
  const Matrix& x = node(a).value;
  const double limit = 1.0 - kProjEps;
  const Eigen::Index n = x.rows();
  auto scales = std::make_shared<Eigen::VectorXd>(n);
  bool any = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = x.row(i).norm();
    if (norm >= limit) {
      (*scales)(i) = limit / norm;
      any = true;
    } else {
      (*scales)(i) = 1.0;
    }
  }
  Matrix out = any ? (x.array().colwise() * scales->array()).matrix() : x;
  Var r = make(std::move(out), node(a).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, a, r, scales]() {
      Matrix ga = node(r).grad;
      for (Eigen::Index i = 0; i < ga.rows(); ++i) {
        const double s = (*scales)(i);
        if (s == 1.0) continue;
        // y = s(x) x with s = limit/|x|: J = s (I - xx^T/|x|^2).
        const auto xi = node(a).value.row(i);
        const double sq = xi.squaredNorm();
        ga.row(i) = s * (ga.row(i) - (ga.row(i).dot(xi) / sq) * xi);
      }
      accum(a, ga);
    };
  return r;
}

// ---- fused geometry kernels ------------------------------------------------------

Var Tape::pairwise_sqdist(Geometry geo, Var x) {
  const Matrix& xv = node(x).value;
  switch (geo) {
    case Geometry::euclidean: {
      Var r = make(euclid_pairwise_sq(xv), node(x).requires_grad);
      if (node(r).requires_grad)
        node(r).backward = [this, x, r]() {
          const Matrix e = node(r).grad + node(r).grad.transpose();
          const Eigen::VectorXd t = e.rowwise().sum();
          accum(x, 2.0 * ((node(x).value.array().colwise() * t.array()).matrix() -
                          e * node(x).value));
        };
      return r;
    }
    case Geometry::lorentz: {
      const Matrix xg = lorentz_gflip(xv);
      auto e = std::make_shared<Matrix>(((xv * xg.transpose()).array() - 1.0).max(0.0));
      Matrix d2 = e->unaryExpr([](double ee) { return hgad::acosh_sq(1.0 + ee); });
      d2.diagonal().setZero();
      Var r = make(std::move(d2), node(x).requires_grad);
      if (node(r).requires_grad)
        node(r).backward = [this, x, r, e]() {
          Matrix f = node(r).grad.cwiseProduct(
              e->binaryExpr(node(r).value, &acosh_sq_grad_from));
          f.diagonal().setZero();
          accum(x, (f + f.transpose()) * lorentz_gflip(node(x).value));
        };
      return r;
    }
    case Geometry::poincare: {
      const Matrix sq = euclid_pairwise_sq(xv);
      auto c = std::make_shared<Eigen::VectorXd>(
          (1.0 - xv.rowwise().squaredNorm().array()).max(kNormGuard));
      auto e = std::make_shared<Matrix>(2.0 * sq);
      e->array().colwise() /= c->array();
      e->array().rowwise() /= c->transpose().array();
      Matrix d2 = e->unaryExpr([](double ee) { return hgad::acosh_sq(1.0 + ee); });
      d2.diagonal().setZero();
      Var r = make(std::move(d2), node(x).requires_grad);
      if (node(r).requires_grad)
        node(r).backward = [this, x, r, e, c]() {
          const Matrix& xv2 = node(x).value;
          Matrix f = node(r).grad.cwiseProduct(
              e->binaryExpr(node(r).value, &acosh_sq_grad_from));
          f.diagonal().setZero();
          // Through the squared Euclidean distances.
          Matrix w = 2.0 * f;
          w.array().colwise() /= c->array();
          w.array().rowwise() /= c->transpose().array();
          const Matrix esym = w + w.transpose();
          const Eigen::VectorXd t1 = esym.rowwise().sum();
          Matrix gx = 2.0 * ((xv2.array().colwise() * t1.array()).matrix() - esym * xv2);
          // Through the conformal factors c_i = 1 - |x_i|^2.
          const Matrix fe = f.cwiseProduct(*e);
          const Eigen::VectorXd t2 =
              (fe.rowwise().sum() + fe.colwise().sum().transpose()).array() * 2.0 /
              c->array();
          gx += (xv2.array().colwise() * t2.array()).matrix();
          accum(x, gx);
        };
      return r;
    }
  }
  throw std::logic_error("pairwise_sqdist: unhandled geometry");
}

Var Tape::rowwise_dist_to_rows(Geometry geo, const Matrix* target, Var x) {
  expect(target != nullptr, "rowwise_dist_to_rows: null target");
  const Matrix& xv = node(x).value;
  expect(target->rows() == xv.rows() && target->cols() == xv.cols(),
         "rowwise_dist_to_rows: shape mismatch");
  switch (geo) {
    case Geometry::euclidean: {
      Var r = make((xv - *target).rowwise().norm(), node(x).requires_grad);
      if (node(r).requires_grad)
        node(r).backward = [this, x, r, target]() {
          const Eigen::ArrayXd d = node(r).value.col(0).array().max(kNormGuard);
          const Eigen::ArrayXd w = node(r).grad.col(0).array() / d;
          accum(x, ((node(x).value - *target).array().colwise() * w).matrix());
        };
      return r;
    }
    case Geometry::lorentz: {
      const Matrix tg = lorentz_gflip(*target);
      auto u = std::make_shared<Eigen::VectorXd>(
          xv.cwiseProduct(tg).rowwise().sum());
      Var r = make(u->unaryExpr([](double uu) { return hgad::acosh_c(uu); }),
                   node(x).requires_grad);
      if (node(r).requires_grad)
        node(r).backward = [this, x, r, target, u]() {
          const Eigen::ArrayXd w =
              node(r).grad.col(0).array() *
              u->unaryExpr([](double uu) { return hgad::acosh_grad_guarded(uu); }).array();
          accum(x, (lorentz_gflip(*target).array().colwise() * w).matrix());
        };
      return r;
    }
    case Geometry::poincare: {
      auto c0 = std::make_shared<Eigen::VectorXd>(
          (1.0 - target->rowwise().squaredNorm().array()).max(kNormGuard));
      auto ch = std::make_shared<Eigen::VectorXd>(
          (1.0 - xv.rowwise().squaredNorm().array()).max(kNormGuard));
      auto arg = std::make_shared<Eigen::VectorXd>(
          1.0 + 2.0 * (xv - *target).rowwise().squaredNorm().array() /
                    (c0->array() * ch->array()));
      Var r = make(arg->unaryExpr([](double a) { return hgad::acosh_c(a); }),
                   node(x).requires_grad);
      if (node(r).requires_grad)
        node(r).backward = [this, x, r, target, c0, ch, arg]() {
          const Eigen::ArrayXd ag =
              node(r).grad.col(0).array() *
              arg->unaryExpr([](double a) { return hgad::acosh_grad_guarded(a); }).array();
          const Eigen::ArrayXd w1 = ag * 4.0 / (c0->array() * ch->array());
          const Eigen::ArrayXd w2 = ag * (arg->array() - 1.0) * 2.0 / ch->array();
          accum(x, ((node(x).value - *target).array().colwise() * w1).matrix() +
                       (node(x).value.array().colwise() * w2).matrix());
        };
      return r;
    }
  }
  throw std::logic_error("rowwise_dist_to_rows: unhandled geometry");
}

Var Tape::structural_row_loss(Var sqdist, const Matrix* conn_mask, double radius,
                              double temp) {
  expect(conn_mask != nullptr, "structural_row_loss: null mask");
  const Matrix& d2 = node(sqdist).value;
  const Eigen::Index n = d2.rows();
  expect(d2.cols() == n, "structural_row_loss: sqdist must be square");
  expect(conn_mask->rows() == n && conn_mask->cols() == n,
         "structural_row_loss: mask shape mismatch");
  expect((conn_mask->diagonal().array() == 1.0).all(),
         "structural_row_loss: mask diagonal must be 1 (self-links)");
  expect(temp > 0.0, "structural_row_loss: temp must be positive");

  const Eigen::ArrayXd nconn = conn_mask->rowwise().sum();
  const Eigen::ArrayXd ndisc = static_cast<double>(n) - nconn;
  auto invc = std::make_shared<Eigen::ArrayXd>(1.0 / nconn);  // nconn >= 1 (diagonal)
  auto invd = std::make_shared<Eigen::ArrayXd>(
      (ndisc > 0.0).select(1.0 / ndisc.max(1.0), Eigen::ArrayXd::Zero(n)));

  const Matrix eta = ((d2.array() - radius) / temp).matrix();
  // softplus(eta) elementwise; softplus(-eta) = softplus(eta) - eta.
  const Matrix sp =
      (eta.array().max(0.0) + (-eta.array().abs()).exp().log1p()).matrix();
  const Eigen::ArrayXd conn_term =
      conn_mask->cwiseProduct(sp).rowwise().sum().array() * (*invc);
  const Eigen::ArrayXd disc_term =
      ((sp - eta).rowwise().sum().array() -
       conn_mask->cwiseProduct(sp - eta).rowwise().sum().array()) *
      (*invd);
  Var r = make((conn_term + disc_term).matrix(), node(sqdist).requires_grad);
  if (node(r).requires_grad)
    node(r).backward = [this, sqdist, r, conn_mask, invc, invd, radius, temp]() {
      const Eigen::ArrayXd g = node(r).grad.col(0).array();
      const Eigen::ArrayXd wc = g * (*invc) / temp;
      const Eigen::ArrayXd wd = g * (*invd) / temp;
      const Matrix s = ((node(sqdist).value.array() - radius) / temp)
                           .unaryExpr([](double v) { return hgad::sigmoid(v); })
                           .matrix();
      // d row(i) / d d2_ij is wc_i*s_ij for linked j and -wd_i*(1-s_ij) for
      // unlinked j; expanding (1-mask)(1-s) avoids materializing 1-mask:
      //   gd2 = colscale(mask.*s, wc-wd) + colscale(mask+s, wd) - rowbroadcast(wd)
      Matrix gd2 =
          (conn_mask->cwiseProduct(s).array().colwise() * (wc - wd)).matrix();
      gd2 += ((conn_mask->array() + s.array()).colwise() * wd).matrix();
      gd2.array().colwise() -= wd;
      accum(sqdist, gd2);
    };
  return r;
}

}  // namespace hgad::ad
