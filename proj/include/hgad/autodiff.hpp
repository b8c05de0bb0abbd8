#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "hgad/manifold.hpp"
#include "hgad/mathfn.hpp"

namespace hgad::ad {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Handle to a node on a Tape. Valid only for the tape that created it and
// only until the next clear().
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense matrices. A training step records the loss
// graph (leaves are `input` for parameters, `constant` for data), calls
// backward() once on a 1x1 output, reads grads and clears the tape.
//
// Every primitive documents its value; the pullbacks are hand-derived and are
// covered by finite-difference tests. Raw pointers passed to spmm /
// rowwise_dist_to_rows / structural_row_loss are caller-owned and must stay
// alive until after backward().
class Tape {
 public:
  Var input(Matrix value);     // differentiable leaf
  Var constant(Matrix value);  // non-differentiable leaf

  const Matrix& value(Var v) const { return node(v).value; }
  bool requires_grad(Var v) const { return node(v).requires_grad; }
  Matrix grad(Var v) const;  // zeros when v never received a gradient
  void backward(Var scalar_out);
  void clear() { nodes_.clear(); }
  std::size_t size() const { return nodes_.size(); }

  // ---- elementwise and scalar broadcast -------------------------------
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);
  Var cdiv(Var a, Var b);
  Var scale(Var a, double k);
  Var add_const(Var a, double k);
  Var scale_var(Var a, Var k);       // k is 1x1, broadcast multiply
  Var add_scalar_var(Var a, Var k);  // k is 1x1, broadcast add
  Var clip_min(Var a, double lo);    // max(a, lo); no gradient through clipped entries

  // ---- named elementwise functions (stable forms from mathfn.hpp) ------
  Var relu(Var a);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var exp(Var a);
  Var sqrt(Var a);  // sqrt(max(a, 0)) with guarded derivative
  Var inv(Var a);
  Var softplus(Var a);
  Var atanh_c(Var a);
  Var acoshc(Var a);
  Var cosh_sqrt(Var a);
  Var sinhc_sqrt(Var a);
  Var tanhc_sqrt(Var a);
  Var atanhc_sqrt(Var a);

  // ---- shape and linear algebra ----------------------------------------
  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);             // a * b^T
  Var add_rowvec(Var a, Var r);            // r is 1 x d
  Var sub_rowvec(Var a, Var r);
  Var row_scale(Var a, Var s);             // s is n x 1
  Var hcat(Var a, Var b);
  Var slice_cols(Var a, int first, int count);
  Var rowwise_sqnorm(Var a);               // n x 1
  Var rowwise_sum(Var a);                  // n x 1
  Var rowwise_dot(Var a, Var b);           // n x 1
  Var colwise_sum(Var a);                  // 1 x d
  Var colwise_mean(Var a);                 // 1 x d
  Var sum_all(Var a);                      // 1 x 1

  // Sparse premix; `a` must be symmetric (the pullback reuses it).
  Var spmm(const SparseMatrix* a, Var x);

  // Poincare ball projection: rows with norm >= 1 - kProjEps are rescaled to
  // that radius; clipped rows use the exact rescaling Jacobian s(I - xx^T/|x|^2).
  Var proj_ball(Var a);

  // ---- fused geometry kernels -------------------------------------------
  // Squared-distance matrix of the rows of x (diagonal exactly 0). The
  // pullback ignores the constant diagonal.
  Var pairwise_sqdist(Geometry geo, Var x);

  // d(target_i, x_i) per row. Distance (not squared): non-smooth where the
  // rows coincide, guarded like acosh_grad_guarded.
  Var rowwise_dist_to_rows(Geometry geo, const Matrix* target, Var x);

  // Per-node structural reconstruction loss from a squared-distance matrix:
  //   row(i) = mean_{j: conn} softplus((d2_ij - radius)/temp)
  //          + mean_{j: disc} softplus(-(d2_ij - radius)/temp)
  // conn_mask is n x n of {0,1} with ones on the diagonal (a node counts as
  // linked to itself); a class with no members contributes zero.
  Var structural_row_loss(Var sqdist, const Matrix* conn_mask, double radius, double temp);

  // Generic elementwise op; fwd and grad_fn are double -> double, where
  // grad_fn(x) = f'(x).
  template <class F, class G>
  Var cwise(Var a, F fwd, G grad_fn) {
    Var r = make(node(a).value.unaryExpr(fwd), node(a).requires_grad);
    if (node(a).requires_grad) {
      nodes_[static_cast<std::size_t>(r.id)].backward = [this, a, r, grad_fn]() {
        accum(a, node(r).grad.cwiseProduct(node(a).value.unaryExpr(grad_fn)));
      };
    }
    return r;
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;  // empty until touched by the sweep
    bool requires_grad = false;
    std::function<void()> backward;  // empty for leaves / constant subgraphs
  };

  const Node& node(Var v) const { return nodes_[static_cast<std::size_t>(v.id)]; }
  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  Var make(Matrix value, bool requires_grad);

  // grad(a) += g, skipping non-differentiable nodes.
  template <class E>
  void accum(Var a, const E& g) {
    Node& n = node(a);
    if (!n.requires_grad) return;
    if (n.grad.size() == 0)
      n.grad = g;
    else
      n.grad += g;
  }

  std::vector<Node> nodes_;
};

}  // namespace hgad::ad
