#include "hgad/manifold.hpp"

#include <cmath>
#include <stdexcept>

#include "hgad/mathfn.hpp"

namespace hgad {

namespace {

// Column scaling (+1, -1, ..., -1): (X g X^T)_ij = -<x_i, x_j>_L.
Mat neg_minkowski_gram(const Mat& pts) {
  Mat xg = pts;
  xg.rightCols(xg.cols() - 1) *= -1.0;
  return xg * pts.transpose();
}

Vec row_sqnorms(const Mat& m) { return m.rowwise().squaredNorm(); }

}  // namespace

Geometry geometry_from_string(const std::string& s) {
  if (s == "euclidean") return Geometry::euclidean;
  if (s == "lorentz") return Geometry::lorentz;
  if (s == "poincare") return Geometry::poincare;
  throw std::invalid_argument("unknown geometry: " + s);
}

std::string to_string(Geometry g) {
  switch (g) {
    case Geometry::euclidean: return "euclidean";
    case Geometry::lorentz: return "lorentz";
    case Geometry::poincare: return "poincare";
  }
  return "?";
}

double minkowski_inner(const Vec& u, const Vec& v) {
  return -u(0) * v(0) + u.tail(u.size() - 1).dot(v.tail(v.size() - 1));
}

double dist(Geometry geo, const Vec& x, const Vec& y) {
  switch (geo) {
    case Geometry::euclidean:
      return (x - y).norm();
    case Geometry::lorentz:
      return acosh_c(-minkowski_inner(x, y));
    case Geometry::poincare: {
      const double cx = std::max(1.0 - x.squaredNorm(), kNormGuard);
      const double cy = std::max(1.0 - y.squaredNorm(), kNormGuard);
      return acosh_c(1.0 + 2.0 * (x - y).squaredNorm() / (cx * cy));
    }
  }
  return 0.0;
}

Mat exp_map_origin_rows(Geometry geo, const Mat& v) {
  switch (geo) {
    case Geometry::euclidean:
      return v;
    case Geometry::lorentz: {
      const Vec u = row_sqnorms(v);
      Mat out(v.rows(), v.cols() + 1);
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        out(i, 0) = cosh_sqrt(u(i));
        out.row(i).tail(v.cols()) = sinhc_sqrt(u(i)) * v.row(i);
      }
      return out;
    }
    case Geometry::poincare: {
      Mat out(v.rows(), v.cols());
      for (Eigen::Index i = 0; i < v.rows(); ++i) {
        const double nrm = v.row(i).norm();
        if (nrm < kNormGuard)
          out.row(i) = v.row(i);
        else
          out.row(i) = std::tanh(nrm) / nrm * v.row(i);
      }
      return out;
    }
  }
  return v;
}

Mat log_map_origin_rows(Geometry geo, const Mat& y) {
  switch (geo) {
    case Geometry::euclidean:
      return y;
    case Geometry::lorentz: {
      Mat out(y.rows(), y.cols() - 1);
      for (Eigen::Index i = 0; i < y.rows(); ++i)
        out.row(i) = acoshc(y(i, 0)) * y.row(i).tail(y.cols() - 1);
      return out;
    }
    case Geometry::poincare: {
      Mat out(y.rows(), y.cols());
      for (Eigen::Index i = 0; i < y.rows(); ++i) {
        const double nrm = y.row(i).norm();
        if (nrm < kNormGuard)
          out.row(i) = y.row(i);
        else
          out.row(i) = atanh_c(nrm) / nrm * y.row(i);
      }
      return out;
    }
  }
  return y;
}

Vec exp_map_origin(Geometry geo, const Vec& v) {
  return exp_map_origin_rows(geo, v.transpose()).row(0);
}

Vec log_map_origin(Geometry geo, const Vec& y) {
  return log_map_origin_rows(geo, y.transpose()).row(0);
}

Vec exp_map(Geometry geo, const Vec& base, const Vec& v) {
  switch (geo) {
    case Geometry::euclidean:
      return base + v;
    case Geometry::lorentz: {
      const double usq = std::max(minkowski_inner(v, v), 0.0);
      return cosh_sqrt(usq) * base + sinhc_sqrt(usq) * v;
    }
    case Geometry::poincare: {
      const double nrm = v.norm();
      if (nrm < kNormGuard) return base;
      const double lam = 2.0 / std::max(1.0 - base.squaredNorm(), kNormGuard);
      return mobius_add(base, std::tanh(lam * nrm / 2.0) / nrm * v);
    }
  }
  return v;
}

Vec log_map(Geometry geo, const Vec& base, const Vec& y) {
  switch (geo) {
    case Geometry::euclidean:
      return y - base;
    case Geometry::lorentz: {
      const double psi = -minkowski_inner(base, y);
      return acoshc(psi) * (y - psi * base);
    }
    case Geometry::poincare: {
      const Vec w = mobius_add(-base, y);
      const double nrm = w.norm();
      if (nrm < kNormGuard) return Vec::Zero(w.size());
      const double lam = 2.0 / std::max(1.0 - base.squaredNorm(), kNormGuard);
      return (2.0 / lam) * atanh_c(nrm) / nrm * w;
    }
  }
  return y;
}

Vec parallel_transport(Geometry geo, const Vec& from, const Vec& to, const Vec& v) {
  switch (geo) {
    case Geometry::euclidean:
      return v;
    case Geometry::lorentz: {
      // Closed form of the two-log expression; exact and regular at from == to.
      const double denom = 1.0 - minkowski_inner(from, to);
      return v + minkowski_inner(to, v) / denom * (from + to);
    }
    case Geometry::poincare: {
      const bool from_origin = from.norm() < kNormGuard;
      const bool to_origin = to.norm() < kNormGuard;
      if (!from_origin && !to_origin)
        throw std::invalid_argument("poincare parallel_transport: one endpoint must be the origin");
      if (from_origin && to_origin) return v;
      // lambda_o / lambda_x = 1 - ||x||^2 (and its reciprocal for x -> o).
      if (from_origin) return (1.0 - to.squaredNorm()) * v;
      return v / std::max(1.0 - from.squaredNorm(), kNormGuard);
    }
  }
  return v;
}

Vec mobius_add(const Vec& x, const Vec& y) {
  const double xy = x.dot(y);
  const double x2 = x.squaredNorm();
  const double y2 = y.squaredNorm();
  const double den = 1.0 + 2.0 * xy + x2 * y2;
  return ((1.0 + 2.0 * xy + y2) * x + (1.0 - x2) * y) / (std::abs(den) < kNormGuard ? kNormGuard : den);
}

Vec mobius_matvec(const Mat& m, const Vec& x) {
  const Vec mx = m * x;
  const double a = mx.norm();
  const double b = x.norm();
  if (a < kNormGuard || b < kNormGuard) return Vec::Zero(m.rows());
  return std::tanh(a / b * atanh_c(b)) / a * mx;
}

Vec project(Geometry geo, const Vec& x) {
  switch (geo) {
    case Geometry::euclidean:
      return x;
    case Geometry::poincare: {
      const double nrm = x.norm();
      if (nrm < 1.0 - kProjEps) return x;
      return (1.0 - kProjEps) / std::max(nrm, kNormGuard) * x;
    }
    case Geometry::lorentz: {
      Vec out = x;
      out(0) = std::sqrt(1.0 + x.tail(x.size() - 1).squaredNorm());
      return out;
    }
  }
  return x;
}

Mat project_rows(Geometry geo, const Mat& x) {
  Mat out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = project(geo, Vec(x.row(i)));
  return out;
}

Vec lorentz_origin(int d) {
  Vec o = Vec::Zero(d + 1);
  o(0) = 1.0;
  return o;
}

Vec lorentz_centroid(const Mat& pts) {
  const Vec s = pts.colwise().sum();
  const double q = std::abs(minkowski_inner(s, s));
  return project(Geometry::lorentz, Vec(s / std::sqrt(std::max(q, kNormGuard))));
}

Mat centralize_rows(Geometry geo, const Mat& pts) {
  switch (geo) {
    case Geometry::euclidean:
      return pts.rowwise() - pts.colwise().mean();
    case Geometry::poincare: {
      Mat t = log_map_origin_rows(geo, pts);
      t.rowwise() -= t.colwise().mean();
      return project_rows(geo, exp_map_origin_rows(geo, t));
    }
    case Geometry::lorentz: {
      const Vec mu = lorentz_centroid(pts);
      const Eigen::Index d = pts.cols() - 1;
      // psi_i = -<mu, x_i>_L
      Vec gmu = mu;
      gmu.tail(d) *= -1.0;
      const Vec psi = pts * gmu;
      Mat tangent(pts.rows(), d);
      for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        const Vec v = acoshc(psi(i)) * (pts.row(i).transpose() - psi(i) * mu);
        // transport mu -> origin: v + <o,v>_L/(1 - <mu,o>_L) * (mu + o); the
        // resulting time coordinate is identically zero, so keep the tail.
        const double coef = -v(0) / (1.0 + mu(0));
        Vec w = v + coef * mu;
        w(0) += coef;  // + coef * o
        tangent.row(i) = w.tail(d);
      }
      return exp_map_origin_rows(geo, tangent);
    }
  }
  return pts;
}

Mat pairwise_sqdist_matrix(Geometry geo, const Mat& pts) {
  const Eigen::Index n = pts.rows();
  Mat sq(n, n);
  switch (geo) {
    case Geometry::euclidean: {
      const Vec r = row_sqnorms(pts);
      sq = (r.replicate(1, n) + r.transpose().replicate(n, 1) - 2.0 * (pts * pts.transpose()))
               .cwiseMax(0.0);
      break;
    }
    case Geometry::lorentz: {
      sq = neg_minkowski_gram(pts).unaryExpr([](double u) { return acosh_sq(u); });
      break;
    }
    case Geometry::poincare: {
      const Vec c = (1.0 - row_sqnorms(pts).array()).max(kNormGuard).matrix();
      const Vec r = row_sqnorms(pts);
      Mat arg = (r.replicate(1, n) + r.transpose().replicate(n, 1) - 2.0 * (pts * pts.transpose()))
                    .cwiseMax(0.0);
      arg.array() *= 2.0 / (c * c.transpose()).array();
      sq = (1.0 + arg.array()).unaryExpr([](double u) { return acosh_sq(u); });
      break;
    }
  }
  sq.diagonal().setZero();
  return sq;
}

Mat pairwise_dist_matrix(Geometry geo, const Mat& pts) {
  return pairwise_sqdist_matrix(geo, pts).cwiseSqrt();
}

Vec rowwise_dist(Geometry geo, const Mat& a, const Mat& b) {
  Vec out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    out(i) = dist(geo, Vec(a.row(i)), Vec(b.row(i)));
  return out;
}

bool on_manifold(Geometry geo, const Vec& x, double tol, std::string* why) {
  if (!x.allFinite()) {
    if (why) *why = "non-finite coordinates";
    return false;
  }
  switch (geo) {
    case Geometry::euclidean:
      return true;
    case Geometry::lorentz: {
      const double q = minkowski_inner(x, x);
      if (std::abs(q + 1.0) > tol) {
        if (why) *why = "Minkowski norm " + std::to_string(q) + " != -1";
        return false;
      }
      if (x(0) <= 0.0) {
        if (why) *why = "non-positive time coordinate";
        return false;
      }
      return true;
    }
    case Geometry::poincare: {
      if (x.norm() >= 1.0) {
        if (why) *why = "norm " + std::to_string(x.norm()) + " outside the open unit ball";
        return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace hgad
