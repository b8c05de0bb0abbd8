#include "hgad/verify.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "hgad/autodiff.hpp"
#include "hgad/eval.hpp"
#include "hgad/graph.hpp"
#include "hgad/manifold.hpp"
#include "hgad/mathfn.hpp"
#include "hgad/network.hpp"
#include "hgad/rng.hpp"
#include "hgad/training.hpp"

namespace hgad {

namespace {

class Checker {
 public:
  explicit Checker(std::string name) { res_.name = std::move(name); }

  void check(bool ok, const std::string& what) {
    ++res_.checks;
    if (!ok) res_.failures.push_back(what);
  }

  void close(double got, double want, double tol, const std::string& what) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": got " << got << ", want " << want << " (tol " << tol << ")";
    check(std::abs(got - want) <= tol, os.str());
  }

  template <class F>
  void throws(F&& f, const std::string& what) {
    bool threw = false;
    try {
      std::forward<F>(f)();
    } catch (const std::exception&) {
      threw = true;
    }
    check(threw, what + ": expected an exception");
  }

  SuiteResult take() { return std::move(res_); }

 private:
  SuiteResult res_;
};

Vec random_unit(Rng& rng, int dim) {
  Vec x(dim);
  for (;;) {
    for (int i = 0; i < dim; ++i) x(i) = rng.normal();
    const double n = x.norm();
    if (n > 1e-6) return x / n;
  }
}

}  // namespace

SuiteResult verify_reconstruction_gap() {
  Checker c("reconstruction-gap");

  {  // pinned values of the worked instance
    const auto v = lemma1_oracle(9, 10);
    c.close(v[0], 0.0, 1e-6, "bottleneck normal error (9,10)");
    c.close(v[1], 1.0, 1e-6, "bottleneck outlier error (9,10)");
    c.close(v[2], 0.1414214, 1e-6, "mean-ae normal error (9,10)");
    c.close(v[3], 1.2727922, 1e-6, "mean-ae outlier error (9,10)");
  }

  // closed forms against reconstructions computed from explicit instances
  const std::pair<int, int> instances[] = {{9, 10}, {6, 10}, {7, 13}, {3, 4}, {10, 10}};
  for (const auto& [n1, nv] : instances) {
    Mat x = Mat::Zero(nv, 2);
    for (int i = 0; i < nv; ++i) x(i, i < n1 ? 0 : 1) = 1.0;
    const Vec normal = Vec::Unit(2, 0), outlier = Vec::Unit(2, 1);
    const auto want = lemma1_oracle(n1, nv);
    const std::string tag = "(" + std::to_string(n1) + "," + std::to_string(nv) + ")";

    // best rank-1 projection = top principal direction of the gram matrix
    Eigen::SelfAdjointEigenSolver<Mat> es(x.transpose() * x);
    const Vec u = es.eigenvectors().col(1);
    c.close((normal - u * u.dot(normal)).norm(), want[0], 1e-9, "bottleneck normal " + tag);
    c.close((outlier - u * u.dot(outlier)).norm(), want[1], 1e-9, "bottleneck outlier " + tag);

    // fully oversmoothed reconstruction = the mean feature
    const Vec mean = x.colwise().mean();
    c.close((normal - mean).norm(), want[2], 1e-12, "mean-ae normal " + tag);
    c.close((outlier - mean).norm(), want[3], 1e-12, "mean-ae outlier " + tag);
  }

  c.throws([] { lemma1_oracle(5, 10); }, "reject n_normal = n_v/2");
  c.throws([] { lemma1_oracle(11, 10); }, "reject n_normal > n_v");
  c.throws([] { lemma1_oracle(0, 0); }, "reject empty instance");
  return c.take();
}

SuiteResult verify_distance_ordering(int pairs, std::uint64_t seed) {
  Checker c("distance-ordering");
  Rng rng(seed);

  int exempt = 0;
  for (int k = 0; k < pairs; ++k) {
    const int dim = 2 + static_cast<int>(rng.below(63));
    const Vec x = random_unit(rng, dim), y = random_unit(rng, dim);
    const double de = (x - y).norm();
    const double dl =
        dist(Geometry::lorentz, exp_map_origin(Geometry::lorentz, x), exp_map_origin(Geometry::lorentz, y));
    const double db = dist(Geometry::poincare, exp_map_origin(Geometry::poincare, x),
                           exp_map_origin(Geometry::poincare, y));
    std::ostringstream tag;
    tag.precision(17);
    tag << "pair " << k << " dim " << dim << " dot " << x.dot(y) << ": de=" << de << " dl=" << dl
        << " db=" << db;
    c.check(de <= dl + 1e-9 && dl <= db + 1e-9, "weak ordering violated at " + tag.str());
    if (x.dot(y) <= -1.0 + 1e-6) {  // margins legitimately collapse near antipodes
      ++exempt;
      continue;
    }
    c.check(dl - de > 1e-9 && db - dl > 1e-9, "strict margin violated at " + tag.str());
  }
  c.check(exempt < pairs / 100 + 8, "near-antipodal exemptions should be rare");

  // exact antipodes: the euclidean/lorentz gap closes, the ball stays apart
  for (const int dim : {2, 5, 33, 64}) {
    const Vec x = random_unit(rng, dim), y = -x;
    const double de = (x - y).norm();
    const double dl =
        dist(Geometry::lorentz, exp_map_origin(Geometry::lorentz, x), exp_map_origin(Geometry::lorentz, y));
    const double db = dist(Geometry::poincare, exp_map_origin(Geometry::poincare, x),
                           exp_map_origin(Geometry::poincare, y));
    c.close(de, 2.0, 1e-12, "antipodal euclidean distance");
    c.check(std::abs(dl - de) < 1e-9, "antipodal collapse dim " + std::to_string(dim));
    c.check(db - dl > 1e-9, "ball stays strictly larger at antipodes dim " + std::to_string(dim));
    c.close(dl, 2.0, 1e-9, "antipodal hyperboloid closed form");
    c.close(db, 4.0, 1e-6, "antipodal ball closed form");
  }

  {  // worked orthogonal unit pair, pinned to high-precision constants
    const Vec e1 = Vec::Unit(2, 0), e2 = Vec::Unit(2, 1);
    const double de = (e1 - e2).norm();
    const double dl = dist(Geometry::lorentz, exp_map_origin(Geometry::lorentz, e1),
                           exp_map_origin(Geometry::lorentz, e2));
    const double db = dist(Geometry::poincare, exp_map_origin(Geometry::poincare, e1),
                           exp_map_origin(Geometry::poincare, e2));
    c.close(de, std::sqrt(2.0), 1e-12, "orthogonal pair euclidean");
    c.close(dl, 1.51337400659650396, 1e-6, "orthogonal pair hyperboloid");
    c.close(db, 3.34190244818927644, 1e-6, "orthogonal pair ball");
  }
  return c.take();
}

SuiteResult verify_geometry(std::uint64_t seed) {
  Checker c("geometry");
  Rng rng(seed);
  const int n = 8, d = 5;

  for (const Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    const std::string gs = to_string(geo);
    Mat v(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) v(i, j) = 0.8 * rng.normal();
    const Mat x = exp_map_origin_rows(geo, v);

    for (int i = 0; i < n; ++i) {
      std::string why;
      c.check(on_manifold(geo, Vec(x.row(i)), 1e-9, &why), gs + " exp row on manifold: " + why);
    }
    c.close((log_map_origin_rows(geo, x) - v).cwiseAbs().maxCoeff(), 0.0, 1e-9,
            gs + " log(exp) roundtrip");
    c.close((exp_map_origin(geo, Vec(v.row(0))) - Vec(x.row(0))).norm(), 0.0, 1e-12,
            gs + " row/vector exp agree");

    const Vec a = x.row(0), b = x.row(1), e = x.row(2);
    c.close(dist(geo, a, a), 0.0, 1e-9, gs + " d(x,x)");
    c.close(dist(geo, a, b), dist(geo, b, a), 1e-12, gs + " symmetry");
    c.check(dist(geo, a, e) <= dist(geo, a, b) + dist(geo, b, e) + 1e-9, gs + " triangle");

    const Vec lg = log_map(geo, a, b);
    c.close((exp_map(geo, a, lg) - b).norm(), 0.0, 1e-8, gs + " exp(log) at a base point");

    const Mat cent = centralize_rows(geo, x);
    for (int i = 0; i < n; ++i) {
      std::string why;
      c.check(on_manifold(geo, Vec(cent.row(i)), 1e-9, &why),
              gs + " centralized row on manifold: " + why);
    }
    if (geo == Geometry::euclidean) {
      c.close(cent.colwise().mean().cwiseAbs().maxCoeff(), 0.0, 1e-12, "euclidean centered mean");
      c.close((centralize_rows(geo, cent) - cent).cwiseAbs().maxCoeff(), 0.0, 1e-9,
              "euclidean centralize idempotent");
    }
    if (geo == Geometry::poincare) {
      c.close(log_map_origin_rows(geo, cent).colwise().mean().cwiseAbs().maxCoeff(), 0.0, 1e-9,
              "ball centered tangent mean");
      c.close((centralize_rows(geo, cent) - cent).cwiseAbs().maxCoeff(), 0.0, 1e-9,
              "ball centralize idempotent");
    }

    // tape compositions reproduce the plain kernels
    ad::Tape t;
    c.close((t.value(maps::exp_origin(t, geo, t.constant(v))) - x).cwiseAbs().maxCoeff(), 0.0,
            1e-12, gs + " tape exp bridge");
    c.close((t.value(maps::log_origin(t, geo, t.constant(x))) - log_map_origin_rows(geo, x))
                .cwiseAbs()
                .maxCoeff(),
            0.0, 1e-12, gs + " tape log bridge");
    c.close((t.value(maps::centralize(t, geo, t.constant(x))) - cent).cwiseAbs().maxCoeff(), 0.0,
            1e-12, gs + " tape centralize bridge");
  }

  {  // hyperboloid specifics: centroid and transport isometry
    Mat v(n, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) v(i, j) = 0.6 * rng.normal();
    const Mat x = exp_map_origin_rows(Geometry::lorentz, v);
    std::string why;
    const Vec mu = lorentz_centroid(x);
    c.check(on_manifold(Geometry::lorentz, mu, 1e-9, &why), "centroid on manifold: " + why);

    Vec vo = Vec::Zero(d + 1);
    for (int j = 1; j <= d; ++j) vo(j) = rng.normal();
    const Vec o = lorentz_origin(d), to = x.row(0);
    const Vec pt = parallel_transport(Geometry::lorentz, o, to, vo);
    c.close(minkowski_inner(pt, pt), minkowski_inner(vo, vo), 1e-9, "transport preserves norm");
    c.close(minkowski_inner(to, pt), 0.0, 1e-9, "transported vector is tangent");
    c.close((parallel_transport(Geometry::lorentz, to, o, pt) - vo).norm(), 0.0, 1e-9,
            "transport round trip");
  }

  {  // ball specifics: conformal transport and gyro identities
    const Vec y = exp_map_origin(Geometry::poincare, Vec(0.7 * random_unit(rng, d)));
    Vec vo(d);
    for (int j = 0; j < d; ++j) vo(j) = rng.normal();
    const Vec zero = Vec::Zero(d);
    const Vec pt = parallel_transport(Geometry::poincare, zero, y, vo);
    const double lam_y = 2.0 / (1.0 - y.squaredNorm());
    c.close(2.0 * vo.norm(), lam_y * pt.norm(), 1e-9, "conformal transport isometry");
    c.close((parallel_transport(Geometry::poincare, y, zero, pt) - vo).norm(), 0.0, 1e-9,
            "conformal transport round trip");

    const Vec p = exp_map_origin(Geometry::poincare, Vec(0.5 * random_unit(rng, d)));
    c.close((mobius_add(-p, mobius_add(p, y)) - y).norm(), 0.0, 1e-12, "left cancellation");
    c.close((mobius_add(zero, y) - y).norm(), 0.0, 1e-15, "zero is the identity");
    c.check(mobius_add(p, y).norm() < 1.0, "addition stays in the ball");
    c.close((mobius_matvec(Mat::Identity(d, d), p) - p).norm(), 0.0, 1e-12,
            "identity matrix action");
    Vec p3 = Vec::Zero(2);
    p3(0) = 0.3;
    c.close(mobius_matvec(2.0 * Mat::Identity(2, 2), p3)(0), 0.550458715596330275, 1e-12,
            "doubling action pinned value");
  }
  return c.take();
}

namespace {

Graph gradcheck_instance() {
  Rng rng(7);
  const int n = 12, d = 6;
  Graph g;
  g.adj.resize(n);
  g.x.resize(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) g.x(i, j) = 0.5 * rng.normal();
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (rng.uniform() < 0.3) g.add_edge(u, v);
  g.check_consistent();
  return g;
}

}  // namespace

SuiteResult verify_gradcheck(const std::string& geometry) {
  Checker c("gradcheck");
  const Graph g = gradcheck_instance();
  for (const Geometry geo : {Geometry::euclidean, Geometry::lorentz, Geometry::poincare}) {
    if (!geometry.empty() && geo != geometry_from_string(geometry)) continue;
    for (const bool mp : {false, true}) {
      for (const double alpha : {0.0, 0.5}) {
        ModelConfig mc;
        mc.geometry = geo;
        mc.hidden_dim = 4;
        mc.message_passing = mp;
        TrainConfig tc;
        tc.alpha = alpha;
        const GradCheckReport rep = grad_check(g, mc, tc, 11);
        std::ostringstream tag;
        tag.precision(6);
        tag << to_string(geo) << (mp ? "+mp" : "") << " alpha=" << alpha << ": max rel err "
            << rep.max_rel_err << " at " << rep.worst;
        c.check(rep.pass(1e-4), tag.str());
      }
    }
  }
  return c.take();
}

namespace {

double auc_oracle(const Eigen::VectorXd& s, const std::vector<int>& y) {
  double num = 0.0;
  long np = 0, nn = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (y[static_cast<std::size_t>(i)] != 1) continue;
    ++np;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (y[static_cast<std::size_t>(j)] == 1) continue;
      if (s(i) > s(j))
        num += 1.0;
      else if (s(i) == s(j))
        num += 0.5;
    }
  }
  for (int l : y)
    if (l != 1) ++nn;
  return num / (static_cast<double>(np) * static_cast<double>(nn));
}

double ap_oracle(const Eigen::VectorXd& s, const std::vector<int>& y) {
  std::vector<double> thresholds(s.data(), s.data() + s.size());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  long pos = 0;
  for (int l : y)
    if (l == 1) ++pos;
  double ap = 0.0, prev_recall = 0.0;
  for (const double t : thresholds) {
    long tp = 0, pred = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) >= t) {
        ++pred;
        if (y[static_cast<std::size_t>(i)] == 1) ++tp;
      }
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(pred);
    const double recall = static_cast<double>(tp) / static_cast<double>(pos);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

}  // namespace

SuiteResult verify_metrics(int cases, std::uint64_t seed) {
  Checker c("metrics");
  Rng rng(seed);

  for (int k = 0; k < cases; ++k) {
    const int n = 2 + static_cast<int>(rng.below(11));
    Eigen::VectorXd s(n);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (;;) {
      bool pos = false, neg = false;
      for (int i = 0; i < n; ++i) {
        s(i) = static_cast<double>(rng.below(7)) / 2.0;  // heavy ties on purpose
        y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
        (y[static_cast<std::size_t>(i)] ? pos : neg) = true;
      }
      if (pos && neg) break;
    }
    c.close(roc_auc(s, y), auc_oracle(s, y), 1e-12, "auc case " + std::to_string(k));
    c.close(average_precision(s, y), ap_oracle(s, y), 1e-12, "ap case " + std::to_string(k));
  }

  // every label pattern up to n = 8 over a fixed tied score vector
  for (int n = 2; n <= 8; ++n) {
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s(i) = static_cast<double>((i * 3) % 5) / 2.0;
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<int> y(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = (mask >> i) & 1u;
      const std::string tag = "n=" + std::to_string(n) + " mask=" + std::to_string(mask);
      c.close(roc_auc(s, y), auc_oracle(s, y), 1e-12, "auc " + tag);
      c.close(average_precision(s, y), ap_oracle(s, y), 1e-12, "ap " + tag);
    }
  }

  {  // rank-only invariances on tie-free scores
    const int n = 20;
    Eigen::VectorXd s(n);
    std::vector<int> y(n);
    bool pos = false, neg = false;
    for (int i = 0; i < n; ++i) {
      s(i) = rng.uniform();
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng.below(2));
      (y[static_cast<std::size_t>(i)] ? pos : neg) = true;
    }
    if (!pos) y[0] = 1;
    if (!neg) y[1] = 0;
    const Eigen::VectorXd warped = (3.0 * s).array() + 2.0;
    c.close(roc_auc(s, y), roc_auc(warped, y), 1e-12, "auc monotone-transform invariance");
    c.close(average_precision(s, y), average_precision(warped, y), 1e-12,
            "ap monotone-transform invariance");
    c.close(roc_auc(s, y) + roc_auc(Eigen::VectorXd(-s), y), 1.0, 1e-12,
            "tie-free score negation complements auc");
  }
  return c.take();
}

std::vector<SuiteResult> verify_all(const std::string& only) {
  std::vector<SuiteResult> out;
  const auto want = [&](const char* name) {
    return only.empty() || std::string(name).find(only) != std::string::npos;
  };
  if (want("reconstruction-gap")) out.push_back(verify_reconstruction_gap());
  if (want("distance-ordering")) out.push_back(verify_distance_ordering());
  if (want("geometry")) out.push_back(verify_geometry());
  if (want("gradcheck")) out.push_back(verify_gradcheck());
  if (want("metrics")) out.push_back(verify_metrics());
  return out;
}

}  // namespace hgad
