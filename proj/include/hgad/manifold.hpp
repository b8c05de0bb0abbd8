#pragma once

#include <Eigen/Dense>
#include <string>

namespace hgad {

// Supported embedding geometries, all with curvature -1 for the curved pair:
//   euclidean - plain R^d
//   lorentz   - hyperboloid {x : <x,x>_L = -1, x_0 > 0}; points carry an extra
//               leading time coordinate (ambient dim = d+1)
//   poincare  - open unit ball {x : ||x|| < 1}
enum class Geometry { euclidean, lorentz, poincare };

Geometry geometry_from_string(const std::string& s);
std::string to_string(Geometry g);

// Ambient point dimension for a given tangent/feature dimension.
inline int point_dim(Geometry geo, int d) { return geo == Geometry::lorentz ? d + 1 : d; }

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---- bilinear forms & distances -------------------------------------------

// Minkowski product -u0*v0 + sum_i ui*vi.
double minkowski_inner(const Vec& u, const Vec& v);

double dist(Geometry geo, const Vec& x, const Vec& y);

// ---- maps at the origin (batch rows) ---------------------------------------
// Tangent coordinates at the origin are d-dimensional for every geometry; the
// lorentz maps add/remove the time coordinate.

Mat exp_map_origin_rows(Geometry geo, const Mat& v);
Mat log_map_origin_rows(Geometry geo, const Mat& y);
Vec exp_map_origin(Geometry geo, const Vec& v);
Vec log_map_origin(Geometry geo, const Vec& y);

// ---- maps at an arbitrary base point ---------------------------------------
// Lorentz vectors are ambient (d+1); the tangent space at base is the
// Minkowski-orthogonal complement of base.

Vec exp_map(Geometry geo, const Vec& base, const Vec& v);
Vec log_map(Geometry geo, const Vec& base, const Vec& y);

// Parallel transport of tangent vector v from `from` to `to`. The poincare
// variant is only defined for transports involving the origin (from or to at 0).
Vec parallel_transport(Geometry geo, const Vec& from, const Vec& to, const Vec& v);

// ---- gyrovector operations (poincare ball) ---------------------------------

Vec mobius_add(const Vec& x, const Vec& y);
Vec mobius_matvec(const Mat& m, const Vec& x);

// ---- projections ------------------------------------------------------------
// poincare: rows with norm >= 1-kProjEps are rescaled onto that radius.
// lorentz: the time coordinate is recomputed from the spatial part.

Vec project(Geometry geo, const Vec& x);
Mat project_rows(Geometry geo, const Mat& x);

// ---- aggregation -------------------------------------------------------------

Vec lorentz_origin(int d);  // (1, 0, ..., 0) with d spatial coordinates

// Minkowski-normalized mean: S/sqrt(|<S,S>_L|) with S the row sum.
Vec lorentz_centroid(const Mat& pts);

// Re-centers a batch of points: euclidean subtracts the mean; poincare recenters
// log_o coordinates; lorentz transports each log_mu(x) to the origin, where mu
// is the batch centroid.
Mat centralize_rows(Geometry geo, const Mat& pts);

// ---- batched distances --------------------------------------------------------

Mat pairwise_dist_matrix(Geometry geo, const Mat& pts);
Mat pairwise_sqdist_matrix(Geometry geo, const Mat& pts);
Vec rowwise_dist(Geometry geo, const Mat& a, const Mat& b);

// ---- diagnostics ---------------------------------------------------------------

// True when x satisfies the manifold constraints within tol; reason reported
// through `why` when given.
bool on_manifold(Geometry geo, const Vec& x, double tol, std::string* why = nullptr);

}  // namespace hgad
