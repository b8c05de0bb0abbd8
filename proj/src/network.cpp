#include "hgad/network.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "hgad/mathfn.hpp"

namespace hgad {

using ad::Matrix;
using ad::Tape;
using ad::Var;

// ---- differentiable geometry maps -------------------------------------------

namespace maps {

Var exp_origin(Tape& t, Geometry geo, Var v) {
  switch (geo) {
    case Geometry::euclidean:
      return v;
    case Geometry::poincare:
      return t.row_scale(v, t.tanhc_sqrt(t.rowwise_sqnorm(v)));
    case Geometry::lorentz: {
      const Var u = t.rowwise_sqnorm(v);
      return t.hcat(t.cosh_sqrt(u), t.row_scale(v, t.sinhc_sqrt(u)));
    }
  }
  throw std::logic_error("exp_origin: unknown geometry");
}

Var log_origin(Tape& t, Geometry geo, Var x) {
  switch (geo) {
    case Geometry::euclidean:
      return x;
    case Geometry::poincare:
      return t.row_scale(x, t.atanhc_sqrt(t.rowwise_sqnorm(x)));
    case Geometry::lorentz: {
      const int d = static_cast<int>(t.value(x).cols()) - 1;
      return t.row_scale(t.slice_cols(x, 1, d), t.acoshc(t.slice_cols(x, 0, 1)));
    }
  }
  throw std::logic_error("log_origin: unknown geometry");
}

Var centralize(Tape& t, Geometry geo, Var x) {
  switch (geo) {
    case Geometry::euclidean:
      return t.sub_rowvec(x, t.colwise_mean(x));
    case Geometry::poincare: {
      const Var v = log_origin(t, geo, x);
      return t.proj_ball(exp_origin(t, geo, t.sub_rowvec(v, t.colwise_mean(v))));
    }
    case Geometry::lorentz: {
      const int d = static_cast<int>(t.value(x).cols()) - 1;
      // centroid mu = S / sqrt(-<S,S>_L) with S the column sum
      const Var s = t.colwise_sum(x);
      const Var s_time = t.slice_cols(s, 0, 1);
      const Var s_sp = t.slice_cols(s, 1, d);
      const Var msq = t.sub(t.rowwise_sqnorm(s_sp), t.rowwise_sqnorm(s_time));
      const Var mu = t.scale_var(s, t.inv(t.sqrt(t.clip_min(t.scale(msq, -1.0), kNormGuard))));
      const Var mu_time = t.slice_cols(mu, 0, 1);
      const Var mu_sp = t.slice_cols(mu, 1, d);
      // log_mu(x) = acoshc(psi) (x - psi mu), psi = -<x,mu>_L
      const Var gmu = t.hcat(mu_time, t.scale(mu_sp, -1.0));
      const Var psi = t.matmul_nt(x, gmu);
      const Var v = t.row_scale(t.sub(x, t.matmul(psi, mu)), t.acoshc(psi));
      // transport to the origin o: v + <o,v>_L / (1 - <mu,o>_L) (mu + o)
      const Var coef =
          t.scale(t.scale_var(t.slice_cols(v, 0, 1), t.inv(t.add_const(mu_time, 1.0))), -1.0);
      Matrix origin_row = Matrix::Zero(1, d + 1);
      origin_row(0, 0) = 1.0;
      const Var w = t.add(v, t.matmul(coef, t.add(mu, t.constant(origin_row))));
      return exp_origin(t, geo, t.slice_cols(w, 1, d));
    }
  }
  throw std::logic_error("centralize: unknown geometry");
}

Var mobius_matvec_rows(Tape& t, Var x, Var w) {
  const double guard_sq = kNormGuard * kNormGuard;
  const Var a = t.sqrt(t.clip_min(t.rowwise_sqnorm(x), guard_sq));
  const Var wx = t.matmul_nt(x, w);
  const Var bn = t.sqrt(t.clip_min(t.rowwise_sqnorm(wx), guard_sq));
  const Var arg = t.cmul(t.cdiv(bn, a), t.atanh_c(a));
  return t.row_scale(wx, t.cdiv(t.tanh(arg), bn));
}

Var mobius_add_row(Tape& t, Var x, Var u) {
  const Var nu2 = t.rowwise_sqnorm(u);        // 1 x 1
  const Var nx2 = t.rowwise_sqnorm(x);        // n x 1
  const Var two_dot = t.scale(t.matmul_nt(x, u), 2.0);
  const Var num1 = t.add_scalar_var(two_dot, t.add_const(nu2, 1.0));  // 1 + 2<x,u> + |u|^2
  const Var coef2 = t.add_const(t.scale(nx2, -1.0), 1.0);             // 1 - |x|^2
  const Var den = t.add_const(t.add(two_dot, t.scale_var(nx2, nu2)), 1.0);
  return t.row_scale(t.add(t.row_scale(x, num1), t.matmul(coef2, u)),
                     t.inv(t.clip_min(den, kNormGuard)));
}

}  // namespace maps

// ---- model ---------------------------------------------------------------------

namespace {

Matrix scalar_matrix(double x) {
  Matrix m(1, 1);
  m(0, 0) = x;
  return m;
}

void init_layer(LayerParams& p, int out, int in_ambient, bool lorentz, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_ambient));
  p.w.resize(out, in_ambient);
  for (int i = 0; i < out; ++i)
    for (int j = 0; j < in_ambient; ++j) p.w(i, j) = rng.uniform(-bound, bound);
  p.b = Eigen::RowVectorXd::Zero(out);
  if (lorentz) {
    p.v.resize(in_ambient);
    for (int j = 0; j < in_ambient; ++j) p.v(j) = rng.uniform(-bound, bound);
  } else {
    p.v.resize(0);
  }
  p.bprime = 0.0;
  p.log_lambda = 0.0;
}

}  // namespace

Model Model::init(const ModelConfig& config, Rng& rng) {
  if (config.in_dim <= 0 || config.hidden_dim <= 0)
    throw std::invalid_argument("Model::init: dimensions must be positive");
  if (config.dropout < 0.0 || config.dropout >= 1.0)
    throw std::invalid_argument("Model::init: dropout must be in [0, 1)");
  Model m;
  m.config = config;
  const bool lor = config.geometry == Geometry::lorentz;
  const int nx = config.in_dim, h = config.hidden_dim;
  const auto ambient = [&](int d) { return lor ? d + 1 : d; };
  init_layer(m.enc1, h, ambient(nx), lor, rng);
  init_layer(m.enc2, h, ambient(h), lor, rng);
  init_layer(m.sdec, h, ambient(h), lor, rng);
  init_layer(m.cdec1, h, ambient(h), lor, rng);
  init_layer(m.cdec2, nx, ambient(h), lor, rng);
  return m;
}

std::array<LayerParams*, 5> Model::blocks() { return {&enc1, &enc2, &sdec, &cdec1, &cdec2}; }

std::array<const LayerParams*, 5> Model::blocks() const {
  return {&enc1, &enc2, &sdec, &cdec1, &cdec2};
}

const char* Model::block_name(int i) {
  static const char* names[5] = {"enc1", "enc2", "sdec", "cdec1", "cdec2"};
  if (i < 0 || i >= 5) throw std::out_of_range("Model::block_name");
  return names[i];
}

ad::SparseMatrix premix_matrix(const Graph& g) {
  std::vector<int> all(static_cast<std::size_t>(g.num_nodes()));
  std::iota(all.begin(), all.end(), 0);
  return premix_matrix(g, all);
}

ad::SparseMatrix premix_matrix(const Graph& g, const std::vector<int>& nodes) {
  const int n = static_cast<int>(nodes.size());
  std::vector<int> local(static_cast<std::size_t>(g.num_nodes()), -1);
  for (int i = 0; i < n; ++i) {
    const int u = nodes[static_cast<std::size_t>(i)];
    if (u < 0 || u >= g.num_nodes()) throw std::invalid_argument("premix_matrix: node out of range");
    if (local[static_cast<std::size_t>(u)] != -1)
      throw std::invalid_argument("premix_matrix: duplicate node in subset");
    local[static_cast<std::size_t>(u)] = i;
  }
  // degree-plus-one of the induced subgraph
  std::vector<double> dinv(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    int deg = 0;
    for (int v : g.adj[static_cast<std::size_t>(nodes[static_cast<std::size_t>(i)])])
      if (local[static_cast<std::size_t>(v)] != -1) ++deg;
    dinv[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<double>(deg + 1));
  }
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 4);
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, dinv[static_cast<std::size_t>(i)] * dinv[static_cast<std::size_t>(i)]);
    for (int v : g.adj[static_cast<std::size_t>(nodes[static_cast<std::size_t>(i)])]) {
      const int j = local[static_cast<std::size_t>(v)];
      if (j != -1)
        trip.emplace_back(i, j, dinv[static_cast<std::size_t>(i)] * dinv[static_cast<std::size_t>(j)]);
    }
  }
  ad::SparseMatrix a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

ModelVars insert_params(Tape& t, const Model& m) {
  const bool lor = m.config.geometry == Geometry::lorentz;
  ModelVars vars;
  auto blocks = m.blocks();
  auto slots = vars.blocks();
  for (int i = 0; i < 5; ++i) {
    const LayerParams& p = *blocks[static_cast<std::size_t>(i)];
    LayerVars& v = *slots[static_cast<std::size_t>(i)];
    v.w = t.input(p.w);
    v.b = t.input(p.b);
    if (lor) {
      v.v = t.input(p.v);
      v.bprime = t.input(scalar_matrix(p.bprime));
      v.log_lambda = t.input(scalar_matrix(p.log_lambda));
    }
  }
  return vars;
}

namespace {

// One feature transform, before centralization.
Var linear_block(Tape& t, Geometry geo, const LayerVars& p, Var x) {
  switch (geo) {
    case Geometry::euclidean:
      return t.relu(t.add_rowvec(t.matmul_nt(x, p.w), p.b));
    case Geometry::lorentz: {
      // spatial part lambda sigmoid(v.x + b') (Wx + b)/|Wx + b|, time recomputed
      const Var s = t.add_rowvec(t.matmul_nt(x, p.w), p.b);
      const Var snorm = t.sqrt(t.clip_min(t.rowwise_sqnorm(s), kNormGuard * kNormGuard));
      const Var gate = t.scale_var(t.sigmoid(t.add_scalar_var(t.matmul_nt(x, p.v), p.bprime)),
                                   t.exp(p.log_lambda));
      const Var h = t.row_scale(s, t.cdiv(gate, snorm));
      return t.hcat(t.sqrt(t.add_const(t.rowwise_sqnorm(h), 1.0)), h);
    }
    case Geometry::poincare: {
      // mobius w-action, mobius bias, then relu in tangent coordinates
      const Var y = t.proj_ball(maps::mobius_matvec_rows(t, x, p.w));
      const Var u = t.row_scale(p.b, t.tanhc_sqrt(t.rowwise_sqnorm(p.b)));
      const Var z = t.proj_ball(maps::mobius_add_row(t, y, u));
      return t.proj_ball(maps::exp_origin(t, geo, t.relu(maps::log_origin(t, geo, z))));
    }
  }
  throw std::logic_error("linear_block: unknown geometry");
}

Var apply_premix(Tape& t, Geometry geo, Var x, const ad::SparseMatrix* premix) {
  if (geo == Geometry::euclidean) return t.spmm(premix, x);
  return maps::exp_origin(t, geo, t.spmm(premix, maps::log_origin(t, geo, x)));
}

Var dropout_tangent(Tape& t, Geometry geo, Var x, double rate, Rng& rng) {
  const Var v = maps::log_origin(t, geo, x);
  const Matrix& vm = t.value(v);
  const double keep = 1.0 - rate;
  Matrix mask(vm.rows(), vm.cols());
  for (Eigen::Index i = 0; i < vm.rows(); ++i)
    for (Eigen::Index j = 0; j < vm.cols(); ++j)
      mask(i, j) = rng.uniform() < rate ? 0.0 : 1.0 / keep;
  return maps::exp_origin(t, geo, t.cmul(v, t.constant(std::move(mask))));
}

}  // namespace

ForwardTrace forward(Tape& t, const Model& m, const ModelVars& vars,
                     const Eigen::MatrixXd& features, const ForwardOptions& opt) {
  const Geometry geo = m.config.geometry;
  if (features.cols() != m.config.in_dim)
    throw std::invalid_argument("forward: feature dimension mismatch");
  if (m.config.message_passing && opt.premix == nullptr)
    throw std::invalid_argument("forward: message passing requires a premix operator");
  const bool dropout = opt.training && m.config.dropout > 0.0;
  if (dropout && opt.rng == nullptr)
    throw std::invalid_argument("forward: dropout requires an rng");

  ForwardTrace trace;
  auto x0 = std::make_shared<Eigen::MatrixXd>(exp_map_origin_rows(geo, features));
  trace.x0 = x0;

  const auto checked = [&](Var v, const char* name) {
    if (!t.value(v).allFinite())
      throw std::runtime_error(std::string("forward: non-finite activations after block ") + name);
    return v;
  };
  const auto encoder_block = [&](Var x, const LayerVars& p, const char* name) {
    if (m.config.message_passing) x = apply_premix(t, geo, x, opt.premix);
    x = maps::centralize(t, geo, linear_block(t, geo, p, x));
    if (dropout) x = dropout_tangent(t, geo, x, m.config.dropout, *opt.rng);
    return checked(x, name);
  };
  const auto decoder_block = [&](Var x, const LayerVars& p, const char* name) {
    return checked(maps::centralize(t, geo, linear_block(t, geo, p, x)), name);
  };

  const Var input = t.constant(*x0);
  trace.latent = encoder_block(encoder_block(input, vars.enc1, "enc1"), vars.enc2, "enc2");
  trace.hs = decoder_block(trace.latent, vars.sdec, "sdec");
  if (opt.need_xhat)
    trace.xhat = decoder_block(decoder_block(trace.latent, vars.cdec1, "cdec1"), vars.cdec2, "cdec2");
  return trace;
}

std::array<double, 4> lemma1_oracle(int n_normal, int n_v) {
  if (n_v < 1 || 2 * n_normal <= n_v || n_normal > n_v)
    throw std::invalid_argument("lemma1_oracle: need n_v/2 < n_normal <= n_v");
  const double f = static_cast<double>(n_normal) / static_cast<double>(n_v);
  const double s2 = std::sqrt(2.0);
  return {0.0, 1.0, s2 * (1.0 - f), s2 * f};
}

// ---- checkpoints ------------------------------------------------------------

namespace {

void push_le_double(std::string& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof(bits));
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t sw = 0;
    for (int i = 0; i < 8; ++i) sw = (sw << 8) | ((bits >> (8 * i)) & 0xff);
    bits = sw;
  }
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double read_le_double(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | p[i];
  double x;
  std::memcpy(&x, &bits, sizeof(x));
  return x;
}

}  // namespace

void save_checkpoint(const std::string& path, const Model& m) {
  nlohmann::json header;
  header["format"] = "hgad-checkpoint";
  header["version"] = 1;
  header["geometry"] = to_string(m.config.geometry);
  header["in_dim"] = m.config.in_dim;
  header["hidden_dim"] = m.config.hidden_dim;
  header["message_passing"] = m.config.message_passing;
  header["dropout"] = m.config.dropout;
  nlohmann::json blocks = nlohmann::json::array();
  auto bl = m.blocks();
  for (int i = 0; i < 5; ++i)
    blocks.push_back({{"name", Model::block_name(i)},
                      {"w_rows", bl[static_cast<std::size_t>(i)]->w.rows()},
                      {"w_cols", bl[static_cast<std::size_t>(i)]->w.cols()}});
  header["blocks"] = blocks;

  const bool lor = m.config.geometry == Geometry::lorentz;
  std::string payload;
  for (const LayerParams* p : bl) {
    for (Eigen::Index i = 0; i < p->w.rows(); ++i)
      for (Eigen::Index j = 0; j < p->w.cols(); ++j) push_le_double(payload, p->w(i, j));
    for (Eigen::Index j = 0; j < p->b.size(); ++j) push_le_double(payload, p->b(j));
    if (lor) {
      for (Eigen::Index j = 0; j < p->v.size(); ++j) push_le_double(payload, p->v(j));
      push_le_double(payload, p->bprime);
      push_le_double(payload, p->log_lambda);
    }
  }

  const std::string hs = header.dump();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path);
  const std::uint32_t len = static_cast<std::uint32_t>(hs.size());
  char lenb[4];
  for (int i = 0; i < 4; ++i) lenb[i] = static_cast<char>((len >> (8 * i)) & 0xff);
  out.write(lenb, 4);
  out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 4) throw std::runtime_error("load_checkpoint: truncated file " + path);
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data());
  std::uint32_t len = 0;
  for (int i = 3; i >= 0; --i) len = (len << 8) | raw[i];
  if (bytes.size() < 4 + static_cast<std::size_t>(len))
    throw std::runtime_error("load_checkpoint: truncated header in " + path);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(4, len));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("load_checkpoint: bad header: ") + e.what());
  }
  if (header.value("format", "") != "hgad-checkpoint" || header.value("version", 0) != 1)
    throw std::runtime_error("load_checkpoint: unsupported format in " + path);

  ModelConfig cfg;
  cfg.geometry = geometry_from_string(header.at("geometry").get<std::string>());
  cfg.in_dim = header.at("in_dim").get<int>();
  cfg.hidden_dim = header.at("hidden_dim").get<int>();
  cfg.message_passing = header.at("message_passing").get<bool>();
  cfg.dropout = header.at("dropout").get<double>();

  Model m;
  m.config = cfg;
  const bool lor = cfg.geometry == Geometry::lorentz;
  std::size_t pos = 4 + static_cast<std::size_t>(len);
  const auto take = [&]() {
    if (pos + 8 > bytes.size()) throw std::runtime_error("load_checkpoint: truncated payload");
    const double x = read_le_double(raw + pos);
    pos += 8;
    return x;
  };
  const auto& shapes = header.at("blocks");
  if (!shapes.is_array() || shapes.size() != 5)
    throw std::runtime_error("load_checkpoint: expected 5 blocks");
  auto bl = m.blocks();
  for (int bi = 0; bi < 5; ++bi) {
    LayerParams& p = *bl[static_cast<std::size_t>(bi)];
    const auto& sh = shapes[static_cast<std::size_t>(bi)];
    const int rows = sh.at("w_rows").get<int>(), cols = sh.at("w_cols").get<int>();
    p.w.resize(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) p.w(i, j) = take();
    p.b.resize(rows);
    for (int j = 0; j < rows; ++j) p.b(j) = take();
    if (lor) {
      p.v.resize(cols);
      for (int j = 0; j < cols; ++j) p.v(j) = take();
      p.bprime = take();
      p.log_lambda = take();
    }
  }
  if (pos != bytes.size()) throw std::runtime_error("load_checkpoint: trailing bytes in " + path);
  return m;
}

}  // namespace hgad
