// Command-line front end for the hgad library.
//
// Subcommands:
//   inject       perturb a dataset with synthetic outliers and write the result
//   train-score  train a detector (or run a baseline scorer) over several
//                trials and report ranking metrics
//   verify       run the library's property/self-check suites
//
// Configuration is accepted both as flags and as a single JSON run-spec file
// (--run-spec); flags passed explicitly on the command line override run-spec
// values, which in turn override built-in defaults.  Every output file is
// written under the output directory (--out; defaults to $HGAD_OUTPUT_DIR or
// the current directory).  Reruns with the same seeds reproduce byte-identical
// metric files.
//
// Exit codes: 0 success, 1 runtime/verification failure, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hgad/eval.hpp"
#include "hgad/graph.hpp"
#include "hgad/injection.hpp"
#include "hgad/manifold.hpp"
#include "hgad/network.hpp"
#include "hgad/rng.hpp"
#include "hgad/training.hpp"
#include "hgad/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Post-parse argument problems (bad combinations, malformed run-spec values).
// Distinct from std::runtime_error so main can map them to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

// ---------------------------------------------------------------------------
// Option bundles (bound to CLI11 flags, optionally overlaid by the run-spec)
// ---------------------------------------------------------------------------

struct DatasetOptions {
  std::string cora_dir;
  std::string features_path;
  std::string edges_path;
  std::string labels_path;
  std::string normalize = "none";  // none | l1 | l2
};

struct InjectOptions {
  std::string kind;  // one of contextual/structural/path/dice, or a +/, list
  int o = 0;
  int q = 10;
  int s = 10;
  double p = 0.2;
  double r = 0.5;
};

struct ModelOptions {
  std::string geometry = "poincare";  // euclidean | lorentz | poincare
  int hidden = 32;
  bool message_passing = false;
  double dropout = 0.1;
};

struct LossOptions {
  double alpha = 0.0;
  double fermi_r = 0.0;
  double fermi_t = 1.0;
};

struct TrainOptions {
  int epochs = 300;
  double lr = 0.005;
  double weight_decay = 1e-3;
  int batch_size = 0;  // 0 = full batch
};

// Remembers the CLI11 option handles so the run-spec overlay can tell which
// values the user pinned on the command line (those always win).
class SpecOverlay {
 public:
  explicit SpecOverlay(const json& spec) : spec_(spec) {}

  template <class T>
  void take(const char* section, const char* key, const CLI::Option* opt, T& dst) const {
    if (opt != nullptr && opt->count() > 0) return;  // explicit flag wins
    const json* scope = &spec_;
    if (section != nullptr) {
      auto it = spec_.find(section);
      if (it == spec_.end()) return;
      scope = &*it;
    }
    auto it = scope->find(key);
    if (it == scope->end()) return;
    try {
      dst = it->get<T>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("run-spec: bad value for ") +
                       (section ? std::string(section) + "." : std::string()) + key + ": " +
                       e.what());
    }
  }

 private:
  const json& spec_;
};

json load_run_spec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw UsageError("run-spec: cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError("run-spec: " + std::string(e.what()));
  }
}

std::string default_output_dir() {
  const char* env = std::getenv("HGAD_OUTPUT_DIR");
  return (env != nullptr && *env != '\0') ? env : ".";
}

// ---------------------------------------------------------------------------
// Dataset loading
// ---------------------------------------------------------------------------

hgad::NormalizationMode parse_normalize(const std::string& s) {
  if (s == "none") return hgad::NormalizationMode::none;
  if (s == "l1") return hgad::NormalizationMode::l1_row;
  if (s == "l2") return hgad::NormalizationMode::l2_row;
  throw UsageError("--normalize: expected none, l1 or l2 (got '" + s + "')");
}

hgad::Graph load_dataset(const DatasetOptions& ds) {
  if (!ds.cora_dir.empty() && !ds.features_path.empty()) {
    throw UsageError("pass either --cora DIR or --features/--edges, not both");
  }
  hgad::LoadStats stats;
  hgad::Graph g;
  if (!ds.cora_dir.empty()) {
    g = hgad::load_cora(ds.cora_dir + "/cora.content", ds.cora_dir + "/cora.cites", &stats);
  } else if (!ds.features_path.empty()) {
    if (ds.edges_path.empty()) throw UsageError("--features requires --edges");
    g = hgad::load_edge_list(ds.features_path, ds.edges_path, &stats, ds.labels_path);
  } else {
    throw UsageError("no dataset: pass --cora DIR or --features F --edges E");
  }
  for (const auto& w : stats.warnings) std::cerr << "load: " << w << "\n";
  hgad::normalize_features(g, parse_normalize(ds.normalize));
  return g;
}

// ---------------------------------------------------------------------------
// Injection plumbing
// ---------------------------------------------------------------------------

// "contextual+structural" / "path,dice" -> kind list; the outlier budget o is
// split evenly across the listed kinds (and must divide evenly).
std::vector<std::pair<hgad::InjectionKind, int>> parse_kind_counts(const std::string& kind,
                                                                   int o) {
  std::vector<hgad::InjectionKind> kinds;
  std::string token;
  for (char c : kind + "+") {
    if (c == '+' || c == ',') {
      if (!token.empty()) {
        try {
          kinds.push_back(hgad::injection_kind_from_string(token));
        } catch (const std::invalid_argument& e) {
          throw UsageError(std::string("--kind: ") + e.what());
        }
        token.clear();
      }
    } else {
      token += c;
    }
  }
  if (kinds.empty()) throw UsageError("--kind: empty");
  if (o <= 0) throw UsageError("--o: need a positive outlier count");
  const int k = static_cast<int>(kinds.size());
  if (o % k != 0) {
    throw UsageError("--o: " + std::to_string(o) + " does not split evenly over " +
                     std::to_string(k) + " kinds");
  }
  std::vector<std::pair<hgad::InjectionKind, int>> counts;
  counts.reserve(kinds.size());
  for (auto kd : kinds) counts.emplace_back(kd, o / k);
  return counts;
}

hgad::InjectionParams make_params(const InjectOptions& inj) {
  hgad::InjectionParams p;
  p.o = inj.o;
  p.q = inj.q;
  p.s = inj.s;
  p.p = inj.p;
  p.r = inj.r;
  return p;
}

hgad::InjectionResult run_injection(hgad::Graph& g, const InjectOptions& inj,
                                    std::uint64_t seed) {
  auto counts = parse_kind_counts(inj.kind, inj.o);
  hgad::InjectionParams params = make_params(inj);
  hgad::Rng rng(seed);
  if (counts.size() == 1) {
    params.o = counts[0].second;
    switch (counts[0].first) {
      case hgad::InjectionKind::contextual: return hgad::inject_contextual(g, params, rng);
      case hgad::InjectionKind::structural: return hgad::inject_structural(g, params, rng);
      case hgad::InjectionKind::path: return hgad::inject_path(g, params, rng);
      case hgad::InjectionKind::dice: return hgad::inject_dice(g, params, rng);
    }
  }
  return hgad::inject_mixture(g, counts, params, rng);
}

// ---------------------------------------------------------------------------
// inject
// ---------------------------------------------------------------------------

struct InjectArgs {
  DatasetOptions ds;
  InjectOptions inj;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_inject(const InjectArgs& a) {
  hgad::Graph g = load_dataset(a.ds);
  hgad::InjectionResult res = run_injection(g, a.inj, a.seed);

  fs::path out(a.out);
  fs::create_directories(out);
  hgad::write_features_tsv((out / "features.tsv").string(), g.x);
  hgad::write_edge_list((out / "edges.tsv").string(), g);
  if (g.has_labels()) hgad::write_labels_tsv((out / "labels.tsv").string(), g.labels);
  hgad::write_labels_tsv((out / "outliers.tsv").string(), res.outlier_labels);
  open_out(out / "changes.json") << res.to_json(a.inj.kind, make_params(a.inj)) << "\n";

  for (const auto& w : res.warnings) std::cerr << "inject: " << w << "\n";
  std::cout << "injected " << res.outliers().size() << " outliers (" << a.inj.kind << ", seed "
            << a.seed << "): " << res.features_replaced.size() << " rows replaced, "
            << res.edges_added.size() << " edges added, " << res.edges_removed.size()
            << " edges removed\n"
            << "wrote " << (out / "features.tsv").string() << ", edges.tsv"
            << (g.has_labels() ? ", labels.tsv" : "") << ", outliers.tsv, changes.json\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train-score
// ---------------------------------------------------------------------------

struct TrainScoreArgs {
  DatasetOptions ds;
  InjectOptions inj;          // inj.kind empty -> use --outliers labels instead
  std::string outliers_path;  // pre-injected ground truth (one 0/1 per line)
  ModelOptions model;
  LossOptions loss;
  TrainOptions train;
  std::string baseline;  // "", norm, mlpae, gcnae
  int trials = 3;
  std::vector<std::uint64_t> seeds;
  int workers = 1;
  int dist_samples = 0;
  bool save_checkpoints = false;
  std::string out;
};

std::vector<int> read_binary_labels(const std::string& path, int n) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    int v = 0;
    try {
      v = std::stoi(line);
    } catch (const std::exception&) {
      throw std::runtime_error(path + ": expected one 0/1 per line, got '" + line + "'");
    }
    if (v != 0 && v != 1) throw std::runtime_error(path + ": labels must be 0 or 1");
    labels.push_back(v);
  }
  if (static_cast<int>(labels.size()) != n) {
    throw std::runtime_error(path + ": " + std::to_string(labels.size()) + " labels for " +
                             std::to_string(n) + " nodes");
  }
  return labels;
}

struct TrialOutput {
  std::uint64_t seed = 0;
  std::vector<double> scores;
  std::vector<int> labels;
  double auc = 0.0;
  double ap = 0.0;
  std::vector<hgad::EpochStats> curve;          // model runs only
  std::vector<std::pair<double, int>> samples;  // (distance, is_edge), on request
  bool has_model = false;
  hgad::Model model;
  bool aborted = false;
  std::string abort_reason;
  double seconds = 0.0;
};

hgad::ModelConfig make_model_config(const ModelOptions& mo, int in_dim) {
  hgad::ModelConfig mc;
  mc.geometry = hgad::geometry_from_string(mo.geometry);
  mc.in_dim = in_dim;
  mc.hidden_dim = mo.hidden;
  mc.message_passing = mo.message_passing;
  mc.dropout = mo.dropout;
  return mc;
}

hgad::TrainConfig make_train_config(const LossOptions& lo, const TrainOptions& to) {
  hgad::TrainConfig tc;
  tc.alpha = lo.alpha;
  tc.fermi_r = lo.fermi_r;
  tc.fermi_t = lo.fermi_t;
  tc.lr = to.lr;
  tc.weight_decay = to.weight_decay;
  tc.epochs = to.epochs;
  tc.batch_size = to.batch_size;
  return tc;
}

TrialOutput run_trial(const TrainScoreArgs& a, const hgad::Graph& base,
                      const std::vector<int>& fixed_labels, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  TrialOutput out;
  out.seed = seed;

  hgad::Graph g = base;
  if (!a.inj.kind.empty()) {
    out.labels = run_injection(g, a.inj, seed).outlier_labels;
  } else {
    out.labels = fixed_labels;
  }

  hgad::TrainConfig tcfg = make_train_config(a.loss, a.train);
  if (a.baseline == "norm") {
    Eigen::VectorXd s = hgad::norm_baseline_scores(g, a.loss.alpha);
    out.scores.assign(s.data(), s.data() + s.size());
  } else if (a.baseline == "mlpae") {
    out.scores = hgad::mlpae_baseline_scores(g, a.model.hidden, a.train.epochs, seed);
  } else if (a.baseline == "gcnae") {
    out.scores = hgad::gcnae_baseline_scores(g, a.model.hidden, a.train.epochs, seed);
  } else {
    hgad::ModelConfig mcfg = make_model_config(a.model, g.num_features());
    hgad::TrainResult tr = hgad::train(g, mcfg, tcfg, seed);
    out.curve = std::move(tr.curve);
    out.aborted = tr.aborted;
    out.abort_reason = tr.abort_reason;
    out.scores = hgad::score_nodes(g, tr.model, tcfg);
    out.has_model = true;
    out.model = std::move(tr.model);
    if (a.dist_samples > 0) {
      hgad::Rng rng(seed + 1);  // independent of the training stream
      out.samples = hgad::edge_distance_samples(g, out.model, a.dist_samples, rng);
    }
  }

  Eigen::Map<const Eigen::VectorXd> sv(out.scores.data(),
                                       static_cast<Eigen::Index>(out.scores.size()));
  out.auc = hgad::roc_auc(sv, out.labels);
  out.ap = hgad::average_precision(sv, out.labels);
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

void write_trial_files(const fs::path& out, const TrainScoreArgs& a, const TrialOutput& t) {
  {
    auto f = open_out(out / ("scores_" + std::to_string(t.seed) + ".tsv"));
    f << "node\tscore\toutlier\n";
    for (std::size_t i = 0; i < t.scores.size(); ++i) {
      f << i << "\t" << fmt_double(t.scores[i]) << "\t" << t.labels[i] << "\n";
    }
  }
  if (!t.curve.empty()) {
    auto f = open_out(out / ("loss_curve_" + std::to_string(t.seed) + ".csv"));
    f << "epoch,total,contextual,structural\n";
    for (std::size_t e = 0; e < t.curve.size(); ++e) {
      f << e + 1 << "," << fmt_double(t.curve[e].loss) << "," << fmt_double(t.curve[e].lc) << ","
        << fmt_double(t.curve[e].ls) << "\n";
    }
  }
  if (!t.samples.empty()) {
    auto f = open_out(out / ("dist_samples_" + std::to_string(t.seed) + ".csv"));
    f << "distance,is_edge\n";
    for (const auto& [d, e] : t.samples) f << fmt_double(d) << "," << e << "\n";
  }
  if (a.save_checkpoints && t.has_model) {
    hgad::save_checkpoint((out / ("checkpoint_" + std::to_string(t.seed) + ".bin")).string(),
                          t.model);
  }
}

void write_metrics(const fs::path& out, const std::vector<TrialOutput>& trials) {
  std::vector<double> aucs, aps;
  for (const auto& t : trials) {
    aucs.push_back(t.auc);
    aps.push_back(t.ap);
  }
  const hgad::Aggregate auc_agg = hgad::aggregate(aucs);
  const hgad::Aggregate ap_agg = hgad::aggregate(aps);

  {
    auto f = open_out(out / "metrics.csv");
    f << "metric,seed,value\n";
    auto block = [&](const char* name, const std::vector<double>& vals,
                     const hgad::Aggregate& agg) {
      for (std::size_t i = 0; i < vals.size(); ++i) {
        f << name << "," << trials[i].seed << "," << fmt_double(vals[i]) << "\n";
      }
      f << name << ",mean," << fmt_double(agg.mean) << "\n";
      f << name << ",std," << fmt_double(agg.std) << "\n";
    };
    block("roc_auc", aucs, auc_agg);
    block("average_precision", aps, ap_agg);
  }

  json j;
  j["trials"] = trials.size();
  for (const auto& t : trials) j["seeds"].push_back(t.seed);
  j["roc_auc"] = {{"values", aucs}, {"mean", auc_agg.mean}, {"std", auc_agg.std}};
  j["average_precision"] = {{"values", aps}, {"mean", ap_agg.mean}, {"std", ap_agg.std}};
  for (const auto& t : trials) {
    if (t.aborted) {
      j["aborted"].push_back({{"seed", t.seed}, {"reason", t.abort_reason}});
    }
  }
  open_out(out / "metrics.json") << j.dump(2) << "\n";
}

int cmd_train_score(const TrainScoreArgs& args) {
  TrainScoreArgs a = args;
  if (a.baseline != "" && a.baseline != "norm" && a.baseline != "mlpae" &&
      a.baseline != "gcnae") {
    throw UsageError("--baseline: expected norm, mlpae or gcnae (got '" + a.baseline + "')");
  }
  if (!a.inj.kind.empty() && !a.outliers_path.empty()) {
    throw UsageError("pass either an injection --kind or --outliers, not both");
  }
  if (a.inj.kind.empty() && a.outliers_path.empty()) {
    throw UsageError("no ground truth: pass an injection --kind or --outliers FILE");
  }
  if (!a.inj.kind.empty()) parse_kind_counts(a.inj.kind, a.inj.o);  // validate early
  if (a.seeds.empty()) {
    if (a.trials <= 0) throw UsageError("--trials: need a positive count");
    for (int i = 0; i < a.trials; ++i) a.seeds.push_back(static_cast<std::uint64_t>(i + 1));
  } else if (a.trials != static_cast<int>(a.seeds.size())) {
    throw UsageError("--seeds: got " + std::to_string(a.seeds.size()) + " seeds for " +
                     std::to_string(a.trials) + " trials");
  }

  const hgad::Graph base = load_dataset(a.ds);
  std::vector<int> fixed_labels;
  if (!a.outliers_path.empty()) {
    fixed_labels = read_binary_labels(a.outliers_path, base.num_nodes());
  }

  const int n_trials = static_cast<int>(a.seeds.size());
  std::vector<TrialOutput> results(static_cast<std::size_t>(n_trials));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_trials));

  // Worker pool over trials; progress lines are serialized through one mutex
  // and files are written by the main thread after all workers join.
  const int workers = std::max(1, std::min(a.workers, n_trials));
  std::atomic<int> next{0};
  std::mutex report_mx;
  auto work = [&]() {
    for (int i = next.fetch_add(1); i < n_trials; i = next.fetch_add(1)) {
      const auto idx = static_cast<std::size_t>(i);
      try {
        results[idx] = run_trial(a, base, fixed_labels, a.seeds[idx]);
        std::lock_guard<std::mutex> lock(report_mx);
        std::cout << "trial seed=" << a.seeds[idx] << "  roc_auc=" << results[idx].auc
                  << "  average_precision=" << results[idx].ap << "  (" << results[idx].seconds
                  << " s)" << (results[idx].aborted ? "  [aborted: " + results[idx].abort_reason + "]"
                                                    : "")
                  << std::endl;
      } catch (...) {
        errors[idx] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  fs::path out(a.out);
  fs::create_directories(out);
  for (const auto& t : results) write_trial_files(out, a, t);
  write_metrics(out, results);

  std::vector<double> aucs, aps;
  bool any_abort = false;
  for (const auto& t : results) {
    aucs.push_back(t.auc);
    aps.push_back(t.ap);
    any_abort = any_abort || t.aborted;
  }
  const hgad::Aggregate auc_agg = hgad::aggregate(aucs);
  const hgad::Aggregate ap_agg = hgad::aggregate(aps);
  std::cout << "roc_auc            mean=" << auc_agg.mean << "  std=" << auc_agg.std << "\n"
            << "average_precision  mean=" << ap_agg.mean << "  std=" << ap_agg.std << "\n"
            << "wrote " << (out / "metrics.csv").string() << ", metrics.json\n";
  if (any_abort) {
    std::cerr << "train-score: at least one trial aborted; see metrics.json\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyArgs {
  std::string only;
  std::string geometry;  // optional gradcheck filter
  int pairs = 10000;
  int cases = 1000;
  std::uint64_t seed = 1;
};

int cmd_verify(const VerifyArgs& a) {
  if (!a.geometry.empty()) hgad::geometry_from_string(a.geometry);  // validate
  auto want = [&](const char* name) {
    return a.only.empty() || std::string(name).find(a.only) != std::string::npos;
  };
  std::vector<hgad::SuiteResult> suites;
  if (want("reconstruction-gap")) suites.push_back(hgad::verify_reconstruction_gap());
  if (want("distance-ordering")) suites.push_back(hgad::verify_distance_ordering(a.pairs, a.seed));
  if (want("geometry")) suites.push_back(hgad::verify_geometry(a.seed));
  if (want("gradcheck")) suites.push_back(hgad::verify_gradcheck(a.geometry));
  if (want("metrics")) suites.push_back(hgad::verify_metrics(a.cases, a.seed));
  if (suites.empty()) {
    throw UsageError("--only '" + a.only +
                     "' matches no suite (reconstruction-gap, distance-ordering, geometry, "
                     "gradcheck, metrics)");
  }

  bool all_ok = true;
  for (const auto& s : suites) {
    std::cout << (s.ok() ? "[ OK ] " : "[FAIL] ") << s.name << "  " << s.checks << " checks";
    if (!s.ok()) std::cout << ", " << s.failures.size() << " failures";
    std::cout << "\n";
    for (const auto& f : s.failures) std::cout << "       " << f << "\n";
    all_ok = all_ok && s.ok();
  }
  return all_ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// Flag wiring
// ---------------------------------------------------------------------------

struct DatasetFlags {
  CLI::Option* cora = nullptr;
  CLI::Option* features = nullptr;
  CLI::Option* edges = nullptr;
  CLI::Option* labels = nullptr;
  CLI::Option* normalize = nullptr;
};

DatasetFlags add_dataset_flags(CLI::App* cmd, DatasetOptions& ds) {
  DatasetFlags f;
  f.cora = cmd->add_option("--cora", ds.cora_dir,
                           "Citation dataset directory (cora.content + cora.cites)");
  f.features = cmd->add_option("--features", ds.features_path, "Numeric feature TSV");
  f.edges = cmd->add_option("--edges", ds.edges_path, "Edge list ('u v' per line, 0-based)");
  f.labels = cmd->add_option("--labels", ds.labels_path, "Class-label file (one per node)");
  f.normalize = cmd->add_option("--normalize", ds.normalize, "Row normalization: none|l1|l2");
  return f;
}

void overlay_dataset(const SpecOverlay& ov, const DatasetFlags& f, DatasetOptions& ds) {
  ov.take("dataset", "cora", f.cora, ds.cora_dir);
  ov.take("dataset", "features", f.features, ds.features_path);
  ov.take("dataset", "edges", f.edges, ds.edges_path);
  ov.take("dataset", "labels", f.labels, ds.labels_path);
  ov.take("dataset", "normalize", f.normalize, ds.normalize);
}

struct InjectFlags {
  CLI::Option* kind = nullptr;
  CLI::Option* o = nullptr;
  CLI::Option* q = nullptr;
  CLI::Option* s = nullptr;
  CLI::Option* p = nullptr;
  CLI::Option* r = nullptr;
};

InjectFlags add_inject_flags(CLI::App* cmd, InjectOptions& inj) {
  InjectFlags f;
  f.kind = cmd->add_option("--kind", inj.kind,
                           "Outlier kind(s): contextual|structural|path|dice, '+'-separated "
                           "for an even mixture");
  f.o = cmd->add_option("--o", inj.o, "Total outlier count (split evenly across kinds)");
  f.q = cmd->add_option("--q", inj.q, "Reference candidates per node (contextual/path)");
  f.s = cmd->add_option("--s", inj.s, "Clique size (structural)");
  f.p = cmd->add_option("--p", inj.p, "Within-clique edge drop probability (structural)");
  f.r = cmd->add_option("--r", inj.r, "Disconnect ratio (dice)");
  return f;
}

void overlay_inject(const SpecOverlay& ov, const InjectFlags& f, InjectOptions& inj) {
  ov.take("inject", "kind", f.kind, inj.kind);
  ov.take("inject", "o", f.o, inj.o);
  ov.take("inject", "q", f.q, inj.q);
  ov.take("inject", "s", f.s, inj.s);
  ov.take("inject", "p", f.p, inj.p);
  ov.take("inject", "r", f.r, inj.r);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph anomaly detection via reconstruction autoencoders in euclidean, "
               "Lorentz and Poincare geometries"};
  app.require_subcommand(1);

  std::string run_spec_path;

  // ---- inject ----
  InjectArgs ia;
  ia.out = default_output_dir();
  CLI::App* inject = app.add_subcommand("inject", "Inject synthetic outliers into a dataset");
  CLI::Option* ia_spec = inject->add_option("--run-spec", run_spec_path, "JSON run-spec file");
  DatasetFlags ia_ds = add_dataset_flags(inject, ia.ds);
  InjectFlags ia_inj = add_inject_flags(inject, ia.inj);
  CLI::Option* ia_seed = inject->add_option("--seed", ia.seed, "Injection RNG seed");
  CLI::Option* ia_out = inject->add_option("--out", ia.out, "Output directory");

  // ---- train-score ----
  TrainScoreArgs ta;
  ta.out = default_output_dir();
  CLI::App* ts = app.add_subcommand(
      "train-score", "Train the detector (or a baseline) over trials and report metrics");
  CLI::Option* ts_spec = ts->add_option("--run-spec", run_spec_path, "JSON run-spec file");
  DatasetFlags ts_ds = add_dataset_flags(ts, ta.ds);
  InjectFlags ts_inj = add_inject_flags(ts, ta.inj);
  CLI::Option* ts_outliers = ts->add_option(
      "--outliers", ta.outliers_path, "Pre-injected 0/1 outlier labels (one per node line)");
  CLI::Option* ts_geometry =
      ts->add_option("--geometry", ta.model.geometry, "euclidean|lorentz|poincare");
  CLI::Option* ts_hidden = ts->add_option("--hidden", ta.model.hidden, "Hidden width");
  CLI::Option* ts_mp =
      ts->add_flag("--mp,!--no-mp", ta.model.message_passing, "Neighborhood aggregation on/off");
  CLI::Option* ts_dropout = ts->add_option("--dropout", ta.model.dropout, "Dropout rate [0,1)");
  CLI::Option* ts_alpha =
      ts->add_option("--alpha", ta.loss.alpha, "Loss/score mix: alpha*contextual + (1-alpha)*structural");
  CLI::Option* ts_fr = ts->add_option("--fermi-r", ta.loss.fermi_r, "Edge-probability radius");
  CLI::Option* ts_ft = ts->add_option("--fermi-t", ta.loss.fermi_t, "Edge-probability temperature");
  CLI::Option* ts_epochs = ts->add_option("--epochs", ta.train.epochs, "Training epochs");
  CLI::Option* ts_lr = ts->add_option("--lr", ta.train.lr, "Learning rate");
  CLI::Option* ts_wd = ts->add_option("--weight-decay", ta.train.weight_decay,
                                      "Decoupled weight decay on weight matrices");
  CLI::Option* ts_bs =
      ts->add_option("--batch-size", ta.train.batch_size, "Minibatch size (0 = full batch)");
  CLI::Option* ts_baseline =
      ts->add_option("--baseline", ta.baseline, "Baseline scorer instead of the model: "
                                                "norm|mlpae|gcnae");
  CLI::Option* ts_trials = ts->add_option("--trials", ta.trials, "Number of trials");
  CLI::Option* ts_seeds = ts->add_option("--seeds", ta.seeds, "Per-trial seeds (default 1..trials)")
                              ->delimiter(',');
  CLI::Option* ts_workers = ts->add_option("--workers", ta.workers, "Concurrent trial workers");
  CLI::Option* ts_dist = ts->add_option("--emit-dist-samples", ta.dist_samples,
                                        "Sample N connected + N disconnected pair distances");
  CLI::Option* ts_ckpt =
      ts->add_flag("--save-checkpoints", ta.save_checkpoints, "Write checkpoint_<seed>.bin");
  CLI::Option* ts_out = ts->add_option("--out", ta.out, "Output directory");

  // ---- verify ----
  VerifyArgs va;
  CLI::App* verify = app.add_subcommand("verify", "Run the library's property suites");
  verify->add_option("--only", va.only, "Run only suites whose name contains this substring");
  verify->add_option("--geometry", va.geometry, "Restrict gradcheck to one geometry");
  verify->add_option("--pairs", va.pairs, "Random pairs for distance-ordering");
  verify->add_option("--cases", va.cases, "Random cases for metric oracles");
  verify->add_option("--seed", va.seed, "Suite RNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*inject) {
      if (ia_spec->count() > 0) {
        const json spec = load_run_spec(run_spec_path);
        SpecOverlay ov(spec);
        overlay_dataset(ov, ia_ds, ia.ds);
        overlay_inject(ov, ia_inj, ia.inj);
        ov.take(nullptr, "seed", ia_seed, ia.seed);
        ov.take(nullptr, "out", ia_out, ia.out);
      }
      return cmd_inject(ia);
    }
    if (*ts) {
      if (ts_spec->count() > 0) {
        const json spec = load_run_spec(run_spec_path);
        SpecOverlay ov(spec);
        overlay_dataset(ov, ts_ds, ta.ds);
        overlay_inject(ov, ts_inj, ta.inj);
        ov.take("dataset", "outliers", ts_outliers, ta.outliers_path);
        ov.take("model", "geometry", ts_geometry, ta.model.geometry);
        ov.take("model", "hidden", ts_hidden, ta.model.hidden);
        ov.take("model", "message_passing", ts_mp, ta.model.message_passing);
        ov.take("model", "dropout", ts_dropout, ta.model.dropout);
        ov.take("loss", "alpha", ts_alpha, ta.loss.alpha);
        ov.take("loss", "fermi_r", ts_fr, ta.loss.fermi_r);
        ov.take("loss", "fermi_t", ts_ft, ta.loss.fermi_t);
        ov.take("train", "epochs", ts_epochs, ta.train.epochs);
        ov.take("train", "lr", ts_lr, ta.train.lr);
        ov.take("train", "weight_decay", ts_wd, ta.train.weight_decay);
        ov.take("train", "batch_size", ts_bs, ta.train.batch_size);
        ov.take(nullptr, "baseline", ts_baseline, ta.baseline);
        ov.take(nullptr, "trials", ts_trials, ta.trials);
        ov.take(nullptr, "seeds", ts_seeds, ta.seeds);
        ov.take(nullptr, "workers", ts_workers, ta.workers);
        ov.take(nullptr, "emit_dist_samples", ts_dist, ta.dist_samples);
        ov.take(nullptr, "save_checkpoints", ts_ckpt, ta.save_checkpoints);
        ov.take(nullptr, "out", ts_out, ta.out);
      }
      return cmd_train_score(ta);
    }
    if (*verify) return cmd_verify(va);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
