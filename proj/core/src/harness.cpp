#include "zqsync/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "zqsync/estimators.hpp"
#include "zqsync/inference.hpp"
#include "zqsync/information.hpp"
#include "zqsync/metrics.hpp"
#include "zqsync/rng.hpp"
#include "zqsync/thresholds.hpp"
#include "zqsync/tree_recursion.hpp"
#include "zqsync/verify.hpp"

namespace zqsync {

using nlohmann::json;

int default_jobs() {
  if (const char* env = std::getenv("ZQSYNC_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
  }
  return 1;
}

namespace {

template <class T>
void take(const json& j, const char* key, T& dest) {
  if (j.contains(key)) dest = j.at(key).get<T>();
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }) ==
        allowed.end())
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where);
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["kind"] = c.kind;
  j["graph"] = {{"family", c.graph.family}, {"d", c.graph.d},     {"L", c.graph.L},
                {"n", c.graph.n},           {"k", c.graph.k},     {"depth", c.graph.depth},
                {"seed", c.graph.seed},     {"path", c.graph.path}};
  j["model"] = {{"q", c.model.q}, {"p", c.model.p}, {"eps", c.model.eps}, {"kernel_path", c.model.kernel_path}};
  j["l"] = c.l;
  j["estimator"] = c.estimator;
  j["metric"] = c.metric;
  j["grid"] = json::object();
  if (!c.grid.p.empty()) j["grid"]["p"] = c.grid.p;
  if (!c.grid.eps.empty()) j["grid"]["eps"] = c.grid.eps;
  if (!c.grid.l.empty()) j["grid"]["l"] = c.grid.l;
  if (!c.grid.q.empty()) j["grid"]["q"] = c.grid.q;
  if (!c.grid.k.empty()) j["grid"]["k"] = c.grid.k;
  j["tree_kind"] = c.tree_kind;
  j["l_max"] = c.l_max;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["jobs"] = c.jobs;
  j["out"] = c.out;
  j["budget"] = c.budget;
  j["force"] = c.force;
  j["full"] = c.full;
  return j;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& ex) {
    throw std::invalid_argument(std::string("config: ") + ex.what());
  }
  check_keys(j,
             {"kind", "graph", "model", "l", "estimator", "metric", "grid", "tree_kind", "l_max", "trials",
              "seed", "jobs", "out", "budget", "force", "full"},
             "config");
  ExperimentConfig c;
  c.jobs = default_jobs();
  try {
    take(j, "kind", c.kind);
    if (j.contains("graph")) {
      const json& g = j["graph"];
      check_keys(g, {"family", "d", "L", "n", "k", "depth", "seed", "path"}, "graph");
      take(g, "family", c.graph.family);
      take(g, "d", c.graph.d);
      take(g, "L", c.graph.L);
      take(g, "n", c.graph.n);
      take(g, "k", c.graph.k);
      take(g, "depth", c.graph.depth);
      take(g, "seed", c.graph.seed);
      take(g, "path", c.graph.path);
    }
    if (j.contains("model")) {
      const json& m = j["model"];
      check_keys(m, {"q", "p", "eps", "kernel_path"}, "model");
      take(m, "q", c.model.q);
      take(m, "p", c.model.p);
      take(m, "eps", c.model.eps);
      take(m, "kernel_path", c.model.kernel_path);
    }
    if (j.contains("l")) {
      if (j["l"].is_array())
        c.l = j["l"].get<std::vector<int>>();
      else
        c.l = {j["l"].get<int>()};
    }
    take(j, "estimator", c.estimator);
    take(j, "metric", c.metric);
    if (j.contains("grid")) {
      const json& g = j["grid"];
      check_keys(g, {"p", "eps", "l", "q", "k"}, "grid");
      take(g, "p", c.grid.p);
      take(g, "eps", c.grid.eps);
      take(g, "l", c.grid.l);
      take(g, "q", c.grid.q);
      take(g, "k", c.grid.k);
      for (auto it = g.begin(); it != g.end(); ++it)
        if (it->empty()) throw std::invalid_argument("grid dimension '" + it.key() + "' is empty");
    }
    take(j, "tree_kind", c.tree_kind);
    take(j, "l_max", c.l_max);
    take(j, "trials", c.trials);
    take(j, "seed", c.seed);
    take(j, "jobs", c.jobs);
    take(j, "out", c.out);
    take(j, "budget", c.budget);
    take(j, "force", c.force);
    take(j, "full", c.full);
  } catch (const json::exception& ex) {
    throw std::invalid_argument(std::string("config: ") + ex.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("config file not found: " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& config) { return to_json(config).dump(2); }

void validate_config(const ExperimentConfig& c) {
  static const char* kinds[] = {"gen", "simulate", "sweep", "thresholds", "recursion", "verify"};
  if (std::find(std::begin(kinds), std::end(kinds), c.kind) == std::end(kinds))
    throw std::invalid_argument("unknown experiment kind: " + c.kind);
  static const char* families[] = {"torus", "box", "cycle", "path", "regular", "tree", "ary_tree", "file"};
  if (std::find(std::begin(families), std::end(families), c.graph.family) == std::end(families))
    throw std::invalid_argument("unknown graph family: " + c.graph.family);
  if (c.graph.family == "file" && !std::filesystem::exists(c.graph.path))
    throw std::invalid_argument("graph file not found: " + c.graph.path);
  if (!c.model.kernel_path.empty() && !std::filesystem::exists(c.model.kernel_path))
    throw std::invalid_argument("kernel file not found: " + c.model.kernel_path);
  static const char* estimators[] = {"local", "decoupled", "bayes", "zero", "typical"};
  if (std::find(std::begin(estimators), std::end(estimators), c.estimator) == std::end(estimators))
    throw std::invalid_argument("unknown estimator: " + c.estimator);
  static const char* metrics[] = {"risk", "second_moment", "overlap", "tv", "mi"};
  if (std::find(std::begin(metrics), std::end(metrics), c.metric) == std::end(metrics))
    throw std::invalid_argument("unknown metric: " + c.metric);
  if (c.tree_kind != "ary" && c.tree_kind != "regular")
    throw std::invalid_argument("tree_kind must be ary or regular");
  auto check_q = [](int q) {
    if (q < 2 || q > kAlphabetCap) throw std::invalid_argument("q out of range [2, 16]");
  };
  auto check_unit = [](double v, const char* what) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(what) + " out of range [0, 1]");
  };
  check_q(c.model.q);
  check_unit(c.model.p, "p");
  check_unit(c.model.eps, "eps");
  for (int q : c.grid.q) check_q(q);
  for (double p : c.grid.p) check_unit(p, "p");
  for (double e : c.grid.eps) check_unit(e, "eps");
  for (int l : c.l)
    if (l < 0) throw std::invalid_argument("radius l must be >= 0");
  for (int l : c.grid.l)
    if (l < 0) throw std::invalid_argument("radius l must be >= 0");
  if (c.l.empty()) throw std::invalid_argument("estimator radius list is empty");
  if (c.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (c.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  if (c.l_max < 0) throw std::invalid_argument("l_max must be >= 0");
  if (c.out.empty()) throw std::invalid_argument("output path is empty");
}

Graph build_graph(const GraphSpec& s) {
  if (s.family == "torus") return gen_torus(s.d, s.L, true);
  if (s.family == "box") return gen_torus(s.d, s.L, false);
  if (s.family == "cycle") return gen_cycle(s.n);
  if (s.family == "path") return gen_path(s.n);
  if (s.family == "regular") return gen_random_regular(s.n, s.k, s.seed);
  if (s.family == "tree") return gen_tree(s.k, s.depth);
  if (s.family == "ary_tree") return gen_ary_tree(s.k - 1, s.depth);
  if (s.family == "file") {
    std::ifstream is(s.path);
    if (!is) throw std::invalid_argument("graph file not found: " + s.path);
    return read_graph(is);
  }
  throw std::invalid_argument("unknown graph family: " + s.family);
}

Kernel build_kernel(const ModelSpec& s) {
  if (!s.kernel_path.empty()) {
    std::ifstream is(s.kernel_path);
    if (!is) throw std::invalid_argument("kernel file not found: " + s.kernel_path);
    return read_kernel(is);
  }
  return kernel_zq(s.q, s.p);
}

namespace {

struct Point {
  int q;
  double p;
  double eps;
  int l;
  int k;
};

std::vector<Point> grid_points(const ExperimentConfig& c) {
  const std::vector<int> qs = c.grid.q.empty() ? std::vector<int>{c.model.q} : c.grid.q;
  const std::vector<double> ps = c.grid.p.empty() ? std::vector<double>{c.model.p} : c.grid.p;
  const std::vector<double> es = c.grid.eps.empty() ? std::vector<double>{c.model.eps} : c.grid.eps;
  const std::vector<int> ls = c.grid.l.empty() ? c.l : c.grid.l;
  const std::vector<int> ks = c.grid.k.empty() ? std::vector<int>{c.graph.k} : c.grid.k;
  std::vector<Point> out;
  for (int k : ks)
    for (int q : qs)
      for (double p : ps)
        for (double e : es)
          for (int l : ls) out.push_back({q, p, e, l, k});
  return out;
}

std::string point_key(const ExperimentConfig& c, const Point& pt) {
  std::ostringstream ss;
  ss << c.graph.family << '|' << pt.k << '|' << pt.q << '|' << format_real(pt.p) << '|' << format_real(pt.eps)
     << '|' << pt.l << '|' << c.estimator << '|' << c.metric;
  return ss.str();
}

double ball_log2_states(const Graph& g, int l, int q) {
  int worst = 0;
  for (int u = 0; u < g.n; ++u) {
    const std::vector<int> dist = bfs_distances(g, u);
    int count = 0;
    for (int d : dist)
      if (d >= 0 && d <= l) ++count;
    worst = std::max(worst, count);
  }
  return worst * std::log2(static_cast<double>(q));
}

double point_cost(const ExperimentConfig& c, const Graph& g, const Point& pt) {
  const double trials = c.metric == "mi" ? 1.0 : static_cast<double>(c.trials);
  const double full = std::pow(2.0, g.n * std::log2(static_cast<double>(pt.q)));
  if (c.metric == "mi") return full * std::pow(2.0, g.n) * g.n;
  if (c.metric == "risk" && (c.estimator == "bayes" || c.estimator == "decoupled")) return trials * full * g.n;
  if (c.estimator == "typical") return trials * full * g.num_edges();
  if (c.estimator == "zero" && c.metric == "risk") return trials * g.n;
  return trials * g.n * std::pow(2.0, ball_log2_states(g, pt.l, pt.q));
}

std::vector<int> argmax_labels(const MarginalTable& m) {
  std::vector<int> out(m.size());
  for (std::size_t u = 0; u < m.size(); ++u)
    out[u] = static_cast<int>(std::max_element(m[u].begin(), m[u].end()) - m[u].begin());
  return out;
}

MCEstimate evaluate_point(const ExperimentConfig& c, const Graph& g, const Kernel& kernel, const Point& pt,
                          int jobs) {
  const int q = kernel.q();
  const LabelFunction f = default_label_function(q);
  if (c.metric == "mi") {
    const auto mi = pairwise_conditional_mi(g, kernel, pt.eps);
    double s = 0.0;
    for (int u = 0; u < g.n; ++u)
      for (int v = 0; v < g.n; ++v)
        if (u != v) s += mi[u][v];
    MCEstimate est;
    est.mean = g.n > 1 ? s / (static_cast<double>(g.n) * (g.n - 1)) : 0.0;
    est.std_error = 0.0;
    est.trials = 0;
    est.seed_base = c.seed;
    return est;
  }
  const std::vector<Ball> balls = all_balls(g, pt.l);
  MCOptions mc{c.trials, c.seed, hash_name(point_key(c, pt)), jobs};
  return mc_average(
      [&](std::uint64_t seed) {
        const Instance inst = sample_instance(g, kernel, pt.eps, seed);
        if (c.metric == "risk") {
          if (c.estimator == "zero") return risk(EstimateMatrix::zero(g.n), inst.theta0, f);
          if (c.estimator == "bayes") return risk(matrix_bayes(g, kernel, inst, f), inst.theta0, f);
          if (c.estimator == "decoupled") return risk(matrix_decoupled(g, kernel, inst, f), inst.theta0, f);
          if (c.estimator == "typical") {
            const TypicalResult t =
                typical_set_estimator(g, kernel, inst, default_eta(g.n), TypicalMode::best, seed);
            std::vector<double> a(g.n);
            for (int u = 0; u < g.n; ++u) a[u] = f(t.labels[u]);
            return risk(EstimateMatrix::from_factor(a), inst.theta0, f);
          }
          PosteriorEnumerator en;
          const MarginalTable m = local_marginals(balls, kernel, inst, en);
          return risk(EstimateMatrix::from_factor(score_vector(m, f)), inst.theta0, f);
        }
        if (c.metric == "overlap" && c.estimator == "typical") {
          const TypicalResult t = typical_set_estimator(g, kernel, inst, default_eta(g.n), TypicalMode::best, seed);
          return overlap(t.labels, inst.theta0, q);
        }
        PosteriorEnumerator en;
        const MarginalTable m = c.estimator == "bayes" ? exact_posterior_marginals(g, kernel, inst)
                                                       : local_marginals(balls, kernel, inst, en);
        if (c.metric == "overlap") return overlap(argmax_labels(m), inst.theta0, q);
        const std::vector<double> uniform(q, 1.0 / q);
        double s = 0.0;
        for (int u = 0; u < g.n; ++u) {
          if (c.metric == "second_moment") {
            for (double v : m[u]) s += v * v;
          } else {
            s += tv_distance(m[u], uniform);
          }
        }
        return s / g.n;
      },
      mc);
}

std::vector<std::string> parameter_cells(const ExperimentConfig& c, const Graph& g, const Point& pt) {
  return {c.kind == "sweep" ? "sweep" : "simulate",
          c.graph.family,
          std::to_string(g.n),
          std::to_string(pt.k),
          std::to_string(pt.q),
          format_real(pt.p),
          format_real(pt.eps),
          std::to_string(pt.l),
          c.estimator,
          c.metric};
}

constexpr std::size_t kParamColumns = 10;

}  // namespace

std::vector<std::string> result_header() {
  return {"kind", "family", "n",     "k",      "q",         "p",      "eps",
          "l",    "estimator", "metric", "mean", "std_error", "trials", "seed"};
}

double estimate_cost(const ExperimentConfig& c) {
  double total = 0.0;
  for (const Point& pt : grid_points(c)) {
    GraphSpec gs = c.graph;
    gs.k = pt.k;
    const Graph g = build_graph(gs);
    total += point_cost(c, g, pt);
  }
  return total;
}

CsvTable sweep_table(const ExperimentConfig& c, const CsvTable* previous, std::ostream& log,
                     std::size_t* reused) {
  std::map<std::vector<std::string>, std::vector<std::string>> done;
  if (previous && !previous->rows.empty()) {
    if (previous->header != result_header())
      throw std::runtime_error("existing output has a different schema: " + c.out);
    for (const auto& row : previous->rows) {
      std::vector<std::string> key(row.begin(), row.begin() + kParamColumns);
      key.push_back(row.back());
      done[key] = row;
    }
  }
  CsvTable table;
  table.header = result_header();
  std::size_t hits = 0;
  for (const Point& pt : grid_points(c)) {
    GraphSpec gs = c.graph;
    gs.k = pt.k;
    const Graph g = build_graph(gs);
    std::vector<std::string> key = parameter_cells(c, g, pt);
    key.push_back(std::to_string(c.seed));
    auto it = done.find(key);
    if (it != done.end()) {
      table.rows.push_back(it->second);
      ++hits;
      continue;
    }
    ModelSpec ms = c.model;
    ms.q = pt.q;
    ms.p = pt.p;
    const Kernel kernel = build_kernel(ms);
    MCEstimate est;
    try {
      est = evaluate_point(c, g, kernel, pt, c.jobs);
    } catch (const std::exception& ex) {
      std::ostringstream msg;
      msg << "point (k=" << pt.k << ", q=" << pt.q << ", p=" << pt.p << ", eps=" << pt.eps << ", l=" << pt.l
          << ", seed=" << c.seed << "): " << ex.what();
      throw std::runtime_error(msg.str());
    }
    std::vector<std::string> row = parameter_cells(c, g, pt);
    row.push_back(format_real(est.mean));
    row.push_back(format_real(est.std_error));
    row.push_back(std::to_string(est.trials));
    row.push_back(std::to_string(c.seed));
    log << "  " << c.metric << " k=" << pt.k << " q=" << pt.q << " p=" << pt.p << " eps=" << pt.eps
        << " l=" << pt.l << ": " << est.mean << " +- " << est.std_error << '\n';
    table.rows.push_back(std::move(row));
  }
  if (reused) *reused = hits;
  return table;
}

CsvTable thresholds_table(const ExperimentConfig& c) {
  std::vector<double> ps = c.grid.p;
  if (ps.empty())
    for (int i = 1; i <= 19; ++i) ps.push_back(0.05 * i);
  const std::vector<int> qs = c.grid.q.empty() ? std::vector<int>{c.model.q} : c.grid.q;
  const std::vector<int> ks = c.grid.k.empty() ? std::vector<int>{c.graph.k} : c.grid.k;
  CsvTable t;
  t.header = {"q", "p", "k", "kappa", "kappa_root", "k_star", "mutual_information", "weak_lhs", "weak_rhs",
              "weak_recovery", "s_star_upper_bound"};
  for (int q : qs)
    for (double p : ps) {
      const Kernel kernel = kernel_zq(q, p);
      const double info = channel_mutual_information(kernel);
      const double ks_val = (p > 0.0 && p < 1.0) ? k_star(p, q) : std::numeric_limits<double>::quiet_NaN();
      for (int k : ks) {
        const WeakRecovery w = weak_recovery_condition(kernel, k);
        t.rows.push_back({std::to_string(q), format_real(p), std::to_string(k), format_real(kesten_stigum(k, p)),
                          format_real(kesten_stigum_root(k, p)), format_real(ks_val), format_real(info),
                          format_real(w.lhs), format_real(w.rhs), w.satisfied ? "1" : "0",
                          format_real(s_star_upper_bound(uniform_product(q), k, kernel))});
      }
    }
  return t;
}

CsvTable recursion_table(const ExperimentConfig& c) {
  const std::vector<double> ps = c.grid.p.empty() ? std::vector<double>{c.model.p} : c.grid.p;
  const std::vector<double> es = c.grid.eps.empty() ? std::vector<double>{c.model.eps} : c.grid.eps;
  const std::vector<int> ks = c.grid.k.empty() ? std::vector<int>{c.graph.k} : c.grid.k;
  const std::vector<int> qs = c.grid.q.empty() ? std::vector<int>{c.model.q} : c.grid.q;
  const TreeKind kind = c.tree_kind == "regular" ? TreeKind::regular : TreeKind::ary;
  CsvTable t;
  t.header = {"k", "q", "p", "eps", "l", "z_hat_mean", "z_hat_se", "dtv2_mean", "dtv2_se", "kappa", "residual",
              "residual_se"};
  for (int k : ks)
    for (int q : qs)
      for (double p : ps)
        for (double e : es) {
          RecursionOptions opts;
          opts.trials = c.trials;
          opts.jobs = c.jobs;
          std::ostringstream key;
          key << "recursion|" << c.tree_kind << '|' << k << '|' << q << '|' << format_real(p) << '|'
              << format_real(e);
          opts.seed = derive_seed(c.seed, hash_name(key.str()), 0);
          const RecursionTrace tr = simulate_root_statistic(kind, k, q, p, e, c.l_max, opts);
          for (const auto& rec : tr.levels) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            t.rows.push_back({std::to_string(k), std::to_string(q), format_real(p), format_real(e),
                              std::to_string(rec.l), format_real(rec.z_hat.mean), format_real(rec.z_hat.std_error),
                              format_real(rec.dtv2.mean), format_real(rec.dtv2.std_error), format_real(tr.kappa),
                              format_real(rec.has_residual ? rec.residual.mean : nan),
                              format_real(rec.has_residual ? rec.residual.std_error : nan)});
          }
        }
  return t;
}

RunSummary run(const ExperimentConfig& c, std::ostream& log) {
  validate_config(c);
  const auto start = std::chrono::steady_clock::now();
  RunSummary summary;
  summary.output = c.out;
  summary.manifest = c.out + ".manifest.json";
  json extra = json::object();

  if (c.kind == "gen") {
    const Graph g = build_graph(c.graph);
    std::ofstream os(c.out);
    if (!os) throw std::runtime_error("cannot open " + c.out + " for writing");
    write_graph(os, g);
    summary.rows_written = static_cast<std::size_t>(g.num_edges());
    extra["vertices"] = g.n;
    extra["edges"] = g.num_edges();
  } else if (c.kind == "simulate" || c.kind == "sweep") {
    const double cost = estimate_cost(c);
    log << "estimated cost: " << cost << " operations (budget " << c.budget << ")\n";
    extra["estimated_cost"] = cost;
    if (cost > c.budget && !c.force)
      throw std::runtime_error("estimated cost exceeds the budget; rerun with --force");
    CsvTable previous;
    const bool resume = c.kind == "sweep" && std::filesystem::exists(c.out);
    if (resume) previous = read_csv_file(c.out);
    const CsvTable table = sweep_table(c, resume ? &previous : nullptr, log, &summary.rows_reused);
    summary.rows_written = table.rows.size() - summary.rows_reused;
    write_csv_file(c.out, table);
  } else if (c.kind == "thresholds") {
    const CsvTable table = thresholds_table(c);
    summary.rows_written = table.rows.size();
    write_csv_file(c.out, table);
  } else if (c.kind == "recursion") {
    const CsvTable table = recursion_table(c);
    summary.rows_written = table.rows.size();
    write_csv_file(c.out, table);
  } else if (c.kind == "verify") {
    const std::vector<CheckResult> results = run_invariant_suite(c.full, c.jobs, c.seed, log);
    CsvTable table;
    table.header = {"check", "pass", "detail"};
    for (const auto& r : results) {
      std::string detail = r.detail;
      std::replace(detail.begin(), detail.end(), ',', ';');
      table.rows.push_back({r.name, r.pass ? "1" : "0", detail});
      if (!r.pass) summary.ok = false;
    }
    summary.rows_written = table.rows.size();
    write_csv_file(c.out, table);
  }

  summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["config"] = to_json(c);
  manifest["version"] = kVersion;
  manifest["wall_seconds"] = summary.wall_seconds;
  manifest["output"] = c.out;
  manifest["rows_written"] = summary.rows_written;
  manifest["rows_reused"] = summary.rows_reused;
  manifest["ok"] = summary.ok;
  manifest["details"] = extra;
  std::ofstream ms(summary.manifest);
  if (!ms) throw std::runtime_error("cannot open " + summary.manifest + " for writing");
  ms << manifest.dump(2) << '\n';
  return summary;
}

}  // namespace zqsync
