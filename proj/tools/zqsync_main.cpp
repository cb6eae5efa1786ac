#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "zqsync/harness.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> trials;
  std::optional<int> jobs;
  std::optional<std::string> out;
  bool force = false;
  std::optional<std::string> family;
  std::optional<int> d, L, n, k, depth, q, l_max;
  std::optional<double> p, eps;
  std::vector<int> l;
  std::optional<std::string> metric, estimator, tree_kind;
  bool full = false;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--trials", o.trials, "Monte Carlo trials per point");
  sub->add_option("--jobs", o.jobs, "Worker threads (default: ZQSYNC_JOBS or 1)");
  sub->add_option("--out", o.out, "Output path");
  sub->add_flag("--force", o.force, "Run even when the cost estimate exceeds the budget");
  sub->add_option("--family", o.family, "Graph family");
  sub->add_option("--d", o.d, "Torus dimension");
  sub->add_option("--L", o.L, "Torus side length");
  sub->add_option("--n", o.n, "Vertex count");
  sub->add_option("--k", o.k, "Degree");
  sub->add_option("--depth", o.depth, "Tree depth");
  sub->add_option("--q", o.q, "Alphabet size");
  sub->add_option("--p", o.p, "Noise level");
  sub->add_option("--eps", o.eps, "Side-channel reveal probability");
  sub->add_option("--l", o.l, "Estimator radii");
  sub->add_option("--metric", o.metric, "risk | second_moment | overlap | tv | mi");
  sub->add_option("--estimator", o.estimator, "local | decoupled | bayes | zero | typical");
  sub->add_option("--tree-kind", o.tree_kind, "ary | regular");
  sub->add_option("--l-max", o.l_max, "Deepest tree level");
  sub->add_flag("--full", o.full, "Full-scale verify");
}

zqsync::ExperimentConfig resolve(const std::string& kind, const Overrides& o) {
  zqsync::ExperimentConfig c = o.config.empty() ? zqsync::ExperimentConfig{} : zqsync::load_config(o.config);
  if (o.config.empty()) c.jobs = zqsync::default_jobs();
  c.kind = kind;
  if (o.seed) c.seed = *o.seed;
  if (o.trials) c.trials = *o.trials;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.out) c.out = *o.out;
  if (o.force) c.force = true;
  if (o.family) c.graph.family = *o.family;
  if (o.d) c.graph.d = *o.d;
  if (o.L) c.graph.L = *o.L;
  if (o.n) c.graph.n = *o.n;
  if (o.k) c.graph.k = *o.k;
  if (o.depth) c.graph.depth = *o.depth;
  if (o.q) c.model.q = *o.q;
  if (o.p) c.model.p = *o.p;
  if (o.eps) c.model.eps = *o.eps;
  if (!o.l.empty()) c.l = o.l;
  if (o.metric) c.metric = *o.metric;
  if (o.estimator) c.estimator = *o.estimator;
  if (o.tree_kind) c.tree_kind = *o.tree_kind;
  if (o.l_max) c.l_max = *o.l_max;
  if (o.full) c.full = true;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label synchronization experiments on graphs"};
  app.require_subcommand(1);
  Overrides o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen", "Write a graph file"},
      {"simulate", "Monte Carlo estimate at one parameter point"},
      {"sweep", "Resumable grid of simulate points"},
      {"thresholds", "Threshold quantities over a parameter grid"},
      {"recursion", "Root statistics of tree belief propagation by level"},
      {"verify", "Run the invariant suite"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), o);
  CLI11_PARSE(app, argc, argv);
  const std::string kind = app.get_subcommands().front()->get_name();
  zqsync::ExperimentConfig config;
  try {
    config = resolve(kind, o);
    zqsync::validate_config(config);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }
  try {
    const zqsync::RunSummary s = zqsync::run(config, std::cerr);
    std::cerr << "wrote " << s.output << " (" << s.rows_written << " new rows, " << s.rows_reused
              << " reused) and " << s.manifest << " in " << s.wall_seconds << " s\n";
    return s.ok ? 0 : 1;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 1;
  }
}
