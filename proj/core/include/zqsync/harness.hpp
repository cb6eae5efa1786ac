#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "zqsync/csv.hpp"
#include "zqsync/graphs.hpp"
#include "zqsync/model.hpp"

namespace zqsync {

inline constexpr const char* kVersion = "0.1.0";

struct GraphSpec {
  std::string family = "torus";  // torus | box | cycle | path | regular | tree | ary_tree | file
  int d = 2;
  int L = 4;
  int n = 16;
  int k = 3;
  int depth = 3;
  std::uint64_t seed = 1;
  std::string path;
};

struct ModelSpec {
  int q = 2;
  double p = 0.3;
  double eps = 0.1;
  std::string kernel_path;  // overrides (q, p) when set
};

/// Parameter grids for sweep / thresholds / recursion; an absent grid falls
/// back to the single value of the model or graph spec.
struct GridSpec {
  std::vector<double> p;
  std::vector<double> eps;
  std::vector<int> l;
  std::vector<int> q;
  std::vector<int> k;
};

struct ExperimentConfig {
  std::string kind = "simulate";  // gen | simulate | sweep | thresholds | recursion | verify
  GraphSpec graph;
  ModelSpec model;
  std::vector<int> l = {1};
  std::string estimator = "local";  // local | decoupled | bayes | zero | typical
  std::string metric = "risk";      // risk | second_moment | overlap | tv | mi
  GridSpec grid;
  std::string tree_kind = "ary";
  int l_max = 6;
  std::int64_t trials = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string out = "zqsync_out.csv";
  double budget = 2.0e10;  // rough operation count allowed without --force
  bool force = false;
  bool full = false;  // verify: full-scale instead of quick checks
};

/// Job count from ZQSYNC_JOBS, else 1.
int default_jobs();

ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);
std::string config_to_json(const ExperimentConfig& config);

/// Range checks and file existence; throws std::invalid_argument.
void validate_config(const ExperimentConfig& config);

Graph build_graph(const GraphSpec& spec);
Kernel build_kernel(const ModelSpec& spec);

/// Rough operation count of a simulate/sweep run.
double estimate_cost(const ExperimentConfig& config);

struct RunSummary {
  std::string output;
  std::string manifest;
  std::size_t rows_written = 0;
  std::size_t rows_reused = 0;
  double wall_seconds = 0.0;
  bool ok = true;
};

/// Columns shared by simulate and sweep.
std::vector<std::string> result_header();

CsvTable thresholds_table(const ExperimentConfig& config);
CsvTable recursion_table(const ExperimentConfig& config);

/// Cartesian product of the grids, reusing rows of an existing output whose
/// parameter columns and seed match.
CsvTable sweep_table(const ExperimentConfig& config, const CsvTable* previous, std::ostream& log,
                     std::size_t* reused = nullptr);

/// Executes the experiment, writes its output and a JSON manifest next to it.
RunSummary run(const ExperimentConfig& config, std::ostream& log);

}  // namespace zqsync
