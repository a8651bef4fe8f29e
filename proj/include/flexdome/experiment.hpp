#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "flexdome/baselines.hpp"
#include "flexdome/env.hpp"
#include "flexdome/learner.hpp"
#include "flexdome/metrics.hpp"

namespace flexdome {

// One learner arm. kind is "flexdome", "vanilla_pd" or "fixed_rpd"; the
// toggles only matter for flexdome (ablations switch features off or hand the
// dual update the true threshold).
struct AlgorithmSpec {
  std::string kind = "flexdome";
  bool use_margin = true;
  bool use_regularization = true;
  bool oracle_threshold = false;

  std::string name() const;  // file-system/legend label, unique per variant
  void validate() const;
};

struct ExperimentConfig {
  GenConfig gen;
  long long episodes = 0;
  std::vector<std::uint64_t> seeds;
  std::vector<AlgorithmSpec> algorithms;
  double delta = 0.1;
  double bonus_scale = 1e-3;
  double margin_scale = 1e-5;
  long long eval_every = 1;  // must divide episodes
  std::string output_dir = "out";

  void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

// Stable digest of the canonical config serialization.
std::string config_hash(const ExperimentConfig& cfg);

// Per-episode traces of one arm plus everything the plots and the acceptance
// checks read back. Gaps and violations are measured against the true model
// and the true threshold; the learner never sees these.
struct RunRecord {
  std::uint64_t seed = 0;
  std::string algorithm;
  std::string threshold_mode;
  std::uint64_t instance_seed = 0;
  int gen_attempts = 1;

  double optimum = 0.0;
  double slater_gap = 0.0;
  double dual_cap = 0.0;
  std::vector<double> threshold;

  std::vector<double> inst_gap;
  std::vector<std::vector<double>> inst_violation;  // [constraint][episode]
  StrongMetrics strong;
  std::vector<std::vector<double>> dual;  // [constraint][episode], post-update
  std::vector<double> step_size;
  std::vector<double> reg_weight;
  std::vector<double> margin0;
  std::vector<double> threshold_est0;

  // Iterate health, tracked across every acting policy / dual update.
  double max_simplex_error = 0.0;
  double min_policy_prob = 1.0;
  double min_dual = 0.0;
  double max_dual = 0.0;
  long long margin_window = 0;  // 0 for arms that run without a margin
};

// Instance generation with retry on degenerate draws (at most 10 perturbed
// sub-seeds). Outputs which seed finally produced the instance.
GeneratedInstance generate_feasible_instance(std::uint64_t seed,
                                             const GenConfig& gen,
                                             std::uint64_t* instance_seed,
                                             int* attempts);

// One (seed, algorithm) arm on an already-built instance.
RunRecord run_single(const ExperimentConfig& cfg, const GeneratedInstance& inst,
                     std::uint64_t seed, const AlgorithmSpec& alg);

// The full grid: instances per seed, all arms (parallel across arms), one CSV
// per arm plus manifest.json under cfg.output_dir. Records come back in
// (seed-major, algorithm) order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

void write_run_csv(const RunRecord& rec, long long eval_every,
                   const std::string& path);

// Reads a run directory (manifest.json + CSVs) and writes plots.svg,
// ablation.svg (when at least two flexdome variants are present) and
// summary.json. window > 0 smooths the instantaneous panels with a trailing
// moving average; log_scale puts the cumulative panels on log10 y.
void aggregate_and_plot(const std::string& run_dir, bool log_scale = false,
                        int window = 0);

}  // namespace flexdome
