#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "flexdome/cmdp.hpp"
#include "flexdome/rng.hpp"

namespace flexdome {

enum class ThresholdMode { Fixed, Gaussian };

std::string to_string(ThresholdMode mode);
ThresholdMode threshold_mode_from_string(const std::string& s);

// How the per-episode threshold signal is produced. mean is the true
// threshold; Gaussian mode observes one noisy draw per episode (sd half the
// mean), Fixed observes the mean itself.
struct ThresholdSpec {
  ThresholdMode mode = ThresholdMode::Fixed;
  std::vector<double> mean;
  std::vector<double> sd;
};

struct GenConfig {
  int num_states = 20;
  int num_actions = 5;
  int horizon = 5;
  int num_constraints = 1;
  double dirichlet_conc = 0.1;
  ThresholdMode mode = ThresholdMode::Fixed;

  void validate() const;  // throws ConfigError
};

struct GeneratedInstance {
  CmdpModel model;
  ThresholdSpec threshold;
};

// Random benchmark instance: Dirichlet transition rows, coin-flip {0,1}
// rewards drawn once and frozen, constraint payoff = 1 - reward, uniform
// initial state, thresholds calibrated to half the best attainable
// constraint value. Identical (seed, config) gives identical instances.
GeneratedInstance generate_instance(std::uint64_t seed, const GenConfig& cfg);

struct TrajectoryStep {
  int state = 0;
  int action = 0;
  double reward = 0.0;
  std::vector<double> constraint;
  int next_state = 0;
};

struct Trajectory {
  std::vector<TrajectoryStep> step;                   // length H
  std::vector<std::vector<double>> threshold_sample;  // [i][h]
};

// One episode under the policy. Draw order is fixed: per-constraint threshold
// draw first (one per episode, replicated across the steps), then per step an
// action draw followed by a transition draw.
Trajectory rollout(const CmdpModel& model, const ThresholdSpec& spec,
                   const Policy& policy, RngStream& rng);

nlohmann::json instance_to_json(const GeneratedInstance& inst);
GeneratedInstance instance_from_json(const nlohmann::json& j);

}  // namespace flexdome
