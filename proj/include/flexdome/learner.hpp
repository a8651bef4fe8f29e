#pragma once

#include <cstdint>
#include <vector>

#include "flexdome/cmdp.hpp"
#include "flexdome/estimation.hpp"

namespace flexdome {

enum class StepSizeRule {
  PolyDecay,    // t^(-5/6), the default
  InverseSqrt,  // t^(-1/2)
  Constant,
};

// Everything the per-episode schedules need. The margin uses the
// strict-feasibility gap both for its own scale and for the dual box bound
// 4H/gap.
struct ScheduleConfig {
  int num_states = 0, num_actions = 0, horizon = 0, num_constraints = 0;
  double slater_gap = 0.0;
  double delta = 0.1;
  double margin_scale = 1e-5;

  bool use_margin = true;
  bool use_regularization = true;
  bool oracle_threshold = false;       // dual update sees the true threshold
  std::vector<double> true_threshold;  // consulted only in that mode

  StepSizeRule step_rule = StepSizeRule::PolyDecay;
  double step_constant = 0.0;  // only for StepSizeRule::Constant

  double dual_cap = 0.0;  // 4 * horizon / slater_gap when built via for_model

  static ScheduleConfig for_model(const CmdpModel& model, double slater_gap,
                                  double delta, double margin_scale);
  void validate() const;
};

struct ScheduleValues {
  double step_size = 0.0;
  double reg_weight = 0.0;
  std::vector<double> margin;
};

// Per-episode step size, regularization weight and safety margin. t >= 1.
ScheduleValues schedules(long long t, const ScheduleConfig& cfg);

// The constant inside the margin: a worst-case bound on the cumulative
// estimation discrepancy, grown by the dual box radius.
double discrepancy_bound(const ScheduleConfig& cfg);

// Margin at real-valued t (monotone decreasing); exposed for the window solver.
double margin_value(double t, const ScheduleConfig& cfg);

// Smallest episode index from which the margin fits inside half the
// strict-feasibility gap; -1 if that happens beyond 1e18 episodes.
long long margin_feasibility_window(const ScheduleConfig& cfg);

// Multiplicative-weights step on every (h, s) row:
// new prob ~ prob * exp(step * action_value), max-shifted before exponentiation.
Policy policy_update(const Policy& policy, const Tensor3& action_value,
                     double step_size);

// Shrink-then-descend on the duals, clamped to [0, dual_cap]:
// (1 - step*reg) * dual - step * (value - margin - threshold).
std::vector<double> dual_update(const std::vector<double>& dual,
                                const std::vector<double>& constraint_value,
                                const std::vector<double>& margin,
                                const std::vector<double>& threshold,
                                double step_size, double reg_weight,
                                double dual_cap);

struct LearnerState {
  long long t = 1;
  Policy policy;
  std::vector<double> dual;

  static LearnerState init(const CmdpModel& model);
};

struct StepDiagnostics {
  double step_size = 0.0;
  double reg_weight = 0.0;
  std::vector<double> margin;
  std::vector<double> threshold_seen;  // what the dual update subtracted
  double composite_root = 0.0;
  double reward_root = 0.0;
  std::vector<double> constraint_root;
};

// One full update: build estimators, evaluate, step the policy, step the
// duals, advance t. The state afterwards is the NEXT episode's iterate; the
// caller keeps its own copy of the pre-update policy to act with.
StepDiagnostics learner_step(LearnerState& state, const EmpiricalModel& emp,
                             const BonusConfig& bonus,
                             const ScheduleConfig& cfg);

}  // namespace flexdome
