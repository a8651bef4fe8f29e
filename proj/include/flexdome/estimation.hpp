#pragma once

#include <vector>

#include "flexdome/cmdp.hpp"
#include "flexdome/env.hpp"

namespace flexdome {

// Probabilities below this are floored before taking logs in the entropy
// payoff; keeps the tables finite without visibly moving any of the values.
constexpr double kPolicyProbFloor = 1e-12;

// Raw visit statistics, filled one trajectory at a time.
struct EmpiricalModel {
  int horizon = 0, num_states = 0, num_actions = 0, num_constraints = 0;
  int initial_state = 0;

  Tensor3 visit_count;   // exact small integers, kept in doubles
  Tensor4 transition_count;
  Tensor3 reward_sum;
  std::vector<Tensor3> constraint_sum;
  std::vector<double> threshold_sum;
  std::vector<long long> threshold_count;
  long long episodes = 0;

  static EmpiricalModel zeros(int horizon, int num_states, int num_actions,
                              int num_constraints, int initial_state);
  static EmpiricalModel for_model(const CmdpModel& model);

  void update(const Trajectory& tr);  // counts, sums, threshold samples
  void record_threshold_sample(int i, double value);
  double threshold_mean(int i) const;  // 0 before the first sample
};

struct BonusConfig {
  double delta = 0.1;
  long long total_episodes = 0;  // the T the confidence widths are set for
  double scale = 1e-3;

  void validate() const;
};

// Estimators widened by count-based confidence boni. entropy_payoff is the
// un-widened -ln pi (it doubles as the cap base during evaluation);
// entropy_payoff_bonus adds the transition width times ln A.
struct OptimisticModel {
  int horizon = 0, num_states = 0, num_actions = 0, num_constraints = 0;
  int initial_state = 0;

  Tensor3 reward;
  std::vector<Tensor3> constraint;
  Tensor3 entropy_payoff;
  Tensor3 entropy_payoff_bonus;
  std::vector<double> threshold;
  Tensor4 transitions;      // empirical rows; unvisited cells fall back to uniform
  Tensor3 bonus;            // payoff widening
  Tensor3 transition_bonus; // transition part alone
};

OptimisticModel build_optimistic_model(const EmpiricalModel& emp,
                                       const Policy& policy,
                                       const BonusConfig& cfg);

// Backward recursion under the estimated transitions with per-step caps:
// value payoffs are capped at the remaining step count, the entropy payoff at
// its own immediate term plus (remaining steps) * ln A. The composite table is
// assembled from the per-payoff recursions, not recursed jointly.
struct TruncatedValues {
  Tensor3 action_value;  // composite: reward + dual . constraint + reg * entropy
  double root = 0.0;

  double reward_root = 0.0;
  double entropy_root = 0.0;
  std::vector<double> constraint_root;

  Tensor2 reward_value;  // [h][s], h = 0..H
  Tensor2 entropy_value;
  std::vector<Tensor2> constraint_value;
};

TruncatedValues truncated_policy_evaluation(const OptimisticModel& opt,
                                            const Policy& policy,
                                            const std::vector<double>& dual,
                                            double reg_weight,
                                            double dual_cap);

namespace serial {
TruncatedValues truncated_policy_evaluation(const OptimisticModel& opt,
                                            const Policy& policy,
                                            const std::vector<double>& dual,
                                            double reg_weight,
                                            double dual_cap);
}  // namespace serial

}  // namespace flexdome
