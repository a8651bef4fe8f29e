#pragma once

#include <vector>

#include "flexdome/tensor.hpp"

namespace flexdome {

// Finite-horizon tabular model with one reward payoff and m constraint
// payoffs, each require-at-least style: a policy is feasible when its
// expected constraint payoff reaches the threshold. All step indices are
// 0-based in code.
struct CmdpModel {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 0;
  int num_constraints = 0;
  int initial_state = 0;

  Tensor4 transitions;              // [h][s][a][s'], rows sum to 1
  Tensor3 reward;                   // [h][s][a] in [0, 1]
  std::vector<Tensor3> constraint;  // per constraint, [h][s][a] in [0, 1]
  std::vector<double> threshold;    // per constraint

  void validate() const;  // throws ConfigError
};

struct Policy {
  Tensor3 prob;  // [h][s][a], each (h, s) row on the simplex

  int horizon() const { return prob.dim0(); }
  int num_states() const { return prob.dim1(); }
  int num_actions() const { return prob.dim2(); }

  void validate(double tol = 1e-9) const;  // throws ConfigError
};

Policy uniform_policy(int horizon, int num_states, int num_actions);

// Backward-recursion output. value has horizon+1 rows; the last one is the
// zero boundary. root is value at (0, initial_state).
struct ValueTables {
  Tensor2 value;         // [h][s], h = 0..H
  Tensor3 action_value;  // [h][s][a], h = 0..H-1
  double root = 0.0;
};

}  // namespace flexdome
