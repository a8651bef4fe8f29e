#pragma once

#include "flexdome/learner.hpp"

namespace flexdome {

enum class BaselineKind {
  VanillaPrimalDual,    // no margin, no regularization, 1/sqrt(t) steps
  FixedRegularization,  // constant step and constant regularization weight,
                        // both tuned to the final episode count
};

struct BaselineConfig {
  BaselineKind kind = BaselineKind::VanillaPrimalDual;
  double dual_cap = 0.0;
  double step_constant = 0.0;  // FixedRegularization only
  double reg_fixed = 0.0;      // FixedRegularization only

  static BaselineConfig vanilla(double dual_cap);
  static BaselineConfig fixed_reg(double dual_cap, long long total_episodes);
  void validate() const;
};

// Same primitive sequence as the main learner (estimators, truncated
// evaluation, multiplicative policy step, clamped dual step), wired with the
// baseline's own schedule. With the main learner's margin and regularization
// switched off and its step rule forced to 1/sqrt(t), the two produce
// bit-identical iterates; tests pin that equivalence.
StepDiagnostics baseline_step(LearnerState& state, const EmpiricalModel& emp,
                              const BonusConfig& bonus,
                              const BaselineConfig& cfg);

}  // namespace flexdome
