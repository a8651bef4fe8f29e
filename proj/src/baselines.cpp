#include "flexdome/baselines.hpp"

#include <cmath>

#include "flexdome/errors.hpp"

namespace flexdome {

BaselineConfig BaselineConfig::vanilla(double dual_cap) {
  BaselineConfig cfg;
  cfg.kind = BaselineKind::VanillaPrimalDual;
  cfg.dual_cap = dual_cap;
  cfg.validate();
  return cfg;
}

BaselineConfig BaselineConfig::fixed_reg(double dual_cap,
                                         long long total_episodes) {
  if (total_episodes < 1)
    throw ConfigError("baseline config: total episode count must be positive");
  BaselineConfig cfg;
  cfg.kind = BaselineKind::FixedRegularization;
  cfg.dual_cap = dual_cap;
  const double T = static_cast<double>(total_episodes);
  cfg.step_constant = std::pow(T, -5.0 / 6.0);
  cfg.reg_fixed = std::pow(T, -1.0 / 6.0);
  cfg.validate();
  return cfg;
}

void BaselineConfig::validate() const {
  if (!(dual_cap > 0.0))
    throw ConfigError("baseline config: dual cap must be positive");
  if (kind == BaselineKind::FixedRegularization &&
      (!(step_constant > 0.0) || !(reg_fixed >= 0.0)))
    throw ConfigError("baseline config: fixed schedule not set");
}

StepDiagnostics baseline_step(LearnerState& st, const EmpiricalModel& emp,
                              const BonusConfig& bonus,
                              const BaselineConfig& cfg) {
  cfg.validate();
  if (st.t < 1) throw ConfigError("baseline step: episode index must be >= 1");

  double step = 0.0, reg = 0.0;
  if (cfg.kind == BaselineKind::VanillaPrimalDual) {
    step = 1.0 / std::sqrt(static_cast<double>(st.t));
    reg = 0.0;
  } else {
    step = cfg.step_constant;
    reg = cfg.reg_fixed;
  }
  const std::vector<double> margin(emp.num_constraints, 0.0);

  const OptimisticModel opt = build_optimistic_model(emp, st.policy, bonus);
  const TruncatedValues vals = truncated_policy_evaluation(
      opt, st.policy, st.dual, reg, cfg.dual_cap);

  st.policy = policy_update(st.policy, vals.action_value, step);
  st.dual = dual_update(st.dual, vals.constraint_root, margin, opt.threshold,
                        step, reg, cfg.dual_cap);
  ++st.t;

  StepDiagnostics d;
  d.step_size = step;
  d.reg_weight = reg;
  d.margin = margin;
  d.threshold_seen = opt.threshold;
  d.composite_root = vals.root;
  d.reward_root = vals.reward_root;
  d.constraint_root = vals.constraint_root;
  return d;
}

}  // namespace flexdome
