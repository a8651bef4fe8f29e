#include "flexdome/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flexdome/errors.hpp"

namespace flexdome {

ScheduleConfig ScheduleConfig::for_model(const CmdpModel& m, double slater_gap,
                                         double delta, double margin_scale) {
  ScheduleConfig cfg;
  cfg.num_states = m.num_states;
  cfg.num_actions = m.num_actions;
  cfg.horizon = m.horizon;
  cfg.num_constraints = m.num_constraints;
  cfg.slater_gap = slater_gap;
  cfg.delta = delta;
  cfg.margin_scale = margin_scale;
  cfg.true_threshold = m.threshold;
  if (!(slater_gap > 0.0))
    throw ConfigError("schedule config: slater gap must be positive");
  cfg.dual_cap = 4.0 * m.horizon / slater_gap;
  cfg.validate();
  return cfg;
}

void ScheduleConfig::validate() const {
  if (num_states < 1 || num_actions < 1 || horizon < 1 || num_constraints < 0)
    throw ConfigError("schedule config: bad dimensions");
  if (!(slater_gap > 0.0))
    throw ConfigError("schedule config: slater gap must be positive");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("schedule config: delta outside (0, 1)");
  if (!(margin_scale >= 0.0))
    throw ConfigError("schedule config: negative margin scale");
  if (!(dual_cap > 0.0))
    throw ConfigError("schedule config: dual cap must be positive");
  if (step_rule == StepSizeRule::Constant && !(step_constant > 0.0))
    throw ConfigError("schedule config: constant step rule needs a step size");
  if (oracle_threshold &&
      static_cast<int>(true_threshold.size()) != num_constraints)
    throw ConfigError("schedule config: oracle threshold size mismatch");
}

double discrepancy_bound(const ScheduleConfig& cfg) {
  const double H = cfg.horizon, S = cfg.num_states, A = cfg.num_actions;
  const double box = 4.0 * cfg.num_constraints * H / cfg.slater_gap;
  return (1.0 + 2.0 * box) *
             (4.0 * H * std::sqrt(2.0 * S * A) * (H * std::sqrt(S) + H + 1.0)) +
         box * std::sqrt(2.0 * H);
}

double margin_value(double t, const ScheduleConfig& cfg) {
  if (!(t >= 1.0)) throw ConfigError("margin_value: t must be >= 1");
  const double H = cfg.horizon;
  const double lead =
      cfg.margin_scale * (18.0 / 5.0) * std::sqrt(H * H * H * discrepancy_bound(cfg));
  const double logterm =
      std::log(4.0 * cfg.num_states * cfg.num_actions * H * t / cfg.delta);
  return lead * std::pow(t, -1.0 / 6.0) * std::pow(logterm, 0.25);
}

ScheduleValues schedules(long long t, const ScheduleConfig& cfg) {
  if (t < 1) throw ConfigError("schedules: episode index must be >= 1");
  ScheduleValues out;
  const double td = static_cast<double>(t);
  switch (cfg.step_rule) {
    case StepSizeRule::PolyDecay:
      out.step_size = std::pow(td, -5.0 / 6.0);
      break;
    case StepSizeRule::InverseSqrt:
      out.step_size = 1.0 / std::sqrt(td);
      break;
    case StepSizeRule::Constant:
      out.step_size = cfg.step_constant;
      break;
  }
  out.reg_weight = cfg.use_regularization ? std::pow(td, -1.0 / 6.0) : 0.0;
  const double eps = cfg.use_margin ? margin_value(td, cfg) : 0.0;
  out.margin.assign(cfg.num_constraints, eps);
  return out;
}

long long margin_feasibility_window(const ScheduleConfig& cfg) {
  if (!cfg.use_margin) return 1;
  const double target = cfg.slater_gap / 2.0;
  if (margin_value(1.0, cfg) <= target) return 1;
  double lo = 1.0, hi = 2.0;
  const double limit = 1e18;
  while (margin_value(hi, cfg) > target) {
    lo = hi;
    hi *= 4.0;
    if (hi > limit) return -1;
  }
  while (hi - lo > 0.5) {
    const double mid = 0.5 * (lo + hi);
    (margin_value(mid, cfg) > target ? lo : hi) = mid;
  }
  long long t = static_cast<long long>(std::floor(lo));
  while (margin_value(static_cast<double>(t), cfg) > target) ++t;
  return t;
}

Policy policy_update(const Policy& pi, const Tensor3& action_value,
                     double step_size) {
  if (!pi.prob.same_shape(action_value))
    throw ConfigError("policy update: table shape mismatch");
  if (!(step_size >= 0.0))
    throw ConfigError("policy update: negative step size");
  const int H = pi.horizon(), S = pi.num_states(), A = pi.num_actions();
  Policy out;
  out.prob = Tensor3(H, S, A, 0.0);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      double qmax = -std::numeric_limits<double>::infinity();
      for (int a = 0; a < A; ++a) {
        const double q = action_value(h, s, a);
        if (std::isnan(q))
          throw NumericalError("policy update: NaN action value at h=" +
                               std::to_string(h) + " s=" + std::to_string(s));
        qmax = std::max(qmax, q);
      }
      double norm = 0.0;
      for (int a = 0; a < A; ++a) {
        const double w = pi.prob(h, s, a) *
                         std::exp(step_size * (action_value(h, s, a) - qmax));
        out.prob(h, s, a) = w;
        norm += w;
      }
      if (!(norm > 0.0))
        throw NumericalError("policy update: row normalizer underflowed");
      for (int a = 0; a < A; ++a) out.prob(h, s, a) /= norm;
    }
  return out;
}

std::vector<double> dual_update(const std::vector<double>& dual,
                                const std::vector<double>& constraint_value,
                                const std::vector<double>& margin,
                                const std::vector<double>& threshold,
                                double step_size, double reg_weight,
                                double dual_cap) {
  const std::size_t mc = dual.size();
  if (constraint_value.size() != mc || margin.size() != mc ||
      threshold.size() != mc)
    throw ConfigError("dual update: size mismatch");
  if (!(dual_cap >= 0.0)) throw ConfigError("dual update: negative cap");
  std::vector<double> out(mc);
  const double shrink = 1.0 - step_size * reg_weight;
  for (std::size_t i = 0; i < mc; ++i) {
    const double slack = constraint_value[i] - margin[i] - threshold[i];
    out[i] = std::clamp(shrink * dual[i] - step_size * slack, 0.0, dual_cap);
  }
  return out;
}

LearnerState LearnerState::init(const CmdpModel& m) {
  LearnerState st;
  st.t = 1;
  st.policy = uniform_policy(m.horizon, m.num_states, m.num_actions);
  st.dual.assign(m.num_constraints, 0.0);
  return st;
}

StepDiagnostics learner_step(LearnerState& st, const EmpiricalModel& emp,
                             const BonusConfig& bonus,
                             const ScheduleConfig& cfg) {
  cfg.validate();
  const ScheduleValues sch = schedules(st.t, cfg);
  const OptimisticModel opt = build_optimistic_model(emp, st.policy, bonus);
  const TruncatedValues vals = truncated_policy_evaluation(
      opt, st.policy, st.dual, sch.reg_weight, cfg.dual_cap);

  st.policy = policy_update(st.policy, vals.action_value, sch.step_size);
  const std::vector<double>& thr =
      cfg.oracle_threshold ? cfg.true_threshold : opt.threshold;
  st.dual = dual_update(st.dual, vals.constraint_root, sch.margin, thr,
                        sch.step_size, sch.reg_weight, cfg.dual_cap);
  ++st.t;

  StepDiagnostics d;
  d.step_size = sch.step_size;
  d.reg_weight = sch.reg_weight;
  d.margin = sch.margin;
  d.threshold_seen = thr;
  d.composite_root = vals.root;
  d.reward_root = vals.reward_root;
  d.constraint_root = vals.constraint_root;
  return d;
}

}  // namespace flexdome
