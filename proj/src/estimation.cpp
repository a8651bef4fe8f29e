#include "flexdome/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flexdome/errors.hpp"

namespace flexdome {

EmpiricalModel EmpiricalModel::zeros(int horizon, int num_states,
                                     int num_actions, int num_constraints,
                                     int initial_state) {
  if (horizon < 1 || num_states < 1 || num_actions < 1 || num_constraints < 0)
    throw ConfigError("empirical model: bad dimensions");
  EmpiricalModel e;
  e.horizon = horizon;
  e.num_states = num_states;
  e.num_actions = num_actions;
  e.num_constraints = num_constraints;
  e.initial_state = initial_state;
  e.visit_count = Tensor3(horizon, num_states, num_actions, 0.0);
  e.transition_count = Tensor4(horizon, num_states, num_actions, num_states, 0.0);
  e.reward_sum = Tensor3(horizon, num_states, num_actions, 0.0);
  e.constraint_sum.assign(num_constraints,
                          Tensor3(horizon, num_states, num_actions, 0.0));
  e.threshold_sum.assign(num_constraints, 0.0);
  e.threshold_count.assign(num_constraints, 0);
  return e;
}

EmpiricalModel EmpiricalModel::for_model(const CmdpModel& m) {
  return zeros(m.horizon, m.num_states, m.num_actions, m.num_constraints,
               m.initial_state);
}

void EmpiricalModel::record_threshold_sample(int i, double value) {
  threshold_sum[i] += value;
  threshold_count[i] += 1;
}

double EmpiricalModel::threshold_mean(int i) const {
  return threshold_count[i] > 0 ? threshold_sum[i] / threshold_count[i] : 0.0;
}

void EmpiricalModel::update(const Trajectory& tr) {
  if (static_cast<int>(tr.step.size()) != horizon)
    throw ConfigError("empirical update: trajectory length mismatch");
  if (static_cast<int>(tr.threshold_sample.size()) != num_constraints)
    throw ConfigError("empirical update: threshold sample count mismatch");
  for (int h = 0; h < horizon; ++h) {
    const TrajectoryStep& st = tr.step[h];
    if (st.state < 0 || st.state >= num_states || st.action < 0 ||
        st.action >= num_actions || st.next_state < 0 ||
        st.next_state >= num_states)
      throw ConfigError("empirical update: index out of range at h=" +
                        std::to_string(h));
    if (static_cast<int>(st.constraint.size()) != num_constraints)
      throw ConfigError("empirical update: constraint payoff count mismatch");
    visit_count(h, st.state, st.action) += 1.0;
    transition_count(h, st.state, st.action, st.next_state) += 1.0;
    reward_sum(h, st.state, st.action) += st.reward;
    for (int i = 0; i < num_constraints; ++i)
      constraint_sum[i](h, st.state, st.action) += st.constraint[i];
  }
  for (int i = 0; i < num_constraints; ++i) {
    if (static_cast<int>(tr.threshold_sample[i].size()) != horizon)
      throw ConfigError("empirical update: threshold sample length mismatch");
    for (int h = 0; h < horizon; ++h)
      record_threshold_sample(i, tr.threshold_sample[i][h]);
  }
  ++episodes;
}

void BonusConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("bonus config: delta outside (0, 1)");
  if (total_episodes < 1)
    throw ConfigError("bonus config: total episode count must be positive");
  if (!(scale >= 0.0)) throw ConfigError("bonus config: negative scale");
}

OptimisticModel build_optimistic_model(const EmpiricalModel& emp,
                                       const Policy& pi,
                                       const BonusConfig& cfg) {
  cfg.validate();
  const int H = emp.horizon, S = emp.num_states, A = emp.num_actions,
            mc = emp.num_constraints;
  if (pi.horizon() != H || pi.num_states() != S || pi.num_actions() != A)
    throw ConfigError("optimistic model: policy shape mismatch");

  const double delta_prime = cfg.delta / 4.0;
  const double payoff_width =
      0.5 * std::log(2.0 * S * A * H * (mc + 1) *
                     static_cast<double>(cfg.total_episodes) / delta_prime);
  const double transition_width =
      2.0 * S + 2.0 * std::log(static_cast<double>(S) * A * H *
                               static_cast<double>(cfg.total_episodes) /
                               delta_prime);
  const double value_ceiling = 1.0 + H;
  const double log_actions = std::log(static_cast<double>(A));

  OptimisticModel o;
  o.horizon = H;
  o.num_states = S;
  o.num_actions = A;
  o.num_constraints = mc;
  o.initial_state = emp.initial_state;
  o.reward = Tensor3(H, S, A, 0.0);
  o.constraint.assign(mc, Tensor3(H, S, A, 0.0));
  o.entropy_payoff = Tensor3(H, S, A, 0.0);
  o.entropy_payoff_bonus = Tensor3(H, S, A, 0.0);
  o.transitions = Tensor4(H, S, A, S, 0.0);
  o.bonus = Tensor3(H, S, A, 0.0);
  o.transition_bonus = Tensor3(H, S, A, 0.0);

  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double visits = emp.visit_count(h, s, a);
        const double n = std::max(1.0, visits);
        const double phi_p = cfg.scale * H * std::sqrt(transition_width / n);
        const double phi = cfg.scale * std::sqrt(payoff_width / n) + phi_p;
        o.bonus(h, s, a) = phi;
        o.transition_bonus(h, s, a) = phi_p;

        o.reward(h, s, a) =
            std::min(emp.reward_sum(h, s, a) / n + phi, value_ceiling);
        for (int i = 0; i < mc; ++i)
          o.constraint[i](h, s, a) =
              std::min(emp.constraint_sum[i](h, s, a) / n + phi, value_ceiling);

        const double psi =
            -std::log(std::max(pi.prob(h, s, a), kPolicyProbFloor));
        o.entropy_payoff(h, s, a) = psi;
        o.entropy_payoff_bonus(h, s, a) = psi + phi_p * log_actions;

        double* row = o.transitions.row(h, s, a);
        if (visits > 0.0) {
          const double* counts = emp.transition_count.row(h, s, a);
          for (int s2 = 0; s2 < S; ++s2) row[s2] = counts[s2] / n;
        } else {
          for (int s2 = 0; s2 < S; ++s2) row[s2] = 1.0 / S;
        }
      }

  o.threshold.resize(mc);
  for (int i = 0; i < mc; ++i) o.threshold[i] = emp.threshold_mean(i);
  return o;
}

namespace {

// One truncated family backup. Cap is evaluated per cell so the entropy
// family can use its state-dependent ceiling.
template <bool Parallel, class CapFn>
void truncated_backup(const Tensor4& trans, const Policy& pi,
                      const Tensor3& payoff, CapFn cap, Tensor3& q,
                      Tensor2& v) {
  const int H = pi.horizon(), S = pi.num_states(), A = pi.num_actions();
  v = Tensor2(H + 1, S, 0.0);
  q = Tensor3(H, S, A, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double* vnext = v.row(h + 1);
    auto body = [&](int s) {
      double vs = 0.0;
      for (int a = 0; a < A; ++a) {
        const double* p = trans.row(h, s, a);
        double x = payoff(h, s, a);
        for (int s2 = 0; s2 < S; ++s2) x += p[s2] * vnext[s2];
        const double qv = std::min(x, cap(h, s, a));
        q(h, s, a) = qv;
        vs += pi.prob(h, s, a) * qv;
      }
      v(h, s) = vs;
    };
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
      for (int s = 0; s < S; ++s) body(s);
    } else {
      for (int s = 0; s < S; ++s) body(s);
    }
  }
}

template <bool Parallel>
TruncatedValues tpe_impl(const OptimisticModel& o, const Policy& pi,
                         const std::vector<double>& dual, double reg_weight,
                         double dual_cap) {
  const int H = o.horizon, S = o.num_states, A = o.num_actions,
            mc = o.num_constraints;
  if (pi.horizon() != H || pi.num_states() != S || pi.num_actions() != A)
    throw ConfigError("truncated evaluation: policy shape mismatch");
  if (static_cast<int>(dual.size()) != mc)
    throw ConfigError("truncated evaluation: dual size mismatch");
  if (!(dual_cap >= 0.0))
    throw ConfigError("truncated evaluation: negative dual cap");
  for (double l : dual)
    if (!(l >= 0.0 && l <= dual_cap))
      throw ConfigError("truncated evaluation: dual outside [0, cap]");
  if (!(reg_weight >= 0.0))
    throw ConfigError("truncated evaluation: negative regularization weight");

  TruncatedValues out;
  const auto value_cap = [H](int h, int, int) {
    return static_cast<double>(H - h);
  };

  Tensor3 q_reward, q_entropy;
  std::vector<Tensor3> q_constraint(mc);
  truncated_backup<Parallel>(o.transitions, pi, o.reward, value_cap, q_reward,
                             out.reward_value);
  out.constraint_value.resize(mc);
  for (int i = 0; i < mc; ++i)
    truncated_backup<Parallel>(o.transitions, pi, o.constraint[i], value_cap,
                               q_constraint[i], out.constraint_value[i]);

  const double log_actions = std::log(static_cast<double>(A));
  const auto entropy_cap = [&](int h, int s, int a) {
    return o.entropy_payoff(h, s, a) + (H - h) * log_actions;
  };
  truncated_backup<Parallel>(o.transitions, pi, o.entropy_payoff_bonus,
                             entropy_cap, q_entropy, out.entropy_value);

  out.action_value = Tensor3(H, S, A, 0.0);
  {
    double* dst = out.action_value.data();
    const double* qr = q_reward.data();
    const double* qe = q_entropy.data();
    const std::size_t n = out.action_value.size();
    for (std::size_t k = 0; k < n; ++k) dst[k] = qr[k] + reg_weight * qe[k];
    for (int i = 0; i < mc; ++i) {
      const double li = dual[i];
      const double* qd = q_constraint[i].data();
      for (std::size_t k = 0; k < n; ++k) dst[k] += li * qd[k];
    }
  }

  const int s1 = o.initial_state;
  out.reward_root = out.reward_value(0, s1);
  out.entropy_root = out.entropy_value(0, s1);
  out.constraint_root.resize(mc);
  for (int i = 0; i < mc; ++i)
    out.constraint_root[i] = out.constraint_value[i](0, s1);
  double root = 0.0;
  for (int a = 0; a < A; ++a)
    root += pi.prob(0, s1, a) * out.action_value(0, s1, a);
  out.root = root;
  return out;
}

}  // namespace

TruncatedValues truncated_policy_evaluation(const OptimisticModel& opt,
                                            const Policy& policy,
                                            const std::vector<double>& dual,
                                            double reg_weight,
                                            double dual_cap) {
  return tpe_impl<true>(opt, policy, dual, reg_weight, dual_cap);
}

namespace serial {
TruncatedValues truncated_policy_evaluation(const OptimisticModel& opt,
                                            const Policy& policy,
                                            const std::vector<double>& dual,
                                            double reg_weight,
                                            double dual_cap) {
  return tpe_impl<false>(opt, policy, dual, reg_weight, dual_cap);
}
}  // namespace serial

}  // namespace flexdome
