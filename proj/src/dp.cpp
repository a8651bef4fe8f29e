#include "flexdome/dp.hpp"

#include <cmath>

#include "flexdome/errors.hpp"

namespace flexdome {

namespace {

void check_eval_args(const CmdpModel& m, const Policy& pi,
                     const Tensor3& payoff) {
  if (pi.horizon() != m.horizon || pi.num_states() != m.num_states ||
      pi.num_actions() != m.num_actions)
    throw ConfigError("evaluate_policy: policy shape mismatch");
  if (payoff.dim0() != m.horizon || payoff.dim1() != m.num_states ||
      payoff.dim2() != m.num_actions)
    throw ConfigError("evaluate_policy: payoff shape mismatch");
}

void check_policy_args(const CmdpModel& m, const Policy& pi) {
  if (pi.horizon() != m.horizon || pi.num_states() != m.num_states ||
      pi.num_actions() != m.num_actions)
    throw ConfigError("occupancy_measure: policy shape mismatch");
}

// One state's backup; both loop drivers share this so their arithmetic is
// identical operation for operation.
inline void backup_state(const CmdpModel& m, const Policy& pi,
                         const Tensor3& payoff, int h, int s,
                         const double* vnext, ValueTables& out) {
  const int A = m.num_actions, S = m.num_states;
  double vs = 0.0;
  for (int a = 0; a < A; ++a) {
    const double* p = m.transitions.row(h, s, a);
    double q = payoff(h, s, a);
    for (int s2 = 0; s2 < S; ++s2) q += p[s2] * vnext[s2];
    out.action_value(h, s, a) = q;
    vs += pi.prob(h, s, a) * q;
  }
  out.value(h, s) = vs;
}

// Forward push, gather form: each next state accumulates over (s, a) with a
// fixed traversal order, so the cell owner is the only writer.
inline double flow_into(const CmdpModel& m, const Policy& pi,
                        const double* weight, int h, int s2) {
  const int S = m.num_states, A = m.num_actions;
  double acc = 0.0;
  for (int s = 0; s < S; ++s) {
    const double ws = weight[s];
    if (ws == 0.0) continue;
    for (int a = 0; a < A; ++a)
      acc += ws * pi.prob(h, s, a) * m.transitions(h, s, a, s2);
  }
  return acc;
}

template <bool Parallel>
ValueTables evaluate_impl(const CmdpModel& m, const Policy& pi,
                          const Tensor3& payoff) {
  check_eval_args(m, pi, payoff);
  const int H = m.horizon, S = m.num_states, A = m.num_actions;
  ValueTables out;
  out.value = Tensor2(H + 1, S, 0.0);
  out.action_value = Tensor3(H, S, A, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double* vnext = out.value.row(h + 1);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
      for (int s = 0; s < S; ++s) backup_state(m, pi, payoff, h, s, vnext, out);
    } else {
      for (int s = 0; s < S; ++s) backup_state(m, pi, payoff, h, s, vnext, out);
    }
  }
  out.root = out.value(0, m.initial_state);
  return out;
}

template <bool Parallel>
Tensor3 occupancy_impl(const CmdpModel& m, const Policy& pi) {
  check_policy_args(m, pi);
  const int H = m.horizon, S = m.num_states, A = m.num_actions;
  Tensor2 weight(H + 1, S, 0.0);
  weight(0, m.initial_state) = 1.0;
  Tensor3 q(H, S, A, 0.0);
  for (int h = 0; h < H; ++h) {
    const double* w = weight.row(h);
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) q(h, s, a) = w[s] * pi.prob(h, s, a);
#pragma omp parallel for schedule(static)
      for (int s2 = 0; s2 < S; ++s2)
        weight(h + 1, s2) = flow_into(m, pi, w, h, s2);
    } else {
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) q(h, s, a) = w[s] * pi.prob(h, s, a);
      for (int s2 = 0; s2 < S; ++s2)
        weight(h + 1, s2) = flow_into(m, pi, w, h, s2);
    }
  }
  return q;
}

double entropy_from_occupancy(const Tensor3& q, const Policy& pi) {
  // 0 * ln 0 reads as 0; a positive cell always has positive probability
  // underneath because the occupancy carries the policy factor.
  double sum = 0.0;
  const int H = q.dim0(), S = q.dim1(), A = q.dim2();
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double qv = q(h, s, a);
        if (qv > 0.0) sum -= qv * std::log(pi.prob(h, s, a));
      }
  return sum;
}

}  // namespace

ValueTables evaluate_policy(const CmdpModel& m, const Policy& pi,
                            const Tensor3& payoff) {
  return evaluate_impl<true>(m, pi, payoff);
}

Tensor3 occupancy_measure(const CmdpModel& m, const Policy& pi) {
  return occupancy_impl<true>(m, pi);
}

double policy_entropy(const CmdpModel& m, const Policy& pi) {
  return entropy_from_occupancy(occupancy_impl<true>(m, pi), pi);
}

namespace serial {

ValueTables evaluate_policy(const CmdpModel& m, const Policy& pi,
                            const Tensor3& payoff) {
  return evaluate_impl<false>(m, pi, payoff);
}

Tensor3 occupancy_measure(const CmdpModel& m, const Policy& pi) {
  return occupancy_impl<false>(m, pi);
}

double policy_entropy(const CmdpModel& m, const Policy& pi) {
  return entropy_from_occupancy(occupancy_impl<false>(m, pi), pi);
}

}  // namespace serial

}  // namespace flexdome
