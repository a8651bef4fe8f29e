#include "flexdome/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "flexdome/dp.hpp"
#include "flexdome/errors.hpp"

namespace flexdome {

namespace {

inline void argmax_state(const CmdpModel& m, const Tensor3& payoff, int h,
                         int s, const double* vnext, ValueTables& tables,
                         Policy& greedy) {
  const int A = m.num_actions, S = m.num_states;
  double best = -std::numeric_limits<double>::infinity();
  int best_a = 0;
  for (int a = 0; a < A; ++a) {
    const double* p = m.transitions.row(h, s, a);
    double q = payoff(h, s, a);
    for (int s2 = 0; s2 < S; ++s2) q += p[s2] * vnext[s2];
    tables.action_value(h, s, a) = q;
    if (q > best) {  // strict: ties keep the lowest action index
      best = q;
      best_a = a;
    }
  }
  tables.value(h, s) = best;
  greedy.prob(h, s, best_a) = 1.0;
}

Tensor3 mixed_payoff(const CmdpModel& m, const std::vector<double>& dual) {
  Tensor3 mix = m.reward;
  for (int i = 0; i < m.num_constraints; ++i) {
    const double li = dual[i];
    if (li == 0.0) continue;
    const double* src = m.constraint[i].data();
    double* dst = mix.data();
    for (std::size_t k = 0; k < mix.size(); ++k) dst[k] += li * src[k];
  }
  return mix;
}

}  // namespace

PlanResult max_value(const CmdpModel& m, const Tensor3& payoff) {
  if (payoff.dim0() != m.horizon || payoff.dim1() != m.num_states ||
      payoff.dim2() != m.num_actions)
    throw ConfigError("max_value: payoff shape mismatch");
  const int H = m.horizon, S = m.num_states, A = m.num_actions;
  PlanResult res;
  res.tables.value = Tensor2(H + 1, S, 0.0);
  res.tables.action_value = Tensor3(H, S, A, 0.0);
  res.policy.prob = Tensor3(H, S, A, 0.0);
  for (int h = H - 1; h >= 0; --h) {
    const double* vnext = res.tables.value.row(h + 1);
#pragma omp parallel for schedule(static)
    for (int s = 0; s < S; ++s)
      argmax_state(m, payoff, h, s, vnext, res.tables, res.policy);
  }
  res.tables.root = res.tables.value(0, m.initial_state);
  res.value = res.tables.root;
  return res;
}

SlaterInfo slater_quantities(const CmdpModel& m) {
  if (m.num_constraints < 1)
    throw ConfigError("slater_quantities: model has no constraints");
  SlaterInfo out;
  out.gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.num_constraints; ++i) {
    const double best = max_value(m, m.constraint[i]).value;
    if (!(best > 0.0))
      throw ConfigError("slater_quantities: constraint payoff unreachable");
    const double alpha = 0.5 * best;
    out.threshold.push_back(alpha);
    out.gap = std::min(out.gap, best - alpha);
  }
  return out;
}

std::pair<double, double> golden_section_min(
    double lo, double hi, double tol, const std::function<double(double)>& f) {
  if (!(hi > lo) || !(tol > 0.0))
    throw ConfigError("golden_section_min: bad interval");
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

DualSolution cmdp_optimum(const CmdpModel& m,
                          const std::vector<double>& threshold) {
  if (static_cast<int>(threshold.size()) != m.num_constraints)
    throw ConfigError("cmdp_optimum: threshold count mismatch");
  if (m.num_constraints < 1)
    throw ConfigError("cmdp_optimum: model has no constraints");

  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.num_constraints; ++i)
    gap = std::min(gap, max_value(m, m.constraint[i]).value - threshold[i]);
  if (!(gap > 0.0))
    throw ConfigError("cmdp_optimum: instance has no strictly feasible policy");
  const double cap = 4.0 * m.horizon / gap;

  auto dual_value = [&](const std::vector<double>& lam) {
    double v = max_value(m, mixed_payoff(m, lam)).value;
    for (int i = 0; i < m.num_constraints; ++i) v -= lam[i] * threshold[i];
    return v;
  };

  if (m.num_constraints == 1) {
    auto [x, fx] = golden_section_min(
        0.0, cap, 1e-9, [&](double l) { return dual_value({l}); });
    return {fx, {x}};
  }

  // Projected subgradient with iterate averaging. Exactness here is best
  // effort; the single-constraint path above is the calibrated one.
  const int mc = m.num_constraints;
  std::vector<double> lam(mc, 0.0), avg(mc, 0.0);
  const int iters = 100000;
  for (int k = 1; k <= iters; ++k) {
    PlanResult plan = max_value(m, mixed_payoff(m, lam));
    const double step = cap / std::sqrt(static_cast<double>(k));
    for (int i = 0; i < mc; ++i) {
      const double slope =
          evaluate_policy(m, plan.policy, m.constraint[i]).root - threshold[i];
      lam[i] = std::clamp(lam[i] - step * slope, 0.0, cap);
      avg[i] += lam[i];
    }
  }
  for (double& x : avg) x /= iters;
  return {dual_value(avg), avg};
}

}  // namespace flexdome
