// Timing comparison of the OpenMP dynamic-programming kernels against their
// single-threaded reference twins. Not a ctest; run manually. Both variants
// must agree bit for bit, so each block also prints an equality check.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "flexdome/dp.hpp"
#include "flexdome/env.hpp"
#include "flexdome/estimation.hpp"
#include "flexdome/rng.hpp"

using namespace flexdome;

namespace {

double seconds(const std::function<void()>& body, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int r = 0; r < reps; ++r) body();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

Policy random_policy(const CmdpModel& m, RngStream& rng) {
  Policy pi = uniform_policy(m.horizon, m.num_states, m.num_actions);
  for (int h = 0; h < m.horizon; ++h)
    for (int s = 0; s < m.num_states; ++s) {
      double norm = 0.0;
      for (int a = 0; a < m.num_actions; ++a) {
        const double w = 0.1 + rng.uniform();
        pi.prob(h, s, a) = w;
        norm += w;
      }
      for (int a = 0; a < m.num_actions; ++a) pi.prob(h, s, a) /= norm;
    }
  return pi;
}

void bench_size(int S, int A, int H) {
  GenConfig gc;
  gc.num_states = S;
  gc.num_actions = A;
  gc.horizon = H;
  gc.num_constraints = 1;
  const auto inst = generate_instance(7, gc);
  RngStream rng(7, "bench/policy");
  const Policy pi = random_policy(inst.model, rng);

  const int reps = S >= 128 ? 3 : 10;

  // exact policy evaluation
  ValueTables v_ser, v_par;
  const double t_eval_s = seconds(
      [&] { v_ser = serial::evaluate_policy(inst.model, pi, inst.model.reward); },
      reps);
  const double t_eval_p = seconds(
      [&] { v_par = evaluate_policy(inst.model, pi, inst.model.reward); }, reps);
  const bool eval_eq = v_ser.value == v_par.value &&
                       v_ser.action_value == v_par.action_value &&
                       v_ser.root == v_par.root;

  // occupancy measure
  Tensor3 q_ser(1, 1, 1), q_par(1, 1, 1);
  const double t_occ_s = seconds(
      [&] { q_ser = serial::occupancy_measure(inst.model, pi); }, reps);
  const double t_occ_p =
      seconds([&] { q_par = occupancy_measure(inst.model, pi); }, reps);
  const bool occ_eq = q_ser == q_par;

  // truncated policy evaluation on a lightly-faked empirical model
  EmpiricalModel emp = EmpiricalModel::for_model(inst.model);
  RngStream roll_rng(7, "bench/rollouts");
  for (int e = 0; e < 50; ++e)
    emp.update(rollout(inst.model, inst.threshold, pi, roll_rng));
  BonusConfig bc;
  bc.total_episodes = 1000;
  const OptimisticModel opt = build_optimistic_model(emp, pi, bc);
  const std::vector<double> dual(1, 1.5);
  TruncatedValues tv_ser, tv_par;
  const double t_tpe_s = seconds(
      [&] {
        tv_ser = serial::truncated_policy_evaluation(opt, pi, dual, 0.5, 10.0);
      },
      reps);
  const double t_tpe_p = seconds(
      [&] { tv_par = truncated_policy_evaluation(opt, pi, dual, 0.5, 10.0); },
      reps);
  const bool tpe_eq = tv_ser.action_value == tv_par.action_value &&
                      tv_ser.root == tv_par.root;

  auto row = [&](const char* name, double ts, double tp, bool eq) {
    std::printf("S=%-4d A=%-2d H=%-2d  %-12s  serial %9.3f ms  parallel %9.3f "
                "ms  speedup %5.2fx  %s\n",
                S, A, H, name, ts * 1e3, tp * 1e3, ts / tp,
                eq ? "bit-identical" : "MISMATCH");
  };
  row("evaluate", t_eval_s, t_eval_p, eval_eq);
  row("occupancy", t_occ_s, t_occ_p, occ_eq);
  row("truncated", t_tpe_s, t_tpe_p, tpe_eq);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; both columns run the same kernels\n");
#endif
  bench_size(64, 8, 8);
  bench_size(128, 8, 8);
  bench_size(256, 8, 8);
  return 0;
}
