// Acceptance gate: the full battery of release checks, one verdict line per
// criterion. Each tolerance is pinned here, next to the check that uses it.
// The binary exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "flexdome/dp.hpp"
#include "flexdome/env.hpp"
#include "flexdome/errors.hpp"
#include "flexdome/estimation.hpp"
#include "flexdome/experiment.hpp"
#include "flexdome/metrics.hpp"
#include "flexdome/oracle.hpp"
#include "flexdome/rng.hpp"
#include "flexdome/theory.hpp"

using namespace flexdome;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void verdict(const std::string& label, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << label << ": " << detail
            << std::endl;
  if (!pass) ++g_failures;
}

class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

std::string fmt(double x, int digits = 4) {
  std::ostringstream ss;
  ss.precision(digits);
  ss << x;
  return ss.str();
}

double mean_of(const double* xs, std::size_t n) {
  return std::accumulate(xs, xs + n, 0.0) / static_cast<double>(n);
}

double sd_of(const double* xs, std::size_t n) {
  const double m = mean_of(xs, n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += (xs[i] - m) * (xs[i] - m);
  return std::sqrt(acc / static_cast<double>(n));
}

// ---------------------------------------------------------------- criterion 1
void criterion_1() {
  Stopwatch sw;
  const auto vals = series_initial_decay_batch({1000, 10000, 100000, 1000000});
  const long long ts[] = {1000, 10000, 100000, 1000000};
  bool pass = true;
  std::string seen;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double scaled = vals[i] * std::sqrt(static_cast<double>(ts[i]));
    pass = pass && scaled >= 0.70 && scaled <= 0.80;
    seen += (i ? ", " : "") + fmt(scaled);
  }
  const double secs = sw.seconds();
  pass = pass && secs < 1.0;
  verdict("criterion 1 (initial-decay rate)", pass,
          "scaled series {" + seen + "} in [0.70, 0.80], " + fmt(secs, 2) +
              "s (< 1s)");
}

// ---------------------------------------------------------------- criterion 2
void criterion_2() {
  Stopwatch sw;
  const auto vals = series_optimization_error_batch({1000, 10000, 100000});
  const long long ts[] = {1000, 10000, 100000};
  bool pass = true;
  std::string seen;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double scaled = vals[i] * std::cbrt(static_cast<double>(ts[i]));
    pass = pass && scaled >= 1.0 && scaled <= 3.4;
    seen += (i ? ", " : "") + fmt(scaled);
  }
  const double secs = sw.seconds();
  pass = pass && secs < 5.0;
  verdict("criterion 2 (optimization-error rate)", pass,
          "scaled series {" + seen + "} in [1.0, 3.4], " + fmt(secs, 2) +
              "s (< 5s)");
}

// ---------------------------------------------------------------- criterion 3
void criterion_3() {
  Stopwatch sw;
  const int episodes = 500, trials = 2000, H = 5;
  const double delta = 0.1;
  const double bound =
      std::sqrt(H * std::log(2.0 / delta) / (2.0 * episodes));

  GenConfig gen;
  gen.num_states = 2;
  gen.num_actions = 2;
  gen.horizon = H;
  gen.num_constraints = 1;
  gen.mode = ThresholdMode::Gaussian;
  std::uint64_t used = 0;
  int attempts = 0;
  const GeneratedInstance inst =
      generate_feasible_instance(60321, gen, &used, &attempts);
  const double alpha = inst.threshold.mean[0];
  const Policy pi = uniform_policy(H, gen.num_states, gen.num_actions);

  int covered = 0;
  for (int trial = 0; trial < trials; ++trial) {
    EmpiricalModel emp = EmpiricalModel::for_model(inst.model);
    RngStream rng(10000 + static_cast<std::uint64_t>(trial),
                  "acceptance/hoeffding");
    for (int t = 0; t < episodes; ++t)
      emp.update(rollout(inst.model, inst.threshold, pi, rng));
    if (std::abs(emp.threshold_mean(0) - alpha) <= bound) ++covered;
  }
  const double secs = sw.seconds();
  const bool pass = covered >= 1740 && secs < 10.0;
  verdict("criterion 3 (threshold-estimate coverage)", pass,
          std::to_string(covered) + "/2000 trials within " + fmt(bound) +
              " of the true threshold (need >= 1740), " + fmt(secs, 2) +
              "s (< 10s)");
}

// ---------------------------------------------------------------- criterion 4
void criterion_4() {
  Stopwatch sw;
  RngStream pick(501, "acceptance/tpe-dims");
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    GenConfig gen;
    gen.num_states = 2 + static_cast<int>(pick.uniform() * 4);   // 2..5
    gen.num_actions = 2 + static_cast<int>(pick.uniform() * 2);  // 2..3
    gen.horizon = 1 + static_cast<int>(pick.uniform() * 4);      // 1..4
    gen.num_constraints = 1;
    std::uint64_t used = 0;
    int attempts = 0;
    const GeneratedInstance inst = generate_feasible_instance(
        7000 + 13 * static_cast<std::uint64_t>(trial), gen, &used, &attempts);
    const CmdpModel& m = inst.model;

    // True transitions, zero bonus, payoffs scaled far below the per-step
    // caps: the truncated recursion must match the plain one.
    EmpiricalModel emp = EmpiricalModel::for_model(m);
    BonusConfig bc;
    bc.total_episodes = 100;
    bc.scale = 0.0;
    const Policy pi = uniform_policy(m.horizon, m.num_states, m.num_actions);
    OptimisticModel opt = build_optimistic_model(emp, pi, bc);
    const double shrink = 1.0 / (2.0 * m.horizon);
    opt.transitions = m.transitions;
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a) {
          opt.reward(h, s, a) = m.reward(h, s, a) * shrink;
          opt.constraint[0](h, s, a) = m.constraint[0](h, s, a) * shrink;
        }

    const std::vector<double> dual{0.75};
    const double reg = 0.25;
    const TruncatedValues tv =
        truncated_policy_evaluation(opt, pi, dual, reg, 10.0);

    Tensor3 composite(m.horizon, m.num_states, m.num_actions);
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
          composite(h, s, a) = opt.reward(h, s, a) +
                               dual[0] * opt.constraint[0](h, s, a) +
                               reg * opt.entropy_payoff(h, s, a);
    const ValueTables exact = evaluate_policy(m, pi, composite);
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
          worst = std::max(worst, std::abs(tv.action_value(h, s, a) -
                                           exact.action_value(h, s, a)));
  }
  const double secs = sw.seconds();
  const bool pass = worst < 1e-9 && secs < 5.0;
  verdict("criterion 4 (truncated evaluation equals plain recursion)", pass,
          "max |Qhat - Q| = " + fmt(worst, 3) +
              " over 100 instances (need < 1e-9), " + fmt(secs, 2) +
              "s (< 5s)");
}

// ---------------------------------------------------------------- criterion 5
double grid_optimum(const CmdpModel& m, double step) {
  const double cap = 4.0 * m.horizon /
                     *std::min_element(m.threshold.begin(), m.threshold.end());
  double best = std::numeric_limits<double>::infinity();
  Tensor3 payoff(m.horizon, m.num_states, m.num_actions);
  for (double lam = 0.0; lam <= cap; lam += step) {
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
          payoff(h, s, a) = m.reward(h, s, a) + lam * m.constraint[0](h, s, a);
    best = std::min(best, max_value(m, payoff).value - lam * m.threshold[0]);
  }
  return best;
}

void criterion_5() {
  Stopwatch sw;
  RngStream pick(601, "acceptance/oracle-dims");
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    GenConfig gen;
    gen.num_states = 2 + static_cast<int>(pick.uniform() * 3);  // 2..4
    gen.num_actions = 2;
    gen.horizon = 1 + static_cast<int>(pick.uniform() * 3);  // 1..3
    gen.num_constraints = 1;
    std::uint64_t used = 0;
    int attempts = 0;
    const GeneratedInstance inst = generate_feasible_instance(
        9000 + 17 * static_cast<std::uint64_t>(trial), gen, &used, &attempts);
    const double exact =
        cmdp_optimum(inst.model, inst.model.threshold).value;
    worst = std::max(worst, std::abs(exact - grid_optimum(inst.model, 1e-4)));
  }

  // Hand-forced binding instance: one state, two actions, one step,
  // reward (1, 0) against constraint payoff (0, 1) with threshold 0.5. The
  // optimal policy randomizes evenly; the value is exactly 0.5.
  CmdpModel knife;
  knife.num_states = 1;
  knife.num_actions = 2;
  knife.horizon = 1;
  knife.num_constraints = 1;
  knife.transitions = Tensor4(1, 1, 2, 1);
  knife.transitions.fill(1.0);
  knife.reward = Tensor3(1, 1, 2);
  knife.reward(0, 0, 0) = 1.0;
  knife.constraint.assign(1, Tensor3(1, 1, 2));
  knife.constraint[0](0, 0, 1) = 1.0;
  knife.threshold.assign(1, 0.5);
  knife.validate();
  const double knife_err =
      std::abs(cmdp_optimum(knife, knife.threshold).value - 0.5);

  const double secs = sw.seconds();
  const bool pass = worst < 1e-3 && knife_err < 1e-9 && secs < 30.0;
  verdict("criterion 5 (planning oracle vs dual grid)", pass,
          "max |oracle - grid| = " + fmt(worst, 3) +
              " over 50 instances (need < 1e-3), binding-instance error " +
              fmt(knife_err, 3) + " (need < 1e-9), " + fmt(secs, 2) +
              "s (< 30s)");
}

// ----------------------------------------------------------- criteria 6 and 7
struct ExperimentBattery {
  std::vector<RunRecord> fixed;     // per seed: flexdome, vanilla_pd
  std::vector<RunRecord> gaussian;  // per seed: flexdome, vanilla_pd, no_reg
};

ExperimentBattery run_battery(const fs::path& scratch) {
  ExperimentConfig cfg;
  cfg.gen.num_states = 20;
  cfg.gen.num_actions = 5;
  cfg.gen.horizon = 5;
  cfg.gen.num_constraints = 1;
  cfg.episodes = 20000;
  cfg.seeds = {1, 2, 3};
  cfg.bonus_scale = 1e-3;
  cfg.margin_scale = 1e-5;
  cfg.eval_every = 20;

  ExperimentBattery out;

  cfg.gen.mode = ThresholdMode::Fixed;
  cfg.algorithms.assign(2, AlgorithmSpec{});
  cfg.algorithms[1].kind = "vanilla_pd";
  cfg.output_dir = (scratch / "fixed").string();
  std::cerr << "  [experiment battery] fixed-threshold arms..." << std::endl;
  out.fixed = run_experiment(cfg);

  cfg.gen.mode = ThresholdMode::Gaussian;
  cfg.algorithms.push_back(AlgorithmSpec{});
  cfg.algorithms[2].use_regularization = false;
  cfg.output_dir = (scratch / "gaussian").string();
  std::cerr << "  [experiment battery] noisy-threshold arms..." << std::endl;
  out.gaussian = run_experiment(cfg);
  return out;
}

void criterion_6(const ExperimentBattery& battery) {
  // (a) final cumulative strong violation of the safeguarded learner at most
  //     a quarter of the unsafeguarded baseline's, on every (mode, seed).
  bool pass_a = true;
  double worst_a = 0.0;
  std::string detail_a;
  const auto scan_a = [&](const std::vector<RunRecord>& recs, int arms,
                          const char* mode) {
    for (std::size_t s = 0; s * arms < recs.size(); ++s) {
      const RunRecord& fx = recs[s * arms];
      const RunRecord& vn = recs[s * arms + 1];
      const double ratio = fx.strong.violation / vn.strong.violation;
      worst_a = std::max(worst_a, ratio);
      if (!(fx.strong.violation <= 0.25 * vn.strong.violation)) pass_a = false;
      detail_a += std::string(detail_a.empty() ? "" : ", ") + mode + "/s" +
                  std::to_string(fx.seed) + "=" + fmt(ratio, 3);
    }
  };
  scan_a(battery.fixed, 2, "fixed");
  scan_a(battery.gaussian, 3, "gauss");
  verdict("criterion 6a (strong violation vs unsafeguarded baseline)", pass_a,
          "per-seed ratios {" + detail_a + "}, need <= 0.25 each");

  // (b) mean instantaneous violation over the last tenth of the run at most a
  //     tenth of the first tenth's.
  bool pass_b = true;
  std::string detail_b;
  const auto scan_b = [&](const std::vector<RunRecord>& recs, int arms,
                          const char* mode) {
    for (std::size_t s = 0; s * arms < recs.size(); ++s) {
      const RunRecord& fx = recs[s * arms];
      const std::size_t T = fx.inst_violation[0].size(), tenth = T / 10;
      const double first = mean_of(fx.inst_violation[0].data(), tenth);
      const double last =
          mean_of(fx.inst_violation[0].data() + (T - tenth), tenth);
      if (!(last <= 0.10 * first)) pass_b = false;
      detail_b += std::string(detail_b.empty() ? "" : ", ") + mode + "/s" +
                  std::to_string(fx.seed) + "=" + fmt(last, 3) + "/" +
                  fmt(first, 3);
    }
  };
  scan_b(battery.fixed, 2, "fixed");
  scan_b(battery.gaussian, 3, "gauss");
  verdict("criterion 6b (instantaneous violation late vs early)", pass_b,
          "last-tenth/first-tenth means {" + detail_b +
              "}, need last <= 0.10 x first");

  // (c) iterate health: duals inside the box, policies on the simplex, for
  //     every arm of the battery.
  bool pass_c = true;
  double worst_simplex = 0.0, smallest_prob = 1.0;
  const auto scan_c = [&](const std::vector<RunRecord>& recs) {
    for (const RunRecord& rec : recs) {
      worst_simplex = std::max(worst_simplex, rec.max_simplex_error);
      smallest_prob = std::min(smallest_prob, rec.min_policy_prob);
      if (rec.min_dual < 0.0 || rec.max_dual > rec.dual_cap + 1e-12 ||
          rec.max_simplex_error > 1e-9 || !(rec.min_policy_prob > 0.0))
        pass_c = false;
    }
  };
  scan_c(battery.fixed);
  scan_c(battery.gaussian);
  verdict("criterion 6c (dual box and simplex health)", pass_c,
          "max simplex error " + fmt(worst_simplex, 3) +
              " (need <= 1e-9), min policy prob " + fmt(smallest_prob, 3) +
              ", duals inside [0, cap] on all arms");
}

void criterion_7(const ExperimentBattery& battery) {
  // Removing the regularizer must reintroduce oscillation: the gap's standard
  // deviation over the final quarter, seed-averaged, at least 1.5x larger.
  std::vector<double> sd_full, sd_noreg;
  std::string per_seed;
  for (std::size_t s = 0; s * 3 < battery.gaussian.size(); ++s) {
    const RunRecord& fx = battery.gaussian[s * 3];
    const RunRecord& nr = battery.gaussian[s * 3 + 2];
    const std::size_t T = fx.inst_gap.size(), quarter = T / 4;
    sd_full.push_back(sd_of(fx.inst_gap.data() + (T - quarter), quarter));
    sd_noreg.push_back(sd_of(nr.inst_gap.data() + (T - quarter), quarter));
    per_seed += std::string(per_seed.empty() ? "" : ", ") + "s" +
                std::to_string(fx.seed) + "=" +
                fmt(sd_noreg.back() / sd_full.back(), 3);
  }
  const double ratio = mean_of(sd_noreg.data(), sd_noreg.size()) /
                       mean_of(sd_full.data(), sd_full.size());
  verdict("criterion 7 (regularizer ablation restores oscillation)",
          ratio >= 1.5,
          "seed-averaged gap-sd ratio " + fmt(ratio, 3) +
              " (need >= 1.5); per-seed {" + per_seed + "}");
}

// ---------------------------------------------------------------- criterion 8
std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw ConfigError("acceptance: cannot open " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void criterion_8(const fs::path& scratch) {
  ExperimentConfig cfg;
  cfg.gen.num_states = 4;
  cfg.gen.num_actions = 2;
  cfg.gen.horizon = 3;
  cfg.gen.num_constraints = 1;
  cfg.episodes = 50;
  cfg.seeds = {5, 6};
  cfg.algorithms.assign(2, AlgorithmSpec{});
  cfg.algorithms[1].kind = "vanilla_pd";
  cfg.output_dir = (scratch / "repro_a").string();
  run_experiment(cfg);

  const auto manifest =
      nlohmann::json::parse(slurp(scratch / "repro_a" / "manifest.json"));
  ExperimentConfig replay = config_from_json(manifest.at("config"));
  replay.output_dir = (scratch / "repro_b").string();
  run_experiment(replay);

  bool pass = true;
  int compared = 0;
  for (const auto& run : manifest.at("runs")) {
    const std::string csv = run.at("csv").get<std::string>();
    if (slurp(scratch / "repro_a" / csv) != slurp(scratch / "repro_b" / csv))
      pass = false;
    ++compared;
  }
  verdict("criterion 8 (manifest replay determinism)", pass,
          std::to_string(compared) + " CSVs byte-identical after replaying " +
              "the manifest config into a fresh directory");
}

// ---------------------------------------------------------------- criterion 9
void criterion_9() {
  RngStream rng(901, "acceptance/metric-series");
  bool pass = true;
  std::string why;
  for (int trial = 0; trial < 1000 && pass; ++trial) {
    const std::size_t T = 1 + static_cast<std::size_t>(rng.uniform() * 60);
    const int m = 1 + static_cast<int>(rng.uniform() * 3);
    std::vector<double> gap(T);
    std::vector<std::vector<double>> viol(m, std::vector<double>(T));
    for (std::size_t t = 0; t < T; ++t) {
      gap[t] = 2.0 * rng.uniform() - 1.0;
      for (int i = 0; i < m; ++i) viol[i][t] = 2.0 * rng.uniform() - 1.0;
    }
    const StrongMetrics sm = strong_metrics(gap, viol);

    const double weak = std::accumulate(gap.begin(), gap.end(), 0.0);
    if (!(sm.regret >= weak - 1e-12)) { pass = false; why = "strong < weak"; }
    if (sm.regret < 0.0 || sm.violation < 0.0) { pass = false; why = "negative total"; }
    for (std::size_t t = 1; t < T; ++t) {
      if (sm.cum_regret[t] < sm.cum_regret[t - 1] ||
          sm.cum_violation[t] < sm.cum_violation[t - 1]) {
        pass = false;
        why = "cumulative series decreased";
      }
    }

    // Episode permutation (same shuffle on every series) leaves totals alone.
    std::vector<std::size_t> order(T);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t k = T; k > 1; --k)
      std::swap(order[k - 1],
                order[static_cast<std::size_t>(rng.uniform() * k)]);
    std::vector<double> pgap(T);
    std::vector<std::vector<double>> pviol(m, std::vector<double>(T));
    for (std::size_t t = 0; t < T; ++t) {
      pgap[t] = gap[order[t]];
      for (int i = 0; i < m; ++i) pviol[i][t] = viol[i][order[t]];
    }
    const StrongMetrics pm = strong_metrics(pgap, pviol);
    if (std::abs(pm.regret - sm.regret) > 1e-9 ||
        std::abs(pm.violation - sm.violation) > 1e-9) {
      pass = false;
      why = "permutation moved a total";
    }
  }
  verdict("criterion 9 (strong-metric properties)", pass,
          pass ? "1000 random series: dominance, permutation invariance, "
                 "monotone cumulatives all hold"
               : why);
}

}  // namespace

int main() {
  std::cout << "acceptance battery" << std::endl;
  const fs::path scratch =
      fs::temp_directory_path() / "flexdome_acceptance_scratch";
  fs::remove_all(scratch);

  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    const ExperimentBattery battery = run_battery(scratch);
    criterion_6(battery);
    criterion_7(battery);
    criterion_8(scratch);
    criterion_9();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance battery aborted: " << e.what() << std::endl;
    return 1;
  }

  std::cout << (g_failures == 0
                    ? "acceptance battery: all criteria passed"
                    : "acceptance battery: " + std::to_string(g_failures) +
                          " criterion(s) failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
