#include "flexdome/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

#include "flexdome/dp.hpp"
#include "flexdome/errors.hpp"
#include "flexdome/oracle.hpp"

namespace flexdome {

std::string AlgorithmSpec::name() const {
  if (kind != "flexdome") return kind;
  std::string n = "flexdome";
  if (!use_margin) n += "_no_margin";
  if (!use_regularization) n += "_no_reg";
  if (oracle_threshold) n += "_oracle_thr";
  return n;
}

void AlgorithmSpec::validate() const {
  if (kind != "flexdome" && kind != "vanilla_pd" && kind != "fixed_rpd")
    throw ConfigError("algorithm kind '" + kind + "' unknown");
}

void ExperimentConfig::validate() const {
  gen.validate();
  if (episodes < 1) throw ConfigError("config: episodes must be >= 1");
  if (seeds.empty()) throw ConfigError("config: no seeds");
  if (algorithms.empty()) throw ConfigError("config: no algorithms");
  if (!(delta > 0.0 && delta < 1.0))
    throw ConfigError("config: delta outside (0, 1)");
  if (!(bonus_scale >= 0.0) || !(margin_scale >= 0.0))
    throw ConfigError("config: negative scale");
  if (eval_every < 1 || episodes % eval_every != 0)
    throw ConfigError("config: eval_every must divide episodes");
  if (output_dir.empty()) throw ConfigError("config: empty output_dir");

  std::set<std::string> names;
  for (const auto& a : algorithms) {
    a.validate();
    if (!names.insert(a.name()).second)
      throw ConfigError("config: duplicate algorithm variant " + a.name());
  }
  std::set<std::uint64_t> sd(seeds.begin(), seeds.end());
  if (sd.size() != seeds.size()) throw ConfigError("config: duplicate seeds");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    ExperimentConfig cfg;
    const auto& dims = j.at("dims");
    cfg.gen.num_states = dims.at("states").get<int>();
    cfg.gen.num_actions = dims.at("actions").get<int>();
    cfg.gen.horizon = dims.at("horizon").get<int>();
    cfg.gen.num_constraints = dims.at("constraints").get<int>();
    cfg.gen.dirichlet_conc = j.value("dirichlet_conc", 0.1);
    cfg.gen.mode =
        threshold_mode_from_string(j.value("threshold_mode", "fixed"));
    cfg.episodes = j.at("episodes").get<long long>();
    cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& ja : j.at("algorithms")) {
      AlgorithmSpec a;
      a.kind = ja.at("kind").get<std::string>();
      a.use_margin = ja.value("use_margin", true);
      a.use_regularization = ja.value("use_regularization", true);
      a.oracle_threshold = ja.value("oracle_threshold", false);
      cfg.algorithms.push_back(a);
    }
    cfg.delta = j.value("delta", 0.1);
    cfg.bonus_scale = j.value("bonus_scale", 1e-3);
    cfg.margin_scale = j.value("margin_scale", 1e-5);
    cfg.eval_every = j.value("eval_every", 1LL);
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.validate();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config json: ") + e.what());
  }
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["dims"] = {{"states", cfg.gen.num_states},
               {"actions", cfg.gen.num_actions},
               {"horizon", cfg.gen.horizon},
               {"constraints", cfg.gen.num_constraints}};
  j["dirichlet_conc"] = cfg.gen.dirichlet_conc;
  j["threshold_mode"] = to_string(cfg.gen.mode);
  j["episodes"] = cfg.episodes;
  j["seeds"] = cfg.seeds;
  nlohmann::json algs = nlohmann::json::array();
  for (const auto& a : cfg.algorithms)
    algs.push_back({{"kind", a.kind},
                    {"use_margin", a.use_margin},
                    {"use_regularization", a.use_regularization},
                    {"oracle_threshold", a.oracle_threshold}});
  j["algorithms"] = std::move(algs);
  j["delta"] = cfg.delta;
  j["bonus_scale"] = cfg.bonus_scale;
  j["margin_scale"] = cfg.margin_scale;
  j["eval_every"] = cfg.eval_every;
  j["output_dir"] = cfg.output_dir;
  return j;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // nlohmann objects iterate in key order, so dump() is canonical.
  const std::string s = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GeneratedInstance generate_feasible_instance(std::uint64_t seed,
                                             const GenConfig& gen,
                                             std::uint64_t* instance_seed,
                                             int* attempts) {
  gen.validate();
  std::uint64_t s = seed;
  for (int k = 0; k < 10; ++k) {
    try {
      GeneratedInstance inst = generate_instance(s, gen);
      if (instance_seed) *instance_seed = s;
      if (attempts) *attempts = k + 1;
      return inst;
    } catch (const ConfigError&) {
      // Degenerate draw (no strictly feasible policy); perturb and retry.
      s = substream_seed(seed, "instance/retry/" + std::to_string(k));
    }
  }
  throw ConfigError("instance generation: no feasible instance in 10 attempts");
}

RunRecord run_single(const ExperimentConfig& cfg, const GeneratedInstance& inst,
                     std::uint64_t seed, const AlgorithmSpec& alg) {
  alg.validate();
  const CmdpModel& m = inst.model;
  const int mc = m.num_constraints;
  const long long T = cfg.episodes;

  const SlaterInfo sl = slater_quantities(m);
  const DualSolution opt = cmdp_optimum(m, m.threshold);

  RunRecord rec;
  rec.seed = seed;
  rec.algorithm = alg.name();
  rec.threshold_mode = to_string(inst.threshold.mode);
  rec.optimum = opt.value;
  rec.slater_gap = sl.gap;
  rec.dual_cap = 4.0 * m.horizon / sl.gap;
  rec.threshold = m.threshold;
  rec.inst_gap.resize(T);
  rec.inst_violation.assign(mc, std::vector<double>(T));
  rec.dual.assign(mc, std::vector<double>(T));
  rec.step_size.resize(T);
  rec.reg_weight.resize(T);
  rec.margin0.resize(T);
  rec.threshold_est0.resize(T);

  ScheduleConfig sched;
  BaselineConfig base;
  const bool is_flexdome = alg.kind == "flexdome";
  if (is_flexdome) {
    sched = ScheduleConfig::for_model(m, sl.gap, cfg.delta, cfg.margin_scale);
    sched.use_margin = alg.use_margin;
    sched.use_regularization = alg.use_regularization;
    sched.oracle_threshold = alg.oracle_threshold;
    rec.margin_window = alg.use_margin ? margin_feasibility_window(sched) : 0;
  } else if (alg.kind == "vanilla_pd") {
    base = BaselineConfig::vanilla(rec.dual_cap);
  } else {
    base = BaselineConfig::fixed_reg(rec.dual_cap, T);
  }

  BonusConfig bonus;
  bonus.delta = cfg.delta;
  bonus.total_episodes = T;
  bonus.scale = cfg.bonus_scale;

  LearnerState st = LearnerState::init(m);
  EmpiricalModel emp = EmpiricalModel::for_model(m);
  rec.min_dual = 0.0;
  rec.max_dual = 0.0;

  for (long long t = 1; t <= T; ++t) {
    const Policy acting = st.policy;  // the policy this episode plays

    const double value = evaluate_policy(m, acting, m.reward).root;
    rec.inst_gap[t - 1] = opt.value - value;
    for (int i = 0; i < mc; ++i)
      rec.inst_violation[i][t - 1] =
          m.threshold[i] - evaluate_policy(m, acting, m.constraint[i]).root;

    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s) {
        double sum = 0.0;
        for (int a = 0; a < m.num_actions; ++a) {
          const double p = acting.prob(h, s, a);
          rec.min_policy_prob = std::min(rec.min_policy_prob, p);
          sum += p;
        }
        rec.max_simplex_error =
            std::max(rec.max_simplex_error, std::abs(sum - 1.0));
      }

    const StepDiagnostics diag = is_flexdome
                                     ? learner_step(st, emp, bonus, sched)
                                     : baseline_step(st, emp, bonus, base);
    for (int i = 0; i < mc; ++i) {
      rec.dual[i][t - 1] = st.dual[i];
      rec.min_dual = std::min(rec.min_dual, st.dual[i]);
      rec.max_dual = std::max(rec.max_dual, st.dual[i]);
    }
    rec.step_size[t - 1] = diag.step_size;
    rec.reg_weight[t - 1] = diag.reg_weight;
    rec.margin0[t - 1] = diag.margin.empty() ? 0.0 : diag.margin[0];
    rec.threshold_est0[t - 1] =
        diag.threshold_seen.empty() ? 0.0 : diag.threshold_seen[0];

    RngStream ep_rng(seed,
                     "rollout/" + rec.algorithm + "/" + std::to_string(t));
    emp.update(rollout(m, inst.threshold, acting, ep_rng));
  }

  rec.strong = strong_metrics(rec.inst_gap, rec.inst_violation);
  return rec;
}

namespace {

std::string git_describe_or(const std::string& fallback) {
  std::string out;
  if (FILE* p = popen("git describe --always --dirty 2>/dev/null", "r")) {
    char buf[256];
    if (fgets(buf, sizeof buf, p)) out = buf;
    pclose(p);
  }
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r'))
    out.pop_back();
  return out.empty() ? fallback : out;
}

void format_cell(std::string& line, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  line += buf;
}

}  // namespace

void write_run_csv(const RunRecord& rec, long long eval_every,
                   const std::string& path) {
  const long long T = static_cast<long long>(rec.inst_gap.size());
  if (eval_every < 1 || T % eval_every != 0)
    throw ConfigError("write_run_csv: eval_every must divide the run length");
  const int mc = static_cast<int>(rec.inst_violation.size());

  std::ofstream f(path, std::ios::binary);  // '\n' endings everywhere
  if (!f) throw ConfigError("write_run_csv: cannot open " + path);

  std::string line = "episode,inst_gap";
  for (int i = 0; i < mc; ++i) line += ",inst_violation_" + std::to_string(i);
  line += ",cum_strong_regret,cum_strong_violation,cum_weak_regret";
  for (int i = 0; i < mc; ++i) line += ",lambda_" + std::to_string(i);
  line += ",eta,tau,eps_0,alpha_hat_0\n";
  f << line;

  for (long long t = eval_every; t <= T; t += eval_every) {
    const long long k = t - 1;
    line.clear();
    format_cell(line, static_cast<double>(t));
    line += ',';
    format_cell(line, rec.inst_gap[k]);
    for (int i = 0; i < mc; ++i) {
      line += ',';
      format_cell(line, rec.inst_violation[i][k]);
    }
    line += ',';
    format_cell(line, rec.strong.cum_regret[k]);
    line += ',';
    format_cell(line, rec.strong.cum_violation[k]);
    line += ',';
    format_cell(line, rec.strong.cum_weak_regret[k]);
    for (int i = 0; i < mc; ++i) {
      line += ',';
      format_cell(line, rec.dual[i][k]);
    }
    line += ',';
    format_cell(line, rec.step_size[k]);
    line += ',';
    format_cell(line, rec.reg_weight[k]);
    line += ',';
    format_cell(line, rec.margin0[k]);
    line += ',';
    format_cell(line, rec.threshold_est0[k]);
    line += '\n';
    f << line;
  }
  if (!f) throw ConfigError("write_run_csv: write failed for " + path);
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  struct SeedInstance {
    GeneratedInstance inst;
    std::uint64_t instance_seed = 0;
    int attempts = 1;
  };
  std::vector<SeedInstance> instances(cfg.seeds.size());
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i)
    instances[i].inst = generate_feasible_instance(
        cfg.seeds[i], cfg.gen, &instances[i].instance_seed,
        &instances[i].attempts);

  const std::size_t n_runs = cfg.seeds.size() * cfg.algorithms.size();
  std::vector<RunRecord> records(n_runs);
  std::string first_error;
  bool error_is_config = false;

#pragma omp parallel for schedule(dynamic)
  for (std::size_t idx = 0; idx < n_runs; ++idx) {
    const std::size_t si = idx / cfg.algorithms.size();
    const std::size_t ai = idx % cfg.algorithms.size();
    try {
      RunRecord rec = run_single(cfg, instances[si].inst, cfg.seeds[si],
                                 cfg.algorithms[ai]);
      rec.instance_seed = instances[si].instance_seed;
      rec.gen_attempts = instances[si].attempts;
      records[idx] = std::move(rec);
    } catch (const std::exception& e) {
#pragma omp critical
      if (first_error.empty()) {
        first_error = e.what();
        error_is_config = dynamic_cast<const ConfigError*>(&e) != nullptr;
      }
    }
  }
  if (!first_error.empty()) {
    if (error_is_config) throw ConfigError(first_error);
    throw NumericalError(first_error);
  }

  std::filesystem::create_directories(cfg.output_dir);
  nlohmann::json runs = nlohmann::json::array();
  for (std::size_t idx = 0; idx < n_runs; ++idx) {
    const RunRecord& rec = records[idx];
    const std::string csv =
        rec.algorithm + "_seed" + std::to_string(rec.seed) + ".csv";
    write_run_csv(rec, cfg.eval_every, cfg.output_dir + "/" + csv);
    runs.push_back({{"algorithm", rec.algorithm},
                    {"seed", rec.seed},
                    {"csv", csv},
                    {"episodes", cfg.episodes},
                    {"margin_window", rec.margin_window}});
  }

  nlohmann::json insts = nlohmann::json::array();
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    const RunRecord& rec = records[i * cfg.algorithms.size()];
    insts.push_back({{"seed", cfg.seeds[i]},
                     {"instance_seed", instances[i].instance_seed},
                     {"attempts", instances[i].attempts},
                     {"optimum", rec.optimum},
                     {"threshold", rec.threshold},
                     {"slater_gap", rec.slater_gap},
                     {"dual_cap", rec.dual_cap}});
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  nlohmann::json manifest;
  manifest["config"] = config_to_json(cfg);
  manifest["config_hash"] = config_hash(cfg);
  manifest["git_describe"] = git_describe_or("unknown");
  manifest["wall_time_seconds"] = wall;
  manifest["instances"] = std::move(insts);
  manifest["runs"] = std::move(runs);

  std::ofstream mf(cfg.output_dir + "/manifest.json", std::ios::binary);
  if (!mf) throw ConfigError("run_experiment: cannot write manifest");
  mf << manifest.dump(2) << "\n";
  return records;
}

}  // namespace flexdome
