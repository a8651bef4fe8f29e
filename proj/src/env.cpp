#include "flexdome/env.hpp"

#include <algorithm>
#include <string>

#include "flexdome/errors.hpp"
#include "flexdome/oracle.hpp"

namespace flexdome {

std::string to_string(ThresholdMode mode) {
  return mode == ThresholdMode::Fixed ? "fixed" : "gaussian";
}

ThresholdMode threshold_mode_from_string(const std::string& s) {
  if (s == "fixed") return ThresholdMode::Fixed;
  if (s == "gaussian") return ThresholdMode::Gaussian;
  throw ConfigError("unknown threshold mode '" + s + "'");
}

void GenConfig::validate() const {
  if (num_states < 2 || num_states > 256)
    throw ConfigError("gen: num_states outside [2, 256]");
  if (num_actions < 2 || num_actions > 32)
    throw ConfigError("gen: num_actions outside [2, 32]");
  if (horizon < 1 || horizon > 16)
    throw ConfigError("gen: horizon outside [1, 16]");
  if (num_constraints < 1 || num_constraints > 8)
    throw ConfigError("gen: num_constraints outside [1, 8]");
  if (!(dirichlet_conc > 0.0))
    throw ConfigError("gen: dirichlet concentration must be positive");
}

GeneratedInstance generate_instance(std::uint64_t seed, const GenConfig& cfg) {
  cfg.validate();
  const int S = cfg.num_states, A = cfg.num_actions, H = cfg.horizon,
            mc = cfg.num_constraints;

  CmdpModel m;
  m.num_states = S;
  m.num_actions = A;
  m.horizon = H;
  m.num_constraints = mc;
  m.transitions = Tensor4(H, S, A, S, 0.0);
  m.reward = Tensor3(H, S, A, 0.0);

  {
    RngStream rng(seed, "instance/transitions");
    std::vector<double> g(S);
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
          double sum = 0.0;
          for (int s2 = 0; s2 < S; ++s2) {
            g[s2] = rng.gamma(cfg.dirichlet_conc);
            sum += g[s2];
          }
          double* row = m.transitions.row(h, s, a);
          if (sum > 0.0) {
            for (int s2 = 0; s2 < S; ++s2) row[s2] = g[s2] / sum;
          } else {
            for (int s2 = 0; s2 < S; ++s2) row[s2] = 1.0 / S;
          }
        }
  }
  {
    // Coin-flip payoffs frozen at generation; visits observe these exact
    // values, so the only stochastic signal is the threshold channel.
    RngStream rng(seed, "instance/rewards");
    for (int h = 0; h < H; ++h)
      for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a)
          m.reward(h, s, a) = rng.uniform() < 0.5 ? 1.0 : 0.0;
  }
  Tensor3 flipped(H, S, A, 0.0);
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) flipped(h, s, a) = 1.0 - m.reward(h, s, a);
  m.constraint.assign(mc, flipped);
  {
    RngStream rng(seed, "instance/init");
    m.initial_state = std::min(static_cast<int>(rng.uniform() * S), S - 1);
  }

  SlaterInfo sl = slater_quantities(m);
  m.threshold = sl.threshold;
  m.validate();

  GeneratedInstance inst;
  inst.model = std::move(m);
  inst.threshold.mode = cfg.mode;
  inst.threshold.mean = sl.threshold;
  inst.threshold.sd.resize(mc, 0.0);
  if (cfg.mode == ThresholdMode::Gaussian)
    for (int i = 0; i < mc; ++i) inst.threshold.sd[i] = 0.5 * sl.threshold[i];
  return inst;
}

Trajectory rollout(const CmdpModel& m, const ThresholdSpec& spec,
                   const Policy& pi, RngStream& rng) {
  if (pi.horizon() != m.horizon || pi.num_states() != m.num_states ||
      pi.num_actions() != m.num_actions)
    throw ConfigError("rollout: policy shape mismatch");
  if (static_cast<int>(spec.mean.size()) != m.num_constraints ||
      static_cast<int>(spec.sd.size()) != m.num_constraints)
    throw ConfigError("rollout: threshold spec size mismatch");

  const int H = m.horizon, S = m.num_states, A = m.num_actions,
            mc = m.num_constraints;
  Trajectory tr;
  tr.threshold_sample.resize(mc);
  for (int i = 0; i < mc; ++i) {
    // One draw per episode, replicated across steps; Gaussian draws are used
    // as-is (no clamping), matching what the mean estimator assumes.
    const double v = spec.mode == ThresholdMode::Gaussian
                         ? rng.normal(spec.mean[i], spec.sd[i])
                         : spec.mean[i];
    tr.threshold_sample[i].assign(H, v);
  }

  tr.step.reserve(H);
  int s = m.initial_state;
  for (int h = 0; h < H; ++h) {
    TrajectoryStep st;
    st.state = s;
    st.action = rng.categorical(pi.prob.row(h, s), A);
    st.reward = m.reward(h, s, st.action);
    st.constraint.resize(mc);
    for (int i = 0; i < mc; ++i)
      st.constraint[i] = m.constraint[i](h, s, st.action);
    st.next_state = rng.categorical(m.transitions.row(h, s, st.action), S);
    s = st.next_state;
    tr.step.push_back(std::move(st));
  }
  return tr;
}

namespace {

nlohmann::json tensor3_to_json(const Tensor3& t) {
  nlohmann::json out = nlohmann::json::array();
  for (int i = 0; i < t.dim0(); ++i) {
    nlohmann::json ji = nlohmann::json::array();
    for (int j = 0; j < t.dim1(); ++j) {
      nlohmann::json jj = nlohmann::json::array();
      for (int k = 0; k < t.dim2(); ++k) jj.push_back(t(i, j, k));
      ji.push_back(std::move(jj));
    }
    out.push_back(std::move(ji));
  }
  return out;
}

Tensor3 tensor3_from_json(const nlohmann::json& j, int n0, int n1, int n2) {
  Tensor3 t(n0, n1, n2, 0.0);
  for (int i = 0; i < n0; ++i)
    for (int jj = 0; jj < n1; ++jj)
      for (int k = 0; k < n2; ++k)
        t(i, jj, k) = j.at(i).at(jj).at(k).get<double>();
  return t;
}

}  // namespace

nlohmann::json instance_to_json(const GeneratedInstance& inst) {
  const CmdpModel& m = inst.model;
  nlohmann::json j;
  j["dims"] = {{"states", m.num_states},
               {"actions", m.num_actions},
               {"horizon", m.horizon},
               {"constraints", m.num_constraints}};
  j["initial_state"] = m.initial_state;
  nlohmann::json p = nlohmann::json::array();
  for (int h = 0; h < m.horizon; ++h) {
    nlohmann::json jh = nlohmann::json::array();
    for (int s = 0; s < m.num_states; ++s) {
      nlohmann::json js = nlohmann::json::array();
      for (int a = 0; a < m.num_actions; ++a) {
        nlohmann::json ja = nlohmann::json::array();
        const double* row = m.transitions.row(h, s, a);
        for (int s2 = 0; s2 < m.num_states; ++s2) ja.push_back(row[s2]);
        js.push_back(std::move(ja));
      }
      jh.push_back(std::move(js));
    }
    p.push_back(std::move(jh));
  }
  j["transitions"] = std::move(p);
  j["reward"] = tensor3_to_json(m.reward);
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : m.constraint) cs.push_back(tensor3_to_json(c));
  j["constraint"] = std::move(cs);
  j["threshold"] = {{"mode", to_string(inst.threshold.mode)},
                    {"mean", inst.threshold.mean},
                    {"sd", inst.threshold.sd}};
  return j;
}

GeneratedInstance instance_from_json(const nlohmann::json& j) {
  try {
    GeneratedInstance inst;
    CmdpModel& m = inst.model;
    const auto& dims = j.at("dims");
    m.num_states = dims.at("states").get<int>();
    m.num_actions = dims.at("actions").get<int>();
    m.horizon = dims.at("horizon").get<int>();
    m.num_constraints = dims.at("constraints").get<int>();
    m.initial_state = j.at("initial_state").get<int>();

    m.transitions =
        Tensor4(m.horizon, m.num_states, m.num_actions, m.num_states, 0.0);
    const auto& p = j.at("transitions");
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
          for (int s2 = 0; s2 < m.num_states; ++s2)
            m.transitions(h, s, a, s2) =
                p.at(h).at(s).at(a).at(s2).get<double>();

    m.reward = tensor3_from_json(j.at("reward"), m.horizon, m.num_states,
                                 m.num_actions);
    for (int i = 0; i < m.num_constraints; ++i)
      m.constraint.push_back(tensor3_from_json(
          j.at("constraint").at(i), m.horizon, m.num_states, m.num_actions));

    const auto& thr = j.at("threshold");
    inst.threshold.mode =
        threshold_mode_from_string(thr.at("mode").get<std::string>());
    inst.threshold.mean = thr.at("mean").get<std::vector<double>>();
    inst.threshold.sd = thr.at("sd").get<std::vector<double>>();
    m.threshold = inst.threshold.mean;
    m.validate();
    if (static_cast<int>(inst.threshold.mean.size()) != m.num_constraints ||
        static_cast<int>(inst.threshold.sd.size()) != m.num_constraints)
      throw ConfigError("instance json: threshold size mismatch");
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("instance json: ") + e.what());
  }
}

}  // namespace flexdome
