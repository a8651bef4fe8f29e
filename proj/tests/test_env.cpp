#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "flexdome/env.hpp"
#include "flexdome/errors.hpp"
#include "flexdome/oracle.hpp"

using namespace flexdome;

namespace {

GenConfig small_cfg(ThresholdMode mode = ThresholdMode::Fixed) {
  GenConfig cfg;
  cfg.num_states = 4;
  cfg.num_actions = 3;
  cfg.horizon = 3;
  cfg.num_constraints = 2;
  cfg.mode = mode;
  return cfg;
}

}  // namespace

TEST_CASE("constraint payoff is the reward complement") {
  const auto inst = generate_instance(5, small_cfg());
  const CmdpModel& m = inst.model;
  for (int i = 0; i < m.num_constraints; ++i)
    for (int h = 0; h < m.horizon; ++h)
      for (int s = 0; s < m.num_states; ++s)
        for (int a = 0; a < m.num_actions; ++a)
          CHECK(m.reward(h, s, a) + m.constraint[i](h, s, a) == 1.0);
}

TEST_CASE("rewards are coin flips and transitions valid distributions") {
  const auto inst = generate_instance(6, small_cfg());
  const CmdpModel& m = inst.model;
  int ones = 0, zeros = 0;
  for (int h = 0; h < m.horizon; ++h)
    for (int s = 0; s < m.num_states; ++s)
      for (int a = 0; a < m.num_actions; ++a) {
        const double r = m.reward(h, s, a);
        CHECK((r == 0.0 || r == 1.0));
        (r == 1.0 ? ones : zeros) += 1;
      }
  CHECK(ones > 0);
  CHECK(zeros > 0);
  m.validate();  // transition simplex rows among other things
}

TEST_CASE("identical seed and config give identical instances") {
  const auto a = generate_instance(7, small_cfg(ThresholdMode::Gaussian));
  const auto b = generate_instance(7, small_cfg(ThresholdMode::Gaussian));
  CHECK(a.model.transitions == b.model.transitions);
  CHECK(a.model.reward == b.model.reward);
  CHECK(a.model.threshold == b.model.threshold);
  CHECK(a.threshold.mean == b.threshold.mean);
  CHECK(a.threshold.sd == b.threshold.sd);

  const auto c = generate_instance(8, small_cfg(ThresholdMode::Gaussian));
  CHECK(a.model.transitions != c.model.transitions);
}

TEST_CASE("generator config validation") {
  GenConfig cfg = small_cfg();
  SUBCASE("nonpositive concentration") {
    cfg.dirichlet_conc = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("too few states") {
    cfg.num_states = 1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("too many actions") {
    cfg.num_actions = 33;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("zero horizon") {
    cfg.horizon = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
  SUBCASE("zero constraints") {
    cfg.num_constraints = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("thresholds sit at half the best constraint value") {
  const auto inst = generate_instance(9, small_cfg());
  for (int i = 0; i < inst.model.num_constraints; ++i) {
    const double best = max_value(inst.model, inst.model.constraint[i]).value;
    CHECK(inst.model.threshold[i] == doctest::Approx(0.5 * best).epsilon(1e-12));
    CHECK(inst.model.threshold[i] > 0.0);
  }
  const auto slater = slater_quantities(inst.model);
  CHECK(slater.gap ==
        doctest::Approx(*std::min_element(inst.model.threshold.begin(),
                                          inst.model.threshold.end())));
}

TEST_CASE("fixed mode surfaces the exact threshold every episode") {
  const auto inst = generate_instance(10, small_cfg());
  const Policy pi = uniform_policy(3, 4, 3);
  RngStream rng(10, "test/rollout");
  for (int e = 0; e < 20; ++e) {
    const Trajectory tr = rollout(inst.model, inst.threshold, pi, rng);
    REQUIRE(tr.threshold_sample.size() == 2);
    for (int i = 0; i < 2; ++i)
      for (int h = 0; h < 3; ++h)
        CHECK(tr.threshold_sample[i][h] == inst.model.threshold[i]);
  }
}

TEST_CASE("gaussian mode draws one replicated sample per episode") {
  const auto inst = generate_instance(11, small_cfg(ThresholdMode::Gaussian));
  const Policy pi = uniform_policy(3, 4, 3);
  RngStream rng(11, "test/rollout");
  const int episodes = 100000;
  std::vector<double> draws;
  draws.reserve(episodes);
  bool below_mean_seen = false;
  for (int e = 0; e < episodes; ++e) {
    const Trajectory tr = rollout(inst.model, inst.threshold, pi, rng);
    for (int h = 1; h < 3; ++h)  // replicated, not redrawn, within an episode
      CHECK(tr.threshold_sample[0][h] == tr.threshold_sample[0][0]);
    draws.push_back(tr.threshold_sample[0][0]);
    below_mean_seen =
        below_mean_seen ||
        tr.threshold_sample[0][0] < inst.threshold.mean[0] - inst.threshold.sd[0];
  }
  double mean = 0.0;
  for (double d : draws) mean += d;
  mean /= episodes;
  const double tol =
      3.0 * inst.threshold.sd[0] / std::sqrt(static_cast<double>(episodes));
  CHECK(std::abs(mean - inst.threshold.mean[0]) <= tol);
  CHECK(inst.threshold.sd[0] == doctest::Approx(0.5 * inst.threshold.mean[0]));
  CHECK(below_mean_seen);  // noise is real and unclamped on the low side
}

TEST_CASE("rollout transition frequencies match the model row") {
  const auto inst = generate_instance(12, small_cfg());
  const CmdpModel& m = inst.model;
  Policy pi = uniform_policy(3, 4, 3);
  pi.prob.fill(0.0);
  for (int h = 0; h < 3; ++h)
    for (int s = 0; s < 4; ++s) pi.prob(h, s, 0) = 1.0;  // always action 0

  const int episodes = 100000;
  RngStream rng(12, "test/rollout");
  std::vector<double> freq(m.num_states, 0.0);
  for (int e = 0; e < episodes; ++e) {
    const Trajectory tr = rollout(inst.model, inst.threshold, pi, rng);
    CHECK(tr.step[0].state == m.initial_state);
    CHECK(tr.step[0].action == 0);
    CHECK(tr.step[1].state == tr.step[0].next_state);
    freq[tr.step[0].next_state] += 1.0;
  }
  double tv = 0.0;
  for (int sn = 0; sn < m.num_states; ++sn)
    tv += std::abs(freq[sn] / episodes -
                   m.transitions(0, m.initial_state, 0, sn));
  CHECK(0.5 * tv <= 0.02);
}

TEST_CASE("rollout rewards follow the frozen payoff tables") {
  const auto inst = generate_instance(13, small_cfg());
  const Policy pi = uniform_policy(3, 4, 3);
  RngStream rng(13, "test/rollout");
  for (int e = 0; e < 50; ++e) {
    const Trajectory tr = rollout(inst.model, inst.threshold, pi, rng);
    for (int h = 0; h < 3; ++h) {
      const auto& st = tr.step[h];
      CHECK(st.reward == inst.model.reward(h, st.state, st.action));
      for (int i = 0; i < 2; ++i)
        CHECK(st.constraint[i] ==
              inst.model.constraint[i](h, st.state, st.action));
    }
  }
}

TEST_CASE("rollouts replay exactly under the same stream") {
  const auto inst = generate_instance(14, small_cfg(ThresholdMode::Gaussian));
  const Policy pi = uniform_policy(3, 4, 3);
  RngStream r1(99, "rollout/arm/17");
  RngStream r2(99, "rollout/arm/17");
  for (int e = 0; e < 10; ++e) {
    const Trajectory a = rollout(inst.model, inst.threshold, pi, r1);
    const Trajectory b = rollout(inst.model, inst.threshold, pi, r2);
    for (int h = 0; h < 3; ++h) {
      CHECK(a.step[h].state == b.step[h].state);
      CHECK(a.step[h].action == b.step[h].action);
      CHECK(a.step[h].next_state == b.step[h].next_state);
    }
    CHECK(a.threshold_sample == b.threshold_sample);
  }
}

TEST_CASE("instance json round trip") {
  const auto inst = generate_instance(15, small_cfg(ThresholdMode::Gaussian));
  const auto j = instance_to_json(inst);
  const auto back = instance_from_json(j);
  CHECK(back.model.transitions == inst.model.transitions);
  CHECK(back.model.reward == inst.model.reward);
  CHECK(back.model.constraint[0] == inst.model.constraint[0]);
  CHECK(back.model.threshold == inst.model.threshold);
  CHECK(back.threshold.mean == inst.threshold.mean);
  CHECK(back.threshold.sd == inst.threshold.sd);
  CHECK(to_string(back.threshold.mode) == "gaussian");

  SUBCASE("missing fields are a config error") {
    nlohmann::json bad = j;
    bad.erase("transitions");
    CHECK_THROWS_AS(instance_from_json(bad), ConfigError);
  }
}

TEST_CASE("threshold mode strings") {
  CHECK(threshold_mode_from_string("fixed") == ThresholdMode::Fixed);
  CHECK(threshold_mode_from_string("gaussian") == ThresholdMode::Gaussian);
  CHECK_THROWS_AS(threshold_mode_from_string("bogus"), ConfigError);
  CHECK(to_string(ThresholdMode::Fixed) == "fixed");
  CHECK(to_string(ThresholdMode::Gaussian) == "gaussian");
}
