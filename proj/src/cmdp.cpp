#include "flexdome/cmdp.hpp"

#include <cmath>
#include <string>

#include "flexdome/errors.hpp"

namespace flexdome {

namespace {
constexpr double kRowSumTol = 1e-9;
}

void CmdpModel::validate() const {
  if (num_states < 1 || num_actions < 1 || horizon < 1)
    throw ConfigError("model: dimensions must be positive");
  if (num_constraints < 0)
    throw ConfigError("model: negative constraint count");
  if (initial_state < 0 || initial_state >= num_states)
    throw ConfigError("model: initial state out of range");
  if (transitions.dim0() != horizon || transitions.dim1() != num_states ||
      transitions.dim2() != num_actions || transitions.dim3() != num_states)
    throw ConfigError("model: transition table shape mismatch");
  if (reward.dim0() != horizon || reward.dim1() != num_states ||
      reward.dim2() != num_actions)
    throw ConfigError("model: reward table shape mismatch");
  if (static_cast<int>(constraint.size()) != num_constraints ||
      static_cast<int>(threshold.size()) != num_constraints)
    throw ConfigError("model: constraint count mismatch");

  for (int h = 0; h < horizon; ++h)
    for (int s = 0; s < num_states; ++s)
      for (int a = 0; a < num_actions; ++a) {
        double sum = 0.0;
        for (int s2 = 0; s2 < num_states; ++s2) {
          double p = transitions(h, s, a, s2);
          if (!(p >= 0.0))
            throw ConfigError("model: negative transition probability");
          sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
          throw ConfigError("model: transition row does not sum to 1 at h=" +
                            std::to_string(h) + " s=" + std::to_string(s) +
                            " a=" + std::to_string(a));
        double r = reward(h, s, a);
        if (!(r >= 0.0 && r <= 1.0))
          throw ConfigError("model: reward outside [0, 1]");
        for (const auto& d : constraint) {
          double c = d(h, s, a);
          if (!(c >= 0.0 && c <= 1.0))
            throw ConfigError("model: constraint payoff outside [0, 1]");
        }
      }
}

void Policy::validate(double tol) const {
  const int H = horizon(), S = num_states(), A = num_actions();
  if (H < 1 || S < 1 || A < 1) throw ConfigError("policy: empty table");
  for (int h = 0; h < H; ++h)
    for (int s = 0; s < S; ++s) {
      double sum = 0.0;
      for (int a = 0; a < A; ++a) {
        double p = prob(h, s, a);
        if (!(p >= 0.0))
          throw ConfigError("policy: negative probability at h=" +
                            std::to_string(h) + " s=" + std::to_string(s));
        sum += p;
      }
      if (std::abs(sum - 1.0) > tol)
        throw ConfigError("policy: row off the simplex at h=" +
                          std::to_string(h) + " s=" + std::to_string(s));
    }
}

Policy uniform_policy(int horizon, int num_states, int num_actions) {
  if (horizon < 1 || num_states < 1 || num_actions < 1)
    throw ConfigError("uniform_policy: dimensions must be positive");
  Policy pi;
  pi.prob = Tensor3(horizon, num_states, num_actions, 1.0 / num_actions);
  return pi;
}

}  // namespace flexdome
