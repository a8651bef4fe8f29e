#pragma once

#include "flexdome/cmdp.hpp"

namespace flexdome {

// Exact expected total payoff of a policy under the model's true transitions.
// payoff is any [h][s][a] table (not necessarily the model's own reward).
ValueTables evaluate_policy(const CmdpModel& model, const Policy& policy,
                            const Tensor3& payoff);

// State-action visitation distribution q[h][s][a]; each step sums to 1.
Tensor3 occupancy_measure(const CmdpModel& model, const Policy& policy);

// Expected sum over steps of -ln pi(a_h | s_h), via the occupancy measure.
double policy_entropy(const CmdpModel& model, const Policy& policy);

// Plain single-threaded counterparts with identical per-cell arithmetic;
// kept as the comparison point for the parallel kernels (tests assert
// bit-equality, the benchmark reports the speedup).
namespace serial {
ValueTables evaluate_policy(const CmdpModel& model, const Policy& policy,
                            const Tensor3& payoff);
Tensor3 occupancy_measure(const CmdpModel& model, const Policy& policy);
double policy_entropy(const CmdpModel& model, const Policy& policy);
}  // namespace serial

}  // namespace flexdome
