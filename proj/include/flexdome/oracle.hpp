#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "flexdome/cmdp.hpp"

namespace flexdome {

// Exact planning against the true model. Used for instance calibration and
// for the regret reference point; never visible to the learners.

struct PlanResult {
  double value = 0.0;
  Policy policy;       // deterministic, ties broken toward the lowest action
  ValueTables tables;  // the max-value tables behind it
};

PlanResult max_value(const CmdpModel& model, const Tensor3& payoff);

// Calibration rule for generated instances: each threshold is half the best
// attainable constraint value, so the strict-feasibility gap equals the
// smallest threshold.
struct SlaterInfo {
  std::vector<double> threshold;
  double gap = 0.0;
};

SlaterInfo slater_quantities(const CmdpModel& model);

// Optimal constrained value via the dual
//   g(lambda) = max_value(reward + lambda . constraint) - lambda . threshold,
// minimized over the box [0, 4H/gap]^m. m = 1 uses golden section on the
// (convex, piecewise-linear) g; m > 1 runs projected subgradient descent and
// returns the value at the averaged iterate.
struct DualSolution {
  double value = 0.0;
  std::vector<double> dual;
};

DualSolution cmdp_optimum(const CmdpModel& model,
                          const std::vector<double>& threshold);

// Golden-section minimizer on [lo, hi], shrinking to interval width tol.
// Returns (argmin, min value). Assumes f is unimodal on the interval.
std::pair<double, double> golden_section_min(
    double lo, double hi, double tol, const std::function<double(double)>& f);

}  // namespace flexdome
