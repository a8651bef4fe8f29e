#pragma once

#include <vector>

namespace flexdome {

// Positive-part cumulative metrics: negative entries never cancel earlier
// excess. gap[t] is optimum minus the policy's value; violation[i][t] is
// threshold minus the policy's constraint value (positive = short).
struct StrongMetrics {
  double regret = 0.0;     // sum of clipped gaps
  double violation = 0.0;  // worst constraint's sum of clipped shortfalls

  std::vector<double> cum_regret;       // running clipped-gap sums
  std::vector<double> cum_violation;    // running max-over-constraints sums
  std::vector<double> cum_weak_regret;  // signed running gap sums (diagnostic)
};

StrongMetrics strong_metrics(const std::vector<double>& gap,
                             const std::vector<std::vector<double>>& violation);

}  // namespace flexdome
