#include "flexdome/metrics.hpp"

#include <algorithm>

#include "flexdome/errors.hpp"

namespace flexdome {

StrongMetrics strong_metrics(
    const std::vector<double>& gap,
    const std::vector<std::vector<double>>& violation) {
  const std::size_t T = gap.size();
  for (const auto& v : violation)
    if (v.size() != T)
      throw ConfigError("strong_metrics: series length mismatch");

  StrongMetrics out;
  out.cum_regret.resize(T);
  out.cum_violation.resize(T);
  out.cum_weak_regret.resize(T);

  double acc = 0.0, weak = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    acc += std::max(gap[t], 0.0);
    weak += gap[t];
    out.cum_regret[t] = acc;
    out.cum_weak_regret[t] = weak;
  }
  out.regret = T > 0 ? out.cum_regret[T - 1] : 0.0;

  std::vector<double> per(violation.size(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    double worst = 0.0;
    for (std::size_t i = 0; i < violation.size(); ++i) {
      per[i] += std::max(violation[i][t], 0.0);
      worst = std::max(worst, per[i]);
    }
    out.cum_violation[t] = worst;
  }
  out.violation = T > 0 ? out.cum_violation[T - 1] : 0.0;
  return out;
}

}  // namespace flexdome
