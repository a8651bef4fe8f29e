#include "flexdome/theory.hpp"

#include <cmath>

#include "flexdome/errors.hpp"

namespace flexdome {

namespace {

void check_probes(const std::vector<long long>& ts) {
  if (ts.empty()) throw ConfigError("series batch: empty probe list");
  long long prev = 0;
  for (long long t : ts) {
    if (t < 1) throw ConfigError("series batch: probes must be >= 1");
    if (t <= prev) throw ConfigError("series batch: probes must be ascending");
    prev = t;
  }
}

}  // namespace

std::vector<double> series_initial_decay_batch(
    const std::vector<long long>& ts) {
  check_probes(ts);
  std::vector<double> out;
  out.reserve(ts.size());
  double harmonic = 0.0;
  std::size_t next = 0;
  for (long long j = 1; j <= ts.back(); ++j) {
    harmonic += 1.0 / static_cast<double>(j);
    while (next < ts.size() && ts[next] == j) {
      out.push_back(std::exp(-0.5 * harmonic));
      ++next;
    }
  }
  return out;
}

double series_initial_decay(long long t) {
  return series_initial_decay_batch({t}).front();
}

std::vector<double> series_optimization_error_batch(
    const std::vector<long long>& ts) {
  check_probes(ts);
  // The inner exponent sum_{k=j+1}^{t} 1/k is the harmonic prefix difference,
  // so the whole sum folds into exp(-harmonic_t) * sum_j j^(-5/3) *
  // exp(harmonic_j). The weighted partial sum grows only linearly in j, well
  // inside double range for any loop length we can afford to run.
  std::vector<double> out;
  out.reserve(ts.size());
  double harmonic = 0.0, weighted = 0.0;
  std::size_t next = 0;
  for (long long j = 1; j <= ts.back(); ++j) {
    const double jd = static_cast<double>(j);
    harmonic += 1.0 / jd;
    weighted += std::pow(jd, -5.0 / 3.0) * std::exp(harmonic);
    while (next < ts.size() && ts[next] == j) {
      out.push_back(std::sqrt(std::exp(-harmonic) * weighted));
      ++next;
    }
  }
  return out;
}

double series_optimization_error(long long t) {
  return series_optimization_error_batch({t}).front();
}

DominanceReport dominance_check(long long t_begin, long long t_end,
                                const std::function<double(long long)>& margin,
                                const std::function<double(long long)>& error) {
  if (t_begin < 1 || t_end < t_begin)
    throw ConfigError("dominance_check: bad range");
  DominanceReport rep;
  for (long long t = t_begin; t <= t_end; ++t) {
    const double e = error(t), m = margin(t);
    if (e > m) {
      rep.last_violation = t;
      rep.excess_sum += e - m;
    }
  }
  rep.dominated_from =
      rep.last_violation > 0 ? rep.last_violation + 1 : t_begin;
  return rep;
}

}  // namespace flexdome
