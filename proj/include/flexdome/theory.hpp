#pragma once

#include <functional>
#include <vector>

namespace flexdome {

// Numeric companions to the convergence analysis: the closed-form series the
// guarantees lean on, evaluated exactly so their claimed decay rates can be
// checked by machine rather than by eye.

// exp(-(1/2) sum_{j<=t} 1/j). Decays like t^(-1/2); the scaled limit is
// exp(-gamma/2) ~= 0.7493.
double series_initial_decay(long long t);

// ( sum_{j<=t} j^(-5/3) exp(-sum_{k=j+1}^{t} 1/k) )^(1/2). Decays like
// t^(-1/3); the scaled limit is sqrt(3).
double series_optimization_error(long long t);

// Batch forms: one pass over 1..max(ts) with the harmonic prefix accumulated
// once. ts must be ascending.
std::vector<double> series_initial_decay_batch(const std::vector<long long>& ts);
std::vector<double> series_optimization_error_batch(
    const std::vector<long long>& ts);

struct DominanceReport {
  long long last_violation = 0;   // largest t with error > margin; 0 if none
  double excess_sum = 0.0;        // sum of (error - margin) where positive
  long long dominated_from = 0;   // margin >= error for every t from here on
};

DominanceReport dominance_check(long long t_begin, long long t_end,
                                const std::function<double(long long)>& margin,
                                const std::function<double(long long)>& error);

}  // namespace flexdome
