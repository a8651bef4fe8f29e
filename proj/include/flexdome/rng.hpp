#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace flexdome {

// Every consumer of randomness owns a stream derived from (master seed, label),
// e.g. ("instance/transitions", "rollout/flexdome/173"). Streams are
// independent of each other and of call order elsewhere, which is what makes
// whole runs replayable from a manifest.
std::uint64_t substream_seed(std::uint64_t master, std::string_view label);

class RngStream {
 public:
  RngStream(std::uint64_t master, std::string_view label)
      : engine_(substream_seed(master, label)) {}

  // 53-bit mantissa draw in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal(double mean, double sd) {
    std::normal_distribution<double> d(mean, sd);
    return d(engine_);
  }

  // Unit-scale gamma; shapes < 1 are fine (Dirichlet concentrations are 0.1).
  double gamma(double shape) {
    std::gamma_distribution<double> d(shape, 1.0);
    return d(engine_);
  }

  // Inverse-CDF walk over a probability row. Slack from rounding goes to the
  // last index.
  int categorical(const double* w, int n) {
    double u = uniform();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += w[i];
      if (u < acc) return i;
    }
    return n - 1;
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace flexdome
