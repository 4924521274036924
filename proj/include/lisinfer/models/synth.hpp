#pragma once

#include <cstdint>

#include "lisinfer/model.hpp"

namespace lisinfer {

struct SynthData {
  Vector data;
  Vector clean;
  Vector truth;
  double sigma = 0.0;
  double snr = 0.0;
  std::uint64_t seed = 0;
};

/// data = G(truth) + N(0, sigma^2 I) with sigma = max|G(truth)| / snr. An
/// infinite snr gives noise-free data and sigma = 0.
SynthData synth_data(const ForwardModel& model, const Vector& truth, double snr,
                     std::uint64_t seed);

}  // namespace lisinfer
