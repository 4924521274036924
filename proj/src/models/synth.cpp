#include "lisinfer/models/synth.hpp"

#include <cmath>

#include "lisinfer/error.hpp"

namespace lisinfer {

SynthData synth_data(const ForwardModel& model, const Vector& truth, double snr,
                     std::uint64_t seed) {
  if (!(snr > 0.0)) throw Error(ErrorKind::InvalidArgument, "snr must be > 0");
  SynthData s;
  s.truth = truth;
  s.snr = snr;
  s.seed = seed;
  s.clean = model.apply(truth);
  s.sigma = std::isinf(snr) ? 0.0 : s.clean.cwiseAbs().maxCoeff() / snr;
  s.data = s.clean + s.sigma * gaussian_matrix(s.clean.size(), 1, seed).col(0);
  return s;
}

}  // namespace lisinfer
