#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mv3c/dwt3d.hpp"

namespace mv3c {

struct Histogram {
  double lo = 0.0, hi = 0.0;          // recorded bin edges (uniform bins)
  std::vector<std::uint64_t> counts;  // 64 bins, or 1 degenerate bin when lo == hi
};

// Per-subband statistic index and distribution summary. delta is the
// population-denominator standard deviation of the flattened coefficients.
struct SubbandStats {
  std::uint32_t index = 0;
  std::uint64_t count = 0;
  double mean = 0.0;
  double delta = 0.0;
  double laplace_b = 0.0;
  Histogram hist;
};

std::vector<SubbandStats> compute_si(const Decomposition& d);

// Maximum-likelihood Laplace scale under a fixed zero mean: mean(|x|).
template <typename T>
double fit_laplace(std::span<const T> coeffs) {
  if (coeffs.empty()) fail(ErrorKind::usage, "fit_laplace: empty coefficient array");
  double acc = 0.0;
  for (const T& x : coeffs) acc += std::abs(static_cast<double>(x));
  return acc / static_cast<double>(coeffs.size());
}

// Per-voxel loss-gradient magnitudes on the source volume's grid; supplied
// externally by whatever model consumes the reconstructions.
struct GradientVolume {
  Dims3 dims{};
  std::vector<float> data;
};

// Requires a float32 volume with finite values.
GradientVolume gradient_from_volume(const Volume& v);

// Subband importance: per subband the mean over coefficients of
// |c| * (box-mean of |g| over the coefficient's spatial footprint).
// A level-l coefficient's footprint is its 2^l-aligned box clipped to the
// volume.
std::vector<std::pair<std::uint32_t, double>> importance_scores(const Decomposition& d,
                                                                const GradientVolume& g);

}  // namespace mv3c
