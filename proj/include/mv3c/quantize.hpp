#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mv3c/dwt3d.hpp"

namespace mv3c {

// Deadzone scalar quantizer: x' = sign(x) * floor(|x| / qs). Symmetric in
// sign, widened zero bin. Requires qs >= 1 and finite coefficients.
std::vector<std::int32_t> quantize_subband(const Subband& sb, double qs);

template <typename T>
std::vector<std::int32_t> quantize_values(std::span<const T> coeffs, double qs,
                                          std::uint32_t band_index);

// Midpoint reconstruction: 0 stays 0, otherwise sign(x') * (|x'| + 0.5) * qs.
// The integer (5/3) pipeline with qs == 1 reconstructs the exact identity
// instead, which keeps that configuration lossless.
std::vector<double> dequantize_values(std::span<const std::int32_t> values, double qs,
                                      WaveletKind kind);

}  // namespace mv3c
