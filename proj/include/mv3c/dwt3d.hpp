#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mv3c/volume.hpp"

namespace mv3c {

enum class WaveletKind : std::uint8_t {
  legall_5_3 = 0,  // integer lifting, exactly invertible
  cdf_9_7 = 1,     // float lifting, reconstructs within rounding
};

const char* wavelet_name(WaveletKind k);
WaveletKind wavelet_from_name(const std::string& name);

// Per-axis filter orientation, bit 0 = x, bit 1 = y, bit 2 = z; a set bit
// means high-pass. 0 is LLL.
struct Orientation {
  std::uint8_t bits = 0;
  bool operator==(const Orientation&) const = default;
};

std::string orientation_code(Orientation o);

using CoeffArray = std::variant<std::vector<std::int32_t>, std::vector<float>>;

struct Subband {
  std::uint32_t index = 0;     // position in decomposition order
  std::uint32_t level = 0;     // 1 = finest
  Orientation orient{};
  Dims3 dims{};
  CoeffArray coeffs;

  std::size_t count() const {
    return std::visit([](const auto& c) { return c.size(); }, coeffs);
  }
  double coeff_at(std::size_t i) const {
    return std::visit([i](const auto& c) { return static_cast<double>(c[i]); }, coeffs);
  }
};

// Full multi-level subband set; ordered coarsest-first with LLL first.
struct Decomposition {
  WaveletKind wavelet = WaveletKind::cdf_9_7;
  std::uint32_t levels = 0;
  Dims3 orig_dims{};
  Dtype orig_dtype = Dtype::u8;
  Spacing3 spacing{};
  std::vector<Subband> subbands;
};

std::uint32_t subband_count(std::uint32_t levels);  // 7L + 1

// Static placement of every subband inside the Mallat-layout cube.
struct BandPlacement {
  std::uint32_t index, level;
  Orientation orient;
  std::uint32_t x0, y0, z0;
  Dims3 dims;
};

std::vector<BandPlacement> band_layout(Dims3 orig, std::uint32_t levels);

// Mallat recursion: per level one 1D lifting pass along x, then y, then z,
// recursing on the LLL block; symmetric boundary extension, ceil-halving.
// Requires every axis >= 2^levels. The 5/3 kind requires an integer dtype.
Decomposition forward(const Volume& v, WaveletKind kind, std::uint32_t levels, int threads = 1);

Volume inverse(const Decomposition& d, int threads = 1);

}  // namespace mv3c
