#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "mv3c/error.hpp"

namespace mv3c {

struct Dims3 {
  std::uint32_t nx = 0, ny = 0, nz = 0;

  std::size_t voxels() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  std::size_t at(std::uint32_t x, std::uint32_t y, std::uint32_t z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(nx) * (y + static_cast<std::size_t>(ny) * z);
  }
  bool operator==(const Dims3&) const = default;
};

struct Spacing3 {
  float sx = 1.0f, sy = 1.0f, sz = 1.0f;
  bool operator==(const Spacing3&) const = default;
};

enum class Dtype : std::uint8_t { u8 = 0, i16 = 1, u16 = 2, f32 = 3 };

std::size_t dtype_size(Dtype d);
const char* dtype_name(Dtype d);
Dtype dtype_from_name(const std::string& name);
bool dtype_is_integer(Dtype d);
// Value range of an integer dtype; not defined for f32.
double dtype_min(Dtype d);
double dtype_max(Dtype d);

using VoxelData = std::variant<std::vector<std::uint8_t>, std::vector<std::int16_t>,
                               std::vector<std::uint16_t>, std::vector<float>>;

// A 3D scalar grid in x-fastest raster order; the unit of compression.
struct Volume {
  Dims3 dims{};
  Dtype dtype = Dtype::u8;
  Spacing3 spacing{};
  VoxelData data;

  std::size_t voxel_count() const { return dims.voxels(); }
  double value_at(std::size_t i) const;
};

struct VolumeMeta {
  Dims3 dims{};
  Dtype dtype = Dtype::u8;
  Spacing3 spacing{};
  std::string description;
  bool operator==(const VolumeMeta&) const = default;
};

Volume make_volume(Dims3 dims, Dtype dtype, Spacing3 spacing = {});

// Working-domain conversion. The integer (5/3) pipeline runs on int32,
// the float (9/7) pipeline on float32; conversion happens once per volume.
std::vector<std::int32_t> to_int_cube(const Volume& v);
std::vector<float> to_float_cube(const Volume& v);
Volume volume_from_int_cube(const std::vector<std::int32_t>& cube, Dims3 dims, Dtype dtype,
                            Spacing3 spacing);
// Integer targets round half away from zero and saturate to the dtype range.
Volume volume_from_float_cube(const std::vector<float>& cube, Dims3 dims, Dtype dtype,
                              Spacing3 spacing);

// Bit-level equality, NaN payloads included.
bool bit_identical(const Volume& a, const Volume& b);

}  // namespace mv3c
