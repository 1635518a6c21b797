#include "mv3c/volume.hpp"

#include <bit>
#include <cmath>
#include <cstring>

namespace mv3c {

std::size_t dtype_size(Dtype d) {
  switch (d) {
    case Dtype::u8: return 1;
    case Dtype::i16:
    case Dtype::u16: return 2;
    case Dtype::f32: return 4;
  }
  fail(ErrorKind::format, "unknown dtype code " + std::to_string(int(d)));
}

const char* dtype_name(Dtype d) {
  switch (d) {
    case Dtype::u8: return "uint8";
    case Dtype::i16: return "int16";
    case Dtype::u16: return "uint16";
    case Dtype::f32: return "float32";
  }
  return "?";
}

Dtype dtype_from_name(const std::string& name) {
  if (name == "uint8") return Dtype::u8;
  if (name == "int16") return Dtype::i16;
  if (name == "uint16") return Dtype::u16;
  if (name == "float32") return Dtype::f32;
  fail(ErrorKind::format, "unsupported dtype name '" + name + "'");
}

bool dtype_is_integer(Dtype d) { return d != Dtype::f32; }

double dtype_min(Dtype d) {
  switch (d) {
    case Dtype::u8: return 0.0;
    case Dtype::i16: return -32768.0;
    case Dtype::u16: return 0.0;
    case Dtype::f32: break;
  }
  fail(ErrorKind::usage, "dtype_min: not an integer dtype");
}

double dtype_max(Dtype d) {
  switch (d) {
    case Dtype::u8: return 255.0;
    case Dtype::i16: return 32767.0;
    case Dtype::u16: return 65535.0;
    case Dtype::f32: break;
  }
  fail(ErrorKind::usage, "dtype_max: not an integer dtype");
}

double Volume::value_at(std::size_t i) const {
  return std::visit([i](const auto& vec) { return static_cast<double>(vec[i]); }, data);
}

Volume make_volume(Dims3 dims, Dtype dtype, Spacing3 spacing) {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
    fail(ErrorKind::usage, "volume dims must each be >= 1");
  Volume v;
  v.dims = dims;
  v.dtype = dtype;
  v.spacing = spacing;
  switch (dtype) {
    case Dtype::u8: v.data = std::vector<std::uint8_t>(dims.voxels()); break;
    case Dtype::i16: v.data = std::vector<std::int16_t>(dims.voxels()); break;
    case Dtype::u16: v.data = std::vector<std::uint16_t>(dims.voxels()); break;
    case Dtype::f32: v.data = std::vector<float>(dims.voxels()); break;
  }
  return v;
}

std::vector<std::int32_t> to_int_cube(const Volume& v) {
  if (!dtype_is_integer(v.dtype))
    fail(ErrorKind::usage, "integer pipeline requires an integer dtype, got float32");
  std::vector<std::int32_t> cube(v.voxel_count());
  std::visit(
      [&](const auto& vec) {
        for (std::size_t i = 0; i < vec.size(); ++i) cube[i] = static_cast<std::int32_t>(vec[i]);
      },
      v.data);
  return cube;
}

std::vector<float> to_float_cube(const Volume& v) {
  std::vector<float> cube(v.voxel_count());
  std::visit(
      [&](const auto& vec) {
        for (std::size_t i = 0; i < vec.size(); ++i) cube[i] = static_cast<float>(vec[i]);
      },
      v.data);
  return cube;
}

namespace {

template <typename T>
std::vector<T> saturate_ints(const std::vector<std::int32_t>& cube, double lo, double hi) {
  std::vector<T> out(cube.size());
  for (std::size_t i = 0; i < cube.size(); ++i) {
    std::int32_t x = cube[i];
    double v = static_cast<double>(x);
    if (v < lo) v = lo;
    if (v > hi) v = hi;
    out[i] = static_cast<T>(v);
  }
  return out;
}

template <typename T>
std::vector<T> round_saturate(const std::vector<float>& cube, double lo, double hi) {
  std::vector<T> out(cube.size());
  for (std::size_t i = 0; i < cube.size(); ++i) {
    double v = std::round(static_cast<double>(cube[i]));  // half away from zero
    if (v < lo)
      v = lo;
    else if (v > hi)
      v = hi;
    else if (std::isnan(v))
      v = 0.0;
    out[i] = static_cast<T>(v);
  }
  return out;
}

}  // namespace

Volume volume_from_int_cube(const std::vector<std::int32_t>& cube, Dims3 dims, Dtype dtype,
                            Spacing3 spacing) {
  if (cube.size() != dims.voxels()) fail(ErrorKind::usage, "cube size does not match dims");
  Volume v;
  v.dims = dims;
  v.dtype = dtype;
  v.spacing = spacing;
  switch (dtype) {
    case Dtype::u8: v.data = saturate_ints<std::uint8_t>(cube, 0.0, 255.0); break;
    case Dtype::i16: v.data = saturate_ints<std::int16_t>(cube, -32768.0, 32767.0); break;
    case Dtype::u16: v.data = saturate_ints<std::uint16_t>(cube, 0.0, 65535.0); break;
    case Dtype::f32: fail(ErrorKind::usage, "integer cube cannot target float32");
  }
  return v;
}

Volume volume_from_float_cube(const std::vector<float>& cube, Dims3 dims, Dtype dtype,
                              Spacing3 spacing) {
  if (cube.size() != dims.voxels()) fail(ErrorKind::usage, "cube size does not match dims");
  Volume v;
  v.dims = dims;
  v.dtype = dtype;
  v.spacing = spacing;
  switch (dtype) {
    case Dtype::u8: v.data = round_saturate<std::uint8_t>(cube, 0.0, 255.0); break;
    case Dtype::i16: v.data = round_saturate<std::int16_t>(cube, -32768.0, 32767.0); break;
    case Dtype::u16: v.data = round_saturate<std::uint16_t>(cube, 0.0, 65535.0); break;
    case Dtype::f32: v.data = cube; break;
  }
  return v;
}

bool bit_identical(const Volume& a, const Volume& b) {
  if (!(a.dims == b.dims) || a.dtype != b.dtype || !(a.spacing == b.spacing)) return false;
  return std::visit(
      [&](const auto& va) {
        using Vec = std::decay_t<decltype(va)>;
        const auto* vb = std::get_if<Vec>(&b.data);
        if (!vb || vb->size() != va.size()) return false;
        return std::memcmp(va.data(), vb->data(), va.size() * sizeof(typename Vec::value_type)) == 0;
      },
      a.data);
}

}  // namespace mv3c
