#include "mv3c/dwt3d.hpp"

#include <cmath>
#include <cstring>

#include "mv3c/parallel.hpp"

namespace mv3c {

const char* wavelet_name(WaveletKind k) {
  return k == WaveletKind::legall_5_3 ? "legall-5-3" : "cdf-9-7";
}

WaveletKind wavelet_from_name(const std::string& name) {
  if (name == "legall-5-3" || name == "5-3" || name == "legall-5-3-integer")
    return WaveletKind::legall_5_3;
  if (name == "cdf-9-7" || name == "9-7" || name == "cdf-9-7-float") return WaveletKind::cdf_9_7;
  fail(ErrorKind::usage, "unknown wavelet '" + name + "'");
}

std::string orientation_code(Orientation o) {
  std::string code = "LLL";
  if (o.bits & 1) code[0] = 'H';
  if (o.bits & 2) code[1] = 'H';
  if (o.bits & 4) code[2] = 'H';
  return code;
}

std::uint32_t subband_count(std::uint32_t levels) { return 7 * levels + 1; }

namespace {

// Whole-sample symmetric extension over [0, n); preserves index parity.
inline std::ptrdiff_t reflect(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

// --- LeGall 5/3, integer lifting with floor rounding ---

void fwd_line_53(const std::int32_t* x, std::size_t n, std::int32_t* lifted, std::int32_t* out) {
  auto sn = static_cast<std::ptrdiff_t>(n);
  if (n == 1) {
    out[0] = x[0];
    return;
  }
  for (std::size_t i = 1; i < n; i += 2) {
    auto si = static_cast<std::ptrdiff_t>(i);
    lifted[i] = x[i] - ((x[reflect(si - 1, sn)] + x[reflect(si + 1, sn)]) >> 1);
  }
  for (std::size_t i = 0; i < n; i += 2) {
    auto si = static_cast<std::ptrdiff_t>(i);
    lifted[i] = x[i] + ((lifted[reflect(si - 1, sn)] + lifted[reflect(si + 1, sn)] + 2) >> 2);
  }
  std::size_t half = (n + 1) / 2;
  for (std::size_t j = 0; j < half; ++j) out[j] = lifted[2 * j];
  for (std::size_t j = 0; j < n / 2; ++j) out[half + j] = lifted[2 * j + 1];
}

void inv_line_53(const std::int32_t* in, std::size_t n, std::int32_t* lifted, std::int32_t* out) {
  auto sn = static_cast<std::ptrdiff_t>(n);
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  std::size_t half = (n + 1) / 2;
  for (std::size_t j = 0; j < half; ++j) lifted[2 * j] = in[j];
  for (std::size_t j = 0; j < n / 2; ++j) lifted[2 * j + 1] = in[half + j];
  for (std::size_t i = 0; i < n; i += 2) {
    auto si = static_cast<std::ptrdiff_t>(i);
    out[i] = lifted[i] - ((lifted[reflect(si - 1, sn)] + lifted[reflect(si + 1, sn)] + 2) >> 2);
  }
  for (std::size_t i = 1; i < n; i += 2) {
    auto si = static_cast<std::ptrdiff_t>(i);
    out[i] = lifted[i] + ((out[reflect(si - 1, sn)] + out[reflect(si + 1, sn)]) >> 1);
  }
}

// --- CDF 9/7, float lifting ---
//
// Standard published lifting constants. The scaling step is split so each
// pass has sqrt(2) DC gain on the low half, which keeps total coefficient
// energy close to signal energy (see docs/FORMAT.md).
constexpr double kAlpha = -1.586134342059924;
constexpr double kBeta = -0.052980118572961;
constexpr double kGamma = 0.882911075530934;
constexpr double kDelta = 0.443506852043971;
constexpr double kK = 1.230174104914001;
constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kScaleLow = kSqrt2 / kK;
constexpr double kScaleHigh = kK / kSqrt2;

void fwd_line_97(const float* x, std::size_t n, double* t, float* out) {
  auto sn = static_cast<std::ptrdiff_t>(n);
  if (n == 1) {
    out[0] = static_cast<float>(x[0] * kScaleLow);
    return;
  }
  for (std::size_t i = 0; i < n; ++i) t[i] = x[i];
  auto lift = [&](std::size_t start, double c) {
    for (std::size_t i = start; i < n; i += 2) {
      auto si = static_cast<std::ptrdiff_t>(i);
      t[i] += c * (t[reflect(si - 1, sn)] + t[reflect(si + 1, sn)]);
    }
  };
  lift(1, kAlpha);
  lift(0, kBeta);
  lift(1, kGamma);
  lift(0, kDelta);
  std::size_t half = (n + 1) / 2;
  for (std::size_t j = 0; j < half; ++j) out[j] = static_cast<float>(t[2 * j] * kScaleLow);
  for (std::size_t j = 0; j < n / 2; ++j) out[half + j] = static_cast<float>(t[2 * j + 1] * kScaleHigh);
}

void inv_line_97(const float* in, std::size_t n, double* t, float* out) {
  auto sn = static_cast<std::ptrdiff_t>(n);
  if (n == 1) {
    out[0] = static_cast<float>(in[0] / kScaleLow);
    return;
  }
  std::size_t half = (n + 1) / 2;
  for (std::size_t j = 0; j < half; ++j) t[2 * j] = in[j] / kScaleLow;
  for (std::size_t j = 0; j < n / 2; ++j) t[2 * j + 1] = in[half + j] / kScaleHigh;
  auto lift = [&](std::size_t start, double c) {
    for (std::size_t i = start; i < n; i += 2) {
      auto si = static_cast<std::ptrdiff_t>(i);
      t[i] -= c * (t[reflect(si - 1, sn)] + t[reflect(si + 1, sn)]);
    }
  };
  lift(0, kDelta);
  lift(1, kGamma);
  lift(0, kBeta);
  lift(1, kAlpha);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<float>(t[i]);
}

// Iterates the lines of the (bx, by, bz) corner block of a cube with full
// dims `full` along `axis`; fn(base, stride, len) must touch only its line.
template <typename Fn>
void for_each_line(Dims3 full, Dims3 block, int axis, int threads, Fn&& fn) {
  std::size_t nx = full.nx, nxy = static_cast<std::size_t>(full.nx) * full.ny;
  std::size_t count = 0, len = 0, stride = 0;
  if (axis == 0) {
    count = static_cast<std::size_t>(block.ny) * block.nz;
    len = block.nx;
    stride = 1;
  } else if (axis == 1) {
    count = static_cast<std::size_t>(block.nx) * block.nz;
    len = block.ny;
    stride = nx;
  } else {
    count = static_cast<std::size_t>(block.nx) * block.ny;
    len = block.nz;
    stride = nxy;
  }
  parallel_for(count, threads, [&](std::size_t id) {
    std::size_t base;
    if (axis == 0) {
      std::size_t y = id % block.ny, z = id / block.ny;
      base = nx * y + nxy * z;
    } else if (axis == 1) {
      std::size_t x = id % block.nx, z = id / block.nx;
      base = x + nxy * z;
    } else {
      std::size_t x = id % block.nx, y = id / block.nx;
      base = x + nx * y;
    }
    fn(base, stride, len);
  });
}

inline std::uint32_t ceil_half(std::uint32_t n) { return (n + 1) / 2; }

template <typename T, typename LineFn>
void run_pass(std::vector<T>& cube, Dims3 full, Dims3 block, int axis, int threads, LineFn line_fn) {
  for_each_line(full, block, axis, threads, [&](std::size_t base, std::size_t stride, std::size_t len) {
    thread_local std::vector<T> in, out;
    thread_local std::vector<double> dtmp;
    thread_local std::vector<std::int32_t> itmp;
    in.resize(len);
    out.resize(len);
    for (std::size_t i = 0; i < len; ++i) in[i] = cube[base + i * stride];
    if constexpr (std::is_same_v<T, std::int32_t>) {
      itmp.resize(len);
      line_fn(in.data(), len, itmp.data(), out.data());
    } else {
      dtmp.resize(len);
      line_fn(in.data(), len, dtmp.data(), out.data());
    }
    for (std::size_t i = 0; i < len; ++i) cube[base + i * stride] = out[i];
  });
}

template <typename T, typename LineFn>
void forward_cube(std::vector<T>& cube, Dims3 full, std::uint32_t levels, int threads, LineFn fn) {
  Dims3 block = full;
  for (std::uint32_t lvl = 1; lvl <= levels; ++lvl) {
    for (int axis = 0; axis < 3; ++axis) run_pass(cube, full, block, axis, threads, fn);
    block = {ceil_half(block.nx), ceil_half(block.ny), ceil_half(block.nz)};
  }
}

template <typename T, typename LineFn>
void inverse_cube(std::vector<T>& cube, Dims3 full, std::uint32_t levels, int threads, LineFn fn) {
  std::vector<Dims3> blocks(levels);
  Dims3 block = full;
  for (std::uint32_t lvl = 1; lvl <= levels; ++lvl) {
    blocks[lvl - 1] = block;
    block = {ceil_half(block.nx), ceil_half(block.ny), ceil_half(block.nz)};
  }
  for (std::uint32_t lvl = levels; lvl >= 1; --lvl) {
    for (int axis = 2; axis >= 0; --axis) run_pass(cube, full, blocks[lvl - 1], axis, threads, fn);
  }
}

template <typename T>
std::vector<T> gather_band(const std::vector<T>& cube, Dims3 full, const BandPlacement& b) {
  std::vector<T> out(b.dims.voxels());
  std::size_t k = 0;
  for (std::uint32_t z = 0; z < b.dims.nz; ++z)
    for (std::uint32_t y = 0; y < b.dims.ny; ++y)
      for (std::uint32_t x = 0; x < b.dims.nx; ++x)
        out[k++] = cube[full.at(b.x0 + x, b.y0 + y, b.z0 + z)];
  return out;
}

template <typename T>
void scatter_band(std::vector<T>& cube, Dims3 full, const BandPlacement& b, const std::vector<T>& in) {
  std::size_t k = 0;
  for (std::uint32_t z = 0; z < b.dims.nz; ++z)
    for (std::uint32_t y = 0; y < b.dims.ny; ++y)
      for (std::uint32_t x = 0; x < b.dims.nx; ++x)
        cube[full.at(b.x0 + x, b.y0 + y, b.z0 + z)] = in[k++];
}

void check_forward_pre(Dims3 dims, std::uint32_t levels) {
  if (levels < 1) fail(ErrorKind::usage, "levels must be >= 1");
  if (levels > 20) fail(ErrorKind::usage, "levels too large");
  std::uint32_t need = 1u << levels;
  auto check = [&](std::uint32_t n, const char* name) {
    if (n < need)
      fail(ErrorKind::usage, std::string("axis ") + name + " too short for " +
                                 std::to_string(levels) + " levels: " + std::to_string(n) + " < " +
                                 std::to_string(need));
  };
  check(dims.nx, "x");
  check(dims.ny, "y");
  check(dims.nz, "z");
}

}  // namespace

std::vector<BandPlacement> band_layout(Dims3 orig, std::uint32_t levels) {
  // Block dims entering each level; level m transforms blocks[m-1].
  std::vector<Dims3> blocks(levels + 1);
  blocks[0] = orig;
  for (std::uint32_t m = 1; m <= levels; ++m)
    blocks[m] = {ceil_half(blocks[m - 1].nx), ceil_half(blocks[m - 1].ny),
                 ceil_half(blocks[m - 1].nz)};

  std::vector<BandPlacement> out;
  out.reserve(subband_count(levels));
  BandPlacement lll{0, levels, Orientation{0}, 0, 0, 0, blocks[levels]};
  out.push_back(lll);
  std::uint32_t index = 1;
  for (std::uint32_t lvl = levels; lvl >= 1; --lvl) {
    Dims3 parent = blocks[lvl - 1];
    Dims3 low = blocks[lvl];
    for (std::uint8_t bits = 1; bits <= 7; ++bits) {
      BandPlacement b;
      b.index = index++;
      b.level = lvl;
      b.orient = Orientation{bits};
      b.x0 = (bits & 1) ? low.nx : 0;
      b.y0 = (bits & 2) ? low.ny : 0;
      b.z0 = (bits & 4) ? low.nz : 0;
      b.dims = {(bits & 1) ? parent.nx - low.nx : low.nx, (bits & 2) ? parent.ny - low.ny : low.ny,
                (bits & 4) ? parent.nz - low.nz : low.nz};
      out.push_back(b);
    }
  }
  return out;
}

Decomposition forward(const Volume& v, WaveletKind kind, std::uint32_t levels, int threads) {
  check_forward_pre(v.dims, levels);
  Decomposition d;
  d.wavelet = kind;
  d.levels = levels;
  d.orig_dims = v.dims;
  d.orig_dtype = v.dtype;
  d.spacing = v.spacing;

  auto layout = band_layout(v.dims, levels);
  d.subbands.reserve(layout.size());

  if (kind == WaveletKind::legall_5_3) {
    auto cube = to_int_cube(v);
    forward_cube(cube, v.dims, levels, threads, fwd_line_53);
    for (const auto& b : layout) {
      Subband sb{b.index, b.level, b.orient, b.dims, gather_band(cube, v.dims, b)};
      d.subbands.push_back(std::move(sb));
    }
  } else {
    auto cube = to_float_cube(v);
    forward_cube(cube, v.dims, levels, threads, fwd_line_97);
    for (const auto& b : layout) {
      Subband sb{b.index, b.level, b.orient, b.dims, gather_band(cube, v.dims, b)};
      d.subbands.push_back(std::move(sb));
    }
  }
  return d;
}

Volume inverse(const Decomposition& d, int threads) {
  check_forward_pre(d.orig_dims, d.levels);
  auto layout = band_layout(d.orig_dims, d.levels);
  if (d.subbands.size() != layout.size())
    fail(ErrorKind::format, "decomposition has " + std::to_string(d.subbands.size()) +
                                " subbands, expected " + std::to_string(layout.size()));
  bool integer = d.wavelet == WaveletKind::legall_5_3;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& sb = d.subbands[i];
    const auto& b = layout[i];
    if (sb.index != b.index || sb.level != b.level || !(sb.orient == b.orient) ||
        !(sb.dims == b.dims) || sb.count() != b.dims.voxels())
      fail(ErrorKind::format, "inconsistent subband structure at index " + std::to_string(i));
    bool is_int = std::holds_alternative<std::vector<std::int32_t>>(sb.coeffs);
    if (is_int != integer)
      fail(ErrorKind::format, "subband coefficient type does not match wavelet kind");
  }

  if (integer) {
    std::vector<std::int32_t> cube(d.orig_dims.voxels());
    for (std::size_t i = 0; i < layout.size(); ++i)
      scatter_band(cube, d.orig_dims, layout[i],
                   std::get<std::vector<std::int32_t>>(d.subbands[i].coeffs));
    inverse_cube(cube, d.orig_dims, d.levels, threads, inv_line_53);
    return volume_from_int_cube(cube, d.orig_dims, d.orig_dtype, d.spacing);
  }
  std::vector<float> cube(d.orig_dims.voxels());
  for (std::size_t i = 0; i < layout.size(); ++i)
    scatter_band(cube, d.orig_dims, layout[i], std::get<std::vector<float>>(d.subbands[i].coeffs));
  inverse_cube(cube, d.orig_dims, d.levels, threads, inv_line_97);
  return volume_from_float_cube(cube, d.orig_dims, d.orig_dtype, d.spacing);
}

}  // namespace mv3c
