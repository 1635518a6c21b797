#include <algorithm>
#include <cmath>
#include <random>

#include "mv3c/volume_io.hpp"

namespace mv3c {

namespace {

// std::*_distribution output is implementation-defined, so the generators
// below draw doubles straight from the engine to keep phantoms reproducible.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Unit-variance Laplace noise; heavy tails keep the phantom's subband
// statistics close to what scanner data produces.
double laplace_unit(std::mt19937_64& rng) {
  double u = uniform01(rng) - 0.5;
  double mag = -std::log(1.0 - 2.0 * std::abs(u)) / 1.4142135623730951;
  return u >= 0.0 ? mag : -mag;
}

std::vector<double> render_blobs(Dims3 dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
  int nblobs = 5 + static_cast<int>(rng() % 5);
  struct Blob {
    double cx, cy, cz, sx, sy, sz, amp;
  };
  std::vector<Blob> blobs(nblobs);
  for (auto& b : blobs) {
    b.cx = uniform(rng, 0.0, dims.nx - 1.0);
    b.cy = uniform(rng, 0.0, dims.ny - 1.0);
    b.cz = uniform(rng, 0.0, dims.nz - 1.0);
    b.sx = uniform(rng, 0.08, 0.22) * dims.nx;
    b.sy = uniform(rng, 0.08, 0.22) * dims.ny;
    b.sz = uniform(rng, 0.08, 0.22) * dims.nz;
    b.amp = uniform(rng, 4000.0, 14000.0);
  }
  std::vector<double> field(dims.voxels(), 0.0);
  for (std::uint32_t z = 0; z < dims.nz; ++z)
    for (std::uint32_t y = 0; y < dims.ny; ++y)
      for (std::uint32_t x = 0; x < dims.nx; ++x) {
        double acc = 0.0;
        for (const auto& b : blobs) {
          double dx = (x - b.cx) / b.sx, dy = (y - b.cy) / b.sy, dz = (z - b.cz) / b.sz;
          acc += b.amp * std::exp(-0.5 * (dx * dx + dy * dy + dz * dz));
        }
        field[dims.at(x, y, z)] = acc;
      }
  return field;
}

std::int16_t to_i16(double v) {
  v = std::round(v);
  if (v < -32768.0) v = -32768.0;
  if (v > 32767.0) v = 32767.0;
  return static_cast<std::int16_t>(v);
}

}  // namespace

Volume synth_phantom(PhantomKind kind, Dims3 dims, std::uint64_t seed) {
  if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1)
    fail(ErrorKind::usage, "phantom dims must each be >= 1");
  Volume v = make_volume(dims, Dtype::i16);
  auto& out = std::get<std::vector<std::int16_t>>(v.data);

  switch (kind) {
    case PhantomKind::constant: {
      auto value = static_cast<std::int16_t>(1000 + seed % 9000);
      std::fill(out.begin(), out.end(), value);
      break;
    }
    case PhantomKind::gradient_ramp: {
      std::mt19937_64 rng(seed ^ 0xabcdef0123456789ULL);
      double wx = uniform(rng, 0.5, 2.0), wy = uniform(rng, 0.5, 2.0), wz = uniform(rng, 0.5, 2.0);
      double span = wx * (dims.nx - 1) + wy * (dims.ny - 1) + wz * (dims.nz - 1);
      if (span <= 0.0) span = 1.0;
      for (std::uint32_t z = 0; z < dims.nz; ++z)
        for (std::uint32_t y = 0; y < dims.ny; ++y)
          for (std::uint32_t x = 0; x < dims.nx; ++x) {
            double t = (wx * x + wy * y + wz * z) / span;
            out[dims.at(x, y, z)] = to_i16(t * 16000.0);
          }
      break;
    }
    case PhantomKind::gaussian_blobs: {
      auto field = render_blobs(dims, seed);
      for (std::size_t i = 0; i < field.size(); ++i) out[i] = to_i16(std::min(field[i], 20000.0));
      break;
    }
    case PhantomKind::blobs_plus_noise: {
      auto field = render_blobs(dims, seed);
      auto [lo_it, hi_it] = std::minmax_element(field.begin(), field.end());
      double range = *hi_it - *lo_it;
      if (range <= 0.0) range = 1.0;
      double sigma = 0.05 * range;
      std::mt19937_64 rng(seed ^ 0x51f15eadbeefULL);
      for (std::size_t i = 0; i < field.size(); ++i)
        out[i] = to_i16(std::min(field[i], 20000.0) + sigma * laplace_unit(rng));
      break;
    }
  }
  return v;
}

}  // namespace mv3c
