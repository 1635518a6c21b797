#include "mv3c/freq_analysis.hpp"

#include <algorithm>
#include <cmath>

namespace mv3c {

namespace {

constexpr std::size_t kHistBins = 64;

template <typename T>
SubbandStats stats_for(std::uint32_t index, const std::vector<T>& coeffs) {
  SubbandStats s;
  s.index = index;
  s.count = coeffs.size();
  if (coeffs.empty()) return s;

  double sum = 0.0, abs_sum = 0.0;
  double lo = static_cast<double>(coeffs[0]), hi = lo;
  for (const T& c : coeffs) {
    double x = static_cast<double>(c);
    sum += x;
    abs_sum += std::abs(x);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  s.mean = sum / static_cast<double>(coeffs.size());
  double ss = 0.0;
  for (const T& c : coeffs) {
    double dx = static_cast<double>(c) - s.mean;
    ss += dx * dx;
  }
  s.delta = std::sqrt(ss / static_cast<double>(coeffs.size()));
  s.laplace_b = abs_sum / static_cast<double>(coeffs.size());

  s.hist.lo = lo;
  s.hist.hi = hi;
  if (lo == hi) {
    s.hist.counts.assign(1, coeffs.size());
    return s;
  }
  s.hist.counts.assign(kHistBins, 0);
  double scale = static_cast<double>(kHistBins) / (hi - lo);
  for (const T& c : coeffs) {
    auto bin = static_cast<std::size_t>((static_cast<double>(c) - lo) * scale);
    if (bin >= kHistBins) bin = kHistBins - 1;  // x == hi lands in the last bin
    s.hist.counts[bin]++;
  }
  return s;
}

// 3D summed-area table of |g| for O(1) box sums.
struct AbsGradSat {
  Dims3 dims;
  std::vector<double> sat;  // (nx+1)(ny+1)(nz+1), index via idx()

  explicit AbsGradSat(const GradientVolume& g) : dims(g.dims) {
    std::size_t sx = dims.nx + 1, sy = dims.ny + 1, sz = dims.nz + 1;
    sat.assign(sx * sy * sz, 0.0);
    for (std::uint32_t z = 0; z < dims.nz; ++z)
      for (std::uint32_t y = 0; y < dims.ny; ++y)
        for (std::uint32_t x = 0; x < dims.nx; ++x) {
          double v = std::abs(static_cast<double>(g.data[dims.at(x, y, z)]));
          sat[idx(x + 1, y + 1, z + 1)] = v + sat[idx(x, y + 1, z + 1)] +
                                          sat[idx(x + 1, y, z + 1)] + sat[idx(x + 1, y + 1, z)] -
                                          sat[idx(x, y, z + 1)] - sat[idx(x, y + 1, z)] -
                                          sat[idx(x + 1, y, z)] + sat[idx(x, y, z)];
        }
  }

  std::size_t idx(std::size_t x, std::size_t y, std::size_t z) const {
    return x + (dims.nx + 1) * (y + (dims.ny + 1) * z);
  }

  // Sum over [x0, x1) x [y0, y1) x [z0, z1).
  double box_sum(std::size_t x0, std::size_t x1, std::size_t y0, std::size_t y1, std::size_t z0,
                 std::size_t z1) const {
    return sat[idx(x1, y1, z1)] - sat[idx(x0, y1, z1)] - sat[idx(x1, y0, z1)] -
           sat[idx(x1, y1, z0)] + sat[idx(x0, y0, z1)] + sat[idx(x0, y1, z0)] +
           sat[idx(x1, y0, z0)] - sat[idx(x0, y0, z0)];
  }
};

}  // namespace

std::vector<SubbandStats> compute_si(const Decomposition& d) {
  std::vector<SubbandStats> out;
  out.reserve(d.subbands.size());
  for (const auto& sb : d.subbands)
    out.push_back(std::visit([&](const auto& c) { return stats_for(sb.index, c); }, sb.coeffs));
  return out;
}

GradientVolume gradient_from_volume(const Volume& v) {
  if (v.dtype != Dtype::f32)
    fail(ErrorKind::format, "gradient volume must have dtype float32, got " +
                                std::string(dtype_name(v.dtype)));
  GradientVolume g;
  g.dims = v.dims;
  g.data = std::get<std::vector<float>>(v.data);
  for (float x : g.data)
    if (!std::isfinite(x)) fail(ErrorKind::data, "gradient volume contains non-finite values");
  return g;
}

std::vector<std::pair<std::uint32_t, double>> importance_scores(const Decomposition& d,
                                                                const GradientVolume& g) {
  if (!(g.dims == d.orig_dims))
    fail(ErrorKind::usage, "gradient dims do not match decomposition dims");
  AbsGradSat sat(g);
  Dims3 full = d.orig_dims;

  std::vector<std::pair<std::uint32_t, double>> scores;
  scores.reserve(d.subbands.size());
  for (const auto& sb : d.subbands) {
    std::size_t step = std::size_t(1) << sb.level;
    double acc = 0.0;
    std::size_t k = 0;
    for (std::uint32_t jz = 0; jz < sb.dims.nz; ++jz) {
      std::size_t z0 = jz * step, z1 = std::min<std::size_t>(z0 + step, full.nz);
      for (std::uint32_t jy = 0; jy < sb.dims.ny; ++jy) {
        std::size_t y0 = jy * step, y1 = std::min<std::size_t>(y0 + step, full.ny);
        for (std::uint32_t jx = 0; jx < sb.dims.nx; ++jx) {
          std::size_t x0 = jx * step, x1 = std::min<std::size_t>(x0 + step, full.nx);
          double vox = static_cast<double>((x1 - x0) * (y1 - y0) * (z1 - z0));
          double gbar = sat.box_sum(x0, x1, y0, y1, z0, z1) / vox;
          acc += std::abs(sb.coeff_at(k++)) * gbar;
        }
      }
    }
    scores.emplace_back(sb.index, acc / static_cast<double>(sb.count()));
  }
  return scores;
}

}  // namespace mv3c
