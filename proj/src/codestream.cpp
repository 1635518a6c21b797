#include "mv3c/codestream.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "mv3c/entropy.hpp"
#include "mv3c/quantize.hpp"

namespace mv3c {

namespace {

constexpr char kMagic[4] = {'M', 'V', '3', 'C'};
constexpr std::uint32_t kVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> s) : s_(s) {}
  std::uint8_t u8() { return need(1), s_[pos_++]; }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s_[pos_++]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) {
    if (pos_ + n > s_.size()) fail(ErrorKind::format, "codestream header truncated");
  }
  std::span<const std::uint8_t> s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_header(const Header& h) {
  ByteWriter w;
  w.raw(kMagic, 4);
  w.u32(kVersion);
  w.u32(h.dims.nx);
  w.u32(h.dims.ny);
  w.u32(h.dims.nz);
  w.u8(static_cast<std::uint8_t>(h.dtype));
  w.u8(static_cast<std::uint8_t>(h.wavelet));
  w.u8(h.levels);
  w.u8(0);  // reserved
  w.f32(h.spacing.sx);
  w.f32(h.spacing.sy);
  w.f32(h.spacing.sz);
  w.f64(h.q_min);
  w.f64(h.q_max);
  w.f64(h.a);
  w.f64(h.b);
  w.f64(h.gamma);
  for (const auto& band : h.bands) {
    w.f64(band.delta);
    w.f64(band.qs);
    w.u8(band.rice_k);
    w.u64(band.payload_bytes);
  }
  return w.take();
}

Header parse_header(std::span<const std::uint8_t> stream, std::size_t& consumed) {
  ByteReader r(stream);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) fail(ErrorKind::format, "bad magic, not an MV3C stream");
  std::uint32_t version = r.u32();
  if (version != kVersion)
    fail(ErrorKind::format, "unsupported codestream version " + std::to_string(version));

  Header h;
  h.dims.nx = r.u32();
  h.dims.ny = r.u32();
  h.dims.nz = r.u32();
  std::uint8_t dtype_code = r.u8();
  if (dtype_code > 3) fail(ErrorKind::format, "bad dtype code " + std::to_string(dtype_code));
  h.dtype = static_cast<Dtype>(dtype_code);
  std::uint8_t wavelet_code = r.u8();
  if (wavelet_code > 1) fail(ErrorKind::format, "bad wavelet code " + std::to_string(wavelet_code));
  h.wavelet = static_cast<WaveletKind>(wavelet_code);
  h.levels = r.u8();
  r.u8();  // reserved
  h.spacing.sx = r.f32();
  h.spacing.sy = r.f32();
  h.spacing.sz = r.f32();
  h.q_min = r.f64();
  h.q_max = r.f64();
  h.a = r.f64();
  h.b = r.f64();
  h.gamma = r.f64();

  if (h.levels < 1 || h.levels > 20) fail(ErrorKind::format, "bad level count");
  if (h.dims.nx < 1 || h.dims.ny < 1 || h.dims.nz < 1) fail(ErrorKind::format, "bad dims");
  if (h.dims.nx > (1u << 20) || h.dims.ny > (1u << 20) || h.dims.nz > (1u << 20))
    fail(ErrorKind::format, "axis length exceeds supported maximum");
  std::uint32_t need = 1u << h.levels;
  if (h.dims.nx < need || h.dims.ny < need || h.dims.nz < need)
    fail(ErrorKind::format, "dims too small for declared level count");

  std::uint32_t bands = subband_count(h.levels);
  h.bands.resize(bands);
  for (auto& band : h.bands) {
    band.delta = r.f64();
    band.qs = r.f64();
    band.rice_k = r.u8();
    band.payload_bytes = r.u64();
    if (!(band.qs >= 1.0) || !std::isfinite(band.qs))
      fail(ErrorKind::format, "bad quantization step in header");
    if (band.rice_k > 30) fail(ErrorKind::format, "bad rice parameter in header");
  }
  consumed = r.pos();
  return h;
}

std::size_t original_byte_size(const Volume& v) {
  return v.voxel_count() * dtype_size(v.dtype);
}

double compression_rate(const Volume& original, std::size_t stream_bytes) {
  if (stream_bytes == 0) fail(ErrorKind::usage, "compression_rate: empty stream");
  return static_cast<double>(original_byte_size(original)) / static_cast<double>(stream_bytes);
}

namespace {

struct Assembled {
  std::vector<std::uint8_t> stream;
  Header header;
  std::vector<std::vector<std::int32_t>> quantized;
};

Assembled assemble(const Decomposition& d, const std::vector<SubbandStats>& stats,
                   const QuantizationPlan& plan, double q_min, double q_max) {
  Assembled out;
  out.header.dims = d.orig_dims;
  out.header.dtype = d.orig_dtype;
  out.header.spacing = d.spacing;
  out.header.wavelet = d.wavelet;
  out.header.levels = static_cast<std::uint8_t>(d.levels);
  out.header.q_min = q_min;
  out.header.q_max = q_max;
  out.header.a = plan.params ? plan.params->a : 0.0;
  out.header.b = plan.params ? plan.params->b : 0.0;
  out.header.gamma = plan.gamma;

  std::vector<std::vector<std::uint8_t>> payloads(d.subbands.size());
  out.header.bands.resize(d.subbands.size());
  out.quantized.resize(d.subbands.size());
  for (std::size_t i = 0; i < d.subbands.size(); ++i) {
    out.quantized[i] = quantize_subband(d.subbands[i], plan.steps[i]);
    SubbandPayload p = encode_subband(out.quantized[i]);
    out.header.bands[i] = {stats[i].delta, plan.steps[i], p.rice_k, p.bytes.size()};
    payloads[i] = std::move(p.bytes);
  }

  out.stream = serialize_header(out.header);
  for (const auto& p : payloads) out.stream.insert(out.stream.end(), p.begin(), p.end());
  return out;
}

constexpr double kGammaLo = 0.015625;  // 2^-6
constexpr double kGammaHi = 4096.0;    // 2^12
constexpr int kMaxRateIterations = 24;

}  // namespace

EncodeResult encode(const Volume& v, const EncodeOptions& opt) {
  if (!(opt.q_min >= 1.0)) fail(ErrorKind::usage, "q_min must be >= 1");
  if (!(opt.q_max > opt.q_min)) fail(ErrorKind::usage, "q_max must exceed q_min");
  if (opt.uniform_qs && !(*opt.uniform_qs >= 1.0))
    fail(ErrorKind::usage, "uniform qs must be >= 1");
  if (opt.target_cr && !(*opt.target_cr > 0.0))
    fail(ErrorKind::usage, "target compression rate must be positive");
  if (opt.target_cr && opt.gamma)
    fail(ErrorKind::usage, "target_cr and fixed gamma are mutually exclusive");
  if (!(opt.cr_tolerance > 0.0)) fail(ErrorKind::usage, "cr tolerance must be positive");
  if (opt.uniform_qs && opt.plan_override)
    fail(ErrorKind::usage, "uniform_qs and plan_override are mutually exclusive");

  Decomposition d = forward(v, opt.wavelet, opt.levels, opt.threads);
  for (const auto& sb : d.subbands) {
    if (const auto* fc = std::get_if<std::vector<float>>(&sb.coeffs)) {
      for (float c : *fc)
        if (!std::isfinite(c))
          fail(ErrorKind::data,
               "non-finite coefficient in subband " + std::to_string(sb.index));
    }
  }
  std::vector<SubbandStats> stats = compute_si(d);

  QuantizationPlan base;
  if (opt.plan_override) {
    if (opt.plan_override->size() != d.subbands.size())
      fail(ErrorKind::usage, "plan override has wrong subband count");
    for (double qs : *opt.plan_override)
      if (!(qs >= 1.0)) fail(ErrorKind::usage, "plan override steps must be >= 1");
    base.steps = *opt.plan_override;
  } else if (opt.uniform_qs) {
    base = uniform_plan(d.subbands.size(), *opt.uniform_qs);
  } else {
    base = build_plan(stats, opt.q_min, opt.q_max);
  }

  double orig_bytes = static_cast<double>(original_byte_size(v));
  auto run = [&](double gamma) {
    QuantizationPlan scaled = gamma == 1.0 ? base : scale_plan(base, gamma);
    Assembled a = assemble(d, stats, scaled, opt.q_min, opt.q_max);
    return std::pair<Assembled, QuantizationPlan>(std::move(a), std::move(scaled));
  };

  Assembled chosen;
  QuantizationPlan chosen_plan;
  if (!opt.target_cr) {
    std::tie(chosen, chosen_plan) = run(opt.gamma.value_or(1.0));
  } else {
    double target = *opt.target_cr;
    double tol = opt.cr_tolerance;
    auto cr_of = [&](const Assembled& a) { return orig_bytes / static_cast<double>(a.stream.size()); };
    auto rel_err = [&](double cr) { return std::abs(cr - target) / target; };

    int iterations = 0;
    auto eval = [&](double gamma) {
      iterations++;
      return run(gamma);
    };

    // Probe the gamma bounds first so unreachable targets fail fast with the
    // achievable range.
    auto [lo_asm, lo_plan] = eval(kGammaLo);
    double cr_lo = cr_of(lo_asm);
    if (rel_err(cr_lo) <= tol) {
      chosen = std::move(lo_asm);
      chosen_plan = std::move(lo_plan);
    } else {
      auto [hi_asm, hi_plan] = eval(kGammaHi);
      double cr_hi = cr_of(hi_asm);
      if (target < std::min(cr_lo, cr_hi) || target > std::max(cr_lo, cr_hi)) {
        fail(ErrorKind::rate, "target CR " + std::to_string(target) +
                                  " unreachable; achievable range is [" + std::to_string(cr_lo) +
                                  ", " + std::to_string(cr_hi) + "]");
      }
      if (rel_err(cr_hi) <= tol) {
        chosen = std::move(hi_asm);
        chosen_plan = std::move(hi_plan);
      } else {
        double log_lo = std::log2(kGammaLo), log_hi = std::log2(kGammaHi);
        Assembled best;
        QuantizationPlan best_plan;
        double best_err = 1e300;
        bool ok = false;
        while (iterations < kMaxRateIterations) {
          double gamma = std::exp2(0.5 * (log_lo + log_hi));
          auto [a, plan] = eval(gamma);
          double cr = cr_of(a);
          double err = rel_err(cr);
          if (err < best_err) {
            best_err = err;
            best = std::move(a);
            best_plan = std::move(plan);
          }
          if (err <= tol) {
            ok = true;
            break;
          }
          // CR grows with gamma (coarser steps, smaller stream).
          if (cr < target)
            log_lo = std::log2(gamma);
          else
            log_hi = std::log2(gamma);
        }
        if (!ok)
          fail(ErrorKind::rate, "rate search did not reach target CR " + std::to_string(target) +
                                    " within tolerance; closest achieved " +
                                    std::to_string(best_err * 100.0) + "% away");
        chosen = std::move(best);
        chosen_plan = std::move(best_plan);
      }
    }
  }

  EncodeResult res;
  res.achieved_cr = orig_bytes / static_cast<double>(chosen.stream.size());
  res.header = std::move(chosen.header);
  res.plan = std::move(chosen_plan);
  res.stats = std::move(stats);

  // Mean absolute quantization error per subband, on the final plan.
  res.subband_mae.resize(d.subbands.size());
  for (std::size_t i = 0; i < d.subbands.size(); ++i) {
    std::vector<double> deq = dequantize_values(chosen.quantized[i], res.plan.steps[i], d.wavelet);
    double acc = 0.0;
    for (std::size_t j = 0; j < deq.size(); ++j)
      acc += std::abs(d.subbands[i].coeff_at(j) - deq[j]);
    res.subband_mae[i] = deq.empty() ? 0.0 : acc / static_cast<double>(deq.size());
  }
  res.stream = std::move(chosen.stream);
  return res;
}

Volume decode(std::span<const std::uint8_t> stream, int threads) {
  std::size_t offset = 0;
  Header h = parse_header(stream, offset);

  std::uint64_t payload_total = 0;
  for (const auto& band : h.bands) payload_total += band.payload_bytes;
  if (offset + payload_total != stream.size())
    fail(ErrorKind::format, "payload length mismatch: header declares " +
                                std::to_string(payload_total) + " bytes, stream carries " +
                                std::to_string(stream.size() - offset));

  Decomposition d;
  d.wavelet = h.wavelet;
  d.levels = h.levels;
  d.orig_dims = h.dims;
  d.orig_dtype = h.dtype;
  d.spacing = h.spacing;
  auto layout = band_layout(h.dims, h.levels);

  bool integer = h.wavelet == WaveletKind::legall_5_3;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const auto& band = h.bands[i];
    std::span<const std::uint8_t> payload = stream.subspan(offset, band.payload_bytes);
    offset += band.payload_bytes;
    std::vector<std::int32_t> values =
        decode_subband(payload, layout[i].dims.voxels(), band.rice_k);
    std::vector<double> deq = dequantize_values(values, band.qs, h.wavelet);

    Subband sb;
    sb.index = layout[i].index;
    sb.level = layout[i].level;
    sb.orient = layout[i].orient;
    sb.dims = layout[i].dims;
    if (integer) {
      std::vector<std::int32_t> coeffs(deq.size());
      for (std::size_t j = 0; j < deq.size(); ++j)
        coeffs[j] = static_cast<std::int32_t>(std::round(deq[j]));
      sb.coeffs = std::move(coeffs);
    } else {
      std::vector<float> coeffs(deq.size());
      for (std::size_t j = 0; j < deq.size(); ++j) coeffs[j] = static_cast<float>(deq[j]);
      sb.coeffs = std::move(coeffs);
    }
    d.subbands.push_back(std::move(sb));
  }
  return inverse(d, threads);
}

Metrics compute_metrics(const Volume& original, const Volume& recon) {
  if (!(original.dims == recon.dims))
    fail(ErrorKind::usage, "metrics: volume dims do not match");
  std::size_t n = original.voxel_count();
  double se = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double diff = original.value_at(i) - recon.value_at(i);
    se += diff * diff;
  }
  Metrics m;
  m.mse = se / static_cast<double>(n);

  double peak;
  if (dtype_is_integer(original.dtype)) {
    peak = dtype_max(original.dtype) - dtype_min(original.dtype);
  } else {
    double lo = original.value_at(0), hi = lo;
    for (std::size_t i = 1; i < n; ++i) {
      double x = original.value_at(i);
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    peak = hi - lo;
  }
  if (m.mse == 0.0)
    m.psnr_db = 999.0;
  else if (peak <= 0.0)
    m.psnr_db = -999.0;
  else
    m.psnr_db = 10.0 * std::log10(peak * peak / m.mse);
  return m;
}

}  // namespace mv3c
