#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mv3c/dwt3d.hpp"
#include "mv3c/freq_analysis.hpp"
#include "mv3c/qs_mapping.hpp"

namespace mv3c {

struct SubbandRecord {
  double delta = 0.0;
  double qs = 1.0;
  std::uint8_t rice_k = 0;
  std::uint64_t payload_bytes = 0;
  bool operator==(const SubbandRecord&) const = default;
};

// MV3C codestream header; all multi-byte fields little-endian, exact layout
// in docs/FORMAT.md. a == b == 0 marks a uniform (non-NLM) plan.
struct Header {
  Dims3 dims{};
  Dtype dtype = Dtype::u8;
  Spacing3 spacing{};
  WaveletKind wavelet = WaveletKind::cdf_9_7;
  std::uint8_t levels = 0;
  double q_min = 1.0, q_max = 16.0;
  double a = 0.0, b = 0.0;
  double gamma = 1.0;
  std::vector<SubbandRecord> bands;
  bool operator==(const Header&) const = default;
};

std::vector<std::uint8_t> serialize_header(const Header& h);
// Parses and validates the header; consumed is set to its byte length.
Header parse_header(std::span<const std::uint8_t> stream, std::size_t& consumed);

struct EncodeOptions {
  WaveletKind wavelet = WaveletKind::cdf_9_7;
  std::uint32_t levels = 3;
  double q_min = 1.0;
  double q_max = 16.0;
  std::optional<double> uniform_qs;                 // bypass the NLM plan
  std::optional<std::vector<double>> plan_override; // explicit per-band steps
  std::optional<double> target_cr;                  // rate targeting
  double cr_tolerance = 0.05;                       // relative
  std::optional<double> gamma;                      // fixed plan scale
  int threads = 1;
};

struct EncodeResult {
  std::vector<std::uint8_t> stream;
  Header header;
  double achieved_cr = 0.0;
  QuantizationPlan plan;             // scaled plan actually applied
  std::vector<SubbandStats> stats;
  std::vector<double> subband_mae;   // mean |c - c_hat| per subband
};

// forward DWT -> subband stats -> plan -> (optional rate search) ->
// quantize -> entropy-encode -> header + payloads. The rate search bisects
// gamma in [2^-6, 2^12] with at most 24 encode iterations, reusing the DWT.
EncodeResult encode(const Volume& v, const EncodeOptions& opt);

Volume decode(std::span<const std::uint8_t> stream, int threads = 1);

struct Metrics {
  double mse = 0.0;
  double psnr_db = 0.0;
  std::optional<double> cr;
};

// MSE over all voxels in double; peak is the full integer range for integer
// dtypes and max-min of the original for float. PSNR caps at 999 dB when
// MSE is zero.
Metrics compute_metrics(const Volume& original, const Volume& recon);

double compression_rate(const Volume& original, std::size_t stream_bytes);
std::size_t original_byte_size(const Volume& v);

}  // namespace mv3c
