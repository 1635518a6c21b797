#include "mv3c/quantize.hpp"

#include <cmath>

namespace mv3c {

template <typename T>
std::vector<std::int32_t> quantize_values(std::span<const T> coeffs, double qs,
                                          std::uint32_t band_index) {
  if (!(qs >= 1.0)) fail(ErrorKind::usage, "quantize: qs must be >= 1");
  std::vector<std::int32_t> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    double x = static_cast<double>(coeffs[i]);
    if (!std::isfinite(x))
      fail(ErrorKind::data,
           "quantize: non-finite coefficient in subband " + std::to_string(band_index));
    double q = std::floor(std::abs(x) / qs);
    if (q >= 2147483648.0)
      fail(ErrorKind::data,
           "quantize: coefficient magnitude overflow in subband " + std::to_string(band_index));
    auto m = static_cast<std::int32_t>(q);
    out[i] = x < 0.0 ? -m : m;
  }
  return out;
}

template std::vector<std::int32_t> quantize_values<std::int32_t>(std::span<const std::int32_t>,
                                                                 double, std::uint32_t);
template std::vector<std::int32_t> quantize_values<float>(std::span<const float>, double,
                                                          std::uint32_t);
template std::vector<std::int32_t> quantize_values<double>(std::span<const double>, double,
                                                           std::uint32_t);

std::vector<std::int32_t> quantize_subband(const Subband& sb, double qs) {
  return std::visit(
      [&](const auto& c) {
        using T = typename std::decay_t<decltype(c)>::value_type;
        return quantize_values<T>(std::span<const T>(c.data(), c.size()), qs, sb.index);
      },
      sb.coeffs);
}

std::vector<double> dequantize_values(std::span<const std::int32_t> values, double qs,
                                      WaveletKind kind) {
  if (!(qs >= 1.0)) fail(ErrorKind::usage, "dequantize: qs must be >= 1");
  std::vector<double> out(values.size());
  if (kind == WaveletKind::legall_5_3 && qs == 1.0) {
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<double>(values[i]);
    return out;
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::int32_t q = values[i];
    if (q == 0) {
      out[i] = 0.0;
    } else {
      double m = (std::abs(static_cast<double>(q)) + 0.5) * qs;
      out[i] = q < 0 ? -m : m;
    }
  }
  return out;
}

}  // namespace mv3c
