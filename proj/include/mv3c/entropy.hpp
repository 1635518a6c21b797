#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mv3c/error.hpp"

namespace mv3c {

// Lossless serialization of quantized subband integers. The token grammar is
// normative and frozen in docs/FORMAT.md: MSB-first bits, flag 0 = zero run
// (Exp-Golomb order 0 of runLength - 1), flag 1 = nonzero literal
// (Rice(k) of zigzag(v) - 1, quotients >= 48 escape to a raw 32-bit field).
struct SubbandPayload {
  std::uint8_t rice_k = 0;
  std::vector<std::uint8_t> bytes;
  std::uint64_t count = 0;  // number of decoded symbols
};

// k defaults to clamp(floor(log2(max(1, mean zigzag of nonzero values))), 0, 30).
SubbandPayload encode_subband(std::span<const std::int32_t> values,
                              std::optional<int> k_override = std::nullopt);

std::vector<std::int32_t> decode_subband(std::span<const std::uint8_t> bytes, std::uint64_t count,
                                         std::uint8_t rice_k);

int choose_rice_k(std::span<const std::int32_t> values);

}  // namespace mv3c
