#include "mv3c/entropy.hpp"

#include <bit>
#include <string>

namespace mv3c {

namespace {

constexpr std::uint32_t kEscapeQuotient = 48;

inline std::uint64_t zigzag(std::int64_t v) {
  return v >= 0 ? static_cast<std::uint64_t>(2 * v) : static_cast<std::uint64_t>(-2 * v - 1);
}

inline std::int32_t unzigzag(std::uint64_t u) {
  return (u & 1) ? static_cast<std::int32_t>(-static_cast<std::int64_t>((u + 1) / 2))
                 : static_cast<std::int32_t>(u / 2);
}

class BitWriter {
 public:
  void put_bit(std::uint32_t bit) {
    if (fill_ == 0) {
      bytes_.push_back(0);
      fill_ = 8;
    }
    fill_--;
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << fill_);
  }

  void put_bits(std::uint64_t value, unsigned count) {  // MSB first
    for (unsigned i = count; i-- > 0;) put_bit(static_cast<std::uint32_t>((value >> i) & 1));
  }

  void put_unary_ones(std::uint32_t n) {
    for (std::uint32_t i = 0; i < n; ++i) put_bit(1);
  }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
  unsigned fill_ = 0;  // free bits remaining in the last byte
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint32_t get_bit() {
    std::size_t byte = pos_ >> 3;
    if (byte >= bytes_.size())
      fail(ErrorKind::data, "corruption: payload truncated at bit " + std::to_string(pos_));
    std::uint32_t bit = (bytes_[byte] >> (7 - (pos_ & 7))) & 1;
    pos_++;
    return bit;
  }

  std::uint64_t get_bits(unsigned count) {
    std::uint64_t v = 0;
    for (unsigned i = 0; i < count; ++i) v = (v << 1) | get_bit();
    return v;
  }

  std::size_t bit_pos() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_exp_golomb(BitWriter& bw, std::uint64_t value) {
  std::uint64_t v = value + 1;
  auto nbits = static_cast<unsigned>(std::bit_width(v));
  for (unsigned i = 1; i < nbits; ++i) bw.put_bit(0);
  bw.put_bits(v, nbits);
}

std::uint64_t get_exp_golomb(BitReader& br) {
  unsigned zeros = 0;
  while (br.get_bit() == 0) {
    if (++zeros > 63) fail(ErrorKind::data, "corruption: oversized Exp-Golomb prefix");
  }
  std::uint64_t v = 1;
  for (unsigned i = 0; i < zeros; ++i) v = (v << 1) | br.get_bit();
  return v - 1;
}

void put_rice(BitWriter& bw, std::uint32_t u, unsigned k) {
  std::uint32_t q = u >> k;
  if (q < kEscapeQuotient) {
    bw.put_unary_ones(q);
    bw.put_bit(0);
    bw.put_bits(u & ((std::uint64_t(1) << k) - 1), k);
  } else {
    bw.put_unary_ones(kEscapeQuotient);
    bw.put_bit(0);
    bw.put_bits(u, 32);
  }
}

std::uint32_t get_rice(BitReader& br, unsigned k) {
  std::uint32_t q = 0;
  while (br.get_bit() == 1) {
    if (++q == kEscapeQuotient) break;
  }
  if (q == kEscapeQuotient) {
    // Loop exits on the 48th one without consuming the terminator.
    if (br.get_bit() != 0)
      fail(ErrorKind::data, "corruption: missing escape terminator at bit " +
                                std::to_string(br.bit_pos()));
    return static_cast<std::uint32_t>(br.get_bits(32));
  }
  return (q << k) | static_cast<std::uint32_t>(br.get_bits(k));
}

}  // namespace

int choose_rice_k(std::span<const std::int32_t> values) {
  std::uint64_t zz_sum = 0, nonzero = 0;
  for (std::int32_t v : values) {
    if (v == 0) continue;
    zz_sum += zigzag(v);
    nonzero++;
  }
  if (nonzero == 0) return 0;
  auto mean = static_cast<std::uint64_t>(zz_sum / nonzero);
  if (mean < 1) mean = 1;
  int k = std::bit_width(mean) - 1;
  return k > 30 ? 30 : k;
}

SubbandPayload encode_subband(std::span<const std::int32_t> values, std::optional<int> k_override) {
  int k = k_override.value_or(choose_rice_k(values));
  if (k < 0 || k > 30) fail(ErrorKind::usage, "rice parameter out of range");

  BitWriter bw;
  std::size_t i = 0;
  while (i < values.size()) {
    if (values[i] == 0) {
      std::size_t run = 1;
      while (i + run < values.size() && values[i + run] == 0) run++;
      bw.put_bit(0);
      put_exp_golomb(bw, static_cast<std::uint64_t>(run) - 1);
      i += run;
    } else {
      std::uint64_t zz = zigzag(values[i]);
      bw.put_bit(1);
      put_rice(bw, static_cast<std::uint32_t>(zz - 1), static_cast<unsigned>(k));
      i++;
    }
  }

  SubbandPayload out;
  out.rice_k = static_cast<std::uint8_t>(k);
  out.bytes = bw.take();
  out.count = values.size();
  return out;
}

std::vector<std::int32_t> decode_subband(std::span<const std::uint8_t> bytes, std::uint64_t count,
                                         std::uint8_t rice_k) {
  if (rice_k > 30) fail(ErrorKind::format, "rice parameter out of range");
  std::vector<std::int32_t> out;
  out.reserve(count);
  BitReader br(bytes);
  while (out.size() < count) {
    if (br.get_bit() == 0) {
      std::uint64_t run = get_exp_golomb(br) + 1;
      if (out.size() + run > count)
        fail(ErrorKind::data, "corruption: zero run overruns subband at bit " +
                                  std::to_string(br.bit_pos()));
      out.insert(out.end(), run, 0);
    } else {
      std::uint64_t u = get_rice(br, rice_k);
      out.push_back(unzigzag(u + 1));
    }
  }
  return out;
}

}  // namespace mv3c
