#include <cmath>

#include "doctest.h"
#include "mv3c/codestream.hpp"
#include "mv3c/volume_io.hpp"
#include "test_util.hpp"

using namespace mv3c;

TEST_SUITE("codestream") {

TEST_CASE("header round-trips through serialize/parse") {
  std::mt19937_64 rng(81);
  for (int rep = 0; rep < 50; ++rep) {
    Header h;
    h.levels = std::uint8_t(1 + rng() % 3);
    std::uint32_t need = 1u << h.levels;
    h.dims = {need + std::uint32_t(rng() % 100), need + std::uint32_t(rng() % 100),
              need + std::uint32_t(rng() % 100)};
    h.dtype = static_cast<Dtype>(rng() % 4);
    h.wavelet = static_cast<WaveletKind>(rng() % 2);
    h.spacing = {float(testutil::uniform(rng, 0.1, 4.0)), 1.0f, 2.5f};
    h.q_min = 1.0 + double(rng() % 4);
    h.q_max = h.q_min + 1.0 + double(rng() % 30);
    h.a = testutil::uniform(rng, 0.0, 100.0);
    h.b = testutil::uniform(rng, -5.0, 5.0);
    h.gamma = testutil::uniform(rng, 0.1, 8.0);
    h.bands.resize(subband_count(h.levels));
    for (auto& band : h.bands) {
      band.delta = testutil::uniform(rng, 0.0, 1000.0);
      band.qs = 1.0 + testutil::uniform(rng, 0.0, 100.0);
      band.rice_k = std::uint8_t(rng() % 31);
      band.payload_bytes = rng() % 100000;
    }
    auto bytes = serialize_header(h);
    std::size_t consumed = 0;
    Header back = parse_header(bytes, consumed);
    CHECK(consumed == bytes.size());
    CHECK(back == h);
  }
}

TEST_CASE("lossless configuration: decode(encode(v)) is bit-exact") {
  Volume v = testutil::random_i16_volume({20, 16, 12}, 82);
  EncodeOptions opt;
  opt.wavelet = WaveletKind::legall_5_3;
  opt.levels = 2;
  opt.uniform_qs = 1.0;
  EncodeResult enc = encode(v, opt);
  Volume back = decode(enc.stream);
  CHECK(bit_identical(v, back));

  // Structured content actually compresses; pure noise legitimately cannot.
  Volume blobs = synth_phantom(PhantomKind::gaussian_blobs, {24, 24, 24}, 82);
  EncodeResult enc2 = encode(blobs, opt);
  CHECK(bit_identical(blobs, decode(enc2.stream)));
  CHECK(enc2.achieved_cr > 1.0);
}

TEST_CASE("flipped magic byte is a format error") {
  Volume v = testutil::random_i16_volume({8, 8, 8}, 83);
  EncodeOptions opt;
  opt.wavelet = WaveletKind::legall_5_3;
  opt.levels = 1;
  opt.uniform_qs = 1.0;
  EncodeResult enc = encode(v, opt);
  enc.stream[0] ^= 0x40;
  try {
    decode(enc.stream);
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
  }
}

TEST_CASE("payload corruption is detected") {
  Volume v = testutil::random_i16_volume({16, 16, 16}, 84);
  EncodeOptions opt;
  opt.wavelet = WaveletKind::legall_5_3;
  opt.levels = 1;
  opt.uniform_qs = 1.0;
  EncodeResult enc = encode(v, opt);
  auto truncated = enc.stream;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode(truncated), Error);
}

TEST_CASE("identical (volume, cfg) produce byte-identical codestreams; decode is deterministic") {
  Volume v = synth_phantom(PhantomKind::blobs_plus_noise, {24, 24, 24}, 85);
  EncodeOptions opt;
  opt.levels = 2;
  EncodeResult a = encode(v, opt);
  EncodeResult b = encode(v, opt);
  CHECK(a.stream == b.stream);
  CHECK(bit_identical(decode(a.stream), decode(a.stream)));
}

TEST_CASE("metrics: identical volumes cap PSNR at 999") {
  Volume v = testutil::random_i16_volume({8, 8, 8}, 86);
  Metrics m = compute_metrics(v, v);
  CHECK(m.mse == 0.0);
  CHECK(m.psnr_db == 999.0);
}

TEST_CASE("metrics: off-by-one u8 volumes give PSNR ~ 48.13 dB") {
  Volume a = make_volume({4, 4, 4}, Dtype::u8);
  Volume b = make_volume({4, 4, 4}, Dtype::u8);
  auto& da = std::get<std::vector<std::uint8_t>>(a.data);
  auto& db = std::get<std::vector<std::uint8_t>>(b.data);
  for (std::size_t i = 0; i < da.size(); ++i) {
    da[i] = std::uint8_t(100 + i % 50);
    db[i] = std::uint8_t(da[i] + 1);
  }
  Metrics m = compute_metrics(a, b);
  CHECK(m.mse == doctest::Approx(1.0));
  CHECK(m.psnr_db == doctest::Approx(10.0 * std::log10(255.0 * 255.0)).epsilon(1e-9));
}

TEST_CASE("metrics: dims mismatch is an argument error") {
  Volume a = make_volume({4, 4, 4}, Dtype::u8);
  Volume b = make_volume({4, 4, 5}, Dtype::u8);
  try {
    compute_metrics(a, b);
    FAIL("expected a usage error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::usage);
  }
}

TEST_CASE("compression rate is the plain byte ratio") {
  Volume v = make_volume({128, 128, 64}, Dtype::i16);  // 2 MiB
  CHECK(compression_rate(v, 66 * 1024) == doctest::Approx(2.0 * 1024 * 1024 / (66.0 * 1024)));
}

TEST_CASE("rate-distortion monotonicity over a gamma ladder") {
  Volume v = synth_phantom(PhantomKind::blobs_plus_noise, {32, 32, 32}, 87);
  EncodeOptions opt;
  opt.levels = 2;
  std::size_t prev_size = SIZE_MAX;
  double prev_psnr = 1e9;
  for (double gamma : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    EncodeOptions o = opt;
    o.gamma = gamma;
    EncodeResult enc = encode(v, o);
    Metrics m = compute_metrics(v, decode(enc.stream));
    CHECK(double(enc.stream.size()) <= double(prev_size) * 1.005);  // 0.5% coder noise allowed
    CHECK(m.psnr_db <= prev_psnr + 1e-9);
    prev_size = enc.stream.size();
    prev_psnr = m.psnr_db;
  }
}

TEST_CASE("rate search hits a feasible target and records gamma") {
  Volume v = synth_phantom(PhantomKind::blobs_plus_noise, {32, 32, 32}, 88);
  EncodeOptions opt;
  opt.levels = 2;
  opt.target_cr = 12.0;
  EncodeResult enc = encode(v, opt);
  CHECK(std::abs(enc.achieved_cr - 12.0) / 12.0 <= 0.05);
  CHECK(enc.header.gamma == enc.plan.gamma);
}

TEST_CASE("unreachable rate target reports the achievable range") {
  Volume v = synth_phantom(PhantomKind::constant, {16, 16, 16}, 89);
  EncodeOptions opt;
  opt.levels = 1;
  opt.target_cr = 2.0;  // constant volumes compress far beyond 2x even at qs=1
  try {
    encode(v, opt);
    FAIL("expected a rate error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::rate);
    CHECK(std::string(e.what()).find("achievable range") != std::string::npos);
  }
}

TEST_CASE("NLM plan beats the uniform plan on skewed subband energies at matched CR") {
  Volume v = testutil::skewed_spectrum_phantom({32, 32, 32}, 3, 60.0, 3.0, 90);
  EncodeOptions nlm;
  nlm.levels = 3;
  nlm.target_cr = 30.0;
  nlm.cr_tolerance = 0.02;
  EncodeResult enc_nlm = encode(v, nlm);

  // Confirm the skew premise.
  double dmin = 1e300, dmax = 0.0;
  for (const auto& s : enc_nlm.stats) {
    dmin = std::min(dmin, s.delta);
    dmax = std::max(dmax, s.delta);
  }
  CHECK(dmax / std::max(dmin, 1e-30) >= 8.0);

  EncodeOptions uni;
  uni.levels = 3;
  uni.uniform_qs = 1.0;
  uni.target_cr = enc_nlm.achieved_cr;
  uni.cr_tolerance = 0.02;
  EncodeResult enc_uni = encode(v, uni);
  CHECK(std::abs(enc_uni.achieved_cr - enc_nlm.achieved_cr) / enc_nlm.achieved_cr <= 0.02);

  double mse_nlm = compute_metrics(v, decode(enc_nlm.stream)).mse;
  double mse_uni = compute_metrics(v, decode(enc_uni.stream)).mse;
  CHECK(mse_nlm <= mse_uni);
}

TEST_CASE("non-finite voxels surface as a data error during encode") {
  Volume v = testutil::random_volume({8, 8, 8}, Dtype::f32, 93);
  std::get<std::vector<float>>(v.data)[100] = std::nanf("");
  EncodeOptions opt;
  opt.levels = 1;
  try {
    encode(v, opt);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find("subband") != std::string::npos);
  }
}

TEST_CASE("NLM plan with fractional steps works on the integer pipeline") {
  Volume v = synth_phantom(PhantomKind::blobs_plus_noise, {24, 24, 24}, 94);
  EncodeOptions opt;
  opt.wavelet = WaveletKind::legall_5_3;
  opt.levels = 2;
  EncodeResult enc = encode(v, opt);
  bool fractional = false;
  for (double qs : enc.plan.steps)
    if (qs != std::floor(qs)) fractional = true;
  CHECK(fractional);
  Metrics m = compute_metrics(v, decode(enc.stream));
  CHECK(m.psnr_db > 25.0);
}

TEST_CASE("rate search lands within 5% of CR 30 on a smooth blobs phantom") {
  Volume v = synth_phantom(PhantomKind::gaussian_blobs, {64, 64, 64}, 95);
  EncodeOptions opt;
  opt.levels = 3;
  opt.target_cr = 30.0;
  EncodeResult enc = encode(v, opt);
  CHECK(enc.achieved_cr >= 28.5);
  CHECK(enc.achieved_cr <= 31.5);
}

TEST_CASE("lossy 5/3 still decodes to the declared dtype with saturation") {
  Volume v = testutil::random_i16_volume({16, 16, 16}, 91);
  EncodeOptions opt;
  opt.wavelet = WaveletKind::legall_5_3;
  opt.levels = 2;
  opt.uniform_qs = 8.0;
  EncodeResult enc = encode(v, opt);
  Volume back = decode(enc.stream);
  CHECK(back.dtype == Dtype::i16);
  CHECK(back.dims == v.dims);
  Metrics m = compute_metrics(v, back);
  CHECK(m.mse > 0.0);
  CHECK(m.psnr_db > 20.0);
}

TEST_CASE("float volumes survive the 9/7 path end to end") {
  Volume v = testutil::random_volume({16, 16, 16}, Dtype::f32, 92);
  EncodeOptions opt;
  opt.levels = 1;
  opt.uniform_qs = 1.0;
  EncodeResult enc = encode(v, opt);
  Volume back = decode(enc.stream);
  CHECK(back.dtype == Dtype::f32);
  Metrics m = compute_metrics(v, back);
  CHECK(m.psnr_db > 60.0);
}

}  // TEST_SUITE
