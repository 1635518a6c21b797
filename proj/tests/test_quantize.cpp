#include <cmath>

#include "doctest.h"
#include "mv3c/quantize.hpp"
#include "test_util.hpp"

using namespace mv3c;

TEST_SUITE("quantize") {

TEST_CASE("deadzone rounding toward zero on both signs") {
  std::vector<float> xs{7.9f, -7.9f, 0.0f, 1.999f, -1.999f, 2.0f};
  auto q = quantize_values<float>(xs, 2.0, 0);
  CHECK(q == std::vector<std::int32_t>{3, -3, 0, 0, 0, 1});
}

TEST_CASE("qs = 1 on integer coefficients is the identity") {
  std::vector<std::int32_t> xs{5, -7, 0, 32000, -32000};
  auto q = quantize_values<std::int32_t>(xs, 1.0, 0);
  CHECK(q == xs);
}

TEST_CASE("midpoint reconstruction") {
  std::vector<std::int32_t> q{3, 0, -2};
  auto x = dequantize_values(q, 2.0, WaveletKind::cdf_9_7);
  CHECK(x[0] == doctest::Approx(7.0));
  CHECK(x[1] == 0.0);
  CHECK(x[2] == doctest::Approx(-5.0));
}

TEST_CASE("integer pipeline with qs = 1 reconstructs the identity") {
  std::vector<std::int32_t> q{-5, 0, 5, 12345};
  auto x = dequantize_values(q, 1.0, WaveletKind::legall_5_3);
  for (std::size_t i = 0; i < q.size(); ++i) CHECK(x[i] == double(q[i]));
  // The float pipeline keeps the midpoint rule even at qs = 1.
  auto y = dequantize_values(q, 1.0, WaveletKind::cdf_9_7);
  CHECK(y[0] == doctest::Approx(-5.5));
}

TEST_CASE("non-finite coefficients raise a data error naming the subband") {
  std::vector<float> xs{1.0f, std::nanf(""), 2.0f};
  try {
    quantize_values<float>(xs, 2.0, 17);
    FAIL("expected a data error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find("17") != std::string::npos);
  }
}

TEST_CASE("bounded reconstruction error, monotonicity, symmetry") {
  std::mt19937_64 rng(61);
  for (double qs : {1.0, 1.5, 2.0, 7.25, 100.0}) {
    double prev_x = -1e9;
    std::int32_t prev_q = INT32_MIN;
    for (int rep = 0; rep < 500; ++rep) {
      double x = testutil::uniform(rng, -5000.0, 5000.0);
      std::vector<double> in{x, -x};
      auto q = quantize_values<double>(in, qs, 0);
      CHECK(q[1] == -q[0]);  // symmetry
      auto back = dequantize_values(q, qs, WaveletKind::cdf_9_7);
      CHECK(std::abs(x - back[0]) < qs);  // strict midpoint bound
    }
    // monotone over a sorted sweep
    for (double x = -50.0; x <= 50.0; x += 0.37) {
      std::vector<double> in{x};
      auto q = quantize_values<double>(in, qs, 0);
      CHECK(x >= prev_x);
      CHECK(q[0] >= prev_q);
      prev_x = x;
      prev_q = q[0];
    }
  }
}

TEST_CASE("lattice idempotence: quantize(dequantize(q)) == q") {
  std::mt19937_64 rng(62);
  for (double qs : {1.0, 2.0, 3.5, 10.0}) {
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<std::int32_t> q{std::int32_t(rng() % 20001) - 10000};
      auto x = dequantize_values(q, qs, WaveletKind::cdf_9_7);
      auto q2 = quantize_values<double>(x, qs, 0);
      CHECK(q2 == q);
    }
  }
}

TEST_CASE("coefficient magnitude overflow is a data error") {
  std::vector<double> xs{3e9};
  CHECK_THROWS_AS(quantize_values<double>(xs, 1.0, 0), Error);
}

}  // TEST_SUITE
