#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "essa/fft.hpp"
#include "essa/rng.hpp"

using namespace essa;

namespace {

// O(n^2) reference DFT.
std::vector<std::complex<double>> dft_naive(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>(j * k) /
                         static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

std::vector<double> random_signal(std::uint64_t seed, std::size_t n) {
  SplitMix64 rng(seed);
  std::vector<double> y(n);
  for (auto& v : y) v = 2.0 * rng.uniform01() - 1.0;
  return y;
}

}  // namespace

TEST_CASE("pow2 fft matches the naive dft", "[fft]") {
  for (const std::size_t n : {std::size_t{2}, std::size_t{8}, std::size_t{64}}) {
    SplitMix64 rng(n);
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform01() - 0.5, rng.uniform01() - 0.5};
    auto ref = dft_naive(x);
    Pow2Fft fft(n);
    auto got = x;
    fft.forward(got);
    for (std::size_t k = 0; k < n; ++k) {
      REQUIRE(std::abs(got[k] - ref[k]) < 1e-9);
    }
    fft.inverse(got);
    for (std::size_t k = 0; k < n; ++k) {
      REQUIRE(std::abs(got[k] - x[k]) < 1e-12);
    }
  }
}

TEST_CASE("fft rejects non-power-of-two sizes", "[fft]") {
  REQUIRE_THROWS_AS(Pow2Fft(0), std::invalid_argument);
  REQUIRE_THROWS_AS(Pow2Fft(12), std::invalid_argument);
}

TEST_CASE("correlator equals the direct sum on odd sizes", "[fft]") {
  // Small enough that the correlator uses its direct path...
  {
    const auto y = random_signal(5, 301);
    const auto p = random_signal(6, 37);
    CircularCorrelator corr(p, y.size());
    CircularCorrelator::Scratch scratch;
    std::vector<double> fast;
    corr.correlate(y, fast, scratch);
    const auto slow = circular_correlate_direct(y, p);
    for (std::size_t t = 0; t < y.size(); ++t) {
      REQUIRE(fast[t] == slow[t]);
    }
  }
  // ...and large enough that it goes through the FFT.
  {
    const std::size_t n = 30000;
    const auto y = random_signal(7, n);
    const auto p = random_signal(8, 3050);
    CircularCorrelator corr(p, n);
    CircularCorrelator::Scratch scratch;
    std::vector<double> fast;
    corr.correlate(y, fast, scratch);
    const auto slow = circular_correlate_direct(y, p);
    double max_err = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      max_err = std::max(max_err, std::fabs(fast[t] - slow[t]));
    }
    REQUIRE(max_err < 1e-8);
  }
}

TEST_CASE("correlator wraps around the frame boundary", "[fft]") {
  const std::size_t n = 50000;  // FFT path
  const std::size_t l0 = 128;
  const auto p = random_signal(9, l0);
  std::vector<double> y(n, 0.0);
  const std::size_t t0 = n - 10;  // preamble straddles the wrap point
  for (std::size_t i = 0; i < l0; ++i) y[(t0 + i) % n] = p[i];
  CircularCorrelator corr(p, n);
  CircularCorrelator::Scratch scratch;
  std::vector<double> lambda;
  corr.correlate(y, lambda, scratch);
  double peak = 0.0;
  std::size_t arg = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (lambda[t] > peak) { peak = lambda[t]; arg = t; }
  }
  REQUIRE(arg == t0);
  double expected = 0.0;
  for (const double c : p) expected += c * c;
  REQUIRE(std::fabs(peak - expected) < 1e-8);
}

TEST_CASE("correlator validates dimensions", "[fft]") {
  REQUIRE_THROWS_AS(CircularCorrelator({}, 16), std::invalid_argument);
  REQUIRE_THROWS_AS(CircularCorrelator(std::vector<double>(32, 1.0), 16),
                    std::invalid_argument);
  CircularCorrelator corr(std::vector<double>(4, 1.0), 16);
  CircularCorrelator::Scratch scratch;
  std::vector<double> lambda;
  std::vector<double> wrong(15, 0.0);
  REQUIRE_THROWS_AS(corr.correlate(wrong, lambda, scratch), std::invalid_argument);
}
