#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "essa/channel.hpp"
#include "essa/codec.hpp"
#include "essa/phy.hpp"
#include "essa/rng.hpp"

using namespace essa;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("sigma2 at the reference operating points", "[channel]") {
  // Eb/N0 = (L0 + L) / (2 K sigma^2), so 0 dB with K = 100, L0 = 3050,
  // L = 25000 gives sigma^2 = 28050 / 200 exactly.
  REQUIRE(sigma2_from_ebn0(0.0, 100, 3050, 25000) == 140.25);
  // ~10 log10(2) dB halves it against the preamble-free point:
  // 25000 / (200 * 2) = 62.5.
  const double s2 = sigma2_from_ebn0(3.0103, 100, 0, 25000);
  REQUIRE(s2 == Catch::Approx(62.49999937599674).epsilon(1e-12));
  REQUIRE(std::abs(s2 - 62.5) < 1e-5);
}

TEST_CASE("sigma2 handles the infinite and invalid limits", "[channel]") {
  REQUIRE(sigma2_from_ebn0(kInf, 100, 3050, 25000) == 0.0);
  REQUIRE_THROWS_AS(sigma2_from_ebn0(-kInf, 100, 3050, 25000),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sigma2_from_ebn0(std::nan(""), 100, 3050, 25000),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sigma2_from_ebn0(0.0, 0, 3050, 25000), std::invalid_argument);
  REQUIRE_THROWS_AS(sigma2_from_ebn0(0.0, 100, -1, 25000), std::invalid_argument);
  REQUIRE_THROWS_AS(sigma2_from_ebn0(0.0, 100, 3050, 0), std::invalid_argument);
  // Monotone: more noise at lower Eb/N0.
  REQUIRE(sigma2_from_ebn0(-3.0, 100, 3050, 25000) >
          sigma2_from_ebn0(3.0, 100, 3050, 25000));
}

TEST_CASE("noise-only frame has the requested variance", "[channel]") {
  const int n = 30000;
  SplitMix64 rng(19);
  GaussianSource noise(rng);
  const double sigma2 = 140.25;
  const FrameSignal y = transmit({}, n, sigma2, noise);
  REQUIRE(static_cast<int>(y.size()) == n);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= n - 1;
  REQUIRE(std::abs(mean) < 4.0 * std::sqrt(sigma2 / n));
  REQUIRE(std::abs(var - sigma2) / sigma2 < 0.05);
}

TEST_CASE("transmit is linear: packets plus noise superpose", "[channel]") {
  const CodeSpec spec = build_code_spec(8, 2, 2, false, 0x7);
  const PhyParams phy = make_phy_params(64, 2, 8, 8, 1, 2, 3);
  const Sequences seqs = generate_sequences(phy);
  const Packet a = build_packet({0, 1}, spec, phy, seqs);
  const Packet b = build_packet({1, 1}, spec, phy, seqs);

  // Same noise stream for both transmissions.
  SplitMix64 r1(20), r2(20);
  GaussianSource n1(r1), n2(r2);
  const FrameSignal both = transmit({a, b}, 64, 2.0, n1);
  FrameSignal manual = transmit({}, 64, 2.0, n2);
  place_in_frame(manual, a);
  place_in_frame(manual, b);
  for (int i = 0; i < 64; ++i) {
    REQUIRE(both[static_cast<std::size_t>(i)] ==
            Catch::Approx(manual[static_cast<std::size_t>(i)]).margin(1e-12));
  }
}

TEST_CASE("noiseless transmit leaves the gaussian stream untouched", "[channel]") {
  const CodeSpec spec = build_code_spec(8, 2, 2, false, 0x7);
  const PhyParams phy = make_phy_params(64, 2, 8, 8, 1, 2, 3);
  const Sequences seqs = generate_sequences(phy);
  const Packet a = build_packet({1, 0}, spec, phy, seqs);

  SplitMix64 r1(21), r2(21);
  GaussianSource n1(r1), n2(r2);
  (void)transmit({a}, 64, 0.0, n1);
  // The two sources must still be synchronised: zero draws were made.
  for (int i = 0; i < 8; ++i) REQUIRE(n1.next() == n2.next());
}

TEST_CASE("noiseless single-user frame correlates to packet energy", "[channel]") {
  const CodeSpec spec = build_code_spec(128, 32, 11);
  const PhyParams phy = make_phy_params(4096, 8, 128, 256, 0xE55A0001ull,
                                        0xE55A0002ull, 0xE55A0003ull);
  const Sequences seqs = generate_sequences(phy);
  SplitMix64 rng(22);
  Bits u(32);
  for (auto& bit : u) bit = static_cast<std::uint8_t>(rng.next_bit());
  const Packet pkt = build_packet(u, spec, phy, seqs);
  GaussianSource noise(rng);
  const FrameSignal y = transmit({pkt}, 4096, 0.0, noise);
  // <y, x> at the true alignment equals ||x||^2 = L0 + L.
  double dot = 0.0;
  for (std::size_t i = 0; i < pkt.samples.size(); ++i) {
    dot += y[(static_cast<std::size_t>(pkt.start_time) + i) % 4096] *
           pkt.samples[i];
  }
  REQUIRE(dot == 256.0 + 1024.0);
}
