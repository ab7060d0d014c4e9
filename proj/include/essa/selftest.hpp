#pragma once
// Quick invariant checks runnable from the CLI (`essa_sim selftest`).
// These are smoke tests, not the full suite: each item takes well under a
// second and exercises one structural property end to end.

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "essa/channel.hpp"
#include "essa/codec.hpp"
#include "essa/fft.hpp"
#include "essa/montecarlo.hpp"
#include "essa/phy.hpp"
#include "essa/profiles.hpp"
#include "essa/receiver.hpp"

namespace essa {

using SelftestItem = std::pair<std::string, std::function<bool()>>;

inline std::vector<SelftestItem> selftest_items() {
  std::vector<SelftestItem> items;

  items.emplace_back("polar_transform_involution", [] {
    SplitMix64 rng(7);
    Bits v(256);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng.next_bit());
    Bits w = v;
    polar_transform_inplace(w);
    polar_transform_inplace(w);
    return w == v;
  });

  items.emplace_back("crc_detects_single_bit_errors", [] {
    const CodeSpec spec = build_code_spec(1000, 100, 11);
    SplitMix64 rng(9);
    Bits u(100);
    for (auto& b : u) b = static_cast<std::uint8_t>(rng.next_bit());
    Bits block = crc_append(u, spec);
    if (!crc_check(block, spec)) return false;
    for (std::size_t i = 0; i < block.size(); ++i) {
      block[i] ^= 1;
      if (crc_check(block, spec)) return false;
      block[i] ^= 1;
    }
    return true;
  });

  items.emplace_back("noiseless_roundtrip", [] {
    const CodeSpec spec = build_code_spec(1000, 100, 11);
    SclDecoder dec(spec);
    SplitMix64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
      Bits u(100);
      for (auto& b : u) b = static_cast<std::uint8_t>(rng.next_bit());
      const Bits c = polar_encode(u, spec);
      LlrVec llr(c.size());
      for (std::size_t i = 0; i < c.size(); ++i) llr[i] = c[i] ? -20.0 : 20.0;
      const auto got = dec.decode(llr, 8);
      if (!got || *got != u) return false;
    }
    return true;
  });

  items.emplace_back("packet_energy_exact", [] {
    const ScenarioConfig cfg = builtin_profile("ci");
    const SimContext ctx = make_context(cfg);
    SplitMix64 rng(13);
    const Bits u = draw_message(rng, cfg.code.k);
    const Packet pkt = build_packet(u, ctx.spec, cfg.phy, ctx.seqs);
    double e = 0.0;
    for (double c : pkt.samples) e += c * c;
    return e == static_cast<double>(cfg.phy.preamble_len + cfg.phy.payload_len);
  });

  items.emplace_back("correlator_matches_direct", [] {
    SplitMix64 rng(15);
    const int n = 600;
    std::vector<double> y(n);
    for (auto& s : y) s = rng.uniform01() - 0.5;
    const std::vector<double> p = generate_pm1(21, 48);
    CircularCorrelator corr(p, static_cast<std::size_t>(n));
    CircularCorrelator::Scratch scratch;
    std::vector<double> fast;
    corr.correlate(y, fast, scratch);
    const std::vector<double> slow = circular_correlate_direct(y, p);
    for (int t = 0; t < n; ++t) {
      if (std::fabs(fast[static_cast<std::size_t>(t)] - slow[static_cast<std::size_t>(t)]) > 1e-9) {
        return false;
      }
    }
    return true;
  });

  items.emplace_back("single_user_frame_recovers", [] {
    ScenarioConfig cfg = builtin_profile("ci");
    cfg.ka = 1;
    cfg.ebn0_db = 25.0;
    const SimContext ctx = make_context(cfg);
    const FrameResult res = run_frame(cfg, ctx, 0);
    return res.misses == 0 && res.false_alarms == 0;
  });

  items.emplace_back("sigma2_matches_definition", [] {
    const double s2 = sigma2_from_ebn0(0.0, 100, 3050, 25000);
    return std::fabs(s2 - 140.25) < 1e-12;
  });

  return items;
}

}  // namespace essa
