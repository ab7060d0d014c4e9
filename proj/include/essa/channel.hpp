#pragma once
// Gaussian multiple-access channel: the frame is the superposition of all
// Ka packets plus white noise of variance sigma^2 per chip.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "essa/phy.hpp"
#include "essa/rng.hpp"

namespace essa {

// Noise variance for a target per-bit SNR. Each packet spends L0 + L units
// of energy on K message bits over a real channel, so
//   Eb/N0 = (L0 + L) / (2 K sigma^2).
// ebn0_db == +infinity selects the strictly noiseless channel (sigma^2 = 0).
inline double sigma2_from_ebn0(double ebn0_db, int k, long preamble_len,
                               long payload_len) {
  if (k < 1 || preamble_len < 0 || payload_len < 1) {
    throw std::invalid_argument("sigma2_from_ebn0: bad dimensions");
  }
  if (std::isnan(ebn0_db)) {
    throw std::invalid_argument("sigma2_from_ebn0: Eb/N0 is NaN");
  }
  if (std::isinf(ebn0_db)) {
    if (ebn0_db > 0) return 0.0;
    throw std::invalid_argument("sigma2_from_ebn0: Eb/N0 is -inf");
  }
  const double ebn0 = std::pow(10.0, ebn0_db / 10.0);
  return static_cast<double>(preamble_len + payload_len) / (2.0 * k * ebn0);
}

// Superimposes all packets on a zero frame and adds N(0, sigma2) noise.
// Noise is drawn sample-by-sample in frame order from the supplied source;
// when sigma2 == 0 the noise pass is skipped entirely (zero draws), which
// keeps the consumption pattern of the stream documented and reproducible.
inline FrameSignal transmit(const std::vector<Packet>& packets, int n,
                            double sigma2, GaussianSource& noise) {
  FrameSignal y(static_cast<std::size_t>(n), 0.0);
  for (const Packet& pkt : packets) place_in_frame(y, pkt);
  if (sigma2 > 0.0) {
    const double sigma = std::sqrt(sigma2);
    for (auto& sample : y) sample += sigma * noise.next();
  }
  return y;
}

}  // namespace essa
