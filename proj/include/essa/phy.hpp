#pragma once
// Physical layer: binary spreading, preamble, message-keyed start times and
// packet assembly on the circular frame.
//
// Every user shares one codebook: the same length-L0 preamble p and the
// same spreading sequence b. A message u determines its packet entirely --
// chips x(u) = (p, sigma(c; b)) with c the codeword, and a start time
// t = hash(u) mod n -- so the receiver can rebuild and subtract exactly
// what the transmitter emitted once it knows u.

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "essa/codec.hpp"
#include "essa/rng.hpp"

namespace essa {

using FrameSignal = std::vector<double>;

struct PhyParams {
  int n = 0;           // frame length in chips
  int s = 0;           // spreading factor, chips per coded bit
  int code_n = 0;      // coded bits per packet (N)
  long payload_len = 0;   // L = s * N
  long preamble_len = 0;  // L0, may be 0 (genie runs)
  std::uint64_t spreading_seed = 0;
  std::uint64_t preamble_seed = 0;
  std::uint64_t hash_seed = 0;
};

inline PhyParams make_phy_params(int n, int s, int code_n, long preamble_len,
                                 std::uint64_t spreading_seed,
                                 std::uint64_t preamble_seed,
                                 std::uint64_t hash_seed) {
  if (n < 1 || s < 1 || code_n < 1 || preamble_len < 0) {
    throw std::invalid_argument("make_phy_params: bad dimensions");
  }
  PhyParams p;
  p.n = n;
  p.s = s;
  p.code_n = code_n;
  p.payload_len = static_cast<long>(s) * code_n;
  p.preamble_len = preamble_len;
  if (p.preamble_len + p.payload_len > n) {
    throw std::invalid_argument("make_phy_params: packet longer than frame");
  }
  p.spreading_seed = spreading_seed;
  p.preamble_seed = preamble_seed;
  p.hash_seed = hash_seed;
  return p;
}

// len chips in {-1, +1}, one SplitMix64 word per chip (top bit).
inline std::vector<double> generate_pm1(std::uint64_t seed, long len) {
  std::vector<double> out(static_cast<std::size_t>(len));
  SplitMix64 rng(seed);
  for (auto& c : out) c = rng.next_bit() ? -1.0 : 1.0;
  return out;
}

struct Sequences {
  std::vector<double> preamble;   // length L0
  std::vector<double> spreading;  // length L
};

inline Sequences generate_sequences(const PhyParams& phy) {
  Sequences s;
  s.preamble = generate_pm1(phy.preamble_seed, phy.preamble_len);
  s.spreading = generate_pm1(phy.spreading_seed, phy.payload_len);
  return s;
}

// sigma(c; b): coded bit c_j flips the j-th block of s chips of b.
inline std::vector<double> spread(const Bits& c, const std::vector<double>& b,
                                  int s) {
  if (c.size() * static_cast<std::size_t>(s) != b.size()) {
    throw std::invalid_argument("spread: sequence length != s * N");
  }
  std::vector<double> out(b.size());
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double sign = c[j] ? -1.0 : 1.0;
    for (int i = 0; i < s; ++i) {
      const std::size_t idx = j * static_cast<std::size_t>(s) + static_cast<std::size_t>(i);
      out[idx] = sign * b[idx];
    }
  }
  return out;
}

// Message-keyed start time: FNV-1a over the hash seed (little-endian bytes)
// followed by the message packed MSB-first into bytes, reduced mod n.
inline int hash_time(const Bits& u, const PhyParams& phy) {
  unsigned char seed_bytes[8];
  for (int i = 0; i < 8; ++i) {
    seed_bytes[i] = static_cast<unsigned char>(phy.hash_seed >> (8 * i));
  }
  std::uint64_t h = fnv1a64(seed_bytes, sizeof seed_bytes);
  const std::size_t nbytes = (u.size() + 7) / 8;
  for (std::size_t b = 0; b < nbytes; ++b) {
    unsigned char byte = 0;
    for (std::size_t j = 0; j < 8; ++j) {
      const std::size_t pos = 8 * b + j;
      if (pos < u.size() && u[pos]) byte |= static_cast<unsigned char>(1u << (7 - j));
    }
    h = fnv1a64(&byte, 1, h);
  }
  return static_cast<int>(h % static_cast<std::uint64_t>(phy.n));
}

struct Packet {
  std::vector<double> samples;  // L0 + L chips, each +/-1
  int start_time = 0;           // position of samples[0] in the frame
};

// Full unit-power packet for message u: preamble then spread codeword,
// placed at the message's hashed start time. ||samples||^2 == L0 + L.
inline Packet build_packet(const Bits& u, const CodeSpec& spec,
                           const PhyParams& phy, const Sequences& seqs) {
  const Bits c = polar_encode(u, spec);
  const std::vector<double> payload = spread(c, seqs.spreading, phy.s);
  Packet pkt;
  pkt.samples.reserve(seqs.preamble.size() + payload.size());
  pkt.samples.insert(pkt.samples.end(), seqs.preamble.begin(), seqs.preamble.end());
  pkt.samples.insert(pkt.samples.end(), payload.begin(), payload.end());
  pkt.start_time = hash_time(u, phy);
  return pkt;
}

// frame[(start + i) mod n] += scale * samples[i], split into the at most
// two contiguous runs so the hot loops stay modulo-free.
inline void add_circular(FrameSignal& frame, const std::vector<double>& samples,
                         int start, double scale) {
  const std::size_t n = frame.size();
  const std::size_t len = samples.size();
  if (len > n) throw std::invalid_argument("add_circular: packet longer than frame");
  const std::size_t first = std::min(len, n - static_cast<std::size_t>(start));
  for (std::size_t i = 0; i < first; ++i) {
    frame[static_cast<std::size_t>(start) + i] += scale * samples[i];
  }
  for (std::size_t i = first; i < len; ++i) {
    frame[i - first] += scale * samples[i];
  }
}

inline void place_in_frame(FrameSignal& frame, const Packet& pkt) {
  add_circular(frame, pkt.samples, pkt.start_time, 1.0);
}

inline void subtract_from_frame(FrameSignal& frame, const Packet& pkt,
                                double amplitude) {
  add_circular(frame, pkt.samples, pkt.start_time, -amplitude);
}

}  // namespace essa
