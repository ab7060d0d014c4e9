#pragma once
// CRC-aided polar codec.
//
// Encoding chain for an (N, K) code with a crc_len-bit CRC:
//   message u (K bits) -> crc_append -> v' (Kp = K + crc_len bits)
//   -> scatter onto the info set of a length-Np polar code (Np = smallest
//      power of two >= N), frozen positions 0
//   -> c = v * F^{(x)m} with F = [[1,0],[1,1]], natural bit order
//   -> rate matching: puncture the first U = Np - N coded positions.
//
// Decoding is adaptive successive-cancellation list: run SCL with list size
// 1, 2, 4, ... up to list_max, stopping at the first pass in which some
// path satisfies the CRC. Punctured positions enter the decoder as zero
// LLRs, and the corresponding input indices are frozen so they carry no
// information.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace essa {

using Bits = std::vector<std::uint8_t>;
using LlrVec = std::vector<double>;

// ---------------------------------------------------------------------------
// Reliability order
// ---------------------------------------------------------------------------

// Polarization-weight reliability of input index i: sum over the set bits j
// of i of 2^(j/4). The weight is a strict total order over indices (the
// exponents 2^(j/4) are linearly independent over the rationals within each
// residue class of j mod 4, and the per-class integer parts are binary
// expansions), and restricting the order of a larger block to the indices of
// a smaller one reproduces the smaller block's order, so one rule serves
// every code length.
inline double polarization_weight(std::uint32_t index) {
  double w = 0.0;
  for (int j = 0; index != 0; ++j, index >>= 1) {
    if (index & 1u) w += std::pow(2.0, 0.25 * j);
  }
  return w;
}

// Indices 0..np-1 sorted by ascending reliability (least reliable first).
inline std::vector<int> reliability_order(int np) {
  std::vector<double> weight(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) {
    weight[static_cast<std::size_t>(i)] =
        polarization_weight(static_cast<std::uint32_t>(i));
  }
  std::vector<int> order(static_cast<std::size_t>(np));
  for (int i = 0; i < np; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double wa = weight[static_cast<std::size_t>(a)];
    const double wb = weight[static_cast<std::size_t>(b)];
    if (wa != wb) return wa < wb;
    return a < b;
  });
  return order;
}

// ---------------------------------------------------------------------------
// Code specification
// ---------------------------------------------------------------------------

// 5G-style sub-block interleaver: Np is split into 32 equal sub-blocks which
// are permuted by a fixed pattern before rate matching. Off by default; with
// U < 32 punctured positions both settings puncture the same prefix.
inline constexpr int kSubBlockPattern[32] = {
    0,  1,  2,  4,  3,  5,  6,  7,  8,  16, 9,  17, 10, 18, 11, 19,
    12, 20, 13, 21, 14, 22, 15, 23, 24, 25, 26, 28, 27, 29, 30, 31};

struct CodeSpec {
  int n = 0;         // transmitted code length N
  int k = 0;         // message length K
  int crc_len = 0;   // CRC degree
  int np = 0;        // mother code length, smallest power of two >= N
  int m = 0;         // log2(Np)
  int kp = 0;        // K + crc_len
  int punct = 0;     // U = Np - N punctured coded positions
  bool subblock_interleaved = false;
  std::uint32_t crc_poly = 0;       // coefficient mask including the degree bit
  std::vector<int> info_set;        // ascending input indices carrying v'
  std::vector<std::uint8_t> frozen; // size Np, 1 = frozen input
  std::vector<int> rate_perm;       // coded position order; transmitted
                                    // bits are rate_perm[punct..Np-1]
};

namespace detail {

inline std::uint32_t default_crc_poly(int crc_len) {
  // x^11 + x^10 + x^9 + x^5 + 1, the polynomial used throughout.
  if (crc_len == 11) return 0xE21u;
  return 0;  // caller must supply one
}

}  // namespace detail

inline CodeSpec build_code_spec(int n, int k, int crc_len,
                                bool subblock_interleave = false,
                                std::uint32_t crc_poly = 0) {
  if (n < 2 || n > (1 << 20)) {
    throw std::invalid_argument("build_code_spec: N out of range");
  }
  if (k < 1 || crc_len < 1) {
    throw std::invalid_argument("build_code_spec: need K >= 1 and crc_len >= 1");
  }
  if (k + crc_len > n) {
    throw std::invalid_argument("build_code_spec: K + crc_len exceeds N");
  }
  if (crc_poly == 0) crc_poly = detail::default_crc_poly(crc_len);
  if (crc_poly == 0) {
    throw std::invalid_argument("build_code_spec: no CRC polynomial for this length");
  }
  if ((crc_poly >> crc_len) != 1u) {
    throw std::invalid_argument("build_code_spec: polynomial degree != crc_len");
  }

  CodeSpec spec;
  spec.n = n;
  spec.k = k;
  spec.crc_len = crc_len;
  spec.kp = k + crc_len;
  spec.crc_poly = crc_poly;
  spec.np = 1;
  spec.m = 0;
  while (spec.np < n) {
    spec.np <<= 1;
    ++spec.m;
  }
  spec.punct = spec.np - n;
  spec.subblock_interleaved = subblock_interleave;

  // Coded-position order used by rate matching. Identity unless the
  // sub-block interleaver is enabled (requires Np divisible by 32).
  spec.rate_perm.resize(static_cast<std::size_t>(spec.np));
  if (subblock_interleave) {
    if (spec.np % 32 != 0) {
      throw std::invalid_argument(
          "build_code_spec: sub-block interleaver needs 32 | Np");
    }
    const int sb = spec.np / 32;
    for (int i = 0; i < spec.np; ++i) {
      spec.rate_perm[static_cast<std::size_t>(i)] =
          kSubBlockPattern[i / sb] * sb + (i % sb);
    }
  } else {
    for (int i = 0; i < spec.np; ++i) spec.rate_perm[static_cast<std::size_t>(i)] = i;
  }

  // Punctured coded positions never arrive at the receiver; the input
  // indices with the same numbers are incapacitated and must stay frozen.
  std::vector<std::uint8_t> blocked(static_cast<std::size_t>(spec.np), 0);
  for (int i = 0; i < spec.punct; ++i) {
    blocked[static_cast<std::size_t>(spec.rate_perm[static_cast<std::size_t>(i)])] = 1;
  }

  // Info set: the Kp most reliable non-blocked input indices.
  const std::vector<int> order = reliability_order(spec.np);
  spec.info_set.reserve(static_cast<std::size_t>(spec.kp));
  for (auto it = order.rbegin(); it != order.rend() &&
       static_cast<int>(spec.info_set.size()) < spec.kp; ++it) {
    if (!blocked[static_cast<std::size_t>(*it)]) spec.info_set.push_back(*it);
  }
  if (static_cast<int>(spec.info_set.size()) < spec.kp) {
    throw std::invalid_argument("build_code_spec: not enough usable indices");
  }
  std::sort(spec.info_set.begin(), spec.info_set.end());

  spec.frozen.assign(static_cast<std::size_t>(spec.np), 1);
  for (int idx : spec.info_set) spec.frozen[static_cast<std::size_t>(idx)] = 0;
  return spec;
}

// Human-readable dump used by golden-file regression tests and --trace
// debugging: one line per field, info set in ascending order.
inline std::string code_spec_to_text(const CodeSpec& spec) {
  std::ostringstream os;
  os << "N " << spec.n << "\n"
     << "K " << spec.k << "\n"
     << "crc_len " << spec.crc_len << "\n"
     << "crc_poly 0x" << std::hex << spec.crc_poly << std::dec << "\n"
     << "Np " << spec.np << "\n"
     << "Kp " << spec.kp << "\n"
     << "punct " << spec.punct << "\n"
     << "subblock_interleaved " << (spec.subblock_interleaved ? 1 : 0) << "\n";
  os << "info_set";
  for (int idx : spec.info_set) os << ' ' << idx;
  os << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// CRC
// ---------------------------------------------------------------------------

// Appends the crc_len parity bits of u (zero-initialised LFSR, no final
// XOR). Equivalent to the remainder of u(x) * x^crc_len mod g(x), MSB-first.
inline Bits crc_append(const Bits& u, const CodeSpec& spec) {
  if (static_cast<int>(u.size()) != spec.k) {
    throw std::invalid_argument("crc_append: message length != K");
  }
  std::uint32_t reg = 0;
  const std::uint32_t top = 1u << (spec.crc_len - 1);
  const std::uint32_t mask = (spec.crc_len == 32)
                                 ? 0xFFFFFFFFu
                                 : ((1u << spec.crc_len) - 1);
  for (std::uint8_t bit : u) {
    const std::uint32_t fb = ((reg & top) ? 1u : 0u) ^ bit;
    reg = (reg << 1) & mask;
    if (fb) reg ^= spec.crc_poly & mask;
  }
  Bits out = u;
  out.resize(u.size() + static_cast<std::size_t>(spec.crc_len));
  for (int i = 0; i < spec.crc_len; ++i) {
    out[u.size() + static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>((reg >> (spec.crc_len - 1 - i)) & 1u);
  }
  return out;
}

// Checks a Kp-bit block (message followed by parity).
inline bool crc_check(const Bits& v, const CodeSpec& spec) {
  if (static_cast<int>(v.size()) != spec.kp) {
    throw std::invalid_argument("crc_check: block length != Kp");
  }
  const Bits msg(v.begin(), v.begin() + spec.k);
  const Bits expected = crc_append(msg, spec);
  return std::equal(expected.begin() + spec.k, expected.end(), v.begin() + spec.k);
}

// ---------------------------------------------------------------------------
// Polar transform and encoder
// ---------------------------------------------------------------------------

// In-place c = v * F^{(x)m} in natural bit order (no bit-reversal): at each
// recursion level the first half absorbs the XOR of the two halves.
inline void polar_transform_inplace(Bits& v) {
  const std::size_t np = v.size();
  assert(np != 0 && (np & (np - 1)) == 0);
  for (std::size_t half = np >> 1; half >= 1; half >>= 1) {
    for (std::size_t base = 0; base < np; base += 2 * half) {
      for (std::size_t i = base; i < base + half; ++i) {
        v[i] = static_cast<std::uint8_t>(v[i] ^ v[i + half]);
      }
    }
  }
}

// Full codeword of length Np (before rate matching) for a Kp-bit block.
inline Bits polar_mother_codeword(const Bits& block, const CodeSpec& spec) {
  assert(static_cast<int>(block.size()) == spec.kp);
  Bits v(static_cast<std::size_t>(spec.np), 0);
  for (std::size_t i = 0; i < block.size(); ++i) {
    v[static_cast<std::size_t>(spec.info_set[i])] = block[i];
  }
  polar_transform_inplace(v);
  return v;
}

// Message in, N transmitted bits out.
inline Bits polar_encode(const Bits& u, const CodeSpec& spec) {
  const Bits block = crc_append(u, spec);
  const Bits c = polar_mother_codeword(block, spec);
  Bits out(static_cast<std::size_t>(spec.n));
  for (int i = 0; i < spec.n; ++i) {
    out[static_cast<std::size_t>(i)] =
        c[static_cast<std::size_t>(spec.rate_perm[static_cast<std::size_t>(spec.punct + i)])];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Adaptive SCL decoder
// ---------------------------------------------------------------------------

// List decoder over the binary tree of the polar transform, LLR domain with
// the min-sum check update and the hardware-friendly path metric
// (PM += |LLR| whenever a decision contradicts the LLR sign, frozen bits
// included). Memory is organised per path as one packed LLR array per tree
// level plus one packed left-child partial-sum array per level, so cloning
// a path on a fork copies only the levels that are still live for the
// current leaf index.
class SclDecoder {
 public:
  explicit SclDecoder(const CodeSpec& spec) : spec_(spec) {
    m_ = spec_.m;
    np_ = spec_.np;
    // Packed per-level offsets. LLR level d (1..m) holds 2^(m-d) entries:
    // the input of the current node at depth d. Partial-sum level d
    // (0..m-1) holds the encoded output of that node's finished left child.
    llr_off_.assign(static_cast<std::size_t>(m_) + 1, 0);
    ps_off_.assign(static_cast<std::size_t>(m_), 0);
    std::size_t acc = 0;
    for (int d = 1; d <= m_; ++d) {
      llr_off_[static_cast<std::size_t>(d)] = acc;
      acc += static_cast<std::size_t>(np_) >> d;
    }
    llr_len_ = acc;
    acc = 0;
    for (int d = 0; d < m_; ++d) {
      ps_off_[static_cast<std::size_t>(d)] = acc;
      acc += static_cast<std::size_t>(np_) >> (d + 1);
    }
    ps_len_ = acc;
    chan_.resize(static_cast<std::size_t>(np_));
    // Leaf index -> position within the info block, or -1 if frozen.
    info_pos_.assign(static_cast<std::size_t>(np_), -1);
    for (std::size_t i = 0; i < spec_.info_set.size(); ++i) {
      info_pos_[static_cast<std::size_t>(spec_.info_set[i])] = static_cast<int>(i);
    }
  }

  // Rate-matched LLRs in, decoded message out (without CRC bits), or
  // nullopt if no list size up to list_max produced a CRC-passing path.
  std::optional<Bits> decode(const LlrVec& llr, int list_max) {
    if (static_cast<int>(llr.size()) != spec_.n) {
      throw std::invalid_argument("SclDecoder: LLR length != N");
    }
    if (list_max < 1 || (list_max & (list_max - 1)) != 0) {
      throw std::invalid_argument("SclDecoder: list_max must be a power of two");
    }
    // Punctured coded positions carry no observation: LLR 0.
    std::fill(chan_.begin(), chan_.end(), 0.0f);
    for (int i = 0; i < spec_.n; ++i) {
      chan_[static_cast<std::size_t>(
          spec_.rate_perm[static_cast<std::size_t>(spec_.punct + i)])] =
          static_cast<float>(llr[static_cast<std::size_t>(i)]);
    }
    for (int list = 1; list <= list_max; list <<= 1) {
      if (auto hit = run_pass(list)) return hit;
    }
    return std::nullopt;
  }

 private:
  struct Candidate {
    double pm;
    int path;     // index into active_
    std::uint8_t bit;
  };

  float* path_llr(int slot, int level) {
    return llr_store_.data() + static_cast<std::size_t>(slot) * llr_len_ +
           llr_off_[static_cast<std::size_t>(level)];
  }
  std::uint8_t* path_ps(int slot, int level) {
    return ps_store_.data() + static_cast<std::size_t>(slot) * ps_len_ +
           ps_off_[static_cast<std::size_t>(level)];
  }
  std::uint8_t* path_hist(int slot) {
    return hist_store_.data() + static_cast<std::size_t>(slot) * static_cast<std::size_t>(spec_.kp);
  }

  static float minsum(float a, float b) {
    const float mag = std::min(std::fabs(a), std::fabs(b));
    return ((a < 0.0f) != (b < 0.0f)) ? -mag : mag;
  }

  // Recompute the LLR arrays of `slot` for leaf `phi`. Only levels
  // start..m change: the level that is entered by a g step (its left
  // sibling just finished) and everything below it by f steps.
  void descend(int slot, int phi) {
    int start = 1;
    if (phi != 0) {
      int tz = 0;
      while (((phi >> tz) & 1) == 0) ++tz;
      start = m_ - tz;
    }
    for (int d = start; d <= m_; ++d) {
      const int half = np_ >> d;
      const float* parent = (d == 1) ? chan_.data() : path_llr(slot, d - 1);
      float* cur = path_llr(slot, d);
      if (((phi >> (m_ - d)) & 1) == 0) {
        for (int i = 0; i < half; ++i) {
          cur[i] = minsum(parent[i], parent[i + half]);
        }
      } else {
        const std::uint8_t* left = path_ps(slot, d - 1);
        for (int i = 0; i < half; ++i) {
          cur[i] = left[i] ? parent[i + half] - parent[i]
                           : parent[i + half] + parent[i];
        }
      }
    }
  }

  // Fold the decided leaf bit back up: while the finished node is a right
  // child, combine it with the stored left output; store the result as the
  // left output one level up if that node is a left child.
  void unwind(int slot, int phi, std::uint8_t bit) {
    scratch_a_[0] = bit;
    int size = 1;
    int d = m_;
    std::uint8_t* cur = scratch_a_.data();
    std::uint8_t* nxt = scratch_b_.data();
    while (d >= 1 && ((phi >> (m_ - d)) & 1) == 1) {
      const std::uint8_t* left = path_ps(slot, d - 1);
      for (int i = 0; i < size; ++i) {
        nxt[i] = static_cast<std::uint8_t>(left[i] ^ cur[i]);
        nxt[i + size] = cur[i];
      }
      std::swap(cur, nxt);
      size <<= 1;
      --d;
    }
    if (d >= 1) {
      std::copy(cur, cur + size, path_ps(slot, d - 1));
    }
  }

  // Copy the parent's live state into a fresh slot. At leaf phi, LLR level
  // d is still needed iff the leaf lies in the left subtree of the current
  // depth-d node (bit m-d-1 of phi clear); the partial-sum level d iff it
  // lies in the right subtree (bit set).
  int clone(int parent_slot, int phi) {
    const int slot = free_slots_.back();
    free_slots_.pop_back();
    for (int d = 1; d < m_; ++d) {
      if (((phi >> (m_ - d - 1)) & 1) == 0) {
        std::copy(path_llr(parent_slot, d), path_llr(parent_slot, d) + (np_ >> d),
                  path_llr(slot, d));
      } else {
        std::copy(path_ps(parent_slot, d), path_ps(parent_slot, d) + (np_ >> (d + 1)),
                  path_ps(slot, d));
      }
    }
    // The leaf-level LLR is consumed before any fork, so it is never
    // copied; level-0 partial sums follow the same liveness rule as above.
    if (((phi >> (m_ - 1)) & 1) == 1) {
      std::copy(path_ps(parent_slot, 0), path_ps(parent_slot, 0) + (np_ >> 1),
                path_ps(slot, 0));
    }
    std::copy(path_hist(parent_slot), path_hist(parent_slot) + spec_.kp,
              path_hist(slot));
    return slot;
  }

  // One full SCL pass with a fixed list size. Returns the message of the
  // best CRC-passing path, if any.
  std::optional<Bits> run_pass(int list) {
    const std::size_t slots = 2 * static_cast<std::size_t>(list);
    // Stale contents are never read: descend() rewrites every LLR level it
    // uses, partial sums are written before the level is consumed, and the
    // decision history covers all Kp info positions by the final leaf.
    llr_store_.resize(slots * llr_len_);
    ps_store_.resize(slots * ps_len_);
    hist_store_.resize(slots * static_cast<std::size_t>(spec_.kp));
    pm_.resize(slots);
    scratch_a_.resize(static_cast<std::size_t>(np_));
    scratch_b_.resize(static_cast<std::size_t>(np_));
    free_slots_.clear();
    for (int s = static_cast<int>(slots) - 1; s >= 0; --s) free_slots_.push_back(s);
    active_.clear();
    active_.push_back(free_slots_.back());
    free_slots_.pop_back();
    pm_[static_cast<std::size_t>(active_[0])] = 0.0;

    std::vector<Candidate> cands;
    std::vector<int> next_active;
    for (int phi = 0; phi < np_; ++phi) {
      for (int p : active_) descend(p, phi);
      const int ipos = info_pos_[static_cast<std::size_t>(phi)];
      if (ipos < 0) {
        // Frozen: decision is 0; a negative LLR argues for 1 and costs |L|.
        for (int p : active_) {
          const float l = path_llr(p, m_)[0];
          if (l < 0.0f) pm_[static_cast<std::size_t>(p)] += -static_cast<double>(l);
          unwind(p, phi, 0);
        }
        continue;
      }
      // Information leaf: fork every path.
      cands.clear();
      cands.reserve(2 * active_.size());
      for (std::size_t ai = 0; ai < active_.size(); ++ai) {
        const int p = active_[ai];
        const float l = path_llr(p, m_)[0];
        const double base = pm_[static_cast<std::size_t>(p)];
        const double pen = std::fabs(static_cast<double>(l));
        const double pm0 = base + (l < 0.0f ? pen : 0.0);
        const double pm1 = base + (l < 0.0f ? 0.0 : pen);
        cands.push_back({pm0, static_cast<int>(ai), 0});
        cands.push_back({pm1, static_cast<int>(ai), 1});
      }
      std::size_t keep = cands.size();
      if (static_cast<int>(keep) > list) {
        keep = static_cast<std::size_t>(list);
        // Deterministic selection: metric, then path creation order, then
        // the 0-branch ahead of the 1-branch.
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
          if (a.pm != b.pm) return a.pm < b.pm;
          if (a.path != b.path) return a.path < b.path;
          return a.bit < b.bit;
        });
      }
      // Mark which children of which paths survive.
      std::vector<std::uint8_t> child_kept(2 * active_.size(), 0);
      for (std::size_t ci = 0; ci < keep; ++ci) {
        child_kept[static_cast<std::size_t>(cands[ci].path) * 2 + cands[ci].bit] = 1;
      }
      next_active.clear();
      std::vector<double> next_pm;
      for (std::size_t ai = 0; ai < active_.size(); ++ai) {
        const int p = active_[ai];
        const float l = path_llr(p, m_)[0];
        const double base = pm_[static_cast<std::size_t>(p)];
        const double pen = std::fabs(static_cast<double>(l));
        const bool keep0 = child_kept[ai * 2] != 0;
        const bool keep1 = child_kept[ai * 2 + 1] != 0;
        if (keep0 && keep1) {
          const int q = clone(p, phi);
          path_hist(p)[ipos] = 0;
          path_hist(q)[ipos] = 1;
          next_pm.push_back(base + (l < 0.0f ? pen : 0.0));
          next_active.push_back(p);
          next_pm.push_back(base + (l < 0.0f ? 0.0 : pen));
          next_active.push_back(q);
          unwind(p, phi, 0);
          unwind(q, phi, 1);
        } else if (keep0 || keep1) {
          const std::uint8_t bit = keep1 ? 1 : 0;
          path_hist(p)[ipos] = bit;
          const double flip_pen = (bit == 1) == (l < 0.0f) ? 0.0 : pen;
          next_pm.push_back(base + flip_pen);
          next_active.push_back(p);
          unwind(p, phi, bit);
        } else {
          free_slots_.push_back(p);
        }
      }
      active_ = next_active;
      for (std::size_t i = 0; i < active_.size(); ++i) {
        pm_[static_cast<std::size_t>(active_[i])] = next_pm[i];
      }
    }

    // Pick the CRC-passing survivor with the best metric; ties go to the
    // path created earliest.
    int best = -1;
    double best_pm = std::numeric_limits<double>::infinity();
    Bits block(static_cast<std::size_t>(spec_.kp));
    for (int p : active_) {
      const std::uint8_t* h = path_hist(p);
      std::copy(h, h + spec_.kp, block.begin());
      if (!crc_check(block, spec_)) continue;
      if (pm_[static_cast<std::size_t>(p)] < best_pm) {
        best_pm = pm_[static_cast<std::size_t>(p)];
        best = p;
      }
    }
    if (best < 0) return std::nullopt;
    const std::uint8_t* h = path_hist(best);
    return Bits(h, h + spec_.k);
  }

  CodeSpec spec_;
  int m_ = 0;
  int np_ = 0;
  std::size_t llr_len_ = 0, ps_len_ = 0;
  std::vector<std::size_t> llr_off_, ps_off_;
  std::vector<float> chan_;
  std::vector<int> info_pos_;
  std::vector<float> llr_store_;
  std::vector<std::uint8_t> ps_store_;
  std::vector<std::uint8_t> hist_store_;
  std::vector<double> pm_;
  std::vector<std::uint8_t> scratch_a_, scratch_b_;
  std::vector<int> active_, free_slots_;
};

// Convenience wrapper for one-off decodes.
inline std::optional<Bits> adaptive_scl_decode(const LlrVec& llr,
                                               const CodeSpec& spec,
                                               int list_max) {
  SclDecoder dec(spec);
  return dec.decode(llr, list_max);
}

}  // namespace essa
