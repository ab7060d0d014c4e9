#pragma once
// Iterative successive interference cancellation receiver.
//
// Each iteration: correlate the residual frame against the preamble, take
// the W strongest start-time candidates that have not produced a recovery
// yet, and for each one despread, decode, and verify that the decoded
// message hashes (within a tolerance of delta chips) back to the candidate
// time. Verified packets are rebuilt, scaled by their estimated amplitude
// and subtracted; the loop stops after Imax iterations or after the first
// iteration that recovers nothing new.
//
// Genie-aided mode replaces detection with the true start times of the
// not-yet-recovered users (capped at W per iteration); no preamble is
// transmitted in that mode.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "essa/channel.hpp"
#include "essa/codec.hpp"
#include "essa/fft.hpp"
#include "essa/phy.hpp"

namespace essa {

struct ReceiverParams {
  int w = 100;        // candidate times per iteration
  int imax = 50;      // SIC iterations
  int delta = 0;      // tolerated circular distance between t and hash(u)
  int list_max = 256; // adaptive SCL budget
  bool genie = false; // use true start times instead of preamble detection
};

inline void validate_receiver_params(const ReceiverParams& rx, const PhyParams& phy) {
  if (rx.w < 1 || rx.imax < 1) {
    throw std::invalid_argument("receiver: need W >= 1 and Imax >= 1");
  }
  if (rx.delta < 0 || 2 * rx.delta >= phy.n) {
    throw std::invalid_argument("receiver: delta out of range");
  }
  if (rx.list_max < 1 || (rx.list_max & (rx.list_max - 1)) != 0) {
    throw std::invalid_argument("receiver: list_max must be a power of two");
  }
  if (rx.genie && phy.preamble_len != 0) {
    throw std::invalid_argument("receiver: genie mode omits the preamble (L0 = 0)");
  }
  if (!rx.genie && phy.preamble_len < 1) {
    throw std::invalid_argument("receiver: preamble detection needs L0 >= 1");
  }
}

// Exact preamble correlation, mostly for tests and small runs; the SIC loop
// itself uses a shared CircularCorrelator.
inline std::vector<double> preamble_correlate(const FrameSignal& y,
                                              const std::vector<double>& preamble) {
  if (preamble.empty()) {
    throw std::invalid_argument("preamble_correlate: empty preamble");
  }
  return circular_correlate_direct(y, preamble);
}

// The w start times with the largest metric, excluding `exclude`, ordered
// by decreasing metric with ties broken towards the smaller time.
inline std::vector<int> top_w(const std::vector<double>& lambda, int w,
                              const std::unordered_set<int>& exclude) {
  std::vector<int> idx;
  idx.reserve(lambda.size());
  for (int t = 0; t < static_cast<int>(lambda.size()); ++t) {
    if (!exclude.contains(t)) idx.push_back(t);
  }
  const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(w), idx.size());
  const auto better = [&](int a, int b) {
    if (lambda[static_cast<std::size_t>(a)] != lambda[static_cast<std::size_t>(b)]) {
      return lambda[static_cast<std::size_t>(a)] > lambda[static_cast<std::size_t>(b)];
    }
    return a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep),
                    idx.end(), better);
  idx.resize(keep);
  return idx;
}

// Despread the payload window that starts at candidate time t and scale to
// LLRs. The bit estimates are r~_j = (1/s) sum of the j-th chip block of
// the residual times the spreading sequence; the per-bit noise variance is
// estimated from the spread of |r~| and floored to keep LLRs finite on a
// noiseless channel.
inline LlrVec despread(const FrameSignal& y, int t, const PhyParams& phy,
                       const std::vector<double>& spreading) {
  const std::size_t n = y.size();
  const int code_n = phy.code_n;
  LlrVec soft(static_cast<std::size_t>(code_n));
  std::size_t idx = (static_cast<std::size_t>(t) + static_cast<std::size_t>(phy.preamble_len)) % n;
  double sum_abs = 0.0, sum_sq = 0.0;
  for (int j = 0; j < code_n; ++j) {
    double acc = 0.0;
    for (int i = 0; i < phy.s; ++i) {
      acc += y[idx] * spreading[static_cast<std::size_t>(j) * phy.s + static_cast<std::size_t>(i)];
      if (++idx == n) idx = 0;
    }
    const double r = acc / phy.s;
    soft[static_cast<std::size_t>(j)] = r;
    sum_abs += std::fabs(r);
    sum_sq += r * r;
  }
  const double mean_abs = sum_abs / code_n;
  const double mean_sq = sum_sq / code_n;
  const double var = std::max(1e-6, phy.s * (mean_sq - mean_abs * mean_abs));
  for (auto& l : soft) l = 2.0 * phy.s * l / var;
  return soft;
}

enum class AttemptStatus { success, erasure, hash_mismatch };

inline const char* to_string(AttemptStatus s) {
  switch (s) {
    case AttemptStatus::success: return "success";
    case AttemptStatus::erasure: return "erasure";
    case AttemptStatus::hash_mismatch: return "hash_mismatch";
  }
  return "?";
}

struct DecodeOutcome {
  AttemptStatus status = AttemptStatus::erasure;
  int start_time = 0;
  double amplitude = 0.0;          // estimated on success, else 0
  std::optional<Bits> message;     // present iff status == success
};

struct AttemptRecord {
  long frame = 0;
  int iteration = 0;
  int start_time = 0;
  AttemptStatus status = AttemptStatus::erasure;
  double amplitude = 0.0;
};

inline int circular_distance(int a, int b, int n) {
  int d = a - b;
  if (d < 0) d = -d;
  return std::min(d, n - d);
}

namespace detail {

// One decode attempt at candidate time t. On success `rebuilt` holds the
// verified packet so the caller can cancel it without re-encoding.
inline DecodeOutcome attempt_at(const FrameSignal& y, int t, const CodeSpec& spec,
                                const PhyParams& phy, const Sequences& seqs,
                                const ReceiverParams& rx, SclDecoder& decoder,
                                Packet* rebuilt) {
  DecodeOutcome out;
  out.start_time = t;
  const LlrVec llr = despread(y, t, phy, seqs.spreading);
  const std::optional<Bits> message = decoder.decode(llr, rx.list_max);
  if (!message) {
    out.status = AttemptStatus::erasure;
    return out;
  }
  // Timing check: the decoded message must explain the candidate position.
  const int t_hat = hash_time(*message, phy);
  if (circular_distance(t_hat, t, phy.n) > rx.delta) {
    out.status = AttemptStatus::hash_mismatch;
    return out;
  }
  Packet pkt;
  pkt.samples.reserve(static_cast<std::size_t>(phy.preamble_len + phy.payload_len));
  const Bits c = polar_encode(*message, spec);
  const std::vector<double> payload = spread(c, seqs.spreading, phy.s);
  pkt.samples.insert(pkt.samples.end(), seqs.preamble.begin(), seqs.preamble.end());
  pkt.samples.insert(pkt.samples.end(), payload.begin(), payload.end());
  pkt.start_time = t;
  // Least-squares amplitude of the rebuilt packet against the residual:
  // <y, x> / ||x||^2 with ||x||^2 = L0 + L exactly.
  double dot = 0.0;
  std::size_t idx = static_cast<std::size_t>(t);
  const std::size_t n = y.size();
  for (const double chip : pkt.samples) {
    dot += y[idx] * chip;
    if (++idx == n) idx = 0;
  }
  out.amplitude = dot / static_cast<double>(phy.preamble_len + phy.payload_len);
  out.status = AttemptStatus::success;
  out.message = *message;
  if (rebuilt) *rebuilt = std::move(pkt);
  return out;
}

}  // namespace detail

// Single decode attempt (public flavour; rebuilds internally on success).
inline DecodeOutcome attempt(const FrameSignal& y, int t, const CodeSpec& spec,
                             const PhyParams& phy, const Sequences& seqs,
                             const ReceiverParams& rx, SclDecoder& decoder) {
  return detail::attempt_at(y, t, spec, phy, seqs, rx, decoder, nullptr);
}

struct SicResult {
  std::vector<std::pair<Bits, int>> recovered;  // (message, start time)
  long attempts = 0;
  int iterations = 0;
};

// Runs SIC on (and consumes) the frame y. `true_times` is required in genie
// mode and ignored otherwise; `correlator` may be shared across frames and
// is required in preamble mode; `trace` (optional) receives one record per
// decode attempt.
inline SicResult run_sic(FrameSignal& y, const CodeSpec& spec, const PhyParams& phy,
                         const Sequences& seqs, const ReceiverParams& rx,
                         const CircularCorrelator* correlator = nullptr,
                         const std::vector<int>* true_times = nullptr,
                         std::vector<AttemptRecord>* trace = nullptr,
                         long frame_index = 0) {
  validate_receiver_params(rx, phy);
  if (rx.genie && true_times == nullptr) {
    throw std::invalid_argument("run_sic: genie mode needs true start times");
  }
  SclDecoder decoder(spec);
  std::optional<CircularCorrelator> local_corr;
  CircularCorrelator::Scratch scratch;
  if (!rx.genie && correlator == nullptr) {
    local_corr.emplace(seqs.preamble, static_cast<std::size_t>(phy.n));
    correlator = &*local_corr;
  }

  SicResult result;
  std::unordered_set<int> recovered_times;
  // Recovered messages, hashed for the duplicate check.
  std::unordered_set<std::uint64_t> recovered_keys;
  const auto message_key = [](const Bits& u) {
    return fnv1a64(u.data(), u.size());
  };

  std::vector<double> lambda;
  std::vector<int> candidates;
  for (int iter = 1; iter <= rx.imax; ++iter) {
    result.iterations = iter;
    candidates.clear();
    if (rx.genie) {
      for (const int t : *true_times) {
        if (static_cast<int>(candidates.size()) >= rx.w) break;
        if (recovered_times.contains(t)) continue;
        if (std::find(candidates.begin(), candidates.end(), t) != candidates.end()) {
          continue;  // duplicate hashed time: one attempt covers both users
        }
        candidates.push_back(t);
      }
    } else {
      correlator->correlate(y, lambda, scratch);
      candidates = top_w(lambda, rx.w, recovered_times);
    }

    int newly_recovered = 0;
    for (const int t : candidates) {
      Packet rebuilt;
      const DecodeOutcome out =
          detail::attempt_at(y, t, spec, phy, seqs, rx, decoder, &rebuilt);
      ++result.attempts;
      if (trace) {
        trace->push_back({frame_index, iter, t, out.status, out.amplitude});
      }
      if (out.status != AttemptStatus::success) continue;
      const std::uint64_t key = message_key(*out.message);
      if (recovered_keys.contains(key)) {
        // Already recovered (e.g. at a nearby time): keep the first copy,
        // do not cancel again.
        continue;
      }
      recovered_keys.insert(key);
      recovered_times.insert(t);
      result.recovered.emplace_back(*out.message, t);
      subtract_from_frame(y, rebuilt, out.amplitude);
      ++newly_recovered;
    }
    if (newly_recovered == 0) break;
  }
  return result;
}

}  // namespace essa
