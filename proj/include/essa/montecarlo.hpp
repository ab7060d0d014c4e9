#pragma once
// Monte Carlo harness: per-user probability of error (PUPE) estimation,
// threshold search in Eb/N0, and one-axis parameter sweeps.
//
// Reproducibility contract: frame i of a run draws all of its randomness
// from a SplitMix64 stream seeded with substream_seed(master_seed, i). The
// stream is consumed in a fixed order -- first the Ka user messages
// (resampling duplicates), then the n noise samples -- and by nothing
// else, so any frame can be regenerated in isolation and results do not
// depend on how frames are scheduled across worker threads.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "essa/channel.hpp"
#include "essa/codec.hpp"
#include "essa/phy.hpp"
#include "essa/receiver.hpp"
#include "essa/rng.hpp"

namespace essa {

struct CodeParams {
  int n = 0;   // N
  int k = 0;   // K
  int crc_len = 11;
  bool subblock_interleave = false;
};

struct ScenarioConfig {
  CodeParams code;
  PhyParams phy;
  ReceiverParams rx;
  int ka = 1;
  double ebn0_db = 0.0;
  long frames = 100;
  std::uint64_t master_seed = 1;
};

// Immutable per-run state shared by every frame (and worker thread).
struct SimContext {
  CodeSpec spec;
  Sequences seqs;
  double sigma2 = 0.0;
  std::optional<CircularCorrelator> correlator;
};

inline SimContext make_context(const ScenarioConfig& cfg) {
  SimContext ctx;
  ctx.spec = build_code_spec(cfg.code.n, cfg.code.k, cfg.code.crc_len,
                             cfg.code.subblock_interleave);
  if (cfg.phy.code_n != cfg.code.n) {
    throw std::invalid_argument("make_context: phy.code_n != code.n");
  }
  validate_receiver_params(cfg.rx, cfg.phy);
  if (cfg.ka < 1) throw std::invalid_argument("make_context: Ka >= 1 required");
  if (cfg.frames < 1) throw std::invalid_argument("make_context: frames >= 1 required");
  ctx.seqs = generate_sequences(cfg.phy);
  ctx.sigma2 = sigma2_from_ebn0(cfg.ebn0_db, cfg.code.k, cfg.phy.preamble_len,
                                cfg.phy.payload_len);
  if (!cfg.rx.genie) {
    ctx.correlator.emplace(ctx.seqs.preamble, static_cast<std::size_t>(cfg.phy.n));
  }
  return ctx;
}

struct FrameResult {
  int misses = 0;        // sent messages not recovered
  int false_alarms = 0;  // recovered messages never sent
  long attempts = 0;
  int iterations = 0;
  int recovered = 0;
};

// Draw one K-bit message from the stream.
inline Bits draw_message(SplitMix64& rng, int k) {
  Bits u(static_cast<std::size_t>(k));
  for (auto& b : u) b = static_cast<std::uint8_t>(rng.next_bit());
  return u;
}

// Simulates one frame end to end. When `inject` is non-empty it replaces
// the random message draw (the stream still skips nothing: injected runs
// draw no message words), which gives tests a handle on hash collisions
// and duplicate messages.
inline FrameResult run_frame(const ScenarioConfig& cfg, const SimContext& ctx,
                             long frame_index,
                             std::vector<AttemptRecord>* trace = nullptr,
                             const std::vector<Bits>* inject = nullptr) {
  SplitMix64 rng(substream_seed(cfg.master_seed, static_cast<std::uint64_t>(frame_index)));
  std::vector<Bits> sent;
  sent.reserve(static_cast<std::size_t>(cfg.ka));
  if (inject) {
    if (static_cast<int>(inject->size()) != cfg.ka) {
      throw std::invalid_argument("run_frame: injected user count != Ka");
    }
    sent = *inject;
  } else {
    while (static_cast<int>(sent.size()) < cfg.ka) {
      Bits u = draw_message(rng, cfg.code.k);
      bool fresh = true;
      for (const Bits& prev : sent) {
        if (prev == u) { fresh = false; break; }
      }
      if (fresh) sent.push_back(std::move(u));
    }
  }

  std::vector<Packet> packets;
  packets.reserve(sent.size());
  std::vector<int> true_times;
  true_times.reserve(sent.size());
  for (const Bits& u : sent) {
    packets.push_back(build_packet(u, ctx.spec, cfg.phy, ctx.seqs));
    true_times.push_back(packets.back().start_time);
  }

  GaussianSource noise(rng);
  FrameSignal y = transmit(packets, cfg.phy.n, ctx.sigma2, noise);

  const CircularCorrelator* corr = ctx.correlator ? &*ctx.correlator : nullptr;
  const SicResult sic = run_sic(y, ctx.spec, cfg.phy, ctx.seqs, cfg.rx, corr,
                                cfg.rx.genie ? &true_times : nullptr, trace,
                                frame_index);

  FrameResult res;
  res.attempts = sic.attempts;
  res.iterations = sic.iterations;
  res.recovered = static_cast<int>(sic.recovered.size());
  for (const Bits& u : sent) {
    bool found = false;
    for (const auto& [msg, t] : sic.recovered) {
      if (msg == u) { found = true; break; }
    }
    if (!found) ++res.misses;
  }
  for (const auto& [msg, t] : sic.recovered) {
    bool was_sent = false;
    for (const Bits& u : sent) {
      if (msg == u) { was_sent = true; break; }
    }
    if (!was_sent) ++res.false_alarms;
  }
  return res;
}

struct SimReport {
  long frames = 0;
  int ka = 0;
  double ebn0_db = 0.0;
  long total_misses = 0;
  long total_false_alarms = 0;
  long total_attempts = 0;
  double pupe = 0.0;
  double ci_lo = 0.0;   // Wilson 95% on the per-user miss probability
  double ci_hi = 0.0;
  double fa_per_frame = 0.0;
  double mean_attempts = 0.0;
  double mean_iterations = 0.0;
};

// Wilson score interval for `hits` successes in `trials` Bernoulli draws.
inline std::pair<double, double> wilson_interval(long hits, long trials,
                                                 double z = 1.959963984540054) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: no trials");
  const double nn = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double radius =
      z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, centre - radius), std::min(1.0, centre + radius)};
}

// Deterministic reduction of per-frame results; order of `results` is the
// frame order regardless of which thread produced each entry.
inline SimReport aggregate(const std::vector<FrameResult>& results, int ka,
                           double ebn0_db) {
  SimReport rep;
  rep.frames = static_cast<long>(results.size());
  rep.ka = ka;
  rep.ebn0_db = ebn0_db;
  long iter_sum = 0;
  for (const FrameResult& r : results) {
    rep.total_misses += r.misses;
    rep.total_false_alarms += r.false_alarms;
    rep.total_attempts += r.attempts;
    iter_sum += r.iterations;
  }
  const long users = rep.frames * static_cast<long>(ka);
  rep.pupe = static_cast<double>(rep.total_misses) / static_cast<double>(users);
  const auto [lo, hi] = wilson_interval(rep.total_misses, users);
  rep.ci_lo = lo;
  rep.ci_hi = hi;
  rep.fa_per_frame =
      static_cast<double>(rep.total_false_alarms) / static_cast<double>(rep.frames);
  rep.mean_attempts =
      static_cast<double>(rep.total_attempts) / static_cast<double>(rep.frames);
  rep.mean_iterations =
      static_cast<double>(iter_sum) / static_cast<double>(rep.frames);
  return rep;
}

// Runs cfg.frames independent frames, optionally across worker threads.
// Frames are handed out through an atomic counter and written into a
// per-frame slot, so the aggregate (and any trace) is index-ordered and
// identical for every `jobs` value.
inline SimReport estimate_pupe(const ScenarioConfig& cfg, int jobs = 1,
                               std::vector<AttemptRecord>* trace = nullptr) {
  const SimContext ctx = make_context(cfg);
  std::vector<FrameResult> results(static_cast<std::size_t>(cfg.frames));
  std::vector<std::vector<AttemptRecord>> traces;
  if (trace) traces.resize(static_cast<std::size_t>(cfg.frames));

  if (jobs <= 1) {
    for (long i = 0; i < cfg.frames; ++i) {
      results[static_cast<std::size_t>(i)] =
          run_frame(cfg, ctx, i, trace ? &traces[static_cast<std::size_t>(i)] : nullptr);
    }
  } else {
    std::atomic<long> next{0};
    auto worker = [&] {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= cfg.frames) break;
        results[static_cast<std::size_t>(i)] =
            run_frame(cfg, ctx, i, trace ? &traces[static_cast<std::size_t>(i)] : nullptr);
      }
    };
    std::vector<std::thread> pool;
    const int nthreads = static_cast<int>(std::min<long>(jobs, cfg.frames));
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  if (trace) {
    for (auto& per_frame : traces) {
      trace->insert(trace->end(), per_frame.begin(), per_frame.end());
    }
  }
  return aggregate(results, cfg.ka, cfg.ebn0_db);
}

struct ProbeRecord {
  double ebn0_db = 0.0;
  SimReport report;
};

// Bisection for the smallest Eb/N0 meeting `target` PUPE, given a monotone
// (in distribution) probe. Requires probe(lo) > target >= probe(hi); the
// returned value is the `hi` end of the final bracket, i.e. a level at
// which the estimate met the target.
inline double min_ebn0_search(const std::function<double(double)>& probe,
                              double target, double lo_db, double hi_db,
                              double tol_db) {
  if (!(tol_db > 0.0)) throw std::invalid_argument("min_ebn0_search: tol_db > 0");
  if (!(lo_db < hi_db)) throw std::invalid_argument("min_ebn0_search: need lo < hi");
  if (target >= 1.0) return lo_db;
  const double p_lo = probe(lo_db);
  const double p_hi = probe(hi_db);
  if (!(p_lo > target) || !(p_hi <= target)) {
    throw std::runtime_error("min_ebn0_search: bracket does not straddle target");
  }
  double lo = lo_db, hi = hi_db;
  while (hi - lo > tol_db) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) <= target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

// PUPE-threshold search over full simulations. Each probe runs cfg.frames
// frames at the probed Eb/N0 with the scenario's master seed.
inline double min_ebn0(const ScenarioConfig& cfg, double target, double lo_db,
                       double hi_db, double tol_db, int jobs = 1,
                       std::vector<ProbeRecord>* probes = nullptr) {
  auto probe = [&](double ebn0_db) {
    ScenarioConfig point = cfg;
    point.ebn0_db = ebn0_db;
    const SimReport rep = estimate_pupe(point, jobs);
    if (probes) probes->push_back({ebn0_db, rep});
    return rep.pupe;
  };
  return min_ebn0_search(probe, target, lo_db, hi_db, tol_db);
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { spreading_factor, preamble_length, w, ka };

inline const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::spreading_factor: return "spreading";
    case SweepAxis::preamble_length: return "preamble-len";
    case SweepAxis::w: return "w";
    case SweepAxis::ka: return "ka";
  }
  return "?";
}

// Extra energy a preamble of L0 chips costs relative to the L payload
// chips, in dB.
inline double delta_e_db(long preamble_len, long payload_len) {
  return 10.0 * std::log10(1.0 + static_cast<double>(preamble_len) /
                                     static_cast<double>(payload_len));
}

struct SweepRow {
  double axis_value = 0.0;
  double ebn0_db = 0.0;
  SimReport report;
  std::optional<double> delta_e;  // preamble-length sweeps only
};

struct SweepOptions {
  SweepAxis axis = SweepAxis::ka;
  std::vector<double> values;
  // Threshold mode when target is set (per-point min_ebn0 with the bracket
  // below); otherwise one estimate_pupe per value at cfg.ebn0_db.
  std::optional<double> target;
  double lo_db = 0.0;
  double hi_db = 10.0;
  double tol_db = 0.1;
};

inline ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis,
                                 double value) {
  ScenarioConfig cfg = base;
  const long v = static_cast<long>(value);
  if (static_cast<double>(v) != value || v < 0) {
    throw std::invalid_argument("sweep: axis values must be non-negative integers");
  }
  switch (axis) {
    case SweepAxis::spreading_factor:
      cfg.phy = make_phy_params(cfg.phy.n, static_cast<int>(v), cfg.code.n,
                                cfg.phy.preamble_len, cfg.phy.spreading_seed,
                                cfg.phy.preamble_seed, cfg.phy.hash_seed);
      break;
    case SweepAxis::preamble_length:
      cfg.phy = make_phy_params(cfg.phy.n, cfg.phy.s, cfg.code.n, v,
                                cfg.phy.spreading_seed, cfg.phy.preamble_seed,
                                cfg.phy.hash_seed);
      break;
    case SweepAxis::w:
      cfg.rx.w = static_cast<int>(v);
      break;
    case SweepAxis::ka:
      cfg.ka = static_cast<int>(v);
      break;
  }
  return cfg;
}

inline std::vector<SweepRow> sweep(const ScenarioConfig& base,
                                   const SweepOptions& opt, int jobs = 1) {
  if (opt.values.empty()) throw std::invalid_argument("sweep: no axis values");
  std::vector<SweepRow> rows;
  rows.reserve(opt.values.size());
  for (const double v : opt.values) {
    const ScenarioConfig cfg = apply_axis(base, opt.axis, v);
    SweepRow row;
    row.axis_value = v;
    if (opt.target) {
      std::vector<ProbeRecord> probes;
      row.ebn0_db = min_ebn0(cfg, *opt.target, opt.lo_db, opt.hi_db, opt.tol_db,
                             jobs, &probes);
      // Report the statistics observed at the returned threshold.
      for (auto it = probes.rbegin(); it != probes.rend(); ++it) {
        if (it->ebn0_db == row.ebn0_db) { row.report = it->report; break; }
      }
    } else {
      row.ebn0_db = cfg.ebn0_db;
      row.report = estimate_pupe(cfg, jobs);
    }
    if (opt.axis == SweepAxis::preamble_length) {
      row.delta_e = delta_e_db(cfg.phy.preamble_len, cfg.phy.payload_len);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace essa
