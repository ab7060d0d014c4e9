#pragma once
// Command line front end (essa_sim). Exposed as a library function so tests
// can drive the binary's exact code path in process.
//
//   run      estimate PUPE at a fixed operating point
//   minsnr   bisect for the smallest Eb/N0 meeting --target-pupe
//   sweep    repeat run/minsnr along one parameter axis
//   selftest quick structural checks
//
// The ESSA_SEED environment variable, when set, overrides --seed.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "essa/montecarlo.hpp"
#include "essa/profiles.hpp"
#include "essa/report.hpp"
#include "essa/selftest.hpp"

namespace essa::cli {

namespace detail {

// Results are independent of the thread count by construction, so the
// default can safely use the whole machine.
inline int default_jobs() {
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

struct CommonFlags {
  std::string profile = "paper";
  std::optional<int> frame_len;
  std::optional<int> ka;
  std::optional<std::string> ebn0_db;
  std::optional<int> spreading;
  std::optional<long> preamble_len;
  std::optional<int> w;
  std::optional<int> imax;
  std::optional<int> delta;
  std::optional<int> list_max;
  std::optional<long> frames;
  std::optional<std::uint64_t> seed;
  bool genie = false;
  int jobs = default_jobs();
  std::string out;
  std::string format;  // "json" or "csv"; empty = command default
  std::string trace;
};

inline void add_common_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--profile", f.profile, "parameter profile: paper, genie or ci")
      ->check(CLI::IsMember(profile_names()));
  cmd->add_option("--n", f.frame_len, "frame length in chips");
  cmd->add_option("--ka", f.ka, "number of active users");
  cmd->add_option("--ebn0-db", f.ebn0_db, "per-bit SNR in dB ('inf' = noiseless)");
  cmd->add_option("--spreading", f.spreading, "spreading factor (chips per coded bit)");
  cmd->add_option("--preamble-len", f.preamble_len, "preamble length in chips");
  cmd->add_option("--w", f.w, "candidate start times per SIC iteration");
  cmd->add_option("--imax", f.imax, "maximum SIC iterations");
  cmd->add_option("--delta", f.delta, "timing-check tolerance in chips");
  cmd->add_option("--list-max", f.list_max, "adaptive SCL list budget (power of two)");
  cmd->add_option("--frames", f.frames, "Monte Carlo frames");
  cmd->add_option("--seed", f.seed, "master seed (overridden by ESSA_SEED)");
  cmd->add_flag("--genie", f.genie, "genie-aided timing (omits the preamble)");
  cmd->add_option("--jobs", f.jobs, "worker threads (default: all cores)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", f.out, "output path (default: stdout)");
  cmd->add_option("--format", f.format, "output format")
      ->check(CLI::IsMember(std::vector<std::string>{"json", "csv"}));
  cmd->add_option("--trace", f.trace, "write per-attempt JSONL records here");
}

inline ScenarioConfig build_config(const CommonFlags& f) {
  ScenarioConfig cfg = builtin_profile(f.profile);
  if (f.ka) cfg.ka = *f.ka;
  if (f.ebn0_db) cfg.ebn0_db = parse_double(*f.ebn0_db);
  if (f.w) cfg.rx.w = *f.w;
  if (f.imax) cfg.rx.imax = *f.imax;
  if (f.delta) cfg.rx.delta = *f.delta;
  if (f.list_max) cfg.rx.list_max = *f.list_max;
  if (f.frames) cfg.frames = *f.frames;
  if (f.seed) cfg.master_seed = *f.seed;
  if (f.genie) cfg.rx.genie = true;
  long preamble_len = cfg.phy.preamble_len;
  if (f.preamble_len) {
    preamble_len = *f.preamble_len;
  } else if (f.genie) {
    preamble_len = 0;  // genie runs transmit no preamble
  }
  cfg.phy = make_phy_params(f.frame_len ? *f.frame_len : cfg.phy.n,
                            f.spreading ? *f.spreading : cfg.phy.s, cfg.code.n,
                            preamble_len, cfg.phy.spreading_seed,
                            cfg.phy.preamble_seed, cfg.phy.hash_seed);
  if (const char* env = std::getenv("ESSA_SEED")) {
    cfg.master_seed = std::strtoull(env, nullptr, 0);
  }
  return cfg;
}

inline void write_output(const std::string& path, const std::string& text,
                         std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
}

inline void write_trace(const std::string& path,
                        const std::vector<AttemptRecord>& records) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  for (const AttemptRecord& r : records) {
    nlohmann::json j{{"frame", r.frame},
                     {"iteration", r.iteration},
                     {"t", r.start_time},
                     {"status", to_string(r.status)},
                     {"amplitude", r.amplitude}};
    out << j.dump() << "\n";
  }
}

inline SweepAxis parse_axis(const std::string& name) {
  if (name == "spreading") return SweepAxis::spreading_factor;
  if (name == "preamble-len") return SweepAxis::preamble_length;
  if (name == "w") return SweepAxis::w;
  if (name == "ka") return SweepAxis::ka;
  throw std::invalid_argument("unknown sweep axis: " + name);
}

inline std::vector<double> parse_values(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) values.push_back(parse_double(item));
  }
  if (values.empty()) throw std::invalid_argument("--values is empty");
  return values;
}

}  // namespace detail

// argv-style entry point; `out`/`err` default to the real streams.
inline int run(const std::vector<std::string>& args,
               std::ostream& out_stream = std::cout,
               std::ostream& err_stream = std::cerr) {
  CLI::App app{"Spread-spectrum random access simulator"};
  app.require_subcommand(1);

  detail::CommonFlags run_flags, minsnr_flags, sweep_flags;
  double target_pupe = 0.05;
  double lo_db = 0.0, hi_db = 10.0, tol_db = 0.1;
  double sweep_target = 0.05;
  double sweep_lo = 0.0, sweep_hi = 10.0, sweep_tol = 0.1;
  std::string axis_name;
  std::string values_csv;

  CLI::App* cmd_run = app.add_subcommand("run", "estimate PUPE at one operating point");
  detail::add_common_flags(cmd_run, run_flags);

  CLI::App* cmd_minsnr =
      app.add_subcommand("minsnr", "smallest Eb/N0 meeting a target PUPE");
  detail::add_common_flags(cmd_minsnr, minsnr_flags);
  cmd_minsnr->add_option("--target-pupe", target_pupe, "PUPE target")
      ->check(CLI::Range(0.0, 1.0));
  cmd_minsnr->add_option("--lo-db", lo_db, "bracket low end (dB)");
  cmd_minsnr->add_option("--hi-db", hi_db, "bracket high end (dB)");
  cmd_minsnr->add_option("--tol-db", tol_db, "bisection tolerance (dB)");

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "sweep one parameter axis");
  detail::add_common_flags(cmd_sweep, sweep_flags);
  cmd_sweep->add_option("--axis", axis_name, "spreading, preamble-len, w or ka")
      ->required();
  cmd_sweep->add_option("--values", values_csv, "comma-separated axis values")
      ->required();
  CLI::Option* sweep_target_opt =
      cmd_sweep->add_option("--target-pupe", sweep_target,
                            "per-point threshold search instead of fixed Eb/N0");
  cmd_sweep->add_option("--lo-db", sweep_lo, "bracket low end (dB)");
  cmd_sweep->add_option("--hi-db", sweep_hi, "bracket high end (dB)");
  cmd_sweep->add_option("--tol-db", sweep_tol, "bisection tolerance (dB)");

  CLI::App* cmd_selftest = app.add_subcommand("selftest", "quick structural checks");

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("essa_sim");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends print through CLI11's machinery.
      return app.exit(e, out_stream, err_stream);
    }
    err_stream << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (cmd_selftest->parsed()) {
      bool all_ok = true;
      for (const auto& [name, fn] : selftest_items()) {
        const bool ok = fn();
        all_ok = all_ok && ok;
        out_stream << (ok ? "ok   " : "FAIL ") << name << "\n";
      }
      return all_ok ? 0 : 1;
    }

    if (cmd_run->parsed()) {
      const ScenarioConfig cfg = detail::build_config(run_flags);
      std::vector<AttemptRecord> trace;
      const SimReport rep = estimate_pupe(
          cfg, run_flags.jobs, run_flags.trace.empty() ? nullptr : &trace);
      detail::write_trace(run_flags.trace, trace);
      const std::string format = run_flags.format.empty() ? "json" : run_flags.format;
      const std::string text = format == "csv" ? run_report_csv(cfg, rep)
                                               : run_report_json(cfg, rep);
      detail::write_output(run_flags.out, text, out_stream);
      return 0;
    }

    if (cmd_minsnr->parsed()) {
      const ScenarioConfig cfg = detail::build_config(minsnr_flags);
      std::vector<ProbeRecord> probes;
      const double threshold =
          min_ebn0(cfg, target_pupe, lo_db, hi_db, tol_db, minsnr_flags.jobs, &probes);
      const std::string format =
          minsnr_flags.format.empty() ? "json" : minsnr_flags.format;
      std::string text;
      if (format == "csv") {
        // One row per probe; the threshold is the last bracket's high end.
        text = "# config=" + config_to_json(cfg).dump() + "\n";
        text += "# min_ebn0_db=" + format_double(threshold) + "\n";
        text += csv_header(false, nullptr, false);
        for (const ProbeRecord& p : probes) text += csv_report_row(p.report) + "\n";
      } else {
        text = minsnr_report_json(cfg, target_pupe, threshold, probes);
      }
      detail::write_output(minsnr_flags.out, text, out_stream);
      return 0;
    }

    // sweep
    const ScenarioConfig cfg = detail::build_config(sweep_flags);
    SweepOptions opt;
    opt.axis = detail::parse_axis(axis_name);
    opt.values = detail::parse_values(values_csv);
    if (sweep_target_opt->count() > 0) {
      opt.target = sweep_target;
      opt.lo_db = sweep_lo;
      opt.hi_db = sweep_hi;
      opt.tol_db = sweep_tol;
    }
    const std::vector<SweepRow> rows = sweep(cfg, opt, sweep_flags.jobs);
    const std::string format = sweep_flags.format.empty() ? "csv" : sweep_flags.format;
    const std::string text = format == "json" ? sweep_report_json(cfg, opt, rows)
                                              : sweep_report_csv(cfg, opt, rows);
    detail::write_output(sweep_flags.out, text, out_stream);
    return 0;
  } catch (const std::invalid_argument& e) {
    err_stream << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err_stream << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace essa::cli
