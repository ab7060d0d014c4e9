#pragma once
// Result serialization. Reports embed the complete scenario configuration
// so an output file is self-describing and can be parsed back into the
// exact config that produced it. Numbers are printed with shortest
// round-trip formatting, which keeps reports byte-identical across thread
// counts and runs.

#include <charconv>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "essa/montecarlo.hpp"

namespace essa {

// Shortest decimal string that parses back to exactly this double.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

// Eb/N0 may legitimately be +inf (noiseless runs), which JSON numbers
// cannot carry; it is serialized as a string in that case.
inline nlohmann::json ebn0_to_json(double ebn0_db) {
  if (std::isinf(ebn0_db)) return format_double(ebn0_db);
  return ebn0_db;
}

inline double ebn0_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_double(j.get<std::string>());
  return j.get<double>();
}

inline nlohmann::json config_to_json(const ScenarioConfig& cfg) {
  return nlohmann::json{
      {"code",
       {{"n", cfg.code.n},
        {"k", cfg.code.k},
        {"crc_len", cfg.code.crc_len},
        {"subblock_interleave", cfg.code.subblock_interleave}}},
      {"phy",
       {{"n", cfg.phy.n},
        {"s", cfg.phy.s},
        {"preamble_len", cfg.phy.preamble_len},
        {"spreading_seed", cfg.phy.spreading_seed},
        {"preamble_seed", cfg.phy.preamble_seed},
        {"hash_seed", cfg.phy.hash_seed}}},
      {"rx",
       {{"w", cfg.rx.w},
        {"imax", cfg.rx.imax},
        {"delta", cfg.rx.delta},
        {"list_max", cfg.rx.list_max},
        {"genie", cfg.rx.genie}}},
      {"ka", cfg.ka},
      {"ebn0_db", ebn0_to_json(cfg.ebn0_db)},
      {"frames", cfg.frames},
      {"master_seed", cfg.master_seed},
  };
}

inline ScenarioConfig config_from_json(const nlohmann::json& j) {
  ScenarioConfig cfg;
  const auto& code = j.at("code");
  cfg.code.n = code.at("n").get<int>();
  cfg.code.k = code.at("k").get<int>();
  cfg.code.crc_len = code.at("crc_len").get<int>();
  cfg.code.subblock_interleave = code.at("subblock_interleave").get<bool>();
  const auto& phy = j.at("phy");
  cfg.phy = make_phy_params(phy.at("n").get<int>(), phy.at("s").get<int>(),
                            cfg.code.n, phy.at("preamble_len").get<long>(),
                            phy.at("spreading_seed").get<std::uint64_t>(),
                            phy.at("preamble_seed").get<std::uint64_t>(),
                            phy.at("hash_seed").get<std::uint64_t>());
  const auto& rx = j.at("rx");
  cfg.rx.w = rx.at("w").get<int>();
  cfg.rx.imax = rx.at("imax").get<int>();
  cfg.rx.delta = rx.at("delta").get<int>();
  cfg.rx.list_max = rx.at("list_max").get<int>();
  cfg.rx.genie = rx.at("genie").get<bool>();
  cfg.ka = j.at("ka").get<int>();
  cfg.ebn0_db = ebn0_from_json(j.at("ebn0_db"));
  cfg.frames = j.at("frames").get<long>();
  cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
  return cfg;
}

inline nlohmann::json report_to_json(const SimReport& rep) {
  return nlohmann::json{
      {"frames", rep.frames},
      {"ka", rep.ka},
      {"ebn0_db", ebn0_to_json(rep.ebn0_db)},
      {"total_misses", rep.total_misses},
      {"total_false_alarms", rep.total_false_alarms},
      {"total_attempts", rep.total_attempts},
      {"pupe", rep.pupe},
      {"ci_lo", rep.ci_lo},
      {"ci_hi", rep.ci_hi},
      {"fa_per_frame", rep.fa_per_frame},
      {"mean_attempts", rep.mean_attempts},
      {"mean_iterations", rep.mean_iterations},
  };
}

inline std::string run_report_json(const ScenarioConfig& cfg, const SimReport& rep) {
  nlohmann::json j{
      {"schema_version", 1},
      {"command", "run"},
      {"config", config_to_json(cfg)},
      {"report", report_to_json(rep)},
  };
  return j.dump(2) + "\n";
}

inline std::string minsnr_report_json(const ScenarioConfig& cfg, double target,
                                      double min_ebn0_db,
                                      const std::vector<ProbeRecord>& probes) {
  nlohmann::json probe_rows = nlohmann::json::array();
  for (const ProbeRecord& p : probes) {
    probe_rows.push_back({{"ebn0_db", ebn0_to_json(p.ebn0_db)},
                          {"report", report_to_json(p.report)}});
  }
  nlohmann::json j{
      {"schema_version", 1},
      {"command", "minsnr"},
      {"config", config_to_json(cfg)},
      {"target_pupe", target},
      {"min_ebn0_db", min_ebn0_db},
      {"probes", probe_rows},
  };
  return j.dump(2) + "\n";
}

// CSV layout shared by all commands: one row per result. Sweep output adds
// the axis column in front and (for preamble sweeps) the extra-energy
// column at the end. The `# config=` comment carries the full JSON config
// so CSV files parse back like JSON ones.
inline std::string csv_header(bool with_axis, const char* axis_name,
                              bool with_delta_e) {
  std::string h;
  if (with_axis) {
    h += axis_name;
    h += ",";
  }
  h += "ebn0_db,pupe,ci_lo,ci_hi,fa_per_frame,mean_attempts,frames";
  if (with_delta_e) h += ",delta_e_db";
  h += "\n";
  return h;
}

inline std::string csv_report_row(const SimReport& rep) {
  std::string row;
  row += format_double(rep.ebn0_db);
  row += "," + format_double(rep.pupe);
  row += "," + format_double(rep.ci_lo);
  row += "," + format_double(rep.ci_hi);
  row += "," + format_double(rep.fa_per_frame);
  row += "," + format_double(rep.mean_attempts);
  row += "," + std::to_string(rep.frames);
  return row;
}

inline std::string run_report_csv(const ScenarioConfig& cfg, const SimReport& rep) {
  std::string out = "# config=" + config_to_json(cfg).dump() + "\n";
  out += csv_header(false, nullptr, false);
  out += csv_report_row(rep) + "\n";
  return out;
}

inline std::string sweep_report_csv(const ScenarioConfig& cfg,
                                    const SweepOptions& opt,
                                    const std::vector<SweepRow>& rows) {
  const bool with_delta_e = opt.axis == SweepAxis::preamble_length;
  std::string out = "# config=" + config_to_json(cfg).dump() + "\n";
  out += csv_header(true, to_string(opt.axis), with_delta_e);
  for (const SweepRow& row : rows) {
    std::string line = format_double(row.axis_value);
    SimReport rep = row.report;
    rep.ebn0_db = row.ebn0_db;
    line += "," + csv_report_row(rep);
    if (with_delta_e) line += "," + format_double(row.delta_e.value_or(0.0));
    out += line + "\n";
  }
  return out;
}

inline std::string sweep_report_json(const ScenarioConfig& cfg,
                                     const SweepOptions& opt,
                                     const std::vector<SweepRow>& rows) {
  nlohmann::json jrows = nlohmann::json::array();
  for (const SweepRow& row : rows) {
    nlohmann::json r{{"axis_value", row.axis_value},
                     {"ebn0_db", ebn0_to_json(row.ebn0_db)},
                     {"report", report_to_json(row.report)}};
    if (row.delta_e) r["delta_e_db"] = *row.delta_e;
    jrows.push_back(std::move(r));
  }
  nlohmann::json j{
      {"schema_version", 1},
      {"command", "sweep"},
      {"config", config_to_json(cfg)},
      {"axis", to_string(opt.axis)},
      {"rows", jrows},
  };
  if (opt.target) j["target_pupe"] = *opt.target;
  return j.dump(2) + "\n";
}

// Extracts the config back out of either format (JSON document or the
// `# config=` comment of a CSV file).
inline ScenarioConfig config_from_report_text(const std::string& text) {
  if (text.rfind("# config=", 0) == 0) {
    const std::size_t eol = text.find('\n');
    const std::string line = text.substr(9, eol == std::string::npos ? eol : eol - 9);
    return config_from_json(nlohmann::json::parse(line));
  }
  const nlohmann::json j = nlohmann::json::parse(text);
  return config_from_json(j.at("config"));
}

}  // namespace essa
