#pragma once
// Named parameter bundles. "paper" is the full-size operating point,
// "genie" the same without a preamble and with genie-aided timing, and
// "ci" a scaled-down point for fast regression runs.

#include <stdexcept>
#include <string>
#include <vector>

#include "essa/montecarlo.hpp"

namespace essa {

inline constexpr std::uint64_t kDefaultSpreadingSeed = 0xE55A0001ULL;
inline constexpr std::uint64_t kDefaultPreambleSeed = 0xE55A0002ULL;
inline constexpr std::uint64_t kDefaultHashSeed = 0xE55A0003ULL;

inline ScenarioConfig builtin_profile(const std::string& name) {
  ScenarioConfig cfg;
  cfg.master_seed = 1;
  cfg.frames = 100;
  if (name == "paper") {
    cfg.code = {1000, 100, 11, false};
    cfg.phy = make_phy_params(30000, 25, 1000, 3050, kDefaultSpreadingSeed,
                              kDefaultPreambleSeed, kDefaultHashSeed);
    cfg.rx = {100, 50, 0, 256, false};
    cfg.ka = 100;
    cfg.ebn0_db = 4.5;
  } else if (name == "genie") {
    cfg.code = {1000, 100, 11, false};
    cfg.phy = make_phy_params(30000, 25, 1000, 0, kDefaultSpreadingSeed,
                              kDefaultPreambleSeed, kDefaultHashSeed);
    cfg.rx = {100, 50, 0, 256, true};
    cfg.ka = 100;
    cfg.ebn0_db = 4.5;
  } else if (name == "ci") {
    cfg.code = {128, 32, 11, false};
    cfg.phy = make_phy_params(4096, 8, 128, 256, kDefaultSpreadingSeed,
                              kDefaultPreambleSeed, kDefaultHashSeed);
    cfg.rx = {8, 10, 0, 32, false};
    cfg.ka = 4;
    cfg.ebn0_db = 6.0;
  } else {
    throw std::invalid_argument("unknown profile: " + name);
  }
  return cfg;
}

inline std::vector<std::string> profile_names() { return {"paper", "genie", "ci"}; }

}  // namespace essa
