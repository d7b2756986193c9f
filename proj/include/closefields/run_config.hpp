#pragma once

// Resolved parameters of a CLI run. Echoed verbatim into every output.

#include <cstdint>
#include <string>

#include "closefields/kazhdan.hpp"

namespace closefields {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct RunConfig {
  int64_t p = 2;
  int l = 0;  // 0: smallest prime other than p admissible for the case
  int m = 1;
  int n = 2;
  ExtKind case_kind = ExtKind::Unramified;
  PairMode pair_mode = PairMode::MixedEqual;
  int window = 2;
  uint64_t seed = 1;
  int samples = 50;
  int precision_cap = 48;
  uint64_t budget = kDefaultBudget;
  int k = 1;
  bool all_orbit_sums = false;
};

// Fills l when unset, then checks l != p, ramified => l | p - 1 and
// mixed-equal => m = 1. Throws CONFIG_INVALID with the reason.
RunConfig resolve(RunConfig cfg);
Json config_to_json(const RunConfig& cfg);
CheckOptions check_options(const RunConfig& cfg);

}  // namespace closefields
