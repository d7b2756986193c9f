#include "closefields/run_config.hpp"

namespace closefields {

RunConfig resolve(RunConfig cfg) {
  auto bad = [](const std::string& why) { fail(ErrorCode::ConfigInvalid, why); };
  if (!is_prime(cfg.p)) bad("p = " + std::to_string(cfg.p) + " is not prime");
  if (cfg.l == 0) {
    for (int c = 2; c < 1000; ++c)
      if (is_prime(c) && c != cfg.p && (cfg.case_kind == ExtKind::Unramified || (cfg.p - 1) % c == 0)) {
        cfg.l = c;
        break;
      }
    if (cfg.l == 0) bad("no admissible l for p = " + std::to_string(cfg.p));
  }
  if (!is_prime(cfg.l)) bad("l = " + std::to_string(cfg.l) + " is not prime");
  if (cfg.l == cfg.p) bad("l must differ from p");
  if (cfg.case_kind == ExtKind::Ramified && (cfg.p - 1) % cfg.l != 0)
    bad("ramified case needs l | p - 1, got l = " + std::to_string(cfg.l) + ", p = " + std::to_string(cfg.p));
  if (cfg.pair_mode == PairMode::MixedEqual && cfg.m != 1) bad("mixed-equal pairs need m = 1");
  if (cfg.m < 1) bad("m must be positive");
  if (cfg.n < 1) bad("n must be positive");
  if (cfg.window < 0) bad("window must be non-negative");
  if (cfg.samples < 0) bad("samples must be non-negative");
  if (cfg.k < 1) bad("k must be positive");
  if (cfg.precision_cap < 1) bad("precision cap must be positive");
  return cfg;
}

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["p"] = cfg.p;
  j["l"] = cfg.l;
  j["m"] = cfg.m;
  j["n"] = cfg.n;
  j["case"] = cfg.case_kind == ExtKind::Ramified ? "ramified" : "unramified";
  j["mode"] = to_string(cfg.pair_mode);
  j["window"] = cfg.window;
  j["seed"] = cfg.seed;
  j["samples"] = cfg.samples;
  j["precision_cap"] = cfg.precision_cap;
  j["budget"] = cfg.budget;
  j["k"] = cfg.k;
  j["all_orbit_sums"] = cfg.all_orbit_sums;
  return j;
}

CheckOptions check_options(const RunConfig& cfg) {
  CheckOptions o;
  o.window = cfg.window;
  o.random_samples = cfg.samples;
  o.seed = cfg.seed;
  o.budget = cfg.budget;
  o.precision_cap = cfg.precision_cap;
  o.all_orbit_sums = cfg.all_orbit_sums;
  return o;
}

}  // namespace closefields
