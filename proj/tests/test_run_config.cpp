#include "closefields/run_config.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace closefields;
using namespace testing_support;

TEST_CASE("resolve fills l and enforces the run invariants") {
  RunConfig c;
  c.p = 2;
  CHECK(resolve(c).l == 3);
  c.p = 3;
  CHECK(resolve(c).l == 2);
  c.case_kind = ExtKind::Ramified;
  c.p = 7;
  CHECK(resolve(c).l == 2);
  c.l = 3;
  CHECK(resolve(c).l == 3);
  c.l = 5;
  CHECK(code_of([&] { resolve(c); }) == ErrorCode::ConfigInvalid);
  c.case_kind = ExtKind::Ramified;
  c.p = 2;
  c.l = 0;
  CHECK(code_of([&] { resolve(c); }) == ErrorCode::ConfigInvalid);

  RunConfig same;
  same.p = 3;
  same.l = 3;
  CHECK(code_of([&] { resolve(same); }) == ErrorCode::ConfigInvalid);
  RunConfig mixed;
  mixed.m = 2;
  CHECK(code_of([&] { resolve(mixed); }) == ErrorCode::ConfigInvalid);
  mixed.pair_mode = PairMode::EqualEqual;
  CHECK(resolve(mixed).m == 2);
  RunConfig composite;
  composite.p = 4;
  CHECK(code_of([&] { resolve(composite); }) == ErrorCode::ConfigInvalid);
}

TEST_CASE("config echo is stable") {
  RunConfig c;
  c.case_kind = ExtKind::Ramified;
  c.p = 3;
  const Json j = config_to_json(resolve(c));
  CHECK(j["case"] == "ramified");
  CHECK(j["mode"] == "mixed-equal");
  CHECK(j["l"] == 2);
  CHECK(j.dump() == config_to_json(resolve(c)).dump());
  CHECK(check_options(c).random_samples == c.samples);
}
