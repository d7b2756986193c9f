#include "closefields/kazhdan.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace closefields;
using namespace testing_support;

namespace {

CosetLabel varpi_label(const Side& side, const Cochar& mu) {
  const Matrix I = identity_matrix(*side.level_ring(), side.n);
  return make_label(side, mu, I, I);
}

// A random (a, b) in Gamma_mu built from the congruence conditions, then
// confirmed by in_gamma.
std::pair<Matrix, Matrix> random_gamma_pair(const Side& side, const Cochar& mu, Rng& rng) {
  const Ring& R = *side.level_ring();
  const int m = side.level;
  while (true) {
    Matrix a = zero_matrix(R, side.n), b = zero_matrix(R, side.n);
    for (int i = 0; i < side.n; ++i)
      for (int j = 0; j < side.n; ++j) {
        const int d = mu[j] - mu[i];
        const RingElement x = random_element(R, rng, m);
        if (d >= 0) {
          a.at(i, j) = x;
          b.at(i, j) = R.truncate(R.mul_pi_pow(x, d), m);
        } else {
          b.at(i, j) = x;
          a.at(i, j) = R.truncate(R.mul_pi_pow(x, -d), m);
        }
      }
    if (in_Go(a) && in_Go(b)) {
      REQUIRE(in_gamma(mu, a, b, m));
      return {a, b};
    }
  }
}

}  // namespace

TEST_CASE("pair builders") {
  const auto mixed2 = build_close_pair(PairMode::MixedEqual, 2, 1);
  const auto unr = build_extension_pair(mixed2, ExtKind::Unramified, 3);
  CHECK(unr.e == 1);
  CHECK(unr.E.level == 1);
  CHECK(unr.E.level_ring()->residue_field_size() == 8);
  CHECK(unr.Ep.level_ring()->residue_field_size() == 8);

  const auto ram = build_extension_pair(build_close_pair(PairMode::MixedEqual, 3, 1), ExtKind::Ramified, 2);
  CHECK(ram.e == 2);
  CHECK(ram.E.level == 2);
  CHECK(ram.Ep.level == 2);

  CHECK(code_of([&] { build_extension_pair(mixed2, ExtKind::Ramified, 3); }) == ErrorCode::GaloisConditionFailed);
  CHECK(code_of([&] { build_extension_pair(mixed2, ExtKind::Unramified, 2); }) == ErrorCode::SamePrime);
  CHECK(code_of([&] { build_close_pair(PairMode::MixedEqual, 3, 2); }) == ErrorCode::NotMClose);
  CHECK(code_of([&] { build_close_pair(PairMode::MixedEqual, 4, 1); }) == ErrorCode::ConfigInvalid);

  const auto ee = build_close_pair(PairMode::EqualEqual, 3, 2);
  CHECK(ee.Fp.spec.base.unit == std::vector<int64_t>{2, 1});
  CHECK_NOTHROW(build_extension_pair(ee, ExtKind::Ramified, 2));
  CHECK_NOTHROW(build_extension_pair(ee, ExtKind::Unramified, 2));
}

TEST_CASE("Kaz on labels: basis, bijection, round trip") {
  for (const auto& pair : {build_close_pair(PairMode::MixedEqual, 3, 1), build_close_pair(PairMode::EqualEqual, 2, 2)}) {
    const Transfer kaz = kaz_F(pair);
    auto F = coeff_field(5, 1);
    const CocharWindow window{0, 2, true};
    for (const auto& mu : window.cochars(2))
      CHECK(same_double_coset(kaz_label(kaz, varpi_label(pair.F, mu)), varpi_label(pair.Fp, mu)));

    const auto src = enumerate_labels(pair.F, window);
    const auto dst = enumerate_labels(pair.Fp, window);
    CHECK(src.size() == dst.size());
    std::vector<CosetLabel> images;
    for (const auto& L : src) {
      const CosetLabel K = kaz_label(kaz, L);
      CHECK(K.mu == L.mu);
      CHECK(same_double_coset(kaz_label(kaz.inverse(), K), L));
      images.push_back(K);
    }
    // Images are pairwise distinct double cosets, so Kaz is a bijection
    // between the enumerated bases.
    int collisions = 0;
    for (size_t i = 0; i < images.size(); ++i)
      for (size_t j = i + 1; j < images.size(); ++j)
        collisions += images[i].mu == images[j].mu && same_double_coset(images[i], images[j]);
    CHECK(collisions == 0);

    HeckeElement f = hecke_zero(pair.F, F);
    for (size_t i = 0; i < src.size(); i += 7) f.terms.push_back({src[i], F.get()->from_int(static_cast<int64_t>(i))});
    normalize(f);
    CHECK(hecke_equal(kaz_map(kaz.inverse(), kaz_map(kaz, f)), f));
    CHECK(code_of([&] { kaz_map(kaz, hecke_identity(pair.Fp, F)); }) == ErrorCode::SideMismatch);
  }
}

TEST_CASE("Kaz is independent of the representative") {
  Rng rng(31);
  const auto base = build_close_pair(PairMode::EqualEqual, 3, 2);
  const auto ext = build_extension_pair(build_close_pair(PairMode::MixedEqual, 3, 1), ExtKind::Ramified, 2);
  const std::vector<std::pair<Side, Transfer>> cases{{base.F, kaz_F(base)}, {ext.E, kaz_E(ext)}};
  for (const auto& [side, kaz] : cases)
    for (int t = 0; t < 10; ++t) {
      const Cochar mu{0, static_cast<int>(rng.below(3))};
      const CosetLabel L = random_label(side, mu, rng);
      const CosetLabel image = kaz_label(kaz, L);
      for (int r = 0; r < 3; ++r) {
        const auto [a, b] = random_gamma_pair(side, mu, rng);
        const CosetLabel other = make_label(side, mu, mat_mul(L.P, a), mat_mul(L.Q, b));
        REQUIRE(same_double_coset(other, L));
        CHECK(same_double_coset(kaz_label(kaz, other), image));
      }
    }
}

TEST_CASE("checks pass on small configurations") {
  CheckOptions o;
  o.window = 1;
  o.random_samples = 6;
  o.seed = 3;
  const auto mixed2 = build_close_pair(PairMode::MixedEqual, 2, 1);
  CHECK(check_lemma_conv(mixed2.F, 3, o).pass);
  CHECK(check_kaz_hom(mixed2, 3, o).pass);
  const auto unr = build_extension_pair(mixed2, ExtKind::Unramified, 3);
  CHECK(check_galois_equivariance(unr, o).pass);
  CHECK(check_main_diagram(unr, o).pass);
  CHECK(check_brauer_multiplicative(unr, o).pass);

  o.window = 2;
  const auto ram = build_extension_pair(build_close_pair(PairMode::MixedEqual, 3, 1), ExtKind::Ramified, 2);
  const Report main = check_main_diagram(ram, o);
  CHECK(main.pass);
  int nonzero = 0;
  for (const auto& s : main.samples) nonzero += !s.lhs["terms"].empty();
  CHECK(nonzero > 0);
}

TEST_CASE("truncated precision is surfaced, reports are deterministic") {
  const auto pair = build_close_pair(PairMode::MixedEqual, 3, 1);
  CheckOptions o;
  o.window = 2;
  o.random_samples = 4;
  o.max_exhaustive_labels = 0;
  o.working_precision = 2;
  const Report r = check_kaz_hom(pair, 2, o);
  CHECK_FALSE(r.pass);
  bool surfaced = false;
  for (const auto& s : r.samples)
    if (s.lhs.contains("error")) {
      surfaced = s.lhs["error"].get<std::string>().rfind("INSUFFICIENT_PRECISION", 0) == 0;
      break;
    }
  CHECK(surfaced);

  o.working_precision = 0;
  o.seed = 11;
  CHECK(check_kaz_hom(pair, 2, o).to_json().dump() == check_kaz_hom(pair, 2, o).to_json().dump());
  const auto ram = build_extension_pair(pair, ExtKind::Ramified, 2);
  CHECK(check_main_diagram(ram, o).to_json().dump() == check_main_diagram(ram, o).to_json().dump());
}
