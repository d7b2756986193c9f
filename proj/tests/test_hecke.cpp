#include "closefields/hecke.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace closefields;
using namespace testing_support;

namespace {

Side mixed_side(int64_t p, int level = 1) { return Side{"F", make_base(Model::Mixed, p, 1), level, 2}; }

HeckeElement t_mu(const Side& side, const std::shared_ptr<const CoeffField>& F, const Cochar& mu) {
  const Ring& R = *side.level_ring();
  return hecke_basis(side, F, make_label(side, mu, identity_matrix(R, side.n), identity_matrix(R, side.n)));
}

}  // namespace

TEST_CASE("identity and lemma identities") {
  for (int64_t p : {2, 3}) {
    const Side side = mixed_side(p);
    auto F = coeff_field(p == 2 ? 3 : 2, 1);
    const auto one = hecke_identity(side, F);
    const auto window = CocharWindow{0, 2, true}.cochars(2);
    for (const auto& L : enumerate_labels(side, CocharWindow{0, 1, true})) {
      const auto f = hecke_basis(side, F, L);
      CHECK(hecke_equal(convolve(one, f), f));
      CHECK(hecke_equal(convolve(f, one), f));
    }
    for (const auto& lam : window)
      for (const auto& mu : window) {
        Cochar sum{lam[0] + mu[0], lam[1] + mu[1]};
        CHECK(hecke_equal(convolve(t_mu(side, F, lam), t_mu(side, F, mu)), t_mu(side, F, sum)));
      }
  }
}

TEST_CASE("convolution coefficients match the coset-count oracle") {
  for (int64_t p : {2, 3}) {
    const Side side = mixed_side(p);
    auto F = coeff_field(5, 1);
    const auto labels = enumerate_labels(side, CocharWindow{0, 1, true});
    Rng rng(static_cast<uint64_t>(p) + 100);
    for (int t = 0; t < 12; ++t) {
      const auto& a = labels[rng.below(labels.size())];
      const auto& b = labels[rng.below(labels.size())];
      const int w = required_precision(1, spread(a.mu) + spread(b.mu)) + 3;
      const auto counts = basis_product(side, a, b, w, true);
      uint64_t mass = 0;
      for (const auto& c : counts) {
        CHECK(c.count == oracle_coefficient(side, a, b, c.label, w));
        mass += c.count * left_coset_count(side, c.label.mu);
      }
      CHECK(mass == left_coset_count(side, a.mu) * left_coset_count(side, b.mu));
    }
  }
}

TEST_CASE("associativity, serial reference and precision errors") {
  const Side side = mixed_side(3);
  auto F = coeff_field(2, 1);
  const auto labels = enumerate_labels(side, CocharWindow{0, 1, true});
  Rng rng(77);
  for (int t = 0; t < 6; ++t) {
    const auto f = hecke_add(hecke_basis(side, F, labels[rng.below(labels.size())]),
                             hecke_basis(side, F, labels[rng.below(labels.size())]));
    const auto g = hecke_basis(side, F, labels[rng.below(labels.size())]);
    const auto h = hecke_basis(side, F, labels[rng.below(labels.size())]);
    CHECK(hecke_equal(convolve(convolve(f, g), h), convolve(f, convolve(g, h))));
    CHECK(hecke_equal(convolve(f, g), convolve_serial(f, g)));
  }
  const auto a = t_mu(side, F, {0, 2});
  ConvolveOptions low;
  low.working_precision = 4;
  CHECK(code_of([&] { convolve(a, a, low); }) == ErrorCode::InsufficientPrecision);
  low.working_precision = 5;
  CHECK_NOTHROW(convolve(a, a, low));

  const Side other = mixed_side(2);
  CHECK(code_of([&] { convolve(a, hecke_identity(other, F)); }) == ErrorCode::SideMismatch);
}

TEST_CASE("Galois action on the extension Hecke algebra") {
  auto Es = build_extension(make_base(Model::Equal, 3, 1), ExtKind::Ramified, 2);
  const Side E{"E", Es, 2, 2};
  auto F = coeff_field(2, 1);
  const auto tE = t_mu(E, F, {0, 1});
  const auto s = sigma_act(tE);
  // Oracle: the label of diag(1, -pi), computed through Cartan.
  auto R = E.ring_at(6);
  GroupMatrix d = varpi_mu(*R, {0, 1});
  d.M.at(1, 1) = R->neg(d.M.at(1, 1));
  CHECK(s.terms.size() == 1);
  CHECK(same_double_coset(s.terms[0].label, label_of(E, d)));
  CHECK(hecke_equal(sigma_act(s), tE));

  CHECK(is_sigma_invariant(hecke_identity(E, F)));
  CHECK(sigma_orbit_size(E, identity_label(E)) == 1);

  // Free orbits exist and their sums are invariant.
  Rng rng(4);
  int free_found = 0;
  for (int t = 0; t < 40; ++t) {
    const Matrix x = random_Go(*R, rng, 2), y = random_Go(*R, rng, 2);
    const Cochar mu{0, static_cast<int>(rng.below(3))};
    const CosetLabel L = label_of(E, GroupMatrix{0, mat_mul(mat_mul(x, varpi_mu(*R, mu).M), inverse_Go(y))});
    const int r = sigma_orbit_size(E, L);
    CHECK((r == 1 || r == 2));
    const auto sum = sigma_orbit_sum(E, F, L);
    CHECK(static_cast<int>(sum.terms.size()) == r);
    CHECK(is_sigma_invariant(sum));
    if (r == 2) {
      ++free_found;
      CHECK_FALSE(is_sigma_invariant(hecke_basis(E, F, L)));
    }
    const auto f = hecke_basis(E, F, L);
    CHECK(hecke_equal(sigma_act(sigma_act(f)), f));
  }
  CHECK(free_found > 0);

  CHECK(code_of([&] { sigma_act(hecke_identity(mixed_side(3), F)); }) == ErrorCode::SideMismatch);
}

TEST_CASE("sigma is multiplicative on samples") {
  auto Es = build_extension(make_base(Model::Mixed, 2, 1), ExtKind::Unramified, 3);
  const Side E{"E", Es, 1, 2};
  auto F = coeff_field(3, 1);
  auto R = E.ring_at(4);
  Rng rng(8);
  for (int t = 0; t < 5; ++t) {
    auto pick = [&] {
      const Matrix x = random_Go(*R, rng, 2), y = random_Go(*R, rng, 2);
      const Cochar mu{0, static_cast<int>(rng.below(2))};
      return hecke_basis(E, F, label_of(E, GroupMatrix{0, mat_mul(mat_mul(x, varpi_mu(*R, mu).M), inverse_Go(y))}));
    };
    const auto f = pick(), g = pick();
    CHECK(hecke_equal(sigma_act(convolve(f, g)), convolve(sigma_act(f), sigma_act(g))));
  }
}

TEST_CASE("Brauer restriction") {
  auto Es = build_extension(make_base(Model::Mixed, 3, 1), ExtKind::Ramified, 2);
  const Side E{"E", Es, 2, 2};
  const Side Fs = base_side_of(E, "F");
  CHECK(Fs.level == 1);
  auto F = coeff_field(2, 1);

  CHECK(hecke_equal(brauer_restrict(hecke_identity(E, F), Fs), hecke_identity(Fs, F)));
  CHECK_FALSE(is_sigma_invariant(t_mu(E, F, {0, 1})));
  CHECK(brauer_restrict(sigma_orbit_sum(E, F, t_mu(E, F, {0, 1}).terms[0].label), Fs).terms.empty());

  // mu = (0, 2): restricted support sits at xi = (0, 1); oracle scans the
  // whole F window and classifies embedded representatives through Cartan.
  const auto h = sigma_orbit_sum(E, F, make_label(E, {0, 2}, identity_matrix(*E.level_ring(), 2),
                                                  identity_matrix(*E.level_ring(), 2)));
  const auto br = brauer_restrict(h, Fs);
  CHECK_FALSE(br.terms.empty());
  auto Rf = Fs.ring_at(6);
  auto Re = E.ring_at(12);
  for (const auto& L : enumerate_labels(Fs, CocharWindow{0, 2, true})) {
    const GroupMatrix g = label_representative(Fs, L, 6);
    Matrix M = zero_matrix(*Re, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) M.at(i, j) = Re->embed_base(*Rf, g.M.at(i, j));
    const CosetLabel LE = label_of(E, GroupMatrix{2 * g.shift, M});
    CHECK(coefficient(br, L) == coefficient(h, LE));
  }

  CHECK(code_of([&] { brauer_restrict(hecke_basis(E, F, sigma_on_label(E, label_of(E, [&] {
                        Matrix x = identity_matrix(*E.ring_at(4), 2);
                        x.at(0, 1) = E.ring_at(4)->generator();
                        return GroupMatrix{0, mat_mul(x, varpi_mu(*E.ring_at(4), {0, 1}).M)};
                      }()))),
                                     Fs); }) == ErrorCode::NotSigmaInvariant);
  CHECK(code_of([&] { brauer_restrict(h, Fs, CocharWindow{0, 0, true}); }) == ErrorCode::WindowTooSmall);
}
