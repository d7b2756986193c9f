// Acceptance run: one PASS/FAIL line per criterion, each under a pinned time
// limit. `acceptance 4 6` runs only the listed criteria.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

using namespace closefields;
using namespace testing_support;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void note(Outcome& o, bool cond, const std::string& what) {
  if (!cond) {
    o.ok = false;
    o.detail += " [failed: " + what + "]";
  }
}

int count_failures(const Report& r) {
  int bad = 0;
  for (const auto& s : r.samples) bad += !s.equal;
  return bad;
}

const ExtensionPair& unramified() {
  static const auto pair = build_extension_pair(build_close_pair(PairMode::MixedEqual, 2, 1), ExtKind::Unramified, 3);
  return pair;
}

const ExtensionPair& ramified() {
  static const auto pair = build_extension_pair(build_close_pair(PairMode::MixedEqual, 3, 1), ExtKind::Ramified, 2);
  return pair;
}

HeckeElement basis(const Side& side, const std::shared_ptr<const CoeffField>& F, const CosetLabel& L) {
  return hecke_basis(side, F, L);
}

// ---- 1 ---------------------------------------------------------------------------

Outcome cartan_oracle() {
  Outcome o;
  Rng rng(500);
  int checked = 0, by_rank[2] = {0, 0}, skipped = 0;
  for (int trial = 0; checked < 600 && trial < 3000; ++trial) {
    const int64_t p = trial % 2 ? 3 : 2;
    const int n = 2 + (trial / 2) % 2;
    const Model model = (trial / 4) % 2 ? Model::Mixed : Model::Equal;
    const int W = 3 + static_cast<int>(rng.below(4));
    auto R = ring_for(make_base(model, p, W));
    const Matrix M = random_valued(*R, rng, n, 2);
    CartanResult c;
    try {
      c = smith_cartan(GroupMatrix{0, M}, 1);
    } catch (const Error& e) {
      note(o, e.code() == ErrorCode::InsufficientPrecision, "unexpected error " + std::string(e.what()));
      ++skipped;
      continue;
    }
    ++checked;
    ++by_rank[n - 2];
    int acc = 0;
    for (int k = 1; k <= n; ++k) {
      acc += c.mu[k - 1];
      note(o, minor_valuation(M, k) == std::min(acc, W), "minor valuations");
    }
    const Matrix back = mat_mul_tracked(mat_mul_tracked(c.x, diagonal_pi_powers(*R, c.mu)), c.y_inv);
    note(o, min_precision(back) >= W - spread(c.mu), "reconstruction precision");
    note(o, mat_equal_mod(back, M, min_precision(back)), "reconstruction");
  }
  note(o, checked >= 500, "fewer than 500 certified matrices");
  o.detail = fmt("%d matrices (%d of 2x2, %d of 3x3), %d uncertifiable skipped", checked, by_rank[0], by_rank[1], skipped) + o.detail;
  return o;
}

// ---- 2 ---------------------------------------------------------------------------

Outcome lemma_conv() {
  Outcome o;
  CheckOptions opts;
  opts.window = 2;
  opts.random_samples = 20;
  opts.seed = 1;
  for (int64_t p : {2, 3}) {
    const auto pair = build_close_pair(PairMode::MixedEqual, p, 1);
    const Report r = check_lemma_conv(pair.F, p == 2 ? 3 : 2, opts);
    int id2 = 0;
    for (const auto& s : r.samples) id2 += s.input["identity"] == 2;
    o.detail += fmt("p=%d: %zu samples (%d of identity 2), %d unequal; ", static_cast<int>(p), r.samples.size(), id2,
                    count_failures(r));
    note(o, r.pass, "p=" + std::to_string(p));
    note(o, id2 == 3 * 20 * 20, "identity 2 coverage");
  }
  return o;
}

// ---- 3 ---------------------------------------------------------------------------

Outcome hecke_axioms() {
  Outcome o;
  int units = 0, triples = 0, pairs = 0;
  for (int64_t p : {2, 3}) {
    const Side side = build_close_pair(PairMode::MixedEqual, p, 1).F;
    const int l = p == 2 ? 3 : 2;
    auto F = coeff_field(l, 1);
    const auto one = hecke_identity(side, F);
    for (const auto& L : enumerate_labels(side, CocharWindow{0, 2, true})) {
      const auto f = basis(side, F, L);
      note(o, hecke_equal(convolve(one, f), f) && hecke_equal(convolve(f, one), f), "unit");
      ++units;
    }

    const auto labels = enumerate_labels(side, CocharWindow{0, p == 2 ? 2 : 1, true});
    Rng rng(static_cast<uint64_t>(p) * 1000 + 3);
    auto random_element = [&] {
      HeckeElement f = hecke_zero(side, F);
      const int terms = 1 + static_cast<int>(rng.below(2));
      for (int t = 0; t < terms; ++t)
        f = hecke_add(f, hecke_basis(side, F, labels[rng.below(labels.size())], 1 + static_cast<Coeff>(rng.below(l - 1))));
      return f;
    };
    for (int t = 0; t < 50; ++t) {
      const auto f = random_element(), g = random_element(), h = random_element();
      note(o, hecke_equal(convolve(convolve(f, g), h), convolve(f, convolve(g, h))), "associativity");
      ++triples;
    }

    // Structure constants against the double-sum oracle over left cosets.
    const auto small = enumerate_labels(side, CocharWindow{0, 1, true});
    for (int t = 0; t < 25; ++t) {
      const auto& a = small[rng.below(small.size())];
      const auto& b = small[rng.below(small.size())];
      const int w = required_precision(1, spread(a.mu) + spread(b.mu)) + 3;
      const auto counts = basis_product(side, a, b, w, true);
      const auto product = convolve(basis(side, F, a), basis(side, F, b));
      uint64_t mass = 0;
      for (const auto& c : counts) {
        const uint64_t oracle = oracle_coefficient(side, a, b, c.label, w);
        note(o, c.count == oracle, "structure constant");
        note(o, coefficient(product, c.label) == F->from_int(static_cast<int64_t>(oracle % l)), "reduced coefficient");
        mass += c.count * left_coset_count(side, c.label.mu);
      }
      note(o, mass == left_coset_count(side, a.mu) * left_coset_count(side, b.mu), "coset mass");
      for (const auto& term : product.terms) {
        bool listed = false;
        for (const auto& c : counts) listed = listed || same_double_coset(c.label, term.label);
        note(o, listed, "product support");
      }
      ++pairs;
    }
  }
  o.detail = fmt("unit on %d labels, %d associativity triples, %d oracle pairs", units, triples, pairs) + o.detail;
  return o;
}

// ---- 4 ---------------------------------------------------------------------------

Outcome kaz_hom() {
  Outcome o;
  CheckOptions opts;
  opts.window = 2;
  opts.random_samples = 50;
  opts.seed = 1;
  struct Config {
    PairMode mode;
    int64_t p;
    int m;
  };
  for (const Config c : {Config{PairMode::MixedEqual, 2, 1}, Config{PairMode::MixedEqual, 3, 1},
                         Config{PairMode::EqualEqual, 2, 2}, Config{PairMode::EqualEqual, 3, 2}}) {
    const Report r = check_kaz_hom(build_close_pair(c.mode, c.p, c.m), c.p == 2 ? 3 : 2, opts);
    const std::string coverage = r.params["coverage"].get<std::string>();
    o.detail += fmt("%s p=%d m=%d %s %zu products; ", to_string(c.mode).c_str(), static_cast<int>(c.p), c.m,
                    coverage.c_str(), r.params["products"].get<size_t>());
    note(o, r.pass, to_string(c.mode) + " p=" + std::to_string(c.p));
    note(o, coverage != "sampled", "basis pairs only sampled");
  }
  return o;
}

// ---- 5 ---------------------------------------------------------------------------

Outcome galois() {
  Outcome o;
  CheckOptions opts;
  opts.window = 2;
  opts.random_samples = 50;
  opts.seed = 1;
  for (const auto* pair : {&unramified(), &ramified()}) {
    const Report r = check_galois_equivariance(*pair, opts);
    o.detail += fmt("e=%d: %zu samples, %d unequal; ", pair->e, r.samples.size(), count_failures(r));
    note(o, r.pass, "e=" + std::to_string(pair->e));
    note(o, r.samples.size() == 3 + 50, "sample count");
  }
  return o;
}

// ---- 6 ---------------------------------------------------------------------------

Outcome main_diagram() {
  Outcome o;
  CheckOptions opts;
  opts.random_samples = 25;
  opts.seed = 1;
  opts.all_orbit_sums = true;
  opts.budget = 50'000'000;
  for (const auto* pair : {&unramified(), &ramified()}) {
    opts.window = pair->e == 1 ? 1 : 2;
    const Report r = check_main_diagram(*pair, opts);
    int nonzero = 0;
    for (const auto& s : r.samples) nonzero += s.lhs.contains("terms") && !s.lhs["terms"].empty();
    o.detail += fmt("e=%d window %d: %zu orbit sums, %d with nonzero image, %d unequal; ", pair->e, opts.window,
                    r.samples.size(), nonzero, count_failures(r));
    note(o, r.pass, "e=" + std::to_string(pair->e));
    note(o, nonzero > 0, "all images zero");
  }
  return o;
}

// ---- 7 ---------------------------------------------------------------------------

Outcome brauer_multiplicative() {
  Outcome o;
  CheckOptions opts;
  opts.random_samples = 25;
  opts.seed = 1;
  for (const auto* pair : {&unramified(), &ramified()}) {
    opts.window = pair->e == 1 ? 1 : 2;
    const Report r = check_brauer_multiplicative(*pair, opts);
    int nonzero = 0;
    for (const auto& s : r.samples) nonzero += s.lhs.contains("terms") && !s.lhs["terms"].empty();
    o.detail += fmt("e=%d: %zu pairs, %d with nonzero Br(f*g), %d unequal; ", pair->e, r.samples.size(), nonzero,
                    count_failures(r));
    note(o, r.pass, "e=" + std::to_string(pair->e));
    note(o, r.samples.size() >= 25, "pair count");
  }
  return o;
}

// ---- 8 ---------------------------------------------------------------------------

Outcome tate_suite() {
  Outcome o;
  for (int l : {2, 3}) {
    const auto trivial = module(l, 1, identity_matrix(1));
    note(o, tate_cohomology(trivial, 0).dim == 1 && tate_cohomology(trivial, 1).dim == 1, "trivial module");
    const auto regular = module(l, 1, permutation_cycle(l));
    note(o, tate_cohomology(regular, 0).dim == 0 && tate_cohomology(regular, 1).dim == 0, "regular module");
  }
  Rng rng(88);
  int brute = 0;
  for (int t = 0; t < 50; ++t) {
    const int l = t % 2 ? 3 : 2;
    const int k = t % 5 == 0 ? 2 : 1;
    const auto A = random_module(l, k, rng, 5);
    const auto B = random_module(l, k, rng, 4);
    const CoeffField& F = A.F();
    const auto a0 = tate_cohomology(A, 0), a1 = tate_cohomology(A, 1);
    const auto sum = direct_sum(A, B);
    note(o, tate_cohomology(sum, 0).dim == a0.dim + tate_cohomology(B, 0).dim, "additivity 0");
    note(o, tate_cohomology(sum, 1).dim == a1.dim + tate_cohomology(B, 1).dim, "additivity 1");
    const FMat D = mat_sub(F, identity_matrix(A.dim), A.T);
    const FMat N = norm_operator(A);
    note(o, kernel(F, D).rows + rank(F, D) == A.dim && kernel(F, N).rows + rank(F, N) == A.dim, "rank-nullity");
    const auto tw = frobenius_twist(A);
    note(o, tate_cohomology(tw, 0).basis == map_entries(F, a0.basis, &CoeffField::inverse_frobenius), "twist 0");
    note(o, tate_cohomology(tw, 1).basis == map_entries(F, a1.basis, &CoeffField::inverse_frobenius), "twist 1");
    if (A.dim <= 4 && F.size() <= 4) {
      const auto [b0, b1] = brute_tate_dims(A);
      note(o, a0.dim == b0 && a1.dim == b1, "vector-count oracle");
      ++brute;
    }
  }
  o.detail = fmt("trivial and regular for l = 2, 3; 50 seeded modules, %d also by vector counting", brute) + o.detail;
  return o;
}

// ---- 9 ---------------------------------------------------------------------------

Outcome linkage_transport() {
  Outcome o;
  int instances = 0, yes = 0, no = 0, max_dim = 0;
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    const auto& pair = seed % 2 ? unramified() : ramified();
    const auto inst = make_linkage_instance(pair, 1 + static_cast<int>((seed / 2) % 2), 8, seed);
    const auto moved = transport_instance(pair, inst);
    max_dim = std::max({max_dim, inst.xi.dim, inst.rho.dim});
    const auto before = linkage_check(inst.xi, inst.rho, inst.br);
    const auto after = linkage_check(moved.xi, moved.rho, moved.br);
    note(o, before.linked == after.linked, "verdicts differ for seed " + std::to_string(seed));
    note(o, before.tate_dims == after.tate_dims, "Tate dimensions differ");
    for (auto v : before.linked) {
      note(o, v != Verdict::Undecided, "undecided verdict");
      (v == Verdict::Yes ? yes : no)++;
    }
    ++instances;
  }
  note(o, max_dim <= 8, "dimension bound");
  o.detail = fmt("%d instances, max dim %d, verdicts yes %d / no %d before and after transport", instances, max_dim, yes, no) +
             o.detail;
  return o;
}

// ---- 10 --------------------------------------------------------------------------

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

Outcome determinism() {
  Outcome o;
  CheckOptions opts;
  opts.window = 2;
  opts.random_samples = 6;
  opts.seed = 9;
  const auto mixed3 = build_close_pair(PairMode::MixedEqual, 3, 1);
  const std::vector<std::pair<const char*, std::function<Report()>>> suites{
      {"lemma-conv", [&] { return check_lemma_conv(mixed3.F, 2, opts); }},
      {"kaz-hom", [&] { return check_kaz_hom(unramified().base, 3, opts); }},
      {"galois-equivariance", [&] { return check_galois_equivariance(ramified(), opts); }},
      {"main-diagram", [&] { return check_main_diagram(ramified(), opts); }},
      {"brauer-multiplicative", [&] { return check_brauer_multiplicative(ramified(), opts); }},
  };
  int identical = 0;
  for (const auto& [name, run] : suites) {
    const bool same = run().to_json().dump() == run().to_json().dump();
    note(o, same, name);
    identical += same;
  }
  const auto a = make_linkage_instance(ramified(), 2, 8, 5), b = make_linkage_instance(ramified(), 2, 8, 5);
  const bool same_instance = module_to_json(a.xi).dump() == module_to_json(b.xi).dump() &&
                             module_to_json(a.rho).dump() == module_to_json(b.rho).dump();
  note(o, same_instance, "linkage instance");
  identical += same_instance;

  const std::string base = std::string(CLOSEFIELDS_ACCEPTANCE_DIR) + "/determinism_";
  const std::string cmd = std::string(CLOSEFIELDS_CLI) +
                          " check main-diagram --case ramified --p 3 --l 2 --m 1 --window 2 --seed 7 --samples 10 --out ";
  const int r1 = std::system((cmd + base + "a.json > /dev/null").c_str());
  const int r2 = std::system((cmd + base + "b.json > /dev/null").c_str());
  const std::string ja = slurp(base + "a.json"), jb = slurp(base + "b.json");
  const bool cli_same = r1 == 0 && r2 == 0 && !ja.empty() && ja == jb;
  note(o, cli_same, "CLI report");
  identical += cli_same;
  o.detail = fmt("%d of %zu re-runs byte-identical (5 suites, linkage instance, CLI report)", identical, suites.size() + 2) +
             o.detail;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "Cartan/SNF oracle", 10, cartan_oracle},
      {2, "convolution lemma", 60, lemma_conv},
      {3, "Hecke algebra axioms", 120, hecke_axioms},
      {4, "Kazhdan homomorphism", 120, kaz_hom},
      {5, "Galois equivariance", 120, galois},
      {6, "main diagram", 600, main_diagram},
      {7, "Brauer multiplicativity", 120, brauer_multiplicative},
      {8, "Tate suite", 10, tate_suite},
      {9, "linkage transport", 60, linkage_transport},
      {10, "determinism", 300, determinism},
  };
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  // Ring caches and extension pairs are shared; build them outside the timers.
  (void)unramified();
  (void)ramified();

  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out.ok = false;
      out.detail = std::string("error: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.limit_s;
    const bool pass = out.ok && in_time;
    failed += !pass;
    std::printf("criterion %2d %-24s %s  %7.1fs / %4.0fs%s  %s\n", c.id, c.name, pass ? "PASS" : "FAIL", secs, c.limit_s,
                in_time ? "" : " over limit", out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
