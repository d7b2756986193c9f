#include "closefields/kazhdan.hpp"

#include <exception>

namespace closefields {

std::string to_string(PairMode mode) { return mode == PairMode::MixedEqual ? "mixed-equal" : "equal-equal"; }

namespace {

constexpr uint64_t kExhaustiveResidues = 256;
constexpr int kSampledPairs = 4096;

// Indices of level residues to test: all of them when small, else seeded.
std::vector<std::pair<uint64_t, uint64_t>> residue_pairs(uint64_t count, uint64_t seed) {
  std::vector<std::pair<uint64_t, uint64_t>> out;
  if (count <= kExhaustiveResidues) {
    for (uint64_t a = 0; a < count; ++a)
      for (uint64_t b = 0; b < count; ++b) out.emplace_back(a, b);
  } else {
    Rng rng(seed);
    for (int i = 0; i < kSampledPairs; ++i) out.emplace_back(rng.below(count), rng.below(count));
  }
  return out;
}

// iso is a ring isomorphism from.level -> to.level sending pi to pi.
void verify_iso(const Ring& A, const Ring& B, const RingIso& iso, int level, ErrorCode code) {
  const uint64_t count = A.residue_count(level);
  if (B.residue_count(level) != count) fail(code, "truncated rings have different sizes");
  auto at = [&](uint64_t i) { return A.truncate(A.residue_at(i, level), level); };
  auto map = [&](const RingElement& x) { return iso.apply(A, B, x); };
  if (!B.equal_mod(map(A.truncate(A.uniformizer(), level)), B.truncate(B.uniformizer(), level), level))
    fail(code, "uniformizer class is not preserved");
  if (!B.equal_mod(map(A.truncate(A.base_uniformizer(), level)), B.truncate(B.base_uniformizer(), level), level))
    fail(code, "base uniformizer class is not preserved");
  std::vector<bool> hit(count, false);
  for (uint64_t i = 0; i < count; ++i) {
    const uint64_t j = B.residue_index(map(at(i)), level);
    if (hit[j]) fail(code, "level map is not injective");
    hit[j] = true;
  }
  for (const auto& [i, j] : residue_pairs(count, 17)) {
    const RingElement x = at(i), y = at(j);
    if (!B.equal_mod(map(A.add(x, y)), B.add(map(x), map(y)), level) ||
        !B.equal_mod(map(A.mul(x, y)), B.mul(map(x), map(y)), level))
      fail(code, "level map is not a ring homomorphism at " + A.to_string(x) + ", " + A.to_string(y));
  }
}

std::vector<int64_t> twisting_unit(int64_t p) { return p == 2 ? std::vector<int64_t>{1, 1} : std::vector<int64_t>{2, 1}; }

template <class Fn>
std::vector<SampleRecord> run_samples(size_t count, Fn&& fn) {
  std::vector<SampleRecord> out(count);
  std::vector<std::exception_ptr> errors(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (int64_t i = 0; i < static_cast<int64_t>(count); ++i) {
    try {
      out[i] = fn(static_cast<size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

// Evaluates both sides of an identity. Library errors on either side are
// recorded in the sample instead of aborting the run.
template <class L, class R>
SampleRecord compare(Json input, L&& lhs, R&& rhs) {
  SampleRecord s;
  s.input = std::move(input);
  std::optional<HeckeElement> a, b;
  try {
    a = lhs();
    s.lhs = hecke_to_json(*a);
  } catch (const Error& e) {
    s.lhs = Json{{"error", e.what()}};
  }
  try {
    b = rhs();
    s.rhs = hecke_to_json(*b);
  } catch (const Error& e) {
    s.rhs = Json{{"error", e.what()}};
  }
  s.equal = a && b && hecke_equal(*a, *b);
  return s;
}

Report finish(std::string command, Json params, std::vector<SampleRecord> samples) {
  Report r;
  r.command = std::move(command);
  r.params = std::move(params);
  r.samples = std::move(samples);
  r.pass = true;
  for (const auto& s : r.samples) r.pass = r.pass && s.equal;
  return r;
}

CosetLabel varpi_label(const Side& side, const Cochar& mu) {
  const Matrix I = identity_matrix(*side.level_ring(), side.n);
  return make_label(side, mu, I, I);
}

ConvolveOptions convolve_options(const CheckOptions& opts) {
  ConvolveOptions c;
  c.working_precision = opts.working_precision;
  c.precision_cap = opts.precision_cap;
  return c;
}

Json window_params(const CheckOptions& opts) {
  return Json{{"window", opts.window}, {"random_samples", opts.random_samples}, {"seed", opts.seed}};
}

}  // namespace

// ---- pairs ------------------------------------------------------------------

ClosePair build_close_pair(PairMode mode, int64_t p, int m, int n) {
  if (!is_prime(p)) fail(ErrorCode::ConfigInvalid, "p must be prime");
  if (n < 1 || n > kMaxRank) fail(ErrorCode::ConfigInvalid, "matrix rank out of range");
  RingSpec f, fp;
  if (mode == PairMode::MixedEqual) {
    if (m != 1) fail(ErrorCode::NotMClose, "Z/p^m and F_p[t]/t^m are only isomorphic for m = 1");
    f = make_base(Model::Mixed, p, m);
    fp = make_base(Model::Equal, p, m);
  } else {
    f = make_base(Model::Equal, p, m);
    fp = make_base(Model::Equal, p, m, twisting_unit(p));
  }
  ClosePair pair{mode, m, Side{"F", f, m, n}, Side{"F'", fp, m, n}, build_lambda(f, fp, m)};
  verify_iso(*pair.F.level_ring(), *pair.Fp.level_ring(), pair.lambda, m, ErrorCode::NotMClose);
  return pair;
}

ExtensionPair build_extension_pair(const ClosePair& base, ExtKind kind, int l) {
  const RingSpec E = build_extension(base.F.spec, kind, l);
  const RingSpec Ep = build_extension(base.Fp.spec, kind, l);
  const int e = E.e();
  const int level = e * base.m;
  ExtensionPair pair{base, e, Side{"E", E, level, base.F.n}, Side{"E'", Ep, level, base.F.n},
                     build_pi(base.lambda, E, Ep)};
  const Ring& A = *pair.E.level_ring();
  const Ring& B = *pair.Ep.level_ring();
  verify_iso(A, B, pair.pi, level, ErrorCode::NotMClose);

  const GaloisGenerator& s = galois_for(A);
  const GaloisGenerator& sp = galois_for(B);
  const uint64_t count = A.residue_count(level);
  uint64_t fixed = 0;
  for (uint64_t i = 0; i < count; ++i) {
    const RingElement x = A.truncate(A.residue_at(i, level), level);
    const RingElement sx = s.apply(x);
    if (!B.equal_mod(pair.pi.apply(A, B, sx), sp.apply(pair.pi.apply(A, B, x)), level))
      fail(ErrorCode::GaloisConditionFailed, "Pi does not intertwine sigma and sigma' at " + A.to_string(x));
    if (A.equal_mod(sx, x, level)) {
      ++fixed;
      if (!A.in_base(x)) fail(ErrorCode::GaloisConditionFailed, "sigma fixes a residue outside the base");
    }
  }
  const Ring& Fb = *base.F.level_ring();
  if (fixed != Fb.residue_count(base.m)) fail(ErrorCode::GaloisConditionFailed, "sigma-fixed residues differ from o_F/p^m");
  return pair;
}

// ---- transfer -----------------------------------------------------------------

Transfer kaz_F(const ClosePair& pair) { return Transfer{pair.F, pair.Fp, pair.lambda}; }
Transfer kaz_E(const ExtensionPair& pair) { return Transfer{pair.E, pair.Ep, pair.pi}; }

CosetLabel kaz_label(const Transfer& t, const CosetLabel& L) {
  if (L.level != t.from.level || L.P.ring != t.from.level_ring().get())
    fail(ErrorCode::SideMismatch, "label does not live on side " + t.from.name);
  const Ring& A = *t.from.level_ring();
  const Ring& B = *t.to.level_ring();
  Matrix P = zero_matrix(B, t.to.n), Q = zero_matrix(B, t.to.n);
  for (int i = 0; i < t.to.n; ++i)
    for (int j = 0; j < t.to.n; ++j) {
      P.at(i, j) = t.iso.apply(A, B, L.P.at(i, j));
      Q.at(i, j) = t.iso.apply(A, B, L.Q.at(i, j));
    }
  return make_label(t.to, L.mu, P, Q);
}

HeckeElement kaz_map(const Transfer& t, const HeckeElement& f) {
  if (!(f.side == t.from)) fail(ErrorCode::SideMismatch, "element lives on " + f.side.name + ", transfer starts at " + t.from.name);
  HeckeElement r = hecke_zero(t.to, f.field);
  for (const auto& term : f.terms) r.terms.push_back({kaz_label(t, term.label), term.coeff});
  normalize(r);
  return r;
}

Json Report::to_json() const {
  Json j;
  j["command"] = command;
  j["params"] = params;
  Json arr = Json::array();
  for (size_t i = 0; i < samples.size(); ++i) {
    Json s;
    s["index"] = i;
    s["input"] = samples[i].input;
    s["lhs"] = samples[i].lhs;
    s["rhs"] = samples[i].rhs;
    s["equal"] = samples[i].equal;
    arr.push_back(std::move(s));
  }
  j["samples"] = std::move(arr);
  j["pass"] = pass;
  return j;
}

// ---- sampling -------------------------------------------------------------------

Matrix random_Go_level(const Side& side, Rng& rng) {
  const Ring& R = *side.level_ring();
  const uint64_t count = R.residue_count(side.level);
  while (true) {
    Matrix A = zero_matrix(R, side.n);
    for (int i = 0; i < side.n; ++i)
      for (int j = 0; j < side.n; ++j) A.at(i, j) = R.truncate(R.residue_at(rng.below(count), side.level), side.level);
    if (in_Go(A)) return A;
  }
}

CosetLabel random_label(const Side& side, const Cochar& mu, Rng& rng) {
  const Matrix x = random_Go_level(side, rng);
  const Matrix y = random_Go_level(side, rng);
  return make_label(side, mu, x, y);
}

std::vector<HeckeElement> sigma_invariant_family(const ExtensionPair& pair, int window, int random, uint64_t seed,
                                                 uint64_t budget, bool all_orbit_sums) {
  const Side& E = pair.E;
  const Side& F = pair.base.F;
  auto field = coeff_field(E.spec.l, 1);
  const auto cochars = CocharWindow{0, window, true}.cochars(E.n);
  const auto base_cochars = CocharWindow{0, window / pair.e, true}.cochars(F.n);
  std::vector<HeckeElement> out;
  if (all_orbit_sums) {
    for (const auto& mu : cochars)
      for (const auto& L : enumerate_sigma_orbits(E, mu, budget)) out.push_back(sigma_orbit_sum(E, field, L));
  } else {
    out.push_back(hecke_identity(E, field));
    for (const auto& mu : cochars) out.push_back(sigma_orbit_sum(E, field, varpi_label(E, mu)));
    for (const auto& nu : base_cochars)
      for (const auto& L : enumerate_labels(F, nu, budget)) out.push_back(hecke_basis(E, field, embed_label(F, E, L)));
  }
  Rng rng(seed);
  for (int i = 0; i < random; ++i) {
    Cochar mu;
    if (i % 2 == 0) {
      mu = base_cochars[rng.below(base_cochars.size())];
      for (int& x : mu) x *= pair.e;
    } else {
      mu = cochars[rng.below(cochars.size())];
    }
    out.push_back(sigma_orbit_sum(E, field, random_label(E, mu, rng)));
  }
  return out;
}

// ---- checks ---------------------------------------------------------------------

Report check_lemma_conv(const Side& side, int l, const CheckOptions& opts) {
  auto field = coeff_field(l, 1);
  const auto cochars = CocharWindow{0, opts.window, true}.cochars(side.n);
  const ConvolveOptions copts = convolve_options(opts);
  const Ring& R = *side.level_ring();
  const Matrix I = identity_matrix(R, side.n);

  struct Case {
    int identity;
    Cochar lam, mu;
    Matrix x1, x2;
  };
  std::vector<Case> cases;
  for (const auto& lam : cochars)
    for (const auto& mu : cochars) cases.push_back({1, lam, mu, I, I});
  Rng rng(opts.seed);
  std::vector<Matrix> xs;
  for (int i = 0; i < opts.random_samples; ++i) xs.push_back(random_Go_level(side, rng));
  for (const auto& lam : cochars)
    for (const auto& x1 : xs)
      for (const auto& x2 : xs) cases.push_back({2, lam, {}, x1, x2});

  auto samples = run_samples(cases.size(), [&](size_t i) {
    const Case& c = cases[i];
    auto t = [&](const Cochar& mu) { return hecke_basis(side, field, varpi_label(side, mu)); };
    if (c.identity == 1) {
      Cochar sum(c.lam.size());
      for (size_t k = 0; k < sum.size(); ++k) sum[k] = c.lam[k] + c.mu[k];
      return compare(Json{{"identity", 1}, {"lambda", c.lam}, {"mu", c.mu}},
                     [&] { return convolve(t(c.lam), t(c.mu), copts); }, [&] { return t(sum); });
    }
    return compare(
        Json{{"identity", 2}, {"lambda", c.lam}, {"x1", matrix_to_json(c.x1, side.level)}, {"x2", matrix_to_json(c.x2, side.level)}},
        [&] {
          // t_{x1 varpi x2}, with the double coset found by Cartan on the product.
          const Ring& W = *side.ring_at(side.level + spread(c.lam));
          const Matrix g = mat_mul(mat_mul(mat_lift(mat_import(W, c.x1)), varpi_mu(W, c.lam).M), mat_lift(mat_import(W, c.x2)));
          return hecke_basis(side, field, label_of(side, GroupMatrix{0, g}));
        },
        [&] {
          const auto t1 = hecke_basis(side, field, make_label(side, Cochar(side.n, 0), c.x1, I));
          const auto t2 = hecke_basis(side, field, make_label(side, Cochar(side.n, 0), c.x2, I));
          return convolve(convolve(t1, t(c.lam), copts), t2, copts);
        });
  });
  Json params = window_params(opts);
  params["side"] = side_to_json(side);
  params["l"] = l;
  return finish("check lemma-conv", std::move(params), std::move(samples));
}

Report check_kaz_hom(const ClosePair& pair, int l, const CheckOptions& opts) {
  auto field = coeff_field(l, 1);
  const Side& F = pair.F;
  const Transfer kaz = kaz_F(pair);
  const ConvolveOptions copts = convolve_options(opts);
  const CocharWindow window{0, opts.window, true};
  const auto cochars = window.cochars(F.n);
  const Matrix I = identity_matrix(*F.level_ring(), F.n);
  const Cochar zero(F.n, 0);

  auto hom_sample = [&](const CosetLabel& a, const CosetLabel& b) {
    const auto f = hecke_basis(F, field, a);
    const auto g = hecke_basis(F, field, b);
    return compare(Json{{"f", label_to_json(a)}, {"g", label_to_json(b)}},
                   [&] { return kaz_map(kaz, convolve(f, g, copts)); },
                   [&] { return convolve(kaz_map(kaz, f), kaz_map(kaz, g), copts); });
  };

  // Coverage: all ordered label pairs when the window is small. Otherwise,
  // when G(o/p^m) is enumerable, every product t_{x varpi_lam y} * t_{x' varpi_mu y'}
  // is t_x (t_{varpi_lam z} * t_mu) t_{y'} with z = y x', so the sweep over
  // (lam, z, mu) plus the translation identities covers all pairs. Else seeded.
  std::string coverage = "sampled";
  std::vector<CosetLabel> labels;
  const std::vector<Matrix>* group = nullptr;
  try {
    labels = enumerate_labels(F, window, opts.budget);
    if (labels.size() <= opts.max_exhaustive_labels) coverage = "all-pairs";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::BudgetExceeded) throw;
  }
  if (coverage != "all-pairs") {
    try {
      group = &level_group(F, opts.budget);
      coverage = "translation-reduced";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BudgetExceeded) throw;
    }
  }

  std::vector<SampleRecord> samples;
  size_t pair_count = 0;
  if (coverage == "all-pairs") {
    const size_t L = labels.size();
    pair_count = L * L;
    samples = run_samples(L * L, [&](size_t idx) { return hom_sample(labels[idx / L], labels[idx % L]); });
  } else if (coverage == "translation-reduced") {
    const size_t C = cochars.size(), Z = group->size();
    const size_t sweep = C * Z * C;
    const size_t trans = static_cast<size_t>(opts.random_samples);
    Rng rng(opts.seed);
    std::vector<std::pair<Matrix, CosetLabel>> translations;
    for (size_t i = 0; i < trans; ++i) {
      Matrix x = random_Go_level(F, rng);
      translations.emplace_back(std::move(x), random_label(F, cochars[i % C], rng));
    }
    pair_count = sweep;
    samples = run_samples(sweep + 2 * trans, [&](size_t idx) {
      if (idx < sweep) {
        const size_t a = idx / (Z * C), z = (idx / C) % Z, b = idx % C;
        return hom_sample(make_label(F, cochars[a], I, inverse_Go((*group)[z])), varpi_label(F, cochars[b]));
      }
      const size_t t = (idx - sweep) / 2;
      const auto& [x, L] = translations[t];
      const CosetLabel tx = make_label(F, zero, x, I);
      return (idx - sweep) % 2 == 0 ? hom_sample(tx, L) : hom_sample(L, tx);
    });
  } else {
    labels.clear();
    for (const auto& mu : cochars) labels.push_back(varpi_label(F, mu));
    Rng rng(opts.seed);
    for (int i = 0; i < opts.random_samples; ++i)
      labels.push_back(random_label(F, cochars[static_cast<size_t>(i) % cochars.size()], rng));
    const size_t L = labels.size();
    pair_count = L * L;
    samples = run_samples(L * L, [&](size_t idx) { return hom_sample(labels[idx / L], labels[idx % L]); });
  }
  Json params = window_params(opts);
  params["mode"] = to_string(pair.mode);
  params["m"] = pair.m;
  params["l"] = l;
  params["F"] = side_to_json(F);
  params["F'"] = side_to_json(pair.Fp);
  params["coverage"] = coverage;
  params["products"] = pair_count;
  return finish("check kaz-hom", std::move(params), std::move(samples));
}

namespace {

Json extension_params(const ExtensionPair& pair, const CheckOptions& opts) {
  Json params = window_params(opts);
  params["mode"] = to_string(pair.base.mode);
  params["m"] = pair.base.m;
  params["e"] = pair.e;
  params["E"] = side_to_json(pair.E);
  params["E'"] = side_to_json(pair.Ep);
  return params;
}

}  // namespace

Report check_galois_equivariance(const ExtensionPair& pair, const CheckOptions& opts) {
  auto field = coeff_field(pair.E.spec.l, 1);
  const Transfer kaz = kaz_E(pair);
  const auto cochars = CocharWindow{0, opts.window, true}.cochars(pair.E.n);
  std::vector<CosetLabel> labels;
  for (const auto& mu : cochars) labels.push_back(varpi_label(pair.E, mu));
  Rng rng(opts.seed);
  for (int i = 0; i < opts.random_samples; ++i)
    labels.push_back(random_label(pair.E, cochars[rng.below(cochars.size())], rng));
  auto samples = run_samples(labels.size(), [&](size_t i) {
    const auto f = hecke_basis(pair.E, field, labels[i]);
    return compare(label_to_json(labels[i]), [&] { return kaz_map(kaz, sigma_act(f)); },
                   [&] { return sigma_act(kaz_map(kaz, f)); });
  });
  return finish("check galois-equivariance", extension_params(pair, opts), std::move(samples));
}

Report check_main_diagram(const ExtensionPair& pair, const CheckOptions& opts) {
  const auto family = sigma_invariant_family(pair, opts.window, opts.random_samples, opts.seed, opts.budget,
                                             opts.all_orbit_sums);
  const Transfer kE = kaz_E(pair);
  const Transfer kF = kaz_F(pair.base);
  auto samples = run_samples(family.size(), [&](size_t i) {
    const HeckeElement& h = family[i];
    return compare(hecke_to_json(h), [&] { return kaz_map(kF, brauer_restrict(h, pair.base.F, std::nullopt, opts.budget)); },
                   [&] { return brauer_restrict(kaz_map(kE, h), pair.base.Fp, std::nullopt, opts.budget); });
  });
  Json params = extension_params(pair, opts);
  params["family"] = opts.all_orbit_sums ? "all-orbit-sums" : "structured";
  params["elements"] = family.size();
  return finish("check main-diagram", std::move(params), std::move(samples));
}

Report check_brauer_multiplicative(const ExtensionPair& pair, const CheckOptions& opts) {
  const auto family = sigma_invariant_family(pair, opts.window, opts.random_samples, opts.seed, opts.budget, false);
  const ConvolveOptions copts = convolve_options(opts);
  // Even samples draw from the structured part, whose restrictions are
  // mostly nonzero; odd samples from the whole family.
  const size_t structured = family.size() - static_cast<size_t>(opts.random_samples);
  Rng rng(opts.seed ^ 0x5bd1e995ULL);
  std::vector<std::pair<size_t, size_t>> pairs;
  for (int i = 0; i < opts.random_samples; ++i) {
    const size_t range = i % 2 == 0 ? structured : family.size();
    pairs.emplace_back(rng.below(range), rng.below(range));
  }
  const Side& F = pair.base.F;
  auto samples = run_samples(pairs.size(), [&](size_t i) {
    const HeckeElement& f = family[pairs[i].first];
    const HeckeElement& g = family[pairs[i].second];
    return compare(Json{{"f", hecke_to_json(f)}, {"g", hecke_to_json(g)}},
                   [&] { return brauer_restrict(convolve(f, g, copts), F, std::nullopt, opts.budget); },
                   [&] {
                     return convolve(brauer_restrict(f, F, std::nullopt, opts.budget),
                                     brauer_restrict(g, F, std::nullopt, opts.budget), copts);
                   });
  });
  return finish("check brauer-multiplicative", extension_params(pair, opts), std::move(samples));
}

}  // namespace closefields
