#pragma once

// Close pairs (F, F'), their degree-l extensions (E, E'), the Kazhdan
// transfer on labels and Hecke elements, and the verification suites.

#include <cstdint>
#include <string>
#include <vector>

#include "closefields/hecke.hpp"
#include "closefields/rng.hpp"
#include "closefields/serialize.hpp"

namespace closefields {

enum class PairMode { MixedEqual, EqualEqual };
std::string to_string(PairMode mode);

struct ClosePair {
  PairMode mode = PairMode::MixedEqual;
  int m = 1;
  Side F, Fp;
  RingIso lambda;
};

// mixed-equal: F = Q_p-like, F' = F_p((t)), m must be 1.
// equal-equal: F' has uniformizer u*t with u = 2 + t (p = 3) or 1 + t.
ClosePair build_close_pair(PairMode mode, int64_t p, int m, int n = 2);

struct ExtensionPair {
  ClosePair base;
  int e = 1;
  Side E, Ep;
  RingIso pi;
};

// Builds E/F and E'/F' of the same kind and degree l and verifies on the
// level rings that Pi is a ring isomorphism intertwining sigma and sigma'
// and that the sigma-fixed residues are exactly the base residues.
ExtensionPair build_extension_pair(const ClosePair& base, ExtKind kind, int l);

// Kaz from one side to another through a level isomorphism of the rings.
struct Transfer {
  Side from, to;
  RingIso iso;

  Transfer inverse() const { return Transfer{to, from, iso.inverse()}; }
};

Transfer kaz_F(const ClosePair& pair);
Transfer kaz_E(const ExtensionPair& pair);

CosetLabel kaz_label(const Transfer& t, const CosetLabel& L);
HeckeElement kaz_map(const Transfer& t, const HeckeElement& f);

struct SampleRecord {
  Json input, lhs, rhs;
  bool equal = false;
};

struct Report {
  std::string command;
  Json params;
  std::vector<SampleRecord> samples;
  bool pass = false;

  Json to_json() const;
};

struct CheckOptions {
  int window = 2;           // spread bound S of the anchored cocharacter window
  int random_samples = 50;  // seeded samples on top of the structured family
  uint64_t seed = 1;
  uint64_t budget = kDefaultBudget;
  int working_precision = 0;  // 0: derived per product
  int precision_cap = 48;
  size_t max_exhaustive_labels = 400;
  bool all_orbit_sums = false;  // main diagram over every sigma-orbit sum of the E window
};

// Both identities of the convolution lemma on side F: t_lam * t_mu =
// t_{lam+mu}, and t_{x1 varpi_lam x2} = t_{x1} * t_lam * t_{x2} for
// random_samples seeded x in G(o) (all ordered pairs).
Report check_lemma_conv(const Side& side, int l, const CheckOptions& opts);
// Kaz(f * g) = Kaz(f) * Kaz(g). Coverage, recorded in params: all ordered
// basis pairs of the F window if there are at most max_exhaustive_labels
// labels; else every t_{varpi_lam z} * t_mu with z in G(o/p^m) plus seeded
// translation pairs (t_x, t_L) and (t_L, t_x); else seeded labels.
Report check_kaz_hom(const ClosePair& pair, int l, const CheckOptions& opts);
// Kaz(sigma f) = sigma' Kaz(f) on the varpi_mu family and seeded labels.
Report check_galois_equivariance(const ExtensionPair& pair, const CheckOptions& opts);
// Kaz^F(Br(h)) = Br'(Kaz^E(h)) on sigma-invariant h.
Report check_main_diagram(const ExtensionPair& pair, const CheckOptions& opts);
// Br(f * g) = Br(f) * Br(g) on seeded sigma-invariant pairs.
Report check_brauer_multiplicative(const ExtensionPair& pair, const CheckOptions& opts);

// A random element of G(o) on the side, at the side's level.
Matrix random_Go_level(const Side& side, Rng& rng);
// A random label with cocharacter mu: label of x varpi_mu y^{-1}.
CosetLabel random_label(const Side& side, const Cochar& mu, Rng& rng);
// sigma-invariant elements on E: every orbit sum of the window when
// all_orbit_sums is set, else the structured part (identity, orbit sums of
// varpi_mu, embedded F-labels with e*nu in the window). Then `random` seeded
// orbit sums, half of them with mu divisible by e.
std::vector<HeckeElement> sigma_invariant_family(const ExtensionPair& pair, int window, int random, uint64_t seed,
                                                 uint64_t budget, bool all_orbit_sums = false);

}  // namespace closefields
