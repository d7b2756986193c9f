#pragma once

// The mod-l Hecke algebra H(G, K) of GL_n at principal congruence level:
// finitely supported functions on double cosets with F_{l^k} coefficients.

#include <memory>
#include <optional>
#include <vector>

#include "closefields/coeff_field.hpp"
#include "closefields/lattice_cartan.hpp"

namespace closefields {

std::shared_ptr<const CoeffField> coeff_field(int l, int k);

struct HeckeTerm {
  CosetLabel label;
  Coeff coeff = 0;
};

struct HeckeElement {
  Side side;
  std::shared_ptr<const CoeffField> field;
  std::vector<HeckeTerm> terms;  // sorted by label_less, nonzero, pairwise distinct double cosets

  const CoeffField& F() const { return *field; }
};

HeckeElement hecke_zero(const Side& side, std::shared_ptr<const CoeffField> field);
HeckeElement hecke_basis(const Side& side, std::shared_ptr<const CoeffField> field, const CosetLabel& label,
                         Coeff c = 1);
HeckeElement hecke_identity(const Side& side, std::shared_ptr<const CoeffField> field);

// Index of the term whose label is in the same double coset, or -1.
int find_term(const HeckeElement& f, const CosetLabel& label);
Coeff coefficient(const HeckeElement& f, const CosetLabel& label);
// Sort, merge coinciding double cosets, drop zeros.
void normalize(HeckeElement& f);

HeckeElement hecke_add(const HeckeElement& f, const HeckeElement& g);
HeckeElement hecke_scale(Coeff c, const HeckeElement& f);
bool hecke_equal(const HeckeElement& f, const HeckeElement& g);
std::string to_string(const HeckeElement& f);

struct ConvolveOptions {
  int working_precision = 0;  // 0: derive from the supports and retry on failure
  int precision_cap = 48;
};

// Structure constants of t_a * t_b: (label, count) with count the integer
// coefficient before reduction mod l.
struct LabelCount {
  CosetLabel label;
  uint64_t count = 0;
};
std::vector<LabelCount> basis_product(const Side& side, const CosetLabel& a, const CosetLabel& b, int w,
                                      bool parallel);

HeckeElement convolve(const HeckeElement& f, const HeckeElement& g, const ConvolveOptions& opts = {});
// Serial reference implementation of convolve.
HeckeElement convolve_serial(const HeckeElement& f, const HeckeElement& g, const ConvolveOptions& opts = {});

bool is_extension_side(const Side& side);
HeckeElement sigma_act(const HeckeElement& f);
HeckeElement sigma_orbit_sum(const Side& side, std::shared_ptr<const CoeffField> field, const CosetLabel& label);
int sigma_orbit_size(const Side& side, const CosetLabel& label);
bool is_sigma_invariant(const HeckeElement& f);

// The base side of an extension side (level divided by e).
Side base_side_of(const Side& ext, const std::string& name);
// Labels nu with e*nu in the support's cocharacters.
std::vector<Cochar> brauer_support_cochars(const HeckeElement& f);
// Restriction of a sigma-invariant function on G_E to G_F.
HeckeElement brauer_restrict(const HeckeElement& f, const Side& base, const std::optional<CocharWindow>& window = {},
                             uint64_t budget = kDefaultBudget);
// Inclusion of an F-label into E.
CosetLabel embed_label(const Side& base, const Side& ext, const CosetLabel& L);

}  // namespace closefields
