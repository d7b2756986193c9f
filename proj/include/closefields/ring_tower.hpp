#pragma once

// Truncated rings o/p^N of non-Archimedean local fields, their degree-l
// extensions, the closeness isomorphisms between two such towers and the
// matched Galois generators.
//
// A field is never represented globally. Every ring here is a finite
// quotient: Z/p^N (MIXED), F_p[t]/t^N (EQUAL), or a degree-l extension
// A[T]/(f) (unramified) or A[T]/(T^l - varpi) (totally ramified) of one of
// those. Precision is always counted in units of the ring's own
// distinguished uniformizer.

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "closefields/errors.hpp"

namespace closefields {

inline constexpr int kMaxDegree = 8;

enum class Model { Mixed, Equal };
enum class ExtKind { None, Unramified, Ramified };

std::string to_string(Model m);
std::string to_string(ExtKind k);

struct BaseRingSpec {
  Model model = Model::Equal;
  int64_t p = 2;
  int N = 1;  // precision level, in powers of varpi
  // Distinguished uniformizer varpi = unit * (t or p). Coefficients of the
  // unit in the t-adic (EQUAL) or p-adic (MIXED) digit expansion, low first.
  std::vector<int64_t> unit{1};

  bool operator==(const BaseRingSpec&) const = default;
};

// Either the base ring itself (kind None) or a degree-l extension of it.
struct RingSpec {
  BaseRingSpec base;
  ExtKind kind = ExtKind::None;
  int l = 1;
  // Unramified only: monic minimal polynomial, coefficients c_0..c_{l-1} as
  // canonical residues in {0..p-1}; the leading 1 is implicit.
  std::vector<int64_t> minimal_poly;

  int degree() const { return kind == ExtKind::None ? 1 : l; }
  int e() const { return kind == ExtKind::Ramified ? l : 1; }
  int precision() const { return e() * base.N; }
  // Copy with base precision raised so that the ring models o/pi^W, W >= w.
  RingSpec at_precision(int w) const;
  RingSpec base_spec() const;

  bool operator==(const RingSpec&) const = default;
};

// Element of a Ring: coordinates over the base in the power basis
// (1, T, ..., T^{d-1}), each a canonical base residue packed as an integer in
// [0, p^N) (MIXED: the residue itself; EQUAL: sum c_k p^k for the
// t-coefficients c_k). `prec` is the absolute precision: the element is
// known modulo pi^prec and coordinates beyond it are reduced to zero.
struct RingElement {
  std::array<int64_t, kMaxDegree> c{};
  int prec = 0;
  uint32_t ring = 0;

  bool operator==(const RingElement& o) const { return c == o.c && prec == o.prec && ring == o.ring; }
};

class Ring {
 public:
  explicit Ring(RingSpec spec);

  const RingSpec& spec() const { return spec_; }
  uint32_t id() const { return id_; }
  int precision() const { return W_; }
  int degree() const { return d_; }
  int e() const { return spec_.e(); }
  int64_t p() const { return spec_.base.p; }
  // Size of the residue field o/pi.
  int64_t residue_field_size() const { return q_; }
  bool is_extension() const { return spec_.kind != ExtKind::None; }

  RingElement zero() const;
  RingElement one() const;
  RingElement from_int(int64_t v) const;
  RingElement from_coords(const std::vector<int64_t>& coords, int prec) const;
  RingElement uniformizer() const { return pi_; }        // pi (T if ramified)
  RingElement base_uniformizer() const { return varpi_; }  // varpi embedded
  RingElement generator() const;                          // T
  RingElement pi_pow(int k) const;

  RingElement add(const RingElement& a, const RingElement& b) const;
  RingElement sub(const RingElement& a, const RingElement& b) const;
  RingElement neg(const RingElement& a) const;
  RingElement mul(const RingElement& a, const RingElement& b) const;
  RingElement inv_unit(const RingElement& a) const;
  // Product carrying the sharper absolute precision
  // min(prec(a) + v(b), prec(b) + v(a)) instead of min(prec(a), prec(b)).
  RingElement mul_tracked(const RingElement& a, const RingElement& b) const;
  RingElement pow(RingElement a, uint64_t k) const;

  // pi-adic valuation, capped at the element's precision.
  int valuation(const RingElement& a) const;
  bool is_unit(const RingElement& a) const { return a.prec > 0 && valuation(a) == 0; }
  bool is_zero(const RingElement& a) const { return valuation(a) >= a.prec; }
  RingElement mul_pi_pow(const RingElement& a, int k) const;
  // a / pi^k; requires valuation(a) >= k. Loses k digits of precision.
  RingElement div_pi_pow(const RingElement& a, int k) const;

  // Reduce modulo pi^r (precision becomes min(prec, r)).
  RingElement truncate(const RingElement& a, int r) const;
  // Reinterpret the canonical coordinates as an exact element (precision W).
  RingElement lift(const RingElement& a) const;
  bool equal_mod(const RingElement& a, const RingElement& b, int r) const;

  // Canonical representatives of o/pi^r, in index order.
  uint64_t residue_count(int r) const;
  uint64_t residue_index(const RingElement& a, int r) const;
  RingElement residue_at(uint64_t index, int r) const;

  // Exact translation of an element of another ring with the same base
  // arithmetic (used for raising/lowering working precision and for the
  // base -> extension inclusion).
  RingElement import(const Ring& from, const RingElement& a) const;
  // Inclusion of a base-ring element into this extension.
  RingElement embed_base(const Ring& base, const RingElement& a) const;
  bool in_base(const RingElement& a) const;

  // Base-ring level helpers (packed residues).
  int64_t base_residue_count(int k) const { return pow_p_[k]; }
  int64_t base_add(int64_t a, int64_t b) const;
  int64_t base_sub(int64_t a, int64_t b) const;
  int64_t base_mul(int64_t a, int64_t b) const;
  int base_valuation(int64_t a) const;
  int64_t base_truncate(int64_t a, int k) const;
  // Digits of a base residue in the varpi-adic expansion (length k).
  std::vector<int64_t> varpi_digits(int64_t a, int k) const;
  int64_t base_from_digits(const std::vector<int64_t>& digits) const;
  std::vector<int64_t> base_coefficients(int64_t a) const;  // t- or p-adic digits
  int64_t base_pack(const std::vector<int64_t>& coeffs) const;

  // Number of base digits of coordinate i that survive modulo pi^r.
  int coord_level(int i, int r) const;

  std::string to_string(const RingElement& a) const;
  void check(const RingElement& a) const {
    if (a.ring != id_) fail(ErrorCode::SpecMismatch, "element does not belong to this ring");
  }

 private:
  int64_t base_neg(int64_t a) const;
  int64_t base_div_varpi(int64_t a) const;
  int64_t base_inv_unit(int64_t a) const;
  int64_t base_mod_p(int64_t a) const;
  void reduce(RingElement& a) const;  // canonical truncation at a.prec

  RingSpec spec_;
  uint32_t id_ = 0;
  int d_ = 1;
  int W_ = 1;
  int Nb_ = 1;
  int64_t q_ = 2;
  std::vector<int64_t> pow_p_;
  int64_t modulus_ = 1;
  int64_t unit_ = 1;
  int64_t unit_inv_ = 1;
  int64_t varpi_base_ = 0;
  std::vector<int64_t> poly_;  // reduction T^d = -sum poly_[i] T^i (unramified)
  RingElement pi_;
  RingElement varpi_;
};

// Irreducibility over F_p of a monic polynomial with coefficients c_0..c_{d-1}.
bool is_irreducible_mod_p(const std::vector<int64_t>& coeffs, int64_t p);
// Smallest monic irreducible of degree l over F_p, ordered by sum c_i p^i.
std::vector<int64_t> smallest_irreducible(int64_t p, int l);
bool is_prime(int64_t n);

RingSpec make_base(Model model, int64_t p, int N, std::vector<int64_t> unit = {1});
RingSpec build_extension(const RingSpec& base, ExtKind kind, int l);

// A primitive l-th root of unity in the base ring: the Hensel lift of the
// smallest residue a != 1 with a^l = 1 in F_p.
RingElement primitive_root_of_unity(const Ring& base, int l);

// A level-`level` isomorphism between two truncated rings (Lambda on base
// rings, Pi on extensions): varpi-adic digits are transported to varpi'
// and T goes to T.
class RingIso {
 public:
  RingIso(RingSpec domain, RingSpec codomain, int level) : dom_(std::move(domain)), cod_(std::move(codomain)), level_(level) {}

  const RingSpec& domain() const { return dom_; }
  const RingSpec& codomain() const { return cod_; }
  int level() const { return level_; }  // in pi-units of the domain

  // x lives in `from` (a ring for domain()); result in `to`, precision
  // min(x.prec, level).
  RingElement apply(const Ring& from, const Ring& to, const RingElement& x) const;
  RingIso inverse() const { return RingIso(cod_, dom_, level_); }

 private:
  RingSpec dom_;
  RingSpec cod_;
  int level_;
};

RingIso build_lambda(const RingSpec& F, const RingSpec& Fp, int m);
RingIso build_pi(const RingIso& lambda, const RingSpec& E, const RingSpec& Ep);

enum class GaloisRule { Frobenius, ZetaScaling };

// Generator of Gal(E/F) acting on a truncated extension ring.
class GaloisGenerator {
 public:
  explicit GaloisGenerator(std::shared_ptr<const Ring> ring);

  GaloisRule rule() const { return rule_; }
  int order() const { return ring_->spec().l; }
  const Ring& ring() const { return *ring_; }
  const RingElement& image_of_generator() const { return image_T_; }
  const RingElement& zeta() const { return zeta_; }

  RingElement apply(const RingElement& x) const;
  RingElement apply_power(RingElement x, int k) const;

 private:
  std::shared_ptr<const Ring> ring_;
  GaloisRule rule_;
  RingElement image_T_;
  RingElement zeta_;
};

// Memoized rings by spec; write-once, safe to call concurrently. Rings
// returned here live for the rest of the process.
std::shared_ptr<const Ring> ring_for(const RingSpec& spec);
// Memoized Galois generator of a memoized extension ring.
const GaloisGenerator& galois_for(const Ring& ring);

}  // namespace closefields
