#include "closefields/ring_tower.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace closefields {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SpecMismatch: return "SPEC_MISMATCH";
    case ErrorCode::NotAUnit: return "NOT_A_UNIT";
    case ErrorCode::NotMClose: return "NOT_M_CLOSE";
    case ErrorCode::GaloisConditionFailed: return "GALOIS_CONDITION_FAILED";
    case ErrorCode::SamePrime: return "SAME_PRIME";
    case ErrorCode::KindMismatch: return "KIND_MISMATCH";
    case ErrorCode::InsufficientPrecision: return "INSUFFICIENT_PRECISION";
    case ErrorCode::BudgetExceeded: return "BUDGET_EXCEEDED";
    case ErrorCode::SideMismatch: return "SIDE_MISMATCH";
    case ErrorCode::NotSigmaInvariant: return "NOT_SIGMA_INVARIANT";
    case ErrorCode::WindowTooSmall: return "WINDOW_TOO_SMALL";
    case ErrorCode::NotOrderL: return "NOT_ORDER_L";
    case ErrorCode::MissingAction: return "MISSING_ACTION";
    case ErrorCode::DimBoundExceeded: return "DIM_BOUND_EXCEEDED";
    case ErrorCode::GeneratorNameMismatch: return "GENERATOR_NAME_MISMATCH";
    case ErrorCode::ConfigInvalid: return "CONFIG_INVALID";
    case ErrorCode::ParseError: return "PARSE_ERROR";
  }
  return "UNKNOWN";
}

std::string to_string(Model m) { return m == Model::Mixed ? "MIXED" : "EQUAL"; }

std::string to_string(ExtKind k) {
  switch (k) {
    case ExtKind::None: return "NONE";
    case ExtKind::Unramified: return "UNRAMIFIED";
    case ExtKind::Ramified: return "RAMIFIED";
  }
  return "NONE";
}

bool is_prime(int64_t n) {
  if (n < 2) return false;
  for (int64_t d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

RingSpec RingSpec::at_precision(int w) const {
  RingSpec s = *this;
  s.base.N = std::max(1, (w + e() - 1) / e());
  return s;
}

RingSpec RingSpec::base_spec() const {
  RingSpec s;
  s.base = base;
  return s;
}

namespace {

uint32_t spec_hash(const RingSpec& s) {
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](int64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= static_cast<uint64_t>(v >> (8 * i)) & 0xff;
      h *= 1099511628211ULL;
    }
  };
  mix(static_cast<int64_t>(s.base.model));
  mix(s.base.p);
  mix(s.base.N);
  for (auto u : s.base.unit) mix(u);
  mix(-7);
  mix(static_cast<int64_t>(s.kind));
  mix(s.l);
  for (auto c : s.minimal_poly) mix(c);
  return static_cast<uint32_t>(h ^ (h >> 32)) | 1u;
}

int64_t mulmod(int64_t a, int64_t b, int64_t m) {
  return static_cast<int64_t>((static_cast<__int128>(a) * b) % m);
}

int64_t powmod(int64_t a, int64_t k, int64_t m) {
  int64_t r = 1 % m;
  a %= m;
  while (k > 0) {
    if (k & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    k >>= 1;
  }
  return r;
}

}  // namespace

Ring::Ring(RingSpec spec) : spec_(std::move(spec)) {
  const auto& b = spec_.base;
  if (!is_prime(b.p)) fail(ErrorCode::ConfigInvalid, "p must be prime");
  if (b.N < 1) fail(ErrorCode::ConfigInvalid, "precision level must be >= 1");
  if (b.unit.empty() || b.unit[0] % b.p == 0) fail(ErrorCode::ConfigInvalid, "uniformizer unit must be a unit");
  d_ = spec_.degree();
  if (d_ > kMaxDegree) fail(ErrorCode::ConfigInvalid, "extension degree too large");
  Nb_ = b.N;
  W_ = spec_.precision();
  pow_p_.assign(Nb_ + 2, 1);
  for (int k = 1; k < Nb_ + 2; ++k) {
    if (pow_p_[k - 1] > (int64_t{1} << 60) / b.p) fail(ErrorCode::ConfigInvalid, "ring too large for 64-bit residues");
    pow_p_[k] = pow_p_[k - 1] * b.p;
  }
  modulus_ = pow_p_[Nb_];
  id_ = spec_hash(spec_);
  q_ = b.p;
  if (spec_.kind == ExtKind::Unramified) {
    for (int i = 1; i < spec_.l; ++i) q_ *= b.p;
    if (static_cast<int>(spec_.minimal_poly.size()) != spec_.l)
      fail(ErrorCode::ConfigInvalid, "minimal polynomial has wrong degree");
    poly_ = spec_.minimal_poly;
    for (auto& c : poly_) c = ((c % b.p) + b.p) % b.p;
  }

  std::vector<int64_t> ucoef(b.unit.begin(), b.unit.end());
  for (auto& c : ucoef) c = ((c % b.p) + b.p) % b.p;
  if (static_cast<int>(ucoef.size()) > Nb_) ucoef.resize(Nb_);
  unit_ = base_pack(ucoef);
  unit_inv_ = base_inv_unit(unit_);
  varpi_base_ = Nb_ >= 2 ? base_mul(unit_, b.p) : 0;

  varpi_ = zero();
  varpi_.c[0] = varpi_base_;
  varpi_.prec = W_;
  if (spec_.kind == ExtKind::Ramified) {
    pi_ = zero();
    pi_.c[1] = 1;
  } else {
    pi_ = varpi_;
  }
  reduce(pi_);
  reduce(varpi_);
}

// ---- base arithmetic --------------------------------------------------------

int64_t Ring::base_mod_p(int64_t a) const { return a % spec_.base.p; }

int64_t Ring::base_add(int64_t a, int64_t b) const {
  if (spec_.base.model == Model::Mixed) {
    int64_t s = a + b;
    return s >= modulus_ ? s - modulus_ : s;
  }
  const int64_t p = spec_.base.p;
  if (p == 2) return a ^ b;
  int64_t r = 0;
  for (int k = 0; k < Nb_ && (a | b); ++k) {
    r += ((a % p + b % p) % p) * pow_p_[k];
    a /= p;
    b /= p;
  }
  return r;
}

int64_t Ring::base_neg(int64_t a) const {
  if (spec_.base.model == Model::Mixed) return a == 0 ? 0 : modulus_ - a;
  const int64_t p = spec_.base.p;
  if (p == 2) return a;
  int64_t r = 0;
  for (int k = 0; k < Nb_ && a; ++k) {
    r += ((p - a % p) % p) * pow_p_[k];
    a /= p;
  }
  return r;
}

int64_t Ring::base_sub(int64_t a, int64_t b) const { return base_add(a, base_neg(b)); }

int64_t Ring::base_mul(int64_t a, int64_t b) const {
  if (a == 0 || b == 0) return 0;
  if (spec_.base.model == Model::Mixed) return mulmod(a, b, modulus_);
  const int64_t p = spec_.base.p;
  if (p == 2) {
    int64_t r = 0;
    for (int k = 0; k < Nb_ && b; ++k, b >>= 1)
      if (b & 1) r ^= a << k;
    return r & (modulus_ - 1);
  }
  std::array<int64_t, 64> da{}, db{}, dc{};
  int na = 0, nb = 0;
  for (; a && na < Nb_; ++na, a /= p) da[na] = a % p;
  for (; b && nb < Nb_; ++nb, b /= p) db[nb] = b % p;
  for (int i = 0; i < na; ++i) {
    if (!da[i]) continue;
    for (int j = 0; j < nb && i + j < Nb_; ++j) dc[i + j] += da[i] * db[j];
  }
  int64_t r = 0;
  for (int k = std::min(Nb_, na + nb) - 1; k >= 0; --k) r = r * p + dc[k] % p;
  return r;
}

int Ring::base_valuation(int64_t a) const {
  if (a == 0) return Nb_;
  int v = 0;
  while (a % spec_.base.p == 0) {
    a /= spec_.base.p;
    ++v;
  }
  return v;
}

int64_t Ring::base_truncate(int64_t a, int k) const {
  if (k >= Nb_) return a;
  if (k <= 0) return 0;
  return a % pow_p_[k];
}

int64_t Ring::base_div_varpi(int64_t a) const { return base_mul(a / spec_.base.p, unit_inv_); }

int64_t Ring::base_inv_unit(int64_t a) const {
  const int64_t p = spec_.base.p;
  const int64_t a0 = a % p;
  if (a0 == 0) fail(ErrorCode::NotAUnit, "base element is not a unit");
  const int64_t two = spec_.base.model == Model::Mixed ? 2 % modulus_ : 2 % p;
  int64_t y = powmod(a0, p - 2, p);
  for (int prec = 1; prec < Nb_; prec *= 2) y = base_mul(y, base_sub(two, base_mul(a, y)));
  return y;
}

std::vector<int64_t> Ring::base_coefficients(int64_t a) const {
  std::vector<int64_t> out(Nb_, 0);
  for (int k = 0; k < Nb_; ++k) {
    out[k] = a % spec_.base.p;
    a /= spec_.base.p;
  }
  return out;
}

int64_t Ring::base_pack(const std::vector<int64_t>& coeffs) const {
  int64_t r = 0;
  for (int k = std::min<int>(Nb_, coeffs.size()) - 1; k >= 0; --k) r = r * spec_.base.p + coeffs[k];
  return r;
}

std::vector<int64_t> Ring::varpi_digits(int64_t a, int k) const {
  std::vector<int64_t> digits(k, 0);
  for (int j = 0; j < k; ++j) {
    digits[j] = base_mod_p(a);
    a = base_div_varpi(base_sub(a, digits[j]));
  }
  return digits;
}

int64_t Ring::base_from_digits(const std::vector<int64_t>& digits) const {
  int64_t r = 0;
  for (int j = static_cast<int>(digits.size()) - 1; j >= 0; --j) r = base_add(base_mul(r, varpi_base_), digits[j]);
  return r;
}

// ---- extension arithmetic ---------------------------------------------------

int Ring::coord_level(int i, int r) const {
  if (spec_.kind != ExtKind::Ramified) return std::min(r, Nb_);
  const int l = spec_.l;
  return std::min(Nb_, r / l + (i < r % l ? 1 : 0));
}

void Ring::reduce(RingElement& a) const {
  a.prec = std::clamp(a.prec, 0, W_);
  for (int i = 0; i < d_; ++i) a.c[i] = base_truncate(a.c[i], coord_level(i, a.prec));
  for (int i = d_; i < kMaxDegree; ++i) a.c[i] = 0;
  a.ring = id_;
}

RingElement Ring::zero() const {
  RingElement z;
  z.prec = W_;
  z.ring = id_;
  return z;
}

RingElement Ring::one() const { return from_int(1); }

RingElement Ring::from_int(int64_t v) const {
  RingElement z = zero();
  if (spec_.base.model == Model::Mixed) {
    z.c[0] = ((v % modulus_) + modulus_) % modulus_;
  } else {
    z.c[0] = ((v % spec_.base.p) + spec_.base.p) % spec_.base.p;
  }
  reduce(z);
  return z;
}

RingElement Ring::from_coords(const std::vector<int64_t>& coords, int prec) const {
  if (static_cast<int>(coords.size()) > d_) fail(ErrorCode::SpecMismatch, "too many coordinates for ring degree");
  RingElement z = zero();
  for (size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] < 0 || coords[i] >= modulus_) fail(ErrorCode::SpecMismatch, "coordinate is not a canonical residue");
    z.c[i] = coords[i];
  }
  z.prec = prec;
  reduce(z);
  return z;
}

RingElement Ring::generator() const {
  RingElement z = zero();
  if (d_ == 1) fail(ErrorCode::KindMismatch, "base ring has no extension generator");
  z.c[1] = 1;
  reduce(z);
  return z;
}

RingElement Ring::pi_pow(int k) const { return mul_pi_pow(one(), k); }

RingElement Ring::add(const RingElement& a, const RingElement& b) const {
  check(a);
  check(b);
  RingElement r;
  for (int i = 0; i < d_; ++i) r.c[i] = base_add(a.c[i], b.c[i]);
  r.prec = std::min(a.prec, b.prec);
  reduce(r);
  return r;
}

RingElement Ring::neg(const RingElement& a) const {
  check(a);
  RingElement r;
  for (int i = 0; i < d_; ++i) r.c[i] = base_neg(a.c[i]);
  r.prec = a.prec;
  reduce(r);
  return r;
}

RingElement Ring::sub(const RingElement& a, const RingElement& b) const {
  check(a);
  check(b);
  RingElement r;
  for (int i = 0; i < d_; ++i) r.c[i] = base_sub(a.c[i], b.c[i]);
  r.prec = std::min(a.prec, b.prec);
  reduce(r);
  return r;
}

RingElement Ring::mul(const RingElement& a, const RingElement& b) const {
  check(a);
  check(b);
  RingElement r;
  r.prec = std::min(a.prec, b.prec);
  if (d_ == 1) {
    r.c[0] = base_mul(a.c[0], b.c[0]);
    reduce(r);
    return r;
  }
  std::array<int64_t, 2 * kMaxDegree> t{};
  for (int i = 0; i < d_; ++i) {
    if (!a.c[i]) continue;
    for (int j = 0; j < d_; ++j) {
      if (!b.c[j]) continue;
      t[i + j] = base_add(t[i + j], base_mul(a.c[i], b.c[j]));
    }
  }
  for (int k = 2 * d_ - 2; k >= d_; --k) {
    const int64_t top = t[k];
    if (!top) continue;
    t[k] = 0;
    if (spec_.kind == ExtKind::Ramified) {
      t[k - d_] = base_add(t[k - d_], base_mul(top, varpi_base_));
    } else {
      for (int i = 0; i < d_; ++i)
        if (poly_[i]) t[k - d_ + i] = base_sub(t[k - d_ + i], base_mul(top, poly_[i]));
    }
  }
  for (int i = 0; i < d_; ++i) r.c[i] = t[i];
  reduce(r);
  return r;
}

RingElement Ring::mul_tracked(const RingElement& a, const RingElement& b) const {
  const int pa = a.prec, pb = b.prec;
  RingElement x = a, y = b;
  x.prec = y.prec = W_;
  RingElement r = mul(x, y);
  r.prec = std::min({W_, pa + valuation(b), pb + valuation(a)});
  reduce(r);
  return r;
}

RingElement Ring::pow(RingElement a, uint64_t k) const {
  RingElement r = one();
  r.prec = a.prec;
  reduce(r);
  while (k > 0) {
    if (k & 1) r = mul(r, a);
    a = mul(a, a);
    k >>= 1;
  }
  return r;
}

RingElement Ring::inv_unit(const RingElement& a) const {
  check(a);
  if (!is_unit(a)) fail(ErrorCode::NotAUnit, "element " + to_string(a) + " is not a unit");
  RingElement y;
  if (spec_.kind == ExtKind::Unramified) {
    RingElement res = truncate(a, 1);
    y = pow(res, static_cast<uint64_t>(q_ - 2));
  } else {
    const int64_t p = spec_.base.p;
    y = zero();
    y.c[0] = powmod(a.c[0] % p, p - 2, p);
    y.prec = 1;
    reduce(y);
  }
  RingElement two = from_int(2);
  while (y.prec < a.prec) {
    const int np = std::min(2 * y.prec, a.prec);
    y.prec = np;
    RingElement at = truncate(a, np);
    y = mul(y, sub(two, mul(at, y)));
  }
  return y;
}

int Ring::valuation(const RingElement& a) const {
  check(a);
  int v = W_;
  if (spec_.kind == ExtKind::Ramified) {
    for (int i = 0; i < d_; ++i)
      if (a.c[i]) v = std::min(v, spec_.l * base_valuation(a.c[i]) + i);
  } else {
    for (int i = 0; i < d_; ++i)
      if (a.c[i]) v = std::min(v, base_valuation(a.c[i]));
  }
  return std::min(v, a.prec);
}

RingElement Ring::mul_pi_pow(const RingElement& a, int k) const {
  check(a);
  RingElement r = a;
  for (int s = 0; s < k; ++s) {
    if (spec_.kind == ExtKind::Ramified) {
      const int64_t wrap = base_mul(r.c[d_ - 1], varpi_base_);
      for (int i = d_ - 1; i > 0; --i) r.c[i] = r.c[i - 1];
      r.c[0] = wrap;
    } else {
      for (int i = 0; i < d_; ++i) r.c[i] = base_mul(r.c[i], varpi_base_);
    }
  }
  r.prec = std::min(W_, a.prec + k);
  reduce(r);
  return r;
}

RingElement Ring::div_pi_pow(const RingElement& a, int k) const {
  check(a);
  if (k == 0) return a;
  const int v = valuation(a);
  if (v < k) {
    if (v >= a.prec) fail(ErrorCode::InsufficientPrecision, "division by pi^k of an element known only modulo pi^" + std::to_string(a.prec));
    throw std::logic_error("div_pi_pow: element not divisible");
  }
  RingElement r = a;
  for (int s = 0; s < k; ++s) {
    if (spec_.kind == ExtKind::Ramified) {
      const int64_t low = base_div_varpi(r.c[0]);
      for (int i = 0; i + 1 < d_; ++i) r.c[i] = r.c[i + 1];
      r.c[d_ - 1] = low;
    } else {
      for (int i = 0; i < d_; ++i) r.c[i] = base_div_varpi(r.c[i]);
    }
  }
  r.prec = a.prec - k;
  reduce(r);
  return r;
}

RingElement Ring::truncate(const RingElement& a, int r) const {
  check(a);
  RingElement t = a;
  t.prec = std::min(a.prec, r);
  reduce(t);
  return t;
}

RingElement Ring::lift(const RingElement& a) const {
  check(a);
  RingElement t = a;
  t.prec = W_;
  return t;
}

bool Ring::equal_mod(const RingElement& a, const RingElement& b, int r) const {
  check(a);
  check(b);
  for (int i = 0; i < d_; ++i) {
    const int k = coord_level(i, r);
    if (base_truncate(a.c[i], k) != base_truncate(b.c[i], k)) return false;
  }
  return true;
}

uint64_t Ring::residue_count(int r) const {
  uint64_t n = 1;
  for (int i = 0; i < d_; ++i) n *= static_cast<uint64_t>(pow_p_[coord_level(i, r)]);
  return n;
}

uint64_t Ring::residue_index(const RingElement& a, int r) const {
  uint64_t idx = 0;
  for (int i = d_ - 1; i >= 0; --i) {
    const int k = coord_level(i, r);
    idx = idx * static_cast<uint64_t>(pow_p_[k]) + static_cast<uint64_t>(base_truncate(a.c[i], k));
  }
  return idx;
}

RingElement Ring::residue_at(uint64_t index, int r) const {
  RingElement z = zero();
  for (int i = 0; i < d_; ++i) {
    const auto radix = static_cast<uint64_t>(pow_p_[coord_level(i, r)]);
    z.c[i] = static_cast<int64_t>(index % radix);
    index /= radix;
  }
  z.prec = W_;
  return z;
}

RingElement Ring::import(const Ring& from, const RingElement& a) const {
  from.check(a);
  const auto& fs = from.spec();
  if (fs.base.model != spec_.base.model || fs.base.p != spec_.base.p || fs.kind != spec_.kind || fs.l != spec_.l ||
      fs.minimal_poly != spec_.minimal_poly)
    fail(ErrorCode::SpecMismatch, "import between incompatible rings");
  const int k = std::min<int>(fs.base.unit.size(), spec_.base.unit.size());
  for (int i = 0; i < std::min(k, std::min(Nb_, from.Nb_)); ++i)
    if (fs.base.unit[i] != spec_.base.unit[i]) fail(ErrorCode::SpecMismatch, "import between rings with different uniformizers");
  RingElement r = a;
  r.prec = std::min(a.prec, W_);
  reduce(r);
  return r;
}

RingElement Ring::embed_base(const Ring& base, const RingElement& a) const {
  base.check(a);
  if (base.is_extension() || base.spec().base.model != spec_.base.model || base.spec().base.p != spec_.base.p)
    fail(ErrorCode::SpecMismatch, "embedding from a ring that is not this ring's base");
  RingElement r = zero();
  r.c[0] = a.c[0];
  r.prec = std::min(W_, a.prec * e());
  reduce(r);
  return r;
}

bool Ring::in_base(const RingElement& a) const {
  for (int i = 1; i < d_; ++i)
    if (a.c[i]) return false;
  return true;
}

std::string Ring::to_string(const RingElement& a) const {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < d_; ++i) os << (i ? "," : "") << a.c[i];
  os << "]@" << a.prec;
  return os.str();
}

// ---- polynomials over F_p ---------------------------------------------------

namespace {

using Poly = std::vector<int64_t>;  // low degree first

void trim(Poly& f) {
  while (!f.empty() && f.back() == 0) f.pop_back();
}

Poly poly_mod(Poly a, const Poly& b, int64_t p) {
  trim(a);
  const int64_t lead_inv = powmod(b.back(), p - 2, p);
  while (a.size() >= b.size()) {
    const int64_t coef = a.back() * lead_inv % p;
    const size_t shift = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] = ((a[shift + i] - coef * b[i]) % p + p) % p;
    trim(a);
  }
  return a;
}

}  // namespace

bool is_irreducible_mod_p(const std::vector<int64_t>& coeffs, int64_t p) {
  const int d = static_cast<int>(coeffs.size());
  if (d <= 1) return d == 1;
  Poly f(coeffs.begin(), coeffs.end());
  f.push_back(1);
  // Trial division by every monic polynomial of degree 1..d/2.
  for (int deg = 1; deg <= d / 2; ++deg) {
    int64_t count = 1;
    for (int i = 0; i < deg; ++i) count *= p;
    for (int64_t idx = 0; idx < count; ++idx) {
      Poly g(deg + 1, 0);
      int64_t x = idx;
      for (int i = 0; i < deg; ++i, x /= p) g[i] = x % p;
      g[deg] = 1;
      if (poly_mod(f, g, p).empty()) return false;
    }
  }
  return true;
}

std::vector<int64_t> smallest_irreducible(int64_t p, int l) {
  int64_t count = 1;
  for (int i = 0; i < l; ++i) count *= p;
  for (int64_t idx = 0; idx < count; ++idx) {
    std::vector<int64_t> c(l);
    int64_t x = idx;
    for (int i = 0; i < l; ++i, x /= p) c[i] = x % p;
    if (is_irreducible_mod_p(c, p)) return c;
  }
  fail(ErrorCode::ConfigInvalid, "no irreducible polynomial found");
}

RingSpec make_base(Model model, int64_t p, int N, std::vector<int64_t> unit) {
  if (!is_prime(p)) fail(ErrorCode::ConfigInvalid, "p = " + std::to_string(p) + " is not prime");
  RingSpec s;
  s.base = BaseRingSpec{model, p, N, std::move(unit)};
  return s;
}

RingSpec build_extension(const RingSpec& base, ExtKind kind, int l) {
  if (base.kind != ExtKind::None) fail(ErrorCode::KindMismatch, "extension of an extension is not supported");
  if (!is_prime(l)) fail(ErrorCode::ConfigInvalid, "extension degree must be prime");
  if (l == base.base.p) fail(ErrorCode::SamePrime, "l must differ from p");
  RingSpec s = base;
  s.kind = kind;
  s.l = l;
  if (kind == ExtKind::Ramified) {
    if ((base.base.p - 1) % l != 0)
      fail(ErrorCode::GaloisConditionFailed, std::to_string(l) + " does not divide p-1 = " + std::to_string(base.base.p - 1));
  } else if (kind == ExtKind::Unramified) {
    s.minimal_poly = smallest_irreducible(base.base.p, l);
  } else {
    s.l = 1;
  }
  return s;
}

RingElement primitive_root_of_unity(const Ring& ring, int l) {
  const int64_t p = ring.p();
  if (l == p) fail(ErrorCode::SamePrime, "l must differ from p");
  if ((p - 1) % l != 0) fail(ErrorCode::GaloisConditionFailed, std::to_string(l) + " does not divide p-1");
  int64_t a = 2;
  for (; a < p; ++a)
    if (powmod(a, l, p) == 1) break;
  if (a >= p) fail(ErrorCode::GaloisConditionFailed, "no primitive root of unity");
  RingElement z = ring.from_int(a);
  const RingElement one = ring.one();
  const RingElement lz = ring.from_int(l);
  // Newton on z^l - 1; each step doubles the number of correct digits.
  for (int it = 0; it < 64; ++it) {
    RingElement f = ring.sub(ring.pow(z, l), one);
    if (ring.is_zero(f)) break;
    RingElement df = ring.mul(lz, ring.pow(z, l - 1));
    z = ring.sub(z, ring.mul(f, ring.inv_unit(df)));
  }
  return z;
}

// ---- isomorphisms -----------------------------------------------------------

RingElement RingIso::apply(const Ring& from, const Ring& to, const RingElement& x) const {
  from.check(x);
  const int r = std::min(x.prec, level_);
  const int d = from.degree();
  if (to.degree() != d) fail(ErrorCode::KindMismatch, "isomorphism between rings of different degree");
  std::vector<int64_t> coords(d);
  for (int i = 0; i < d; ++i) {
    const int k = from.spec().kind == ExtKind::Ramified ? std::min(from.spec().base.N, r / d + (i < r % d ? 1 : 0))
                                                        : std::min(from.spec().base.N, r);
    coords[i] = to.base_truncate(to.base_from_digits(from.varpi_digits(x.c[i], k)), k);
  }
  return to.from_coords(coords, r);
}

RingIso build_lambda(const RingSpec& F, const RingSpec& Fp, int m) {
  if (F.kind != ExtKind::None || Fp.kind != ExtKind::None) fail(ErrorCode::KindMismatch, "Lambda is defined on base rings");
  if (m < 1) fail(ErrorCode::ConfigInvalid, "closeness level must be >= 1");
  if (F.base.p != Fp.base.p) fail(ErrorCode::NotMClose, "different residue characteristics");
  if (F.base.model != Fp.base.model && m >= 2)
    fail(ErrorCode::NotMClose, "Z/p^m and F_p[t]/t^m are not isomorphic for m >= 2");
  return RingIso(F, Fp, m);
}

RingIso build_pi(const RingIso& lambda, const RingSpec& E, const RingSpec& Ep) {
  if (E.kind != Ep.kind || E.l != Ep.l || E.minimal_poly != Ep.minimal_poly)
    fail(ErrorCode::KindMismatch, "extensions are not of the same kind");
  if (E.kind == ExtKind::None) fail(ErrorCode::KindMismatch, "Pi is defined on extensions");
  const auto& d = lambda.domain().base;
  const auto& c = lambda.codomain().base;
  if (E.base.model != d.model || E.base.p != d.p || E.base.unit != d.unit || Ep.base.model != c.model ||
      Ep.base.p != c.p || Ep.base.unit != c.unit)
    fail(ErrorCode::KindMismatch, "extensions are not built over Lambda's rings");
  return RingIso(E, Ep, E.e() * lambda.level());
}

// ---- Galois generators ------------------------------------------------------

GaloisGenerator::GaloisGenerator(std::shared_ptr<const Ring> ring) : ring_(std::move(ring)) {
  const Ring& R = *ring_;
  const auto& s = R.spec();
  if (s.kind == ExtKind::None) fail(ErrorCode::KindMismatch, "Galois generator needs an extension");
  if (s.kind == ExtKind::Unramified) {
    rule_ = GaloisRule::Frobenius;
    // Root of f congruent to T^p; Hensel lifting converges since f is separable mod p.
    RingElement x = R.pow(R.generator(), static_cast<uint64_t>(s.base.p));
    std::vector<int64_t> f(s.minimal_poly);
    f.push_back(1);
    std::vector<int64_t> df;
    for (size_t i = 1; i < f.size(); ++i) df.push_back(f[i] * static_cast<int64_t>(i));
    auto eval = [&](const RingElement& y, bool derivative) {
      const auto& c = derivative ? df : f;
      RingElement acc = R.zero();
      for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = R.add(R.mul(acc, y), R.from_int(c[i]));
      return acc;
    };
    for (int it = 0; it < 64; ++it) {
      RingElement f = eval(x, false);
      if (R.is_zero(f)) break;
      x = R.sub(x, R.mul(f, R.inv_unit(eval(x, true))));
    }
    image_T_ = x;
    zeta_ = R.one();
  } else {
    rule_ = GaloisRule::ZetaScaling;
    zeta_ = primitive_root_of_unity(R, s.l);
    image_T_ = R.mul(zeta_, R.generator());
  }
}

RingElement GaloisGenerator::apply(const RingElement& x) const {
  const Ring& R = *ring_;
  R.check(x);
  const int d = R.degree();
  RingElement out = R.zero();
  if (rule_ == GaloisRule::ZetaScaling) {
    int64_t z = 1;
    for (int i = 0; i < d; ++i) {
      out.c[i] = R.base_mul(x.c[i], z);
      z = R.base_mul(z, zeta_.c[0]);
    }
    out.prec = x.prec;
    return R.truncate(out, x.prec);
  }
  for (int i = d - 1; i >= 0; --i) {
    RingElement xi = R.zero();
    xi.c[0] = x.c[i];
    out = R.add(R.mul(out, image_T_), xi);
  }
  return R.truncate(out, x.prec);
}

RingElement GaloisGenerator::apply_power(RingElement x, int k) const {
  const int l = order();
  k = ((k % l) + l) % l;
  for (int i = 0; i < k; ++i) x = apply(x);
  return x;
}

std::shared_ptr<const Ring> ring_for(const RingSpec& spec) {
  static std::mutex mu;
  static std::map<uint64_t, std::vector<std::shared_ptr<const Ring>>> cache;
  const uint64_t key = spec_hash(spec);
  std::lock_guard<std::mutex> lock(mu);
  auto& bucket = cache[key];
  for (auto& r : bucket)
    if (r->spec() == spec) return r;
  bucket.push_back(std::make_shared<const Ring>(spec));
  return bucket.back();
}

const GaloisGenerator& galois_for(const Ring& ring) {
  static std::mutex mu;
  static std::map<const Ring*, std::unique_ptr<GaloisGenerator>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[&ring];
  if (!slot) slot = std::make_unique<GaloisGenerator>(ring_for(ring.spec()));
  return *slot;
}

}  // namespace closefields
