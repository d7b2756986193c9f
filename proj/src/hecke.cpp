#include "closefields/hecke.hpp"

#include <algorithm>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace closefields {

std::shared_ptr<const CoeffField> coeff_field(int l, int k) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const CoeffField>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{l, k}];
  if (!slot) slot = std::make_shared<const CoeffField>(l, k);
  return slot;
}

namespace {

void same_algebra(const HeckeElement& f, const HeckeElement& g) {
  if (!(f.side == g.side)) fail(ErrorCode::SideMismatch, "Hecke elements on sides " + f.side.name + " and " + g.side.name);
  if (!(*f.field == *g.field)) fail(ErrorCode::SideMismatch, "Hecke elements over different coefficient fields");
}

}  // namespace

HeckeElement hecke_zero(const Side& side, std::shared_ptr<const CoeffField> field) {
  return HeckeElement{side, std::move(field), {}};
}

HeckeElement hecke_basis(const Side& side, std::shared_ptr<const CoeffField> field, const CosetLabel& label, Coeff c) {
  HeckeElement f = hecke_zero(side, std::move(field));
  if (c) f.terms.push_back({label, c});
  return f;
}

HeckeElement hecke_identity(const Side& side, std::shared_ptr<const CoeffField> field) {
  return hecke_basis(side, std::move(field), identity_label(side));
}

int find_term(const HeckeElement& f, const CosetLabel& label) {
  for (size_t i = 0; i < f.terms.size(); ++i)
    if (f.terms[i].label.mu == label.mu && same_double_coset(f.terms[i].label, label)) return static_cast<int>(i);
  return -1;
}

Coeff coefficient(const HeckeElement& f, const CosetLabel& label) {
  const int i = find_term(f, label);
  return i < 0 ? 0 : f.terms[i].coeff;
}

void normalize(HeckeElement& f) {
  const CoeffField& F = f.F();
  std::vector<HeckeTerm> merged;
  for (auto& t : f.terms) {
    bool found = false;
    for (auto& m : merged)
      if (m.label.mu == t.label.mu && same_double_coset(m.label, t.label)) {
        m.coeff = F.add(m.coeff, t.coeff);
        found = true;
        break;
      }
    if (!found) merged.push_back(std::move(t));
  }
  merged.erase(std::remove_if(merged.begin(), merged.end(), [](const HeckeTerm& t) { return t.coeff == 0; }),
               merged.end());
  std::sort(merged.begin(), merged.end(), [](const HeckeTerm& a, const HeckeTerm& b) { return label_less(a.label, b.label); });
  f.terms = std::move(merged);
}

HeckeElement hecke_add(const HeckeElement& f, const HeckeElement& g) {
  same_algebra(f, g);
  HeckeElement r = f;
  r.terms.insert(r.terms.end(), g.terms.begin(), g.terms.end());
  normalize(r);
  return r;
}

HeckeElement hecke_scale(Coeff c, const HeckeElement& f) {
  HeckeElement r = f;
  for (auto& t : r.terms) t.coeff = f.F().mul(c, t.coeff);
  normalize(r);
  return r;
}

bool hecke_equal(const HeckeElement& f, const HeckeElement& g) {
  if (!(f.side == g.side) || !(*f.field == *g.field)) return false;
  if (f.terms.size() != g.terms.size()) return false;
  for (const auto& t : f.terms) {
    const int i = find_term(g, t.label);
    if (i < 0 || g.terms[i].coeff != t.coeff) return false;
  }
  return true;
}

std::string to_string(const HeckeElement& f) {
  std::ostringstream os;
  os << f.side.name << "{";
  for (size_t i = 0; i < f.terms.size(); ++i)
    os << (i ? " + " : "") << f.terms[i].coeff << "*t[" << to_string(f.terms[i].label) << "]";
  os << "}";
  return os.str();
}

// ---- convolution ------------------------------------------------------------

std::vector<LabelCount> basis_product(const Side& side, const CosetLabel& a, const CosetLabel& b, int w, bool parallel) {
  const auto A = left_coset_reps(side, a, w);
  const auto B = left_coset_reps(side, b, w);
  const int64_t nb = static_cast<int64_t>(B.size());
  const int64_t total = static_cast<int64_t>(A.size()) * nb;
  std::vector<CosetLabel> labels(total);
  std::vector<std::exception_ptr> errors(total);

  auto work = [&](int64_t idx) {
    try {
      labels[idx] = label_of(side, group_mul(A[idx / nb], B[idx % nb]));
    } catch (...) {
      errors[idx] = std::current_exception();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (int64_t idx = 0; idx < total; ++idx) work(idx);
  } else {
    for (int64_t idx = 0; idx < total; ++idx) work(idx);
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<LabelCount> out;
  for (auto& L : labels) {
    bool found = false;
    for (auto& c : out)
      if (c.label.mu == L.mu && same_double_coset(c.label, L)) {
        ++c.count;
        found = true;
        break;
      }
    if (!found) out.push_back({std::move(L), 1});
  }
  for (auto& c : out) {
    const uint64_t size = left_coset_count(side, c.label.mu);
    if (c.count % size != 0)
      throw std::logic_error("convolution count " + std::to_string(c.count) + " not divisible by coset count " +
                             std::to_string(size));
    c.count /= size;
  }
  return out;
}

namespace {

HeckeElement convolve_impl(const HeckeElement& f, const HeckeElement& g, const ConvolveOptions& opts, bool parallel) {
  same_algebra(f, g);
  const CoeffField& F = f.F();
  HeckeElement r = hecke_zero(f.side, f.field);
  for (const auto& ta : f.terms)
    for (const auto& tb : g.terms) {
      int w = opts.working_precision > 0 ? opts.working_precision
                                         : required_precision(f.side.level, spread(ta.label.mu) + spread(tb.label.mu));
      std::vector<LabelCount> counts;
      while (true) {
        try {
          counts = basis_product(f.side, ta.label, tb.label, w, parallel);
          break;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::InsufficientPrecision || opts.working_precision > 0 || w >= opts.precision_cap) throw;
          w = std::min(2 * w, opts.precision_cap);
        }
      }
      const Coeff ab = F.mul(ta.coeff, tb.coeff);
      for (auto& c : counts) {
        const Coeff v = F.mul(ab, F.from_int(static_cast<int64_t>(c.count % static_cast<uint64_t>(F.l()))));
        if (v) r.terms.push_back({std::move(c.label), v});
      }
    }
  normalize(r);
  return r;
}

}  // namespace

HeckeElement convolve(const HeckeElement& f, const HeckeElement& g, const ConvolveOptions& opts) {
  return convolve_impl(f, g, opts, true);
}

HeckeElement convolve_serial(const HeckeElement& f, const HeckeElement& g, const ConvolveOptions& opts) {
  return convolve_impl(f, g, opts, false);
}

// ---- Galois action ----------------------------------------------------------

bool is_extension_side(const Side& side) { return side.spec.kind != ExtKind::None; }

HeckeElement sigma_act(const HeckeElement& f) {
  if (!is_extension_side(f.side)) fail(ErrorCode::SideMismatch, "sigma acts on the extension side only");
  HeckeElement r = f;
  for (auto& t : r.terms) t.label = sigma_on_label(f.side, t.label);
  normalize(r);
  return r;
}

int sigma_orbit_size(const Side& side, const CosetLabel& label) {
  if (!is_extension_side(side)) fail(ErrorCode::SideMismatch, "sigma acts on the extension side only");
  CosetLabel cur = sigma_on_label(side, label);
  int r = 1;
  while (!same_double_coset(cur, label)) {
    cur = sigma_on_label(side, cur);
    ++r;
    if (r > side.spec.l) throw std::logic_error("sigma orbit longer than l");
  }
  return r;
}

HeckeElement sigma_orbit_sum(const Side& side, std::shared_ptr<const CoeffField> field, const CosetLabel& label) {
  HeckeElement f = hecke_zero(side, std::move(field));
  const int r = sigma_orbit_size(side, label);
  CosetLabel cur = label;
  for (int i = 0; i < r; ++i) {
    f.terms.push_back({cur, 1});
    cur = sigma_on_label(side, cur);
  }
  normalize(f);
  return f;
}

bool is_sigma_invariant(const HeckeElement& f) { return hecke_equal(sigma_act(f), f); }

// ---- Brauer homomorphism ----------------------------------------------------

Side base_side_of(const Side& ext, const std::string& name) {
  const int e = ext.spec.e();
  if (ext.level % e != 0) fail(ErrorCode::SideMismatch, "extension level is not a multiple of e");
  return Side{name, ext.spec.base_spec(), ext.level / e, ext.n};
}

std::vector<Cochar> brauer_support_cochars(const HeckeElement& f) {
  const int e = f.side.spec.e();
  std::vector<Cochar> out;
  for (const auto& t : f.terms) {
    Cochar nu;
    bool ok = true;
    for (int x : t.label.mu) {
      if (((x % e) + e) % e != 0) ok = false;
      nu.push_back(ok ? x / e : 0);
    }
    if (ok && std::find(out.begin(), out.end(), nu) == out.end()) out.push_back(nu);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CosetLabel embed_label(const Side& base, const Side& ext, const CosetLabel& L) {
  const Ring& Rb = *base.level_ring();
  const Ring& Re = *ext.level_ring();
  Matrix P = zero_matrix(Re, ext.n), Q = zero_matrix(Re, ext.n);
  for (int i = 0; i < ext.n; ++i)
    for (int j = 0; j < ext.n; ++j) {
      P.at(i, j) = Re.embed_base(Rb, L.P.at(i, j));
      Q.at(i, j) = Re.embed_base(Rb, L.Q.at(i, j));
    }
  Cochar mu = L.mu;
  for (int& x : mu) x *= ext.spec.e();
  return make_label(ext, mu, P, Q);
}

HeckeElement brauer_restrict(const HeckeElement& f, const Side& base, const std::optional<CocharWindow>& window,
                             uint64_t budget) {
  if (!is_extension_side(f.side)) fail(ErrorCode::SideMismatch, "Brauer restriction starts on the extension side");
  if (!(base.spec == f.side.spec.base_spec()) || base.level * f.side.spec.e() != f.side.level || base.n != f.side.n)
    fail(ErrorCode::SideMismatch, "side " + base.name + " is not the base of " + f.side.name);
  if (!is_sigma_invariant(f)) fail(ErrorCode::NotSigmaInvariant, "Brauer restriction needs a sigma-invariant element");
  const auto nus = brauer_support_cochars(f);
  if (window)
    for (const auto& nu : nus)
      if (!window->contains(nu))
        fail(ErrorCode::WindowTooSmall, "restricted support reaches " + to_string(nu) + ", outside the F window");
  HeckeElement r = hecke_zero(base, f.field);
  for (const auto& nu : nus)
    for (const auto& L : enumerate_labels(base, nu, budget)) {
      const Coeff c = coefficient(f, embed_label(base, f.side, L));
      if (c) r.terms.push_back({L, c});
    }
  normalize(r);
  return r;
}

}  // namespace closefields
