#include "closefields/tate.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "closefields/rng.hpp"

namespace closefields {

namespace {

constexpr uint64_t kExhaustiveLines = 1 << 14;
constexpr uint64_t kKernelLines = 4096;
constexpr int kNortonTries = 64;
constexpr uint64_t kIsoEnumeration = 4096;
constexpr int kIsoRandomTries = 256;

using Vec = std::vector<Coeff>;

Vec apply(const CoeffField& F, const FMat& A, const Vec& v) {
  Vec out(A.rows, 0);
  for (int i = 0; i < A.rows; ++i) {
    Coeff acc = 0;
    for (int j = 0; j < A.cols; ++j)
      if (v[j] && A(i, j)) acc = F.add(acc, F.mul(A(i, j), v[j]));
    out[i] = acc;
  }
  return out;
}

Vec row_of(const FMat& A, int i) { return Vec(A.a.begin() + static_cast<size_t>(i) * A.cols, A.a.begin() + static_cast<size_t>(i + 1) * A.cols); }

FMat from_rows(const std::vector<Vec>& rows, int cols) {
  FMat A(static_cast<int>(rows.size()), cols);
  for (size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < cols; ++j) A(static_cast<int>(i), j) = rows[i][j];
  return A;
}

bool is_zero(const Vec& v) {
  for (Coeff x : v)
    if (x) return false;
  return true;
}

uint64_t ipow(uint64_t b, int e) {
  uint64_t r = 1;
  for (int i = 0; i < e; ++i) {
    if (r > UINT64_MAX / b) return UINT64_MAX;
    r *= b;
  }
  return r;
}

uint64_t line_count(uint64_t q, int d) {
  const uint64_t total = ipow(q, d);
  return total == UINT64_MAX ? UINT64_MAX : (total - 1) / (q - 1);
}

// Calls fn on one vector per line of the span of `basis` rows (first nonzero
// coordinate normalized to 1). Stops early when fn returns true.
template <class Fn>
bool for_each_line(const CoeffField& F, const FMat& basis, Fn&& fn) {
  const int k = basis.rows;
  const uint64_t q = F.size();
  const uint64_t total = ipow(q, k);
  for (uint64_t idx = 1; idx < total; ++idx) {
    uint64_t x = idx;
    Vec c(k);
    for (int i = 0; i < k; ++i) {
      c[i] = static_cast<Coeff>(x % q);
      x /= q;
    }
    int lead = k - 1;
    while (!c[lead]) --lead;
    if (c[lead] != 1) continue;
    Vec v(basis.cols, 0);
    for (int i = 0; i < k; ++i)
      if (c[i])
        for (int j = 0; j < basis.cols; ++j) v[j] = F.add(v[j], F.mul(c[i], basis(i, j)));
    if (fn(v)) return true;
  }
  return false;
}

// ---- polynomials over F_{l^k}, low degree first --------------------------------

using Poly = std::vector<Coeff>;

void trim(Poly& a) {
  while (!a.empty() && !a.back()) a.pop_back();
}

int deg(const Poly& a) { return static_cast<int>(a.size()) - 1; }

Poly poly_sub(const CoeffField& F, Poly a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0);
  for (size_t i = 0; i < b.size(); ++i) a[i] = F.sub(a[i], b[i]);
  trim(a);
  return a;
}

// Remainder and quotient of a by a nonzero b.
std::pair<Poly, Poly> poly_divmod(const CoeffField& F, Poly a, const Poly& b) {
  trim(a);
  Poly q(std::max(0, deg(a) - deg(b) + 1), 0);
  const Coeff lead_inv = F.inv(b.back());
  while (deg(a) >= deg(b)) {
    const int shift = deg(a) - deg(b);
    const Coeff c = F.mul(a.back(), lead_inv);
    q[shift] = c;
    for (size_t i = 0; i < b.size(); ++i) a[i + shift] = F.sub(a[i + shift], F.mul(c, b[i]));
    trim(a);
  }
  return {a, q};
}

Poly poly_mulmod(const CoeffField& F, const Poly& a, const Poly& b, const Poly& f) {
  if (a.empty() || b.empty()) return {};
  Poly c(a.size() + b.size() - 1, 0);
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i])
      for (size_t j = 0; j < b.size(); ++j) c[i + j] = F.add(c[i + j], F.mul(a[i], b[j]));
  return poly_divmod(F, c, f).first;
}

Poly poly_powmod(const CoeffField& F, Poly a, uint64_t e, const Poly& f) {
  Poly r{1};
  a = poly_divmod(F, a, f).first;
  while (e) {
    if (e & 1) r = poly_mulmod(F, r, a, f);
    a = poly_mulmod(F, a, a, f);
    e >>= 1;
  }
  return poly_divmod(F, r, f).first;
}

Poly monic(const CoeffField& F, Poly a) {
  trim(a);
  if (a.empty()) return a;
  const Coeff s = F.inv(a.back());
  for (auto& x : a) x = F.mul(s, x);
  return a;
}

Poly poly_gcd(const CoeffField& F, Poly a, Poly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    Poly r = poly_divmod(F, a, b).first;
    a = std::move(b);
    b = std::move(r);
  }
  return monic(F, a);
}

// Minimal polynomial of v under A (monic).
Poly krylov_minpoly(const CoeffField& F, const FMat& A, const Vec& v) {
  const int d = A.rows;
  std::vector<Vec> orbit{v};
  while (true) {
    // Is the newest vector a combination of the earlier ones?
    const int k = static_cast<int>(orbit.size()) - 1;
    FMat sys(d, k + 1);
    for (int j = 0; j <= k; ++j)
      for (int i = 0; i < d; ++i) sys(i, j) = orbit[j][i];
    const FMat ker = kernel(F, sys);
    if (ker.rows > 0) {
      Poly p(k + 1);
      for (int j = 0; j <= k; ++j) p[j] = ker(ker.rows - 1, j);
      return monic(F, p);
    }
    orbit.push_back(apply(F, A, orbit.back()));
  }
}

// Factors of a monic f: distinct-degree, then seeded Cantor-Zassenhaus.
// Repeated factors can survive in the last entry. Norton's test accepts any
// singular p(a); irreducibility of p only keeps the kernel small.
std::vector<Poly> irreducible_factors(const CoeffField& F, Poly f, Rng& rng) {
  const uint64_t q = F.size();
  std::vector<Poly> out;
  std::vector<std::pair<int, Poly>> parts;
  Poly rest = monic(F, f);
  Poly h{0, 1};
  for (int i = 1; deg(rest) >= 2 * i; ++i) {
    h = poly_powmod(F, h, q, rest);
    Poly g = poly_gcd(F, poly_sub(F, h, Poly{0, 1}), rest);
    if (deg(g) > 0) {
      parts.emplace_back(i, g);
      rest = poly_divmod(F, rest, g).second;
      h = poly_divmod(F, h, rest).first;
    }
  }
  if (deg(rest) > 0) parts.emplace_back(deg(rest), rest);

  std::vector<std::pair<int, Poly>> todo(parts.begin(), parts.end());
  while (!todo.empty()) {
    auto [i, g] = todo.back();
    todo.pop_back();
    if (deg(g) <= i) {
      out.push_back(g);
      continue;
    }
    bool split_found = false;
    for (int attempt = 0; attempt < 200 && !split_found; ++attempt) {
      Poly a(deg(g));
      for (auto& x : a) x = static_cast<Coeff>(rng.below(q));
      trim(a);
      if (a.empty()) continue;
      Poly b;
      if (q % 2) {
        uint64_t e = 1;
        for (int t = 0; t < i; ++t) e *= q;
        b = poly_sub(F, poly_powmod(F, a, (e - 1) / 2, g), Poly{1});
      } else {
        // Trace map a + a^2 + ... + a^{2^{m-1}}, q^i = 2^m.
        int m = 0;
        for (uint64_t t = q; t > 1; t >>= 1) ++m;
        m *= i;
        Poly t = a, acc = a;
        for (int s = 1; s < m; ++s) {
          t = poly_mulmod(F, t, t, g);
          acc = poly_sub(F, acc, poly_sub(F, Poly{}, t));  // acc + t
        }
        b = acc;
      }
      const Poly d = poly_gcd(F, b, g);
      if (deg(d) > 0 && deg(d) < deg(g)) {
        todo.emplace_back(i, d);
        todo.emplace_back(i, poly_divmod(F, g, d).second);
        split_found = true;
      }
    }
    if (!split_found) out.push_back(g);
  }
  std::sort(out.begin(), out.end(), [](const Poly& a, const Poly& b) { return a.size() != b.size() ? a.size() < b.size() : a < b; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FMat eval_poly(const CoeffField& F, const Poly& p, const FMat& A) {
  FMat r(A.rows, A.cols);
  for (int i = deg(p); i >= 0; --i) r = mat_add(F, mat_mul(F, r, A), mat_scale(F, p[i], identity_matrix(A.rows)));
  return r;
}

std::vector<FMat> generator_list(const CyclicModule& M) {
  std::vector<FMat> gens;
  if (M.action)
    for (const auto& [name, A] : *M.action) gens.push_back(A);
  return gens;
}

void check_shape(const FMat& A, int d, const std::string& what) {
  if (A.rows != d || A.cols != d) fail(ErrorCode::ConfigInvalid, what + " must be " + std::to_string(d) + "x" + std::to_string(d));
}

CyclicModule with_action(const CyclicModule& M, int dim, Action action) {
  CyclicModule out;
  out.field = M.field;
  out.dim = dim;
  out.T = identity_matrix(dim);
  out.action = std::move(action);
  return out;
}

// Action on the submodule spanned by U (rows, reduced echelon).
CyclicModule restrict_to(const CyclicModule& M, const Echelon& U) {
  const CoeffField& F = M.F();
  const int u = U.R.rows;
  Action act;
  for (const auto& [name, A] : *M.action) {
    FMat S(u, u);
    for (int j = 0; j < u; ++j) {
      const Vec w = apply(F, A, row_of(U.R, j));
      for (int i = 0; i < u; ++i) S(i, j) = w[U.pivots[i]];
    }
    act[name] = S;
  }
  return with_action(M, u, std::move(act));
}

CyclicModule quotient_by(const CyclicModule& M, const Echelon& U) {
  const CoeffField& F = M.F();
  std::vector<bool> pivot(M.dim, false);
  for (int c : U.pivots) pivot[c] = true;
  std::vector<int> free;
  for (int c = 0; c < M.dim; ++c)
    if (!pivot[c]) free.push_back(c);
  const int r = static_cast<int>(free.size());
  Action act;
  for (const auto& [name, A] : *M.action) {
    FMat S(r, r);
    for (int j = 0; j < r; ++j) {
      Vec e(M.dim, 0);
      e[free[j]] = 1;
      const Vec w = reduce_against(F, U, apply(F, A, e));
      for (int i = 0; i < r; ++i) S(i, j) = w[free[i]];
    }
    act[name] = S;
  }
  return with_action(M, r, std::move(act));
}

}  // namespace

// ---- Tate cohomology ----------------------------------------------------------

void validate(const CyclicModule& M) {
  if (!M.field) fail(ErrorCode::ConfigInvalid, "module without coefficient field");
  if (M.dim < 0) fail(ErrorCode::ConfigInvalid, "negative dimension");
  check_shape(M.T, M.dim, "T");
  if (M.action)
    for (const auto& [name, A] : *M.action) check_shape(A, M.dim, "generator " + name);
  if (!(mat_pow(M.F(), M.T, static_cast<uint64_t>(M.F().l())) == identity_matrix(M.dim)))
    fail(ErrorCode::NotOrderL, "T^l is not the identity");
}

FMat norm_operator(const CyclicModule& M) {
  validate(M);
  const CoeffField& F = M.F();
  FMat N(M.dim, M.dim), P = identity_matrix(M.dim);
  for (int i = 0; i < F.l(); ++i) {
    N = mat_add(F, N, P);
    P = mat_mul(F, P, M.T);
  }
  return N;
}

namespace {

struct TateParts {
  FMat kernel_rows;
  Echelon image;
  TateResult result;
};

TateParts tate_parts(const CyclicModule& M, int i) {
  if (i != 0 && i != 1) fail(ErrorCode::ConfigInvalid, "Tate degree must be 0 or 1");
  const CoeffField& F = M.F();
  const FMat N = norm_operator(M);
  const FMat D = mat_sub(F, identity_matrix(M.dim), M.T);
  const FMat& killer = i == 0 ? D : N;
  const FMat& source = i == 0 ? N : D;
  TateParts parts;
  parts.kernel_rows = kernel(F, killer);
  parts.image = rref(F, image(F, source));
  for (int r = 0; r < parts.image.R.rows; ++r)
    if (!is_zero(apply(F, killer, row_of(parts.image.R, r)))) throw std::logic_error("image not inside kernel");
  std::vector<Vec> reduced;
  for (int r = 0; r < parts.kernel_rows.rows; ++r) {
    Vec v = reduce_against(F, parts.image, row_of(parts.kernel_rows, r));
    if (!is_zero(v)) reduced.push_back(std::move(v));
  }
  parts.result.i = i;
  parts.result.basis = rref(F, from_rows(reduced, M.dim)).R;
  parts.result.dim = parts.kernel_rows.rows - parts.image.R.rows;
  if (parts.result.basis.rows != parts.result.dim) throw std::logic_error("Tate quotient dimension mismatch");
  return parts;
}

}  // namespace

TateResult tate_cohomology(const CyclicModule& M, int i) { return tate_parts(M, i).result; }

CyclicModule tate_module(const CyclicModule& M, int i) {
  const TateParts parts = tate_parts(M, i);
  const CoeffField& F = M.F();
  const Echelon K = rref(F, parts.kernel_rows);
  const Echelon B = rref(F, parts.result.basis);
  const int h = parts.result.dim;
  CyclicModule out;
  out.field = M.field;
  out.dim = h;
  out.T = identity_matrix(h);
  if (!M.action) return out;
  Action act;
  for (const auto& [name, A] : *M.action) {
    for (int r = 0; r < K.R.rows; ++r)
      if (!in_row_space(F, K, apply(F, A, row_of(K.R, r))))
        fail(ErrorCode::ConfigInvalid, "generator " + name + " does not preserve the kernel");
    for (int r = 0; r < parts.image.R.rows; ++r)
      if (!in_row_space(F, parts.image, apply(F, A, row_of(parts.image.R, r))))
        fail(ErrorCode::ConfigInvalid, "generator " + name + " does not preserve the image");
    FMat S(h, h);
    for (int j = 0; j < h; ++j) {
      const Vec w = reduce_against(F, parts.image, apply(F, A, row_of(B.R, j)));
      for (int r = 0; r < h; ++r) S(r, j) = w[B.pivots[r]];
    }
    act[name] = S;
  }
  out.action = std::move(act);
  return out;
}

CyclicModule frobenius_twist(const CyclicModule& M) {
  CyclicModule out = M;
  out.T = map_entries(M.F(), M.T, &CoeffField::inverse_frobenius);
  if (M.action)
    for (auto& [name, A] : *out.action) A = map_entries(M.F(), A, &CoeffField::inverse_frobenius);
  return out;
}

CyclicModule direct_sum(const CyclicModule& A, const CyclicModule& B) {
  if (!(A.F() == B.F())) fail(ErrorCode::ConfigInvalid, "direct sum over different fields");
  CyclicModule out;
  out.field = A.field;
  out.dim = A.dim + B.dim;
  out.T = direct_sum(A.T, B.T);
  if (A.action.has_value() != B.action.has_value()) fail(ErrorCode::MissingAction, "only one summand carries an action");
  if (A.action) {
    Action act;
    for (const auto& [name, X] : *A.action) {
      auto it = B.action->find(name);
      if (it == B.action->end()) fail(ErrorCode::GeneratorNameMismatch, "generator " + name + " missing from the second summand");
      act[name] = direct_sum(X, it->second);
    }
    if (act.size() != B.action->size()) fail(ErrorCode::GeneratorNameMismatch, "summands have different generators");
    out.action = std::move(act);
  }
  return out;
}

CyclicModule transport_module(const CyclicModule& M, const std::map<std::string, std::string>& rename) {
  if (!M.action) fail(ErrorCode::MissingAction, "transport needs a generator action");
  CyclicModule out = M;
  Action act;
  for (const auto& [name, A] : *M.action) {
    auto it = rename.find(name);
    if (it == rename.end()) fail(ErrorCode::GeneratorNameMismatch, "no image for generator " + name);
    if (!act.emplace(it->second, A).second) fail(ErrorCode::GeneratorNameMismatch, "two generators map to " + it->second);
  }
  out.action = std::move(act);
  return out;
}

// ---- submodules -------------------------------------------------------------------

FMat spin(const CoeffField& F, const std::vector<FMat>& gens, int dim, const std::vector<std::vector<Coeff>>& seeds) {
  std::vector<Vec> rows;
  Echelon E = rref(F, FMat(0, dim));
  std::vector<Vec> queue(seeds.begin(), seeds.end());
  for (size_t head = 0; head < queue.size(); ++head) {
    Vec r = reduce_against(F, E, queue[head]);
    if (is_zero(r)) continue;
    rows.push_back(r);
    E = rref(F, from_rows(rows, dim));
    if (E.R.rows == dim) break;
    for (const auto& g : gens) queue.push_back(apply(F, g, r));
  }
  return E.R;
}

SplitResult split(const CyclicModule& M) {
  const CoeffField& F = M.F();
  const int d = M.dim;
  SplitResult out;
  if (d <= 1) {
    out.irreducible = d == 1;
    return out;
  }
  const std::vector<FMat> gens = generator_list(M);
  if (gens.empty()) {
    FMat U(1, d);
    U(0, 0) = 1;
    out.submodule = U;
    return out;
  }
  auto proper_from = [&](const std::vector<FMat>& g, const FMat& basis, FMat& found) {
    return for_each_line(F, basis, [&](const Vec& v) {
      found = spin(F, g, d, {v});
      return found.rows < d;
    });
  };

  if (line_count(F.size(), d) <= kExhaustiveLines) {
    FMat found;
    if (proper_from(gens, identity_matrix(d), found)) {
      out.submodule = found;
    } else {
      out.irreducible = true;
    }
    return out;
  }

  std::vector<FMat> duals;
  for (const auto& g : gens) duals.push_back(transpose(g));
  Rng rng(0x6d656174ULL + static_cast<uint64_t>(d));
  for (int attempt = 0; attempt < kNortonTries; ++attempt) {
    FMat a(d, d);
    for (int term = 0; term < 4; ++term) {
      FMat w = identity_matrix(d);
      const int len = static_cast<int>(rng.below(4));
      for (int s = 0; s < len; ++s) w = mat_mul(F, w, gens[rng.below(gens.size())]);
      a = mat_add(F, a, mat_scale(F, static_cast<Coeff>(rng.below(F.size())), w));
    }
    Vec v(d);
    for (auto& x : v) x = static_cast<Coeff>(rng.below(F.size()));
    if (is_zero(v)) continue;
    for (const Poly& p : irreducible_factors(F, krylov_minpoly(F, a, v), rng)) {
      const FMat pa = eval_poly(F, p, a);
      const FMat ker = kernel(F, pa);
      if (ker.rows == 0 || line_count(F.size(), ker.rows) > kKernelLines) continue;
      const FMat kerT = kernel(F, transpose(pa));
      if (line_count(F.size(), kerT.rows) > kKernelLines) continue;
      FMat found;
      if (proper_from(gens, ker, found)) {
        out.submodule = found;
        return out;
      }
      if (proper_from(duals, kerT, found)) {
        out.submodule = rref(F, kernel(F, found)).R;
        return out;
      }
      out.irreducible = true;
      return out;
    }
  }
  fail(ErrorCode::DimBoundExceeded, "no certificate for a " + std::to_string(d) + "-dimensional module");
}

std::vector<CyclicModule> composition_factors(const CyclicModule& M, int dim_bound) {
  validate(M);
  if (!M.action) fail(ErrorCode::MissingAction, "composition factors need a generator action");
  if (M.dim > dim_bound)
    fail(ErrorCode::DimBoundExceeded, "dimension " + std::to_string(M.dim) + " exceeds bound " + std::to_string(dim_bound));
  std::vector<CyclicModule> out;
  std::vector<CyclicModule> todo{with_action(M, M.dim, *M.action)};
  while (!todo.empty()) {
    CyclicModule cur = std::move(todo.back());
    todo.pop_back();
    if (cur.dim == 0) continue;
    const SplitResult s = split(cur);
    if (s.irreducible) {
      out.push_back(std::move(cur));
      continue;
    }
    const Echelon U = rref(cur.F(), s.submodule);
    // Quotient pushed first so the submodule is processed first.
    todo.push_back(quotient_by(cur, U));
    todo.push_back(restrict_to(cur, U));
  }
  return out;
}

// ---- isomorphism ------------------------------------------------------------------

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::No: return "no";
    case Verdict::Yes: return "yes";
    case Verdict::Undecided: return "undecided";
  }
  return "?";
}

Verdict modules_isomorphic(const CyclicModule& A, const CyclicModule& B) {
  if (!(A.F() == B.F())) fail(ErrorCode::ConfigInvalid, "modules over different fields");
  if (!A.action || !B.action) fail(ErrorCode::MissingAction, "isomorphism test needs generator actions");
  if (A.action->size() != B.action->size()) fail(ErrorCode::GeneratorNameMismatch, "modules have different generators");
  for (const auto& [name, X] : *A.action)
    if (!B.action->count(name)) fail(ErrorCode::GeneratorNameMismatch, "generator " + name + " missing");
  if (A.dim != B.dim) return Verdict::No;
  const int d = A.dim;
  if (d == 0) return Verdict::Yes;
  const CoeffField& F = A.F();
  // X A_g = B_g X, unknown X flattened row-major.
  const int n2 = d * d;
  FMat sys(static_cast<int>(A.action->size()) * n2, n2);
  int row = 0;
  for (const auto& [name, Ag] : *A.action) {
    const FMat& Bg = B.action->at(name);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c, ++row) {
        for (int k = 0; k < d; ++k) {
          sys(row, r * d + k) = F.add(sys(row, r * d + k), Ag(k, c));
          sys(row, k * d + c) = F.sub(sys(row, k * d + c), Bg(r, k));
        }
      }
  }
  const FMat homs = kernel(F, sys);
  if (homs.rows == 0) return Verdict::No;
  auto as_matrix = [&](const Vec& v) {
    FMat X(d, d);
    X.a = v;
    return X;
  };
  // A nonzero map out of a simple module of equal dimension, or into one, is
  // an isomorphism.
  if (split(A).irreducible || split(B).irreducible) return Verdict::Yes;
  if (ipow(F.size(), homs.rows) <= kIsoEnumeration) {
    const bool found = for_each_line(F, homs, [&](const Vec& v) { return is_invertible(F, as_matrix(v)); });
    return found ? Verdict::Yes : Verdict::No;
  }
  Rng rng(0x69736fULL + static_cast<uint64_t>(d));
  for (int t = 0; t < kIsoRandomTries; ++t) {
    Vec v(n2, 0);
    for (int i = 0; i < homs.rows; ++i) {
      const Coeff c = static_cast<Coeff>(rng.below(F.size()));
      for (int j = 0; j < n2; ++j) v[j] = F.add(v[j], F.mul(c, homs(i, j)));
    }
    if (is_invertible(F, as_matrix(v))) return Verdict::Yes;
  }
  return Verdict::Undecided;
}

// ---- linkage ----------------------------------------------------------------------

LinkageResult linkage_check(const CyclicModule& xi, const CyclicModule& rho,
                            const std::optional<std::map<std::string, std::string>>& br, int dim_bound) {
  validate(xi);
  validate(rho);
  if (!xi.action || !rho.action) fail(ErrorCode::MissingAction, "linkage needs generator actions on both modules");
  if (!(xi.F() == rho.F())) fail(ErrorCode::ConfigInvalid, "Xi and rho over different fields");
  if (xi.dim > dim_bound || rho.dim > dim_bound) fail(ErrorCode::DimBoundExceeded, "module dimension exceeds bound");

  CyclicModule pulled;
  pulled.field = rho.field;
  pulled.dim = rho.dim;
  pulled.T = identity_matrix(rho.dim);
  Action act;
  for (const auto& [name, A] : *xi.action) {
    std::string target = name;
    if (br) {
      auto it = br->find(name);
      if (it == br->end()) fail(ErrorCode::GeneratorNameMismatch, "no Brauer image for generator " + name);
      target = it->second;
    }
    auto jt = rho.action->find(target);
    if (jt == rho.action->end()) fail(ErrorCode::GeneratorNameMismatch, "rho has no generator " + target);
    act[name] = jt->second;
  }
  pulled.action = std::move(act);
  const CyclicModule twisted = frobenius_twist(pulled);

  LinkageResult res;
  res.field_degree = xi.F().k();
  for (int i = 0; i < 2; ++i) {
    const CyclicModule H = tate_module(xi, i);
    res.tate_dims[i] = H.dim;
    Verdict v = Verdict::No;
    for (const auto& f : composition_factors(H, dim_bound)) {
      res.factor_dims[i].push_back(f.dim);
      if (v == Verdict::Yes || f.dim != twisted.dim) continue;
      const Verdict w = modules_isomorphic(f, twisted);
      if (w == Verdict::Yes || (w == Verdict::Undecided && v == Verdict::No)) v = w;
    }
    res.linked[i] = v;
  }
  return res;
}

// ---- JSON -------------------------------------------------------------------------

Json fmat_to_json(const FMat& A) {
  Json rows = Json::array();
  for (int i = 0; i < A.rows; ++i) {
    Json r = Json::array();
    for (int j = 0; j < A.cols; ++j) r.push_back(A(i, j));
    rows.push_back(r);
  }
  return rows;
}

FMat fmat_from_json(const CoeffField& F, const Json& j, int rows, int cols) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) fail(ErrorCode::ParseError, "matrix must have " + std::to_string(rows) + " rows");
  FMat A(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != cols) fail(ErrorCode::ParseError, "matrix row of wrong length");
    for (int c = 0; c < cols; ++c) {
      const Json& x = j[i][c];
      if (!x.is_number_integer() || x.get<int64_t>() < 0 || x.get<uint64_t>() >= F.size())
        fail(ErrorCode::ParseError, "matrix entries are field elements in [0, l^k)");
      A(i, c) = x.get<Coeff>();
    }
  }
  return A;
}

Json module_to_json(const CyclicModule& M) {
  Json j;
  j["l"] = M.F().l();
  j["k"] = M.F().k();
  j["dim"] = M.dim;
  j["T"] = fmat_to_json(M.T);
  if (M.action) {
    Json a = Json::object();
    for (const auto& [name, A] : *M.action) a[name] = fmat_to_json(A);
    j["action"] = a;
  }
  return j;
}

CyclicModule module_from_json(const Json& j) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "module must be an object");
  for (const char* key : {"l", "dim"})
    if (!j.contains(key) || !j[key].is_number_integer()) fail(ErrorCode::ParseError, std::string("module needs integer ") + key);
  const int l = j["l"].get<int>();
  const int k = j.contains("k") ? j["k"].get<int>() : 1;
  if (!is_prime(l) || k < 1) fail(ErrorCode::ParseError, "l must be prime and k >= 1");
  CyclicModule M;
  M.field = coeff_field(l, k);
  M.dim = j["dim"].get<int>();
  if (M.dim < 0) fail(ErrorCode::ParseError, "negative dimension");
  M.T = j.contains("T") ? fmat_from_json(M.F(), j["T"], M.dim, M.dim) : identity_matrix(M.dim);
  if (j.contains("action")) {
    if (!j["action"].is_object()) fail(ErrorCode::ParseError, "action must map names to matrices");
    Action act;
    for (const auto& [name, A] : j["action"].items()) act[name] = fmat_from_json(M.F(), A, M.dim, M.dim);
    M.action = std::move(act);
  }
  return M;
}

Json tate_to_json(const TateResult& r) {
  Json j;
  j["i"] = r.i;
  j["dim"] = r.dim;
  j["basis"] = fmat_to_json(r.basis);
  return j;
}

// ---- instances along a pair ---------------------------------------------------------

std::string generator_name(const HeckeElement& f) { return hecke_to_json(f).dump(); }

namespace {

FMat random_matrix(const CoeffField& F, Rng& rng, int d) {
  FMat A(d, d);
  for (auto& x : A.a) x = static_cast<Coeff>(rng.below(F.size()));
  return A;
}

FMat random_invertible(const CoeffField& F, Rng& rng, int d) {
  while (true) {
    FMat A = random_matrix(F, rng, d);
    if (is_invertible(F, A)) return A;
  }
}

FMat conjugate(const CoeffField& F, const FMat& S, const FMat& S_inv, const FMat& A) {
  return mat_mul(F, mat_mul(F, S, A), S_inv);
}

// Random element of the commutant {X : X T = T X}.
FMat random_commuting(const CoeffField& F, Rng& rng, const FMat& T) {
  const int d = T.rows;
  const int n2 = d * d;
  FMat sys(n2, n2);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < d; ++c)
      for (int k = 0; k < d; ++k) {
        sys(r * d + c, r * d + k) = F.add(sys(r * d + c, r * d + k), T(k, c));
        sys(r * d + c, k * d + c) = F.sub(sys(r * d + c, k * d + c), T(r, k));
      }
  const FMat basis = kernel(F, sys);
  FMat X(d, d);
  for (int i = 0; i < basis.rows; ++i) {
    const Coeff c = static_cast<Coeff>(rng.below(F.size()));
    for (int j = 0; j < n2; ++j) X.a[j] = F.add(X.a[j], F.mul(c, basis(i, j)));
  }
  return X;
}

Side side_for_name(const ExtensionPair& pair, const std::string& side) {
  if (side == pair.E.name) return pair.E;
  if (side == pair.Ep.name) return pair.Ep;
  if (side == pair.base.F.name) return pair.base.F;
  if (side == pair.base.Fp.name) return pair.base.Fp;
  fail(ErrorCode::GeneratorNameMismatch, "unknown side " + side);
}

HeckeElement parse_generator(const ExtensionPair& pair, const std::string& name) {
  Json j;
  try {
    j = Json::parse(name);
  } catch (const std::exception&) {
    fail(ErrorCode::GeneratorNameMismatch, "generator name is not a Hecke element: " + name);
  }
  const Side side = side_for_name(pair, j.value("side", std::string{}));
  return hecke_from_json(side, coeff_field(j["l"].get<int>(), j["k"].get<int>()), j);
}

}  // namespace

LinkageInstance make_linkage_instance(const ExtensionPair& pair, int k, int max_dim, uint64_t seed) {
  const int l = pair.E.spec.l;
  auto field = coeff_field(l, k);
  const CoeffField& F = *field;
  Rng rng(seed);

  // Generators: sigma-invariant elements with distinct nonzero Brauer images.
  const auto family = sigma_invariant_family(pair, pair.e, 0, seed, kDefaultBudget);
  std::vector<std::pair<std::string, std::string>> gens;
  std::set<std::string> images;
  const int want = 1 + static_cast<int>(rng.below(3));
  for (int tries = 0; tries < 200 && static_cast<int>(gens.size()) < want; ++tries) {
    const HeckeElement& h = family[1 + rng.below(family.size() - 1)];
    const HeckeElement b = brauer_restrict(h, pair.base.F);
    if (b.terms.empty()) continue;
    const std::string bn = generator_name(b);
    if (!images.insert(bn).second) continue;
    gens.emplace_back(generator_name(h), bn);
  }

  // T as a block sum of trivial, Jordan and regular blocks.
  const int d = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_dim)));
  FMat T0(d, d);
  for (int at = 0; at < d;) {
    const int room = d - at;
    int size = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(std::min(room, l))));
    const bool regular = size == l && rng.below(2) == 0;
    for (int i = 0; i < size; ++i) {
      if (regular) {
        T0(at + (i + 1) % size, at + i) = 1;
      } else {
        T0(at + i, at + i) = 1;
        if (i + 1 < size) T0(at + i, at + i + 1) = 1;
      }
    }
    at += size;
  }
  const FMat S = random_invertible(F, rng, d);
  const FMat S_inv = inverse(F, S);
  LinkageInstance inst;
  inst.xi.field = field;
  inst.xi.dim = d;
  inst.xi.T = conjugate(F, S, S_inv, T0);
  Action act;
  for (const auto& [name, image] : gens) {
    act[name] = conjugate(F, S, S_inv, random_commuting(F, rng, T0));
    inst.br[name] = image;
  }
  inst.xi.action = std::move(act);

  // rho: a Frobenius-untwisted Tate factor, or random.
  std::optional<CyclicModule> factor;
  if (rng.below(3) != 0) {
    const int i = static_cast<int>(rng.below(2));
    const auto factors = composition_factors(tate_module(inst.xi, i));
    if (!factors.empty()) factor = factors[rng.below(factors.size())];
  }
  const int rd = factor ? factor->dim : 1 + static_cast<int>(rng.below(2));
  const FMat R = random_invertible(F, rng, rd);
  const FMat R_inv = inverse(F, R);
  inst.rho.field = field;
  inst.rho.dim = rd;
  inst.rho.T = identity_matrix(rd);
  Action ract;
  for (const auto& [name, image] : gens) {
    FMat A = factor ? map_entries(F, factor->action->at(name), &CoeffField::frobenius) : random_matrix(F, rng, rd);
    ract[image] = conjugate(F, R, R_inv, A);
  }
  inst.rho.action = std::move(ract);
  return inst;
}

LinkageInstance transport_instance(const ExtensionPair& pair, const LinkageInstance& inst) {
  if (!inst.xi.action || !inst.rho.action) fail(ErrorCode::MissingAction, "instance without generator actions");
  const Transfer kE = kaz_E(pair);
  const Transfer kF = kaz_F(pair.base);

  std::map<std::string, std::string> rename_rho;
  std::vector<std::pair<std::string, HeckeElement>> rho_gens;
  for (const auto& [name, A] : *inst.rho.action) {
    const HeckeElement image = kaz_map(kF, parse_generator(pair, name));
    rename_rho[name] = generator_name(image);
    rho_gens.emplace_back(generator_name(image), image);
  }

  LinkageInstance out;
  std::map<std::string, std::string> rename_xi;
  for (const auto& [name, A] : *inst.xi.action) {
    const HeckeElement image = kaz_map(kE, parse_generator(pair, name));
    const std::string new_name = generator_name(image);
    rename_xi[name] = new_name;
    const HeckeElement b = brauer_restrict(image, pair.base.Fp);
    std::string target = generator_name(b);
    for (const auto& [rn, re] : rho_gens)
      if (hecke_equal(re, b)) target = rn;
    out.br[new_name] = target;
  }
  out.xi = transport_module(inst.xi, rename_xi);
  out.rho = transport_module(inst.rho, rename_rho);
  return out;
}

}  // namespace closefields
