#include "closefields/lattice_cartan.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace closefields {

// ---- matrices ---------------------------------------------------------------

Matrix zero_matrix(const Ring& R, int n) {
  if (n < 1 || n > kMaxRank) fail(ErrorCode::ConfigInvalid, "matrix rank must be in 1.." + std::to_string(kMaxRank));
  Matrix A;
  A.n = n;
  A.ring = &R;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A.at(i, j) = R.zero();
  return A;
}

Matrix identity_matrix(const Ring& R, int n) {
  Matrix A = zero_matrix(R, n);
  for (int i = 0; i < n; ++i) A.at(i, i) = R.one();
  return A;
}

Matrix diagonal_pi_powers(const Ring& R, const std::vector<int>& exps) {
  Matrix A = zero_matrix(R, static_cast<int>(exps.size()));
  for (int i = 0; i < A.n; ++i) A.at(i, i) = R.pi_pow(exps[i]);
  return A;
}

namespace {

void same_ring(const Matrix& A, const Matrix& B) {
  if (A.ring != B.ring || A.n != B.n) fail(ErrorCode::SpecMismatch, "matrices over different rings or ranks");
}

}  // namespace

Matrix mat_mul(const Matrix& A, const Matrix& B) {
  same_ring(A, B);
  const Ring& R = *A.ring;
  Matrix C = zero_matrix(R, A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) {
      RingElement s = R.mul(A.at(i, 0), B.at(0, j));
      for (int k = 1; k < A.n; ++k) s = R.add(s, R.mul(A.at(i, k), B.at(k, j)));
      C.at(i, j) = s;
    }
  return C;
}

Matrix mat_mul_tracked(const Matrix& A, const Matrix& B) {
  same_ring(A, B);
  const Ring& R = *A.ring;
  Matrix C = zero_matrix(R, A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) {
      RingElement s = R.mul_tracked(A.at(i, 0), B.at(0, j));
      for (int k = 1; k < A.n; ++k) s = R.add(s, R.mul_tracked(A.at(i, k), B.at(k, j)));
      C.at(i, j) = s;
    }
  return C;
}

Matrix mat_add(const Matrix& A, const Matrix& B) {
  same_ring(A, B);
  Matrix C = A;
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) C.at(i, j) = A.ring->add(A.at(i, j), B.at(i, j));
  return C;
}

Matrix mat_sub(const Matrix& A, const Matrix& B) {
  same_ring(A, B);
  Matrix C = A;
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) C.at(i, j) = A.ring->sub(A.at(i, j), B.at(i, j));
  return C;
}

Matrix mat_truncate(const Matrix& A, int r) {
  Matrix C = A;
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) C.at(i, j) = A.ring->truncate(A.at(i, j), r);
  return C;
}

Matrix mat_lift(const Matrix& A) {
  Matrix C = A;
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) C.at(i, j) = A.ring->lift(A.at(i, j));
  return C;
}

Matrix mat_import(const Ring& to, const Matrix& A) {
  Matrix C = zero_matrix(to, A.n);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) C.at(i, j) = to.import(*A.ring, A.at(i, j));
  return C;
}

namespace {

RingElement det_rec(const Ring& R, const Matrix& A, std::vector<int>& cols, int row) {
  const int n = A.n;
  if (row == n) return R.one();
  RingElement s = R.zero();
  int sign_pos = 0;
  for (int c = 0; c < n; ++c) {
    if (cols[c]) continue;
    cols[c] = 1;
    RingElement term = R.mul(A.at(row, c), det_rec(R, A, cols, row + 1));
    cols[c] = 0;
    s = (sign_pos % 2 == 0) ? R.add(s, term) : R.sub(s, term);
    ++sign_pos;
  }
  return s;
}

}  // namespace

RingElement determinant(const Matrix& A) {
  std::vector<int> cols(A.n, 0);
  return det_rec(*A.ring, A, cols, 0);
}

Matrix adjugate(const Matrix& A) {
  const Ring& R = *A.ring;
  Matrix adj = zero_matrix(R, A.n);
  if (A.n == 1) {
    adj.at(0, 0) = R.one();
    return adj;
  }
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) {
      Matrix minor = zero_matrix(R, A.n - 1);
      for (int r = 0, mr = 0; r < A.n; ++r) {
        if (r == i) continue;
        for (int c = 0, mc = 0; c < A.n; ++c) {
          if (c == j) continue;
          minor.at(mr, mc++) = A.at(r, c);
        }
        ++mr;
      }
      RingElement d = determinant(minor);
      adj.at(j, i) = ((i + j) % 2 == 0) ? d : R.neg(d);
    }
  return adj;
}

bool in_Go(const Matrix& A) { return A.ring->is_unit(determinant(A)); }

Matrix inverse_Go(const Matrix& A) {
  const Ring& R = *A.ring;
  const int n = A.n;
  Matrix M = A, inv = identity_matrix(R, n);
  for (int k = 0; k < n; ++k) {
    int piv = -1;
    for (int i = k; i < n; ++i)
      if (R.is_unit(M.at(i, k))) {
        piv = i;
        break;
      }
    if (piv < 0) fail(ErrorCode::NotAUnit, "matrix is not invertible over o");
    for (int j = 0; j < n; ++j) {
      std::swap(M.at(k, j), M.at(piv, j));
      std::swap(inv.at(k, j), inv.at(piv, j));
    }
    const RingElement s = R.inv_unit(M.at(k, k));
    for (int j = 0; j < n; ++j) {
      M.at(k, j) = R.mul(s, M.at(k, j));
      inv.at(k, j) = R.mul(s, inv.at(k, j));
    }
    for (int i = 0; i < n; ++i) {
      if (i == k) continue;
      const RingElement f = M.at(i, k);
      for (int j = 0; j < n; ++j) {
        M.at(i, j) = R.sub(M.at(i, j), R.mul(f, M.at(k, j)));
        inv.at(i, j) = R.sub(inv.at(i, j), R.mul(f, inv.at(k, j)));
      }
    }
  }
  return inv;
}

bool mat_equal_mod(const Matrix& A, const Matrix& B, int r) {
  same_ring(A, B);
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j)
      if (!A.ring->equal_mod(A.at(i, j), B.at(i, j), r)) return false;
  return true;
}

int min_precision(const Matrix& A) {
  int p = A.ring->precision();
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) p = std::min(p, A.at(i, j).prec);
  return p;
}

std::string to_string(const Matrix& A) {
  std::ostringstream os;
  os << '[';
  for (int i = 0; i < A.n; ++i) {
    os << (i ? ";" : "");
    for (int j = 0; j < A.n; ++j) os << (j ? " " : "") << A.ring->to_string(A.at(i, j));
  }
  os << ']';
  return os.str();
}

// ---- field elements ---------------------------------------------------------

FieldElement field_mul(const Ring& R, const FieldElement& a, const FieldElement& b) {
  FieldElement r;
  if (a.zero || b.zero) {
    r.zero = true;
    r.v = a.v + b.v;
    return r;
  }
  r.v = a.v + b.v;
  r.unit = R.mul(a.unit, b.unit);
  return r;
}

FieldElement field_add(const Ring& R, const FieldElement& a, const FieldElement& b) {
  if (a.zero && b.zero) return FieldElement{true, std::min(a.v, b.v), {}};
  if (a.zero || b.zero) {
    const FieldElement& z = a.zero ? a : b;
    const FieldElement& x = a.zero ? b : a;
    if (x.v >= z.v) return FieldElement{true, z.v, {}};
    FieldElement r = x;
    r.unit = R.truncate(x.unit, std::min(x.unit.prec, z.v - x.v));
    return r;
  }
  const FieldElement& lo = a.v <= b.v ? a : b;
  const FieldElement& hi = a.v <= b.v ? b : a;
  RingElement s = R.add(lo.unit, R.mul_pi_pow(hi.unit, hi.v - lo.v));
  if (R.is_zero(s)) return FieldElement{true, lo.v + s.prec, {}};
  const int w = R.valuation(s);
  return FieldElement{false, lo.v + w, R.div_pi_pow(s, w)};
}

FieldElement GroupMatrix::entry(int i, int j) const {
  const Ring& R = ring();
  const RingElement& x = M.at(i, j);
  if (R.is_zero(x)) return FieldElement{true, shift + x.prec, {}};
  const int w = R.valuation(x);
  return FieldElement{false, shift + w, R.div_pi_pow(x, w)};
}

GroupMatrix group_mul(const GroupMatrix& a, const GroupMatrix& b) {
  return GroupMatrix{a.shift + b.shift, mat_mul_tracked(a.M, b.M)};
}

GroupMatrix group_from_entries(const Ring& R, int n, const std::vector<FieldElement>& entries) {
  if (static_cast<int>(entries.size()) != n * n) fail(ErrorCode::ParseError, "wrong number of matrix entries");
  int shift = 0;
  bool first = true;
  for (const auto& x : entries) {
    if (x.zero) continue;
    shift = first ? x.v : std::min(shift, x.v);
    first = false;
  }
  if (first) fail(ErrorCode::ParseError, "zero matrix is not in GL_n");
  GroupMatrix g{shift, zero_matrix(R, n)};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto& x = entries[i * n + j];
      if (x.zero) {
        RingElement z = R.zero();
        g.M.at(i, j) = R.truncate(z, std::max(0, x.v - shift));
      } else {
        g.M.at(i, j) = R.mul_pi_pow(R.import(R, x.unit), x.v - shift);
      }
    }
  return g;
}

// ---- cocharacters -----------------------------------------------------------

bool is_antidominant(const Cochar& mu) { return std::is_sorted(mu.begin(), mu.end()); }

int spread(const Cochar& mu) { return mu.empty() ? 0 : mu.back() - mu.front(); }

std::string to_string(const Cochar& mu) {
  std::string s = "(";
  for (size_t i = 0; i < mu.size(); ++i) s += (i ? "," : "") + std::to_string(mu[i]);
  return s + ")";
}

GroupMatrix varpi_mu(const Ring& R, const Cochar& mu) {
  const int s = *std::min_element(mu.begin(), mu.end());
  std::vector<int> exps(mu.size());
  for (size_t i = 0; i < mu.size(); ++i) exps[i] = mu[i] - s;
  return GroupMatrix{s, diagonal_pi_powers(R, exps)};
}

std::vector<Cochar> CocharWindow::cochars(int n) const {
  std::vector<Cochar> out;
  if (empty || hi < lo) return out;
  Cochar mu(n, lo);
  while (true) {
    if (!anchored || mu[0] == lo) out.push_back(mu);
    int i = n - 1;
    while (i >= 0 && mu[i] == hi) --i;
    if (i < 0) break;
    ++mu[i];
    for (int j = i + 1; j < n; ++j) mu[j] = mu[i];
  }
  return out;
}

bool CocharWindow::contains(const Cochar& mu) const {
  if (empty || !is_antidominant(mu) || mu.empty()) return false;
  if (mu.front() < lo || mu.back() > hi) return false;
  return !anchored || mu.front() == lo;
}

int required_precision(int level, int max_spread) { return level + max_spread; }

// ---- Cartan decomposition ---------------------------------------------------

CartanResult smith_cartan(const GroupMatrix& g, int certify) {
  const Ring& R = g.ring();
  const int n = g.n();
  Matrix A = g.M;
  Matrix L = identity_matrix(R, n), Linv = L, Rm = L, Rminv = L;
  std::vector<int> v(n);
  std::vector<RingElement> u(n);

  auto swap_rows = [n](Matrix& M, int a, int b) {
    for (int j = 0; j < n; ++j) std::swap(M.at(a, j), M.at(b, j));
  };
  auto swap_cols = [n](Matrix& M, int a, int b) {
    for (int i = 0; i < n; ++i) std::swap(M.at(i, a), M.at(i, b));
  };

  for (int k = 0; k < n; ++k) {
    int bi = -1, bj = -1, bv = 0;
    bool bunc = true;
    for (int i = k; i < n; ++i)
      for (int j = k; j < n; ++j) {
        const int val = R.valuation(A.at(i, j));
        const bool unc = val >= A.at(i, j).prec;
        if (bi < 0 || val < bv || (val == bv && bunc && !unc)) {
          bi = i;
          bj = j;
          bv = val;
          bunc = unc;
        }
      }
    if (bunc) fail(ErrorCode::InsufficientPrecision, "cannot certify a pivot at step " + std::to_string(k + 1));
    swap_rows(A, k, bi);
    swap_rows(L, k, bi);
    swap_cols(Linv, k, bi);
    swap_cols(A, k, bj);
    swap_cols(Rm, k, bj);
    swap_rows(Rminv, k, bj);

    v[k] = bv;
    u[k] = R.div_pi_pow(A.at(k, k), bv);
    const RingElement uinv = R.inv_unit(u[k]);

    for (int i = k + 1; i < n; ++i) {
      const RingElement c = R.mul(R.div_pi_pow(A.at(i, k), bv), uinv);
      for (int j = k; j < n; ++j) A.at(i, j) = R.sub(A.at(i, j), R.mul_tracked(c, A.at(k, j)));
      for (int j = 0; j < n; ++j) L.at(i, j) = R.sub(L.at(i, j), R.mul(c, L.at(k, j)));
      for (int r = 0; r < n; ++r) Linv.at(r, k) = R.add(Linv.at(r, k), R.mul(c, Linv.at(r, i)));
    }
    for (int j = k + 1; j < n; ++j) {
      const RingElement c = R.mul(R.div_pi_pow(A.at(k, j), bv), uinv);
      for (int i = k; i < n; ++i) A.at(i, j) = R.sub(A.at(i, j), R.mul_tracked(A.at(i, k), c));
      for (int i = 0; i < n; ++i) Rm.at(i, j) = R.sub(Rm.at(i, j), R.mul(Rm.at(i, k), c));
      for (int c2 = 0; c2 < n; ++c2) Rminv.at(k, c2) = R.add(Rminv.at(k, c2), R.mul(c, Rminv.at(j, c2)));
    }
  }

  CartanResult res;
  res.mu.resize(n);
  Matrix Du = zero_matrix(R, n), Duinv = zero_matrix(R, n);
  for (int k = 0; k < n; ++k) {
    res.mu[k] = v[k] + g.shift;
    Du.at(k, k) = u[k];
    Duinv.at(k, k) = R.inv_unit(u[k]);
  }
  res.x = mat_mul(Linv, Du);
  res.x_inv = mat_mul(Duinv, L);
  res.y = Rm;
  res.y_inv = Rminv;
  const int got = std::min({min_precision(res.x), min_precision(res.x_inv), min_precision(res.y), min_precision(res.y_inv)});
  if (got < certify)
    fail(ErrorCode::InsufficientPrecision, "Cartan transforms known modulo pi^" + std::to_string(got) + ", need pi^" +
                                               std::to_string(certify));
  return res;
}

// ---- labels -----------------------------------------------------------------

CosetLabel make_label(const Side& side, const Cochar& mu, const Matrix& P, const Matrix& Q) {
  const Ring& R = *side.level_ring();
  if (P.ring != &R || Q.ring != &R) fail(ErrorCode::SpecMismatch, "label matrices must live in the level ring");
  CosetLabel L;
  L.mu = mu;
  L.level = side.level;
  L.P = mat_truncate(P, side.level);
  L.Q = mat_truncate(Q, side.level);
  L.P_inv = mat_truncate(inverse_Go(L.P), side.level);
  L.Q_inv = mat_truncate(inverse_Go(L.Q), side.level);
  return L;
}

CosetLabel label_of(const Side& side, const GroupMatrix& g) {
  const CartanResult c = smith_cartan(g, side.level);
  const Ring& R = *side.level_ring();
  CosetLabel L;
  L.mu = c.mu;
  L.level = side.level;
  L.P = mat_truncate(mat_import(R, mat_truncate(c.x, side.level)), side.level);
  L.Q = mat_truncate(mat_import(R, mat_truncate(c.y, side.level)), side.level);
  L.P_inv = mat_truncate(mat_import(R, mat_truncate(c.x_inv, side.level)), side.level);
  L.Q_inv = mat_truncate(mat_import(R, mat_truncate(c.y_inv, side.level)), side.level);
  return L;
}

CosetLabel identity_label(const Side& side) {
  const Ring& R = *side.level_ring();
  Matrix I = identity_matrix(R, side.n);
  return make_label(side, Cochar(side.n, 0), I, I);
}

namespace {

int compare_matrix(const Matrix& a, const Matrix& b) {
  for (int i = 0; i < a.n; ++i)
    for (int j = 0; j < a.n; ++j) {
      const auto& x = a.at(i, j).c;
      const auto& y = b.at(i, j).c;
      if (x != y) return x < y ? -1 : 1;
    }
  return 0;
}

}  // namespace

bool label_less(const CosetLabel& a, const CosetLabel& b) {
  if (a.mu != b.mu) return a.mu < b.mu;
  const int c = compare_matrix(a.P, b.P);
  if (c) return c < 0;
  return compare_matrix(a.Q, b.Q) < 0;
}

bool labels_identical(const CosetLabel& a, const CosetLabel& b) {
  return a.mu == b.mu && a.level == b.level && compare_matrix(a.P, b.P) == 0 && compare_matrix(a.Q, b.Q) == 0;
}

std::string to_string(const CosetLabel& L) {
  return "mu=" + to_string(L.mu) + " P=" + to_string(L.P) + " Q=" + to_string(L.Q);
}

bool in_gamma(const Cochar& mu, const Matrix& a, const Matrix& b, int level) {
  const Ring& R = *a.ring;
  const int n = a.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int d = mu[j] - mu[i];
      bool ok;
      if (d == 0) {
        ok = R.equal_mod(a.at(i, j), b.at(i, j), level);
      } else if (d > 0) {
        ok = d >= level ? R.equal_mod(b.at(i, j), R.zero(), level)
                        : R.equal_mod(b.at(i, j), R.mul_pi_pow(a.at(i, j), d), level);
      } else {
        ok = -d >= level ? R.equal_mod(a.at(i, j), R.zero(), level)
                         : R.equal_mod(a.at(i, j), R.mul_pi_pow(b.at(i, j), -d), level);
      }
      if (!ok) return false;
    }
  return true;
}

bool same_double_coset(const CosetLabel& a, const CosetLabel& b) {
  if (a.mu != b.mu || a.level != b.level) return false;
  return in_gamma(a.mu, mat_mul(a.P_inv, b.P), mat_mul(a.Q_inv, b.Q), a.level);
}

bool same_double_coset(const Side& side, const GroupMatrix& g, const GroupMatrix& h) {
  return same_double_coset(label_of(side, g), label_of(side, h));
}

GroupMatrix label_representative(const Side& side, const CosetLabel& L, int w) {
  const Ring& R = *side.ring_at(w);
  const Matrix P = mat_lift(mat_import(R, L.P));
  const Matrix Qi = mat_lift(mat_import(R, L.Q_inv));
  const GroupMatrix d = varpi_mu(R, L.mu);
  return GroupMatrix{d.shift, mat_mul(mat_mul(P, d.M), Qi)};
}

uint64_t left_coset_count(const Side& side, const Cochar& mu) {
  const auto q = static_cast<uint64_t>(side.level_ring()->residue_field_size());
  uint64_t count = 1;
  for (size_t i = 0; i < mu.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      for (int t = 0; t < mu[i] - mu[j]; ++t) count *= q;
  return count;
}

std::vector<GroupMatrix> left_coset_reps(const Side& side, const CosetLabel& L, int w) {
  const Ring& R = *side.ring_at(w);
  const int n = side.n;
  const Matrix P = mat_lift(mat_import(R, L.P));
  const Matrix Qi = mat_lift(mat_import(R, L.Q_inv));
  const GroupMatrix d = varpi_mu(R, L.mu);
  const Matrix DQ = mat_mul(d.M, Qi);

  struct Slot {
    int i, j, depth;
    uint64_t radix;
  };
  std::vector<Slot> slots;
  uint64_t total = 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j) {
      const int depth = L.mu[i] - L.mu[j];
      if (depth <= 0) continue;
      const uint64_t radix = R.residue_count(depth);
      slots.push_back({i, j, depth, radix});
      total *= radix;
    }
  std::vector<GroupMatrix> reps;
  reps.reserve(total);
  for (uint64_t idx = 0; idx < total; ++idx) {
    Matrix u = identity_matrix(R, n);
    uint64_t x = idx;
    for (const auto& s : slots) {
      const RingElement c = R.residue_at(x % s.radix, s.depth);
      x /= s.radix;
      u.at(s.i, s.j) = R.mul_pi_pow(c, side.level);
    }
    reps.push_back(GroupMatrix{d.shift, mat_mul(mat_mul(P, u), DQ)});
  }
  return reps;
}

std::vector<GroupMatrix> left_coset_reps(const Side& side, const GroupMatrix& g, int w) {
  return left_coset_reps(side, label_of(side, g), w);
}

// ---- enumeration ------------------------------------------------------------

uint64_t matrix_index(const Side& side, const Matrix& A) {
  const Ring& R = *A.ring;
  const uint64_t radix = R.residue_count(side.level);
  uint64_t idx = 0;
  for (int i = 0; i < A.n; ++i)
    for (int j = 0; j < A.n; ++j) idx = idx * radix + R.residue_index(A.at(i, j), side.level);
  return idx;
}

namespace {

std::string side_key(const Side& side) {
  std::ostringstream os;
  const auto& s = side.spec;
  os << static_cast<int>(s.base.model) << ':' << s.base.p << ':';
  for (auto u : s.base.unit) os << u << ',';
  os << ':' << static_cast<int>(s.kind) << ':' << s.l << ':';
  for (auto c : s.minimal_poly) os << c << ',';
  os << ':' << side.level << ':' << side.n;
  return os.str();
}

// Gamma_mu built from its explicit description: a ranges over G(o/pi^m)
// subject to the divisibility forced below the diagonal, b is then
// determined except in the entries where mu_i > mu_j.
std::vector<std::pair<Matrix, Matrix>> gamma_list(const Side& side, const Cochar& mu, const std::vector<Matrix>& G) {
  const Ring& R = *side.level_ring();
  const int n = side.n, m = side.level;
  std::vector<std::pair<Matrix, Matrix>> out;
  for (const Matrix& a : G) {
    bool ok = true;
    for (int i = 0; i < n && ok; ++i)
      for (int j = 0; j < n && ok; ++j) {
        const int dd = mu[i] - mu[j];
        if (dd > 0 && R.valuation(R.truncate(a.at(i, j), m)) < std::min(dd, m)) ok = false;
      }
    if (!ok) continue;
    Matrix b = zero_matrix(R, n);
    struct Free {
      int i, j;
      RingElement base;
      int step;  // free digits start at pi^step
      uint64_t radix;
      int depth;
    };
    std::vector<Free> frees;
    uint64_t total = 1;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int d = mu[j] - mu[i];
        if (d == 0) {
          b.at(i, j) = a.at(i, j);
        } else if (d > 0) {
          b.at(i, j) = R.truncate(R.mul_pi_pow(a.at(i, j), d), m);
        } else {
          const int dd = -d;
          Free f;
          f.i = i;
          f.j = j;
          if (dd >= m) {
            f.base = R.truncate(R.zero(), m);
            f.step = 0;
            f.depth = m;
          } else {
            f.base = R.div_pi_pow(R.truncate(a.at(i, j), m), dd);
            f.step = m - dd;
            f.depth = dd;
          }
          f.radix = R.residue_count(f.depth);
          total *= f.radix;
          frees.push_back(f);
        }
      }
    for (uint64_t idx = 0; idx < total; ++idx) {
      uint64_t x = idx;
      for (const auto& f : frees) {
        RingElement r = R.residue_at(x % f.radix, f.depth);
        x /= f.radix;
        RingElement base = f.base;
        base.prec = R.precision();
        b.at(f.i, f.j) = R.truncate(R.add(base, R.mul_pi_pow(r, f.step)), m);
      }
      out.emplace_back(a, b);
    }
  }
  return out;
}

}  // namespace

const std::vector<Matrix>& level_group(const Side& side, uint64_t budget) {
  static std::mutex mu;
  static std::map<std::string, std::unique_ptr<std::vector<Matrix>>> cache;
  const std::string key = side_key(side);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  const Ring& R = *side.level_ring();
  const uint64_t radix = R.residue_count(side.level);
  uint64_t total = 1;
  for (int t = 0; t < side.n * side.n; ++t) {
    if (total > budget / radix) fail(ErrorCode::BudgetExceeded, "G(o/pi^m) has more than " + std::to_string(budget) + " candidates");
    total *= radix;
  }
  auto G = std::make_unique<std::vector<Matrix>>();
  for (uint64_t idx = 0; idx < total; ++idx) {
    Matrix A = zero_matrix(R, side.n);
    uint64_t x = idx;
    for (int i = side.n - 1; i >= 0; --i)
      for (int j = side.n - 1; j >= 0; --j) {
        A.at(i, j) = R.truncate(R.residue_at(x % radix, side.level), side.level);
        x /= radix;
      }
    if (R.is_unit(determinant(A))) G->push_back(A);
  }
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[key];
  if (!slot) slot = std::move(G);
  return *slot;
}

namespace {

// Walks G x G in index order; each unseen pair starts a new label and its
// Gamma_mu orbit is marked. With sigma set, the orbits of the sigma-images
// are marked too, so one label per sigma-orbit comes out.
std::vector<CosetLabel> sweep_labels(const Side& side, const Cochar& mu, uint64_t budget, bool sigma) {
  if (static_cast<int>(mu.size()) != side.n || !is_antidominant(mu))
    fail(ErrorCode::ConfigInvalid, "cocharacter must be non-decreasing of length n");
  const auto& G = level_group(side, budget);
  const uint64_t g = G.size();
  if (g * g > budget) fail(ErrorCode::BudgetExceeded, "|H_m| = " + std::to_string(g * g) + " exceeds budget");
  std::unordered_map<uint64_t, uint32_t> pos;
  for (uint32_t i = 0; i < g; ++i) pos[matrix_index(side, G[i])] = i;
  const auto gamma = gamma_list(side, mu, G);
  std::vector<bool> seen(g * g, false);
  auto mark = [&](const Matrix& P, const Matrix& Q) {
    for (const auto& [a, b] : gamma) {
      const uint64_t pi = pos.at(matrix_index(side, mat_truncate(mat_mul(P, a), side.level)));
      const uint64_t pj = pos.at(matrix_index(side, mat_truncate(mat_mul(Q, b), side.level)));
      seen[pi * g + pj] = true;
    }
  };
  std::vector<CosetLabel> out;
  for (uint64_t i = 0; i < g; ++i)
    for (uint64_t j = 0; j < g; ++j) {
      if (seen[i * g + j]) continue;
      out.push_back(make_label(side, mu, G[i], G[j]));
      mark(G[i], G[j]);
      if (!sigma) continue;
      CosetLabel cur = sigma_on_label(side, out.back());
      for (int k = 1; k < side.spec.l; ++k) {
        mark(cur.P, cur.Q);
        cur = sigma_on_label(side, cur);
      }
    }
  return out;
}

}  // namespace

std::vector<CosetLabel> enumerate_labels(const Side& side, const Cochar& mu, uint64_t budget) {
  return sweep_labels(side, mu, budget, false);
}

std::vector<CosetLabel> enumerate_sigma_orbits(const Side& side, const Cochar& mu, uint64_t budget) {
  if (side.spec.kind == ExtKind::None) fail(ErrorCode::SideMismatch, "sigma acts on the extension side only");
  return sweep_labels(side, mu, budget, true);
}

std::vector<CosetLabel> enumerate_labels(const Side& side, const CocharWindow& window, uint64_t budget) {
  std::vector<CosetLabel> out;
  for (const auto& mu : window.cochars(side.n)) {
    auto part = enumerate_labels(side, mu, budget);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<std::pair<Matrix, Matrix>> gamma_stabilizer(const Side& side, const Cochar& mu, uint64_t budget) {
  const auto& G = level_group(side, budget);
  if (G.size() * G.size() > budget) fail(ErrorCode::BudgetExceeded, "|H_m| exceeds budget");
  return gamma_list(side, mu, G);
}

// ---- Galois action ----------------------------------------------------------

GroupMatrix sigma_on_group(const GroupMatrix& g) {
  const Ring& R = g.ring();
  const GaloisGenerator& gen = galois_for(R);
  GroupMatrix out = g;
  RingElement scale = R.one();
  if (gen.rule() == GaloisRule::ZetaScaling) {
    const int l = gen.order();
    scale = R.pow(gen.zeta(), static_cast<uint64_t>(((g.shift % l) + l) % l));
  }
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.n(); ++j) out.M.at(i, j) = R.mul(scale, gen.apply(g.M.at(i, j)));
  return out;
}

CosetLabel sigma_on_label(const Side& side, const CosetLabel& L) {
  const Ring& R = *side.level_ring();
  const GaloisGenerator& gen = galois_for(R);
  Matrix P = L.P, Q = L.Q;
  for (int i = 0; i < side.n; ++i)
    for (int j = 0; j < side.n; ++j) {
      P.at(i, j) = gen.apply(L.P.at(i, j));
      Q.at(i, j) = gen.apply(L.Q.at(i, j));
    }
  if (gen.rule() == GaloisRule::ZetaScaling) {
    const int l = gen.order();
    for (int j = 0; j < side.n; ++j) {
      const uint64_t e = static_cast<uint64_t>(((-L.mu[j]) % l + l) % l);
      const RingElement z = R.pow(gen.zeta(), e);
      for (int i = 0; i < side.n; ++i) Q.at(i, j) = R.mul(Q.at(i, j), z);
    }
  }
  return make_label(side, L.mu, P, Q);
}

}  // namespace closefields
