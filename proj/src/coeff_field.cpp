#include "closefields/coeff_field.hpp"

#include <stdexcept>

#include "closefields/ring_tower.hpp"

namespace closefields {

CoeffField::CoeffField(int l, int k) : l_(l), k_(k) {
  if (!is_prime(l)) fail(ErrorCode::ConfigInvalid, "coefficient characteristic l must be prime");
  if (k < 1) fail(ErrorCode::ConfigInvalid, "coefficient degree k must be >= 1");
  uint64_t q = 1;
  pow_l_.push_back(1);
  for (int i = 0; i < k; ++i) {
    q *= static_cast<uint64_t>(l);
    if (q > (1u << 20)) fail(ErrorCode::ConfigInvalid, "coefficient field too large");
    pow_l_.push_back(static_cast<uint32_t>(q));
  }
  q_ = static_cast<uint32_t>(q);
  poly_ = k == 1 ? std::vector<int64_t>{0} : smallest_irreducible(l, k);

  // Find a generator of the multiplicative group and build log/exp tables.
  log_.assign(q_, 0);
  for (Coeff g = 1; g < q_; ++g) {
    std::vector<Coeff> ex;
    ex.reserve(q_ - 1);
    Coeff x = 1;
    bool ok = true;
    for (uint32_t i = 0; i + 1 < q_; ++i) {
      if (i > 0 && x == 1) {
        ok = false;
        break;
      }
      ex.push_back(x);
      x = slow_mul(x, g);
    }
    if (!ok || x != 1) continue;
    exp_ = ex;
    exp_.insert(exp_.end(), ex.begin(), ex.end());
    for (uint32_t i = 0; i + 1 < q_; ++i) log_[ex[i]] = i;
    return;
  }
  if (q_ == 2) {
    exp_ = {1, 1};
    return;
  }
  throw std::logic_error("no multiplicative generator");
}

Coeff CoeffField::slow_mul(Coeff a, Coeff b) const {
  std::vector<int64_t> x = coords(a), y = coords(b), z(2 * k_, 0);
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j) z[i + j] = (z[i + j] + x[i] * y[j]) % l_;
  for (int d = 2 * k_ - 1; d >= k_; --d) {
    const int64_t c = z[d];
    if (!c) continue;
    z[d] = 0;
    for (int i = 0; i < k_; ++i) z[d - k_ + i] = ((z[d - k_ + i] - c * poly_[i]) % l_ + l_) % l_;
  }
  z.resize(k_);
  return from_coords(z);
}

Coeff CoeffField::add(Coeff a, Coeff b) const {
  if (k_ == 1) {
    const Coeff s = a + b;
    return s >= q_ ? s - q_ : s;
  }
  if (l_ == 2) return a ^ b;
  Coeff r = 0;
  for (int i = 0; i < k_; ++i) r += ((a / pow_l_[i] + b / pow_l_[i]) % l_) * pow_l_[i];
  return r;
}

Coeff CoeffField::neg(Coeff a) const {
  if (k_ == 1) return a == 0 ? 0 : q_ - a;
  if (l_ == 2) return a;
  Coeff r = 0;
  for (int i = 0; i < k_; ++i) r += ((l_ - (a / pow_l_[i]) % l_) % l_) * pow_l_[i];
  return r;
}

Coeff CoeffField::mul(Coeff a, Coeff b) const {
  if (a == 0 || b == 0) return 0;
  return exp_[log_[a] + log_[b]];
}

Coeff CoeffField::inv(Coeff a) const {
  if (a == 0) throw std::domain_error("inverse of zero in coefficient field");
  return exp_[(q_ - 1 - log_[a]) % (q_ - 1)];
}

Coeff CoeffField::pow(Coeff a, uint64_t e) const {
  if (e == 0) return 1;
  if (a == 0) return 0;
  return exp_[(static_cast<uint64_t>(log_[a]) * (e % (q_ - 1))) % (q_ - 1)];
}

Coeff CoeffField::inverse_frobenius(Coeff a) const { return pow(a, pow_l_[k_ - 1]); }

std::vector<int64_t> CoeffField::coords(Coeff a) const {
  std::vector<int64_t> c(k_);
  for (int i = 0; i < k_; ++i, a /= l_) c[i] = a % l_;
  return c;
}

Coeff CoeffField::from_coords(const std::vector<int64_t>& c) const {
  if (static_cast<int>(c.size()) > k_) fail(ErrorCode::ParseError, "too many coefficient coordinates");
  Coeff r = 0;
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) r = r * l_ + static_cast<Coeff>(((c[i] % l_) + l_) % l_);
  return r;
}

// ---- matrices ---------------------------------------------------------------

FMat identity_matrix(int n) {
  FMat I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1;
  return I;
}

FMat mat_mul(const CoeffField& F, const FMat& A, const FMat& B) {
  if (A.cols != B.rows) throw std::invalid_argument("matrix shape mismatch");
  FMat C(A.rows, B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int t = 0; t < A.cols; ++t) {
      const Coeff x = A(i, t);
      if (!x) continue;
      for (int j = 0; j < B.cols; ++j)
        if (B(t, j)) C(i, j) = F.add(C(i, j), F.mul(x, B(t, j)));
    }
  return C;
}

FMat mat_add(const CoeffField& F, const FMat& A, const FMat& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("matrix shape mismatch");
  FMat C = A;
  for (size_t i = 0; i < C.a.size(); ++i) C.a[i] = F.add(A.a[i], B.a[i]);
  return C;
}

FMat mat_sub(const CoeffField& F, const FMat& A, const FMat& B) {
  if (A.rows != B.rows || A.cols != B.cols) throw std::invalid_argument("matrix shape mismatch");
  FMat C = A;
  for (size_t i = 0; i < C.a.size(); ++i) C.a[i] = F.sub(A.a[i], B.a[i]);
  return C;
}

FMat mat_scale(const CoeffField& F, Coeff c, const FMat& A) {
  FMat C = A;
  for (auto& x : C.a) x = F.mul(c, x);
  return C;
}

FMat mat_pow(const CoeffField& F, const FMat& A, uint64_t e) {
  FMat R = identity_matrix(A.rows), B = A;
  while (e) {
    if (e & 1) R = mat_mul(F, R, B);
    B = mat_mul(F, B, B);
    e >>= 1;
  }
  return R;
}

FMat transpose(const FMat& A) {
  FMat T(A.cols, A.rows);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
  return T;
}

FMat map_entries(const CoeffField& F, const FMat& A, Coeff (CoeffField::*fn)(Coeff) const) {
  FMat B = A;
  for (auto& x : B.a) x = (F.*fn)(x);
  return B;
}

FMat direct_sum(const FMat& A, const FMat& B) {
  FMat C(A.rows + B.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C(i, j) = A(i, j);
  for (int i = 0; i < B.rows; ++i)
    for (int j = 0; j < B.cols; ++j) C(A.rows + i, A.cols + j) = B(i, j);
  return C;
}

Echelon rref(const CoeffField& F, const FMat& A) {
  FMat M = A;
  std::vector<int> pivots;
  int r = 0;
  for (int c = 0; c < M.cols && r < M.rows; ++c) {
    int piv = -1;
    for (int i = r; i < M.rows; ++i)
      if (M(i, c)) {
        piv = i;
        break;
      }
    if (piv < 0) continue;
    if (piv != r)
      for (int j = 0; j < M.cols; ++j) std::swap(M(r, j), M(piv, j));
    const Coeff s = F.inv(M(r, c));
    for (int j = c; j < M.cols; ++j) M(r, j) = F.mul(s, M(r, j));
    for (int i = 0; i < M.rows; ++i) {
      if (i == r || !M(i, c)) continue;
      const Coeff f = M(i, c);
      for (int j = c; j < M.cols; ++j) M(i, j) = F.sub(M(i, j), F.mul(f, M(r, j)));
    }
    pivots.push_back(c);
    ++r;
  }
  Echelon E;
  E.R = FMat(r, M.cols);
  std::copy(M.a.begin(), M.a.begin() + static_cast<size_t>(r) * M.cols, E.R.a.begin());
  E.pivots = std::move(pivots);
  return E;
}

int rank(const CoeffField& F, const FMat& A) { return static_cast<int>(rref(F, A).pivots.size()); }

FMat kernel(const CoeffField& F, const FMat& A) {
  const Echelon E = rref(F, A);
  std::vector<bool> is_pivot(A.cols, false);
  for (int c : E.pivots) is_pivot[c] = true;
  std::vector<std::vector<Coeff>> basis;
  for (int f = 0; f < A.cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<Coeff> v(A.cols, 0);
    v[f] = 1;
    for (size_t r = 0; r < E.pivots.size(); ++r) v[E.pivots[r]] = F.neg(E.R(static_cast<int>(r), f));
    basis.push_back(std::move(v));
  }
  FMat K(static_cast<int>(basis.size()), A.cols);
  for (size_t i = 0; i < basis.size(); ++i)
    for (int j = 0; j < A.cols; ++j) K(static_cast<int>(i), j) = basis[i][j];
  return rref(F, K).R;
}

FMat image(const CoeffField& F, const FMat& A) { return rref(F, transpose(A)).R; }

bool is_invertible(const CoeffField& F, const FMat& A) { return A.rows == A.cols && rank(F, A) == A.rows; }

FMat inverse(const CoeffField& F, const FMat& A) {
  if (A.rows != A.cols) throw std::invalid_argument("inverse of a non-square matrix");
  const int n = A.rows;
  if (n == 0) return A;
  FMat aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = A(i, j);
    aug(i, n + i) = 1;
  }
  const Echelon E = rref(F, aug);
  if (static_cast<int>(E.pivots.size()) < n || E.pivots[n - 1] != n - 1) throw std::domain_error("singular matrix");
  FMat inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = E.R(i, n + j);
  return inv;
}

std::vector<Coeff> reduce_against(const CoeffField& F, const Echelon& E, std::vector<Coeff> v) {
  for (size_t r = 0; r < E.pivots.size(); ++r) {
    const Coeff f = v[E.pivots[r]];
    if (!f) continue;
    for (int j = 0; j < E.R.cols; ++j) v[j] = F.sub(v[j], F.mul(f, E.R(static_cast<int>(r), j)));
  }
  return v;
}

bool in_row_space(const CoeffField& F, const Echelon& E, const std::vector<Coeff>& v) {
  for (Coeff x : reduce_against(F, E, v))
    if (x) return false;
  return true;
}

}  // namespace closefields
