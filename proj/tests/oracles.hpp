#pragma once

// Independent oracles and generators shared by the unit tests and the
// acceptance run.

#include <cmath>
#include <set>

#include "closefields/tate.hpp"
#include "helpers.hpp"

namespace testing_support {

// Minimum valuation over all k x k minors of M.
inline int minor_valuation(const Matrix& M, int k) {
  const Ring& R = *M.ring;
  const int n = M.n;
  int best = R.precision();
  for (int rmask = 0; rmask < (1 << n); ++rmask) {
    if (__builtin_popcount(rmask) != k) continue;
    for (int cmask = 0; cmask < (1 << n); ++cmask) {
      if (__builtin_popcount(cmask) != k) continue;
      Matrix S = zero_matrix(R, k);
      int si = 0;
      for (int i = 0; i < n; ++i) {
        if (!(rmask >> i & 1)) continue;
        int sj = 0;
        for (int j = 0; j < n; ++j)
          if (cmask >> j & 1) S.at(si, sj++) = M.at(i, j);
        ++si;
      }
      best = std::min(best, R.valuation(determinant(S)));
    }
  }
  return best;
}

// Coefficient of z in t_a * t_b as #{(i,j) : a_i b_j K = z K}, decided by
// adjugate arithmetic only.
inline uint64_t oracle_coefficient(const Side& side, const CosetLabel& a, const CosetLabel& b, const CosetLabel& z, int w) {
  const auto A = left_coset_reps(side, a, w);
  const auto B = left_coset_reps(side, b, w);
  const GroupMatrix zr = label_representative(side, z, w);
  uint64_t count = 0;
  for (const auto& x : A)
    for (const auto& y : B) count += same_left_coset(side, zr, group_mul(x, y));
  return count;
}

inline FMat permutation_cycle(int n) {
  FMat P(n, n);
  for (int i = 0; i < n; ++i) P((i + 1) % n, i) = 1;
  return P;
}

inline CyclicModule module(int l, int k, const FMat& T, Action act = {}) {
  CyclicModule M;
  M.field = coeff_field(l, k);
  M.dim = T.rows;
  M.T = T;
  if (!act.empty()) M.action = std::move(act);
  return M;
}

// Random module: trivial, Jordan and regular blocks, then a random change of
// basis. Generators, when asked for, commute with T0 only on the diagonal.
inline CyclicModule random_module(int l, int k, Rng& rng, int max_dim) {
  auto F = coeff_field(l, k);
  const int d = static_cast<int>(rng.below(max_dim + 1));
  FMat T0(d, d);
  for (int at = 0; at < d;) {
    const int size = 1 + static_cast<int>(rng.below(std::min(d - at, l)));
    const bool cycle = size == l && rng.below(2);
    for (int i = 0; i < size; ++i) {
      if (cycle) {
        T0(at + (i + 1) % size, at + i) = 1;
      } else {
        T0(at + i, at + i) = 1;
        if (i + 1 < size) T0(at + i, at + i + 1) = 1;
      }
    }
    at += size;
  }
  FMat S(d, d);
  do {
    for (auto& x : S.a) x = static_cast<Coeff>(rng.below(F->size()));
  } while (!is_invertible(*F, S));
  return module(l, k, mat_mul(*F, mat_mul(*F, S, T0), inverse(*F, S)));
}

// All vectors of F^d.
inline std::vector<std::vector<Coeff>> all_vectors(const CoeffField& F, int d) {
  std::vector<std::vector<Coeff>> out;
  const uint64_t q = F.size();
  uint64_t total = 1;
  for (int i = 0; i < d; ++i) total *= q;
  for (uint64_t idx = 0; idx < total; ++idx) {
    std::vector<Coeff> v(d);
    uint64_t x = idx;
    for (int i = 0; i < d; ++i) {
      v[i] = static_cast<Coeff>(x % q);
      x /= q;
    }
    out.push_back(v);
  }
  return out;
}

inline std::vector<Coeff> act(const CoeffField& F, const FMat& A, const std::vector<Coeff>& v) {
  std::vector<Coeff> out(A.rows, 0);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) out[i] = F.add(out[i], F.mul(A(i, j), v[j]));
  return out;
}

// Tate dimensions by counting vectors: |ker X| and |im Y| as powers of q.
inline std::pair<int, int> brute_tate_dims(const CyclicModule& M) {
  const CoeffField& F = M.F();
  const int d = M.dim;
  FMat N(d, d), P = identity_matrix(d);
  for (int i = 0; i < F.l(); ++i) {
    N = mat_add(F, N, P);
    P = mat_mul(F, P, M.T);
  }
  const FMat D = mat_sub(F, identity_matrix(d), M.T);
  auto log_q = [&](size_t count) { return static_cast<int>(std::lround(std::log(static_cast<double>(count)) / std::log(F.size()))); };
  auto count_kernel = [&](const FMat& A) {
    size_t c = 0;
    for (const auto& v : all_vectors(F, d)) {
      bool z = true;
      for (Coeff x : act(F, A, v)) z = z && x == 0;
      c += z;
    }
    return c;
  };
  auto count_image = [&](const FMat& A) {
    std::set<std::vector<Coeff>> img;
    for (const auto& v : all_vectors(F, d)) img.insert(act(F, A, v));
    return img.size();
  };
  const int h0 = log_q(count_kernel(D)) - log_q(count_image(N));
  const int h1 = log_q(count_kernel(N)) - log_q(count_image(D));
  return {h0, h1};
}

}  // namespace testing_support
