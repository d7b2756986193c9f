#pragma once

// Hand-rolled generators and brute-force oracles shared by the test binaries.

#include <vector>

#include "closefields/lattice_cartan.hpp"
#include "closefields/rng.hpp"

namespace testing_support {

using namespace closefields;

inline RingElement random_element(const Ring& R, Rng& rng, int prec) {
  return R.truncate(R.residue_at(rng.below(R.residue_count(prec)), prec), prec);
}

inline Matrix random_integral(const Ring& R, Rng& rng, int n) {
  Matrix A = zero_matrix(R, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A.at(i, j) = random_element(R, rng, R.precision());
  return A;
}

inline Matrix random_Go(const Ring& R, Rng& rng, int n) {
  while (true) {
    Matrix A = random_integral(R, rng, n);
    if (in_Go(A)) return A;
  }
}

// Random matrix whose entries have random valuations in [0, max_val].
inline Matrix random_valued(const Ring& R, Rng& rng, int n, int max_val) {
  Matrix A = zero_matrix(R, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int v = static_cast<int>(rng.below(max_val + 1));
      A.at(i, j) = R.mul_pi_pow(random_element(R, rng, R.precision()), v);
    }
  return A;
}

template <class Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::ParseError;
}

// g1 K == g2 K by direct arithmetic: pi^{s2-s1} adj(M1) M2 / det(M1) is
// integral and congruent to 1 modulo pi^level. Needs enough working precision
// to absorb v(det M1); reports INSUFFICIENT_PRECISION otherwise.
inline bool same_left_coset(const Side& side, const GroupMatrix& g1, const GroupMatrix& g2) {
  const Ring& R = g1.ring();
  const int n = g1.n();
  const RingElement d = determinant(g1.M);
  const int vd = R.valuation(d);
  if (vd >= d.prec) fail(ErrorCode::InsufficientPrecision, "singular at working precision");
  const RingElement du = R.inv_unit(R.div_pi_pow(d, vd));
  const Matrix H = mat_mul(adjugate(g1.M), g2.M);
  const int shift = g2.shift - g1.shift - vd;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      RingElement h = H.at(i, j);
      if (shift >= 0) {
        h = R.mul_pi_pow(h, shift);
      } else {
        if (R.valuation(h) < -shift) {
          if (R.valuation(h) >= h.prec) fail(ErrorCode::InsufficientPrecision, "coset test");
          return false;
        }
        h = R.div_pi_pow(h, -shift);
      }
      h = R.mul(h, du);
      if (h.prec < side.level) fail(ErrorCode::InsufficientPrecision, "coset test precision");
      const RingElement target = i == j ? R.one() : R.zero();
      if (!R.equal_mod(h, target, side.level)) return false;
    }
  return true;
}

// (a, b) in Gamma_mu by the definition: some k in K makes
// varpi^{-1} (k a) varpi b^{-1} lie in K. k runs over K / K_W.
inline bool brute_in_gamma(const Side& side, const Cochar& mu, const Matrix& a, const Matrix& b) {
  const int m = side.level;
  const int W = m + spread(mu);
  const Ring& R = *side.ring_at(W);
  const int n = side.n;
  const Matrix al = mat_lift(mat_import(R, a));
  const Matrix bl_inv = inverse_Go(mat_lift(mat_import(R, b)));
  const uint64_t radix = R.residue_count(W - m);
  uint64_t total = 1;
  for (int t = 0; t < n * n; ++t) total *= radix;
  for (uint64_t idx = 0; idx < total; ++idx) {
    Matrix k = identity_matrix(R, n);
    uint64_t x = idx;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        k.at(i, j) = R.add(k.at(i, j), R.mul_pi_pow(R.residue_at(x % radix, W - m), m));
        x /= radix;
      }
    const Matrix Y = mat_mul(k, al);
    Matrix Z = zero_matrix(R, n);
    bool integral = true;
    for (int i = 0; i < n && integral; ++i)
      for (int j = 0; j < n && integral; ++j) {
        const int d = mu[j] - mu[i];
        if (d >= 0) {
          Z.at(i, j) = R.mul_pi_pow(Y.at(i, j), d);
        } else if (R.valuation(Y.at(i, j)) >= -d) {
          Z.at(i, j) = R.div_pi_pow(Y.at(i, j), -d);
        } else {
          integral = false;
        }
      }
    if (!integral) continue;
    if (mat_equal_mod(mat_mul(Z, bl_inv), identity_matrix(R, n), m)) return true;
  }
  return false;
}

}  // namespace testing_support
