#include <cmath>

#include "closefields/coeff_field.hpp"
#include "closefields/rng.hpp"
#include "doctest.h"

using namespace closefields;

namespace {

FMat random_matrix(const CoeffField& F, Rng& rng, int r, int c) {
  FMat A(r, c);
  for (auto& x : A.a) x = static_cast<Coeff>(rng.below(F.size()));
  return A;
}

}  // namespace

TEST_CASE("field axioms") {
  for (auto [l, k] : {std::pair{2, 1}, {3, 1}, {2, 2}, {2, 3}, {3, 2}, {5, 1}}) {
    CoeffField F(l, k);
    CHECK(F.size() == static_cast<uint32_t>(std::pow(l, k)));
    for (Coeff a = 0; a < F.size(); ++a) {
      CHECK(F.add(a, F.neg(a)) == 0);
      if (a) CHECK(F.mul(a, F.inv(a)) == 1);
      // Frobenius has order k and inverse Frobenius undoes it.
      Coeff x = a;
      for (int i = 0; i < k; ++i) x = F.frobenius(x);
      CHECK(x == a);
      CHECK(F.inverse_frobenius(F.frobenius(a)) == a);
      for (Coeff b = 0; b < F.size(); ++b) {
        CHECK(F.mul(a, b) == F.mul(b, a));
        CHECK(F.frobenius(F.add(a, b)) == F.add(F.frobenius(a), F.frobenius(b)));
        for (Coeff c = 0; c < F.size(); c += 3) CHECK(F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c)));
      }
    }
  }
}

TEST_CASE("F_4 inverse Frobenius squares") {
  CoeffField F(2, 2);
  const Coeff w = 2;  // the class of the generator
  CHECK(F.mul(w, w) == F.add(w, 1));
  CHECK(F.inverse_frobenius(w) == F.mul(w, w));
}

TEST_CASE("rank-nullity and kernel correctness") {
  Rng rng(11);
  for (auto [l, k] : {std::pair{2, 1}, {3, 1}, {2, 2}}) {
    CoeffField F(l, k);
    for (int trial = 0; trial < 40; ++trial) {
      const int r = 1 + static_cast<int>(rng.below(6)), c = 1 + static_cast<int>(rng.below(6));
      FMat A = random_matrix(F, rng, r, c);
      if (trial % 3 == 0 && r > 1)
        for (int j = 0; j < c; ++j) A(r - 1, j) = A(0, j);
      FMat K = kernel(F, A);
      CHECK(K.rows + rank(F, A) == c);
      CHECK(image(F, A).rows == rank(F, A));
      if (K.rows) {
        FMat AK = mat_mul(F, A, transpose(K));
        for (Coeff x : AK.a) CHECK(x == 0);
      }
      if (r == c && is_invertible(F, A)) CHECK(mat_mul(F, A, inverse(F, A)) == identity_matrix(r));
    }
  }
}
