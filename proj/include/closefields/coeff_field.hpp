#pragma once

// The coefficient field F_{l^k} and dense linear algebra over it.

#include <cstdint>
#include <string>
#include <vector>

#include "closefields/errors.hpp"

namespace closefields {

// Elements are packed base-l coordinate vectors in the polynomial basis
// 1, w, ..., w^{k-1}, w a root of the smallest monic irreducible of degree k.
using Coeff = uint32_t;

class CoeffField {
 public:
  CoeffField(int l, int k);

  int l() const { return l_; }
  int k() const { return k_; }
  uint32_t size() const { return q_; }
  const std::vector<int64_t>& modulus() const { return poly_; }

  Coeff zero() const { return 0; }
  Coeff one() const { return 1; }
  Coeff from_int(int64_t v) const { return static_cast<Coeff>(((v % l_) + l_) % l_); }
  Coeff add(Coeff a, Coeff b) const;
  Coeff sub(Coeff a, Coeff b) const { return add(a, neg(b)); }
  Coeff neg(Coeff a) const;
  Coeff mul(Coeff a, Coeff b) const;
  Coeff inv(Coeff a) const;
  Coeff pow(Coeff a, uint64_t e) const;
  Coeff frobenius(Coeff a) const { return pow(a, l_); }
  // x -> x^{1/l} = x^{l^{k-1}}
  Coeff inverse_frobenius(Coeff a) const;

  std::vector<int64_t> coords(Coeff a) const;
  Coeff from_coords(const std::vector<int64_t>& c) const;
  bool operator==(const CoeffField& o) const { return l_ == o.l_ && k_ == o.k_; }

 private:
  Coeff slow_mul(Coeff a, Coeff b) const;

  int l_;
  int k_;
  uint32_t q_;
  std::vector<int64_t> poly_;
  std::vector<uint32_t> pow_l_;
  std::vector<Coeff> exp_;      // exp_[i] = g^i, length 2(q-1)
  std::vector<uint32_t> log_;   // log_[x] for x != 0
};

// Dense row-major matrix over a CoeffField. Matrices act on column vectors.
struct FMat {
  int rows = 0;
  int cols = 0;
  std::vector<Coeff> a;

  FMat() = default;
  FMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0) {}

  Coeff& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  Coeff operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  bool operator==(const FMat&) const = default;
};

FMat identity_matrix(int n);
FMat mat_mul(const CoeffField& F, const FMat& A, const FMat& B);
FMat mat_add(const CoeffField& F, const FMat& A, const FMat& B);
FMat mat_sub(const CoeffField& F, const FMat& A, const FMat& B);
FMat mat_scale(const CoeffField& F, Coeff c, const FMat& A);
FMat mat_pow(const CoeffField& F, const FMat& A, uint64_t e);
FMat transpose(const FMat& A);
FMat map_entries(const CoeffField& F, const FMat& A, Coeff (CoeffField::*fn)(Coeff) const);
// Block diagonal sum.
FMat direct_sum(const FMat& A, const FMat& B);

struct Echelon {
  FMat R;                   // reduced row echelon form, nonzero rows only
  std::vector<int> pivots;  // pivot column of each row
};

// Reduced row echelon form of the row space of A.
Echelon rref(const CoeffField& F, const FMat& A);
int rank(const CoeffField& F, const FMat& A);
// Basis (rows, reduced echelon) of {v : A v = 0}.
FMat kernel(const CoeffField& F, const FMat& A);
// Basis (rows, reduced echelon) of the column space of A.
FMat image(const CoeffField& F, const FMat& A);
// Inverse of a square matrix; throws if singular.
FMat inverse(const CoeffField& F, const FMat& A);
bool is_invertible(const CoeffField& F, const FMat& A);
// Row space of `rows` restricted to the span test: is v in rowspace(E)?
bool in_row_space(const CoeffField& F, const Echelon& E, const std::vector<Coeff>& v);
// Reduce v against an echelon basis (returns the remainder).
std::vector<Coeff> reduce_against(const CoeffField& F, const Echelon& E, std::vector<Coeff> v);

}  // namespace closefields
