#pragma once

// Matrices over truncated rings, the Cartan (Smith) decomposition of
// GL_n over a local field, and double-coset labels for the principal
// congruence subgroup K = ker(G(o) -> G(o/pi^m)).

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "closefields/ring_tower.hpp"

namespace closefields {

inline constexpr int kMaxRank = 4;

// n x n matrix with entries in a single truncated ring.
struct Matrix {
  int n = 0;
  const Ring* ring = nullptr;
  std::array<RingElement, kMaxRank * kMaxRank> e{};

  RingElement& at(int i, int j) { return e[i * kMaxRank + j]; }
  const RingElement& at(int i, int j) const { return e[i * kMaxRank + j]; }
};

Matrix identity_matrix(const Ring& R, int n);
Matrix zero_matrix(const Ring& R, int n);
Matrix diagonal_pi_powers(const Ring& R, const std::vector<int>& exps);  // entries pi^{exps[i]}, exps >= 0
Matrix mat_mul(const Matrix& A, const Matrix& B);
Matrix mat_mul_tracked(const Matrix& A, const Matrix& B);
Matrix mat_add(const Matrix& A, const Matrix& B);
Matrix mat_sub(const Matrix& A, const Matrix& B);
Matrix mat_truncate(const Matrix& A, int r);
Matrix mat_lift(const Matrix& A);
// Move to another ring with the same base arithmetic (precision change).
Matrix mat_import(const Ring& to, const Matrix& A);
RingElement determinant(const Matrix& A);
Matrix adjugate(const Matrix& A);
bool in_Go(const Matrix& A);  // invertible over o
// Inverse of an element of G(o); NOT_A_UNIT if A is not invertible over o.
Matrix inverse_Go(const Matrix& A);
bool mat_equal_mod(const Matrix& A, const Matrix& B, int r);
int min_precision(const Matrix& A);
std::string to_string(const Matrix& A);

// Local-field scalar pi^v * unit, or the zero-at-precision marker.
struct FieldElement {
  bool zero = false;
  int v = 0;            // valuation, or the precision floor when zero
  RingElement unit{};   // unit part (relative precision = unit.prec)

  int absolute_precision() const { return zero ? v : v + unit.prec; }
};

FieldElement field_mul(const Ring& R, const FieldElement& a, const FieldElement& b);
FieldElement field_add(const Ring& R, const FieldElement& a, const FieldElement& b);

// Element pi^shift * M of GL_n(F) with M integral.
struct GroupMatrix {
  int shift = 0;
  Matrix M;

  int n() const { return M.n; }
  const Ring& ring() const { return *M.ring; }
  FieldElement entry(int i, int j) const;
};

GroupMatrix group_mul(const GroupMatrix& a, const GroupMatrix& b);
GroupMatrix group_from_entries(const Ring& R, int n, const std::vector<FieldElement>& entries);

using Cochar = std::vector<int>;

bool is_antidominant(const Cochar& mu);
int spread(const Cochar& mu);
std::string to_string(const Cochar& mu);
// varpi_mu = diag(pi^{mu_i}) as a group matrix.
GroupMatrix varpi_mu(const Ring& R, const Cochar& mu);

// Non-decreasing mu with entries in [lo, hi]; anchored additionally forces mu_1 = lo.
struct CocharWindow {
  int lo = 0;
  int hi = 0;
  bool anchored = false;
  bool empty = false;

  std::vector<Cochar> cochars(int n) const;
  bool contains(const Cochar& mu) const;
  int max_spread() const { return empty ? 0 : hi - lo; }
};

struct CartanResult {
  Cochar mu;
  Matrix x, x_inv, y, y_inv;  // g = x * varpi_mu * y^{-1}
};

// Cartan decomposition with certified pivots. x, y and their inverses are
// guaranteed modulo pi^certify; INSUFFICIENT_PRECISION otherwise.
CartanResult smith_cartan(const GroupMatrix& g, int certify);

// n_C = m + max spread.
int required_precision(int level, int max_spread);

// One of the four fields of a pair, at its congruence level.
struct Side {
  std::string name;  // "F", "F'", "E", "E'"
  RingSpec spec;
  int level = 1;     // congruence level in units of this side's uniformizer
  int n = 2;

  std::shared_ptr<const Ring> ring_at(int w) const { return ring_for(spec.at_precision(w)); }
  std::shared_ptr<const Ring> level_ring() const { return ring_at(level); }
  bool operator==(const Side& o) const { return name == o.name && spec == o.spec && level == o.level && n == o.n; }
};

// K g K named by (mu, P, Q) with g = lift(P) varpi_mu lift(Q)^{-1}.
struct CosetLabel {
  Cochar mu;
  Matrix P, Q;          // over the level ring, reduced modulo pi^level
  Matrix P_inv, Q_inv;
  int level = 1;
};

CosetLabel make_label(const Side& side, const Cochar& mu, const Matrix& P, const Matrix& Q);
CosetLabel label_of(const Side& side, const GroupMatrix& g);
CosetLabel identity_label(const Side& side);
// Lexicographic by mu, then by canonical coordinates of P, then Q.
bool label_less(const CosetLabel& a, const CosetLabel& b);
bool labels_identical(const CosetLabel& a, const CosetLabel& b);
std::string to_string(const CosetLabel& L);

// (a, b) in Gamma_mu: a varpi_mu b^{-1} in K varpi_mu K, for a, b in G(o/pi^level).
bool in_gamma(const Cochar& mu, const Matrix& a, const Matrix& b, int level);
bool same_double_coset(const CosetLabel& a, const CosetLabel& b);
bool same_double_coset(const Side& side, const GroupMatrix& g, const GroupMatrix& h);

// Representative of the label at working precision w.
GroupMatrix label_representative(const Side& side, const CosetLabel& L, int w);
uint64_t left_coset_count(const Side& side, const Cochar& mu);
// Left coset representatives of K g K / K at working precision w.
std::vector<GroupMatrix> left_coset_reps(const Side& side, const CosetLabel& L, int w);
std::vector<GroupMatrix> left_coset_reps(const Side& side, const GroupMatrix& g, int w);

// Index of a matrix mod pi^level among all n x n matrices (mixed radix).
uint64_t matrix_index(const Side& side, const Matrix& A);
// All of G(o/pi^level), in index order.
const std::vector<Matrix>& level_group(const Side& side, uint64_t budget);

inline constexpr uint64_t kDefaultBudget = 4'000'000;

std::vector<CosetLabel> enumerate_labels(const Side& side, const Cochar& mu, uint64_t budget = kDefaultBudget);
std::vector<CosetLabel> enumerate_labels(const Side& side, const CocharWindow& window,
                                         uint64_t budget = kDefaultBudget);
// One label per sigma-orbit of double cosets (extension sides only).
std::vector<CosetLabel> enumerate_sigma_orbits(const Side& side, const Cochar& mu, uint64_t budget = kDefaultBudget);
// Gamma_mu as an explicit list of pairs (diagnostic).
std::vector<std::pair<Matrix, Matrix>> gamma_stabilizer(const Side& side, const Cochar& mu,
                                                        uint64_t budget = kDefaultBudget);

GroupMatrix sigma_on_group(const GroupMatrix& g);
// sigma(P varpi_mu Q^{-1}) = sigma(P) varpi_mu (sigma(Q) diag(zeta^{-mu}))^{-1}.
CosetLabel sigma_on_label(const Side& side, const CosetLabel& L);

}  // namespace closefields
