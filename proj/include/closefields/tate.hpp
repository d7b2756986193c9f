#pragma once

// Tate cohomology of an order-l operator over F_{l^k}, Frobenius twists,
// windowed Hecke modules, composition factors and the linkage predicate.

#include <array>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "closefields/coeff_field.hpp"
#include "closefields/kazhdan.hpp"

namespace closefields {

inline constexpr int kDefaultDimBound = 24;

using Action = std::map<std::string, FMat>;

// A finite-dimensional F_{l^k}-space with an operator T of order dividing l
// and, optionally, named generators of a windowed Hecke algebra acting on it.
// Matrices act on column vectors.
struct CyclicModule {
  std::shared_ptr<const CoeffField> field;
  int dim = 0;
  FMat T;
  std::optional<Action> action;

  const CoeffField& F() const { return *field; }
};

// Shape checks plus T^l = id.
void validate(const CyclicModule& M);
FMat norm_operator(const CyclicModule& M);

struct TateResult {
  int i = 0;
  FMat basis;  // rows, reduced echelon, complementary to the image
  int dim = 0;
};

TateResult tate_cohomology(const CyclicModule& M, int i);
// The Tate group as a module over the named generators, which must preserve
// kernel and image. T acts trivially on it.
CyclicModule tate_module(const CyclicModule& M, int i);

CyclicModule frobenius_twist(const CyclicModule& M);
CyclicModule direct_sum(const CyclicModule& A, const CyclicModule& B);
// Same matrices, generators renamed. Every generator needs a new name.
CyclicModule transport_module(const CyclicModule& M, const std::map<std::string, std::string>& rename);

// Spin-up closure of `seeds` under the generators (rows, reduced echelon).
FMat spin(const CoeffField& F, const std::vector<FMat>& gens, int dim, const std::vector<std::vector<Coeff>>& seeds);

struct SplitResult {
  bool irreducible = false;
  FMat submodule;  // proper nonzero invariant subspace when reducible
};
// Finds a proper submodule or certifies irreducibility. The certificate is
// either an exhaustive spin over all lines or Norton's criterion with all
// lines of ker(a) and ker(a^T) spun for an algebra element a. Raises
// DIM_BOUND_EXCEEDED when neither can be completed.
SplitResult split(const CyclicModule& M);
std::vector<CyclicModule> composition_factors(const CyclicModule& M, int dim_bound = kDefaultDimBound);

enum class Verdict { No, Yes, Undecided };
std::string to_string(Verdict v);
// Isomorphism over the shared generator names (T is ignored).
Verdict modules_isomorphic(const CyclicModule& A, const CyclicModule& B);

struct LinkageResult {
  std::array<Verdict, 2> linked{Verdict::No, Verdict::No};
  std::array<int, 2> tate_dims{0, 0};
  std::array<std::vector<int>, 2> factor_dims;
  int field_degree = 1;
};

// rho's action on generator g of Xi is rho.action[br[g]] (br missing: the
// same name). Linked at i when the Frobenius twist of rho is isomorphic to a
// composition factor of the i-th Tate group of Xi.
LinkageResult linkage_check(const CyclicModule& xi, const CyclicModule& rho,
                            const std::optional<std::map<std::string, std::string>>& br = std::nullopt,
                            int dim_bound = kDefaultDimBound);

Json module_to_json(const CyclicModule& M);
CyclicModule module_from_json(const Json& j);
Json tate_to_json(const TateResult& r);
Json fmat_to_json(const FMat& A);
FMat fmat_from_json(const CoeffField& F, const Json& j, int rows, int cols);

// ---- windowed instances along a pair of extensions ----------------------------

// Generator names are compact JSON of Hecke elements.
std::string generator_name(const HeckeElement& f);

struct LinkageInstance {
  CyclicModule xi, rho;
  std::map<std::string, std::string> br;
};

// Xi over sigma-invariant generators on E, rho over their Brauer images on F.
// Built from trivial, Jordan and regular blocks of T with generators in its
// commutant, conjugated by a random change of basis. rho is either a twisted
// factor of a Tate group (linked) or random.
LinkageInstance make_linkage_instance(const ExtensionPair& pair, int k, int max_dim, uint64_t seed);
// Transport along Kaz_E and Kaz_F. The new Brauer map is recomputed as
// Br' o Kaz_E and matched against rho's transported generators by equality
// of Hecke elements, not by name.
LinkageInstance transport_instance(const ExtensionPair& pair, const LinkageInstance& inst);

}  // namespace closefields
