#pragma once

// JSON forms of sides, labels and Hecke elements. Ring entries are written as
// residue indices at the side's level, which are canonical and compact.

#include "closefields/hecke.hpp"
#include "json.hpp"

namespace closefields {

using Json = nlohmann::ordered_json;

Json side_to_json(const Side& side);
Json ring_spec_to_json(const RingSpec& spec);

Json matrix_to_json(const Matrix& A, int level);
Matrix matrix_from_json(const Ring& R, const Json& j, int n, int level);

Json label_to_json(const CosetLabel& L);
CosetLabel label_from_json(const Side& side, const Json& j);

Json hecke_to_json(const HeckeElement& f);
// Terms are merged and normalized; the side is checked against the "side"
// field when present.
HeckeElement hecke_from_json(const Side& side, std::shared_ptr<const CoeffField> field, const Json& j);

Cochar cochar_from_json(const Json& j, int n);

}  // namespace closefields
