#include "closefields/serialize.hpp"

namespace closefields {

Json ring_spec_to_json(const RingSpec& spec) {
  Json j;
  j["model"] = to_string(spec.base.model);
  j["p"] = spec.base.p;
  j["unit"] = spec.base.unit;
  j["kind"] = to_string(spec.kind);
  j["l"] = spec.l;
  j["e"] = spec.e();
  if (spec.kind == ExtKind::Unramified) j["minimal_poly"] = spec.minimal_poly;
  return j;
}

Json side_to_json(const Side& side) {
  Json j;
  j["name"] = side.name;
  j["ring"] = ring_spec_to_json(side.spec);
  j["level"] = side.level;
  j["n"] = side.n;
  return j;
}

Json matrix_to_json(const Matrix& A, int level) {
  Json rows = Json::array();
  for (int i = 0; i < A.n; ++i) {
    Json row = Json::array();
    for (int j = 0; j < A.n; ++j) row.push_back(A.ring->residue_index(A.at(i, j), level));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const Ring& R, const Json& j, int n, int level) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) fail(ErrorCode::ParseError, "matrix must have " + std::to_string(n) + " rows");
  Matrix A = zero_matrix(R, n);
  const uint64_t count = R.residue_count(level);
  for (int r = 0; r < n; ++r) {
    const Json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != n) fail(ErrorCode::ParseError, "matrix row of wrong length");
    for (int c = 0; c < n; ++c) {
      if (!row[c].is_number_unsigned() && !(row[c].is_number_integer() && row[c].get<int64_t>() >= 0))
        fail(ErrorCode::ParseError, "matrix entries are residue indices");
      const uint64_t idx = row[c].get<uint64_t>();
      if (idx >= count) fail(ErrorCode::ParseError, "residue index " + std::to_string(idx) + " out of range");
      A.at(r, c) = R.truncate(R.residue_at(idx, level), level);
    }
  }
  return A;
}

Json label_to_json(const CosetLabel& L) {
  Json j;
  j["mu"] = L.mu;
  j["P"] = matrix_to_json(L.P, L.level);
  j["Q"] = matrix_to_json(L.Q, L.level);
  return j;
}

Cochar cochar_from_json(const Json& j, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) fail(ErrorCode::ParseError, "mu must have " + std::to_string(n) + " entries");
  Cochar mu;
  for (const auto& x : j) {
    if (!x.is_number_integer()) fail(ErrorCode::ParseError, "mu entries are integers");
    mu.push_back(x.get<int>());
  }
  if (!is_antidominant(mu)) fail(ErrorCode::ParseError, "mu must be non-decreasing");
  return mu;
}

CosetLabel label_from_json(const Side& side, const Json& j) {
  if (!j.is_object() || !j.contains("mu")) fail(ErrorCode::ParseError, "label needs mu");
  const Ring& R = *side.level_ring();
  const Cochar mu = cochar_from_json(j["mu"], side.n);
  const Matrix I = identity_matrix(R, side.n);
  const Matrix P = j.contains("P") ? matrix_from_json(R, j["P"], side.n, side.level) : I;
  const Matrix Q = j.contains("Q") ? matrix_from_json(R, j["Q"], side.n, side.level) : I;
  if (!in_Go(P) || !in_Go(Q)) fail(ErrorCode::ParseError, "label matrices must be invertible over o");
  return make_label(side, mu, P, Q);
}

Json hecke_to_json(const HeckeElement& f) {
  Json j;
  j["side"] = f.side.name;
  j["l"] = f.F().l();
  j["k"] = f.F().k();
  Json terms = Json::array();
  for (const auto& t : f.terms) {
    Json tj = label_to_json(t.label);
    tj["coeff"] = t.coeff;
    terms.push_back(tj);
  }
  j["terms"] = terms;
  return j;
}

HeckeElement hecke_from_json(const Side& side, std::shared_ptr<const CoeffField> field, const Json& j) {
  if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array()) fail(ErrorCode::ParseError, "Hecke element needs a terms array");
  if (j.contains("side") && j["side"].get<std::string>() != side.name)
    fail(ErrorCode::SideMismatch, "element is on side " + j["side"].get<std::string>() + ", expected " + side.name);
  HeckeElement f = hecke_zero(side, field);
  const uint64_t size = field->size();
  for (const auto& tj : j["terms"]) {
    Coeff c = 1;
    if (tj.contains("coeff")) {
      const int64_t v = tj["coeff"].get<int64_t>();
      if (v < 0 || static_cast<uint64_t>(v) >= size) fail(ErrorCode::ParseError, "coefficient out of range");
      c = static_cast<Coeff>(v);
    }
    f.terms.push_back({label_from_json(side, tj), c});
  }
  normalize(f);
  return f;
}

}  // namespace closefields
