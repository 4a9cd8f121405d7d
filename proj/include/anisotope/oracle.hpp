#pragma once

#include <optional>
#include <vector>

#include "anisotope/common.hpp"
#include "anisotope/field.hpp"

namespace anisotope {

// Exhaustive search for a nontrivial zero of sum a_i x_i^2, by height shells.
// Height of a witness: over Q, the maximum |coordinate| of the reduced
// coprime integer vector (coordinates are reported nonnegative: each sign can
// be flipped independently); over F_q(t), the maximum coordinate degree of
// the reduced coprime polynomial vector.  Within a shell the first zero in
// colexicographic coordinate order is returned (x_1 varies fastest), so the
// result is a deterministic function of the inputs.  Returns the witness, or
// nullopt when no witness of height <= height_bound exists (an exhaustive
// verdict).  Throws search_exhausted if internal tables exceed their budget
// before the bound is reached.
std::optional<std::vector<Elem>> global_witness_search(
    const std::vector<Elem>& coeffs, long height_bound);

// Smallest accepted precision for local_solvable at v: valuation of
// 4 * (product of the nonzero coefficients), plus 3, floored at the value the
// lifting argument itself needs (3 at odd places, 5 at the even prime).
// Returns 1 at the real place, where precision is vacuous.
int lifting_threshold(const std::vector<Elem>& coeffs, const Place& v);

// Local isotropy of the diagonal form sum a_i x_i^2 over the completion at v,
// decided by enumeration of primitive digit vectors modulo v^k with a Hensel
// acceptance criterion (real place: a sign test).  Exact: true iff the form
// has a nontrivial zero over K_v.  k below lifting_threshold is a domain
// error.  Deliberately independent of the symbol machinery.
bool local_solvable(const std::vector<Elem>& coeffs, const Place& v, int k);
bool local_solvable(const std::vector<Elem>& coeffs, const Place& v);

enum class LocalClassKind { Square, Norm };

// Square: is x a square in K_v?  Norm: is x a norm from K_v(sqrt y)?
// (y required for Norm.)  Both reduce to local_solvable instances; precision
// defaults to the lifting threshold of the reduced form.
bool class_oracle(const Elem& x, const Place& v, LocalClassKind kind,
                  const std::optional<Elem>& y = std::nullopt,
                  std::optional<int> precision = std::nullopt);

}  // namespace anisotope
