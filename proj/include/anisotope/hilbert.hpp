#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "anisotope/field.hpp"

namespace anisotope {

// Element x0 + x1*alpha + x2*beta + x3*alpha*beta of the quaternion algebra
// with alpha^2 = a, beta^2 = b, alpha*beta = -beta*alpha.
struct Quaternion {
  Elem x0, x1, x2, x3;
  Elem a, b;  // nonzero
  Quaternion(Elem x0_, Elem x1_, Elem x2_, Elem x3_, Elem a_, Elem b_);
  bool operator==(const Quaternion& o) const;
};

// The places where z^2 = a x^2 + b y^2 has no nontrivial local solution
// (equivalently, where the quaternion algebra (a, b) does not split).
// Always a finite set of even cardinality.
struct RamificationSet {
  Elem a, b;
  std::vector<Place> places;  // ascending: finite first, infinite last
  bool contains(const Place& v) const;
};

// The norm-residue symbol (a, b)_v, +1 or -1.  +1 iff z^2 = a x^2 + b y^2
// has a nontrivial solution over the completion at v.  a, b nonzero.
int hilbert_symbol(const Elem& a, const Elem& b, const Place& v);

// Scans the candidate places (divisors of a and b, the dyadic place, the
// infinite place); every other place gives symbol +1.
RamificationSet delta_set(const Elem& a, const Elem& b);

// (Trd, Nrd) = (2*x0, x0^2 - a*x1^2 - b*x2^2 + a*b*x3^2).
std::pair<Elem, Elem> reduced_invariants(const Quaternion& x);

// Least quaternion with Trd = tval and Nrd = 1, searching coordinates of
// height at most `bound` (height shells ascending, x1 varying fastest; the
// x0 coordinate is forced to tval/2).  Nrd depends only on coordinate
// squares, so over Q the searched coordinates are normalized nonnegative.
std::optional<Quaternion> s_witness_search(const Elem& tval, const Elem& a,
                                           const Elem& b, long bound);

// Whether x is integral at every finite place of delta_set(a, b).
// Requires the algebra to split at every real place; a ramified real place
// is a domain error, not `false`.
bool t_membership(const Elem& x, const Elem& a, const Elem& b);

// A pair (y, z) with Nrd(y) = Nrd(z) = 1 and Trd(y) + Trd(z) = x, if the
// bounded search finds one.  Tries the unit traces +-2 first, then doubled
// elements by height.  Same real-place hypothesis as t_membership.
std::optional<std::pair<Quaternion, Quaternion>> t_witness_search(
    const Elem& x, const Elem& a, const Elem& b, long bound);

// Whether x is a norm from K(sqrt(y)).  True when y is a square; otherwise
// true iff (y, x)_v = +1 at every place.  x, y nonzero.
bool is_norm(const Elem& x, const Elem& y);

}  // namespace anisotope
