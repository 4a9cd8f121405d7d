#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anisotope/field.hpp"

namespace anisotope {

// An element of the Galois group of K(sqrt(a), sqrt(b))/K, recorded by its
// action on the two square roots: +1 fixes, -1 negates.
struct GalElem {
  int on_a = 1;
  int on_b = 1;

  GalElem() = default;
  GalElem(int ia, int ib);  // entries must be +-1

  bool is_identity() const { return on_a == 1 && on_b == 1; }
  friend GalElem operator*(const GalElem& x, const GalElem& y) {
    return GalElem(x.on_a * y.on_a, x.on_b * y.on_b);
  }
  auto operator<=>(const GalElem&) const = default;

  // Deterministic order: (1,1), (-1,1), (1,-1), (-1,-1).
  static const std::array<GalElem, 4>& all();
  std::string str() const;  // "(1,-1)"
};

// Constants pinning the biquadratic extension L = K(sqrt(a), sqrt(b)) used
// by the splitting-class machinery: a, b, ab nonsquares (a, b > 0 over Q),
// an admissible modulus covering every ramified place plus the infinite
// place, and, over F_q(t), two constants c, d entering the leading-
// coefficient normalization of the semilocal rings.
struct CftConstants {
  GlobalField K;
  Elem a, b;
  std::optional<Elem> c, d;                    // F_q(t) only
  std::vector<std::pair<Place, int>> modulus;  // finite ascending, infinite last
  long verified_bound = 0;                     // 0 until verify_constants passes
  std::map<std::string, long> check_counts;    // verification tallies

  std::vector<Place> modulus_places() const;
  std::vector<Place> finite_modulus_places() const;
  bool divides_modulus(const Place& v) const;
  // The constant guaranteed to be a nonresidue at every prime of the sigma
  // fiber: a for (-1,*), b for (1,-1).  Identity class: domain_error.
  Elem s_for(const GalElem& sigma) const;

  std::string to_text() const;
  static std::optional<CftConstants> from_text(const std::string& text);
};

// Frobenius class of an unramified finite place coprime to the modulus: the
// pair of residue symbols of a and b.  Ramified or modulus-dividing places
// are a domain error.
GalElem artin_map(const Place& v, const CftConstants& cs);
// Multiplicative extension to the principal ideal (x); the ideal must be
// coprime to the modulus.  x != 0.
GalElem artin_map(const Elem& x, const CftConstants& cs);

// 2^3 * (odd support of a and b) * RealInf over Q; (support of a and b) *
// DegreeInf over F_q(t).  The inputs must span a genuine biquadratic
// extension: a, b, ab all nonsquare (and nonzero), else domain_error.
std::vector<std::pair<Place, int>> admissible_modulus(const GlobalField& K,
                                                      const Elem& a,
                                                      const Elem& b);

// The finite places where x has odd valuation, split by Frobenius class;
// places dividing the modulus are listed separately, unclassified.
struct PPartition {
  std::vector<Place> places;                    // ascending
  std::map<GalElem, std::vector<Place>> fibers; // coprime to the modulus
  std::vector<Place> modulus_divisors;
};
PPartition p_partition(const Elem& x, const CftConstants& cs);  // x != 0

// The positive (monic) product of one generator per odd-valuation finite
// place of x: the canonical representative of x modulo squares and the
// sign/leading-coefficient unit.  x != 0.
Elem squarefree_representative(const Elem& x);

// Membership in Phi_sigma: (x) coprime to the modulus, the Frobenius class
// of (x) equal to sigma, and every odd-valuation place lying in the identity
// fiber or the sigma fiber.  The tilde variant tests the squarefree
// representative, i.e. membership up to square factors.
bool phi_membership(const Elem& x, const GalElem& sigma, const CftConstants& cs);
bool phi_tilde_membership(const Elem& x, const GalElem& sigma, const CftConstants& cs);

// Semilocal ring attached to sigma and p (and, for the identity class, the
// companion q): the intersection of the local rings at the places in delta.
struct SemilocalRing {
  GalElem sigma;
  Elem p;
  std::optional<Elem> q;     // identity class only
  std::vector<Place> delta;  // ascending finite places coprime to the modulus
};

// delta is an intersection of ramification loci, restricted to the finite
// places coprime to the modulus.  Writing D(x, y) for that restriction of
// the ramification set of the pair (x, y):
//   sigma = (-1,-1): D(a,p) ^ D(b,p)
//   sigma = (-1, 1): D(a,p) ^ D(ab,p)    (F_q(t): also ^ D(a, c*p))
//   sigma = ( 1,-1): D(b,p) ^ D(ab,p)    (F_q(t): also ^ D(b, d*p))
//   sigma = ( 1, 1): D(a*p,q) ^ D(b*p,q), companion q mandatory
// For p in Phi_sigma the result is exactly the sigma fiber of the odd-
// valuation places of p.
SemilocalRing r_delta(const GalElem& sigma, const Elem& p,
                      const std::optional<Elem>& q, const CftConstants& cs);
SemilocalRing r_delta(const GalElem& sigma, const Elem& p, const CftConstants& cs);

enum class CosetMode { Units, OnePlusJ };

// Whether x lies in c * K^2 * R^x (Units) or in c * K^2 * (1 + J(R))
// (OnePlusJ), decided place by place on delta: even valuation of x/c, plus,
// for OnePlusJ, a square residue (vacuous at the dyadic place).  x, c != 0.
bool coset_membership(const Elem& x, const Elem& c, const SemilocalRing& R,
                      CosetMode mode);
// Whether x lies in the Jacobson radical J(R): positive valuation on delta
// (0 qualifies).
bool j_membership(const Elem& x, const SemilocalRing& R);
// Whether x is a unit of R: valuation zero on delta (0 is not).
bool ring_unit(const Elem& x, const SemilocalRing& R);

// Membership in Psi: p in ~Phi_(1,1), q in ~Phi_(-1,-1), the product of
// (a*p, q)_v over all modulus places (the infinite one included) equals -1,
// and p in a * K^2 * (1 + J) of the ring attached to ((-1,-1), q).
bool psi_membership(const Elem& p, const Elem& q, const CftConstants& cs);

// Searches for verified constants: over Q, pairs of distinct primes that
// are 1 mod 8, ascending; over F_q(t), the least constant nonresidue
// together with the first suitable monic polynomial (c = d = that
// nonresidue).  Throws search_exhausted with diagnostics when every
// candidate fails verification.
CftConstants find_constants(const GlobalField& K, long bound);

// Desk-scale certification of a constants choice: all four Frobenius fibers
// attained, ray classes mapping to the identity, delta = fiber identities on
// sample members of each Phi_sigma, and an isolating companion pair for the
// first identity-fiber prime.  On success records the bound and the check
// tallies; on failure returns false and, if given, fills `why`.
bool verify_constants(CftConstants& cs, long bound, std::string* why = nullptr);

// A pair (p [, q]) whose ring isolates the single place fp: delta == {fp}.
// For sigma != identity, p generates fp; for the identity class a companion
// q is found by an ascending scan over primes of residue size <= bound, and
// exhaustion throws search_exhausted.  Requires artin_map(fp) == sigma.
struct IsolatedPrime {
  Elem p;
  std::optional<Elem> q;
};
IsolatedPrime isolate_prime(const Place& fp, const GalElem& sigma,
                            const CftConstants& cs, long bound);

// Valuation-and-residue sentence over R asserting that the norm-residue
// symbol of (x, y) at the isolated place equals sign (+1 or -1).  Exact when
// delta(R) is a single tame place isolated by R's parameters.  x, y != 0.
bool isolated_sign_sentence(const Elem& x, const Elem& y, int sign,
                            const SemilocalRing& R, const CftConstants& cs);

// (+1 sentence for (x1,x2) and -1 for (y1,y2)), or the other way around:
// the two symbols disagree at the isolated place.
bool sign_disagreement_sentence(const Elem& x1, const Elem& x2, const Elem& y1,
                                const Elem& y2, const SemilocalRing& R,
                                const CftConstants& cs);

// First place - infinite modulus place, finite modulus places ascending,
// then the remaining support of the inputs ascending - where
// (a1,a2)_w * (-a3,-a4)_w = -1, optionally also requiring the discriminant
// a1*a2*a3*a4 to be a local square there.  nullopt when no place qualifies.
std::optional<Place> symbol_disagreement_place(const Elem& a1, const Elem& a2,
                                               const Elem& a3, const Elem& a4,
                                               const CftConstants& cs,
                                               bool require_square_discriminant);

// Whether (a1,a2)_w = -(-a3,-a4)_w at some place, decided through the
// splitting-class machinery: a direct check at the modulus places, then the
// isolating-ring sentences at the candidate places coprime to the modulus.
// A bounded companion search that runs out throws search_exhausted
// ("undetermined at this bound"), never a false negative.
bool eval_lemma42(const Elem& a1, const Elem& a2, const Elem& a3,
                  const Elem& a4, const CftConstants& cs, long search_bound);

}  // namespace anisotope
