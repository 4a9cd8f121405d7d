#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anisotope/cft.hpp"
#include "anisotope/field.hpp"

namespace anisotope {

// Multivariate polynomial over K in named variables, exact coefficients.
// The name "t" is reserved in every field (over F_q(t) it denotes the
// coefficient-field generator), keeping formulas field-agnostic.
class MultiPoly {
 public:
  MultiPoly() : K_(GlobalField::rationals()) {}
  explicit MultiPoly(const GlobalField& K) : K_(K) {}  // zero
  static MultiPoly constant(const Elem& c);
  static MultiPoly variable(const GlobalField& K, const std::string& name);

  const GlobalField& field() const { return K_; }
  bool is_zero() const { return terms_.empty(); }
  // Closed polynomial (no variables) as an element.
  std::optional<Elem> constant_value() const;

  friend MultiPoly operator+(const MultiPoly& a, const MultiPoly& b);
  friend MultiPoly operator-(const MultiPoly& a, const MultiPoly& b);
  friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b);
  MultiPoly operator-() const;

  // Exact evaluation; every variable must be bound.
  Elem eval(const std::map<std::string, Elem>& env) const;
  std::vector<std::string> free_vars() const;  // sorted, distinct
  MultiPoly rename(const std::map<std::string, std::string>& table) const;

  bool operator==(const MultiPoly& o) const;

  // Canonical text: terms in a fixed monomial order, integer (constant-
  // polynomial) coefficients bare, all others brace-quoted, e.g.
  // "x^2 - 2*y^2" or "{t+1}*x^2 - 1".  parse inverts str exactly.
  std::string str() const;
  static std::optional<MultiPoly> parse(const GlobalField& K,
                                        const std::string& text);

  using Monomial = std::map<std::string, int>;  // variable -> exponent >= 1
  const std::map<Monomial, Elem>& terms() const { return terms_; }

 private:
  GlobalField K_;
  std::map<Monomial, Elem> terms_;  // nonzero coefficients only
  void add_term(const Monomial& m, const Elem& c);
};

// Existential-positive formula: polynomial equations f = 0, conjunction,
// disjunction, existential quantification, and named semantic predicates.
// Negation and universal quantifiers are not representable.
struct Formula {
  enum class Kind { PolyEq, And, Or, Exists, Pred };

  Kind kind = Kind::PolyEq;
  MultiPoly poly;                    // PolyEq: asserts poly = 0
  std::vector<Formula> children;     // And/Or: >= 1; Exists: exactly 1
  std::vector<std::string> vars;     // Exists: nonempty, distinct
  std::string pred;                  // Pred name
  std::vector<std::string> args;     // Pred args: variable names or literals

  static Formula poly_eq(MultiPoly p);
  static Formula conj(std::vector<Formula> fs);
  static Formula disj(std::vector<Formula> fs);
  static Formula exists(std::vector<std::string> vs, Formula body);
  static Formula pred_node(std::string name, std::vector<std::string> as);

  bool operator==(const Formula& o) const;
  // Free variables: poly variables and predicate args that look like
  // variables, minus everything bound by an enclosing Exists.
  std::vector<std::string> free_vars() const;
};

// Structural well-formedness: child counts, nonempty distinct Exists
// variables, predicate names drawn from the fixed vocabulary.
bool valid_structure(const Formula& f);

// Serialization: (poly "x^2 - 2*y^2"), (and f g ...), (or f g ...),
// (exists (x y) f), (pred nonsquare "-1" ...).  Round-trip stable.
std::string to_sexpr(const Formula& f);
std::optional<Formula> parse_sexpr(const GlobalField& K,
                                   const std::string& text);

// Assignment of elements to variable names.
struct Witness {
  std::map<std::string, Elem> values;
};

// Semantics of one predicate; args arrive with witness variables already
// substituted by element literals.
using PredFn =
    std::function<bool(const std::string& name,
                       const std::vector<std::string>& args)>;

// Structural evaluation under a witness covering every bound variable.
// Polynomial equations by exact arithmetic, predicates via `preds`.
bool eval_formula(const Formula& f, const Witness& w, const PredFn& preds);

// The predicate vocabulary wired to the library:
//   nonsquare[x]                        x not a square of K
//   nonnorm[x, d]                       x not a norm from K(sqrt(d))
//   coset_unit[x, c, sigma, p(, q)]     x in c*K^2*R^x of the (sigma, p, q) ring
//   coset_one_plus_j[x, c, sigma, p(, q)]  likewise for c*K^2*(1+J(R))
//   phi[x, sigma]                       x in the sigma splitting class (up to squares)
//   psi[p, q]                           (p, q) an admissible companion pair
//   local_obstruction[a1, a2, a3, a4]   some modulus place has symbol
//                                       disagreement and a square discriminant
PredFn semantic_pred_evaluator(const CftConstants& cs);

// exists x1..xm, y: sum a_i x_i^2 = 0 and some x_i * y = 1.  The
// invertibility disjunction encodes nontriviality in any characteristic.
Formula emit_isotropy_system(const std::vector<Elem>& coeffs);

// exists y0..y3, z0..z3: Nrd(y) = 1, Nrd(z) = 1, 2*y0 + 2*z0 = x, with
// Nrd the (a, b)-quaternion norm; the trace-sum variable x stays free.
Formula emit_t_membership(const Elem& a, const Elem& b,
                          const std::string& x = "x");

// Context for the valuation sentences at an isolated place: the class
// sigma, the ring parameters p (and q, identity class only) as argument
// strings (variable names or literals), and the odd-residue cofactor s.
struct DaggerContext {
  GalElem sigma;
  std::string p;
  std::optional<std::string> q;
  std::string s;
};

// The sentence asserting symbol(x, y) = sign at the place isolated by the
// context ring.  sign = -1 is the two-clause form with the inner "y or
// -xy" alternatives; sign = +1 covers all four even/odd valuation sectors.
Formula emit_dagger(const DaggerContext& ctx, const Elem& x, const Elem& y,
                    int sign);

// Anisotropy of the diagonal form <a_1..a_m>:
//   m=1: 0 = 0 (always anisotropic).
//   m=2: nonsquare[-a1*a2].
//   m=3: nonsquare[-a1*a2] and nonnorm[-a1*a3, -a1*a2].
//   m=4: local_obstruction or, per Galois class, an existential branch
//        binding p (and q) with the class membership predicate, the two
//        sign-disagreement pairings of dagger sentences, and a local
//        square-discriminant coset conjunct.
//   m>=5 over Q: all a_i or all -a_i sums of four squares (definiteness).
//   m>=5 over F_q(t): 1 = 0 (never anisotropic).
// Zero coefficients or m != #coeffs are domain errors.
Formula emit_anisotropy_formula(int m, const std::vector<Elem>& coeffs,
                                const CftConstants& cs);

// Pred-free formulas collapse to one equation: And via f^2 - d*g^2 with d
// a fixed nonsquare (2 over Q, t over F_q(t)), Or via f*g, Exists by
// concatenating variable lists (renaming apart on collision).  The result
// is a single PolyEq, wrapped in one Exists when variables remain.
Formula flatten(const Formula& f);

// Decides the truth of an emitted anisotropy formula with no witness:
// closed equations and predicates directly, conjunction/disjunction
// structurally, four-squares blocks by the real sign test, and the m=4
// class branches by locating a disagreement place with square
// discriminant, isolating it, and checking the branch under the
// constructed (p, q) witness.  A branch value contradicting the local
// symbols is an internal error; bounded companion searches may throw
// search_exhausted.
bool semantic_truth(const Formula& f, const CftConstants& cs,
                    long search_bound);

}  // namespace anisotope
