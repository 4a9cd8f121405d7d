#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anisotope/field.hpp"

namespace anisotope {

using Matrix = std::vector<std::vector<Elem>>;

// Quadratic form x^t A x with A symmetric; built from an arbitrary square
// coefficient matrix by A_ij = (a_ij + a_ji)/2.
class QuadForm {
 public:
  QuadForm(const GlobalField& K, const Matrix& entries);
  static QuadForm diagonal(const GlobalField& K, const std::vector<Elem>& coeffs);

  int dim() const { return static_cast<int>(a_.size()); }
  const GlobalField& field() const { return field_; }
  const Matrix& matrix() const { return a_; }
  Elem evaluate(const std::vector<Elem>& x) const;
  bool is_zero_form() const;

 private:
  GlobalField field_;
  Matrix a_;
};

// Diagonalized core: C^t A C = diag(coeffs, 0..0) exactly, with every
// listed coefficient nonzero and rank(A) = coeffs.size().
struct DiagForm {
  GlobalField field;
  std::vector<Elem> coeffs;
  int ambient = 0;
  Matrix c;
  int rank() const { return static_cast<int>(coeffs.size()); }
};

// Exact symmetric congruence reduction.  Zero diagonal pivots use a swap
// when a later diagonal entry is nonzero, else the hyperbolic substitution
// (u, v) -> (u+v, u-v) on an off-diagonal pivot.  Deterministic.
DiagForm diagonalize(const QuadForm& f);

// Isotropy of the nondegenerate core over the completion at v:
//   n=1: never.  n=2: -b1*b2 a local square.  n=3: (-b1*b2, -b1*b3)_v = +1.
//   n=4: not [b1*b2*b3*b4 a local square and (b1,b2)_v = -(-b3,-b4)_v].
//   n>=5 at a nonarchimedean place: always.  RealInf: mixed signs.
// A zero coefficient is a domain error (strip the radical first).
bool local_isotropic(const DiagForm& d, const Place& v);

enum class Verdict { Isotropic, Anisotropic };

struct IsotropyCertificate {
  enum class Kind { Isotropic, Anisotropic, DegenerateIsotropic };
  Kind kind = Kind::Isotropic;

  // Isotropic: a nonzero vector with f(witness) = 0, when the bounded
  // search finds one (empty = verdict stands without an explicit witness).
  // DegenerateIsotropic: a nonzero kernel vector of A.
  std::vector<Elem> witness;

  // Anisotropic: the obstructed place, the diagonal core coefficients, the
  // congruence matrix tying them to f, and the obstruction kind, one of
  // "definite", "rank-one", "nonsquare", "symbol", "class-pair".
  std::optional<Place> place;
  std::vector<Elem> diag;
  Matrix congruence;
  std::string obstruction;
};

struct Decision {
  Verdict verdict = Verdict::Isotropic;
  IsotropyCertificate certificate;
};

// The places that can obstruct isotropy, in the order decide sweeps them:
// the infinite place first, then finite places ascending — over Q the odd
// places first and the dyadic place last.
std::vector<Place> critical_places(const GlobalField& K, const std::vector<Elem>& coeffs);

// Exact global isotropy decision (local-global over the critical places).
// The all-zero form is isotropic by convention; a rank-deficient form is
// isotropic through a kernel vector.  Isotropic verdicts trigger a bounded
// witness search (heights 10^3, 10^4, 10^5 over Q; 2, 3, 4 over FqT); the
// verdict never depends on the search outcome.
Decision decide(const QuadForm& f);
Decision decide(const GlobalField& K, const std::vector<Elem>& diag_coeffs);

// Re-verifies a certificate from scratch using only field arithmetic and
// Hilbert symbols (never the decision procedure).  Malformed certificates
// are invalid, with the reason reported through `reason` when non-null.
bool check_certificate(const QuadForm& f, const IsotropyCertificate& cert,
                       std::string* reason = nullptr);

}  // namespace anisotope
