#pragma once

#include <gmpxx.h>

#include <compare>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anisotope/common.hpp"

namespace anisotope {

// K is Q or F_q(t) with q an odd prime.  Ring of integers: Z resp. F_q[t];
// the infinite place is the real place resp. the degree place.
struct GlobalField {
  enum class Kind { Q, FqT };
  Kind kind = Kind::Q;
  int q = 0;  // size of the constant field (FqT only)

  static GlobalField rationals() { return GlobalField{Kind::Q, 0}; }
  static GlobalField function_field(int q);  // q odd prime >= 3

  bool is_q() const { return kind == Kind::Q; }
  bool is_fqt() const { return kind == Kind::FqT; }
  bool operator==(const GlobalField&) const = default;

  std::string tag() const;  // "Q", "F3(t)"
  static std::optional<GlobalField> parse_tag(const std::string& s);
};

// Dense polynomial over F_q.  Coefficients reduced to 0..q-1, no leading
// zeros; the zero polynomial has an empty coefficient vector and degree -1.
class FqPoly {
 public:
  FqPoly() = default;  // null placeholder (q = 0); unusable in arithmetic
  explicit FqPoly(int q) : q_(q) {}
  FqPoly(int q, std::vector<long> coeffs);
  static FqPoly constant(int q, long c);
  static FqPoly variable(int q);  // t
  static FqPoly from_index(int q, unsigned long k);  // base-q digits of k

  int q() const { return q_; }
  bool is_null() const { return q_ == 0; }
  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  int coeff(int i) const;  // 0 beyond the degree
  int leading() const;     // nonzero polynomials only
  bool is_constant() const { return c_.size() <= 1; }
  bool is_monic() const { return !c_.empty() && c_.back() == 1; }
  const std::vector<int>& coeffs() const { return c_; }

  FqPoly monic_scaled() const;  // f / leading(f)
  FqPoly derivative() const;

  friend FqPoly operator+(const FqPoly& a, const FqPoly& b);
  friend FqPoly operator-(const FqPoly& a, const FqPoly& b);
  friend FqPoly operator-(const FqPoly& a);
  friend FqPoly operator*(const FqPoly& a, const FqPoly& b);
  static std::pair<FqPoly, FqPoly> divmod(const FqPoly& a, const FqPoly& b);
  friend FqPoly operator/(const FqPoly& a, const FqPoly& b);
  friend FqPoly operator%(const FqPoly& a, const FqPoly& b);

  static FqPoly gcd(FqPoly a, FqPoly b);  // monic (or zero)
  static FqPoly powmod(const FqPoly& base, const mpz_class& e, const FqPoly& mod);

  bool divides(const FqPoly& f) const;
  bool is_irreducible() const;

  bool operator==(const FqPoly&) const = default;
  // Total order: degree first, then coefficients from the leading one down.
  std::strong_ordering operator<=>(const FqPoly& o) const;

  std::string str() const;  // "2*t^2+t+1", "0"
  static std::optional<FqPoly> parse(int q, const std::string& text);

 private:
  int q_ = 0;
  std::vector<int> c_;
  void reduce();
};

// g with g*g == f, if one exists (g is chosen with a canonical leading
// coefficient: the smaller square root of leading(f)).
std::optional<FqPoly> poly_exact_sqrt(const FqPoly& f);

// Exact element of K.  Canonical form: reduced fraction with positive
// denominator (Q) or monic denominator coprime to the numerator (FqT).
class Elem {
 public:
  Elem() : field_(GlobalField::rationals()) {}
  explicit Elem(const GlobalField& K) : field_(K), num_(K.is_fqt() ? FqPoly(K.q) : FqPoly()), den_(K.is_fqt() ? FqPoly::constant(K.q, 1) : FqPoly()) {}
  Elem(const GlobalField& K, long n);
  static Elem rational(const mpq_class& r);
  static Elem integer(const mpz_class& z);
  static Elem poly(const FqPoly& p);
  static Elem ratfun(FqPoly num, FqPoly den);  // den != 0
  static Elem one(const GlobalField& K) { return Elem(K, 1); }
  static Elem zero(const GlobalField& K) { return Elem(K, 0); }

  const GlobalField& field() const { return field_; }
  bool is_zero() const;
  bool is_one() const;

  const mpq_class& rat() const;  // Q only
  const FqPoly& num() const;     // FqT only
  const FqPoly& den() const;     // FqT only

  Elem operator-() const;
  friend Elem operator+(const Elem& a, const Elem& b);
  friend Elem operator-(const Elem& a, const Elem& b);
  friend Elem operator*(const Elem& a, const Elem& b);
  friend Elem operator/(const Elem& a, const Elem& b);  // b != 0
  Elem inverse() const;
  bool operator==(const Elem& o) const;
  bool operator!=(const Elem& o) const { return !(*this == o); }

  int sign() const;  // Q only: -1, 0, +1

  std::string str() const;
  static std::optional<Elem> parse(const GlobalField& K, const std::string& text);

 private:
  GlobalField field_;
  mpq_class rat_;
  FqPoly num_, den_;
  void canonicalize_fqt();
};

// A place of K.  Finite places are primes of the ring of integers; the
// infinite place is RealInf (Q) or DegreeInf (FqT, uniformizer 1/t).
class Place {
 public:
  enum class Kind { FinitePrime, RealInf, FinitePoly, DegreeInf };

  static Place finite_prime(const mpz_class& p);
  static Place real_inf();
  static Place finite_poly(const FqPoly& pi);  // monic irreducible
  static Place degree_inf(int q);

  Kind kind() const { return kind_; }
  GlobalField field() const;
  bool is_finite() const { return kind_ == Kind::FinitePrime || kind_ == Kind::FinitePoly; }
  bool is_infinite() const { return !is_finite(); }
  bool is_dyadic() const;  // the prime 2 of Q
  const mpz_class& prime() const;
  const FqPoly& poly() const;
  int q() const { return q_; }

  mpz_class residue_size() const;  // N(v); no value at RealInf
  int deg() const;                 // 1 / deg(pi) / 1; no value at RealInf

  bool operator==(const Place& o) const;
  bool operator!=(const Place& o) const { return !(*this == o); }
  // Finite places ascending, the infinite place last.
  std::strong_ordering operator<=>(const Place& o) const;

  std::string str() const;  // "2", "inf", "t^2+1", "deg"
  static std::optional<Place> parse(const GlobalField& K, const std::string& text);

 private:
  Kind kind_ = Kind::FinitePrime;
  mpz_class p_;
  FqPoly pi_;
  int q_ = 0;
};

struct Factorization {
  Elem unit;  // +-1 over Q; a constant of F_q^x over FqT
  std::vector<std::pair<Place, int>> factors;  // finite, ascending, exponents != 0
};

inline constexpr int kValInfinity = std::numeric_limits<int>::max();

Factorization factor(const Elem& x);           // x != 0
int valuation(const Elem& x, const Place& v);  // kValInfinity for x = 0
// +1 iff u is a square in the residue field at v.  v must have odd residue
// size (every finite place except 2 of Q; DegreeInf is accepted, residue
// field F_q) and u must be a unit at v.
int residue_symbol(const Elem& u, const Place& v);
bool is_square(const Elem& x);                 // global square test
bool is_square(const Elem& x, const Place& v); // local square test
std::vector<Elem> square_class_reps(const Place& v);

// x / pi^{v(x)} at a finite place; at DegreeInf the unit part is the constant
// leading-coefficient ratio.  x != 0.
Elem unit_part(const Elem& x, const Place& v);

// Finite places of nonzero valuation, ascending.
std::vector<Place> support(const Elem& x);

// Low-level factorizations (deterministic output order).
std::vector<std::pair<mpz_class, int>> factor_integer(mpz_class n);    // n >= 1
std::vector<std::pair<FqPoly, int>> factor_poly(const FqPoly& f);      // monic factors
bool is_probable_prime(const mpz_class& n);
std::vector<FqPoly> monic_irreducibles_of_degree(int q, int d);

// Square root in F_q, if any.
std::optional<int> sqrt_mod(int c, int q);
// Legendre symbol of a nonzero constant of F_q.
int legendre_const(long c, int q);

// Canonical element enumeration for bounded searches.  Height of a nonzero
// n/d is max(|n|, d) over Q and max(deg n, deg d) + 1 over FqT; height 0 is
// {0}.  Order within a height shell is deterministic (denominator, then
// numerator).
std::vector<Elem> elements_of_height(const GlobalField& K, int h);

}  // namespace anisotope
