#include "anisotope/field.hpp"

#include <cctype>

namespace anisotope {

Place Place::finite_prime(const mpz_class& p) {
  if (p < 2 || !is_probable_prime(p)) throw std::domain_error("not a prime: " + p.get_str());
  Place v;
  v.kind_ = Kind::FinitePrime;
  v.p_ = p;
  return v;
}

Place Place::real_inf() {
  Place v;
  v.kind_ = Kind::RealInf;
  return v;
}

Place Place::finite_poly(const FqPoly& pi) {
  if (!pi.is_monic() || !pi.is_irreducible())
    throw std::domain_error("not a monic irreducible: " + pi.str());
  Place v;
  v.kind_ = Kind::FinitePoly;
  v.pi_ = pi;
  v.q_ = pi.q();
  return v;
}

Place Place::degree_inf(int q) {
  Place v;
  v.kind_ = Kind::DegreeInf;
  v.q_ = q;
  return v;
}

GlobalField Place::field() const {
  if (kind_ == Kind::FinitePrime || kind_ == Kind::RealInf) return GlobalField::rationals();
  return GlobalField::function_field(q_);
}

bool Place::is_dyadic() const { return kind_ == Kind::FinitePrime && p_ == 2; }

const mpz_class& Place::prime() const {
  if (kind_ != Kind::FinitePrime) throw internal_error("Place::prime: wrong kind");
  return p_;
}

const FqPoly& Place::poly() const {
  if (kind_ != Kind::FinitePoly) throw internal_error("Place::poly: wrong kind");
  return pi_;
}

mpz_class Place::residue_size() const {
  switch (kind_) {
    case Kind::FinitePrime: return p_;
    case Kind::FinitePoly: {
      mpz_class n;
      mpz_ui_pow_ui(n.get_mpz_t(), static_cast<unsigned long>(q_),
                    static_cast<unsigned long>(pi_.degree()));
      return n;
    }
    case Kind::DegreeInf: return mpz_class(q_);
    case Kind::RealInf: break;
  }
  throw std::domain_error("real place has no residue field");
}

int Place::deg() const {
  switch (kind_) {
    case Kind::FinitePrime: return 1;
    case Kind::FinitePoly: return pi_.degree();
    case Kind::DegreeInf: return 1;
    case Kind::RealInf: break;
  }
  throw std::domain_error("real place has no degree");
}

bool Place::operator==(const Place& o) const {
  if (kind_ != o.kind_) return false;
  switch (kind_) {
    case Kind::FinitePrime: return p_ == o.p_;
    case Kind::FinitePoly: return pi_ == o.pi_;
    default: return q_ == o.q_;
  }
}

std::strong_ordering Place::operator<=>(const Place& o) const {
  bool inf_a = is_infinite(), inf_b = o.is_infinite();
  if (inf_a != inf_b) return inf_a <=> inf_b;  // finite first
  if (inf_a) return std::strong_ordering::equal;
  if (kind_ != o.kind_) throw internal_error("Place: comparing places of different fields");
  if (kind_ == Kind::FinitePrime) return cmp(p_, o.p_) <=> 0;
  return pi_ <=> o.pi_;
}

std::string Place::str() const {
  switch (kind_) {
    case Kind::FinitePrime: return p_.get_str();
    case Kind::RealInf: return "inf";
    case Kind::FinitePoly: return pi_.str();
    case Kind::DegreeInf: return "deg";
  }
  throw internal_error("Place::str: bad kind");
}

std::optional<Place> Place::parse(const GlobalField& K, const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) return std::nullopt;
  if (s == "inf" || s == "infinity" || s == "oo")
    return K.is_q() ? real_inf() : degree_inf(K.q);
  if (s == "deg" && K.is_fqt()) return degree_inf(K.q);
  if (K.is_q()) {
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    mpz_class p(s);
    if (!is_probable_prime(p)) return std::nullopt;
    return finite_prime(p);
  }
  auto pi = FqPoly::parse(K.q, s);
  if (!pi || !pi->is_monic() || !pi->is_irreducible()) return std::nullopt;
  return finite_poly(*pi);
}

}  // namespace anisotope
