#include "anisotope/field.hpp"

#include <algorithm>
#include <cctype>

namespace anisotope {

namespace {

void check_same_field(const Elem& a, const Elem& b) {
  if (!(a.field() == b.field())) throw internal_error("Elem: mismatched fields");
}

// Replace the UTF-8 minus sign with ASCII '-', drop whitespace.
std::string normalize_text(const std::string& in) {
  std::string out;
  for (size_t i = 0; i < in.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(in[i]);
    if (std::isspace(c)) continue;
    if (c == 0xE2 && i + 2 < in.size() && static_cast<unsigned char>(in[i + 1]) == 0x88 &&
        static_cast<unsigned char>(in[i + 2]) == 0x92) {
      out += '-';
      i += 2;
      continue;
    }
    out += in[i];
  }
  return out;
}

bool valid_rational_text(const std::string& s) {
  if (s.empty()) return false;
  size_t i = s[0] == '-' || s[0] == '+' ? 1 : 0;
  bool digits = false, slash = false, digits_after = false;
  for (; i < s.size(); ++i) {
    if (std::isdigit(static_cast<unsigned char>(s[i]))) {
      (slash ? digits_after : digits) = true;
    } else if (s[i] == '/' && !slash && digits) {
      slash = true;
    } else {
      return false;
    }
  }
  return digits && (!slash || digits_after);
}

}  // namespace

GlobalField GlobalField::function_field(int q) {
  if (q < 3 || q % 2 == 0 || !is_probable_prime(mpz_class(q)))
    throw std::domain_error("function field requires an odd prime q");
  return GlobalField{Kind::FqT, q};
}

std::string GlobalField::tag() const {
  if (is_q()) return "Q";
  return "F" + std::to_string(q) + "(t)";
}

std::optional<GlobalField> GlobalField::parse_tag(const std::string& s) {
  if (s == "Q" || s == "q") return rationals();
  if (s.size() >= 5 && (s[0] == 'F' || s[0] == 'f')) {
    size_t i = 1;
    long q = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      q = q * 10 + (s[i] - '0');
      if (q > 10000) return std::nullopt;
      ++i;
    }
    if (q >= 3 && s.substr(i) == "(t)" && q % 2 == 1 && is_probable_prime(mpz_class(q)))
      return GlobalField{Kind::FqT, static_cast<int>(q)};
  }
  return std::nullopt;
}

Elem::Elem(const GlobalField& K, long n) : field_(K) {
  if (K.is_q()) {
    rat_ = mpq_class(n);
  } else {
    num_ = FqPoly::constant(K.q, n);
    den_ = FqPoly::constant(K.q, 1);
  }
}

Elem Elem::rational(const mpq_class& r) {
  Elem e(GlobalField::rationals());
  e.rat_ = r;
  e.rat_.canonicalize();
  return e;
}

Elem Elem::integer(const mpz_class& z) { return rational(mpq_class(z)); }

Elem Elem::poly(const FqPoly& p) {
  if (p.is_null()) throw internal_error("Elem::poly: null polynomial");
  Elem e(GlobalField::function_field(p.q()));
  e.num_ = p;
  return e;
}

Elem Elem::ratfun(FqPoly num, FqPoly den) {
  if (den.is_zero()) throw std::domain_error("zero denominator");
  Elem e(GlobalField::function_field(num.q()));
  e.num_ = std::move(num);
  e.den_ = std::move(den);
  e.canonicalize_fqt();
  return e;
}

void Elem::canonicalize_fqt() {
  if (num_.is_zero()) {
    den_ = FqPoly::constant(field_.q, 1);
    return;
  }
  FqPoly g = FqPoly::gcd(num_, den_);
  if (!g.is_constant()) {
    num_ = num_ / g;
    den_ = den_ / g;
  }
  if (!den_.is_monic()) {
    long lc = den_.leading();
    FqPoly inv = FqPoly::constant(field_.q, 1);
    // divide both by lc(den)
    long invlc = 1;
    for (long x = 1; x < field_.q; ++x)
      if ((x * lc) % field_.q == 1) invlc = x;
    inv = FqPoly::constant(field_.q, invlc);
    num_ = num_ * inv;
    den_ = den_ * inv;
  }
}

bool Elem::is_zero() const { return field_.is_q() ? rat_ == 0 : num_.is_zero(); }

bool Elem::is_one() const {
  if (field_.is_q()) return rat_ == 1;
  return num_ == FqPoly::constant(field_.q, 1) && den_ == FqPoly::constant(field_.q, 1);
}

const mpq_class& Elem::rat() const {
  if (!field_.is_q()) throw internal_error("Elem::rat on function-field element");
  return rat_;
}

const FqPoly& Elem::num() const {
  if (!field_.is_fqt()) throw internal_error("Elem::num on rational element");
  return num_;
}

const FqPoly& Elem::den() const {
  if (!field_.is_fqt()) throw internal_error("Elem::den on rational element");
  return den_;
}

Elem Elem::operator-() const {
  Elem r = *this;
  if (field_.is_q()) {
    r.rat_ = -rat_;
  } else {
    r.num_ = -num_;
  }
  return r;
}

Elem operator+(const Elem& a, const Elem& b) {
  check_same_field(a, b);
  Elem r(a.field());
  if (a.field().is_q()) return Elem::rational(a.rat() + b.rat());
  return Elem::ratfun(a.num() * b.den() + b.num() * a.den(), a.den() * b.den());
}

Elem operator-(const Elem& a, const Elem& b) { return a + (-b); }

Elem operator*(const Elem& a, const Elem& b) {
  check_same_field(a, b);
  if (a.field().is_q()) return Elem::rational(a.rat() * b.rat());
  return Elem::ratfun(a.num() * b.num(), a.den() * b.den());
}

Elem operator/(const Elem& a, const Elem& b) {
  check_same_field(a, b);
  if (b.is_zero()) throw std::domain_error("division by zero");
  if (a.field().is_q()) return Elem::rational(a.rat() / b.rat());
  return Elem::ratfun(a.num() * b.den(), a.den() * b.num());
}

Elem Elem::inverse() const { return Elem::one(field_) / *this; }

bool Elem::operator==(const Elem& o) const {
  if (!(field_ == o.field_)) return false;
  if (field_.is_q()) return rat_ == o.rat_;
  return num_ == o.num_ && den_ == o.den_;
}

int Elem::sign() const {
  if (!field_.is_q()) throw std::domain_error("sign is defined over Q only");
  return sgn(rat_);
}

std::string Elem::str() const {
  if (field_.is_q()) return rat_.get_str();
  auto wrap = [](const FqPoly& p) {
    std::string s = p.str();
    if (s.find('+') != std::string::npos) return "(" + s + ")";
    return s;
  };
  if (den_ == FqPoly::constant(field_.q, 1)) return num_.str();
  return wrap(num_) + "/" + wrap(den_);
}

std::optional<Elem> Elem::parse(const GlobalField& K, const std::string& text) {
  std::string s = normalize_text(text);
  if (s.empty()) return std::nullopt;
  if (K.is_q()) {
    if (!valid_rational_text(s)) return std::nullopt;
    mpq_class r;
    if (r.set_str(s, 10) != 0) return std::nullopt;
    if (r.get_den() == 0) return std::nullopt;
    r.canonicalize();
    return rational(r);
  }
  // Split at the top-level '/' (parentheses only wrap whole numerator or
  // denominator).
  int depth = 0;
  size_t slash = std::string::npos;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    else if (s[i] == ')') { if (--depth < 0) return std::nullopt; }
    else if (s[i] == '/' && depth == 0) {
      if (slash != std::string::npos) return std::nullopt;
      slash = i;
    }
  }
  if (depth != 0) return std::nullopt;
  auto strip = [](std::string p) -> std::optional<std::string> {
    if (p.size() >= 2 && p.front() == '(' && p.back() == ')') {
      int d = 0;
      for (size_t i = 0; i + 1 < p.size(); ++i) {
        if (p[i] == '(') ++d;
        if (p[i] == ')') --d;
        if (d == 0) return p;  // outer parens do not wrap the whole string
      }
      return p.substr(1, p.size() - 2);
    }
    return p;
  };
  std::string ns = slash == std::string::npos ? s : s.substr(0, slash);
  std::string ds = slash == std::string::npos ? "1" : s.substr(slash + 1);
  auto nw = strip(ns);
  auto dw = strip(ds);
  if (!nw || !dw) return std::nullopt;
  auto np = FqPoly::parse(K.q, *nw);
  auto dp = FqPoly::parse(K.q, *dw);
  if (!np || !dp || dp->is_zero()) return std::nullopt;
  return ratfun(std::move(*np), std::move(*dp));
}

}  // namespace anisotope
