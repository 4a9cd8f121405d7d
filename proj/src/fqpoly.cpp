#include "anisotope/field.hpp"

#include <algorithm>
#include <cctype>

namespace anisotope {

namespace {

long mod_inverse(long a, long m) {
  long t = 0, newt = 1, r = m, newr = ((a % m) + m) % m;
  while (newr != 0) {
    long qq = r / newr;
    t = std::exchange(newt, t - qq * newt);
    r = std::exchange(newr, r - qq * newr);
  }
  if (r != 1) throw internal_error("mod_inverse: not invertible");
  return ((t % m) + m) % m;
}

void check_same_q(const FqPoly& a, const FqPoly& b) {
  if (a.q() == 0 || a.q() != b.q()) throw internal_error("FqPoly: mismatched fields");
}

}  // namespace

FqPoly::FqPoly(int q, std::vector<long> coeffs) : q_(q) {
  if (q < 3) throw internal_error("FqPoly: invalid q");
  c_.reserve(coeffs.size());
  for (long c : coeffs) c_.push_back(static_cast<int>(((c % q) + q) % q));
  reduce();
}

FqPoly FqPoly::constant(int q, long c) { return FqPoly(q, std::vector<long>{c}); }

FqPoly FqPoly::variable(int q) { return FqPoly(q, std::vector<long>{0, 1}); }

FqPoly FqPoly::from_index(int q, unsigned long k) {
  std::vector<long> c;
  while (k != 0) {
    c.push_back(static_cast<long>(k % static_cast<unsigned long>(q)));
    k /= static_cast<unsigned long>(q);
  }
  return FqPoly(q, std::move(c));
}

void FqPoly::reduce() {
  while (!c_.empty() && c_.back() == 0) c_.pop_back();
}

int FqPoly::coeff(int i) const {
  if (i < 0 || i >= static_cast<int>(c_.size())) return 0;
  return c_[static_cast<size_t>(i)];
}

int FqPoly::leading() const {
  if (c_.empty()) throw internal_error("FqPoly::leading on zero");
  return c_.back();
}

FqPoly FqPoly::monic_scaled() const {
  if (is_zero()) throw internal_error("FqPoly::monic_scaled on zero");
  long inv = mod_inverse(leading(), q_);
  FqPoly r(q_);
  r.c_.resize(c_.size());
  for (size_t i = 0; i < c_.size(); ++i)
    r.c_[i] = static_cast<int>((static_cast<long>(c_[i]) * inv) % q_);
  return r;
}

FqPoly FqPoly::derivative() const {
  FqPoly r(q_);
  for (size_t i = 1; i < c_.size(); ++i)
    r.c_.push_back(static_cast<int>((static_cast<long>(c_[i]) * static_cast<long>(i)) % q_));
  r.reduce();
  return r;
}

FqPoly operator+(const FqPoly& a, const FqPoly& b) {
  check_same_q(a, b);
  FqPoly r(a.q_);
  r.c_.resize(std::max(a.c_.size(), b.c_.size()), 0);
  for (size_t i = 0; i < r.c_.size(); ++i)
    r.c_[i] = (a.coeff(static_cast<int>(i)) + b.coeff(static_cast<int>(i))) % a.q_;
  r.reduce();
  return r;
}

FqPoly operator-(const FqPoly& a) {
  FqPoly r(a.q_);
  r.c_.resize(a.c_.size());
  for (size_t i = 0; i < a.c_.size(); ++i) r.c_[i] = (a.q_ - a.c_[i]) % a.q_;
  r.reduce();
  return r;
}

FqPoly operator-(const FqPoly& a, const FqPoly& b) { return a + (-b); }

FqPoly operator*(const FqPoly& a, const FqPoly& b) {
  check_same_q(a, b);
  FqPoly r(a.q_);
  if (a.is_zero() || b.is_zero()) return r;
  r.c_.assign(a.c_.size() + b.c_.size() - 1, 0);
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i] == 0) continue;
    for (size_t j = 0; j < b.c_.size(); ++j) {
      long v = r.c_[i + j] + static_cast<long>(a.c_[i]) * b.c_[j];
      r.c_[i + j] = static_cast<int>(v % a.q_);
    }
  }
  r.reduce();
  return r;
}

std::pair<FqPoly, FqPoly> FqPoly::divmod(const FqPoly& a, const FqPoly& b) {
  check_same_q(a, b);
  if (b.is_zero()) throw internal_error("FqPoly: division by zero");
  int q = a.q_;
  FqPoly quot(q), rem = a;
  int db = b.degree();
  if (rem.degree() < db) return {quot, rem};
  quot.c_.assign(static_cast<size_t>(rem.degree() - db) + 1, 0);
  long lb_inv = mod_inverse(b.leading(), q);
  while (!rem.is_zero() && rem.degree() >= db) {
    int k = rem.degree() - db;
    long f = (static_cast<long>(rem.leading()) * lb_inv) % q;
    quot.c_[static_cast<size_t>(k)] = static_cast<int>(f);
    // rem -= f * t^k * b
    for (int i = 0; i <= db; ++i) {
      long v = rem.c_[static_cast<size_t>(i + k)] - f * b.c_[static_cast<size_t>(i)];
      rem.c_[static_cast<size_t>(i + k)] = static_cast<int>(((v % q) + q) % q);
    }
    rem.reduce();
  }
  quot.reduce();
  return {quot, rem};
}

FqPoly operator/(const FqPoly& a, const FqPoly& b) { return FqPoly::divmod(a, b).first; }
FqPoly operator%(const FqPoly& a, const FqPoly& b) { return FqPoly::divmod(a, b).second; }

FqPoly FqPoly::gcd(FqPoly a, FqPoly b) {
  check_same_q(a, b);
  while (!b.is_zero()) {
    FqPoly r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  if (a.is_zero()) return a;
  return a.monic_scaled();
}

FqPoly FqPoly::powmod(const FqPoly& base, const mpz_class& e, const FqPoly& mod) {
  if (e < 0) throw internal_error("FqPoly::powmod: negative exponent");
  FqPoly result = FqPoly::constant(base.q(), 1) % mod;
  FqPoly acc = base % mod;
  size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  if (e == 0) return result;
  for (size_t i = 0; i < bits; ++i) {
    if (mpz_tstbit(e.get_mpz_t(), i)) result = (result * acc) % mod;
    if (i + 1 < bits) acc = (acc * acc) % mod;
  }
  return result;
}

bool FqPoly::divides(const FqPoly& f) const {
  if (is_zero()) return f.is_zero();
  return (f % *this).is_zero();
}

// Rabin's test: f of degree n is irreducible iff t^{q^n} = t (mod f) and
// gcd(t^{q^{n/r}} - t, f) = 1 for every prime r | n.
bool FqPoly::is_irreducible() const {
  int n = degree();
  if (n <= 0) return false;
  if (n == 1) return true;
  const FqPoly t = FqPoly::variable(q_);
  std::vector<int> prime_divs;
  int m = n;
  for (int r = 2; r * r <= m; ++r)
    if (m % r == 0) {
      prime_divs.push_back(r);
      while (m % r == 0) m /= r;
    }
  if (m > 1) prime_divs.push_back(m);
  mpz_class qz(q_);
  for (int r : prime_divs) {
    mpz_class e;
    mpz_pow_ui(e.get_mpz_t(), qz.get_mpz_t(), static_cast<unsigned long>(n / r));
    FqPoly h = powmod(t, e, *this);
    if (!FqPoly::gcd(h - t, *this).is_constant()) return false;
  }
  mpz_class e;
  mpz_pow_ui(e.get_mpz_t(), qz.get_mpz_t(), static_cast<unsigned long>(n));
  return powmod(t, e, *this) == t % *this;
}

std::strong_ordering FqPoly::operator<=>(const FqPoly& o) const {
  if (degree() != o.degree()) return degree() <=> o.degree();
  for (int i = degree(); i >= 0; --i)
    if (coeff(i) != o.coeff(i)) return coeff(i) <=> o.coeff(i);
  return std::strong_ordering::equal;
}

std::string FqPoly::str() const {
  if (is_zero()) return "0";
  std::string s;
  for (int i = degree(); i >= 0; --i) {
    int c = coeff(i);
    if (c == 0) continue;
    if (!s.empty()) s += "+";
    if (i == 0) {
      s += std::to_string(c);
    } else {
      if (c != 1) {
        s += std::to_string(c);
        s += "*";
      }
      s += "t";
      if (i > 1) {
        s += "^";
        s += std::to_string(i);
      }
    }
  }
  return s;
}

// Grammar: sum of terms "c", "c*t^k", "c*t", "t^k", "t" with optional '*',
// signs '+'/'-' between terms, ASCII only (callers normalize unicode minus).
std::optional<FqPoly> FqPoly::parse(int q, const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s += ch;
  if (s.empty()) return std::nullopt;
  FqPoly acc(q);
  size_t i = 0;
  int sign = 1;
  if (s[i] == '+' || s[i] == '-') {
    sign = s[i] == '-' ? -1 : 1;
    ++i;
  }
  while (i < s.size()) {
    // one term
    long coef = 1;
    bool saw_digits = false;
    long val = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      val = val * 10 + (s[i] - '0');
      if (val > (1L << 40)) return std::nullopt;
      saw_digits = true;
      ++i;
    }
    if (saw_digits) coef = val;
    int exp = 0;
    if (i < s.size() && (s[i] == '*' || s[i] == 't')) {
      if (s[i] == '*') {
        ++i;
        if (i >= s.size() || s[i] != 't') return std::nullopt;
      }
      if (i < s.size() && s[i] == 't') {
        ++i;
        exp = 1;
        if (i < s.size() && s[i] == '^') {
          ++i;
          long e = 0;
          bool de = false;
          while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            e = e * 10 + (s[i] - '0');
            if (e > 4096) return std::nullopt;
            de = true;
            ++i;
          }
          if (!de) return std::nullopt;
          exp = static_cast<int>(e);
        }
      }
    } else if (!saw_digits) {
      return std::nullopt;
    }
    std::vector<long> mono(static_cast<size_t>(exp) + 1, 0);
    mono[static_cast<size_t>(exp)] = sign * coef;
    acc = acc + FqPoly(q, std::move(mono));
    if (i == s.size()) return acc;
    if (s[i] == '+' || s[i] == '-') {
      sign = s[i] == '-' ? -1 : 1;
      ++i;
      if (i == s.size()) return std::nullopt;
    } else {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<FqPoly> poly_exact_sqrt(const FqPoly& f) {
  if (f.is_zero()) return FqPoly(f.q());
  int d = f.degree();
  if (d % 2 != 0) return std::nullopt;
  int q = f.q();
  auto s = sqrt_mod(f.leading(), q);
  if (!s) return std::nullopt;
  int h = d / 2;
  // Determine g coefficient by coefficient from the top: the t^{h+k}
  // coefficient of g^2 is 2*g_h*g_k plus terms in already-known g_i, i > k.
  std::vector<long> g(static_cast<size_t>(h) + 1, 0);
  g[static_cast<size_t>(h)] = *s;
  long inv2gh = mod_inverse((2L * *s) % q, q);
  for (int k = h - 1; k >= 0; --k) {
    long acc = 0;
    for (int i = k + 1; i <= h; ++i) {
      int j = h + k - i;
      if (j < k + 1 || j > h) continue;
      acc = (acc + g[static_cast<size_t>(i)] * g[static_cast<size_t>(j)]) % q;
    }
    long target = ((f.coeff(h + k) - acc) % q + q) % q;
    g[static_cast<size_t>(k)] = (target * inv2gh) % q;
  }
  FqPoly cand(q, std::move(g));
  if (cand * cand == f) return cand;
  return std::nullopt;
}

}  // namespace anisotope
