#include <algorithm>
#include <map>

#include "anisotope/field.hpp"

namespace anisotope {

bool is_probable_prime(const mpz_class& n) {
  return mpz_probab_prime_p(n.get_mpz_t(), 30) != 0;
}

namespace {

// Deterministic Brent-Pollard rho; n odd composite, not a perfect power of a
// tiny prime (trial division already ran).
mpz_class rho_split(const mpz_class& n) {
  for (unsigned long c = 1;; ++c) {
    mpz_class x = 2, y = 2, d = 1, diff;
    while (d == 1) {
      x = (x * x + c) % n;
      y = (y * y + c) % n;
      y = (y * y + c) % n;
      diff = x > y ? x - y : y - x;
      if (diff == 0) break;  // cycle without factor; retry with next c
      mpz_gcd(d.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
    }
    if (d != 1 && d != n && d != 0) return d;
  }
}

void factor_into(mpz_class n, std::map<mpz_class, int>& out) {
  if (n == 1) return;
  if (is_probable_prime(n)) {
    ++out[n];
    return;
  }
  mpz_class d = rho_split(n);
  factor_into(d, out);
  factor_into(n / d, out);
}

}  // namespace

std::vector<std::pair<mpz_class, int>> factor_integer(mpz_class n) {
  if (n < 1) throw std::domain_error("factor_integer requires n >= 1");
  std::map<mpz_class, int> acc;
  for (long p : {2L, 3L, 5L, 7L, 11L, 13L, 17L, 19L, 23L, 29L, 31L, 37L}) {
    while (mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(p))) {
      ++acc[mpz_class(p)];
      n /= static_cast<unsigned long>(p);
    }
  }
  for (long p = 41; p < 2000 && n > 1; p += 2) {
    if (mpz_cmp_ui(n.get_mpz_t(), static_cast<unsigned long>(p) * static_cast<unsigned long>(p)) < 0)
      break;
    while (mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(p))) {
      ++acc[mpz_class(p)];
      n /= static_cast<unsigned long>(p);
    }
  }
  if (n > 1) factor_into(n, acc);
  return {acc.begin(), acc.end()};
}

namespace {

// Distinct-degree then equal-degree splitting; f monic squarefree with
// nonzero derivative.  Deterministic: splitting elements are tried in
// canonical polynomial order.
void edf(const FqPoly& f, int d, std::vector<FqPoly>& out) {
  if (f.degree() == d) {
    out.push_back(f);
    return;
  }
  int q = f.q();
  mpz_class e, qz(q);
  mpz_pow_ui(e.get_mpz_t(), qz.get_mpz_t(), static_cast<unsigned long>(d));
  e = (e - 1) / 2;
  const FqPoly one = FqPoly::constant(q, 1);
  for (unsigned long k = static_cast<unsigned long>(q);; ++k) {
    FqPoly u = FqPoly::from_index(q, k);
    FqPoly w = FqPoly::powmod(u, e, f) - one;
    FqPoly g = FqPoly::gcd(w, f);
    if (!g.is_constant() && g.degree() < f.degree()) {
      edf(g, d, out);
      edf(f / g, d, out);
      return;
    }
  }
}

std::vector<FqPoly> squarefree_irreducibles(const FqPoly& f) {
  std::vector<FqPoly> out;
  int q = f.q();
  FqPoly v = f;
  FqPoly h = FqPoly::variable(q) % v;
  const FqPoly t = FqPoly::variable(q);
  mpz_class qz(q);
  int d = 0;
  while (v.degree() > 0) {
    ++d;
    if (2 * d > v.degree()) {
      out.push_back(v);
      break;
    }
    h = FqPoly::powmod(h, qz, v);
    FqPoly g = FqPoly::gcd(h - t, v);
    if (!g.is_constant()) {
      edf(g, d, out);
      v = v / g;
      h = h % v;
    }
  }
  return out;
}

void distinct_irreducibles(const FqPoly& f, std::vector<FqPoly>& out) {
  if (f.degree() <= 0) return;
  int q = f.q();
  if (f.derivative().is_zero()) {
    // f = g(t)^q in characteristic q: take the q-th root (Frobenius fixes F_q).
    std::vector<long> c;
    for (int i = 0; i <= f.degree(); i += q) c.push_back(f.coeff(i));
    distinct_irreducibles(FqPoly(q, std::move(c)), out);
    return;
  }
  FqPoly sf = f / FqPoly::gcd(f, f.derivative());
  auto part = squarefree_irreducibles(sf);
  out.insert(out.end(), part.begin(), part.end());
  FqPoly rest = f;
  for (const FqPoly& pi : part)
    while (pi.divides(rest)) rest = rest / pi;
  distinct_irreducibles(rest, out);
}

}  // namespace

std::vector<std::pair<FqPoly, int>> factor_poly(const FqPoly& f) {
  if (f.is_zero()) throw std::domain_error("factor_poly requires f != 0");
  FqPoly work = f.monic_scaled();
  std::vector<FqPoly> irr;
  distinct_irreducibles(work, irr);
  std::sort(irr.begin(), irr.end());
  irr.erase(std::unique(irr.begin(), irr.end()), irr.end());
  std::vector<std::pair<FqPoly, int>> out;
  for (const FqPoly& pi : irr) {
    int e = 0;
    while (pi.divides(work)) {
      work = work / pi;
      ++e;
    }
    out.emplace_back(pi, e);
  }
  if (work.degree() != 0)
    throw internal_error("factor_poly: incomplete factorization of " + f.str());
  return out;
}

std::vector<FqPoly> monic_irreducibles_of_degree(int q, int d) {
  std::vector<FqPoly> out;
  unsigned long qd = 1;
  for (int i = 0; i < d; ++i) qd *= static_cast<unsigned long>(q);
  // monic of degree d: t^d + (polys of index < q^d)
  std::vector<long> lead(static_cast<size_t>(d) + 1, 0);
  lead[static_cast<size_t>(d)] = 1;
  FqPoly td(q, lead);
  for (unsigned long k = 0; k < qd; ++k) {
    FqPoly f = td + FqPoly::from_index(q, k);
    if (f.is_irreducible()) out.push_back(f);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::optional<int> sqrt_mod(int c, int q) {
  c = ((c % q) + q) % q;
  for (int s = 0; s <= q / 2; ++s)
    if ((s * s) % q == c) return s;
  return std::nullopt;
}

int legendre_const(long c, int q) {
  c = ((c % q) + q) % q;
  if (c == 0) throw std::domain_error("legendre_const: zero argument");
  long r = 1, base = c;
  for (int e = (q - 1) / 2; e > 0; e >>= 1) {
    if (e & 1) r = (r * base) % q;
    base = (base * base) % q;
  }
  return r == 1 ? 1 : -1;
}

Factorization factor(const Elem& x) {
  if (x.is_zero()) throw std::domain_error("factor of zero");
  const GlobalField K = x.field();
  Factorization out{Elem::one(K), {}};
  std::map<Place, int> acc;
  if (K.is_q()) {
    mpz_class n = x.rat().get_num(), d = x.rat().get_den();
    if (n < 0) {
      out.unit = Elem(K, -1);
      n = -n;
    }
    for (auto& [p, e] : factor_integer(n)) acc[Place::finite_prime(p)] += e;
    for (auto& [p, e] : factor_integer(d)) acc[Place::finite_prime(p)] -= e;
  } else {
    out.unit = Elem::poly(FqPoly::constant(K.q, x.num().leading()));
    for (auto& [pi, e] : factor_poly(x.num())) acc[Place::finite_poly(pi)] += e;
    for (auto& [pi, e] : factor_poly(x.den())) acc[Place::finite_poly(pi)] -= e;
  }
  for (auto& [v, e] : acc)
    if (e != 0) out.factors.emplace_back(v, e);
  return out;
}

int valuation(const Elem& x, const Place& v) {
  if (!(x.field() == v.field())) throw internal_error("valuation: mismatched fields");
  if (x.is_zero()) return kValInfinity;
  switch (v.kind()) {
    case Place::Kind::RealInf:
      throw std::domain_error("the real place carries no valuation");
    case Place::Kind::DegreeInf:
      return x.den().degree() - x.num().degree();
    case Place::Kind::FinitePrime: {
      mpz_class tmp;
      int a = static_cast<int>(mpz_remove(tmp.get_mpz_t(), x.rat().get_num_mpz_t(), v.prime().get_mpz_t()));
      int b = static_cast<int>(mpz_remove(tmp.get_mpz_t(), x.rat().get_den_mpz_t(), v.prime().get_mpz_t()));
      return a - b;
    }
    case Place::Kind::FinitePoly: {
      auto count = [&v](FqPoly f) {
        int e = 0;
        while (v.poly().divides(f)) {
          f = f / v.poly();
          ++e;
        }
        return e;
      };
      return count(x.num()) - count(x.den());
    }
  }
  throw internal_error("valuation: bad place");
}

Elem unit_part(const Elem& x, const Place& v) {
  if (x.is_zero()) throw std::domain_error("unit_part of zero");
  switch (v.kind()) {
    case Place::Kind::RealInf:
      throw std::domain_error("unit_part at the real place");
    case Place::Kind::DegreeInf: {
      // leading-coefficient ratio: the residue of x * t^{-v(x)} at infinity
      int lc = x.num().leading();  // den monic
      return Elem::poly(FqPoly::constant(x.field().q, lc));
    }
    case Place::Kind::FinitePrime: {
      int e = valuation(x, v);
      mpq_class pe(v.prime());
      mpq_class r = x.rat();
      if (e >= 0)
        for (int i = 0; i < e; ++i) r /= pe;
      else
        for (int i = 0; i < -e; ++i) r *= pe;
      return Elem::rational(r);
    }
    case Place::Kind::FinitePoly: {
      int e = valuation(x, v);
      Elem pi = Elem::poly(v.poly());
      Elem r = x;
      if (e >= 0)
        for (int i = 0; i < e; ++i) r = r / pi;
      else
        for (int i = 0; i < -e; ++i) r = r * pi;
      return r;
    }
  }
  throw internal_error("unit_part: bad place");
}

int residue_symbol(const Elem& u, const Place& v) {
  if (!(u.field() == v.field())) throw internal_error("residue_symbol: mismatched fields");
  if (v.kind() == Place::Kind::RealInf)
    throw std::domain_error("residue_symbol at the real place");
  if (v.is_dyadic())
    throw std::domain_error("residue_symbol at the even prime");
  if (u.is_zero() || valuation(u, v) != 0)
    throw std::domain_error("residue_symbol requires a unit at v");
  switch (v.kind()) {
    case Place::Kind::FinitePrime: {
      int a = mpz_legendre(u.rat().get_num_mpz_t(), v.prime().get_mpz_t());
      int b = mpz_legendre(u.rat().get_den_mpz_t(), v.prime().get_mpz_t());
      return a * b;
    }
    case Place::Kind::DegreeInf:
      return legendre_const(unit_part(u, v).num().leading(), v.q());
    case Place::Kind::FinitePoly: {
      mpz_class e = (v.residue_size() - 1) / 2;
      auto euler = [&](const FqPoly& f) {
        FqPoly r = FqPoly::powmod(f, e, v.poly());
        if (r == FqPoly::constant(f.q(), 1)) return 1;
        if (r == FqPoly::constant(f.q(), -1)) return -1;
        throw internal_error("residue_symbol: Euler criterion failed");
      };
      return euler(u.num()) * euler(u.den());
    }
    default:
      throw internal_error("residue_symbol: bad place");
  }
}

bool is_square(const Elem& x) {
  if (x.is_zero()) throw std::domain_error("is_square of zero");
  if (x.field().is_q()) {
    if (sgn(x.rat()) < 0) return false;
    return mpz_perfect_square_p(x.rat().get_num_mpz_t()) &&
           mpz_perfect_square_p(x.rat().get_den_mpz_t());
  }
  int q = x.field().q;
  int lc = x.num().leading();
  auto s = sqrt_mod(lc, q);
  if (!s) return false;
  return poly_exact_sqrt(x.num().monic_scaled()).has_value() &&
         poly_exact_sqrt(x.den()).has_value();
}

bool is_square(const Elem& x, const Place& v) {
  if (x.is_zero()) throw std::domain_error("is_square of zero");
  switch (v.kind()) {
    case Place::Kind::RealInf:
      return x.sign() > 0;
    case Place::Kind::FinitePrime:
      if (v.is_dyadic()) {
        if (valuation(x, v) % 2 != 0) return false;
        // odd part of x modulo 8; an odd d is its own inverse mod 8
        mpq_class u = unit_part(x, v).rat();
        mpz_class n8 = u.get_num() % 8, d8 = u.get_den() % 8;
        mpz_class u8 = ((n8 * d8) % 8 + 8) % 8;
        return u8 == 1;
      }
      [[fallthrough]];
    case Place::Kind::FinitePoly:
    case Place::Kind::DegreeInf: {
      if (valuation(x, v) % 2 != 0) return false;
      return residue_symbol(unit_part(x, v), v) == 1;
    }
  }
  throw internal_error("is_square: bad place");
}

std::vector<Elem> square_class_reps(const Place& v) {
  const GlobalField K = v.field();
  switch (v.kind()) {
    case Place::Kind::RealInf:
      return {Elem(K, 1), Elem(K, -1)};
    case Place::Kind::FinitePrime: {
      if (v.is_dyadic()) {
        std::vector<Elem> out;
        for (long u : {1L, -1L, 2L, -2L, 5L, -5L, 10L, -10L}) out.push_back(Elem(K, u));
        return out;
      }
      long u = 2;
      while (mpz_legendre(mpz_class(u).get_mpz_t(), v.prime().get_mpz_t()) != -1) ++u;
      Elem p = Elem::integer(v.prime());
      return {Elem(K, 1), Elem(K, u), p, Elem(K, u) * p};
    }
    case Place::Kind::FinitePoly: {
      // first nonresidue among units mod pi, in canonical enumeration order;
      // every from_index(q, k) with k < q^deg(pi) already has degree < deg(pi)
      Elem u = Elem(K, 1);
      for (unsigned long k = 2;; ++k) {
        FqPoly f = FqPoly::from_index(K.q, k);
        if (residue_symbol(Elem::poly(f), v) == -1) {
          u = Elem::poly(f);
          break;
        }
      }
      Elem pi = Elem::poly(v.poly());
      return {Elem(K, 1), u, pi, u * pi};
    }
    case Place::Kind::DegreeInf: {
      long c = 2;
      while (legendre_const(c, K.q) != -1) ++c;
      Elem u = Elem(K, c);
      Elem invt = Elem::ratfun(FqPoly::constant(K.q, 1), FqPoly::variable(K.q));
      return {Elem(K, 1), u, invt, u * invt};
    }
  }
  throw internal_error("square_class_reps: bad place");
}

std::vector<Place> support(const Elem& x) {
  std::vector<Place> out;
  for (auto& [v, e] : factor(x).factors) out.push_back(v);
  return out;
}

std::vector<Elem> elements_of_height(const GlobalField& K, int h) {
  std::vector<Elem> out;
  if (h <= 0) {
    if (h == 0) out.push_back(Elem::zero(K));
    return out;
  }
  if (K.is_q()) {
    for (long d = 1; d <= h; ++d) {
      for (long n = -h; n <= h; ++n) {
        if (n == 0) continue;
        if (std::max(std::labs(n), d) != h) continue;
        mpz_class g;
        mpz_gcd(g.get_mpz_t(), mpz_class(n).get_mpz_t(), mpz_class(d).get_mpz_t());
        if (g != 1) continue;
        out.push_back(Elem::rational(mpq_class(n, d)));
      }
    }
    return out;
  }
  // FqT: pairs (num, den) with den monic, gcd 1, max(deg) = h - 1
  int q = K.q;
  int dmax = h - 1;
  unsigned long qp = 1;
  for (int i = 0; i <= dmax; ++i) qp *= static_cast<unsigned long>(q);
  std::vector<FqPoly> dens, nums;
  for (int dd = 0; dd <= dmax; ++dd) {
    std::vector<long> lead(static_cast<size_t>(dd) + 1, 0);
    lead[static_cast<size_t>(dd)] = 1;
    FqPoly base(q, lead);
    unsigned long cnt = 1;
    for (int i = 0; i < dd; ++i) cnt *= static_cast<unsigned long>(q);
    for (unsigned long k = 0; k < cnt; ++k) dens.push_back(base + FqPoly::from_index(q, k));
  }
  for (unsigned long k = 1; k < qp; ++k) {
    FqPoly f = FqPoly::from_index(q, k);
    nums.push_back(f);
  }
  for (const FqPoly& d : dens) {
    for (const FqPoly& n : nums) {
      if (std::max(n.degree(), d.degree()) != dmax) continue;
      if (!FqPoly::gcd(n, d).is_constant()) continue;
      out.push_back(Elem::ratfun(n, d));
    }
  }
  return out;
}

}  // namespace anisotope
