#include "anisotope/hilbert.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "anisotope/common.hpp"

namespace anisotope {

namespace {

void require_nonzero(const Elem& a, const Elem& b, const char* who) {
  if (a.is_zero() || b.is_zero())
    throw std::domain_error(std::string(who) + ": arguments must be nonzero");
  if (a.field().tag() != b.field().tag())
    throw std::domain_error(std::string(who) + ": mixed fields");
}

// (u-1)/2 mod 2 for a 2-adic unit u given mod 8.
int eps2(long u8) { return (u8 % 4 == 3) ? 1 : 0; }
// (u^2-1)/8 mod 2 for a 2-adic unit u given mod 8.
int omega2(long u8) { return (u8 == 3 || u8 == 5) ? 1 : 0; }

// The odd part of a nonzero rational, reduced mod 8.  n/d with d odd
// satisfies n/d = n*d mod 8 since d^2 = 1 mod 8.
long odd_part_mod8(const Elem& x) {
  mpz_class n = x.rat().get_num(), d = x.rat().get_den();
  mpz_class tmp;
  mpz_remove(tmp.get_mpz_t(), n.get_mpz_t(), mpz_class(2).get_mpz_t());
  n = tmp;
  mpz_remove(tmp.get_mpz_t(), d.get_mpz_t(), mpz_class(2).get_mpz_t());
  d = tmp;
  mpz_class m = n * d;
  mpz_class r;
  mpz_mod_ui(r.get_mpz_t(), m.get_mpz_t(), 8);
  return r.get_si();
}

}  // namespace

Quaternion::Quaternion(Elem x0_, Elem x1_, Elem x2_, Elem x3_, Elem a_, Elem b_)
    : x0(std::move(x0_)), x1(std::move(x1_)), x2(std::move(x2_)),
      x3(std::move(x3_)), a(std::move(a_)), b(std::move(b_)) {
  if (a.is_zero() || b.is_zero())
    throw std::domain_error("Quaternion: parameters a, b must be nonzero");
}

bool Quaternion::operator==(const Quaternion& o) const {
  return x0 == o.x0 && x1 == o.x1 && x2 == o.x2 && x3 == o.x3 && a == o.a && b == o.b;
}

bool RamificationSet::contains(const Place& v) const {
  return std::find(places.begin(), places.end(), v) != places.end();
}

int hilbert_symbol(const Elem& a, const Elem& b, const Place& v) {
  require_nonzero(a, b, "hilbert_symbol");
  if (v.field().tag() != a.field().tag())
    throw std::domain_error("hilbert_symbol: place of the wrong field");

  if (v.kind() == Place::Kind::RealInf)
    return (a.sign() < 0 && b.sign() < 0) ? -1 : 1;

  if (v.is_dyadic()) {
    long alpha = valuation(a, v), beta = valuation(b, v);
    long u8 = odd_part_mod8(a), w8 = odd_part_mod8(b);
    long e = static_cast<long>(eps2(u8)) * eps2(w8) + alpha * omega2(w8) + beta * omega2(u8);
    return (e % 2 != 0) ? -1 : 1;
  }

  // Tame place (odd residue size), including DegreeInf.
  long alpha = valuation(a, v), beta = valuation(b, v);
  int s = 1;
  if ((alpha % 2 != 0) && (beta % 2 != 0) && v.residue_size() % 4 == 3) s = -s;
  if (beta % 2 != 0) s *= residue_symbol(unit_part(a, v), v);
  if (alpha % 2 != 0) s *= residue_symbol(unit_part(b, v), v);
  return s;
}

RamificationSet delta_set(const Elem& a, const Elem& b) {
  require_nonzero(a, b, "delta_set");
  const GlobalField& K = a.field();
  std::set<Place> cand;
  for (const Place& v : support(a)) cand.insert(v);
  for (const Place& v : support(b)) cand.insert(v);
  if (K.is_q()) {
    cand.insert(Place::finite_prime(2));
    cand.insert(Place::real_inf());
  } else {
    cand.insert(Place::degree_inf(K.q));
  }
  RamificationSet out{a, b, {}};
  for (const Place& v : cand)
    if (hilbert_symbol(a, b, v) == -1) out.places.push_back(v);
  if (out.places.size() % 2 != 0)
    throw internal_error("delta_set: odd ramification count violates the product formula");
  return out;
}

std::pair<Elem, Elem> reduced_invariants(const Quaternion& x) {
  Elem trd = x.x0 + x.x0;
  Elem nrd = x.x0 * x.x0 - x.a * x.x1 * x.x1 - x.b * x.x2 * x.x2 +
             x.a * x.b * x.x3 * x.x3;
  return {trd, nrd};
}

namespace {

// Candidate coordinate values of height <= bound, shell by shell.  Over Q
// only nonnegative values are kept (the searched polynomial is even in each
// coordinate).  Returns the flat list plus each entry's height.
std::pair<std::vector<Elem>, std::vector<int>> coordinate_candidates(
    const GlobalField& K, long bound) {
  std::vector<Elem> vals;
  std::vector<int> hts;
  for (int h = 0; h <= bound; ++h) {
    for (const Elem& e : elements_of_height(K, h)) {
      if (K.is_q() && e.sign() < 0) continue;
      vals.push_back(e);
      hts.push_back(h);
    }
  }
  return {std::move(vals), std::move(hts)};
}

}  // namespace

std::optional<Quaternion> s_witness_search(const Elem& tval, const Elem& a,
                                           const Elem& b, long bound) {
  require_nonzero(a, b, "s_witness_search");
  if (bound <= 0) throw std::domain_error("s_witness_search: bound must be positive");
  const GlobalField& K = a.field();
  Elem x0 = tval / Elem(K, 2);
  // Nrd = 1 with x0 fixed:  -a x1^2 - b x2^2 + ab x3^2 = 1 - x0^2.
  Elem target = Elem::one(K) - x0 * x0;

  auto [vals, hts] = coordinate_candidates(K, bound);
  std::vector<Elem> asq(vals.size()), bsq(vals.size()), absq(vals.size());
  Elem ab = a * b;
  for (size_t i = 0; i < vals.size(); ++i) {
    Elem sq = vals[i] * vals[i];
    asq[i] = a * sq;
    bsq[i] = b * sq;
    absq[i] = ab * sq;
  }

  // Height shells ascending; within a shell, colexicographic (x1 fastest).
  for (long s = 0; s <= bound; ++s) {
    for (size_t i3 = 0; i3 < vals.size(); ++i3) {
      if (hts[i3] > s) break;
      for (size_t i2 = 0; i2 < vals.size(); ++i2) {
        if (hts[i2] > s) break;
        Elem partial = absq[i3] - bsq[i2] - target;  // need a x1^2 == partial
        for (size_t i1 = 0; i1 < vals.size(); ++i1) {
          if (hts[i1] > s) break;
          if (std::max({hts[i1], hts[i2], hts[i3]}) != s) continue;
          if (asq[i1] == partial)
            return Quaternion(x0, vals[i1], vals[i2], vals[i3], a, b);
        }
      }
    }
  }
  return std::nullopt;
}

bool t_membership(const Elem& x, const Elem& a, const Elem& b) {
  require_nonzero(a, b, "t_membership");
  if (x.field().tag() != a.field().tag())
    throw std::domain_error("t_membership: mixed fields");
  if (x.field().is_q() && hilbert_symbol(a, b, Place::real_inf()) != 1)
    throw std::domain_error("t_membership: the algebra must split at the real place");
  RamificationSet delta = delta_set(a, b);
  for (const Place& v : delta.places)
    if (v.is_finite() && valuation(x, v) < 0) return false;
  return true;
}

std::optional<std::pair<Quaternion, Quaternion>> t_witness_search(
    const Elem& x, const Elem& a, const Elem& b, long bound) {
  require_nonzero(a, b, "t_witness_search");
  if (x.field().is_q() && hilbert_symbol(a, b, Place::real_inf()) != 1)
    throw std::domain_error("t_witness_search: the algebra must split at the real place");
  const GlobalField& K = x.field();

  // First-component traces: the unit traces +-2, then doubled elements by
  // height (the trace of y determines the trace x - Trd(y) of z).
  std::vector<Elem> traces = {Elem(K, 2), Elem(K, -2)};
  for (int h = 0; h <= bound; ++h)
    for (const Elem& e : elements_of_height(K, h)) {
      Elem t = e + e;
      if (std::find(traces.begin(), traces.end(), t) == traces.end())
        traces.push_back(t);
    }

  for (const Elem& s : traces) {
    std::optional<Quaternion> y = s_witness_search(s, a, b, bound);
    if (!y) continue;
    std::optional<Quaternion> z = s_witness_search(x - s, a, b, bound);
    if (!z) continue;
    if (!t_membership(x, a, b))
      throw internal_error("t_witness_search: witness for a non-integral trace");
    return std::make_pair(*y, *z);
  }
  return std::nullopt;
}

bool is_norm(const Elem& x, const Elem& y) {
  require_nonzero(x, y, "is_norm");
  if (is_square(y)) return true;
  return delta_set(y, x).places.empty();
}

}  // namespace anisotope
