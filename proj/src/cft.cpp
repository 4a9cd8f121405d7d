#include "anisotope/cft.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "anisotope/common.hpp"
#include "anisotope/hilbert.hpp"

namespace anisotope {

namespace {

Elem generator(const Place& v) {
  if (v.kind() == Place::Kind::FinitePrime) return Elem::integer(v.prime());
  if (v.kind() == Place::Kind::FinitePoly) return Elem::poly(v.poly());
  throw std::domain_error("an infinite place has no generator");
}

// Residue symbol of an even-valuation element at an odd finite place.
int chi(const Elem& x, const Place& v) {
  if (valuation(x, v) % 2 != 0)
    throw internal_error("chi: odd valuation at " + v.str());
  return residue_symbol(unit_part(x, v), v);
}

void require_nonzero(const Elem& x, const char* who) {
  if (x.is_zero()) throw std::domain_error(std::string(who) + ": zero argument");
}

void require_field(const Elem& x, const GlobalField& K, const char* who) {
  if (!(x.field() == K)) throw std::domain_error(std::string(who) + ": field mismatch");
}

std::vector<Place> restricted_delta(const Elem& x, const Elem& y,
                                    const CftConstants& cs) {
  std::vector<Place> out;
  for (const Place& v : delta_set(x, y).places)
    if (v.is_finite() && !cs.divides_modulus(v)) out.push_back(v);
  return out;
}

std::vector<Place> intersect(const std::vector<Place>& u,
                             const std::vector<Place>& w) {
  std::vector<Place> out;
  std::set_intersection(u.begin(), u.end(), w.begin(), w.end(),
                        std::back_inserter(out));
  return out;
}

}  // namespace

GalElem::GalElem(int ia, int ib) : on_a(ia), on_b(ib) {
  if ((ia != 1 && ia != -1) || (ib != 1 && ib != -1))
    throw std::domain_error("group element entries must be +-1");
}

const std::array<GalElem, 4>& GalElem::all() {
  static const std::array<GalElem, 4> k = {GalElem(1, 1), GalElem(-1, 1),
                                           GalElem(1, -1), GalElem(-1, -1)};
  return k;
}

std::string GalElem::str() const {
  std::ostringstream o;
  o << '(' << on_a << ',' << on_b << ')';
  return o.str();
}

std::vector<Place> CftConstants::modulus_places() const {
  std::vector<Place> out;
  out.reserve(modulus.size());
  for (const auto& [v, e] : modulus) out.push_back(v);
  return out;
}

std::vector<Place> CftConstants::finite_modulus_places() const {
  std::vector<Place> out;
  for (const auto& [v, e] : modulus)
    if (v.is_finite()) out.push_back(v);
  return out;
}

bool CftConstants::divides_modulus(const Place& v) const {
  for (const auto& [w, e] : modulus)
    if (w == v) return true;
  return false;
}

Elem CftConstants::s_for(const GalElem& sigma) const {
  if (sigma.on_a == -1) return a;
  if (sigma.on_b == -1) return b;
  throw std::domain_error("the identity class has no nonresidue constant");
}

GalElem artin_map(const Place& v, const CftConstants& cs) {
  if (!v.is_finite())
    throw std::domain_error("artin_map: the infinite place has no Frobenius class");
  if (cs.divides_modulus(v))
    throw std::domain_error("artin_map: place divides the modulus: " + v.str());
  if (valuation(cs.a, v) % 2 != 0 || valuation(cs.b, v) % 2 != 0)
    throw std::domain_error("artin_map: ramified place: " + v.str());
  return GalElem(chi(cs.a, v), chi(cs.b, v));
}

GalElem artin_map(const Elem& x, const CftConstants& cs) {
  require_nonzero(x, "artin_map");
  require_field(x, cs.K, "artin_map");
  GalElem acc;
  for (const auto& [v, e] : factor(x).factors) {
    if (cs.divides_modulus(v))
      throw std::domain_error("artin_map: ideal not coprime to the modulus at " +
                         v.str());
    if (e % 2 != 0) acc = acc * artin_map(v, cs);
  }
  return acc;
}

std::vector<std::pair<Place, int>> admissible_modulus(const GlobalField& K,
                                                      const Elem& a,
                                                      const Elem& b) {
  require_nonzero(a, "admissible_modulus");
  require_nonzero(b, "admissible_modulus");
  require_field(a, K, "admissible_modulus");
  require_field(b, K, "admissible_modulus");
  if (is_square(a) || is_square(b) || is_square(a * b))
    throw std::domain_error(
        "admissible_modulus: a, b and ab must all be nonsquares");
  std::set<Place> fin;
  for (const Place& v : support(a)) fin.insert(v);
  for (const Place& v : support(b)) fin.insert(v);
  std::vector<std::pair<Place, int>> out;
  if (K.is_q()) {
    out.emplace_back(Place::finite_prime(2), 3);
    for (const Place& v : fin)
      if (!v.is_dyadic()) out.emplace_back(v, 1);
    std::sort(out.begin(), out.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    out.emplace_back(Place::real_inf(), 1);
  } else {
    for (const Place& v : fin) out.emplace_back(v, 1);
    out.emplace_back(Place::degree_inf(K.q), 1);
  }
  return out;
}

PPartition p_partition(const Elem& x, const CftConstants& cs) {
  require_nonzero(x, "p_partition");
  require_field(x, cs.K, "p_partition");
  PPartition part;
  for (const auto& [v, e] : factor(x).factors) {
    if (e % 2 == 0) continue;
    part.places.push_back(v);
    if (cs.divides_modulus(v))
      part.modulus_divisors.push_back(v);
    else
      part.fibers[artin_map(v, cs)].push_back(v);
  }
  return part;
}

Elem squarefree_representative(const Elem& x) {
  require_nonzero(x, "squarefree_representative");
  Elem acc = Elem::one(x.field());
  for (const auto& [v, e] : factor(x).factors)
    if (e % 2 != 0) acc = acc * generator(v);
  return acc;
}

bool phi_membership(const Elem& x, const GalElem& sigma,
                    const CftConstants& cs) {
  require_nonzero(x, "phi_membership");
  require_field(x, cs.K, "phi_membership");
  for (const Place& v : cs.finite_modulus_places())
    if (valuation(x, v) != 0) return false;
  PPartition part = p_partition(x, cs);
  GalElem acc;
  for (const auto& [g, places] : part.fibers) {
    if (places.size() % 2 != 0) acc = acc * g;
    if (!places.empty() && !(g == GalElem()) && !(g == sigma)) return false;
  }
  return acc == sigma;
}

bool phi_tilde_membership(const Elem& x, const GalElem& sigma,
                          const CftConstants& cs) {
  require_nonzero(x, "phi_tilde_membership");
  return phi_membership(squarefree_representative(x), sigma, cs);
}

SemilocalRing r_delta(const GalElem& sigma, const Elem& p,
                      const std::optional<Elem>& q, const CftConstants& cs) {
  require_nonzero(p, "r_delta");
  require_field(p, cs.K, "r_delta");
  if (sigma.is_identity()) {
    if (!q) throw std::domain_error("r_delta: the identity class needs a companion q");
    require_nonzero(*q, "r_delta");
    require_field(*q, cs.K, "r_delta");
  } else if (q) {
    throw std::domain_error("r_delta: companion q only applies to the identity class");
  }
  const Elem& a = cs.a;
  const Elem& b = cs.b;
  std::vector<Place> delta;
  if (sigma.is_identity()) {
    delta = intersect(restricted_delta(a * p, *q, cs),
                      restricted_delta(b * p, *q, cs));
  } else if (sigma.on_a == -1 && sigma.on_b == -1) {
    delta = intersect(restricted_delta(a, p, cs), restricted_delta(b, p, cs));
  } else if (sigma.on_a == -1) {
    delta = intersect(restricted_delta(a, p, cs),
                      restricted_delta(a * b, p, cs));
    if (cs.K.is_fqt()) {
      if (!cs.c) throw std::domain_error("r_delta: constant c is missing");
      delta = intersect(delta, restricted_delta(a, *cs.c * p, cs));
    }
  } else {
    delta = intersect(restricted_delta(b, p, cs),
                      restricted_delta(a * b, p, cs));
    if (cs.K.is_fqt()) {
      if (!cs.d) throw std::domain_error("r_delta: constant d is missing");
      delta = intersect(delta, restricted_delta(b, *cs.d * p, cs));
    }
  }
  return SemilocalRing{sigma, p, q, std::move(delta)};
}

SemilocalRing r_delta(const GalElem& sigma, const Elem& p,
                      const CftConstants& cs) {
  return r_delta(sigma, p, std::nullopt, cs);
}

bool coset_membership(const Elem& x, const Elem& c, const SemilocalRing& R,
                      CosetMode mode) {
  require_nonzero(x, "coset_membership");
  require_nonzero(c, "coset_membership");
  Elem ratio = x / c;
  for (const Place& v : R.delta) {
    if (valuation(ratio, v) % 2 != 0) return false;
    if (mode == CosetMode::OnePlusJ && !v.is_dyadic() &&
        residue_symbol(unit_part(ratio, v), v) != 1)
      return false;
  }
  return true;
}

bool j_membership(const Elem& x, const SemilocalRing& R) {
  if (x.is_zero()) return true;
  for (const Place& v : R.delta)
    if (valuation(x, v) < 1) return false;
  return true;
}

bool ring_unit(const Elem& x, const SemilocalRing& R) {
  if (x.is_zero()) return false;
  for (const Place& v : R.delta)
    if (valuation(x, v) != 0) return false;
  return true;
}

bool psi_membership(const Elem& p, const Elem& q, const CftConstants& cs) {
  require_nonzero(p, "psi_membership");
  require_nonzero(q, "psi_membership");
  require_field(p, cs.K, "psi_membership");
  require_field(q, cs.K, "psi_membership");
  if (!phi_tilde_membership(p, GalElem(1, 1), cs)) return false;
  if (!phi_tilde_membership(q, GalElem(-1, -1), cs)) return false;
  int prod = 1;
  for (const auto& [v, e] : cs.modulus) prod *= hilbert_symbol(cs.a * p, q, v);
  if (prod != -1) return false;
  SemilocalRing R = r_delta(GalElem(-1, -1), q, cs);
  return coset_membership(p, cs.a, R, CosetMode::OnePlusJ);
}

namespace {

// Finite places coprime to the modulus with residue size at most `bound`,
// ascending.
std::vector<Place> classified_places(const CftConstants& cs, long bound) {
  std::vector<Place> out;
  if (cs.K.is_q()) {
    for (mpz_class r = 3; r <= bound; mpz_nextprime(r.get_mpz_t(), r.get_mpz_t())) {
      Place v = Place::finite_prime(r);
      if (!cs.divides_modulus(v)) out.push_back(v);
    }
  } else {
    mpz_class size = cs.K.q;
    for (int d = 1; size <= bound; ++d, size *= cs.K.q)
      for (const FqPoly& pi : monic_irreducibles_of_degree(cs.K.q, d)) {
        Place v = Place::finite_poly(pi);
        if (!cs.divides_modulus(v)) out.push_back(v);
      }
  }
  return out;
}

}  // namespace

IsolatedPrime isolate_prime(const Place& fp, const GalElem& sigma,
                            const CftConstants& cs, long bound) {
  if (!fp.is_finite() || cs.divides_modulus(fp))
    throw std::domain_error("isolate_prime: need a finite place coprime to the modulus");
  if (!(artin_map(fp, cs) == sigma))
    throw std::domain_error("isolate_prime: Frobenius class mismatch at " + fp.str());
  Elem p = generator(fp);
  if (!sigma.is_identity()) return IsolatedPrime{p, std::nullopt};
  const GalElem target(-1, -1);
  for (const Place& v : classified_places(cs, bound)) {
    if (v == fp || !(artin_map(v, cs) == target)) continue;
    Elem g = generator(v);
    // Over Q also try the negative generator; over F_q(t) the generator
    // twisted by the constant nonresidue.  Both change the symbols at the
    // modulus places without moving the underlying prime.
    std::array<Elem, 2> candidates = {g, cs.K.is_q() ? -g : cs.a * g};
    for (const Elem& q : candidates) {
      if (!psi_membership(p, q, cs)) continue;
      SemilocalRing R = r_delta(GalElem(1, 1), p, q, cs);
      if (R.delta.size() == 1 && R.delta.front() == fp)
        return IsolatedPrime{p, q};
    }
  }
  throw search_exhausted("isolate_prime: no isolating companion for " +
                         fp.str() + " with residue size <= " +
                         std::to_string(bound));
}

bool verify_constants(CftConstants& cs, long bound, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  std::map<std::string, long> n;

  if (cs.a.is_zero() || cs.b.is_zero()) return fail("zero constant");
  if (is_square(cs.a) || is_square(cs.b) || is_square(cs.a * cs.b))
    return fail("a, b, ab must all be nonsquares");
  if (cs.K.is_q() && (cs.a.sign() <= 0 || cs.b.sign() <= 0))
    return fail("a and b must be positive over Q");
  if (cs.K.is_fqt() && (!cs.c || !cs.d)) return fail("constants c, d missing");
  bool has_inf = false;
  for (const auto& [v, e] : cs.modulus) has_inf = has_inf || v.is_infinite();
  if (!has_inf) return fail("modulus lacks the infinite place");

  // Every Frobenius class must be attained at desk scale.
  std::map<GalElem, std::vector<Place>> fib;
  for (const Place& v : classified_places(cs, bound)) {
    fib[artin_map(v, cs)].push_back(v);
    ++n["classified"];
  }
  for (const GalElem& g : GalElem::all())
    if (fib[g].empty())
      return fail("Frobenius fiber " + g.str() + " not attained up to " +
                  std::to_string(bound));
  n["fibers"] = 4;

  // Ray classes must map to the identity.
  if (cs.K.is_q()) {
    mpz_class m_int = 1;
    for (const auto& [v, e] : cs.modulus)
      if (v.is_finite())
        for (int i = 0; i < e; ++i) m_int *= v.prime();
    for (mpz_class r = m_int + 1; r <= 4 * bound; r += m_int) {
      if (!is_probable_prime(r)) continue;
      if (!artin_map(Elem::integer(r), cs).is_identity())
        return fail("ray prime " + r.get_str() + " has nontrivial image");
      ++n["smoke"];
    }
  } else {
    FqPoly m_poly = FqPoly::constant(cs.K.q, 1);
    for (const auto& [v, e] : cs.modulus)
      if (v.is_finite())
        for (int i = 0; i < e; ++i) m_poly = m_poly * v.poly();
    const FqPoly one_poly = FqPoly::constant(cs.K.q, 1);
    mpz_class size = cs.K.q;
    for (int d = 1; size <= 4 * bound; ++d, size *= cs.K.q) {
      std::optional<GalElem> seen;
      for (const FqPoly& pi : monic_irreducibles_of_degree(cs.K.q, d)) {
        if (!(pi % m_poly == one_poly)) continue;
        GalElem g = artin_map(Place::finite_poly(pi), cs);
        if (seen && !(*seen == g))
          return fail("ray image not constant in degree " + std::to_string(d));
        seen = g;
        ++n["smoke-consistency"];
        if (d % 2 == 0) {
          if (!g.is_identity())
            return fail("even-degree ray prime " + pi.str() +
                        " has nontrivial image");
          ++n["smoke"];
        }
      }
    }
  }

  // The ring of each sampled Phi_sigma member must see exactly the sigma
  // fiber of its odd-valuation places.
  const Place id0 = fib[GalElem()].front();
  for (const GalElem& sigma : GalElem::all()) {
    if (sigma.is_identity()) continue;
    const auto& primes = fib[sigma];
    for (std::size_t i = 0; i < primes.size() && i < 2; ++i) {
      Elem p = generator(primes[i]);
      if (!phi_membership(p, sigma, cs))
        return fail("generator of " + primes[i].str() + " not in Phi" +
                    sigma.str());
      SemilocalRing rd = r_delta(sigma, p, cs);
      if (!(rd.delta == std::vector<Place>{primes[i]}))
        return fail("delta identity fails at " + primes[i].str() + " for " +
                    sigma.str());
      ++n["identities"];
    }
    Elem p2 = generator(primes.front()) * generator(id0);
    if (!phi_membership(p2, sigma, cs) ||
        !(r_delta(sigma, p2, cs).delta == std::vector<Place>{primes.front()}))
      return fail("delta identity fails for a composite member of Phi" +
                  sigma.str());
    ++n["identities"];
    Elem p3 = p2 * generator(id0);
    if (!phi_tilde_membership(p3, sigma, cs))
      return fail("square-stabilized membership fails for Phi" + sigma.str());
    ++n["tilde"];
  }
  if (!phi_membership(generator(id0), GalElem(), cs))
    return fail("generator of " + id0.str() + " not in the identity Phi");
  ++n["identities"];

  // An isolating companion pair must exist for the first identity prime.
  try {
    IsolatedPrime ip = isolate_prime(id0, GalElem(), cs, bound);
    SemilocalRing rd = r_delta(GalElem(), ip.p, ip.q, cs);
    if (!psi_membership(ip.p, *ip.q, cs) ||
        !(rd.delta == std::vector<Place>{id0}) || !ring_unit(*ip.q, rd))
      return fail("isolating pair for " + id0.str() + " fails its checks");
  } catch (const search_exhausted& e) {
    return fail(e.what());
  }
  n["psi-pairs"] = 1;

  cs.verified_bound = bound;
  cs.check_counts = std::move(n);
  return true;
}

CftConstants find_constants(const GlobalField& K, long bound) {
  std::string diag;
  if (K.is_q()) {
    std::vector<long> cands;
    for (mpz_class r = 2; r < 120; mpz_nextprime(r.get_mpz_t(), r.get_mpz_t()))
      if (r % 8 == 1) cands.push_back(r.get_si());
    for (std::size_t i = 0; i < cands.size(); ++i)
      for (std::size_t j = i + 1; j < cands.size(); ++j) {
        CftConstants cs;
        cs.K = K;
        cs.a = Elem(K, cands[i]);
        cs.b = Elem(K, cands[j]);
        cs.modulus = admissible_modulus(K, cs.a, cs.b);
        std::string why;
        if (verify_constants(cs, bound, &why)) return cs;
        diag += " (" + std::to_string(cands[i]) + "," +
                std::to_string(cands[j]) + "): " + why + ";";
      }
  } else {
    long u = 0;
    for (long c = 2; c < K.q; ++c)
      if (legendre_const(c, K.q) == -1) {
        u = c;
        break;
      }
    if (u == 0) throw internal_error("no constant nonresidue found");
    int tried = 0;
    for (unsigned long k = K.q; tried < 12; ++k) {
      FqPoly f = FqPoly::from_index(K.q, k);
      if (!f.is_monic() || f.is_constant()) continue;
      ++tried;
      CftConstants cs;
      cs.K = K;
      cs.a = Elem(K, u);
      cs.b = Elem::poly(f);
      cs.c = Elem(K, u);
      cs.d = Elem(K, u);
      try {
        cs.modulus = admissible_modulus(K, cs.a, cs.b);
      } catch (const std::domain_error&) {
        continue;
      }
      std::string why;
      if (verify_constants(cs, bound, &why)) return cs;
      diag += " (" + std::to_string(u) + "," + f.str() + "): " + why + ";";
    }
  }
  throw search_exhausted("find_constants: no candidate verified over " +
                         K.tag() + " at bound " + std::to_string(bound) +
                         ":" + diag);
}

bool isolated_sign_sentence(const Elem& x, const Elem& y, int sign,
                            const SemilocalRing& R, const CftConstants& cs) {
  require_nonzero(x, "isolated_sign_sentence");
  require_nonzero(y, "isolated_sign_sentence");
  if (sign != 1 && sign != -1)
    throw std::domain_error("isolated_sign_sentence: sign must be +-1");
  Elem s = R.sigma.is_identity()
               ? (R.q ? *R.q
                      : throw internal_error("identity ring lacks its companion"))
               : cs.s_for(R.sigma);
  const Elem& p = R.p;
  const Elem one = Elem::one(cs.K);
  const Elem mxy = -(x * y);
  auto in = [&](const Elem& z, const Elem& c, CosetMode m) {
    return coset_membership(z, c, R, m);
  };
  if (sign == -1)
    return (in(x, p, CosetMode::Units) &&
            (in(y, s, CosetMode::OnePlusJ) || in(mxy, s, CosetMode::OnePlusJ))) ||
           (in(y, p, CosetMode::Units) &&
            (in(x, s, CosetMode::OnePlusJ) || in(mxy, s, CosetMode::OnePlusJ)));
  // The +1 sentence must cover all four valuation sectors at the isolated
  // place: both arguments of even valuation, one carried by p against a
  // square-unit coset, or both carried by p with -xy a square-unit coset.
  return (in(x, one, CosetMode::Units) && in(y, one, CosetMode::Units)) ||
         (in(x, p, CosetMode::Units) && in(y, one, CosetMode::OnePlusJ)) ||
         (in(y, p, CosetMode::Units) && in(x, one, CosetMode::OnePlusJ)) ||
         (in(x, p, CosetMode::Units) && in(y, p, CosetMode::Units) &&
          in(mxy, one, CosetMode::OnePlusJ));
}

bool sign_disagreement_sentence(const Elem& x1, const Elem& x2, const Elem& y1,
                                const Elem& y2, const SemilocalRing& R,
                                const CftConstants& cs) {
  return (isolated_sign_sentence(x1, x2, 1, R, cs) &&
          isolated_sign_sentence(y1, y2, -1, R, cs)) ||
         (isolated_sign_sentence(x1, x2, -1, R, cs) &&
          isolated_sign_sentence(y1, y2, 1, R, cs));
}

namespace {

// Modulus places (infinite first, finite ascending), then the remaining
// support of the inputs ascending.  Outside this list both symbols are +1.
std::vector<Place> disagreement_sweep(const Elem& a1, const Elem& a2,
                                      const Elem& a3, const Elem& a4,
                                      const CftConstants& cs) {
  std::vector<Place> sweep;
  for (const auto& [v, e] : cs.modulus)
    if (v.is_infinite()) sweep.push_back(v);
  for (const auto& [v, e] : cs.modulus)
    if (v.is_finite()) sweep.push_back(v);
  std::set<Place> extra;
  for (const Elem* x : {&a1, &a2, &a3, &a4})
    for (const Place& v : support(*x))
      if (!cs.divides_modulus(v)) extra.insert(v);
  sweep.insert(sweep.end(), extra.begin(), extra.end());
  return sweep;
}

int disagreement_product(const Elem& a1, const Elem& a2, const Elem& a3,
                         const Elem& a4, const Place& w) {
  return hilbert_symbol(a1, a2, w) * hilbert_symbol(-a3, -a4, w);
}

}  // namespace

std::optional<Place> symbol_disagreement_place(const Elem& a1, const Elem& a2,
                                               const Elem& a3, const Elem& a4,
                                               const CftConstants& cs,
                                               bool require_square_discriminant) {
  for (const Elem* x : {&a1, &a2, &a3, &a4})
    require_nonzero(*x, "symbol_disagreement_place");
  const Elem disc = a1 * a2 * a3 * a4;
  for (const Place& w : disagreement_sweep(a1, a2, a3, a4, cs)) {
    if (disagreement_product(a1, a2, a3, a4, w) != -1) continue;
    if (require_square_discriminant && !is_square(disc, w)) continue;
    return w;
  }
  return std::nullopt;
}

bool eval_lemma42(const Elem& a1, const Elem& a2, const Elem& a3,
                  const Elem& a4, const CftConstants& cs, long search_bound) {
  for (const Elem* x : {&a1, &a2, &a3, &a4}) {
    require_nonzero(*x, "eval_lemma42");
    require_field(*x, cs.K, "eval_lemma42");
  }
  for (const Place& w : disagreement_sweep(a1, a2, a3, a4, cs)) {
    if (disagreement_product(a1, a2, a3, a4, w) != -1) continue;
    if (cs.divides_modulus(w)) return true;
    GalElem sigma = artin_map(w, cs);
    IsolatedPrime ip = isolate_prime(w, sigma, cs, search_bound);
    SemilocalRing R = r_delta(sigma, ip.p, ip.q, cs);
    if (!(R.delta == std::vector<Place>{w}))
      throw internal_error("eval_lemma42: ring fails to isolate " + w.str());
    if (sigma.is_identity() && !ring_unit(*ip.q, R))
      throw internal_error("eval_lemma42: companion is not a ring unit at " +
                           w.str());
    if (!sign_disagreement_sentence(a1, a2, -a3, -a4, R, cs))
      throw internal_error(
          "eval_lemma42: isolated sentences contradict the symbols at " +
          w.str());
    return true;
  }
  return false;
}

std::string CftConstants::to_text() const {
  std::ostringstream o;
  o << "anisotope-constants v1\n";
  o << "field " << K.tag() << "\n";
  o << "a " << a.str() << "\n";
  o << "b " << b.str() << "\n";
  if (c) o << "c " << c->str() << "\n";
  if (d) o << "d " << d->str() << "\n";
  o << "modulus";
  for (const auto& [v, e] : modulus) {
    o << ' ' << v.str();
    if (e != 1) o << '^' << e;
  }
  o << "\n";
  o << "verified-bound " << verified_bound << "\n";
  if (!check_counts.empty()) {
    o << "checks";
    for (const auto& [k, count] : check_counts) o << ' ' << k << '=' << count;
    o << "\n";
  }
  return o.str();
}

std::optional<CftConstants> CftConstants::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::string, std::string>> rows;
  bool header = false;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "anisotope-constants v1") return std::nullopt;
      header = true;
      continue;
    }
    auto sp = line.find(' ');
    if (sp == std::string::npos) return std::nullopt;
    rows.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  if (!header) return std::nullopt;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    for (const auto& [k, v] : rows)
      if (k == key) return v;
    return std::nullopt;
  };
  auto field_text = get("field");
  if (!field_text) return std::nullopt;
  auto K = GlobalField::parse_tag(*field_text);
  if (!K) return std::nullopt;
  CftConstants cs;
  cs.K = *K;
  auto read_elem = [&](const char* key) -> std::optional<Elem> {
    auto s = get(key);
    if (!s) return std::nullopt;
    return Elem::parse(*K, *s);
  };
  auto a = read_elem("a");
  auto b = read_elem("b");
  if (!a || !b || a->is_zero() || b->is_zero()) return std::nullopt;
  cs.a = *a;
  cs.b = *b;
  if (K->is_fqt()) {
    auto c = read_elem("c");
    auto d = read_elem("d");
    if (!c || !d) return std::nullopt;
    cs.c = *c;
    cs.d = *d;
  }
  auto mod_text = get("modulus");
  if (!mod_text) return std::nullopt;
  std::istringstream mod_in(*mod_text);
  std::string tok;
  while (mod_in >> tok) {
    int exp = 1;
    std::string place_text = tok;
    auto caret = tok.rfind('^');
    if (caret != std::string::npos && caret + 1 < tok.size()) {
      std::string suffix = tok.substr(caret + 1);
      bool digits = !suffix.empty();
      for (char ch : suffix)
        digits = digits && std::isdigit(static_cast<unsigned char>(ch));
      if (digits) {
        exp = std::stoi(suffix);
        place_text = tok.substr(0, caret);
      }
    }
    auto v = Place::parse(*K, place_text);
    if (!v || exp < 1) return std::nullopt;
    cs.modulus.emplace_back(*v, exp);
  }
  if (cs.modulus.empty()) return std::nullopt;
  if (auto vb = get("verified-bound")) {
    try {
      cs.verified_bound = std::stol(*vb);
    } catch (...) {
      return std::nullopt;
    }
  }
  if (auto checks = get("checks")) {
    std::istringstream cin(*checks);
    while (cin >> tok) {
      auto eq = tok.find('=');
      if (eq == std::string::npos) return std::nullopt;
      try {
        cs.check_counts[tok.substr(0, eq)] = std::stol(tok.substr(eq + 1));
      } catch (...) {
        return std::nullopt;
      }
    }
  }
  return cs;
}

}  // namespace anisotope
