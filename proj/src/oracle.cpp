#include "anisotope/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>
#include <utility>

namespace anisotope {

namespace {

constexpr size_t kTableCap = size_t(1) << 23;
constexpr long long kNodeBudget = 50'000'000;

using Tuple = std::vector<long long>;

// k-tuples over [0, top) with at least one coordinate >= threshold, in
// ascending lexicographic order.
std::vector<Tuple> shell_tuples(int k, long long top, long long threshold) {
  std::vector<Tuple> out;
  Tuple cur(static_cast<size_t>(k));
  std::function<void(int, bool)> rec = [&](int pos, bool has) {
    if (pos == k) {
      if (has) {
        out.push_back(cur);
        if (out.size() > kTableCap)
          throw search_exhausted("witness search exceeded its table budget");
      }
      return;
    }
    long long start = (!has && pos == k - 1) ? threshold : 0;
    for (long long v = start; v < top; ++v) {
      cur[static_cast<size_t>(pos)] = v;
      rec(pos + 1, has || v >= threshold);
    }
  };
  rec(0, false);
  return out;
}

template <class Key>
struct TableOf {
  using Map = std::map<Key, Tuple>;
};
template <>
struct TableOf<long long> {
  using Map = std::unordered_map<long long, Tuple>;
};

template <class Map, class Key>
void keep_min(Map& table, Key key, const Tuple& t) {
  auto [it, fresh] = table.try_emplace(std::move(key), t);
  if (!fresh && t < it->second) it->second = t;
}

// Split-sum search driver.  The model maps partial coordinate tuples to
// hashable keys of their partial sums (and negated sums); a full vector is a
// zero of the form iff the left key equals the negated right key.  Returns
// the (shell-minimal, lexicographically least) nonzero match.
template <class Model>
std::optional<std::pair<Tuple, Tuple>> split_search(Model& model, int kL, int kR,
                                                    long first_shell, long last_shell) {
  typename TableOf<typename Model::Key>::Map TL, TR;
  Tuple zl(static_cast<size_t>(kL), 0), zr(static_cast<size_t>(kR), 0);
  TL.emplace(model.left_key(zl), zl);
  TR.emplace(model.right_key(zr), zr);
  auto nonzero = [](const Tuple& t) {
    return std::any_of(t.begin(), t.end(), [](long long v) { return v != 0; });
  };
  for (long h = first_shell; h <= last_shell; ++h) {
    auto [top, thr] = model.shell_domain(h);
    auto NL = shell_tuples(kL, top, thr);
    auto NR = shell_tuples(kR, top, thr);
    for (const Tuple& t : NR) keep_min(TR, model.right_key(t), t);
    std::optional<std::pair<Tuple, Tuple>> best;
    for (const Tuple& t : NL) {  // new left x any right
      auto it = TR.find(model.neg_left_key(t));
      if (it == TR.end()) continue;
      if (!nonzero(t) && !nonzero(it->second)) continue;
      best = {t, it->second};
      break;  // lex order: first matching left wins
    }
    for (const Tuple& t : NR) {  // previous-shell left x new right
      auto it = TL.find(model.neg_right_key(t));
      if (it == TL.end()) continue;
      std::pair<Tuple, Tuple> cand{it->second, t};
      if (!best || cand < *best) best = cand;
    }
    if (best) return best;
    for (const Tuple& t : NL) keep_min(TL, model.left_key(t), t);
    if (TL.size() + TR.size() > kTableCap)
      throw search_exhausted("witness search exceeded its table budget");
  }
  return std::nullopt;
}

struct QFastModel {
  using Key = long long;
  std::vector<long long> A;
  int kL;
  Key left_key(const Tuple& t) const {
    long long s = 0;
    for (size_t i = 0; i < t.size(); ++i) s += A[i] * t[i] * t[i];
    return s;
  }
  Key right_key(const Tuple& t) const {
    long long s = 0;
    for (size_t i = 0; i < t.size(); ++i) s += A[static_cast<size_t>(kL) + i] * t[i] * t[i];
    return s;
  }
  Key neg_left_key(const Tuple& t) const { return -left_key(t); }
  Key neg_right_key(const Tuple& t) const { return -right_key(t); }
  std::pair<long long, long long> shell_domain(long h) const { return {h + 1, h}; }
};

struct QWideModel {
  using Key = mpz_class;
  std::vector<mpz_class> A;
  int kL;
  Key left_key(const Tuple& t) const {
    mpz_class s = 0;
    for (size_t i = 0; i < t.size(); ++i) s += A[i] * static_cast<long>(t[i]) * static_cast<long>(t[i]);
    return s;
  }
  Key right_key(const Tuple& t) const {
    mpz_class s = 0;
    for (size_t i = 0; i < t.size(); ++i)
      s += A[static_cast<size_t>(kL) + i] * static_cast<long>(t[i]) * static_cast<long>(t[i]);
    return s;
  }
  Key neg_left_key(const Tuple& t) const { return -left_key(t); }
  Key neg_right_key(const Tuple& t) const { return -right_key(t); }
  std::pair<long long, long long> shell_domain(long h) const { return {h + 1, h}; }
};

struct FqtModel {
  using Key = mpz_class;
  std::vector<FqPoly> A;
  int kL;
  int q;
  mutable std::vector<FqPoly> sq;  // squares of from_index polynomials

  const FqPoly& square(long long idx) const {
    while (static_cast<long long>(sq.size()) <= idx) {
      FqPoly f = FqPoly::from_index(q, static_cast<unsigned long>(sq.size()));
      sq.push_back(f * f);
    }
    return sq[static_cast<size_t>(idx)];
  }
  static Key encode(const FqPoly& f, int q) {
    mpz_class acc = 0;
    for (int i = f.degree(); i >= 0; --i) acc = acc * q + f.coeff(i);
    return acc;
  }
  FqPoly left_sum(const Tuple& t) const {
    FqPoly s(q);
    for (size_t i = 0; i < t.size(); ++i) s = s + A[i] * square(t[i]);
    return s;
  }
  FqPoly right_sum(const Tuple& t) const {
    FqPoly s(q);
    for (size_t i = 0; i < t.size(); ++i) s = s + A[static_cast<size_t>(kL) + i] * square(t[i]);
    return s;
  }
  Key left_key(const Tuple& t) const { return encode(left_sum(t), q); }
  Key right_key(const Tuple& t) const { return encode(right_sum(t), q); }
  Key neg_left_key(const Tuple& t) const { return encode(-left_sum(t), q); }
  Key neg_right_key(const Tuple& t) const { return encode(-right_sum(t), q); }
  std::pair<long long, long long> shell_domain(long d) const {
    long long thr = 1;
    for (long i = 0; i < d; ++i) {
      if (thr > (1LL << 55) / q) throw search_exhausted("witness search shell domain overflow");
      thr *= q;
    }
    return {thr * q, thr};
  }
};

}  // namespace

std::optional<std::vector<Elem>> global_witness_search(const std::vector<Elem>& coeffs,
                                                       long height_bound) {
  if (coeffs.empty()) throw std::domain_error("empty coefficient list");
  if (height_bound < 1) throw std::domain_error("height bound must be >= 1");
  const GlobalField K = coeffs[0].field();
  for (const Elem& c : coeffs)
    if (!(c.field() == K)) throw internal_error("global_witness_search: mixed fields");
  const size_t m = coeffs.size();
  if (m == 1) {
    if (coeffs[0].is_zero()) return std::vector<Elem>{Elem::one(K)};
    return std::nullopt;
  }
  // Reversed coordinate order turns the lexicographic minimum of the split
  // search into the colexicographic minimum of the original coordinates.
  std::vector<Elem> rc(coeffs.rbegin(), coeffs.rend());
  const int kL = static_cast<int>(m + 1) / 2, kR = static_cast<int>(m) - kL;
  std::optional<std::pair<Tuple, Tuple>> hit;
  if (K.is_q()) {
    mpz_class den_lcm = 1;
    for (const Elem& c : rc)
      mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.rat().get_den_mpz_t());
    std::vector<mpz_class> A;
    mpz_class weight = 0;
    for (const Elem& c : rc) {
      mpq_class scaled = c.rat() * mpq_class(den_lcm);
      A.push_back(scaled.get_num());
      weight += abs(A.back());
    }
    weight *= mpz_class(height_bound) * mpz_class(height_bound);
    if (height_bound <= 2'000'000 && weight < (mpz_class(1) << 62)) {
      QFastModel model{{}, kL};
      for (const mpz_class& a : A) model.A.push_back(static_cast<long long>(a.get_si()));
      hit = split_search(model, kL, kR, 1, height_bound);
    } else {
      QWideModel model{std::move(A), kL};
      hit = split_search(model, kL, kR, 1, height_bound);
    }
  } else {
    FqPoly den_lcm = FqPoly::constant(K.q, 1);
    for (const Elem& c : rc)
      den_lcm = (den_lcm * c.den()) / FqPoly::gcd(den_lcm, c.den());
    FqtModel model{{}, kL, K.q, {}};
    for (const Elem& c : rc) {
      Elem scaled = c * Elem::poly(den_lcm);
      if (!(scaled.den() == FqPoly::constant(K.q, 1)))
        throw internal_error("global_witness_search: denominator clearing failed");
      model.A.push_back(scaled.num());
    }
    hit = split_search(model, kL, kR, 0, height_bound);
  }
  if (!hit) return std::nullopt;
  Tuple full = hit->first;
  full.insert(full.end(), hit->second.begin(), hit->second.end());
  std::reverse(full.begin(), full.end());
  std::vector<Elem> witness;
  for (long long v : full)
    witness.push_back(K.is_q() ? Elem(K, static_cast<long>(v))
                               : Elem::poly(FqPoly::from_index(K.q, static_cast<unsigned long>(v))));
  Elem total = Elem::zero(K);
  bool any = false;
  for (size_t i = 0; i < m; ++i) {
    total = total + coeffs[i] * witness[i] * witness[i];
    any = any || !witness[i].is_zero();
  }
  if (!total.is_zero() || !any)
    throw internal_error("global_witness_search: candidate failed exact verification");
  return witness;
}

namespace {

// ---------- local solvability ----------

mpz_class mod_red(const mpz_class& a, const mpz_class& mod) {
  mpz_class r;
  mpz_mod(r.get_mpz_t(), a.get_mpz_t(), mod.get_mpz_t());
  return r;
}

struct ZpRing {
  using El = mpz_class;
  mpz_class p;
  int prec;
  std::vector<mpz_class> pw;  // p^0 .. p^prec

  ZpRing(mpz_class p_, int k) : p(std::move(p_)), prec(k) {
    pw.resize(static_cast<size_t>(k) + 1);
    pw[0] = 1;
    for (int i = 1; i <= k; ++i) pw[static_cast<size_t>(i)] = pw[static_cast<size_t>(i) - 1] * p;
  }
  int k() const { return prec; }
  int v2() const { return p == 2 ? 1 : 0; }
  long long digit_count() const {
    if (!p.fits_slong_p()) throw search_exhausted("residue field too large to enumerate");
    return p.get_si();
  }
  El zero() const { return 0; }
  El digit(long long i) const { return mpz_class(static_cast<long>(i)); }
  El add(const El& a, const El& b) const { return mod_red(a + b, pw[static_cast<size_t>(prec)]); }
  El mul(const El& a, const El& b) const { return mod_red(a * b, pw[static_cast<size_t>(prec)]); }
  El shift(const El& d, int j) const { return d * pw[static_cast<size_t>(j)]; }
  bool is_zero(const El& a) const { return a == 0; }
  int val(const El& a) const {
    mpz_class tmp;
    return static_cast<int>(mpz_remove(tmp.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t()));
  }
  bool congruent_zero(const El& f, int j) const {
    return mod_red(f, pw[static_cast<size_t>(j)]) == 0;
  }
  El level_coeff(const El& f, int j) const {  // (f / p^j) mod p, valid when v(f) >= j
    mpz_class r = mod_red(f, pw[static_cast<size_t>(j) + 1]);
    return mod_red(r / pw[static_cast<size_t>(j)], p);
  }
  El res_double_prod(const El& a, const El& x) const { return mod_red(2 * a * x, p); }
  El res_mul(const El& a, const El& b) const { return mod_red(a * b, p); }
  El res_add(const El& a, const El& b) const { return mod_red(a + b, p); }
  El res_neg(const El& a) const { return mod_red(-a, p); }
  El res_inv(const El& a) const {
    mpz_class r;
    if (!mpz_invert(r.get_mpz_t(), a.get_mpz_t(), p.get_mpz_t()))
      throw internal_error("local search: residue inverse failed");
    return r;
  }
};

struct PiRing {
  using El = FqPoly;
  FqPoly pi;
  int q;
  int prec;
  std::vector<FqPoly> piw;
  long long digits;
  mpz_class inv_exp;  // q^deg(pi) - 2

  PiRing(FqPoly pi_, int k) : pi(std::move(pi_)), q(pi.q()), prec(k) {
    piw.resize(static_cast<size_t>(k) + 1);
    piw[0] = FqPoly::constant(q, 1);
    for (int i = 1; i <= k; ++i) piw[static_cast<size_t>(i)] = piw[static_cast<size_t>(i) - 1] * pi;
    digits = 1;
    for (int i = 0; i < pi.degree(); ++i) {
      digits *= q;
      if (digits > 10'000'000) throw search_exhausted("residue field too large to enumerate");
    }
    inv_exp = mpz_class(static_cast<long>(digits)) - 2;
  }
  int k() const { return prec; }
  int v2() const { return 0; }
  long long digit_count() const { return digits; }
  El zero() const { return FqPoly(q); }
  El digit(long long i) const { return FqPoly::from_index(q, static_cast<unsigned long>(i)); }
  El add(const El& a, const El& b) const { return a + b; }  // degree never grows
  El mul(const El& a, const El& b) const { return (a * b) % piw[static_cast<size_t>(prec)]; }
  El shift(const El& d, int j) const { return d * piw[static_cast<size_t>(j)]; }
  bool is_zero(const El& a) const { return a.is_zero(); }
  int val(const El& a) const {
    int e = 0;
    El r = a;
    while (pi.divides(r)) {
      r = r / pi;
      ++e;
    }
    return e;
  }
  bool congruent_zero(const El& f, int j) const {
    return (f % piw[static_cast<size_t>(j)]).is_zero();
  }
  El level_coeff(const El& f, int j) const {
    El r = f % piw[static_cast<size_t>(j) + 1];
    return (r / piw[static_cast<size_t>(j)]) % pi;
  }
  El res_double_prod(const El& a, const El& x) const {
    return (a * x * FqPoly::constant(q, 2)) % pi;
  }
  El res_mul(const El& a, const El& b) const { return (a * b) % pi; }
  El res_add(const El& a, const El& b) const { return (a + b) % pi; }
  El res_neg(const El& a) const { return -a; }
  El res_inv(const El& a) const { return FqPoly::powmod(a, inv_exp, pi); }
};

// Depth-first digit search for a primitive zero of sum A_i x_i^2 over the
// completion, accepting as soon as a Hensel criterion certifies a true zero:
// at level j the digits below pi^j are fixed, f(x) = 0 mod pi^j holds, and
// the node accepts iff some coordinate has 2*v(2 A_i x_i) + 1 <= j with the
// valuation exactly determined.  Children are generated by solving the level
// congruence, which is linear in the new digits for j >= 1.
template <class Ring>
class LocalSearch {
 public:
  LocalSearch(const Ring& ring, std::vector<typename Ring::El> A, std::vector<int> vA)
      : ring_(ring), A_(std::move(A)), vA_(std::move(vA)), m_(A_.size()),
        x_(m_, ring_.zero()), budget_(kNodeBudget) {}

  bool run() { return descend(0); }

 private:
  using El = typename Ring::El;

  void spend() {
    if (--budget_ < 0)
      throw search_exhausted("local solvability search exceeded its node budget");
  }

  El eval_f() const {
    El s = ring_.zero();
    for (size_t i = 0; i < m_; ++i) s = ring_.add(s, ring_.mul(A_[i], ring_.mul(x_[i], x_[i])));
    return s;
  }

  bool accept(int j) const {
    for (size_t i = 0; i < m_; ++i) {
      if (ring_.is_zero(x_[i])) continue;  // valuation not yet determined
      int wi = ring_.v2() + vA_[i] + ring_.val(x_[i]);
      if (2 * wi + 1 <= j) return true;
    }
    return false;
  }

  bool descend(int j) {
    spend();
    if (j > 0 && accept(j)) return true;
    if (j == ring_.k()) return false;
    if (j == 0) return first_digits(0, false);
    El f = eval_f();
    std::vector<El> c(m_);
    size_t pivot = m_;
    for (size_t i = 0; i < m_; ++i) {
      c[i] = ring_.res_double_prod(A_[i], x_[i]);
      if (pivot == m_ && !ring_.is_zero(c[i])) pivot = i;
    }
    El F = ring_.level_coeff(f, j);
    if (pivot == m_) {
      // level congruence does not involve the new digits at all
      if (!ring_.is_zero(F)) return false;
      return free_digits(0, j);
    }
    return pivot_digits(0, j, c, pivot, ring_.res_inv(c[pivot]), F);
  }

  // level 1: every digit vector except all-zero (primitivity), kept when
  // f = 0 mod pi
  bool first_digits(size_t pos, bool any) {
    if (pos == m_) {
      if (!any) return false;
      if (!ring_.congruent_zero(eval_f(), 1)) return false;
      return descend(1);
    }
    for (long long d = 0; d < ring_.digit_count(); ++d) {
      spend();
      x_[pos] = ring_.digit(d);
      if (first_digits(pos + 1, any || d != 0)) return true;
    }
    x_[pos] = ring_.zero();
    return false;
  }

  bool free_digits(size_t pos, int j) {
    if (pos == m_) return descend(j + 1);
    El saved = x_[pos];
    for (long long d = 0; d < ring_.digit_count(); ++d) {
      spend();
      x_[pos] = ring_.add(saved, ring_.shift(ring_.digit(d), j));
      if (free_digits(pos + 1, j)) return true;
    }
    x_[pos] = saved;
    return false;
  }

  bool pivot_digits(size_t pos, int j, const std::vector<El>& c, size_t pivot,
                    const El& inv, const El& acc) {
    if (pos == m_) {
      El d = ring_.res_mul(ring_.res_neg(acc), inv);
      El saved = x_[pivot];
      x_[pivot] = ring_.add(saved, ring_.shift(d, j));
      bool ok = descend(j + 1);
      x_[pivot] = saved;
      return ok;
    }
    if (pos == pivot) return pivot_digits(pos + 1, j, c, pivot, inv, acc);
    El saved = x_[pos];
    for (long long d = 0; d < ring_.digit_count(); ++d) {
      spend();
      El dig = ring_.digit(d);
      x_[pos] = ring_.add(saved, ring_.shift(dig, j));
      if (pivot_digits(pos + 1, j, c, pivot, inv, ring_.res_add(acc, ring_.res_mul(c[pos], dig))))
        return true;
    }
    x_[pos] = saved;
    return false;
  }

  const Ring& ring_;
  std::vector<El> A_;
  std::vector<int> vA_;
  size_t m_;
  std::vector<El> x_;
  long long budget_;
};

// Clear denominators (global scaling), then remove square uniformizer powers
// from each coefficient (a substitution on that variable): resulting
// coefficients are integral with local valuations in {0, 1}.
std::vector<Elem> normalize_at(const std::vector<Elem>& coeffs, const Place& v,
                               std::vector<int>& vals) {
  const GlobalField K = coeffs[0].field();
  Elem unif = K.is_q() ? Elem::integer(v.prime()) : Elem::poly(v.poly());
  std::vector<Elem> out;
  if (K.is_q()) {
    mpz_class den_lcm = 1;
    for (const Elem& c : coeffs)
      mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.rat().get_den_mpz_t());
    for (const Elem& c : coeffs) out.push_back(c * Elem::integer(den_lcm));
  } else {
    FqPoly den_lcm = FqPoly::constant(K.q, 1);
    for (const Elem& c : coeffs)
      den_lcm = (den_lcm * c.den()) / FqPoly::gcd(den_lcm, c.den());
    for (const Elem& c : coeffs) out.push_back(c * Elem::poly(den_lcm));
  }
  vals.clear();
  for (Elem& c : out) {
    int e = valuation(c, v);  // >= 0 now
    for (int i = 0; i < e / 2; ++i) c = c / (unif * unif);
    vals.push_back(e % 2);
  }
  return out;
}

bool solvable_finite(const std::vector<Elem>& coeffs, const Place& v, int k) {
  std::vector<int> vals;
  std::vector<Elem> norm = normalize_at(coeffs, v, vals);
  if (v.kind() == Place::Kind::FinitePrime) {
    ZpRing ring(v.prime(), k);
    std::vector<mpz_class> A;
    for (const Elem& c : norm) A.push_back(mod_red(c.rat().get_num(), ring.pw.back()));
    return LocalSearch<ZpRing>(ring, std::move(A), std::move(vals)).run();
  }
  PiRing ring(v.poly(), k);
  std::vector<FqPoly> A;
  for (const Elem& c : norm) A.push_back(c.num() % ring.piw.back());
  return LocalSearch<PiRing>(ring, std::move(A), std::move(vals)).run();
}

FqPoly reversed(const FqPoly& f) {
  std::vector<long> c;
  for (int i = f.degree(); i >= 0; --i) c.push_back(f.coeff(i));
  return FqPoly(f.q(), std::move(c));
}

}  // namespace

int lifting_threshold(const std::vector<Elem>& coeffs, const Place& v) {
  if (coeffs.empty()) throw std::domain_error("empty coefficient list");
  if (v.kind() == Place::Kind::RealInf) return 1;
  const GlobalField K = coeffs[0].field();
  Elem prod = Elem(K, 4);
  for (const Elem& c : coeffs)
    if (!c.is_zero()) prod = prod * c;
  int base = valuation(prod, v) + 3;
  int needed = 2 * (v.is_dyadic() ? 1 : 0) + 3;  // what the lifting bound itself requires
  return std::max(base, needed);
}

bool local_solvable(const std::vector<Elem>& coeffs, const Place& v, int k) {
  if (coeffs.empty()) throw std::domain_error("empty coefficient list");
  const GlobalField K = coeffs[0].field();
  for (const Elem& c : coeffs)
    if (!(c.field() == K)) throw internal_error("local_solvable: mixed fields");
  if (!(K == v.field())) throw internal_error("local_solvable: place of the wrong field");
  if (k < lifting_threshold(coeffs, v))
    throw std::domain_error("precision below the lifting threshold");
  for (const Elem& c : coeffs)
    if (c.is_zero()) return true;  // a standard basis vector is a primitive zero
  switch (v.kind()) {
    case Place::Kind::RealInf: {
      bool pos = false, neg = false;
      for (const Elem& c : coeffs) (c.sign() > 0 ? pos : neg) = true;
      return pos && neg;
    }
    case Place::Kind::DegreeInf: {
      // substitute t -> 1/s: the degree place becomes the finite place (s)
      std::vector<Elem> mapped;
      FqPoly s = FqPoly::variable(K.q);
      for (const Elem& c : coeffs) {
        int e = valuation(c, v);
        FqPoly num = reversed(c.num()), den = reversed(c.den());
        for (int i = 0; i < e; ++i) num = num * s;
        for (int i = 0; i < -e; ++i) den = den * s;
        mapped.push_back(Elem::ratfun(num, den));
      }
      return solvable_finite(mapped, Place::finite_poly(s), k);
    }
    default:
      return solvable_finite(coeffs, v, k);
  }
}

bool local_solvable(const std::vector<Elem>& coeffs, const Place& v) {
  return local_solvable(coeffs, v, lifting_threshold(coeffs, v));
}

bool class_oracle(const Elem& x, const Place& v, LocalClassKind kind,
                  const std::optional<Elem>& y, std::optional<int> precision) {
  const GlobalField K = x.field();
  if (!(K == v.field())) throw internal_error("class_oracle: place of the wrong field");
  std::vector<Elem> form;
  if (kind == LocalClassKind::Square) {
    form = {Elem::one(K), -x};
  } else {
    if (!y) throw std::domain_error("norm query requires the extension element y");
    if (!(y->field() == K)) throw internal_error("class_oracle: mixed fields");
    form = {Elem::one(K), -*y, -x};
  }
  int k = precision ? *precision : lifting_threshold(form, v);
  return local_solvable(form, v, k);
}

}  // namespace anisotope
