#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>
#include <set>
#include <string>

#include "anisotope/hilbert.hpp"
#include "anisotope/oracle.hpp"
#include "anisotope/qform.hpp"
#include "doctest.h"

using namespace anisotope;

namespace {

const GlobalField Q = GlobalField::rationals();
const GlobalField F3 = GlobalField::function_field(3);
const GlobalField F5 = GlobalField::function_field(5);

Elem qe(long n) { return Elem(Q, n); }

std::vector<Elem> elems(const GlobalField& K, const std::vector<long>& v) {
  std::vector<Elem> out;
  for (long x : v) out.emplace_back(K, x);
  return out;
}

std::vector<Elem> felems(const GlobalField& K, const std::vector<std::string>& v) {
  std::vector<Elem> out;
  for (const auto& s : v) out.push_back(Elem::parse(K, s).value());
  return out;
}

Elem det(const GlobalField& K, const Matrix& a) {
  int m = static_cast<int>(a.size());
  if (m == 1) return a[0][0];
  Elem acc = Elem::zero(K);
  int sign = 1;
  for (int j = 0; j < m; ++j) {
    Matrix minor;
    for (int i = 1; i < m; ++i) {
      std::vector<Elem> row;
      for (int k = 0; k < m; ++k)
        if (k != j) row.push_back(a[i][k]);
      minor.push_back(row);
    }
    Elem term = a[0][j] * det(K, minor);
    acc = (sign > 0) ? acc + term : acc - term;
    sign = -sign;
  }
  return acc;
}

QuadForm random_symmetric(const GlobalField& K, int m, std::mt19937_64& rng) {
  Matrix a(m, std::vector<Elem>(m, Elem::zero(K)));
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      Elem e = K.is_q() ? Elem(K, static_cast<long>(rng() % 11) - 5)
                        : Elem::poly(FqPoly::from_index(K.q, rng() % 9));
      a[i][j] = e;
      a[j][i] = e;
    }
  return QuadForm(K, a);
}

}  // namespace

TEST_CASE("diagonalization fixed cases") {
  // Hyperbolic plane: the u+-v substitution is pinned.
  Matrix hyp = {{qe(0), qe(1)}, {qe(1), qe(0)}};
  DiagForm d1 = diagonalize(QuadForm(Q, hyp));
  REQUIRE(d1.rank() == 2);
  CHECK(d1.coeffs[0] == qe(2));
  CHECK(d1.coeffs[1] == qe(-2));
  CHECK(d1.c[0][0] == qe(1));
  CHECK(d1.c[0][1] == qe(1));
  CHECK(d1.c[1][0] == qe(1));
  CHECK(d1.c[1][1] == qe(-1));

  DiagForm d2 = diagonalize(QuadForm::diagonal(Q, elems(Q, {1, 5})));
  REQUIRE(d2.rank() == 2);
  CHECK(d2.coeffs[0] == qe(1));
  CHECK(d2.coeffs[1] == qe(5));
  CHECK(d2.c[0][0] == qe(1));
  CHECK(d2.c[1][1] == qe(1));
  CHECK(d2.c[0][1] == qe(0));

  Matrix ones = {{qe(1), qe(1)}, {qe(1), qe(1)}};
  DiagForm d3 = diagonalize(QuadForm(Q, ones));
  REQUIRE(d3.rank() == 1);
  CHECK(d3.coeffs[0] == qe(1));
}

TEST_CASE("diagonalization randomized congruence identity") {
  std::mt19937_64 rng(61803);
  for (const GlobalField& K : {Q, F3, F5}) {
    for (int m = 1; m <= 6; ++m) {
      for (int iter = 0; iter < 12; ++iter) {
        QuadForm f = random_symmetric(K, m, rng);
        DiagForm d = diagonalize(f);  // self-checks C^t A C = B exactly
        CHECK(d.ambient == m);
        CHECK(d.rank() <= m);
        for (const Elem& b : d.coeffs) CHECK(!b.is_zero());
        // det(A) * det(C)^2 = det(B) = product of the coefficients (or 0).
        Elem lhs = det(K, f.matrix()) * det(K, d.c) * det(K, d.c);
        Elem rhs = Elem::one(K);
        for (const Elem& b : d.coeffs) rhs = rhs * b;
        if (d.rank() < m) rhs = Elem::zero(K);
        CHECK(lhs == rhs);
      }
    }
  }
}

TEST_CASE("local isotropy fixed cases") {
  auto dform = [](const GlobalField& K, const std::vector<Elem>& c) {
    return diagonalize(QuadForm::diagonal(K, c));
  };
  CHECK(!local_isotropic(dform(Q, elems(Q, {1, 1, 1})), Place::real_inf()));
  CHECK(local_isotropic(dform(Q, elems(Q, {1, 1, -1})), Place::real_inf()));
  CHECK(!local_isotropic(dform(Q, elems(Q, {1, 1, -7})), Place::finite_prime(7)));
  CHECK(!local_isotropic(dform(Q, elems(Q, {1, 1, -7})), Place::finite_prime(2)));
  CHECK(!local_isotropic(dform(Q, elems(Q, {1, 1, 1, 1})), Place::finite_prime(2)));
  CHECK(local_isotropic(dform(Q, elems(Q, {1, 1, 1, 1})), Place::finite_prime(3)));
  CHECK(local_isotropic(dform(Q, elems(Q, {1, 1, 1, 1, 1})), Place::finite_prime(2)));
  CHECK(!local_isotropic(dform(Q, elems(Q, {1, 1, 1, 1, 1})), Place::real_inf()));
  CHECK(!local_isotropic(dform(Q, elems(Q, {3})), Place::finite_prime(3)));
  CHECK(local_isotropic(dform(Q, elems(Q, {1, -1})), Place::finite_prime(5)));
  CHECK(!local_isotropic(dform(Q, elems(Q, {1, -2})), Place::finite_prime(2)));

  for (unsigned long k = 2; k < 27; ++k) {
    FqPoly pi = FqPoly::from_index(3, k);
    if (!pi.is_monic() || !pi.is_irreducible()) continue;
    CHECK(local_isotropic(dform(F3, felems(F3, {"1", "1", "1", "1", "1"})),
                          Place::finite_poly(pi)));
  }
  CHECK(local_isotropic(dform(F3, felems(F3, {"1", "1", "1", "1", "1"})),
                        Place::degree_inf(3)));

  CHECK_THROWS_AS(local_isotropic(DiagForm{Q, elems(Q, {1, 0}), 2, {}},
                                  Place::finite_prime(3)),
                  std::domain_error);
}

TEST_CASE("local isotropy agrees with the solvability oracle") {
  std::mt19937_64 rng(424242);
  for (const GlobalField& K : {Q, F3}) {
    for (int m = 1; m <= 5; ++m) {
      for (int iter = 0; iter < 25; ++iter) {
        std::vector<Elem> coeffs;
        for (int i = 0; i < m; ++i) {
          if (K.is_q()) {
            long c = static_cast<long>(rng() % 21) - 10;
            if (c == 0) c = 6;
            coeffs.emplace_back(K, c);
          } else {
            unsigned long k = 1 + rng() % 26;
            coeffs.push_back(Elem::poly(FqPoly::from_index(K.q, k)));
          }
        }
        DiagForm d = diagonalize(QuadForm::diagonal(K, coeffs));
        for (const Place& v : critical_places(K, coeffs)) {
          CAPTURE(v.str());
          CHECK(local_isotropic(d, v) == local_solvable(coeffs, v));
        }
      }
    }
  }
}

TEST_CASE("rank-4 characterization through represented square classes") {
  // (b1,b2) represents the class x iff (x, -b1*b2)_v = (b1, b2)_v; the
  // quadruple is isotropic iff (b1,b2) and (-b3,-b4) share a class.
  std::mt19937_64 rng(9090);
  for (int iter = 0; iter < 40; ++iter) {
    std::vector<Elem> b;
    for (int i = 0; i < 4; ++i) {
      long c = static_cast<long>(rng() % 29) - 14;
      if (c == 0) c = 5;
      b.emplace_back(Q, c);
    }
    DiagForm d = diagonalize(QuadForm::diagonal(Q, b));
    if (d.rank() != 4) continue;
    for (const Place& v : critical_places(Q, b)) {
      if (v.kind() == Place::Kind::RealInf) continue;
      bool meet = false;
      for (const Elem& x : square_class_reps(v)) {
        bool in_first = hilbert_symbol(x, -(b[0] * b[1]), v) ==
                        hilbert_symbol(b[0], b[1], v);
        bool in_second = hilbert_symbol(x, -(b[2] * b[3]), v) ==
                         hilbert_symbol(-b[2], -b[3], v);
        if (in_first && in_second) { meet = true; break; }
      }
      CAPTURE(v.str());
      CHECK(meet == local_isotropic(d, v));
    }
  }
}

TEST_CASE("critical place sweep order") {
  auto places = critical_places(Q, elems(Q, {1, 1, -7}));
  REQUIRE(places.size() == 3);
  CHECK(places[0] == Place::real_inf());
  CHECK(places[1] == Place::finite_prime(7));
  CHECK(places[2] == Place::finite_prime(2));

  auto places2 = critical_places(Q, elems(Q, {15, -2}));
  REQUIRE(places2.size() == 4);
  CHECK(places2[0] == Place::real_inf());
  CHECK(places2[1] == Place::finite_prime(3));
  CHECK(places2[2] == Place::finite_prime(5));
  CHECK(places2[3] == Place::finite_prime(2));  // dyadic last

  auto places3 = critical_places(F3, felems(F3, {"t", "t+1"}));
  REQUIRE(places3.size() == 3);
  CHECK(places3[0] == Place::degree_inf(3));
  CHECK(places3[1] == Place::parse(F3, "t").value());
  CHECK(places3[2] == Place::parse(F3, "t+1").value());
}

TEST_CASE("global decision fixed cases") {
  Decision d1 = decide(Q, elems(Q, {1, 1, 1}));
  CHECK(d1.verdict == Verdict::Anisotropic);
  REQUIRE(d1.certificate.place.has_value());
  CHECK(*d1.certificate.place == Place::real_inf());
  CHECK(d1.certificate.obstruction == "definite");

  Decision d2 = decide(Q, elems(Q, {1, 1, -7}));
  CHECK(d2.verdict == Verdict::Anisotropic);
  REQUIRE(d2.certificate.place.has_value());
  CHECK(*d2.certificate.place == Place::finite_prime(7));
  CHECK(d2.certificate.obstruction == "symbol");

  Decision d3 = decide(Q, elems(Q, {1, 1, -2}));
  CHECK(d3.verdict == Verdict::Isotropic);
  CHECK(d3.certificate.witness == elems(Q, {1, 1, 1}));

  Decision d4 = decide(F3, felems(F3, {"1", "1", "1", "1", "1"}));
  CHECK(d4.verdict == Verdict::Isotropic);
  CHECK(d4.certificate.witness == felems(F3, {"1", "1", "1", "0", "0"}));

  Decision d5 = decide(Q, elems(Q, {-1, -1, -1}));
  CHECK(d5.verdict == Verdict::Anisotropic);
  CHECK(*d5.certificate.place == Place::real_inf());

  // Hamilton-type quaternary form: definite, caught at the real place.
  Decision d6 = decide(Q, elems(Q, {1, 1, 1, 1}));
  CHECK(d6.verdict == Verdict::Anisotropic);
  CHECK(*d6.certificate.place == Place::real_inf());

  // Indefinite but 2-adically obstructed: 7 is not a sum of three squares
  // in Q_2 (disc -7 = 1 mod 8 is a dyadic square and the symbols collide).
  Decision d7 = decide(Q, elems(Q, {1, 1, 1, -7}));
  CHECK(d7.verdict == Verdict::Anisotropic);
  CHECK(*d7.certificate.place == Place::finite_prime(2));
  CHECK(d7.certificate.obstruction == "class-pair");

  Decision d8 = decide(Q, elems(Q, {1, -1}));
  CHECK(d8.verdict == Verdict::Isotropic);
  CHECK(d8.certificate.witness == elems(Q, {1, 1}));

  Decision d9 = decide(Q, elems(Q, {1, -7}));
  CHECK(d9.verdict == Verdict::Anisotropic);
  CHECK(*d9.certificate.place == Place::finite_prime(7));
  CHECK(d9.certificate.obstruction == "nonsquare");

  Decision d10 = decide(Q, elems(Q, {7}));
  CHECK(d10.verdict == Verdict::Anisotropic);
  CHECK(*d10.certificate.place == Place::real_inf());
  CHECK(d10.certificate.obstruction == "definite");

  // The quaternary anisotropic form over F3(t).
  Decision d11 = decide(F3, felems(F3, {"1", "1", "t", "t"}));
  CHECK(d11.verdict == Verdict::Anisotropic);
  CHECK(d11.certificate.obstruction == "class-pair");

  // Degenerate and zero forms.
  Decision d12 = decide(Q, elems(Q, {0, 3}));
  CHECK(d12.verdict == Verdict::Isotropic);
  CHECK(d12.certificate.kind == IsotropyCertificate::Kind::DegenerateIsotropic);
  CHECK(d12.certificate.witness == elems(Q, {1, 0}));

  Decision d13 = decide(Q, elems(Q, {0, 0}));
  CHECK(d13.verdict == Verdict::Isotropic);
  CHECK(d13.certificate.kind == IsotropyCertificate::Kind::Isotropic);
  CHECK(d13.certificate.witness == elems(Q, {1, 0}));

  Matrix hyp = {{qe(0), qe(1)}, {qe(1), qe(0)}};
  Decision d14 = decide(QuadForm(Q, hyp));
  CHECK(d14.verdict == Verdict::Isotropic);
  REQUIRE(!d14.certificate.witness.empty());
  CHECK(QuadForm(Q, hyp).evaluate(d14.certificate.witness).is_zero());
}

TEST_CASE("decision invariances") {
  std::mt19937_64 rng(27182818);
  auto verdict_of = [](const GlobalField& K, const std::vector<Elem>& c) {
    return decide(K, c).verdict;
  };
  for (int iter = 0; iter < 30; ++iter) {
    int m = 2 + static_cast<int>(rng() % 3);
    std::vector<Elem> c;
    for (int i = 0; i < m; ++i) {
      long v = static_cast<long>(rng() % 31) - 15;
      if (v == 0) v = 3;
      c.emplace_back(Q, v);
    }
    Verdict base = verdict_of(Q, c);

    // scale one coefficient by a square
    std::vector<Elem> scaled = c;
    long s = 2 + static_cast<long>(rng() % 4);
    size_t idx = rng() % m;
    scaled[idx] = scaled[idx] * qe(s * s);
    CHECK(verdict_of(Q, scaled) == base);

    // permute
    std::vector<Elem> perm = c;
    std::shuffle(perm.begin(), perm.end(), rng);
    CHECK(verdict_of(Q, perm) == base);

    // scale the whole form
    long lam = static_cast<long>(rng() % 9) - 4;
    if (lam == 0) lam = 5;
    std::vector<Elem> whole = c;
    for (Elem& e : whole) e = e * qe(lam);
    CHECK(verdict_of(Q, whole) == base);
  }
}

TEST_CASE("decision matches bounded witness search") {
  std::mt19937_64 rng(5772156);
  for (int m : {2, 3, 4}) {
    for (int iter = 0; iter < 40; ++iter) {
      std::vector<Elem> c;
      std::vector<long> raw;
      for (int i = 0; i < m; ++i) {
        static const long sf[] = {1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15};
        long v = sf[rng() % 11] * ((rng() % 2) ? 1 : -1);
        raw.push_back(v);
        c.emplace_back(Q, v);
      }
      CAPTURE(raw[0]);
      CAPTURE(raw[1]);
      Decision d = decide(Q, c);
      if (d.verdict == Verdict::Isotropic) {
        bool found = !d.certificate.witness.empty();
        if (found) {
          CHECK(QuadForm::diagonal(Q, c).evaluate(d.certificate.witness).is_zero());
        } else {
          auto w = global_witness_search(c, 10000);
          CHECK(w.has_value());
        }
      } else {
        CHECK(!global_witness_search(c, 200).has_value());
      }
    }
  }
}

TEST_CASE("certificate checking") {
  // Round trip: everything decide produces validates.
  std::vector<std::vector<long>> forms = {{1, 1, 1},   {1, 1, -7}, {1, 1, -2},
                                          {1, -1},     {7},        {1, 1, 1, 1},
                                          {0, 3},      {0, 0},     {3, -5, 11},
                                          {2, -6, 15}, {1, 2, -3, -6}};
  for (const auto& raw : forms) {
    QuadForm f = QuadForm::diagonal(Q, elems(Q, raw));
    Decision d = decide(f);
    std::string reason;
    bool ok = check_certificate(f, d.certificate, &reason);
    CAPTURE(raw[0]);
    CAPTURE(reason);
    if (d.verdict == Verdict::Isotropic &&
        d.certificate.kind == IsotropyCertificate::Kind::Isotropic &&
        d.certificate.witness.empty()) {
      CHECK(!ok);  // no witness recorded: not checkable
    } else {
      CHECK(ok);
    }
  }

  QuadForm f3 = QuadForm::diagonal(F3, felems(F3, {"1", "1", "t", "t"}));
  Decision dd = decide(f3);
  CHECK(check_certificate(f3, dd.certificate));

  // Tampered certificates must fail.
  QuadForm f = QuadForm::diagonal(Q, elems(Q, {1, 1, -2}));
  Decision good = decide(f);
  IsotropyCertificate bad = good.certificate;
  bad.witness = elems(Q, {1, 1, 2});
  std::string why;
  CHECK(!check_certificate(f, bad, &why));
  CHECK(why == "form does not vanish on the witness");

  bad = good.certificate;
  bad.witness = elems(Q, {0, 0, 0});
  CHECK(!check_certificate(f, bad, &why));

  // Claiming an obstruction for an isotropic form fails at re-verification.
  IsotropyCertificate fake;
  fake.kind = IsotropyCertificate::Kind::Anisotropic;
  fake.place = Place::finite_prime(2);
  fake.diag = elems(Q, {1, 1, -2});
  fake.congruence = {{qe(1), qe(0), qe(0)},
                     {qe(0), qe(1), qe(0)},
                     {qe(0), qe(0), qe(1)}};
  fake.obstruction = "symbol";
  CHECK(!check_certificate(f, fake, &why));
  CHECK(why == "Hilbert symbol does not obstruct at the claimed place");

  // A genuine obstruction claimed at the wrong place also fails.
  QuadForm g = QuadForm::diagonal(Q, elems(Q, {1, 1, -7}));
  Decision gd = decide(g);
  IsotropyCertificate moved = gd.certificate;
  moved.place = Place::finite_prime(3);
  CHECK(!check_certificate(g, moved, &why));

  // Wrong-shape data is malformed, not an exception.
  IsotropyCertificate malformed = gd.certificate;
  malformed.diag.pop_back();
  CHECK(!check_certificate(g, malformed, &why));
  CHECK(why == "anisotropic certificate must cover the full rank");
}

TEST_CASE("rank five and above decide isotropic over function fields") {
  std::mt19937_64 rng(31415);
  for (int iter = 0; iter < 15; ++iter) {
    int m = 5 + static_cast<int>(rng() % 2);
    std::vector<Elem> c;
    for (int i = 0; i < m; ++i)
      c.push_back(Elem::poly(FqPoly::from_index(3, 1 + rng() % 26)));
    Decision d = decide(F3, c);
    CHECK(d.verdict == Verdict::Isotropic);
  }
}
