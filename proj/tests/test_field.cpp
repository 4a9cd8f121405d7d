#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "anisotope/field.hpp"

using namespace anisotope;

namespace {
const GlobalField Q = GlobalField::rationals();
const GlobalField F3 = GlobalField::function_field(3);
const GlobalField F5 = GlobalField::function_field(5);

Elem qe(const std::string& s) { return Elem::parse(Q, s).value(); }
Elem fe(const GlobalField& K, const std::string& s) { return Elem::parse(K, s).value(); }
FqPoly fp(int q, const std::string& s) { return FqPoly::parse(q, s).value(); }
Place pl(const GlobalField& K, const std::string& s) { return Place::parse(K, s).value(); }
}  // namespace

TEST_CASE("field tags parse and print") {
  CHECK(Q.tag() == "Q");
  CHECK(F3.tag() == "F3(t)");
  CHECK(GlobalField::parse_tag("Q").has_value());
  CHECK(GlobalField::parse_tag("F7(t)")->q == 7);
  CHECK(!GlobalField::parse_tag("F4(t)").has_value());
  CHECK(!GlobalField::parse_tag("F2(t)").has_value());
  CHECK(!GlobalField::parse_tag("R").has_value());
  CHECK_THROWS_AS(GlobalField::function_field(9), std::domain_error);
  CHECK_THROWS_AS(GlobalField::function_field(2), std::domain_error);
}

TEST_CASE("polynomial arithmetic basics") {
  FqPoly t = FqPoly::variable(3);
  FqPoly f = t * t + FqPoly::constant(3, 1);  // t^2+1
  CHECK(f.degree() == 2);
  CHECK(f.str() == "t^2+1");
  CHECK(f.is_irreducible());
  FqPoly g = t * t + t;  // t(t+1)
  CHECK(!g.is_irreducible());
  CHECK((f * g).degree() == 4);
  auto [quo, rem] = FqPoly::divmod(f * g + t, f);
  CHECK(quo == g);
  CHECK(rem == t);
  CHECK(FqPoly::gcd(f * g, f * t) == (f * t));  // t divides g
  CHECK(FqPoly::gcd(f * (t + FqPoly::constant(3, 1)), f * t) == f);
  CHECK(fp(3, "t^2+1") == f);
  CHECK(fp(3, "2*t^2 + t") == t * (t + t + FqPoly::constant(3, 1)));
  CHECK(fp(5, "t^3-1") == FqPoly(5, {-1, 0, 0, 1}));
}

TEST_CASE("polynomial exact square root") {
  FqPoly t = FqPoly::variable(5);
  FqPoly g = t * t + t + FqPoly::constant(5, 3);
  auto r = poly_exact_sqrt(g * g);
  REQUIRE(r.has_value());
  CHECK((*r == g || *r == -g));
  CHECK(!poly_exact_sqrt(g * g + FqPoly::constant(5, 1)).has_value());
  CHECK(!poly_exact_sqrt(t).has_value());
}

TEST_CASE("element parsing and printing round-trips") {
  for (const char* s : {"-12", "9/4", "0", "1", "-7/3"}) {
    Elem x = qe(s);
    CHECK(*Elem::parse(Q, x.str()) == x);
  }
  CHECK(qe("9/4").rat() == mpq_class(9, 4));
  CHECK(qe("-12").sign() < 0);
  CHECK(!Elem::parse(Q, "1/0").has_value());
  CHECK(!Elem::parse(Q, "t").has_value());

  Elem x = fe(F3, "(t^2+1)/(t+2)");
  CHECK(x.num() == fp(3, "t^2+1"));
  CHECK(x.den() == fp(3, "t+2"));
  CHECK(*Elem::parse(F3, x.str()) == x);
  // non-monic denominators are normalized
  Elem y = fe(F3, "t/(2*t+2)");
  CHECK(y.den().is_monic());
  CHECK(y * fe(F3, "t+1") * Elem(F3, 2) == fe(F3, "t"));
  CHECK(!Elem::parse(F3, "t/(t-t)").has_value());
  CHECK(!Elem::parse(F3, "1/2x").has_value());
}

TEST_CASE("element arithmetic is field arithmetic") {
  std::mt19937_64 rng(7);
  auto rnd_q = [&] {
    long n = static_cast<long>(rng() % 41) - 20;
    long d = 1 + static_cast<long>(rng() % 9);
    return Elem::rational(mpq_class(n, d));
  };
  for (int i = 0; i < 50; ++i) {
    Elem a = rnd_q(), b = rnd_q(), c = rnd_q();
    CHECK((a + b) * c == a * c + b * c);
    if (!b.is_zero()) CHECK(a / b * b == a);
  }
  auto rnd_f = [&] {
    FqPoly n = FqPoly::from_index(3, rng() % 81);
    FqPoly d = FqPoly::from_index(3, 1 + rng() % 80);
    return Elem::ratfun(n, d);
  };
  for (int i = 0; i < 50; ++i) {
    Elem a = rnd_f(), b = rnd_f(), c = rnd_f();
    CHECK((a + b) * c == a * c + b * c);
    if (!b.is_zero()) CHECK(a / b * b == a);
    if (!a.is_zero()) CHECK(a.inverse() * a == Elem::one(F3));
  }
}

TEST_CASE("places: construction, ordering, round-trips") {
  Place p2 = Place::finite_prime(2);
  Place p7 = Place::finite_prime(7);
  Place inf = Place::real_inf();
  CHECK(p2.is_dyadic());
  CHECK(!p7.is_dyadic());
  CHECK(p2 < p7);
  CHECK(p7 < inf);
  CHECK(p2.residue_size() == 2);
  CHECK(p7.str() == "7");
  CHECK(inf.str() == "inf");
  CHECK(pl(Q, "7") == p7);
  CHECK(pl(Q, "inf") == inf);
  CHECK_THROWS_AS(Place::finite_prime(6), std::domain_error);
  CHECK(!Place::parse(Q, "6").has_value());

  Place pt = Place::finite_poly(FqPoly::variable(3));
  Place pq = Place::finite_poly(fp(3, "t^2+1"));
  Place dinf = Place::degree_inf(3);
  CHECK(pt < pq);
  CHECK(pq < dinf);
  CHECK(pt.residue_size() == 3);
  CHECK(pq.residue_size() == 9);
  CHECK(dinf.residue_size() == 3);
  CHECK(pq.str() == "t^2+1");
  CHECK(dinf.str() == "deg");
  CHECK(pl(F3, "t^2+1") == pq);
  CHECK(pl(F3, "deg") == dinf);
  CHECK(pl(F3, "inf") == dinf);
  CHECK_THROWS_AS(Place::finite_poly(fp(3, "t^2+2")), std::domain_error);
  CHECK_THROWS_AS(Place::finite_poly(fp(3, "2*t+1")), std::domain_error);
}

TEST_CASE("integer and polynomial factoring") {
  auto f = factor_integer(2 * 2 * 3 * 49 * 101);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == std::pair<mpz_class, int>(2, 2));
  CHECK(f[1] == std::pair<mpz_class, int>(3, 1));
  CHECK(f[2] == std::pair<mpz_class, int>(7, 2));
  CHECK(f[3] == std::pair<mpz_class, int>(101, 1));
  CHECK(factor_integer(1).empty());
  // two primes beyond the trial-division bound
  mpz_class a(99991), b(100003);
  auto g = factor_integer(a * b);
  REQUIRE(g.size() == 2);
  CHECK(g[0].first == a);
  CHECK(g[1].first == b);

  FqPoly t = FqPoly::variable(3);
  auto pf = factor_poly(t * t + t);
  REQUIRE(pf.size() == 2);
  CHECK(pf[0].first == t);
  CHECK(pf[1].first == t + FqPoly::constant(3, 1));
  // repeated and inseparable-looking parts: (t+1)^3 * (t^2+1)^2 over F3
  FqPoly u = t + FqPoly::constant(3, 1);
  FqPoly v = t * t + FqPoly::constant(3, 1);
  FqPoly prod = u * u * u * v * v * FqPoly::constant(3, 2);
  auto pg = factor_poly(prod);
  REQUIRE(pg.size() == 2);
  CHECK(pg[0] == std::pair<FqPoly, int>(u, 3));
  CHECK(pg[1] == std::pair<FqPoly, int>(v, 2));
}

TEST_CASE("factor over both fields") {
  auto f = factor(qe("-12"));
  CHECK(f.unit == qe("-1"));
  REQUIRE(f.factors.size() == 2);
  CHECK(f.factors[0].first == Place::finite_prime(2));
  CHECK(f.factors[0].second == 2);
  CHECK(f.factors[1].first == Place::finite_prime(3));
  CHECK(f.factors[1].second == 1);

  auto g = factor(qe("9/4"));
  CHECK(g.unit == qe("1"));
  REQUIRE(g.factors.size() == 2);
  CHECK(g.factors[0].second == -2);
  CHECK(g.factors[1].second == 2);

  auto h = factor(fe(F3, "t^2+t"));
  CHECK(h.unit == Elem::one(F3));
  REQUIRE(h.factors.size() == 2);
  CHECK(h.factors[0].first == pl(F3, "t"));
  CHECK(h.factors[1].first == pl(F3, "t+1"));

  auto k = factor(fe(F3, "2*t^2"));
  CHECK(k.unit == Elem(F3, 2));
  REQUIRE(k.factors.size() == 1);
  CHECK(k.factors[0].second == 2);

  CHECK_THROWS_AS(factor(Elem::zero(Q)), std::domain_error);
}

TEST_CASE("valuations") {
  CHECK(valuation(qe("9/4"), Place::finite_prime(2)) == -2);
  CHECK(valuation(qe("9/4"), Place::finite_prime(3)) == 2);
  CHECK(valuation(qe("9/4"), Place::finite_prime(5)) == 0);
  CHECK(valuation(Elem::zero(Q), Place::finite_prime(5)) == kValInfinity);
  CHECK_THROWS_AS(valuation(qe("2"), Place::real_inf()), std::domain_error);

  Elem x = fe(F3, "(t^2+1)/(t+2)");
  CHECK(valuation(x, pl(F3, "t^2+1")) == 1);
  CHECK(valuation(x, pl(F3, "t+2")) == -1);
  CHECK(valuation(x, Place::degree_inf(3)) == -1);
  CHECK(valuation(fe(F3, "t^2+1"), Place::degree_inf(3)) == -2);
  CHECK(valuation(fe(F3, "1/t"), Place::degree_inf(3)) == 1);
}

TEST_CASE("degree formula: valuations weighted by degree sum to zero") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 30; ++i) {
    FqPoly n = FqPoly::from_index(3, 1 + rng() % 242);
    FqPoly d = FqPoly::from_index(3, 1 + rng() % 242);
    Elem x = Elem::ratfun(n, d);
    long sum = 0;
    for (auto& [v, e] : factor(x).factors) sum += static_cast<long>(e) * v.deg();
    sum += valuation(x, Place::degree_inf(3));
    CHECK(sum == 0);
  }
}

TEST_CASE("residue symbols") {
  CHECK(residue_symbol(qe("3"), Place::finite_prime(7)) == -1);
  CHECK(residue_symbol(qe("2"), Place::finite_prime(7)) == 1);
  CHECK(residue_symbol(qe("3/5"), Place::finite_prime(7)) ==
        residue_symbol(qe("3"), Place::finite_prime(7)) * residue_symbol(qe("5"), Place::finite_prime(7)));
  CHECK_THROWS_AS(residue_symbol(qe("3"), Place::finite_prime(2)), std::domain_error);
  CHECK_THROWS_AS(residue_symbol(qe("7"), Place::finite_prime(7)), std::domain_error);
  CHECK_THROWS_AS(residue_symbol(qe("3"), Place::real_inf()), std::domain_error);

  Place pt = pl(F3, "t");
  CHECK(residue_symbol(fe(F3, "t+1"), pt) == 1);   // residue 1
  CHECK(residue_symbol(fe(F3, "t+2"), pt) == -1);  // residue 2, nonsquare in F3
  Place pq = pl(F3, "t^2+1");
  // residue field F9: every F3 constant is a square (norm surjectivity)
  CHECK(residue_symbol(fe(F3, "2"), pq) == 1);
  CHECK(residue_symbol(fe(F3, "t"), pq) == 1);       // t^4 = (t^2)^2 = 1 mod t^2+1
  CHECK(residue_symbol(fe(F3, "t+1"), pq) == -1);    // (t+1)^4 = -1 mod t^2+1
  Place dinf = Place::degree_inf(3);
  CHECK(residue_symbol(fe(F3, "(t^2+1)/(t^2+t)"), dinf) == 1);
  CHECK(residue_symbol(fe(F3, "(2*t+1)/(t+5)"), dinf) == -1);
}

TEST_CASE("global squares") {
  CHECK(is_square(qe("9/16")));
  CHECK(!is_square(qe("-9/16")));
  CHECK(!is_square(qe("8")));
  CHECK(is_square(fe(F3, "(t^2+2*t+1)/(t^2)")));
  CHECK(!is_square(fe(F3, "2*t^2")));
  CHECK(!is_square(fe(F3, "t")));
  CHECK(is_square(fe(F5, "4")));
  CHECK(!is_square(fe(F5, "2")));
  CHECK_THROWS_AS(is_square(Elem::zero(Q)), std::domain_error);
}

TEST_CASE("local squares") {
  CHECK(is_square(qe("17"), Place::finite_prime(2)));   // 17 = 1 mod 8
  CHECK(!is_square(qe("5"), Place::finite_prime(2)));   // 5 mod 8
  CHECK(!is_square(qe("2"), Place::finite_prime(2)));   // odd valuation
  CHECK(is_square(qe("-7"), Place::finite_prime(2)));   // -7 = 1 mod 8
  CHECK(is_square(qe("1/17"), Place::finite_prime(2)));
  CHECK(is_square(qe("2"), Place::finite_prime(7)));
  CHECK(!is_square(qe("3"), Place::finite_prime(7)));
  CHECK(!is_square(qe("-5"), Place::real_inf()));
  CHECK(is_square(qe("49/4"), Place::finite_prime(3)));

  CHECK(!is_square(fe(F3, "t"), Place::degree_inf(3)));  // odd valuation at deg
  CHECK(is_square(fe(F3, "t^2"), Place::degree_inf(3)));
  CHECK(!is_square(fe(F3, "2*t^2"), Place::degree_inf(3)));
  CHECK(is_square(fe(F3, "t+1"), pl(F3, "t")));
  CHECK(!is_square(fe(F3, "t+2"), pl(F3, "t")));
}

TEST_CASE("local-global principle for squares on small values") {
  // x square in Q iff square at all places of a finite covering set
  for (long n = -50; n <= 50; ++n) {
    if (n == 0) continue;
    Elem x = Elem(Q, n);
    bool global = is_square(x);
    bool everywhere = is_square(x, Place::real_inf()) && is_square(x, Place::finite_prime(2));
    for (auto& [v, e] : factor(x).factors)
      if (!v.is_dyadic()) everywhere = everywhere && is_square(x, v);
    CHECK(global == everywhere);
  }
  for (unsigned long k = 1; k < 243; ++k) {
    Elem x = Elem::poly(FqPoly::from_index(3, k));
    bool global = is_square(x);
    bool everywhere = is_square(x, Place::degree_inf(3));
    for (auto& [v, e] : factor(x).factors) everywhere = everywhere && is_square(x, v);
    CHECK(global == everywhere);
  }
}

TEST_CASE("square class representatives") {
  auto real = square_class_reps(Place::real_inf());
  CHECK(real.size() == 2);
  auto dyadic = square_class_reps(Place::finite_prime(2));
  CHECK(dyadic.size() == 8);
  std::vector<long> want{1, -1, 2, -2, 5, -5, 10, -10};
  for (size_t i = 0; i < 8; ++i) CHECK(dyadic[i] == Elem(Q, want[i]));
  auto odd = square_class_reps(Place::finite_prime(7));
  CHECK(odd.size() == 4);
  auto pt = square_class_reps(pl(F3, "t"));
  REQUIRE(pt.size() == 4);
  CHECK(pt[0] == fe(F3, "1"));
  CHECK(pt[1] == fe(F3, "2"));
  CHECK(pt[2] == fe(F3, "t"));
  CHECK(pt[3] == fe(F3, "2*t"));
  // pairwise ratios are locally nonsquare, and every class is hit
  for (const Place& v : {Place::finite_prime(2), Place::finite_prime(7),
                         pl(F3, "t"), pl(F3, "t^2+1"),
                         Place::degree_inf(3)}) {
    auto reps = square_class_reps(v);
    for (size_t i = 0; i < reps.size(); ++i)
      for (size_t j = i + 1; j < reps.size(); ++j)
        CHECK(!is_square(reps[i] / reps[j], v));
  }
  // residue field F9 at t^2+1: units need a class rep of positive degree
  auto p9 = square_class_reps(pl(F3, "t^2+1"));
  bool found = false;
  for (auto& r : p9) found = found || (valuation(r, pl(F3, "t^2+1")) == 0 && !is_square(r, pl(F3, "t^2+1")) && !r.num().is_constant());
  CHECK(found);
}

TEST_CASE("unit parts and support") {
  CHECK(unit_part(qe("9/4"), Place::finite_prime(2)) == qe("9"));
  CHECK(unit_part(qe("-12"), Place::finite_prime(3)) == qe("-4"));
  CHECK(unit_part(fe(F3, "t^2+t"), pl(F3, "t")) == fe(F3, "t+1"));
  auto s = support(qe("-12"));
  REQUIRE(s.size() == 2);
  CHECK(s[0] == Place::finite_prime(2));
  CHECK(s[1] == Place::finite_prime(3));
  CHECK(support(qe("1")).empty());
}

TEST_CASE("monic irreducibles enumeration") {
  auto d1 = monic_irreducibles_of_degree(3, 1);
  CHECK(d1.size() == 3);
  auto d2 = monic_irreducibles_of_degree(3, 2);
  CHECK(d2.size() == 3);  // (9-3)/2
  for (auto& f : d2) {
    CHECK(f.is_monic());
    CHECK(f.is_irreducible());
  }
  auto d3 = monic_irreducibles_of_degree(3, 3);
  CHECK(d3.size() == 8);  // (27-3)/3
  auto e2 = monic_irreducibles_of_degree(5, 2);
  CHECK(e2.size() == 10);  // (25-5)/2
}

TEST_CASE("height shells") {
  auto h0 = elements_of_height(Q, 0);
  REQUIRE(h0.size() == 1);
  CHECK(h0[0].is_zero());
  auto h1 = elements_of_height(Q, 1);
  CHECK(h1.size() == 2);  // 1, -1
  auto h2 = elements_of_height(Q, 2);
  // n/d reduced with max(|n|, d) = 2: -2, 2, -1/2, 1/2
  CHECK(h2.size() == 4);
  std::set<std::string> seen;
  for (int h = 0; h <= 6; ++h)
    for (auto& x : elements_of_height(Q, h)) CHECK(seen.insert(x.str()).second);

  auto f1 = elements_of_height(F3, 1);
  CHECK(f1.size() == 2);  // 1, 2
  auto f2 = elements_of_height(F3, 2);
  // max(deg n, deg d) = 1, reduced, den monic: n of deg 1 over dens deg <=1,
  // constants over monic deg-1 dens
  std::set<std::string> fs;
  for (int h = 0; h <= 3; ++h)
    for (auto& x : elements_of_height(F3, h)) {
      CHECK(fs.insert(x.str()).second);
      if (h > 0) CHECK(std::max(x.num().degree(), x.den().degree()) == h - 1);
    }
}
