#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "anisotope/cft.hpp"
#include "anisotope/cli.hpp"
#include "anisotope/dioph.hpp"
#include "anisotope/qform.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace anisotope;
using json = nlohmann::ordered_json;

namespace {

const GlobalField Q = GlobalField::rationals();
const GlobalField F3 = GlobalField::function_field(3);

struct Run {
  int code = -1;
  std::string text;
  json doc;
};

Run run_cli(const std::vector<std::string>& args, const std::string& input = "") {
  std::ostringstream out;
  Run r;
  r.code = cli::run(args, input, out);
  r.text = out.str();
  if (!r.text.empty() && r.text.front() == '{') r.doc = json::parse(r.text);
  return r;
}

std::string fixture_path(const std::string& name) {
  return std::string(ANISOTOPE_FIXTURE_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  REQUIRE(bool(f));
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CftConstants fixture_constants(const GlobalField& K) {
  auto cs = CftConstants::from_text(
      slurp(fixture_path(K.is_q() ? "constants_q.txt" : "constants_f3.txt")));
  REQUIRE(cs.has_value());
  return *cs;
}

}  // namespace

TEST_CASE("pinned command outputs") {
  Run r = run_cli({"decide", "--field", "Q", "1", "1", "-7"});
  CHECK(r.code == 0);
  CHECK(r.doc["schema"] == "1");
  CHECK(r.doc["verdict"] == "anisotropic");
  CHECK(r.doc["place"] == "7");
  CHECK(r.doc["certificate"]["kind"] == "anisotropic");
  CHECK(r.text.find('\n') == r.text.size() - 1);  // single line

  r = run_cli({"decide", "--field", "F3(t)", "1", "1", "1", "1", "1"});
  CHECK(r.code == 0);
  CHECK(r.doc["verdict"] == "isotropic");
  CHECK(r.doc["witness"] == json::array({"1", "1", "1", "0", "0"}));

  r = run_cli({"hilbert", "--field", "Q", "-1", "-1", "2"});
  CHECK(r.code == 0);
  CHECK(r.doc["symbol"] == -1);

  r = run_cli({"hilbert", "--field", "Q", "2", "3", "inf"});
  CHECK(r.doc["symbol"] == 1);
  r = run_cli({"hilbert", "--field", "F3(t)", "t", "t", "deg"});
  CHECK(r.doc["symbol"] == -1);
}

TEST_CASE("matrix input") {
  Run r = run_cli({"decide", "--field", "Q", "0;1;1;0"});
  CHECK(r.code == 0);
  CHECK(r.doc["verdict"] == "isotropic");
  std::vector<Elem> w;
  bool nonzero = false;
  for (const auto& t : r.doc["witness"]) {
    w.push_back(Elem::parse(Q, t.get<std::string>()).value());
    nonzero = nonzero || !w.back().is_zero();
  }
  CHECK(nonzero);
  Matrix a = {{Elem(Q, 0), Elem(Q, 1)}, {Elem(Q, 1), Elem(Q, 0)}};
  CHECK(QuadForm(Q, a).evaluate(w).is_zero());

  // definite 3x3 with off-diagonal entries
  r = run_cli({"decide", "--field", "Q", "2;1;0;1;2;0;0;0;3"});
  CHECK(r.code == 0);
  CHECK(r.doc["verdict"] == "anisotropic");
  CHECK(r.doc["place"] == "inf");

  // entry count must be a perfect square
  r = run_cli({"decide", "--field", "Q", "1;2;3"});
  CHECK(r.code == 2);
}

TEST_CASE("decide / check round trip") {
  for (auto args : std::vector<std::vector<std::string>>{
           {"--field", "Q", "1", "1", "-7"},
           {"--field", "Q", "1", "1", "-2"},
           {"--field", "Q", "1", "-4"},
           {"--field", "Q", "1", "0", "3"},
           {"--field", "F3(t)", "1", "1", "t", "t"},
           {"--field", "F3(t)", "1", "2"},
           {"--field", "Q", "0;1;1;0"}}) {
    std::vector<std::string> dec = {"decide"};
    dec.insert(dec.end(), args.begin(), args.end());
    Run d = run_cli(dec);
    REQUIRE(d.code == 0);

    std::vector<std::string> chk = {"check"};
    chk.insert(chk.end(), args.begin(), args.end());
    Run c = run_cli(chk, d.text);
    CHECK(c.code == 0);
    CHECK(c.doc["valid"] == true);

    // a mutated certificate must fail
    json bad = d.doc;
    json& cert = bad["certificate"];
    if (bad["verdict"] == "anisotropic") {
      std::string alt1 = args[1] == "Q" ? "3" : "t+1";
      std::string alt2 = args[1] == "Q" ? "7" : "t";
      cert["place"] = cert["place"] == alt1 ? alt2 : alt1;
    } else {
      json& w = cert["witness"];
      REQUIRE(!w.empty());
      w[0] = w[0] == "0" ? "1" : "0";
    }
    Run m = run_cli(chk, bad.dump());
    CHECK(m.code == 0);
    CHECK(m.doc["valid"] == false);
    CHECK(!m.doc["reason"].get<std::string>().empty());
  }

  // the bare certificate object works as input too
  Run d = run_cli({"decide", "--field", "Q", "1", "1", "-7"});
  Run c = run_cli({"check", "--field", "Q", "1", "1", "-7"},
                  d.doc["certificate"].dump());
  CHECK(c.code == 0);
  CHECK(c.doc["valid"] == true);
}

TEST_CASE("emit and eval") {
  // emitted formula matches the library against the bundled fixture
  Run r = run_cli({"emit", "--field", "Q", "1", "1"});
  REQUIRE(r.code == 0);
  CHECK(r.doc["m"] == 2);
  CftConstants qcs = fixture_constants(Q);
  auto parsed = parse_sexpr(Q, r.doc["formula"].get<std::string>());
  REQUIRE(parsed.has_value());
  CHECK(*parsed == emit_anisotropy_formula(2, {Elem(Q, 1), Elem(Q, 1)}, qcs));

  // closed formulas are decided semantically: <1,1> is anisotropic over Q
  Run e = run_cli({"eval", "--field", "Q", r.doc["formula"].get<std::string>()});
  CHECK(e.code == 0);
  CHECK(e.doc["value"] == true);

  // <1,1,-2> is isotropic
  r = run_cli({"emit", "--field", "Q", "1", "1", "-2"});
  e = run_cli({"eval", "--field", "Q", r.doc["formula"].get<std::string>()});
  CHECK(e.code == 0);
  CHECK(e.doc["value"] == false);

  // F3(t): <1,1,t,t> anisotropic through the class branches
  r = run_cli({"emit", "--field", "F3(t)", "1", "1", "t", "t"});
  REQUIRE(r.code == 0);
  e = run_cli({"eval", "--field", "F3(t)", r.doc["formula"].get<std::string>()});
  CHECK(e.code == 0);
  CHECK(e.doc["value"] == true);

  // open formulas take name=value bindings
  e = run_cli({"eval", "--field", "Q", "(poly \"x - 2\")", "x=2"});
  CHECK(e.code == 0);
  CHECK(e.doc["value"] == true);
  e = run_cli({"eval", "--field", "Q", "(poly \"x - 2\")", "x=3"});
  CHECK(e.doc["value"] == false);
  e = run_cli({"eval", "--field", "Q", "(pred nonsquare \"2\")"});
  CHECK(e.doc["value"] == true);

  // binding syntax errors
  e = run_cli({"eval", "--field", "Q", "(poly \"x\")", "x:1"});
  CHECK(e.code == 2);
  // unbound variable
  e = run_cli({"eval", "--field", "Q", "(poly \"x - 2\")"});
  CHECK(e.code == 2);
  // malformed formula
  e = run_cli({"eval", "--field", "Q", "(poly \"x -\")"});
  CHECK(e.code == 2);
}

TEST_CASE("constants subcommand") {
  Run r = run_cli({"constants", "--field", "Q", "--constants",
                   fixture_path("constants_q.txt"), "--bound", "300"});
  CHECK(r.code == 0);
  CHECK(r.doc["valid"] == true);
  CHECK(r.doc["a"] == "17");
  CHECK(r.doc["b"] == "41");
  CHECK(r.doc["verified-bound"] == 300);

  // search path reproduces the bundled F3 fixture
  r = run_cli({"constants", "--field", "F3(t)", "--bound", "81"});
  CHECK(r.code == 0);
  CHECK(r.doc["a"] == "2");
  CHECK(r.doc["b"] == "t");
  CHECK(r.doc["c"] == "2");
  CHECK(r.doc["d"] == "2");
  CftConstants f3cs = fixture_constants(F3);
  CHECK(r.doc["text"] == f3cs.to_text());
}

TEST_CASE("selftest") {
  Run r = run_cli({"selftest", "--field", "F3(t)"});
  CHECK(r.code == 0);
  CHECK(r.doc["passed"] == true);
  CHECK(r.doc["checks"]["F3(t)"]["decide"] == true);

  r = run_cli({"selftest", "--field", "Q", "--bound", "120"});
  CHECK(r.code == 0);
  CHECK(r.doc["passed"] == true);

  // a fixture that cannot verify makes the selftest fail
  CftConstants bad = fixture_constants(Q);
  bad.b = bad.a;
  bad.verified_bound = 0;
  std::string path = "/tmp/anisotope_bad_constants.txt";
  {
    std::ofstream f(path);
    f << bad.to_text();
  }
  r = run_cli({"selftest", "--field", "Q", "--constants", path, "--bound", "120"});
  CHECK(r.code == 4);
  std::remove(path.c_str());
}

TEST_CASE("errors and exit codes") {
  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"decide", "1", "1"}).code == 2);               // no field
  CHECK(run_cli({"decide", "--field", "X", "1"}).code == 2);    // bad field
  CHECK(run_cli({"decide", "--field", "Q"}).code == 2);         // no form
  CHECK(run_cli({"decide", "--field", "Q", "x"}).code == 2);    // bad element
  CHECK(run_cli({"hilbert", "--field", "Q", "0", "1", "2"}).code == 2);
  CHECK(run_cli({"hilbert", "--field", "Q", "1", "1"}).code == 2);
  CHECK(run_cli({"hilbert", "--field", "Q", "1", "1", "6"}).code == 2);
  CHECK(run_cli({"check", "--field", "Q", "1", "1"}, "not json").code == 2);
  CHECK(run_cli({"check", "--field", "Q", "1", "1"}, "{\"kind\":\"odd\"}").code == 2);

  Run r = run_cli({"decide", "--field", "Q", "x"});
  CHECK(r.doc["error"] == "parse");
  CHECK(!r.doc["reason"].get<std::string>().empty());

  // exhausted companion search reports "undetermined" with exit 3
  CftConstants qcs = fixture_constants(Q);
  std::vector<Elem> coeffs = {Elem(Q, 1), Elem(Q, 1), Elem(Q, -4429),
                              Elem(Q, -4429)};
  std::string sexpr = to_sexpr(emit_anisotropy_formula(4, coeffs, qcs));
  r = run_cli({"eval", "--field", "Q", sexpr, "--bound", "5"});
  CHECK(r.code == 3);
  CHECK(r.doc["error"] == "undetermined");

  // help is not an error
  CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("output determinism and pretty mode") {
  Run a = run_cli({"decide", "--field", "Q", "3", "-5", "7", "11"});
  Run b = run_cli({"decide", "--field", "Q", "3", "-5", "7", "11"});
  CHECK(a.code == 0);
  CHECK(a.text == b.text);

  Run p = run_cli({"decide", "--field", "Q", "3", "-5", "7", "11", "--pretty"});
  CHECK(p.code == 0);
  CHECK(p.doc == a.doc);                      // same document
  CHECK(p.text.find('\n') < p.text.size() - 1);  // actually indented

  // --height leaves an already-found witness alone
  Run h = run_cli({"decide", "--field", "Q", "3", "-5", "7", "11", "--height", "50"});
  CHECK(h.text == a.text);
}
