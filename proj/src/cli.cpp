#include "anisotope/cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "anisotope/cft.hpp"
#include "anisotope/common.hpp"
#include "anisotope/dioph.hpp"
#include "anisotope/field.hpp"
#include "anisotope/hilbert.hpp"
#include "anisotope/oracle.hpp"
#include "anisotope/qform.hpp"

#ifndef ANISOTOPE_FIXTURE_DIR
#define ANISOTOPE_FIXTURE_DIR "fixtures"
#endif

namespace anisotope::cli {
namespace {

using json = nlohmann::ordered_json;

struct Request {
  std::optional<GlobalField> field;
  long height = 0;  // 0 = use the subcommand default
  long bound = 0;   // 0 = use the subcommand default
  std::string constants_path;
  std::vector<std::string> pos;
};

const GlobalField& field_of(const Request& rq) {
  if (!rq.field) throw std::domain_error("--field is required (Q or F<q>(t))");
  return *rq.field;
}

Elem parse_elem(const GlobalField& K, const std::string& text) {
  auto e = Elem::parse(K, text);
  if (!e)
    throw std::domain_error("not an element of " + K.tag() + ": '" + text + "'");
  return *e;
}

Place parse_place(const GlobalField& K, const std::string& text) {
  auto v = Place::parse(K, text);
  if (!v)
    throw std::domain_error("not a place of " + K.tag() + ": '" + text + "'");
  return *v;
}

// Row-major square matrix from ';'-separated entries.
Matrix parse_matrix_entries(const GlobalField& K, const std::string& text) {
  std::vector<Elem> entries;
  std::istringstream s(text);
  std::string tok;
  while (std::getline(s, tok, ';')) entries.push_back(parse_elem(K, tok));
  int n = static_cast<int>(entries.size());
  int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
  if (m <= 0 || m * m != n)
    throw std::domain_error("matrix entry count " + std::to_string(n) +
                            " is not a perfect square");
  Matrix rows;
  for (int i = 0; i < m; ++i)
    rows.emplace_back(entries.begin() + static_cast<long>(i) * m,
                      entries.begin() + static_cast<long>(i + 1) * m);
  return rows;
}

std::string matrix_text(const Matrix& a) {
  std::string s;
  for (const auto& row : a)
    for (const auto& e : row) {
      if (!s.empty()) s += ';';
      s += e.str();
    }
  return s;
}

// A form argument list: either one ';'-joined row-major matrix token or a
// list of diagonal coefficients.
struct FormInput {
  std::optional<QuadForm> matrix_form;
  std::vector<Elem> diag;
};

FormInput parse_form(const GlobalField& K, const std::vector<std::string>& pos) {
  if (pos.empty()) throw std::domain_error("missing form coefficients");
  bool has_semicolon = false;
  for (const auto& t : pos) has_semicolon |= t.find(';') != std::string::npos;
  FormInput in;
  if (has_semicolon) {
    if (pos.size() != 1)
      throw std::domain_error("a matrix form must be a single ';'-separated token");
    in.matrix_form = QuadForm(K, parse_matrix_entries(K, pos[0]));
  } else {
    for (const auto& t : pos) in.diag.push_back(parse_elem(K, t));
  }
  return in;
}

json elem_list(const std::vector<Elem>& xs) {
  json a = json::array();
  for (const auto& e : xs) a.push_back(e.str());
  return a;
}

const char* kind_name(IsotropyCertificate::Kind k) {
  switch (k) {
    case IsotropyCertificate::Kind::Isotropic: return "isotropic";
    case IsotropyCertificate::Kind::Anisotropic: return "anisotropic";
    default: return "degenerate-isotropic";
  }
}

json certificate_json(const IsotropyCertificate& c) {
  json j;
  j["kind"] = kind_name(c.kind);
  j["witness"] = elem_list(c.witness);
  if (c.place) j["place"] = c.place->str();
  j["diag"] = elem_list(c.diag);
  j["congruence"] = matrix_text(c.congruence);
  j["obstruction"] = c.obstruction;
  return j;
}

IsotropyCertificate certificate_from_json(const GlobalField& K, const json& j) {
  if (!j.is_object()) throw std::domain_error("certificate: JSON object expected");
  IsotropyCertificate c;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "isotropic") c.kind = IsotropyCertificate::Kind::Isotropic;
  else if (kind == "anisotropic") c.kind = IsotropyCertificate::Kind::Anisotropic;
  else if (kind == "degenerate-isotropic")
    c.kind = IsotropyCertificate::Kind::DegenerateIsotropic;
  else throw std::domain_error("certificate: unknown kind '" + kind + "'");
  for (const auto& t : j.value("witness", json::array()))
    c.witness.push_back(parse_elem(K, t.get<std::string>()));
  if (j.contains("place") && !j["place"].is_null())
    c.place = parse_place(K, j["place"].get<std::string>());
  for (const auto& t : j.value("diag", json::array()))
    c.diag.push_back(parse_elem(K, t.get<std::string>()));
  std::string cong = j.value("congruence", std::string());
  if (!cong.empty()) c.congruence = parse_matrix_entries(K, cong);
  c.obstruction = j.value("obstruction", std::string());
  return c;
}

CftConstants load_constants(const GlobalField& K, const Request& rq) {
  std::string path = rq.constants_path;
  if (path.empty())
    path = std::string(ANISOTOPE_FIXTURE_DIR) +
           (K.is_q() ? "/constants_q.txt"
                     : "/constants_f" + std::to_string(K.q) + ".txt");
  std::ifstream f(path);
  if (!f) throw std::domain_error("cannot open constants fixture '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  auto cs = CftConstants::from_text(ss.str());
  if (!cs) throw std::domain_error("malformed constants fixture '" + path + "'");
  if (!(cs->K == K))
    throw std::domain_error("constants fixture '" + path + "' is for " +
                            cs->K.tag() + ", not " + K.tag());
  return *cs;
}

long truth_bound(const GlobalField& K, const Request& rq) {
  if (rq.bound > 0) return rq.bound;
  return K.is_q() ? 5000 : 2187;
}

json do_decide(const Request& rq) {
  const GlobalField& K = field_of(rq);
  FormInput in = parse_form(K, rq.pos);
  Decision d = in.matrix_form ? decide(*in.matrix_form) : decide(K, in.diag);
  if (d.verdict == Verdict::Isotropic && d.certificate.witness.empty() &&
      rq.height > 0 && !in.matrix_form) {
    bool nonzero = true;
    for (const auto& e : in.diag) nonzero &= !e.is_zero();
    if (nonzero) {
      auto w = global_witness_search(in.diag, rq.height);
      if (w) d.certificate.witness = *w;
    }
  }
  json r;
  r["schema"] = "1";
  if (d.verdict == Verdict::Anisotropic) {
    r["verdict"] = "anisotropic";
    r["place"] = d.certificate.place->str();
    r["obstruction"] = d.certificate.obstruction;
  } else {
    r["verdict"] = "isotropic";
    r["witness"] = elem_list(d.certificate.witness);
  }
  r["certificate"] = certificate_json(d.certificate);
  return r;
}

json do_check(const Request& rq, const std::string& input) {
  const GlobalField& K = field_of(rq);
  FormInput in = parse_form(K, rq.pos);
  QuadForm f = in.matrix_form ? *in.matrix_form : QuadForm::diagonal(K, in.diag);
  json doc = json::parse(input);
  const json& cj =
      doc.is_object() && doc.contains("certificate") ? doc["certificate"] : doc;
  IsotropyCertificate cert = certificate_from_json(K, cj);
  std::string reason;
  bool ok = check_certificate(f, cert, &reason);
  json r;
  r["schema"] = "1";
  r["valid"] = ok;
  if (!ok) r["reason"] = reason;
  return r;
}

json do_hilbert(const Request& rq) {
  const GlobalField& K = field_of(rq);
  if (rq.pos.size() != 3)
    throw std::domain_error("hilbert expects three arguments: a b place");
  Elem a = parse_elem(K, rq.pos[0]);
  Elem b = parse_elem(K, rq.pos[1]);
  Place v = parse_place(K, rq.pos[2]);
  json r;
  r["schema"] = "1";
  r["symbol"] = hilbert_symbol(a, b, v);
  return r;
}

json do_emit(const Request& rq) {
  const GlobalField& K = field_of(rq);
  if (rq.pos.empty()) throw std::domain_error("missing form coefficients");
  std::vector<Elem> coeffs;
  for (const auto& t : rq.pos) coeffs.push_back(parse_elem(K, t));
  CftConstants cs = load_constants(K, rq);
  Formula f =
      emit_anisotropy_formula(static_cast<int>(coeffs.size()), coeffs, cs);
  json r;
  r["schema"] = "1";
  r["m"] = coeffs.size();
  r["formula"] = to_sexpr(f);
  return r;
}

json do_eval(const Request& rq) {
  const GlobalField& K = field_of(rq);
  if (rq.pos.empty()) throw std::domain_error("missing formula");
  auto f = parse_sexpr(K, rq.pos[0]);
  if (!f) throw std::domain_error("malformed formula");
  Witness w;
  for (size_t i = 1; i < rq.pos.size(); ++i) {
    const std::string& b = rq.pos[i];
    auto eq = b.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::domain_error("binding must be name=value: '" + b + "'");
    w.values.insert_or_assign(b.substr(0, eq), parse_elem(K, b.substr(eq + 1)));
  }
  CftConstants cs = load_constants(K, rq);
  // A closed formula with no bindings is decided semantically; anything
  // else is evaluated pointwise under the given bindings.
  bool value = w.values.empty() && f->free_vars().empty()
                   ? semantic_truth(*f, cs, truth_bound(K, rq))
                   : eval_formula(*f, w, semantic_pred_evaluator(cs));
  json r;
  r["schema"] = "1";
  r["value"] = value;
  return r;
}

json constants_report(const CftConstants& cs) {
  json r;
  r["field"] = cs.K.tag();
  r["a"] = cs.a.str();
  r["b"] = cs.b.str();
  if (cs.c) r["c"] = cs.c->str();
  if (cs.d) r["d"] = cs.d->str();
  json mod = json::array();
  for (const auto& [v, e] : cs.modulus)
    mod.push_back(v.str() + "^" + std::to_string(e));
  r["modulus"] = mod;
  r["verified-bound"] = cs.verified_bound;
  json checks = json::object();
  for (const auto& [name, count] : cs.check_counts) checks[name] = count;
  r["checks"] = checks;
  r["text"] = cs.to_text();
  return r;
}

json do_constants(const Request& rq) {
  const GlobalField& K = field_of(rq);
  long bound = rq.bound > 0 ? rq.bound : (K.is_q() ? 2000 : 81);
  json r;
  r["schema"] = "1";
  if (!rq.constants_path.empty()) {
    CftConstants cs = load_constants(K, rq);
    std::string why;
    bool ok = verify_constants(cs, bound, &why);
    r["valid"] = ok;
    if (!ok) r["why"] = why;
    r.update(constants_report(cs));
  } else {
    CftConstants cs = find_constants(K, bound);
    r.update(constants_report(cs));
  }
  return r;
}

// --- selftest ----------------------------------------------------------

bool selftest_constants(const GlobalField& K, const Request& rq) {
  CftConstants cs = load_constants(K, rq);
  long bound = rq.bound > 0 ? rq.bound : (K.is_q() ? 300 : 81);
  std::string why;
  return verify_constants(cs, bound, &why);
}

bool selftest_reciprocity(const GlobalField& K) {
  std::vector<std::pair<std::string, std::string>> pairs;
  if (K.is_q()) {
    const char* as[] = {"-1", "2", "3", "5", "-6", "7", "10", "-15", "21", "30"};
    const char* bs[] = {"2", "-3", "5", "-7", "11", "-30"};
    for (const char* a : as)
      for (const char* b : bs) pairs.emplace_back(a, b);
  } else {
    const char* as[] = {"2", "t", "t+1", "2*t+2", "t^2+2"};
    const char* bs[] = {"t", "2", "t+2", "t^2+t+2"};
    for (const char* a : as)
      for (const char* b : bs) pairs.emplace_back(a, b);
  }
  for (const auto& [at, bt] : pairs) {
    Elem a = parse_elem(K, at), b = parse_elem(K, bt);
    RamificationSet rs = delta_set(a, b);
    if (rs.places.size() % 2 != 0) return false;
    for (const auto& v : rs.places)
      if (hilbert_symbol(a, b, v) != -1) return false;
  }
  return true;
}

bool selftest_decide(const GlobalField& K) {
  // (coefficients, expected anisotropic)
  std::vector<std::pair<std::vector<std::string>, bool>> cases;
  if (K.is_q()) {
    cases = {{{"1", "1", "-7"}, true},       {{"1", "1", "-2"}, false},
             {{"1", "-2"}, true},            {{"2", "3", "-5"}, false},
             {{"1", "1", "1", "1"}, true},   {{"1", "2", "-3", "-6"}, false},
             {{"1", "1", "-21", "-21"}, true}, {{"1", "1", "1", "1", "-7"}, false}};
  } else {
    cases = {{{"1", "1", "1"}, false},
             {{"1", "t"}, true},
             {{"1", "2"}, false},
             {{"1", "1", "t", "t"}, true},
             {{"1", "1", "1", "1", "1"}, false}};
  }
  for (const auto& [texts, aniso] : cases) {
    std::vector<Elem> coeffs;
    for (const auto& t : texts) coeffs.push_back(parse_elem(K, t));
    Decision d = decide(K, coeffs);
    if ((d.verdict == Verdict::Anisotropic) != aniso) return false;
    QuadForm f = QuadForm::diagonal(K, coeffs);
    if (!check_certificate(f, d.certificate)) return false;
    if (d.verdict == Verdict::Isotropic) {
      if (d.certificate.witness.empty()) return false;
      if (!f.evaluate(d.certificate.witness).is_zero()) return false;
    } else {
      if (global_witness_search(coeffs, K.is_q() ? 20 : 1)) return false;
    }
  }
  return true;
}

bool selftest_formulas(const GlobalField& K, const Request& rq) {
  CftConstants cs = load_constants(K, rq);
  std::vector<std::vector<std::string>> forms;
  if (K.is_q())
    forms = {{"1", "1", "-7"}, {"1", "1", "1", "-7"}, {"1", "2", "-3", "-6"}};
  else
    forms = {{"1", "1", "1"}, {"1", "1", "t", "t"}, {"1", "2", "t", "2*t"}};
  for (const auto& texts : forms) {
    std::vector<Elem> coeffs;
    for (const auto& t : texts) coeffs.push_back(parse_elem(K, t));
    Formula f =
        emit_anisotropy_formula(static_cast<int>(coeffs.size()), coeffs, cs);
    if (!valid_structure(f)) return false;
    auto back = parse_sexpr(K, to_sexpr(f));
    if (!back || !(*back == f)) return false;
    bool aniso = decide(K, coeffs).verdict == Verdict::Anisotropic;
    if (semantic_truth(f, cs, truth_bound(K, rq)) != aniso) return false;
  }
  return true;
}

json do_selftest(const Request& rq) {
  std::vector<GlobalField> fields;
  if (rq.field) {
    fields.push_back(*rq.field);
  } else {
    fields.push_back(*GlobalField::parse_tag("Q"));
    fields.push_back(*GlobalField::parse_tag("F3(t)"));
  }
  json r;
  r["schema"] = "1";
  bool pass = true;
  json all = json::object();
  for (const auto& K : fields) {
    json c;
    c["constants"] = selftest_constants(K, rq);
    c["reciprocity"] = selftest_reciprocity(K);
    c["decide"] = selftest_decide(K);
    c["formulas"] = selftest_formulas(K, rq);
    for (const auto& [name, ok] : c.items()) pass = pass && ok.get<bool>();
    all[K.tag()] = c;
  }
  r["passed"] = pass;
  r["checks"] = all;
  return r;
}

}  // namespace

int run(const std::vector<std::string>& args, const std::string& input,
        std::ostream& out) {
  bool pretty = std::find(args.begin(), args.end(), "--pretty") != args.end();
  auto emit_doc = [&](const json& doc) {
    out << (pretty ? doc.dump(2) : doc.dump()) << "\n";
  };
  auto fail = [&](const char* kind, const std::string& reason, int code) {
    json r;
    r["schema"] = "1";
    r["error"] = kind;
    r["reason"] = reason;
    emit_doc(r);
    return code;
  };

  CLI::App app{"exact isotropy of quadratic forms over Q and F_q(t)"};
  app.name("anisotope");
  app.require_subcommand(1);
  std::string field_tag, constants_path;
  long height = 0, bound = 0;
  bool pretty_flag = false;
  const std::map<std::string, std::string> blurbs = {
      {"decide", "decide isotropy of a quadratic form"},
      {"check", "re-verify a certificate read from stdin"},
      {"hilbert", "Hilbert symbol (a, b)_v"},
      {"emit", "emit the existential anisotropy formula"},
      {"eval", "evaluate a formula, closed or under bindings"},
      {"constants", "verify or search splitting-class constants"},
      {"selftest", "run the built-in end-to-end checks"},
  };
  for (const char* name :
       {"decide", "check", "hilbert", "emit", "eval", "constants", "selftest"}) {
    CLI::App* s = app.add_subcommand(name, blurbs.at(name));
    s->add_option("--field", field_tag, "Q or F<q>(t)");
    s->add_option("--height", height, "witness search height");
    s->add_option("--bound", bound, "search / certification bound");
    s->add_option("--constants", constants_path, "constants fixture path");
    s->add_flag("--pretty", pretty_flag, "indent the JSON output");
    s->allow_extras();  // positionals, including negative coefficients
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    CLI::App* sub = app.get_subcommands().front();

    Request rq;
    rq.height = height;
    rq.bound = bound;
    rq.constants_path = constants_path;
    rq.pos = sub->remaining();
    if (!field_tag.empty()) {
      rq.field = GlobalField::parse_tag(field_tag);
      if (!rq.field)
        throw std::domain_error("unknown field '" + field_tag +
                                "' (use Q or F<q>(t))");
    }

    const std::string name = sub->get_name();
    json r;
    if (name == "decide") r = do_decide(rq);
    else if (name == "check") r = do_check(rq, input);
    else if (name == "hilbert") r = do_hilbert(rq);
    else if (name == "emit") r = do_emit(rq);
    else if (name == "eval") r = do_eval(rq);
    else if (name == "constants") r = do_constants(rq);
    else r = do_selftest(rq);
    emit_doc(r);
    if (name == "selftest" && !r["passed"].get<bool>()) return 4;
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    return fail("parse", e.what(), 2);
  } catch (const json::exception& e) {
    return fail("parse", e.what(), 2);
  } catch (const search_exhausted& e) {
    return fail("undetermined", e.what(), 3);
  } catch (const internal_error& e) {
    return fail("internal", e.what(), 4);
  } catch (const std::domain_error& e) {
    return fail("parse", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 4);
  }
}

}  // namespace anisotope::cli
