#include "anisotope/dioph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>

#include "anisotope/common.hpp"
#include "anisotope/hilbert.hpp"

namespace anisotope {

namespace {

// Identifier usable as a variable name.  "t" is never a variable: over
// F_q(t) it names the coefficient field, and keeping the rule uniform lets
// formulas be inspected without knowing their field.
bool var_shaped(const std::string& s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  for (char ch : s)
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  return s != "t";
}

void require_name(const std::string& s, const char* where) {
  if (!var_shaped(s))
    throw std::domain_error(std::string(where) + ": bad variable name \"" + s +
                            "\"");
}

}  // namespace

// ---------------------------------------------------------------------------
// MultiPoly

void MultiPoly::add_term(const Monomial& m, const Elem& c) {
  if (c.is_zero()) return;
  auto it = terms_.find(m);
  if (it == terms_.end()) {
    terms_.emplace(m, c);
    return;
  }
  it->second = it->second + c;
  if (it->second.is_zero()) terms_.erase(it);
}

MultiPoly MultiPoly::constant(const Elem& c) {
  MultiPoly out(c.field());
  out.add_term(Monomial{}, c);
  return out;
}

MultiPoly MultiPoly::variable(const GlobalField& K, const std::string& name) {
  require_name(name, "MultiPoly::variable");
  MultiPoly out(K);
  out.add_term(Monomial{{name, 1}}, Elem::one(K));
  return out;
}

std::optional<Elem> MultiPoly::constant_value() const {
  if (terms_.empty()) return Elem::zero(K_);
  if (terms_.size() == 1 && terms_.begin()->first.empty())
    return terms_.begin()->second;
  return std::nullopt;
}

MultiPoly operator+(const MultiPoly& a, const MultiPoly& b) {
  if (a.K_ != b.K_) throw std::domain_error("MultiPoly: mixed fields");
  MultiPoly out = a;
  for (const auto& [m, c] : b.terms_) out.add_term(m, c);
  return out;
}

MultiPoly operator-(const MultiPoly& a, const MultiPoly& b) {
  if (a.K_ != b.K_) throw std::domain_error("MultiPoly: mixed fields");
  MultiPoly out = a;
  for (const auto& [m, c] : b.terms_) out.add_term(m, -c);
  return out;
}

MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
  if (a.K_ != b.K_) throw std::domain_error("MultiPoly: mixed fields");
  MultiPoly out(a.K_);
  for (const auto& [ma, ca] : a.terms_)
    for (const auto& [mb, cb] : b.terms_) {
      MultiPoly::Monomial m = ma;
      for (const auto& [v, e] : mb) m[v] += e;
      out.add_term(m, ca * cb);
    }
  return out;
}

MultiPoly MultiPoly::operator-() const {
  MultiPoly out(K_);
  for (const auto& [m, c] : terms_) out.terms_.emplace(m, -c);
  return out;
}

Elem MultiPoly::eval(const std::map<std::string, Elem>& env) const {
  Elem sum = Elem::zero(K_);
  for (const auto& [m, c] : terms_) {
    Elem term = c;
    for (const auto& [v, e] : m) {
      auto it = env.find(v);
      if (it == env.end())
        throw std::domain_error("MultiPoly::eval: unbound variable " + v);
      if (it->second.field() != K_)
        throw std::domain_error("MultiPoly::eval: value for " + v +
                                " lies in the wrong field");
      for (int k = 0; k < e; ++k) term = term * it->second;
    }
    sum = sum + term;
  }
  return sum;
}

std::vector<std::string> MultiPoly::free_vars() const {
  std::set<std::string> names;
  for (const auto& [m, c] : terms_)
    for (const auto& [v, e] : m) names.insert(v);
  return {names.begin(), names.end()};
}

MultiPoly MultiPoly::rename(
    const std::map<std::string, std::string>& table) const {
  for (const auto& [from, to] : table) require_name(to, "MultiPoly::rename");
  MultiPoly out(K_);
  for (const auto& [m, c] : terms_) {
    Monomial nm;
    for (const auto& [v, e] : m) {
      auto it = table.find(v);
      nm[it == table.end() ? v : it->second] += e;
    }
    out.add_term(nm, c);
  }
  return out;
}

bool MultiPoly::operator==(const MultiPoly& o) const {
  return K_ == o.K_ && terms_ == o.terms_;
}

std::string MultiPoly::str() const {
  if (terms_.empty()) return "0";
  // Non-constant terms in map order, the constant term last.
  std::vector<const std::pair<const Monomial, Elem>*> order;
  const std::pair<const Monomial, Elem>* constant_term = nullptr;
  for (const auto& t : terms_) {
    if (t.first.empty())
      constant_term = &t;
    else
      order.push_back(&t);
  }
  if (constant_term) order.push_back(constant_term);

  std::string out;
  bool first = true;
  for (const auto* t : order) {
    Elem mag = t->second;
    bool neg = false;
    if (K_.is_q() && mag.sign() < 0) {
      neg = true;
      mag = -mag;
    }
    out += first ? (neg ? "-" : "") : (neg ? " - " : " + ");
    first = false;

    std::string coeff;
    bool coeff_is_one;
    if (K_.is_q()) {
      coeff_is_one = mag.is_one();
      coeff = mag.rat().get_den() == 1 ? mag.rat().get_num().get_str()
                                       : "{" + mag.str() + "}";
    } else {
      coeff_is_one = mag.is_one();
      bool constant_coeff = mag.num().is_constant() && mag.den().is_constant();
      coeff = constant_coeff ? mag.str() : "{" + mag.str() + "}";
    }

    if (t->first.empty()) {
      out += coeff;
      continue;
    }
    std::string mono;
    for (const auto& [v, e] : t->first) {
      if (!mono.empty()) mono += "*";
      mono += v;
      if (e > 1) mono += "^" + std::to_string(e);
    }
    out += coeff_is_one ? mono : coeff + "*" + mono;
  }
  return out;
}

namespace {

struct PolyToken {
  enum Type { Op, Number, Brace, Ident } type;
  char op = 0;
  std::string text;
};

std::optional<std::vector<PolyToken>> poly_tokens(const std::string& s) {
  std::vector<PolyToken> out;
  size_t i = 0;
  while (i < s.size()) {
    char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '+' || ch == '-' || ch == '*' || ch == '^') {
      out.push_back({PolyToken::Op, ch, {}});
      ++i;
    } else if (ch == '{') {
      size_t close = s.find('}', i + 1);
      if (close == std::string::npos) return std::nullopt;
      out.push_back({PolyToken::Brace, 0, s.substr(i + 1, close - i - 1)});
      i = close + 1;
    } else if (std::isdigit(static_cast<unsigned char>(ch))) {
      size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j])))
        ++j;
      out.push_back({PolyToken::Number, 0, s.substr(i, j - i)});
      i = j;
    } else if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      size_t j = i;
      while (j < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_'))
        ++j;
      out.push_back({PolyToken::Ident, 0, s.substr(i, j - i)});
      i = j;
    } else {
      return std::nullopt;
    }
  }
  return out;
}

// poly := ['-'] term (('+'|'-') term)*; term := factor ('*' factor)*;
// factor := number | {element} | ident ['^' number].
struct PolyParser {
  const GlobalField& K;
  const std::vector<PolyToken>& toks;
  size_t pos = 0;

  bool at_op(char c) const {
    return pos < toks.size() && toks[pos].type == PolyToken::Op &&
           toks[pos].op == c;
  }

  bool factor(Elem& coeff, MultiPoly::Monomial& mono) {
    if (pos >= toks.size()) return false;
    const PolyToken& t = toks[pos];
    if (t.type == PolyToken::Number || t.type == PolyToken::Brace) {
      auto e = Elem::parse(K, t.text);
      if (!e) return false;
      coeff = coeff * *e;
      ++pos;
      return true;
    }
    if (t.type != PolyToken::Ident || !var_shaped(t.text)) return false;
    std::string name = t.text;
    ++pos;
    long exp = 1;
    if (at_op('^')) {
      ++pos;
      if (pos >= toks.size() || toks[pos].type != PolyToken::Number)
        return false;
      try {
        exp = std::stol(toks[pos].text);
      } catch (const std::exception&) {
        return false;
      }
      if (exp < 1 || exp > 1000000) return false;
      ++pos;
    }
    mono[name] += static_cast<int>(exp);
    return true;
  }

  bool term(Elem& coeff, MultiPoly::Monomial& mono) {
    if (!factor(coeff, mono)) return false;
    while (at_op('*')) {
      ++pos;
      if (!factor(coeff, mono)) return false;
    }
    return true;
  }

  std::optional<MultiPoly> poly() {
    MultiPoly out(K);
    bool neg = false;
    if (at_op('-')) {
      neg = true;
      ++pos;
    }
    while (true) {
      Elem coeff = Elem::one(K);
      MultiPoly::Monomial mono;
      if (!term(coeff, mono)) return std::nullopt;
      MultiPoly t(K);
      t = t + MultiPoly::constant(neg ? -coeff : coeff);
      if (!mono.empty()) {
        MultiPoly m(K);
        // Rebuild the monomial through variable() to reuse its checks.
        m = MultiPoly::constant(Elem::one(K));
        for (const auto& [v, e] : mono)
          for (int k = 0; k < e; ++k) m = m * MultiPoly::variable(K, v);
        t = t * m;
      }
      out = out + t;
      if (pos >= toks.size()) break;
      if (at_op('+'))
        neg = false;
      else if (at_op('-'))
        neg = true;
      else
        return std::nullopt;
      ++pos;
    }
    return out;
  }
};

}  // namespace

std::optional<MultiPoly> MultiPoly::parse(const GlobalField& K,
                                          const std::string& text) {
  auto toks = poly_tokens(text);
  if (!toks || toks->empty()) {
    // "0" tokenizes to one Number; empty input is not a polynomial.
    return std::nullopt;
  }
  PolyParser p{K, *toks};
  try {
    auto out = p.poly();
    if (!out || p.pos != toks->size()) return std::nullopt;
    return out;
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Formula

Formula Formula::poly_eq(MultiPoly p) {
  Formula f;
  f.kind = Kind::PolyEq;
  f.poly = std::move(p);
  return f;
}

Formula Formula::conj(std::vector<Formula> fs) {
  if (fs.empty()) throw std::domain_error("conj: no conjuncts");
  Formula f;
  f.kind = Kind::And;
  f.children = std::move(fs);
  return f;
}

Formula Formula::disj(std::vector<Formula> fs) {
  if (fs.empty()) throw std::domain_error("disj: no disjuncts");
  Formula f;
  f.kind = Kind::Or;
  f.children = std::move(fs);
  return f;
}

Formula Formula::exists(std::vector<std::string> vs, Formula body) {
  if (vs.empty()) throw std::domain_error("exists: no variables");
  std::set<std::string> seen;
  for (const auto& v : vs) {
    require_name(v, "exists");
    if (!seen.insert(v).second)
      throw std::domain_error("exists: duplicate variable " + v);
  }
  Formula f;
  f.kind = Kind::Exists;
  f.vars = std::move(vs);
  f.children.push_back(std::move(body));
  return f;
}

Formula Formula::pred_node(std::string name, std::vector<std::string> as) {
  if (name.empty()) throw std::domain_error("pred_node: empty name");
  Formula f;
  f.kind = Kind::Pred;
  f.pred = std::move(name);
  f.args = std::move(as);
  return f;
}

bool Formula::operator==(const Formula& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case Kind::PolyEq:
      return poly == o.poly;
    case Kind::And:
    case Kind::Or:
      return children == o.children;
    case Kind::Exists:
      return vars == o.vars && children == o.children;
    case Kind::Pred:
      return pred == o.pred && args == o.args;
  }
  return false;
}

namespace {

void collect_free(const Formula& f, std::set<std::string>& bound,
                  std::set<std::string>& out) {
  switch (f.kind) {
    case Formula::Kind::PolyEq:
      for (const auto& v : f.poly.free_vars())
        if (!bound.count(v)) out.insert(v);
      return;
    case Formula::Kind::And:
    case Formula::Kind::Or:
      for (const auto& c : f.children) collect_free(c, bound, out);
      return;
    case Formula::Kind::Exists: {
      std::vector<std::string> added;
      for (const auto& v : f.vars)
        if (bound.insert(v).second) added.push_back(v);
      for (const auto& c : f.children) collect_free(c, bound, out);
      for (const auto& v : added) bound.erase(v);
      return;
    }
    case Formula::Kind::Pred:
      for (const auto& a : f.args)
        if (var_shaped(a) && !bound.count(a)) out.insert(a);
      return;
  }
}

const std::set<std::string>& pred_vocabulary() {
  static const std::set<std::string> vocab = {
      "nonsquare", "nonnorm", "coset_unit",       "coset_one_plus_j",
      "phi",       "psi",     "local_obstruction"};
  return vocab;
}

}  // namespace

std::vector<std::string> Formula::free_vars() const {
  std::set<std::string> bound, out;
  collect_free(*this, bound, out);
  return {out.begin(), out.end()};
}

bool valid_structure(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::PolyEq:
      return f.children.empty() && f.vars.empty();
    case Formula::Kind::And:
    case Formula::Kind::Or:
      if (f.children.empty() || !f.vars.empty()) return false;
      for (const auto& c : f.children)
        if (!valid_structure(c)) return false;
      return true;
    case Formula::Kind::Exists: {
      if (f.children.size() != 1 || f.vars.empty()) return false;
      std::set<std::string> seen;
      for (const auto& v : f.vars)
        if (!var_shaped(v) || !seen.insert(v).second) return false;
      return valid_structure(f.children.front());
    }
    case Formula::Kind::Pred:
      return f.children.empty() && f.vars.empty() &&
             pred_vocabulary().count(f.pred) > 0 && !f.args.empty();
  }
  return false;
}

// ---------------------------------------------------------------------------
// S-expressions

std::string to_sexpr(const Formula& f) {
  switch (f.kind) {
    case Formula::Kind::PolyEq:
      return "(poly \"" + f.poly.str() + "\")";
    case Formula::Kind::And:
    case Formula::Kind::Or: {
      std::string out = f.kind == Formula::Kind::And ? "(and" : "(or";
      for (const auto& c : f.children) out += " " + to_sexpr(c);
      return out + ")";
    }
    case Formula::Kind::Exists: {
      std::string out = "(exists (";
      for (size_t i = 0; i < f.vars.size(); ++i)
        out += (i ? " " : "") + f.vars[i];
      return out + ") " + to_sexpr(f.children.front()) + ")";
    }
    case Formula::Kind::Pred: {
      std::string out = "(pred " + f.pred;
      for (const auto& a : f.args) out += " \"" + a + "\"";
      return out + ")";
    }
  }
  throw internal_error("to_sexpr: unreachable");
}

namespace {

struct SexprToken {
  enum Type { LParen, RParen, Atom, Str } type;
  std::string text;
};

std::optional<std::vector<SexprToken>> sexpr_tokens(const std::string& s) {
  std::vector<SexprToken> out;
  size_t i = 0;
  while (i < s.size()) {
    char ch = s[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
    } else if (ch == '(') {
      out.push_back({SexprToken::LParen, {}});
      ++i;
    } else if (ch == ')') {
      out.push_back({SexprToken::RParen, {}});
      ++i;
    } else if (ch == '"') {
      size_t close = s.find('"', i + 1);
      if (close == std::string::npos) return std::nullopt;
      out.push_back({SexprToken::Str, s.substr(i + 1, close - i - 1)});
      i = close + 1;
    } else {
      size_t j = i;
      while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j])) &&
             s[j] != '(' && s[j] != ')' && s[j] != '"')
        ++j;
      out.push_back({SexprToken::Atom, s.substr(i, j - i)});
      i = j;
    }
  }
  return out;
}

struct SexprParser {
  const GlobalField& K;
  const std::vector<SexprToken>& toks;
  size_t pos = 0;

  bool take(SexprToken::Type t) {
    if (pos < toks.size() && toks[pos].type == t) {
      ++pos;
      return true;
    }
    return false;
  }

  std::optional<Formula> node() {
    if (!take(SexprToken::LParen)) return std::nullopt;
    if (pos >= toks.size() || toks[pos].type != SexprToken::Atom)
      return std::nullopt;
    std::string head = toks[pos++].text;

    if (head == "poly") {
      if (pos >= toks.size() || toks[pos].type != SexprToken::Str)
        return std::nullopt;
      auto p = MultiPoly::parse(K, toks[pos++].text);
      if (!p || !take(SexprToken::RParen)) return std::nullopt;
      return Formula::poly_eq(std::move(*p));
    }
    if (head == "and" || head == "or") {
      std::vector<Formula> kids;
      while (pos < toks.size() && toks[pos].type == SexprToken::LParen) {
        auto k = node();
        if (!k) return std::nullopt;
        kids.push_back(std::move(*k));
      }
      if (kids.empty() || !take(SexprToken::RParen)) return std::nullopt;
      return head == "and" ? Formula::conj(std::move(kids))
                           : Formula::disj(std::move(kids));
    }
    if (head == "exists") {
      if (!take(SexprToken::LParen)) return std::nullopt;
      std::vector<std::string> vs;
      while (pos < toks.size() && toks[pos].type == SexprToken::Atom)
        vs.push_back(toks[pos++].text);
      if (!take(SexprToken::RParen)) return std::nullopt;
      auto body = node();
      if (!body || !take(SexprToken::RParen)) return std::nullopt;
      return Formula::exists(std::move(vs), std::move(*body));
    }
    if (head == "pred") {
      if (pos >= toks.size() || toks[pos].type != SexprToken::Atom)
        return std::nullopt;
      std::string name = toks[pos++].text;
      std::vector<std::string> as;
      while (pos < toks.size() && toks[pos].type == SexprToken::Str)
        as.push_back(toks[pos++].text);
      if (!take(SexprToken::RParen)) return std::nullopt;
      return Formula::pred_node(std::move(name), std::move(as));
    }
    return std::nullopt;
  }
};

}  // namespace

std::optional<Formula> parse_sexpr(const GlobalField& K,
                                   const std::string& text) {
  auto toks = sexpr_tokens(text);
  if (!toks) return std::nullopt;
  SexprParser p{K, *toks};
  try {
    auto f = p.node();
    if (!f || p.pos != toks->size()) return std::nullopt;
    return f;
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Evaluation

bool eval_formula(const Formula& f, const Witness& w, const PredFn& preds) {
  switch (f.kind) {
    case Formula::Kind::PolyEq:
      return f.poly.eval(w.values).is_zero();
    case Formula::Kind::And:
      for (const auto& c : f.children)
        if (!eval_formula(c, w, preds)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& c : f.children)
        if (eval_formula(c, w, preds)) return true;
      return false;
    case Formula::Kind::Exists:
      return eval_formula(f.children.front(), w, preds);
    case Formula::Kind::Pred: {
      std::vector<std::string> args = f.args;
      for (auto& a : args) {
        auto it = w.values.find(a);
        if (it != w.values.end()) a = it->second.str();
      }
      return preds(f.pred, args);
    }
  }
  throw internal_error("eval_formula: unreachable");
}

namespace {

GalElem parse_gal_arg(const std::string& s) {
  // GalElem::str format: "(1,-1)".
  std::string t;
  for (char ch : s)
    if (!std::isspace(static_cast<unsigned char>(ch))) t += ch;
  auto bad = [&]() -> GalElem {
    throw std::domain_error("not a Galois element: " + s);
  };
  if (t.size() < 5 || t.front() != '(' || t.back() != ')') return bad();
  size_t comma = t.find(',');
  if (comma == std::string::npos) return bad();
  auto part = [&](const std::string& u) {
    if (u == "1" || u == "+1") return 1;
    if (u == "-1") return -1;
    bad();
    return 0;
  };
  return GalElem(part(t.substr(1, comma - 1)),
                 part(t.substr(comma + 1, t.size() - comma - 2)));
}

}  // namespace

PredFn semantic_pred_evaluator(const CftConstants& cs) {
  CftConstants local = cs;
  return [local](const std::string& name,
                 const std::vector<std::string>& args) -> bool {
    auto elem = [&](size_t i) -> Elem {
      auto e = Elem::parse(local.K, args.at(i));
      if (!e)
        throw std::domain_error("predicate " + name +
                                ": argument is not an element: " + args.at(i));
      return *e;
    };
    auto need = [&](size_t lo, size_t hi) {
      if (args.size() < lo || args.size() > hi)
        throw std::domain_error("predicate " + name +
                                ": wrong argument count");
    };
    auto ring_from = [&](size_t i) -> SemilocalRing {
      GalElem sigma = parse_gal_arg(args.at(i));
      std::optional<Elem> q;
      if (args.size() > i + 2) q = elem(i + 2);
      return r_delta(sigma, elem(i + 1), q, local);
    };

    if (name == "nonsquare") {
      need(1, 1);
      return !is_square(elem(0));
    }
    if (name == "nonnorm") {
      need(2, 2);
      return !is_norm(elem(0), elem(1));
    }
    if (name == "coset_unit") {
      need(4, 5);
      return coset_membership(elem(0), elem(1), ring_from(2),
                              CosetMode::Units);
    }
    if (name == "coset_one_plus_j") {
      need(4, 5);
      return coset_membership(elem(0), elem(1), ring_from(2),
                              CosetMode::OnePlusJ);
    }
    if (name == "phi") {
      need(2, 2);
      return phi_tilde_membership(elem(0), parse_gal_arg(args.at(1)), local);
    }
    if (name == "psi") {
      need(2, 2);
      return psi_membership(elem(0), elem(1), local);
    }
    if (name == "local_obstruction") {
      need(4, 4);
      Elem a1 = elem(0), a2 = elem(1), a3 = elem(2), a4 = elem(3);
      Elem disc = a1 * a2 * a3 * a4;
      for (const auto& [v, e] : local.modulus)
        if (hilbert_symbol(a1, a2, v) * hilbert_symbol(-a3, -a4, v) == -1 &&
            is_square(disc, v))
          return true;
      return false;
    }
    throw std::domain_error("unknown predicate: " + name);
  };
}

// ---------------------------------------------------------------------------
// Emitters

Formula emit_isotropy_system(const std::vector<Elem>& coeffs) {
  if (coeffs.empty())
    throw std::domain_error("emit_isotropy_system: no coefficients");
  const GlobalField& K = coeffs.front().field();
  MultiPoly form(K);
  std::vector<std::string> vars;
  std::vector<Formula> invertible;
  for (size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].field() != K)
      throw std::domain_error("emit_isotropy_system: mixed fields");
    std::string name = "x" + std::to_string(i + 1);
    vars.push_back(name);
    MultiPoly xi = MultiPoly::variable(K, name);
    form = form + MultiPoly::constant(coeffs[i]) * xi * xi;
    invertible.push_back(Formula::poly_eq(
        xi * MultiPoly::variable(K, "y") -
        MultiPoly::constant(Elem::one(K))));
  }
  vars.push_back("y");
  return Formula::exists(
      std::move(vars),
      Formula::conj({Formula::poly_eq(form),
                     Formula::disj(std::move(invertible))}));
}

Formula emit_t_membership(const Elem& a, const Elem& b, const std::string& x) {
  const GlobalField& K = a.field();
  if (b.field() != K) throw std::domain_error("emit_t_membership: mixed fields");
  if (a.is_zero() || b.is_zero())
    throw std::domain_error("emit_t_membership: zero parameter");
  require_name(x, "emit_t_membership");
  std::vector<std::string> vars;
  auto nrd = [&](const std::string& base) {
    std::array<MultiPoly, 4> w;
    for (int i = 0; i < 4; ++i) {
      std::string name = base + std::to_string(i);
      if (name == x)
        throw std::domain_error(
            "emit_t_membership: free variable collides with " + name);
      vars.push_back(name);
      w[i] = MultiPoly::variable(K, name);
    }
    return w[0] * w[0] - MultiPoly::constant(a) * w[1] * w[1] -
           MultiPoly::constant(b) * w[2] * w[2] +
           MultiPoly::constant(a * b) * w[3] * w[3];
  };
  MultiPoly one = MultiPoly::constant(Elem::one(K));
  MultiPoly two = MultiPoly::constant(Elem(K, 2));
  MultiPoly ny = nrd("y"), nz = nrd("z");
  MultiPoly traces = two * MultiPoly::variable(K, "y0") +
                     two * MultiPoly::variable(K, "z0") -
                     MultiPoly::variable(K, x);
  return Formula::exists(
      std::move(vars),
      Formula::conj({Formula::poly_eq(ny - one), Formula::poly_eq(nz - one),
                     Formula::poly_eq(traces)}));
}

Formula emit_dagger(const DaggerContext& ctx, const Elem& x, const Elem& y,
                    int sign) {
  if (x.is_zero() || y.is_zero())
    throw std::domain_error("emit_dagger: zero argument");
  if (x.field() != y.field())
    throw std::domain_error("emit_dagger: mixed fields");
  if (sign != 1 && sign != -1)
    throw std::domain_error("emit_dagger: sign must be +-1");
  if (ctx.p.empty() || ctx.s.empty())
    throw std::domain_error("emit_dagger: empty ring parameter");
  if (ctx.sigma.is_identity() != ctx.q.has_value())
    throw std::domain_error(
        "emit_dagger: companion present iff the class is the identity");

  std::vector<std::string> tail{ctx.sigma.str(), ctx.p};
  if (ctx.q) tail.push_back(*ctx.q);
  auto member = [&](const char* pred, const Elem& z, const std::string& cof) {
    std::vector<std::string> args{z.str(), cof};
    args.insert(args.end(), tail.begin(), tail.end());
    return Formula::pred_node(pred, std::move(args));
  };
  auto unit = [&](const Elem& z, const std::string& cof) {
    return member("coset_unit", z, cof);
  };
  auto one_plus_j = [&](const Elem& z, const std::string& cof) {
    return member("coset_one_plus_j", z, cof);
  };
  const Elem mxy = -(x * y);

  if (sign == -1)
    return Formula::disj(
        {Formula::conj({unit(x, ctx.p),
                        Formula::disj({one_plus_j(y, ctx.s),
                                       one_plus_j(mxy, ctx.s)})}),
         Formula::conj({unit(y, ctx.p),
                        Formula::disj({one_plus_j(x, ctx.s),
                                       one_plus_j(mxy, ctx.s)})})});
  // The +1 sentence must cover all four valuation sectors at the isolated
  // place: both arguments of even valuation, one carried by p against a
  // square-unit coset, or both carried by p with -xy a square-unit coset.
  return Formula::disj(
      {Formula::conj({unit(x, "1"), unit(y, "1")}),
       Formula::conj({unit(x, ctx.p), one_plus_j(y, "1")}),
       Formula::conj({unit(y, ctx.p), one_plus_j(x, "1")}),
       Formula::conj(
           {unit(x, ctx.p), unit(y, ctx.p), one_plus_j(mxy, "1")})});
}

Formula emit_anisotropy_formula(int m, const std::vector<Elem>& coeffs,
                                const CftConstants& cs) {
  if (m < 1 || coeffs.size() != static_cast<size_t>(m))
    throw std::domain_error(
        "emit_anisotropy_formula: dimension/coefficient mismatch");
  const GlobalField& K = cs.K;
  for (const auto& c : coeffs) {
    if (c.field() != K)
      throw std::domain_error("emit_anisotropy_formula: wrong field");
    if (c.is_zero())
      throw std::domain_error("emit_anisotropy_formula: zero coefficient");
  }

  if (m == 1) return Formula::poly_eq(MultiPoly(K));
  if (m == 2)
    return Formula::pred_node("nonsquare",
                              {(-(coeffs[0] * coeffs[1])).str()});
  if (m == 3)
    return Formula::conj(
        {Formula::pred_node("nonsquare", {(-(coeffs[0] * coeffs[1])).str()}),
         Formula::pred_node("nonnorm", {(-(coeffs[0] * coeffs[2])).str(),
                                        (-(coeffs[0] * coeffs[1])).str()})});

  if (m == 4) {
    const Elem &a1 = coeffs[0], &a2 = coeffs[1], &a3 = coeffs[2],
               &a4 = coeffs[3];
    Elem disc = a1 * a2 * a3 * a4;
    // One pairing per orientation of the symbol disagreement.
    auto pairing = [&](const DaggerContext& ctx) {
      return Formula::disj(
          {Formula::conj({emit_dagger(ctx, a1, a2, 1),
                          emit_dagger(ctx, -a3, -a4, -1)}),
           Formula::conj({emit_dagger(ctx, a1, a2, -1),
                          emit_dagger(ctx, -a3, -a4, 1)})});
    };
    std::vector<Formula> branches;
    branches.push_back(Formula::pred_node(
        "local_obstruction", {a1.str(), a2.str(), a3.str(), a4.str()}));
    for (const GalElem& sigma : GalElem::all()) {
      if (sigma.is_identity()) continue;
      DaggerContext ctx{sigma, "p", std::nullopt, cs.s_for(sigma).str()};
      branches.push_back(Formula::exists(
          {"p"},
          Formula::conj({Formula::pred_node("phi", {"p", sigma.str()}),
                         pairing(ctx),
                         Formula::pred_node(
                             "coset_one_plus_j",
                             {disc.str(), "1", sigma.str(), "p"})})));
    }
    DaggerContext id_ctx{GalElem(1, 1), "p", std::optional<std::string>("q"),
                         "q"};
    branches.push_back(Formula::exists(
        {"p", "q"},
        Formula::conj({Formula::pred_node("psi", {"p", "q"}), pairing(id_ctx),
                       Formula::pred_node(
                           "coset_one_plus_j",
                           {disc.str(), "1", GalElem(1, 1).str(), "p", "q"})})));
    return Formula::disj(std::move(branches));
  }

  // m >= 5.
  if (K.is_fqt())
    return Formula::poly_eq(MultiPoly::constant(Elem::one(K)));
  // Over Q only definite forms stay anisotropic; positivity of c is the
  // solvability of u1^2 + u2^2 + u3^2 + u4^2 = c.
  auto positive = [&](const Elem& c) {
    MultiPoly sum(K);
    std::vector<std::string> vars;
    for (int i = 1; i <= 4; ++i) {
      std::string name = "u" + std::to_string(i);
      vars.push_back(name);
      MultiPoly ui = MultiPoly::variable(K, name);
      sum = sum + ui * ui;
    }
    return Formula::exists(std::move(vars),
                           Formula::poly_eq(sum - MultiPoly::constant(c)));
  };
  std::vector<Formula> all_pos, all_neg;
  for (const auto& c : coeffs) {
    all_pos.push_back(positive(c));
    all_neg.push_back(positive(-c));
  }
  return Formula::disj(
      {Formula::conj(std::move(all_pos)), Formula::conj(std::move(all_neg))});
}

// ---------------------------------------------------------------------------
// Flattening

namespace {

struct FlatResult {
  MultiPoly poly;
  std::vector<std::string> vars;  // binding order, already renamed apart
};

struct FlattenState {
  const GlobalField& K;
  Elem d;  // fixed nonsquare for the conjunction fold
  std::set<std::string> used;
  long counter = 0;

  std::string fresh(const std::string& base) {
    while (true) {
      std::string name = base + "_" + std::to_string(++counter);
      if (!used.count(name)) return name;
    }
  }

  FlatResult walk(const Formula& f,
                  const std::map<std::string, std::string>& subst) {
    switch (f.kind) {
      case Formula::Kind::Pred:
        throw std::domain_error(
            "flatten: semantic predicates have no polynomial form");
      case Formula::Kind::PolyEq:
        return {f.poly.rename(subst), {}};
      case Formula::Kind::And: {
        FlatResult acc = walk(f.children.front(), subst);
        MultiPoly dd = MultiPoly::constant(d);
        for (size_t i = 1; i < f.children.size(); ++i) {
          FlatResult nxt = walk(f.children[i], subst);
          acc.poly = acc.poly * acc.poly - dd * nxt.poly * nxt.poly;
          acc.vars.insert(acc.vars.end(), nxt.vars.begin(), nxt.vars.end());
        }
        return acc;
      }
      case Formula::Kind::Or: {
        FlatResult acc = walk(f.children.front(), subst);
        for (size_t i = 1; i < f.children.size(); ++i) {
          FlatResult nxt = walk(f.children[i], subst);
          acc.poly = acc.poly * nxt.poly;
          acc.vars.insert(acc.vars.end(), nxt.vars.begin(), nxt.vars.end());
        }
        return acc;
      }
      case Formula::Kind::Exists: {
        std::map<std::string, std::string> inner = subst;
        std::vector<std::string> bound;
        for (const auto& v : f.vars) {
          std::string nv = used.count(v) ? fresh(v) : v;
          used.insert(nv);
          if (nv != v)
            inner[v] = nv;
          else
            inner.erase(v);
          bound.push_back(nv);
        }
        FlatResult body = walk(f.children.front(), inner);
        bound.insert(bound.end(), body.vars.begin(), body.vars.end());
        return {std::move(body.poly), std::move(bound)};
      }
    }
    throw internal_error("flatten: unreachable");
  }
};

// The field of the first equation leaf; Pred leaves are rejected later.
const GlobalField* find_poly_field(const Formula& f) {
  if (f.kind == Formula::Kind::PolyEq) return &f.poly.field();
  for (const auto& c : f.children)
    if (const GlobalField* K = find_poly_field(c)) return K;
  return nullptr;
}

}  // namespace

Formula flatten(const Formula& f) {
  const GlobalField* Kp = find_poly_field(f);
  if (!Kp)
    throw std::domain_error(
        "flatten: semantic predicates have no polynomial form");
  const GlobalField K = *Kp;
  Elem d = K.is_q() ? Elem(K, 2) : Elem::poly(FqPoly::variable(K.q));
  FlattenState st{K, d, {}, 0};
  for (const auto& v : f.free_vars()) st.used.insert(v);
  FlatResult out = st.walk(f, {});
  Formula eq = Formula::poly_eq(std::move(out.poly));
  if (out.vars.empty()) return eq;
  return Formula::exists(std::move(out.vars), std::move(eq));
}

// ---------------------------------------------------------------------------
// Semantic truth

namespace {

// exists u1..u4: u1^2 + ... + u4^2 - c = 0 over Q; extracts c.
bool four_squares_shape(const Formula& f, Elem* c) {
  if (f.kind != Formula::Kind::Exists || f.vars.size() != 4 ||
      f.children.size() != 1)
    return false;
  const Formula& body = f.children.front();
  if (body.kind != Formula::Kind::PolyEq || !body.poly.field().is_q())
    return false;
  const GlobalField& K = body.poly.field();
  std::set<std::string> bound(f.vars.begin(), f.vars.end());
  std::set<std::string> squared;
  Elem cc = Elem::zero(K);
  for (const auto& [m, coef] : body.poly.terms()) {
    if (m.empty()) {
      cc = -coef;
      continue;
    }
    if (m.size() != 1 || m.begin()->second != 2 || !coef.is_one() ||
        !bound.count(m.begin()->first))
      return false;
    squared.insert(m.begin()->first);
  }
  if (squared != bound) return false;
  *c = cc;
  return true;
}

bool truth_walk(const Formula& f, const CftConstants& cs, long bound,
                const PredFn& preds);

// Or whose first disjunct is the local_obstruction predicate: the
// four-coefficient anisotropy disjunction.  Decided by locating a symbol
// disagreement with square discriminant, then checking the branch of the
// matching Frobenius class under the isolating witness.
bool quaternary_truth(const Formula& orf, const CftConstants& cs, long bound,
                      const PredFn& preds) {
  const Formula& lo = orf.children.front();
  std::array<Elem, 4> a = {Elem::zero(cs.K), Elem::zero(cs.K),
                           Elem::zero(cs.K), Elem::zero(cs.K)};
  for (int i = 0; i < 4; ++i) {
    auto e = Elem::parse(cs.K, lo.args[i]);
    if (!e)
      throw std::domain_error("semantic_truth: bad coefficient literal " +
                              lo.args[i]);
    a[i] = *e;
  }
  auto w = symbol_disagreement_place(a[0], a[1], a[2], a[3], cs, true);
  if (!w) return false;
  if (w->is_infinite() || cs.divides_modulus(*w)) {
    if (!preds("local_obstruction", lo.args))
      throw internal_error(
          "semantic_truth: modulus disagreement missed by the predicate");
    return true;
  }
  GalElem sigma = artin_map(*w, cs);
  IsolatedPrime ip = isolate_prime(*w, sigma, cs, bound);
  Witness wit;
  wit.values.emplace("p", ip.p);
  if (ip.q) wit.values.emplace("q", *ip.q);
  for (size_t i = 1; i < orf.children.size(); ++i) {
    const Formula& br = orf.children[i];
    if (br.kind != Formula::Kind::Exists || br.children.size() != 1) continue;
    const Formula& body = br.children.front();
    if (body.kind != Formula::Kind::And || body.children.empty()) continue;
    const Formula& head = body.children.front();
    if (head.kind != Formula::Kind::Pred) continue;
    bool match = sigma.is_identity()
                     ? head.pred == "psi"
                     : head.pred == "phi" && head.args.size() == 2 &&
                           head.args[1] == sigma.str();
    if (!match) continue;
    if (!eval_formula(br, wit, preds))
      throw internal_error(
          "semantic_truth: isolating witness fails the class branch at " +
          w->str());
    return true;
  }
  throw internal_error("semantic_truth: no branch for Frobenius class " +
                       sigma.str());
}

bool truth_walk(const Formula& f, const CftConstants& cs, long bound,
                const PredFn& preds) {
  switch (f.kind) {
    case Formula::Kind::PolyEq: {
      auto v = f.poly.constant_value();
      if (!v)
        throw std::domain_error(
            "semantic_truth: open polynomial equation needs a witness");
      return v->is_zero();
    }
    case Formula::Kind::Pred:
      return preds(f.pred, f.args);
    case Formula::Kind::And:
      for (const auto& c : f.children)
        if (!truth_walk(c, cs, bound, preds)) return false;
      return true;
    case Formula::Kind::Or: {
      const Formula& first = f.children.front();
      if (first.kind == Formula::Kind::Pred &&
          first.pred == "local_obstruction" && first.args.size() == 4)
        return quaternary_truth(f, cs, bound, preds);
      for (const auto& c : f.children)
        if (truth_walk(c, cs, bound, preds)) return true;
      return false;
    }
    case Formula::Kind::Exists: {
      Elem c = Elem::zero(cs.K);
      if (four_squares_shape(f, &c)) return c.sign() >= 0;
      throw std::domain_error(
          "semantic_truth: cannot decide this quantifier pattern");
    }
  }
  throw internal_error("semantic_truth: unreachable");
}

}  // namespace

bool semantic_truth(const Formula& f, const CftConstants& cs,
                    long search_bound) {
  return truth_walk(f, cs, search_bound, semantic_pred_evaluator(cs));
}

}  // namespace anisotope
