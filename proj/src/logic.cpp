#include "mbw/logic.hpp"

#include <cctype>
#include <functional>

#include "mbw/errors.hpp"
#include "mbw/labeled_tree.hpp"

namespace mbw {

Sort sort_of(const std::string& var) {
  return !var.empty() && std::isupper(static_cast<unsigned char>(var[0])) ? Sort::Set : Sort::Element;
}

// ------------------------------------------------------------ predicates

bool LabelPredicate::holds(const TreeSymbol& s) const {
  switch (kind) {
    case Kind::Symbols:
      return symbols.count(s.name) > 0;
    case Kind::Theta: {
      const auto* n = s.characteristic();
      return n && !s.leaf && theta(*n, l1, l2, l3);
    }
    case Kind::LeafZero: {
      const auto* n = s.characteristic();
      return n && s.leaf && n->is_leaf_zero();
    }
    case Kind::LeafOne: {
      const auto* n = s.characteristic();
      return n && s.leaf && n->is_leaf_one();
    }
  }
  return false;
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string LabelPredicate::text() const {
  switch (kind) {
    case Kind::Symbols: {
      std::string out = "{";
      bool first = true;
      for (const auto& s : symbols) {
        out += (first ? "" : ", ") + quote(s);
        first = false;
      }
      return out + "}";
    }
    case Kind::Theta:
      return "theta" + format_signature(l1) + format_signature(l2) + format_signature(l3);
    case Kind::LeafZero:
      return "leafzero";
    case Kind::LeafOne:
      return "leafone";
  }
  return "?";
}

bool operator==(const Formula& x, const Formula& y) {
  if (x.op != y.op || x.vars != y.vars || x.a != y.a || x.q != y.q || x.name != y.name || x.dep != y.dep) return false;
  if (bool(x.pred) != bool(y.pred) || (x.pred && !(*x.pred == *y.pred))) return false;
  if (x.kids.size() != y.kids.size()) return false;
  for (std::size_t i = 0; i < x.kids.size(); ++i)
    if (!(*x.kids[i] == *y.kids[i])) return false;
  return true;
}

// -------------------------------------------------------------- builders

FormulaPtr truth(bool value) {
  auto f = std::make_shared<Formula>();
  f->op = value ? Op::True : Op::False;
  return f;
}

FormulaPtr atom(Op op, std::vector<std::string> vars) {
  auto f = std::make_shared<Formula>();
  f->op = op;
  f->vars = std::move(vars);
  return f;
}

FormulaPtr mod_atom(const std::string& set, int a, int q) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Mod;
  f->vars = {set};
  f->a = a;
  f->q = q;
  return f;
}

FormulaPtr color_atom(const std::string& color, const std::string& var) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Color;
  f->name = color;
  f->vars = {var};
  return f;
}

FormulaPtr label_atom(const std::string& var, LabelPredicate pred) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Label;
  f->vars = {var};
  f->pred = std::make_shared<const LabelPredicate>(std::move(pred));
  return f;
}

FormulaPtr dep_atom(const std::string& set, std::shared_ptr<const DepSpec> spec) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Dep;
  f->vars = {set};
  f->dep = std::move(spec);
  return f;
}

FormulaPtr neg(FormulaPtr g) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Not;
  f->kids = {std::move(g)};
  return f;
}

FormulaPtr conj(std::vector<FormulaPtr> kids) {
  if (kids.size() == 1) return kids.front();
  auto f = std::make_shared<Formula>();
  f->op = Op::And;
  f->kids = std::move(kids);
  return f;
}

FormulaPtr disj(std::vector<FormulaPtr> kids) {
  if (kids.size() == 1) return kids.front();
  auto f = std::make_shared<Formula>();
  f->op = Op::Or;
  f->kids = std::move(kids);
  return f;
}

FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Implies;
  f->kids = {std::move(a), std::move(b)};
  return f;
}

FormulaPtr exists(const std::string& var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Exists;
  f->vars = {var};
  f->kids = {std::move(body)};
  return f;
}

FormulaPtr forall(const std::string& var, FormulaPtr body) {
  auto f = std::make_shared<Formula>();
  f->op = Op::Forall;
  f->vars = {var};
  f->kids = {std::move(body)};
  return f;
}

FormulaPtr circuit_formula(const std::string& x, const std::set<std::string>& avoid) {
  std::string y = "Y";
  for (int i = 1; y == x || avoid.count(y); ++i) y = "Y" + std::to_string(i);
  return conj({neg(atom(Op::Indep, {x})),
               forall(y, disj({neg(atom(Op::Sub, {y, x})), atom(Op::Eq, {y, x}), atom(Op::Indep, {y})}))});
}

// ---------------------------------------------------------------- parser

namespace {

struct Token {
  enum Kind { Ident, Number, String, Punct, End } kind = End;
  std::string text;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto err = [&](std::size_t at, const std::string& msg) {
    throw InputError("formula offset " + std::to_string(at) + ": " + msg);
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Token::Ident, s.substr(i, j - i), i});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j - i > 9) err(i, "number too large");
      out.push_back({Token::Number, s.substr(i, j - i), i});
      i = j;
    } else if (c == '"') {
      std::string text;
      std::size_t j = i + 1;
      while (j < s.size() && s[j] != '"') {
        if (s[j] == '\\' && j + 1 < s.size()) ++j;
        text += s[j++];
      }
      if (j >= s.size()) err(i, "unterminated string");
      out.push_back({Token::String, text, i});
      i = j + 1;
    } else if (c == '-' && i + 1 < s.size() && s[i + 1] == '>') {
      out.push_back({Token::Punct, "->", i});
      i += 2;
    } else if (std::string("()&|!~,={}").find(c) != std::string::npos) {
      out.push_back({Token::Punct, c == '~' ? "!" : std::string(1, c), i});
      ++i;
    } else {
      err(i, std::string("unexpected character '") + c + "'");
    }
  }
  out.push_back({Token::End, "", s.size()});
  return out;
}

bool is_keyword(const std::string& w) {
  static const std::set<std::string> kw{"exists", "forall", "true", "false", "in", "indep", "sub", "mod",
                                        "circuit", "Circuit", "leaf", "root", "lchild", "rchild", "label", "dep",
                                        "sing"};
  return kw.count(w) > 0;
}

class Parser {
 public:
  Parser(const std::string& text, Dialect d, const std::vector<std::string>& free)
      : toks_(tokenize(text)), dialect_(d) {
    for (const auto& v : free) {
      if (v.empty() || !(std::isalpha(static_cast<unsigned char>(v[0])) || v[0] == '_') || is_keyword(v))
        throw InputError("invalid free variable name '" + v + "'");
      scope_.push_back(v);
    }
  }

  FormulaPtr parse() {
    auto f = implication();
    if (cur().kind != Token::End) fail("unexpected '" + cur().text + "'");
    return f;
  }

 private:
  const Token& cur() const { return toks_[i_]; }
  const Token& ahead(std::size_t k) const { return toks_[std::min(i_ + k, toks_.size() - 1)]; }
  bool is(const std::string& p) const { return cur().kind == Token::Punct && cur().text == p; }
  bool is_word(const std::string& w) const { return cur().kind == Token::Ident && cur().text == w; }
  [[noreturn]] void fail(const std::string& msg) const {
    throw InputError("formula offset " + std::to_string(cur().pos) + ": " + msg);
  }
  void expect(const std::string& p) {
    if (!is(p)) fail("expected '" + p + "'" + (cur().kind == Token::End ? " at end of input" : ", got '" + cur().text + "'"));
    ++i_;
  }

  std::string variable(Sort want, const char* role) {
    if (cur().kind != Token::Ident || is_keyword(cur().text)) fail(std::string("expected ") + role);
    std::string v = cur().text;
    if (std::find(scope_.begin(), scope_.end(), v) == scope_.end()) fail("unbound variable '" + v + "'");
    if (sort_of(v) != want)
      fail("sort mismatch: '" + v + "' is a" + (sort_of(v) == Sort::Set ? " set" : "n element") +
           " variable where a" + (want == Sort::Set ? " set" : "n element") + " variable is required");
    ++i_;
    return v;
  }

  std::string any_variable() {
    if (cur().kind != Token::Ident || is_keyword(cur().text)) fail("expected a variable");
    return variable(sort_of(cur().text), "a variable");
  }

  int number() {
    if (cur().kind != Token::Number) fail("expected a number");
    return std::stoi(toks_[i_++].text);
  }

  FormulaPtr implication() {
    auto lhs = disjunction();
    if (is("->")) {
      ++i_;
      return implies(lhs, implication());
    }
    return lhs;
  }

  FormulaPtr disjunction() {
    std::vector<FormulaPtr> kids{conjunction()};
    while (is("|")) {
      ++i_;
      kids.push_back(conjunction());
    }
    return disj(std::move(kids));
  }

  FormulaPtr conjunction() {
    std::vector<FormulaPtr> kids{unary()};
    while (is("&")) {
      ++i_;
      kids.push_back(unary());
    }
    return conj(std::move(kids));
  }

  FormulaPtr unary() {
    if (is("!")) {
      ++i_;
      return neg(unary());
    }
    if (is_word("exists") || is_word("forall")) return quantifier();
    return primary();
  }

  FormulaPtr quantifier() {
    const bool ex = cur().text == "exists";
    ++i_;
    std::vector<std::string> vars;
    for (;;) {
      if (cur().kind != Token::Ident || is_keyword(cur().text)) fail("expected a variable after quantifier");
      vars.push_back(toks_[i_++].text);
      if (!is(",")) break;
      ++i_;
    }
    for (const auto& v : vars) scope_.push_back(v);
    auto body = implication();  // scope extends as far right as possible
    scope_.resize(scope_.size() - vars.size());
    for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = ex ? exists(*it, body) : forall(*it, body);
    return body;
  }

  std::set<std::string> scope_names() const { return {scope_.begin(), scope_.end()}; }

  FormulaPtr primary() {
    if (is("(")) {
      ++i_;
      auto f = implication();
      expect(")");
      return f;
    }
    if (cur().kind != Token::Ident) fail(cur().kind == Token::End ? "unexpected end of formula" : "unexpected '" + cur().text + "'");
    const std::string w = cur().text;
    if (w == "true" || w == "false") {
      ++i_;
      return truth(w == "true");
    }
    const bool call = ahead(1).kind == Token::Punct && ahead(1).text == "(";
    if (call) return predicate(w);
    // x in X, x = y, X = Y
    const std::string lhs = any_variable();
    if (is_word("in")) {
      ++i_;
      if (sort_of(lhs) != Sort::Element) fail("sort mismatch: left side of 'in' must be an element variable");
      return atom(Op::In, {lhs, variable(Sort::Set, "a set variable")});
    }
    if (is("=")) {
      ++i_;
      return atom(Op::Eq, {lhs, variable(sort_of(lhs), "a variable of the same sort")});
    }
    fail("expected 'in' or '=' after variable '" + lhs + "'");
  }

  FormulaPtr predicate(const std::string& w) {
    const bool tree = dialect_ == Dialect::Tree;
    ++i_;
    expect("(");
    FormulaPtr f;
    if (w == "sub") {
      auto a = variable(Sort::Set, "a set variable");
      expect(",");
      f = atom(Op::Sub, {a, variable(Sort::Set, "a set variable")});
    } else if (w == "mod") {
      auto x = variable(Sort::Set, "a set variable");
      expect(",");
      const int a = number();
      expect(",");
      const int q = number();
      if (q < 1 || a >= q) fail("mod(X,a,q) needs 0 <= a < q");
      f = mod_atom(x, a, q);
    } else if (w == "indep" && !tree) {
      f = atom(Op::Indep, {variable(Sort::Set, "a set variable")});
    } else if ((w == "circuit" || w == "Circuit") && !tree) {
      f = circuit_formula(variable(Sort::Set, "a set variable"), scope_names());
    } else if ((w == "leaf" || w == "root" || w == "sing") && tree) {
      f = atom(w == "leaf" ? Op::Leaf : w == "root" ? Op::Root : Op::Sing, {any_variable()});
    } else if ((w == "lchild" || w == "rchild") && tree) {
      auto s = variable(Sort::Element, "an element variable");
      expect(",");
      f = atom(w == "lchild" ? Op::LChild : Op::RChild, {s, variable(Sort::Element, "an element variable")});
    } else if (w == "dep" && tree) {
      f = dep_atom(variable(Sort::Set, "a set variable"), nullptr);
    } else if (w == "label" && tree) {
      auto v = any_variable();
      expect(")");
      LabelPredicate p;
      if (is("=")) {
        ++i_;
        p.symbols.insert(symbol_name());
      } else if (is_word("in")) {
        ++i_;
        expect("{");
        if (!is("}")) {
          p.symbols.insert(symbol_name());
          while (is(",")) {
            ++i_;
            p.symbols.insert(symbol_name());
          }
        }
        expect("}");
      } else {
        fail("expected '=' or 'in' after label(...)");
      }
      return label_atom(v, std::move(p));
    } else if (std::isupper(static_cast<unsigned char>(w[0])) && !is_keyword(w)) {
      f = color_atom(w, variable(Sort::Element, "an element variable"));
    } else {
      --i_;
      --i_;
      fail("unknown predicate '" + w + "'");
    }
    expect(")");
    return f;
  }

  std::string symbol_name() {
    if (cur().kind != Token::Ident && cur().kind != Token::String) fail("expected a symbol name");
    return toks_[i_++].text;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
  Dialect dialect_;
  std::vector<std::string> scope_;
};

bool plain_symbol(const std::string& s) {
  if (s.empty() || is_keyword(s) || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

}  // namespace

FormulaPtr parse_formula(const std::string& text, Dialect dialect, const std::vector<std::string>& free) {
  return Parser(text, dialect, free).parse();
}

// --------------------------------------------------------------- printing

std::string unparse(const Formula& f) {
  auto join = [&](const char* sep) {
    std::string out = "(";
    for (std::size_t i = 0; i < f.kids.size(); ++i) out += (i ? sep : "") + unparse(*f.kids[i]);
    return out + ")";
  };
  switch (f.op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::In: return f.vars[0] + " in " + f.vars[1];
    case Op::Eq: return f.vars[0] + " = " + f.vars[1];
    case Op::Sub: return "sub(" + f.vars[0] + "," + f.vars[1] + ")";
    case Op::Mod: return "mod(" + f.vars[0] + "," + std::to_string(f.a) + "," + std::to_string(f.q) + ")";
    case Op::Indep: return "indep(" + f.vars[0] + ")";
    case Op::Color: return f.name + "(" + f.vars[0] + ")";
    case Op::Leaf: return "leaf(" + f.vars[0] + ")";
    case Op::Root: return "root(" + f.vars[0] + ")";
    case Op::LChild: return "lchild(" + f.vars[0] + "," + f.vars[1] + ")";
    case Op::RChild: return "rchild(" + f.vars[0] + "," + f.vars[1] + ")";
    case Op::Label: {
      const auto& p = *f.pred;
      if (p.kind == LabelPredicate::Kind::Symbols && p.symbols.size() == 1 && plain_symbol(*p.symbols.begin()))
        return "label(" + f.vars[0] + ") = " + *p.symbols.begin();
      return "label(" + f.vars[0] + ") in " + p.text();
    }
    case Op::Dep: return "dep(" + f.vars[0] + ")";
    case Op::Sing: return "sing(" + f.vars[0] + ")";
    case Op::Not: return "!" + unparse(*f.kids[0]);
    case Op::And: return join(" & ");
    case Op::Or: return join(" | ");
    case Op::Implies: return join(" -> ");
    case Op::Exists: return "(exists " + f.vars[0] + " " + unparse(*f.kids[0]) + ")";
    case Op::Forall: return "(forall " + f.vars[0] + " " + unparse(*f.kids[0]) + ")";
  }
  return "?";
}

std::string to_prefix(const Formula& f) {
  auto head = [&](const std::string& h) {
    std::string out = "(" + h;
    for (const auto& v : f.vars) out += " " + v;
    for (const auto& k : f.kids) out += " " + to_prefix(*k);
    return out + ")";
  };
  switch (f.op) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::In: return head("in");
    case Op::Eq: return head("eq");
    case Op::Sub: return head("sub");
    case Op::Mod: return "(mod " + f.vars[0] + " " + std::to_string(f.a) + " " + std::to_string(f.q) + ")";
    case Op::Indep: return head("indep");
    case Op::Color: return "(color " + f.name + " " + f.vars[0] + ")";
    case Op::Leaf: return head("leaf");
    case Op::Root: return head("root");
    case Op::LChild: return head("lchild");
    case Op::RChild: return head("rchild");
    case Op::Label: return "(label " + f.vars[0] + " " + f.pred->text() + ")";
    case Op::Dep: return head("dep");
    case Op::Sing: return head("sing");
    case Op::Not: return head("not");
    case Op::And: return head("and");
    case Op::Or: return head("or");
    case Op::Implies: return head("implies");
    case Op::Exists: return head("exists");
    case Op::Forall: return head("forall");
  }
  return "?";
}

std::vector<std::string> free_vars(const Formula& f) {
  std::vector<std::string> out;
  std::vector<std::string> bound;
  std::function<void(const Formula&)> go = [&](const Formula& g) {
    if (g.op == Op::Exists || g.op == Op::Forall) {
      bound.push_back(g.vars[0]);
      go(*g.kids[0]);
      bound.pop_back();
      return;
    }
    for (const auto& v : g.vars)
      if (std::find(bound.begin(), bound.end(), v) == bound.end() && std::find(out.begin(), out.end(), v) == out.end())
        out.push_back(v);
    for (const auto& k : g.kids) go(*k);
  };
  go(f);
  return out;
}

std::set<std::string> colors_used(const Formula& f) {
  std::set<std::string> out;
  if (f.op == Op::Color) out.insert(f.name);
  for (const auto& k : f.kids) {
    auto sub = colors_used(*k);
    out.insert(sub.begin(), sub.end());
  }
  return out;
}

FormulaPtr builtin(const std::string& name) {
  if (name == "circuit") return parse_msom("Circuit(X)", {"X"});
  if (name == "connected") return parse_msom("forall x forall y exists X (x in X & y in X & Circuit(X))");
  if (name == "a_circuit") return parse_msom("(forall y (A(y) -> y in X)) & Circuit(X)", {"X"});
  throw InputError("unknown builtin formula '" + name + "' (expected circuit, connected or a_circuit)");
}

std::vector<std::string> builtin_free_vars(const std::string& name) {
  if (name == "connected") return {};
  builtin(name);
  return {"X"};
}

// ------------------------------------------------------------ evaluation

namespace {

// Formula with variables resolved to slots of a value array.
struct Compiled {
  Op op = Op::True;
  int s0 = -1, s1 = -1;
  int a = 0, q = 1;
  std::uint64_t color = 0;
  bool set_var = false;
  std::vector<Compiled> kids;
};

struct EvalCtx {
  int n;
  const std::vector<bool>& indep;
  std::vector<std::uint64_t> slots;
};

bool run(const Compiled& c, EvalCtx& ctx) {
  auto& s = ctx.slots;
  switch (c.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::In: return (s[static_cast<std::size_t>(c.s1)] >> s[static_cast<std::size_t>(c.s0)]) & 1U;
    case Op::Eq: return s[static_cast<std::size_t>(c.s0)] == s[static_cast<std::size_t>(c.s1)];
    case Op::Sub: return (s[static_cast<std::size_t>(c.s0)] & ~s[static_cast<std::size_t>(c.s1)]) == 0;
    case Op::Mod: return std::popcount(s[static_cast<std::size_t>(c.s0)]) % c.q == c.a;
    case Op::Indep: return ctx.indep[s[static_cast<std::size_t>(c.s0)]];
    case Op::Color: return (c.color >> s[static_cast<std::size_t>(c.s0)]) & 1U;
    case Op::Not: return !run(c.kids[0], ctx);
    case Op::And:
      for (const auto& k : c.kids)
        if (!run(k, ctx)) return false;
      return true;
    case Op::Or:
      for (const auto& k : c.kids)
        if (run(k, ctx)) return true;
      return false;
    case Op::Implies: return !run(c.kids[0], ctx) || run(c.kids[1], ctx);
    case Op::Exists:
    case Op::Forall: {
      const bool ex = c.op == Op::Exists;
      const std::uint64_t count = c.set_var ? (std::uint64_t{1} << ctx.n) : static_cast<std::uint64_t>(ctx.n);
      auto& slot = s[static_cast<std::size_t>(c.s0)];
      const std::uint64_t saved = slot;
      bool result = !ex;
      for (std::uint64_t v = 0; v < count; ++v) {
        slot = v;
        if (run(c.kids[0], ctx) == ex) {
          result = ex;
          break;
        }
      }
      slot = saved;
      return result;
    }
    default:
      throw InputError("tree predicate in a matroid formula");
  }
}

}  // namespace

MsomEvaluator::MsomEvaluator(const Matroid& m, std::map<std::string, ElementSet> colors)
    : n_(m.size()), indep_(independence_table(m)), colors_(std::move(colors)) {}

bool MsomEvaluator::eval(const Formula& f, const Assignment& assignment) const {
  std::map<std::string, std::vector<int>> slot_of;  // stack per name for shadowing
  int next = 0;
  std::vector<std::uint64_t> init;
  for (const auto& [name, v] : assignment.elements) {
    if (v < 0 || v >= n_) throw InputError("element value of '" + name + "' out of range");
    slot_of[name].push_back(next++);
    init.push_back(static_cast<std::uint64_t>(v));
  }
  for (const auto& [name, v] : assignment.sets) {
    if (!v.subset_of(ElementSet::full(n_))) throw InputError("set value of '" + name + "' out of range");
    slot_of[name].push_back(next++);
    init.push_back(v.bits());
  }
  auto slot = [&](const std::string& v) {
    auto it = slot_of.find(v);
    if (it == slot_of.end() || it->second.empty()) throw InputError("variable '" + v + "' has no value");
    return it->second.back();
  };
  std::function<Compiled(const Formula&)> lower = [&](const Formula& g) {
    Compiled c;
    c.op = g.op;
    c.a = g.a;
    c.q = g.q;
    if (g.op == Op::Exists || g.op == Op::Forall) {
      c.s0 = next++;
      init.push_back(0);
      c.set_var = sort_of(g.vars[0]) == Sort::Set;
      slot_of[g.vars[0]].push_back(c.s0);
      c.kids.push_back(lower(*g.kids[0]));
      slot_of[g.vars[0]].pop_back();
      return c;
    }
    if (!g.vars.empty()) c.s0 = slot(g.vars[0]);
    if (g.vars.size() > 1) c.s1 = slot(g.vars[1]);
    if (g.op == Op::Color) {
      auto it = colors_.find(g.name);
      c.color = it == colors_.end() ? 0 : it->second.bits();
    }
    for (const auto& k : g.kids) c.kids.push_back(lower(*k));
    return c;
  };
  Compiled root = lower(f);
  EvalCtx ctx{n_, indep_, init};
  return run(root, ctx);
}

}  // namespace mbw
