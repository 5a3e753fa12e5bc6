#include "mbw/pipeline.hpp"

#include <algorithm>
#include <array>

#include "mbw/errors.hpp"

namespace mbw {

// ------------------------------------------------------------- translation

std::vector<Signature> signature_index(int t, Field f) {
  std::vector<Signature> out{std::nullopt};
  for (int k = 0; k <= t; ++k) {
    GfVector v(static_cast<std::size_t>(k), 0);
    for (;;) {
      out.emplace_back(v);
      int i = k - 1;
      while (i >= 0 && ++v[static_cast<std::size_t>(i)] == f.p()) v[static_cast<std::size_t>(i--)] = 0;
      if (i < 0) break;
    }
  }
  return out;
}

namespace {

std::string signature_var(const std::string& prefix, const Signature& s) {
  if (!s) return prefix + "n";
  std::string name = prefix;
  for (Elem e : *s) name += "_" + std::to_string(e);
  return name;
}

bool leaf_signature_allowed(const Signature& s) {
  return s && s->size() == 1 && (*s)[0] != 0;
}

}  // namespace

FormulaPtr build_dep_formula(int t, Field f, const std::string& x, std::size_t bound) {
  if (t < 0) throw InputError("width must be nonnegative");
  const auto index = signature_index(t, f);
  if (index.size() > bound)
    throw LimitError("signature index set has " + std::to_string(index.size()) + " entries, bound " +
                     std::to_string(bound));
  std::string prefix = "S";
  while (x.rfind(prefix, 0) == 0) prefix += "S";
  std::vector<std::string> names;
  for (const auto& s : index) names.push_back(signature_var(prefix, s));
  auto in = [&](const std::string& v, std::size_t i) { return atom(Op::In, {v, names[i]}); };

  // Omega: each node carries exactly one signature.
  std::vector<FormulaPtr> one;
  std::vector<FormulaPtr> some;
  for (std::size_t i = 0; i < names.size(); ++i) {
    some.push_back(in("s", i));
    for (std::size_t j = i + 1; j < names.size(); ++j) one.push_back(neg(conj({in("s", i), in("s", j)})));
  }
  one.insert(one.begin(), disj(some));
  auto omega = forall("s", conj(one));

  // Psi1: the characteristic matrix of each internal node relates the
  // signatures of its children to its own.
  std::vector<FormulaPtr> clauses;
  for (std::size_t a = 0; a < index.size(); ++a)
    for (std::size_t b = 0; b < index.size(); ++b) {
      auto children = conj({exists("s1", conj({atom(Op::LChild, {"s", "s1"}), in("s1", a)})),
                            exists("s2", conj({atom(Op::RChild, {"s", "s2"}), in("s2", b)}))});
      if (!index[a] && !index[b]) {
        clauses.push_back(implies(children, in("s", 0)));
        continue;
      }
      std::vector<FormulaPtr> options;
      for (std::size_t c = 1; c < index.size(); ++c) {
        LabelPredicate theta_pred;
        theta_pred.kind = LabelPredicate::Kind::Theta;
        theta_pred.l1 = index[a];
        theta_pred.l2 = index[b];
        theta_pred.l3 = index[c];
        options.push_back(conj({in("s", c), label_atom("s", theta_pred)}));
      }
      clauses.push_back(implies(children, disj(options)));
    }
  auto psi1 = forall("s", implies(neg(atom(Op::Leaf, {"s"})), conj(clauses)));

  // Psi2: leaf signatures, nonempty support inside X.
  LabelPredicate zero, unit;
  zero.kind = LabelPredicate::Kind::LeafZero;
  unit.kind = LabelPredicate::Kind::LeafOne;
  std::vector<FormulaPtr> leaf_rules{implies(label_atom("s", zero), in("s", 0))};
  for (std::size_t i = 1; i < index.size(); ++i) {
    leaf_rules.push_back(leaf_signature_allowed(index[i])
                             ? implies(in("s", i), conj({label_atom("s", unit), atom(Op::In, {"s", x})}))
                             : neg(in("s", i)));
  }
  auto psi2 = conj({forall("s", implies(atom(Op::Leaf, {"s"}), conj(leaf_rules))),
                    exists("s", conj({atom(Op::Leaf, {"s"}), neg(in("s", 0))}))});

  // Psi3: the root signature is the empty vector.
  std::size_t root_sig = 0;
  while (!(index[root_sig] && index[root_sig]->empty())) ++root_sig;
  auto psi3 = forall("s", implies(atom(Op::Root, {"s"}), in("s", root_sig)));

  FormulaPtr body = conj({omega, psi1, psi2, psi3});
  for (auto it = names.rbegin(); it != names.rend(); ++it) body = exists(*it, body);
  return body;
}

namespace {

FormulaPtr copy_of(const Formula& f) { return std::make_shared<const Formula>(f); }

FormulaPtr translate_rec(const Formula& f, int t, Field field, const TranslateOptions& o,
                         const std::shared_ptr<const DepSpec>& spec) {
  auto rec = [&](const Formula& g) { return translate_rec(g, t, field, o, spec); };
  switch (f.op) {
    case Op::True:
    case Op::False:
    case Op::In:
    case Op::Eq:
    case Op::Sub:
    case Op::Mod:
    case Op::Color:
      return copy_of(f);
    case Op::Indep:
      if (o.dep == DepMode::Direct) return neg(dep_atom(f.vars[0], spec));
      return neg(build_dep_formula(t, field, f.vars[0]));
    case Op::Not:
      return neg(rec(*f.kids[0]));
    case Op::And:
    case Op::Or: {
      std::vector<FormulaPtr> kids;
      for (const auto& k : f.kids) kids.push_back(rec(*k));
      return f.op == Op::And ? conj(kids) : disj(kids);
    }
    case Op::Implies:
      return implies(rec(*f.kids[0]), rec(*f.kids[1]));
    case Op::Exists:
      return exists(f.vars[0], conj({atom(Op::Leaf, {f.vars[0]}), rec(*f.kids[0])}));
    case Op::Forall:
      return forall(f.vars[0], implies(atom(Op::Leaf, {f.vars[0]}), rec(*f.kids[0])));
    default:
      throw InputError("'" + unparse(f) + "' is a tree predicate, not a matroid formula");
  }
}

bool guarded(const Formula& body, const std::string& v, Op shape) {
  if (body.op != shape || body.kids.empty()) return false;
  const Formula& g = *body.kids[0];
  return g.op == Op::Leaf && g.vars.size() == 1 && g.vars[0] == v;
}

}  // namespace

namespace {

FormulaPtr with_free_leaves(const Formula& phi, FormulaPtr body) {
  std::vector<FormulaPtr> parts;
  for (const auto& v : free_vars(phi)) parts.push_back(atom(Op::Leaf, {v}));
  if (parts.empty()) return body;
  parts.push_back(body);
  return conj(parts);
}

}  // namespace

FormulaPtr translate(const Formula& phi, int t, Field f, TranslateOptions options) {
  auto spec = std::make_shared<const EnhancedDep>(t, f);
  return with_free_leaves(phi, translate_rec(phi, t, f, options, spec));
}

FormulaPtr translate(const Formula& phi, std::shared_ptr<const DepSpec> spec) {
  return with_free_leaves(phi, translate_rec(phi, 0, Field(2), TranslateOptions{}, spec));
}

bool relativized(const Formula& f) {
  if (f.op == Op::Exists && !guarded(*f.kids[0], f.vars[0], Op::And)) return false;
  if (f.op == Op::Forall && !guarded(*f.kids[0], f.vars[0], Op::Implies)) return false;
  return std::all_of(f.kids.begin(), f.kids.end(), [](const FormulaPtr& k) { return relativized(*k); });
}

// ------------------------------------------------------------ model checks

const GfMatrix& representation(const Matroid& m) {
  if (const auto* v = m.as_vector()) return v->matrix();
  throw InputError("model checking needs a matrix or graph representation");
}

PreparedMatroid prepare(const GfMatrix& m, int t, TreeAlphabet& alphabet,
                        const std::map<std::string, ElementSet>& colors) {
  const Matroid mat{VectorMatroid(m)};
  if (mat.size() == 0) throw InputError("empty ground set");
  std::optional<Decomposition> d;
  if (mat.size() <= 10) {
    d = exact_decomposition(mat);
  } else {
    d = greedy_decomposition(mat, t);
    if (!d) throw LimitError("no decomposition of width at most " + std::to_string(3 * t) + " found");
  }
  if (d->width > t)
    throw LimitError("decomposition width " + std::to_string(d->width) + " exceeds the bound " + std::to_string(t));
  auto enhanced = build_enhanced(m, d->tree, t);
  auto tree = labeled_from_enhanced(enhanced, alphabet, colors);
  return PreparedMatroid{m, *d, std::move(enhanced), std::move(tree)};
}

ModelChecker::ModelChecker(Field f, int t, std::vector<std::string> colors, TranslateOptions translate,
                           CompileOptions compile)
    : field_(f),
      t_(t),
      translate_(translate),
      compile_(compile),
      alphabet_(std::make_shared<TreeAlphabet>(std::move(colors))) {
  EnhancedDep check(t, f);  // validates t and p early
}

PreparedMatroid ModelChecker::prepare(const GfMatrix& m, const std::map<std::string, ElementSet>& colors) const {
  if (!(m.field() == field_)) throw InputError("matrix field differs from the checker's field");
  return mbw::prepare(m, t_, *alphabet_, colors);
}

AutomatonPtr ModelChecker::automaton(const Formula& phi, const std::vector<std::string>& free) {
  std::string key = unparse(phi) + " |";
  for (const auto& v : free) key += " " + v;
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  auto tree_formula = translate(phi, t_, field_, translate_);
  auto a = compile_with_tracks(*tree_formula, alphabet_, free, compile_);
  cache_.emplace(key, a);
  return a;
}

bool ModelChecker::check(const PreparedMatroid& p, const Formula& phi, const Assignment& a) {
  const auto free = free_vars(phi);
  const int n = static_cast<int>(p.matrix.cols());
  const auto leaf_of = p.tree.shape.leaf_of_element(n);
  TreeAssignment ta;
  for (const auto& v : free) {
    if (sort_of(v) == Sort::Element) {
      auto it = a.elements.find(v);
      if (it == a.elements.end()) throw InputError("no value for free variable '" + v + "'");
      if (it->second < 0 || it->second >= n) throw InputError("element of '" + v + "' out of range");
      ta.nodes[v] = leaf_of[static_cast<std::size_t>(it->second)];
    } else {
      auto it = a.sets.find(v);
      if (it == a.sets.end()) throw InputError("no value for free variable '" + v + "'");
      if (!it->second.subset_of(ElementSet::full(n))) throw InputError("set '" + v + "' leaves the ground set");
      std::uint64_t mask = 0;
      for (int e : it->second.elements()) mask |= std::uint64_t{1} << leaf_of[static_cast<std::size_t>(e)];
      ta.sets[v] = mask;
    }
  }
  auto aut = automaton(phi, free);
  return accepts(*aut, p.tree, annotation_from(p.tree, free, ta));
}

std::size_t ModelChecker::enumerate(const PreparedMatroid& p, const Formula& phi,
                                    const std::vector<std::string>& free,
                                    const std::function<bool(const std::vector<ElementSet>&)>& emit) {
  auto aut = determinize(automaton(phi, free), compile_.state_limit, "the enumeration automaton");
  RunDag dag(*aut, p.tree);
  return dag.enumerate([&](const Annotation& ann) {
    return emit(leaf_sets_of(p.tree, ann, static_cast<int>(free.size())));
  });
}

bool model_check(const Matroid& m, const Formula& phi, int t, const Assignment& a,
                 const std::map<std::string, ElementSet>& colors) {
  const auto& matrix = representation(m);
  std::vector<std::string> names;
  for (const auto& [name, set] : colors) names.push_back(name);
  ModelChecker checker(matrix.field(), t, names);
  return checker.check(checker.prepare(matrix, colors), phi, a);
}

// ------------------------------------------------------------- enumeration

RunDag::RunDag(Automaton& a, const LabeledTree& t) : tree_(t) {
  if (!a.deterministic()) throw InputError("enumeration needs a deterministic automaton");
  if (a.tracks() > 16) throw LimitError("enumeration supports at most 16 free variables");
  const std::uint64_t letters = std::uint64_t{1} << a.tracks();
  const auto& d = t.shape;
  const auto n = static_cast<std::size_t>(d.node_count());
  std::vector<std::map<StateId, std::vector<Producer>>> reach(n);
  for (int i = 0; i < d.node_count(); ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const int sym = t.symbols[ui];
    if (d.is_leaf(i)) {
      for (std::uint64_t b = 0; b < letters; ++b) reach[ui][a.leaf(sym, b)[0]].push_back({b, 0, 0});
      continue;
    }
    const auto& node = d.node(i);
    for (const auto& [p, pp] : reach[static_cast<std::size_t>(node.left)])
      for (const auto& [q, qq] : reach[static_cast<std::size_t>(node.right)])
        for (std::uint64_t b = 0; b < letters; ++b) reach[ui][a.step(p, q, sym, b)[0]].push_back({b, p, q});
  }
  viable_.resize(n);
  for (auto& [q, producers] : reach.back())
    if (a.accepting(q)) viable_.back().emplace(q, std::move(producers));
  for (int i = d.node_count() - 1; i >= 0; --i) {
    if (d.is_leaf(i)) continue;
    const auto& node = d.node(i);
    auto& left = viable_[static_cast<std::size_t>(node.left)];
    auto& right = viable_[static_cast<std::size_t>(node.right)];
    for (const auto& [q, producers] : viable_[static_cast<std::size_t>(i)])
      for (const auto& p : producers) {
        if (!left.count(p.left)) left.emplace(p.left, reach[static_cast<std::size_t>(node.left)].at(p.left));
        if (!right.count(p.right)) right.emplace(p.right, reach[static_cast<std::size_t>(node.right)].at(p.right));
      }
  }
}

std::size_t RunDag::enumerate(const std::function<bool(const Annotation&)>& emit) const {
  const auto& d = tree_.shape;
  Annotation ann(static_cast<std::size_t>(d.node_count()), 0);
  std::size_t count = 0;
  // Every viable choice extends to an output, so the work between two
  // emissions is bounded by the tree size.
  std::function<bool(int, StateId, const std::function<bool()>&)> go = [&](int node, StateId q,
                                                                          const std::function<bool()>& k) {
    for (const auto& p : viable_[static_cast<std::size_t>(node)].at(q)) {
      ann[static_cast<std::size_t>(node)] = p.bits;
      if (d.is_leaf(node)) {
        if (!k()) return false;
        continue;
      }
      const auto& n = d.node(node);
      if (!go(n.left, p.left, [&] { return go(n.right, p.right, k); })) return false;
    }
    return true;
  };
  for (const auto& [q, producers] : viable_.back()) {
    if (!go(d.root(), q, [&] {
          ++count;
          return emit(ann);
        }))
      break;
  }
  return count;
}

// ---------------------------------------------------------------- spectra

namespace {

using Bits = std::vector<std::uint64_t>;

bool or_into(Bits& dst, const Bits& src) {
  bool changed = false;
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const auto v = dst[i] | src[i];
    changed |= v != dst[i];
    dst[i] = v;
  }
  return changed;
}

// {x + y} truncated to the window.
Bits sumset(const Bits& a, const Bits& b, int n_max) {
  Bits out(a.size(), 0);
  const std::size_t words = a.size();
  for (int x = 0; x <= n_max; ++x) {
    if (!(a[static_cast<std::size_t>(x) / 64] >> (x % 64) & 1U)) continue;
    const std::size_t ws = static_cast<std::size_t>(x) / 64;
    const int bs = x % 64;
    for (std::size_t i = 0; i + ws < words; ++i) {
      out[i + ws] |= b[i] << bs;
      if (bs != 0 && i + ws + 1 < words) out[i + ws + 1] |= b[i] >> (64 - bs);
    }
  }
  const int spill = (n_max + 1) % 64;
  if (spill != 0) out.back() &= (std::uint64_t{1} << spill) - 1;
  return out;
}

class ValidityAutomaton : public Automaton {
 public:
  explicit ValidityAutomaton(std::shared_ptr<TreeAlphabet> a) : Automaton(std::move(a), 0) {
    for (StateId i = 0; i < ids_.size(); ++i) ids_[i] = i;
  }
  bool deterministic() const override { return true; }
  // state 0: invalid, w + 1: valid subtree whose root boundary has dimension w
  std::span<const StateId> leaf(int symbol, std::uint64_t) override {
    const auto& s = alphabet()->symbol(symbol);
    const auto* n = s.characteristic();
    if (!s.leaf || !n) return one(0);
    return one(n->is_leaf_zero() ? 1 : n->is_leaf_one() ? 2 : 0);
  }
  std::span<const StateId> step(StateId l, StateId r, int symbol, std::uint64_t) override {
    const auto& s = alphabet()->symbol(symbol);
    const auto* n = s.characteristic();
    if (s.leaf || !n || l == 0 || r == 0) return one(0);
    if (static_cast<StateId>(n->widths[0]) + 1 != l || static_cast<StateId>(n->widths[1]) + 1 != r) return one(0);
    return one(static_cast<StateId>(n->widths[2]) + 1);
  }
  bool accepting(StateId q) override { return q == 1; }
  std::size_t state_count() const override { return ids_.size(); }

 private:
  std::span<const StateId> one(StateId q) const {
    if (q >= ids_.size()) throw LimitError("boundary dimension too large for the validity automaton");
    return {&ids_[q], 1};
  }
  std::array<StateId, 66> ids_{};
};

// All r x c row-reduced matrices of rank r.
void each_rref(const Field& f, std::size_t r, std::size_t c, const std::function<void(const GfMatrix&)>& visit) {
  std::vector<std::size_t> pivots(r);
  std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t i, std::size_t from) {
    if (i == r) {
      std::vector<std::pair<std::size_t, std::size_t>> free;
      for (std::size_t row = 0; row < r; ++row)
        for (std::size_t col = pivots[row] + 1; col < c; ++col)
          if (std::find(pivots.begin(), pivots.end(), col) == pivots.end()) free.emplace_back(row, col);
      GfMatrix m(f, r, c);
      for (std::size_t row = 0; row < r; ++row) m(row, pivots[row]) = 1;
      for (;;) {
        visit(m);
        std::size_t k = 0;
        while (k < free.size()) {
          auto& e = m(free[k].first, free[k].second);
          if (++e < static_cast<Elem>(f.p())) break;
          e = 0;
          ++k;
        }
        if (k == free.size()) return;
      }
    }
    for (std::size_t col = from; col + (r - i) <= c; ++col) {
      pivots[i] = col;
      choose(i + 1, col + 1);
    }
  };
  choose(0, 0);
}

}  // namespace

std::vector<bool> spectrum(Automaton& a, const std::vector<int>& symbols, int n_max) {
  if (n_max < 0 || n_max > 10000) throw InputError("spectrum window must be within 0..10000");
  const std::size_t words = static_cast<std::size_t>(n_max) / 64 + 1;
  std::map<StateId, Bits> counts;
  std::vector<StateId> known;
  std::vector<StateId> work;
  std::vector<int> leaves, inner;
  for (int s : symbols) (a.alphabet()->symbol(s).leaf ? leaves : inner).push_back(s);
  auto add = [&](StateId q, const Bits& b) {
    auto [it, fresh] = counts.try_emplace(q, Bits(words, 0));
    if (fresh) known.push_back(q);
    if (or_into(it->second, b) && std::find(work.begin(), work.end(), q) == work.end()) work.push_back(q);
  };
  if (n_max >= 1) {
    Bits single(words, 0);
    single[0] = 2;
    for (int s : leaves)
      for (StateId q : a.leaf(s, 0)) add(q, single);
  }
  while (!work.empty()) {
    const StateId q = work.back();
    work.pop_back();
    const std::vector<StateId> partners = known;
    for (StateId r : partners)
      for (int s : inner)
        for (int side = 0; side < 2; ++side) {
          const StateId l = side ? r : q, rr = side ? q : r;
          const auto next = a.step(l, rr, s, 0);
          if (next.empty()) continue;
          const Bits sum = sumset(counts.at(l), counts.at(rr), n_max);
          for (StateId target : std::vector<StateId>(next.begin(), next.end())) add(target, sum);
        }
  }
  std::vector<bool> out(static_cast<std::size_t>(n_max) + 1, false);
  for (const auto& [q, bits] : counts) {
    if (!a.accepting(q)) continue;
    for (int n = 1; n <= n_max; ++n)
      if (bits[static_cast<std::size_t>(n) / 64] >> (n % 64) & 1U) out[static_cast<std::size_t>(n)] = true;
  }
  return out;
}

std::optional<std::pair<int, int>> detect_period(const std::vector<bool>& set, int n_max) {
  auto in = [&](int n) { return n < static_cast<int>(set.size()) && set[static_cast<std::size_t>(n)]; };
  for (int a = 0; a <= n_max; ++a)
    for (int b = 1; a + 2 * b <= n_max; ++b) {
      bool ok = true;
      for (int n = a + 1; n + b <= n_max && ok; ++n) ok = in(n) == in(n + b);
      if (ok) return std::make_pair(a, b);
    }
  return std::nullopt;
}

std::vector<int> label_symbols(TreeAlphabet& alphabet, int t, Field f, std::size_t bound) {
  if (t < 0 || t > 3) throw LimitError("label enumeration supports widths up to 3");
  std::vector<int> out{alphabet.characteristic(CharacteristicLabel::leaf_zero(f), true),
                       alphabet.characteristic(CharacteristicLabel::leaf_one(f), true)};
  std::size_t seen = 0;
  for (int w1 = 0; w1 <= t; ++w1)
    for (int w2 = 0; w2 <= t; ++w2)
      for (int w3 = 0; w3 <= t; ++w3) {
        const std::array<int, 3> w{w1, w2, w3};
        const auto cols = static_cast<std::size_t>(w1 + w2 + w3);
        for (std::size_t r = 0; r <= cols; ++r)
          each_rref(f, r, cols, [&](const GfMatrix& m) {
            if (++seen > bound) throw LimitError("more than " + std::to_string(bound) + " candidate labels");
            CharacteristicLabel lab{m, w};
            if (!lab.well_formed()) return;
            for (int part = 0; part < 3; ++part) {
              std::vector<std::size_t> others;
              for (int o = 0; o < 3; ++o)
                if (o != part)
                  for (int j = 0; j < w[static_cast<std::size_t>(o)]; ++j)
                    others.push_back(lab.offset(o) + static_cast<std::size_t>(j));
              if (rank(m.select_columns(others)) != r) return;
            }
            out.push_back(alphabet.characteristic(lab, false));
          });
      }
  return out;
}

AutomatonPtr validity_automaton(std::shared_ptr<TreeAlphabet> alphabet) {
  return std::make_shared<ValidityAutomaton>(std::move(alphabet));
}

std::vector<bool> matroid_spectrum(const Formula& phi, int t, Field f, int n_max, CompileOptions options) {
  if (!free_vars(phi).empty()) throw InputError("spectra need a closed formula");
  auto alphabet = std::make_shared<TreeAlphabet>();
  const auto symbols = label_symbols(*alphabet, t, f);
  auto body = compile(*translate(phi, t, f), alphabet, {}, options);
  auto both = product({validity_automaton(alphabet), body});
  return spectrum(*both, symbols, n_max);
}

}  // namespace mbw
