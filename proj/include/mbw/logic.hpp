#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "mbw/element_set.hpp"
#include "mbw/enhanced_tree.hpp"

namespace mbw {

// One AST serves both dialects: MSO over matroids (indep, colors) and MSO
// over labeled binary trees (leaf, root, lchild, rchild, label, dep).
// Variable sorts follow the first letter: lowercase names range over
// elements (tree nodes), uppercase names over sets.

enum class Sort { Element, Set };
Sort sort_of(const std::string& var);

enum class Op {
  True,
  False,
  In,      // x in X
  Eq,      // x = y or X = Y
  Sub,     // sub(A, B)
  Mod,     // mod(X, a, q): |X| = a mod q
  Indep,   // indep(X)
  Color,   // A(x)
  Leaf,    // leaf(v): every node of v is a leaf
  Root,    // root(v): every node of v is the root
  LChild,  // lchild(s, t): t is the left child of s
  RChild,
  Label,   // label(v) in P: every node of v carries a symbol satisfying P
  Dep,     // dep(X), decided by a dependency automaton
  Sing,    // sing(X): X is a singleton
  Not,
  And,
  Or,
  Implies,
  Exists,
  Forall,
};

class DepSpec;        // defined with the automata
struct TreeSymbol;    // defined with the labeled trees

/// A predicate on tree symbols.
struct LabelPredicate {
  enum class Kind { Symbols, Theta, LeafZero, LeafOne };
  Kind kind = Kind::Symbols;
  std::set<std::string> symbols;  // Symbols: names
  Signature l1, l2, l3;           // Theta: characteristic-matrix identity

  bool holds(const TreeSymbol& s) const;
  std::string text() const;
  friend bool operator==(const LabelPredicate&, const LabelPredicate&) = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

struct Formula {
  Op op = Op::True;
  std::vector<std::string> vars;  // atom arguments, or the bound variable
  int a = 0, q = 1;               // Mod
  std::string name;               // Color
  std::shared_ptr<const LabelPredicate> pred;
  std::shared_ptr<const DepSpec> dep;
  std::vector<FormulaPtr> kids;
};

bool operator==(const Formula& x, const Formula& y);

// Builders.
FormulaPtr truth(bool value);
FormulaPtr atom(Op op, std::vector<std::string> vars);
FormulaPtr mod_atom(const std::string& set, int a, int q);
FormulaPtr color_atom(const std::string& color, const std::string& var);
FormulaPtr label_atom(const std::string& var, LabelPredicate pred);
FormulaPtr dep_atom(const std::string& set, std::shared_ptr<const DepSpec> spec);
FormulaPtr neg(FormulaPtr f);
FormulaPtr conj(std::vector<FormulaPtr> kids);
FormulaPtr disj(std::vector<FormulaPtr> kids);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr exists(const std::string& var, FormulaPtr body);
FormulaPtr forall(const std::string& var, FormulaPtr body);

enum class Dialect { Matroid, Tree };

/// Parses a formula. Every variable must be bound or listed in `free`.
/// Throws InputError with a position on syntax, scope or sort errors.
FormulaPtr parse_formula(const std::string& text, Dialect dialect, const std::vector<std::string>& free = {});
inline FormulaPtr parse_msom(const std::string& text, const std::vector<std::string>& free = {}) {
  return parse_formula(text, Dialect::Matroid, free);
}

/// Infix text accepted by parse_formula (fully parenthesized binary parts).
std::string unparse(const Formula& f);
/// Prefix term, e.g. (and (indep X) (not (in x X))).
std::string to_prefix(const Formula& f);

/// Free variables in order of first occurrence.
std::vector<std::string> free_vars(const Formula& f);
/// Color predicate names used.
std::set<std::string> colors_used(const Formula& f);

/// circuit (free X), connected (closed), a_circuit (free X, color A).
FormulaPtr builtin(const std::string& name);
/// Free variables of a builtin, for callers that parse names or text alike.
std::vector<std::string> builtin_free_vars(const std::string& name);

/// The circuit formula with its set variable named `x`, bound helper
/// variables chosen to avoid `avoid`.
FormulaPtr circuit_formula(const std::string& x, const std::set<std::string>& avoid = {});

/// Element and set values for free variables.
struct Assignment {
  std::map<std::string, int> elements;
  std::map<std::string, ElementSet> sets;
};

/// Direct evaluation over a matroid on n <= 20 elements by quantifier
/// enumeration, with independence read from a precomputed table.
class MsomEvaluator {
 public:
  MsomEvaluator(const Matroid& m, std::map<std::string, ElementSet> colors = {});
  bool eval(const Formula& f, const Assignment& a) const;
  int size() const { return n_; }

 private:
  int n_;
  std::vector<bool> indep_;
  std::map<std::string, ElementSet> colors_;
};

}  // namespace mbw
