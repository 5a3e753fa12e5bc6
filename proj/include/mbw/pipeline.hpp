#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mbw/automata.hpp"
#include "mbw/branch_decomposition.hpp"
#include "mbw/enhanced_tree.hpp"
#include "mbw/logic.hpp"

namespace mbw {

// ------------------------------------------------------------- translation

enum class DepMode {
  Direct,   // dep atoms carry the signature automaton
  Formula,  // dep(X) is expanded into build_dep_formula
};

struct TranslateOptions {
  DepMode dep = DepMode::Direct;
};

/// The tree formula dep(X) over enhanced-tree labels of width <= t, with one
/// set variable per signature (named S for the empty vector, S_1_0 for
/// (1,0), Sn for no signature). Throws LimitError when the signature index
/// set exceeds `bound`.
FormulaPtr build_dep_formula(int t, Field f, const std::string& x = "X", std::size_t bound = 64);

/// Signature index set used by build_dep_formula: nullopt first, then vectors
/// by length and lexicographically.
std::vector<Signature> signature_index(int t, Field f);

/// A matroid formula as a tree formula: element and set quantifiers range
/// over leaves, indep(X) becomes !dep(X). Free variables are restricted to
/// leaves as well.
FormulaPtr translate(const Formula& phi, int t, Field f, TranslateOptions options = {});
/// The same translation with dependency atoms on an arbitrary DepSpec.
FormulaPtr translate(const Formula& phi, std::shared_ptr<const DepSpec> spec);

/// Every element quantifier is guarded by leaf() on its variable.
bool relativized(const Formula& translated);

// ------------------------------------------------------------ model checks

struct PreparedMatroid {
  GfMatrix matrix;
  Decomposition decomposition;
  EnhancedTree enhanced;
  LabeledTree tree;
};

/// Decomposes (exactly up to 10 elements, greedily beyond) and builds the
/// labeled enhanced tree. Throws LimitError when no decomposition of width
/// at most t is found.
PreparedMatroid prepare(const GfMatrix& m, int t, TreeAlphabet& alphabet,
                        const std::map<std::string, ElementSet>& colors = {});

/// The matrix behind a vector or graphic matroid; InputError for explicit ones.
const GfMatrix& representation(const Matroid& m);

/// Runs matroid formulas through decompose, enhance, translate, compile and
/// accept. Compiled automata are cached per formula and free-variable list
/// and shared by every matroid prepared with this checker, so their lazy
/// transition tables keep growing across calls.
class ModelChecker {
 public:
  ModelChecker(Field f, int t, std::vector<std::string> colors = {}, TranslateOptions translate = {},
               CompileOptions compile = {});

  const Field& field() const { return field_; }
  int width_bound() const { return t_; }
  const std::shared_ptr<TreeAlphabet>& alphabet() const { return alphabet_; }

  PreparedMatroid prepare(const GfMatrix& m, const std::map<std::string, ElementSet>& colors = {}) const;

  /// Compiled translation of phi with tracks `free` (set variables and
  /// element variables, in order).
  AutomatonPtr automaton(const Formula& phi, const std::vector<std::string>& free);

  bool check(const PreparedMatroid& p, const Formula& phi, const Assignment& a = {});

  /// Calls emit for every assignment of `free` satisfying phi, as element sets
  /// in `free` order (element variables as singletons). Stops when emit
  /// returns false. Returns the number of tuples emitted.
  std::size_t enumerate(const PreparedMatroid& p, const Formula& phi, const std::vector<std::string>& free,
                        const std::function<bool(const std::vector<ElementSet>&)>& emit);

 private:
  Field field_;
  int t_;
  TranslateOptions translate_;
  CompileOptions compile_;
  std::shared_ptr<TreeAlphabet> alphabet_;
  std::map<std::string, AutomatonPtr> cache_;
};

/// One-shot model check of a represented matroid.
bool model_check(const Matroid& m, const Formula& phi, int t, const Assignment& a = {},
                 const std::map<std::string, ElementSet>& colors = {});

// ------------------------------------------------------------- enumeration

/// Reachable states of a deterministic automaton on a tree, each with the
/// letter choices producing it, pruned top-down to states that lead to
/// acceptance.
class RunDag {
 public:
  struct Producer {
    std::uint64_t bits;
    StateId left, right;  // unused at leaves
  };

  RunDag(Automaton& a, const LabeledTree& t);

  /// Viable states per node with their viable producers.
  const std::map<StateId, std::vector<Producer>>& viable(int node) const {
    return viable_[static_cast<std::size_t>(node)];
  }
  bool empty() const { return viable_.back().empty(); }

  /// Calls emit once per accepted annotation; stops when emit returns false.
  std::size_t enumerate(const std::function<bool(const Annotation&)>& emit) const;

 private:
  const LabeledTree& tree_;
  std::vector<std::map<StateId, std::vector<Producer>>> viable_;
};

// ---------------------------------------------------------------- spectra

/// Leaf counts n <= n_max of accepted trees (no free tracks) built from the
/// given symbols. Works on nondeterministic automata as well.
std::vector<bool> spectrum(Automaton& a, const std::vector<int>& symbols, int n_max);

/// The least (a, b), ordered by a then b, with a + 2b <= n_max such that for
/// every a < n and n + b <= n_max, n is in the set iff n + b is. Index 0 of
/// `set` is ignored.
std::optional<std::pair<int, int>> detect_period(const std::vector<bool>& set, int n_max);

/// Every characteristic label for boundaries of dimension <= t over f: the
/// leaf labels and all row-reduced internal labels whose parts are
/// independent and each lie in the span of the other two. Interned into the
/// alphabet; returns their symbol ids. Throws LimitError past `bound` labels.
std::vector<int> label_symbols(TreeAlphabet& alphabet, int t, Field f, std::size_t bound = 200000);

/// Local validity of enhanced trees: part widths agree with the children and
/// the root has width 0.
AutomatonPtr validity_automaton(std::shared_ptr<TreeAlphabet> alphabet);

/// Spectrum of translate(phi) over valid enhanced trees of width <= t.
std::vector<bool> matroid_spectrum(const Formula& phi, int t, Field f, int n_max, CompileOptions options = {});

}  // namespace mbw
