#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mbw/labeled_tree.hpp"
#include "mbw/logic.hpp"

namespace mbw {

using StateId = std::uint32_t;

/// Bottom-up tree automaton over letters (symbol, bits), one bit per
/// free-variable track. States are created lazily. Deterministic automata are
/// complete; nondeterministic ones may leave out dead targets, down to none.
/// Transition results are sorted and duplicate-free. Internal caches are guarded, so one automaton
/// may be shared between threads.
class Automaton {
 public:
  Automaton(std::shared_ptr<TreeAlphabet> alphabet, int tracks) : alphabet_(std::move(alphabet)), tracks_(tracks) {}
  virtual ~Automaton() = default;
  Automaton(const Automaton&) = delete;
  Automaton& operator=(const Automaton&) = delete;

  const std::shared_ptr<TreeAlphabet>& alphabet() const { return alphabet_; }
  int tracks() const { return tracks_; }

  /// Deterministic automata return exactly one state per transition.
  virtual bool deterministic() const = 0;
  virtual std::span<const StateId> leaf(int symbol, std::uint64_t bits) = 0;
  virtual std::span<const StateId> step(StateId left, StateId right, int symbol, std::uint64_t bits) = 0;
  virtual bool accepting(StateId q) = 0;
  /// States created so far.
  virtual std::size_t state_count() const = 0;
  /// Conservative sink tests: a dead state never reaches acceptance, a full
  /// state accepts whatever follows. Nondeterministic transitions omit dead
  /// targets; the language is unchanged.
  virtual bool dead(StateId) { return false; }
  virtual bool full(StateId) { return false; }

 private:
  std::shared_ptr<TreeAlphabet> alphabet_;
  int tracks_;
};

using AutomatonPtr = std::shared_ptr<Automaton>;

/// Hook for dependency atoms: builds a deterministic automaton reading one
/// track as the set X and accepting iff X is dependent in the structure the
/// tree encodes.
class DepSpec {
 public:
  virtual ~DepSpec() = default;
  virtual std::string name() const = 0;
  virtual AutomatonPtr automaton(std::shared_ptr<TreeAlphabet> alphabet, int tracks, int track) const = 0;
};

/// The signature dynamic program over enhanced-tree labels: a state is the set
/// of achievable (signature, support) pairs at a node.
class EnhancedDep : public DepSpec {
 public:
  EnhancedDep(int t, Field f);
  std::string name() const override;
  AutomatonPtr automaton(std::shared_ptr<TreeAlphabet> alphabet, int tracks, int track) const override;
  int width() const { return t_; }
  const Field& field() const { return field_; }

 private:
  int t_;
  Field field_;
};

/// Deterministic dependency automaton over one track (the set X).
/// Throws LimitError if t > 3 or p^t > 2197.
AutomatonPtr dependency_automaton(std::shared_ptr<TreeAlphabet> alphabet, int t, Field f);

struct CompileOptions {
  std::size_t state_limit = 1000000;
};

/// Compiles a tree formula. Tracks follow `free` (default: free_vars order);
/// free element variables are constrained to singletons. Throws LimitError
/// naming the subformula when a determinization exceeds the state limit.
AutomatonPtr compile(const Formula& f, std::shared_ptr<TreeAlphabet> alphabet,
                     const std::vector<std::string>& free = {}, CompileOptions options = {});
AutomatonPtr compile_with_tracks(const Formula& f, std::shared_ptr<TreeAlphabet> alphabet,
                                 const std::vector<std::string>& tracks, CompileOptions options = {});

AutomatonPtr determinize(AutomatonPtr a, std::size_t state_limit = 1000000, std::string what = "");
/// Requires a deterministic automaton.
AutomatonPtr complement(AutomatonPtr a);
/// Synchronous product accepting when all (or any) parts accept. Parts share
/// alphabet and tracks.
AutomatonPtr product(std::vector<AutomatonPtr> parts, bool all = true);

/// States reachable at each node (the subset simulation of the run).
std::vector<std::vector<StateId>> run_states(Automaton& a, const LabeledTree& t, const Annotation& bits);
bool accepts(Automaton& a, const LabeledTree& t, const Annotation& bits);
inline bool accepts(Automaton& a, const LabeledTree& t) {
  return accepts(a, t, Annotation(static_cast<std::size_t>(t.node_count()), 0));
}

/// Values of free variables on a tree: element variables are node indices,
/// set variables node bitmasks.
struct TreeAssignment {
  std::map<std::string, int> nodes;
  std::map<std::string, std::uint64_t> sets;
};

/// Direct semantics by quantifier enumeration; set quantifiers need at most
/// `max_nodes` nodes (LimitError otherwise).
bool brute_force_eval(const LabeledTree& t, const TreeAlphabet& alphabet, const Formula& f, const TreeAssignment& a,
                      int max_nodes = 18);

/// Converts an assignment of free variables (in track order) to annotation bits.
Annotation annotation_from(const LabeledTree& t, const std::vector<std::string>& tracks, const TreeAssignment& a);

/// Text listing of the part of a deterministic automaton reachable with the
/// given symbols and all bit patterns, states numbered in discovery order.
std::string export_automaton(Automaton& a, const std::vector<int>& symbols, std::size_t max_states = 10000);

}  // namespace mbw
