#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "mbw/automata.hpp"
#include "mbw/enhanced_tree.hpp"
#include "mbw/labeled_tree.hpp"
#include "mbw/logic.hpp"
#include "mbw/matroid.hpp"

namespace mbw {

// ------------------------------------------------------- boundaried matrices

/// A matrix whose columns listed in `boundary` (0-based, in order) form the
/// boundary; the remaining columns, in increasing order, are internal.
struct BoundariedMatrix {
  GfMatrix matrix;
  std::vector<int> boundary;

  int t() const { return static_cast<int>(boundary.size()); }
  std::vector<int> internal() const;
  GfMatrix internal_matrix() const;
};

/// Boundary indices distinct, in range, and their columns independent.
void check_boundaried(const BoundariedMatrix& a);

/// Dependent sets of the columns of m (zero columns are loops), n <= 20.
ExplicitMatroid column_matroid(const GfMatrix& m);

/// The columns of a1 and a2 in the quotient of E1 x E2 by the identified
/// boundary pairs, expressed in a base chosen greedily from the images of the
/// canonical bases of E1 then E2. Columns: internal columns of a1, then of a2.
GfMatrix oplus_bar(const BoundariedMatrix& a1, const BoundariedMatrix& a2);

/// The boundaried leaf matrices: column 0 is the boundary.
BoundariedMatrix upsilon0(const Field& f);
BoundariedMatrix upsilon1(const Field& f);

/// ((a1 glued to part 1 of n), part 2) glued to a2, with boundary part 3.
/// `right_first` glues a2 to part 2 first. Internal columns: a1's, then a2's.
BoundariedMatrix odot(const CharacteristicLabel& n, const BoundariedMatrix& a1, const BoundariedMatrix& a2,
                      bool right_first = false);

// ------------------------------------------------------- abstract matroids

struct BoundariedExplicit {
  ExplicitMatroid matroid;
  std::vector<int> boundary;

  int t() const { return static_cast<int>(boundary.size()); }
  std::vector<int> internal() const;
  friend bool operator==(const BoundariedExplicit&, const BoundariedExplicit&) = default;
};

/// Boundary indices distinct, in range and independent.
void check_boundaried(const BoundariedExplicit& m);

/// A matroid on parts 1, 2, 3 laid out consecutively.
struct PartitionedExplicit {
  ExplicitMatroid matroid;
  std::array<int, 3> widths{};

  int offset(int part) const { return part == 0 ? 0 : part == 1 ? widths[0] : widths[0] + widths[1]; }
  /// The matroid with boundary `part` (0-based).
  BoundariedExplicit boundaried(int part) const;
  friend bool operator==(const PartitionedExplicit&, const PartitionedExplicit&) = default;
};

/// Widths sum to the ground size and every part is independent.
void check_partitioned(const PartitionedExplicit& n);

/// Circuits per the series (C_S) and parallel (C_P) connection families on
/// internals of m1, internals of m2, then p. Boundaries must have size 1.
ExplicitMatroid series_connection(const BoundariedExplicit& m1, const BoundariedExplicit& m2);
ExplicitMatroid parallel_connection(const BoundariedExplicit& m1, const BoundariedExplicit& m2);
/// The connections with p removed.
ExplicitMatroid oplus_s(const BoundariedExplicit& m1, const BoundariedExplicit& m2);
ExplicitMatroid oplus_p(const BoundariedExplicit& m1, const BoundariedExplicit& m2);

/// Amalgam along the boundaries: ground = internals of m1, internals of m2,
/// then e_1..e_t; dependents = the (A1)-closure of the images of both
/// dependent families. The staged closure stops after `steps` rounds (the
/// boundary size t when negative). Throws LimitError past 16 elements.
ExplicitMatroid pushout(const BoundariedExplicit& m1, const BoundariedExplicit& m2, int steps = -1);

/// The pushout restricted to the internals of m1 and m2.
ExplicitMatroid tilde_oplus(const BoundariedExplicit& m1, const BoundariedExplicit& m2);

/// (m1 amalgamated with part 1 of n, part 2) amalgamated with m2, boundary
/// part 3. Internals: m1's, then m2's.
BoundariedExplicit odot(const PartitionedExplicit& n, const BoundariedExplicit& m1, const BoundariedExplicit& m2);

// ------------------------------------------------------------- signatures

/// A family of boundary subsets; bit A of `family` stands for the subset with
/// bit i set when gamma(i + 1) is in it. The empty family is the signature
/// written as the empty set.
struct BoundarySignature {
  int t = 0;
  std::uint64_t family = 0;

  bool none() const { return family == 0; }
  bool contains(std::uint32_t subset) const { return (family >> subset) & 1U; }
  friend bool operator==(const BoundarySignature&, const BoundarySignature&) = default;
  friend auto operator<=>(const BoundarySignature&, const BoundarySignature&) = default;
};

/// `{}` for the empty family, otherwise e.g. `{{},{1}}` (1-based positions).
std::string format_boundary_signature(const BoundarySignature& s);

/// Subsets A of the boundary with x + gamma(A) dependent. x must avoid the
/// boundary; t <= 6.
BoundarySignature boundary_signature(const BoundariedExplicit& m, ElementSet x);

/// Signature at a node labelled n from the children's signatures, by closing
/// token sets {x1} + a (a in mu, on part 1), {x2} + b (b in ga, on part 2) and
/// the dependents of n under (A1) on elements of parts 1 and 2. Memoized.
BoundarySignature compose_signatures(const BoundarySignature& mu, const BoundarySignature& ga,
                                     const PartitionedExplicit& n);

// ------------------------------------------------------------ parse trees

enum class Upsilon { Zero, One };
using ParseLabel = std::variant<Upsilon, CharacteristicLabel, BoundariedExplicit, PartitionedExplicit>;

/// A binary parse tree stored children-before-parent, root last. Matrix
/// trees have Upsilon leaves and CharacteristicLabel inner nodes, and their
/// leaves carry element ids in `shape`. Abstract trees have
/// BoundariedExplicit leaves and PartitionedExplicit inner nodes. No nodes
/// means the empty tree.
struct ParseTree {
  Field field{2};
  DecompositionTree shape;
  std::vector<ParseLabel> labels;

  bool empty() const { return labels.empty(); }
  bool abstract() const;
  const ParseLabel& label(int node) const { return labels[static_cast<std::size_t>(node)]; }
};

/// Size conditions and label kinds; the error names the offending node in
/// preorder.
void check_parse_tree(const ParseTree& t);

/// Boundaried matrix parsed by a matrix tree; internal columns follow the
/// leaves from left to right.
BoundariedMatrix parse_boundaried(const ParseTree& t);
/// The internal columns of parse_boundaried reordered by leaf element id.
GfMatrix parsed_matrix(const ParseTree& t);

/// Boundaried matroid parsed by an abstract tree; internals follow the leaves
/// from left to right.
BoundariedExplicit parse_explicit(const ParseTree& t);

/// Relabels Upsilon0 as (0) and Upsilon1 as (1) and drops the zero column an
/// Upsilon0 child occupies in its parent's label; parse_from_enhanced adds it
/// back.
EnhancedTree enhanced_from_parse(const ParseTree& t);
ParseTree parse_from_enhanced(const EnhancedTree& e);

/// Dependency of x (internal elements in leaf order) by the signature
/// dynamic program on an abstract tree.
bool is_dependent_parse(const ParseTree& t, ElementSet x);

/// An abstract tree whose leaves are replaced by balanced binary trees over
/// their internal elements.
struct ExpandedParseTree {
  DecompositionTree shape;  // element leaves carry the parsed element id
  std::vector<int> op;      // per node: index into ops, or -1
  std::vector<int> leaf;    // per node: index into leaves for expansion nodes, or -1
  std::vector<bool> top;    // root of an expansion
  std::vector<int> number;  // element leaves: position among the leaf's internals (0-based)
  std::vector<PartitionedExplicit> ops;
  std::vector<BoundariedExplicit> leaves;
};

/// Leaves need at least one internal element (InputError otherwise).
ExpandedParseTree expand_parse_tree(const ParseTree& t);
bool is_dependent_expanded(const ExpandedParseTree& t, ElementSet x);

// --------------------------------------------------------------- formulas

struct GrammarPayload : SymbolPayload {
  enum class Kind { Op, Fork, Element } kind = Kind::Op;
  std::shared_ptr<const PartitionedExplicit> op;
  std::shared_ptr<const BoundariedExplicit> leaf;
  int number = 0;
  bool top = false;
};

LabeledTree labeled_from_expanded(const ExpandedParseTree& t, TreeAlphabet& alphabet);

/// dep(X) on expanded abstract trees with leaves of size <= k and boundaries
/// of size <= t: a deterministic automaton over boundary signatures.
class GrammarDep : public DepSpec {
 public:
  GrammarDep(int k, int t);
  std::string name() const override;
  AutomatonPtr automaton(std::shared_ptr<TreeAlphabet> alphabet, int tracks, int track) const override;

 private:
  int k_, t_;
};

/// The translation of a matroid formula for expanded abstract trees: the
/// usual relativization to leaves, with indep(X) as !dep(X) on GrammarDep.
FormulaPtr translate_grammar(const Formula& phi, int k, int t);

// ------------------------------------------------------------ text formats

//   field <p>                                    (matrix trees only)
//   (op [N: r x (w1|w2|w3); entries] L R) | (Y0) | (Y1)       leaf ids: (Y1 3)
//   (op [P: (w1|w2|w3); {1,2} ...] L R) | (abstract [E: n; {1,2} ...] boundary 1 2)
std::string format_parse_tree(const ParseTree& t);
ParseTree parse_parse_tree(const std::string& text);

/// Matrix text followed by a `boundary <ids>` line (1-based).
BoundariedMatrix parse_boundaried_matrix(const std::string& text);
std::string format_boundaried_matrix(const BoundariedMatrix& a);
/// `[P: (w1|w2|w3); {1,2} ...]`, the minimal dependent sets with 1-based ids.
std::string format_partitioned(const PartitionedExplicit& n);
PartitionedExplicit parse_partitioned(const std::string& text);
/// Explicit matroid text followed by a `boundary <ids>` line.
BoundariedExplicit parse_boundaried_explicit(const std::string& text);
std::string format_boundaried_explicit(const BoundariedExplicit& m);

}  // namespace mbw
