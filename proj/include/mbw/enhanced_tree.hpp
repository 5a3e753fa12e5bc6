#pragma once

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mbw/branch_decomposition.hpp"
#include "mbw/gf.hpp"

namespace mbw {

/// N = (N1 | N2 | N3): r rows, part widths w1, w2, w3. Leaves use only the
/// third part: (0) is the empty 0 x 0 label, (1) is the 1 x 1 matrix (1).
struct CharacteristicLabel {
  GfMatrix matrix;
  std::array<int, 3> widths{};

  static CharacteristicLabel leaf_zero(const Field& f);
  static CharacteristicLabel leaf_one(const Field& f);

  bool is_leaf_zero() const { return widths == std::array<int, 3>{0, 0, 0} && matrix.rows() == 0; }
  bool is_leaf_one() const;
  /// Column range of part i (0-based) inside `matrix`.
  std::size_t offset(int part) const;
  GfVector column(int part, int j) const;

  /// Columns within each part independent, rows independent, entries in range.
  bool well_formed() const;

  friend bool operator==(const CharacteristicLabel&, const CharacteristicLabel&) = default;
  friend bool operator<(const CharacteristicLabel& a, const CharacteristicLabel& b);
};

/// `[N: r x (w1|w2|w3); e11 e12 ...]`, entries row-major.
std::string format_label(const CharacteristicLabel& n);

/// nullopt is the signature written as the empty-set symbol; a present vector
/// (possibly of length 0) is a coefficient tuple.
using Signature = std::optional<GfVector>;

std::string format_signature(const Signature& s);

/// Sum lambda1.N1 + lambda2.N2 == lambda3.N3, with nullopt contributing 0.
/// False when a present signature has the wrong length.
bool theta(const CharacteristicLabel& n, const Signature& l1, const Signature& l2, const Signature& l3);

class EnhancedTree {
 public:
  EnhancedTree(Field field, DecompositionTree shape, std::vector<CharacteristicLabel> labels);

  const Field& field() const { return field_; }
  const DecompositionTree& shape() const { return shape_; }
  const std::vector<CharacteristicLabel>& labels() const { return labels_; }
  const CharacteristicLabel& label(int node) const { return labels_[static_cast<std::size_t>(node)]; }
  /// dim B_s at each node (w3 of its label).
  int boundary_dim(int node) const { return label(node).widths[2]; }
  int max_boundary_dim() const;

  friend bool operator==(const EnhancedTree&, const EnhancedTree&) = default;

 private:
  Field field_;
  DecompositionTree shape_;
  std::vector<CharacteristicLabel> labels_;
};

/// The basis of each boundary subspace B_s = <l~(s)> cap <S \ l~(s)>, in
/// canonical RREF order.
std::vector<Subspace> boundary_subspaces(const GfMatrix& m, const DecompositionTree& d);

/// Builds the enhanced tree; throws LimitError when some dim B_s exceeds t.
EnhancedTree build_enhanced(const GfMatrix& m, const DecompositionTree& d, int t);

/// One achievable (signature, nonempty-support) pair.
struct SignatureState {
  Signature sig;
  bool support = false;
  friend auto operator<=>(const SignatureState&, const SignatureState&) = default;
};
using SignatureSet = std::set<SignatureState>;

/// Leaf states: {(empty, F)} plus {((a), T) : a != 0} for a (1)-labelled leaf in x.
SignatureSet leaf_signatures(const CharacteristicLabel& n, bool in_x);
/// Internal step of the dynamic program.
SignatureSet combine_signatures(const Field& f, const CharacteristicLabel& n, const SignatureSet& left,
                                const SignatureSet& right);

/// Achievable signatures at every node for the leaf set of x.
std::vector<SignatureSet> signatures(const EnhancedTree& tree, ElementSet x);

/// x is dependent iff the root admits the empty tuple with nonempty support.
bool is_dependent(const EnhancedTree& tree, ElementSet x);

/// `field <p>` line, then the decomposition term with each node annotated:
/// `(node [N...] L R)`, `(leaf <id> [N...])`.
std::string format_enhanced(const EnhancedTree& tree);
EnhancedTree parse_enhanced(const std::string& text);

/// Parses one `[N: ...]` label at the cursor (shared with the grammar format).
class TextCursor;
CharacteristicLabel parse_label(TextCursor& in, const Field& f);

}  // namespace mbw
