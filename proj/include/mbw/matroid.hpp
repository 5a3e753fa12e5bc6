#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mbw/element_set.hpp"
#include "mbw/gf.hpp"

namespace mbw {

/// Columns of a matrix over GF(p). Zero columns (loops) are rejected.
class VectorMatroid {
 public:
  explicit VectorMatroid(GfMatrix matrix);

  const GfMatrix& matrix() const { return matrix_; }
  const Field& field() const { return matrix_.field(); }
  int size() const { return static_cast<int>(matrix_.cols()); }
  GfVector vector(int e) const { return matrix_.column(static_cast<std::size_t>(e)); }
  int rank_of(ElementSet s) const;

 private:
  GfMatrix matrix_;
};

/// A set system given by generating dependent sets; membership is decided on
/// the up-closure. Not validated against the matroid axioms on construction.
class ExplicitMatroid {
 public:
  static constexpr int kMaxElements = 20;

  ExplicitMatroid(int n, std::vector<ElementSet> dependents);
  /// From a full membership table indexed by subset bits (need not be
  /// up-closed; it is closed here).
  static ExplicitMatroid from_table(int n, std::vector<bool> table);

  int size() const { return n_; }
  bool is_dependent(ElementSet s) const { return dependent_[s.bits()]; }
  /// The dependent sets as given (or the minimal ones for table-built systems).
  const std::vector<ElementSet>& generators() const { return generators_; }
  std::vector<ElementSet> minimal_dependents() const;
  const std::vector<bool>& table() const { return dependent_; }
  /// Size of a largest independent subset of s (greedy; exact on matroids).
  int rank_of(ElementSet s) const;

  friend bool operator==(const ExplicitMatroid& a, const ExplicitMatroid& b) {
    return a.n_ == b.n_ && a.dependent_ == b.dependent_;
  }

 private:
  ExplicitMatroid() = default;
  void close_upwards();

  int n_ = 0;
  std::vector<ElementSet> generators_;
  std::vector<bool> dependent_;
};

/// Uniform independence oracle over vector, graphic (as vector) and explicit
/// matroids.
class Matroid {
 public:
  Matroid(VectorMatroid m) : impl_(std::move(m)) {}      // NOLINT(google-explicit-constructor)
  Matroid(ExplicitMatroid m) : impl_(std::move(m)) {}    // NOLINT(google-explicit-constructor)

  int size() const;
  ElementSet ground() const { return ElementSet::full(size()); }
  const VectorMatroid* as_vector() const { return std::get_if<VectorMatroid>(&impl_); }
  const ExplicitMatroid* as_explicit() const { return std::get_if<ExplicitMatroid>(&impl_); }

 private:
  friend bool is_independent(const Matroid&, ElementSet);
  friend int rank_of(const Matroid&, ElementSet);
  std::variant<VectorMatroid, ExplicitMatroid> impl_;
};

/// Throws InputError if s has an element outside the ground set.
bool is_independent(const Matroid& m, ElementSet s);
int rank_of(const Matroid& m, ElementSet s);

/// kappa(B) = r(B) + r(S \ B) - r(S).
int connectivity(const Matroid& m, ElementSet b);

/// dim(<B> intersect <S \ B>), the subspace form of the connectivity function.
int connectivity_by_subspaces(const VectorMatroid& m, ElementSet b);

/// Independence of every subset, indexed by subset bits (n <= 20).
std::vector<bool> independence_table(const Matroid& m);

/// Minimal dependent sets in canonical order. Throws LimitError when the
/// ground set exceeds `bound`.
std::vector<ElementSet> circuits(const Matroid& m, int bound = 16);

/// Cycle matroid of a graph: GF(2) vertex-edge incidence matrix, rows ordered
/// by increasing vertex id, columns in edge order. Throws InputError on a
/// self-loop.
VectorMatroid graphic_matroid(const std::vector<std::pair<int, int>>& edges);

/// Which matroid axioms a family of independent sets violates, with witnesses.
struct AxiomReport {
  bool empty_set_missing = false;                                  // axiom 1
  std::optional<std::pair<ElementSet, ElementSet>> hereditary;     // I in family, subset not
  std::optional<std::pair<ElementSet, ElementSet>> exchange;       // (I1, I2), |I1| < |I2|, no augmenting e
  bool ok() const { return !empty_set_missing && !hereditary && !exchange; }
};

/// Checks axioms 1-3 on an explicit family of independent sets over {0..n-1}.
AxiomReport validate_independents(int n, const std::vector<ElementSet>& independents, int bound = 10);
/// Checks the complement of the dependent family.
AxiomReport validate_axioms(const ExplicitMatroid& m, int bound = 10);

/// M|S with elements renumbered in increasing order of S.
Matroid restriction(const Matroid& m, ElementSet s);

/// Dependent-set table form of any matroid (n <= 20).
ExplicitMatroid to_explicit(const Matroid& m);

// Text formats. A matroid file is one of
//   field <p> / rows <r> cols <c> / entries      (vector matroid)
//   edge <u> <v> lines                            (graphic matroid)
//   ground <n> then one dependent set per line    (explicit, 1-based ids)
Matroid read_matroid(std::istream& in);
Matroid parse_matroid(const std::string& text);
std::vector<std::pair<int, int>> read_graph(std::istream& in);
ExplicitMatroid read_explicit(std::istream& in);
std::string format_explicit(const ExplicitMatroid& m);
std::string format_graph(const std::vector<std::pair<int, int>>& edges);

}  // namespace mbw
