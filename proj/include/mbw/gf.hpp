#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mbw {

using Elem = std::uint8_t;
using GfVector = std::vector<Elem>;

/// The prime field GF(p), p <= 13.
class Field {
 public:
  static constexpr int kMaxPrime = 13;

  explicit Field(int p);

  int p() const { return p_; }
  Elem add(Elem a, Elem b) const { return static_cast<Elem>((a + b) % p_); }
  Elem sub(Elem a, Elem b) const { return static_cast<Elem>((a + p_ - b) % p_); }
  Elem mul(Elem a, Elem b) const { return static_cast<Elem>((a * b) % p_); }
  Elem neg(Elem a) const { return static_cast<Elem>((p_ - a) % p_); }
  /// Multiplicative inverse; a must be nonzero.
  Elem inv(Elem a) const { return inverse_[a]; }
  Elem reduce(long long v) const { return static_cast<Elem>(((v % p_) + p_) % p_); }

  friend bool operator==(const Field& a, const Field& b) { return a.p_ == b.p_; }

 private:
  int p_;
  std::array<Elem, kMaxPrime> inverse_{};
};

/// Dense row-major matrix over GF(p).
class GfMatrix {
 public:
  GfMatrix(Field field, std::size_t rows, std::size_t cols);

  /// Entries are reduced mod p.
  static GfMatrix from_rows(Field field, const std::vector<std::vector<int>>& rows);
  static GfMatrix from_columns(Field field, std::size_t rows, const std::vector<GfVector>& cols);

  const Field& field() const { return field_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Elem operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  Elem& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  GfVector column(std::size_t c) const;
  GfVector row(std::size_t r) const;
  std::span<const Elem> entries() const { return data_; }
  GfMatrix select_columns(std::span<const std::size_t> cols) const;
  bool column_is_zero(std::size_t c) const;

  friend bool operator==(const GfMatrix& a, const GfMatrix& b) {
    return a.field_ == b.field_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  Field field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Elem> data_;
};

struct Echelon {
  GfMatrix reduced;                  // zero rows dropped
  std::vector<std::size_t> pivots;   // strictly increasing column indices
};

/// Reduced row echelon form. Row operations only, so every linear relation
/// among the columns of `m` holds with the same coefficients in the result.
Echelon rref(const GfMatrix& m);

/// Dimension of the column space.
std::size_t rank(const GfMatrix& m);

/// m * coeffs.
GfVector multiply(const GfMatrix& m, const GfVector& coeffs);

/// Coefficients c with sum_i c_i * generators[i] == v, or nullopt. When the
/// generators are dependent the returned solution has zeros on non-pivot
/// generators.
std::optional<GfVector> solve_combination(const Field& field, std::size_t dim,
                                          const std::vector<GfVector>& generators, const GfVector& v);

/// A subspace of GF(p)^n held by its canonical RREF basis.
class Subspace {
 public:
  Subspace(Field field, std::size_t ambient_dim);
  static Subspace span(Field field, std::size_t ambient_dim, const std::vector<GfVector>& vectors);

  const Field& field() const { return field_; }
  std::size_t ambient_dim() const { return ambient_dim_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<GfVector>& basis() const { return basis_; }
  /// Pivot coordinate of each basis vector.
  const std::vector<std::size_t>& pivots() const { return pivots_; }
  bool contains(const GfVector& v) const;

  friend bool operator==(const Subspace& a, const Subspace& b) {
    return a.field_ == b.field_ && a.ambient_dim_ == b.ambient_dim_ && a.basis_ == b.basis_;
  }

 private:
  Field field_;
  std::size_t ambient_dim_;
  std::vector<GfVector> basis_;
  std::vector<std::size_t> pivots_;
};

/// Throws InputError on ambient-dimension or field mismatch.
Subspace intersect(const Subspace& a, const Subspace& b);
Subspace sum(const Subspace& a, const Subspace& b);

/// Coefficients of v in the canonical basis of s, or nullopt if v is not in s.
std::optional<GfVector> in_span(const GfVector& v, const Subspace& s);

// Text format:
//   field <p>
//   rows <r> cols <c>
//   <r lines of c integers in [0,p)>
GfMatrix read_matrix(std::istream& in);
void write_matrix(std::ostream& out, const GfMatrix& m);
GfMatrix parse_matrix(const std::string& text);
std::string format_matrix(const GfMatrix& m);

}  // namespace mbw
