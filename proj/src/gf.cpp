#include "mbw/gf.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "mbw/errors.hpp"

namespace mbw {

namespace {

bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

// In-place Gauss-Jordan elimination; returns the pivot columns.
std::vector<std::size_t> eliminate(GfMatrix& m) {
  const Field& f = m.field();
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t sel = row;
    while (sel < m.rows() && m(sel, col) == 0) ++sel;
    if (sel == m.rows()) continue;
    if (sel != row)
      for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(sel, c), m(row, c));
    const Elem scale = f.inv(m(row, col));
    for (std::size_t c = col; c < m.cols(); ++c) m(row, c) = f.mul(m(row, c), scale);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == row || m(r, col) == 0) continue;
      const Elem factor = m(r, col);
      for (std::size_t c = col; c < m.cols(); ++c) m(r, c) = f.sub(m(r, c), f.mul(factor, m(row, c)));
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

}  // namespace

Field::Field(int p) : p_(p) {
  if (p > kMaxPrime || !is_prime(p)) throw InputError("field modulus must be a prime <= 13, got " + std::to_string(p));
  for (int a = 1; a < p; ++a)
    for (int b = 1; b < p; ++b)
      if ((a * b) % p == 1) inverse_[a] = static_cast<Elem>(b);
}

GfMatrix::GfMatrix(Field field, std::size_t rows, std::size_t cols)
    : field_(field), rows_(rows), cols_(cols), data_(rows * cols, 0) {}

GfMatrix GfMatrix::from_rows(Field field, const std::vector<std::vector<int>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  GfMatrix m(field, rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw InputError("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = field.reduce(rows[r][c]);
  }
  return m;
}

GfMatrix GfMatrix::from_columns(Field field, std::size_t rows, const std::vector<GfVector>& cols) {
  GfMatrix m(field, rows, cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c].size() != rows) throw InputError("column length mismatch");
    for (std::size_t r = 0; r < rows; ++r) m(r, c) = cols[c][r];
  }
  return m;
}

GfVector GfMatrix::column(std::size_t c) const {
  GfVector v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

GfVector GfMatrix::row(std::size_t r) const {
  return GfVector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

GfMatrix GfMatrix::select_columns(std::span<const std::size_t> cols) const {
  GfMatrix out(field_, rows_, cols.size());
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols.size(); ++c) out(r, c) = (*this)(r, cols[c]);
  return out;
}

bool GfMatrix::column_is_zero(std::size_t c) const {
  for (std::size_t r = 0; r < rows_; ++r)
    if ((*this)(r, c) != 0) return false;
  return true;
}

Echelon rref(const GfMatrix& m) {
  GfMatrix work = m;
  auto pivots = eliminate(work);
  GfMatrix reduced(m.field(), pivots.size(), m.cols());
  for (std::size_t r = 0; r < pivots.size(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) reduced(r, c) = work(r, c);
  return {std::move(reduced), std::move(pivots)};
}

std::size_t rank(const GfMatrix& m) {
  GfMatrix work = m;
  return eliminate(work).size();
}

GfVector multiply(const GfMatrix& m, const GfVector& coeffs) {
  const Field& f = m.field();
  GfVector out(m.rows(), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    int acc = 0;
    for (std::size_t c = 0; c < m.cols(); ++c) acc += m(r, c) * coeffs[c];
    out[r] = f.reduce(acc);
  }
  return out;
}

std::optional<GfVector> solve_combination(const Field& field, std::size_t dim,
                                          const std::vector<GfVector>& generators, const GfVector& v) {
  // Augmented matrix (generators | v); v is in the span iff the last column is
  // not a pivot column.
  GfMatrix aug(field, dim, generators.size() + 1);
  for (std::size_t c = 0; c < generators.size(); ++c)
    for (std::size_t r = 0; r < dim; ++r) aug(r, c) = generators[c][r];
  for (std::size_t r = 0; r < dim; ++r) aug(r, generators.size()) = v[r];
  auto pivots = eliminate(aug);
  if (!pivots.empty() && pivots.back() == generators.size()) return std::nullopt;
  GfVector coeffs(generators.size(), 0);
  for (std::size_t i = 0; i < pivots.size(); ++i) coeffs[pivots[i]] = aug(i, generators.size());
  return coeffs;
}

Subspace::Subspace(Field field, std::size_t ambient_dim) : field_(field), ambient_dim_(ambient_dim) {}

Subspace Subspace::span(Field field, std::size_t ambient_dim, const std::vector<GfVector>& vectors) {
  GfMatrix m(field, vectors.size(), ambient_dim);
  for (std::size_t r = 0; r < vectors.size(); ++r) {
    if (vectors[r].size() != ambient_dim) throw InputError("vector length does not match ambient dimension");
    for (std::size_t c = 0; c < ambient_dim; ++c) m(r, c) = vectors[r][c];
  }
  Subspace s(field, ambient_dim);
  auto pivots = eliminate(m);
  for (std::size_t r = 0; r < pivots.size(); ++r) s.basis_.push_back(m.row(r));
  s.pivots_ = std::move(pivots);
  return s;
}

bool Subspace::contains(const GfVector& v) const { return in_span(v, *this).has_value(); }

std::optional<GfVector> in_span(const GfVector& v, const Subspace& s) {
  if (v.size() != s.ambient_dim()) throw InputError("vector length does not match ambient dimension");
  const Field& f = s.field();
  // In RREF the coefficient of basis vector i is forced to v[pivot_i].
  GfVector coeffs(s.dim());
  GfVector rest = v;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    coeffs[i] = v[s.pivots()[i]];
    if (coeffs[i] == 0) continue;
    for (std::size_t c = 0; c < rest.size(); ++c) rest[c] = f.sub(rest[c], f.mul(coeffs[i], s.basis()[i][c]));
  }
  for (Elem e : rest)
    if (e != 0) return std::nullopt;
  return coeffs;
}

namespace {
void check_compatible(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) throw InputError("subspace ambient dimensions differ");
  if (!(a.field() == b.field())) throw InputError("subspace fields differ");
}
}  // namespace

Subspace intersect(const Subspace& a, const Subspace& b) {
  check_compatible(a, b);
  // Zassenhaus: rows (a_i | a_i) and (b_j | 0); after elimination, rows whose
  // left half vanishes carry a basis of the intersection in their right half.
  const std::size_t n = a.ambient_dim();
  const Field& f = a.field();
  GfMatrix m(f, a.dim() + b.dim(), 2 * n);
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t c = 0; c < n; ++c) m(i, c) = m(i, n + c) = a.basis()[i][c];
  for (std::size_t j = 0; j < b.dim(); ++j)
    for (std::size_t c = 0; c < n; ++c) m(a.dim() + j, c) = b.basis()[j][c];
  auto pivots = eliminate(m);
  std::vector<GfVector> vecs;
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    if (pivots[r] < n) continue;
    GfVector v(n);
    for (std::size_t c = 0; c < n; ++c) v[c] = m(r, n + c);
    vecs.push_back(std::move(v));
  }
  return Subspace::span(f, n, vecs);
}

Subspace sum(const Subspace& a, const Subspace& b) {
  check_compatible(a, b);
  auto vecs = a.basis();
  vecs.insert(vecs.end(), b.basis().begin(), b.basis().end());
  return Subspace::span(a.field(), a.ambient_dim(), vecs);
}

GfMatrix read_matrix(std::istream& in) {
  std::string kw_field, kw_rows, kw_cols;
  int p = 0;
  long long rows = -1, cols = -1;
  if (!(in >> kw_field >> p) || kw_field != "field") throw InputError("matrix: expected 'field <p>'");
  Field field(p);
  if (!(in >> kw_rows >> rows >> kw_cols >> cols) || kw_rows != "rows" || kw_cols != "cols" || rows < 0 || cols < 0)
    throw InputError("matrix: expected 'rows <r> cols <c>'");
  GfMatrix m(field, static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  for (long long r = 0; r < rows; ++r) {
    for (long long c = 0; c < cols; ++c) {
      long long v = 0;
      if (!(in >> v)) throw InputError("matrix: missing entry at row " + std::to_string(r + 1));
      if (v < 0 || v >= p)
        throw InputError("matrix: entry " + std::to_string(v) + " at row " + std::to_string(r + 1) + " column " +
                         std::to_string(c + 1) + " is outside [0," + std::to_string(p) + ")");
      m(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = static_cast<Elem>(v);
    }
  }
  return m;
}

void write_matrix(std::ostream& out, const GfMatrix& m) {
  out << "field " << m.field().p() << "\nrows " << m.rows() << " cols " << m.cols() << "\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? " " : "") << int(m(r, c));
    out << "\n";
  }
}

GfMatrix parse_matrix(const std::string& text) {
  std::istringstream in(text);
  return read_matrix(in);
}

std::string format_matrix(const GfMatrix& m) {
  std::ostringstream out;
  write_matrix(out, m);
  return out.str();
}

}  // namespace mbw
