#pragma once

// Sparse exact linear algebra over a runtime Field.

#include <mpers/exactnum.hpp>

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <utility>
#include <vector>

namespace mpers {

/// Sparse vector: (index, value) pairs sorted by index, no explicit zeros.
using SparseVector = std::vector<std::pair<std::size_t, FieldElement>>;

inline SparseVector unit_vector(Field f, std::size_t index) {
  return {{index, FieldElement::one(f)}};
}

/// a + c * b
inline SparseVector axpy(const SparseVector& a, const FieldElement& c, const SparseVector& b) {
  SparseVector out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].first < a[i].first) {
      FieldElement v = c * b[j].second;
      if (!v.is_zero()) out.emplace_back(b[j].first, std::move(v));
      ++j;
    } else {
      FieldElement v = a[i].second + c * b[j].second;
      if (!v.is_zero()) out.emplace_back(a[i].first, std::move(v));
      ++i;
      ++j;
    }
  }
  return out;
}

inline SparseVector scaled(const SparseVector& a, const FieldElement& c) {
  SparseVector out;
  if (c.is_zero()) return out;
  out.reserve(a.size());
  for (const auto& [i, v] : a) out.emplace_back(i, v * c);
  return out;
}

inline std::optional<FieldElement> entry(const SparseVector& v, std::size_t index) {
  auto it = std::lower_bound(v.begin(), v.end(), index,
                             [](const auto& e, std::size_t i) { return e.first < i; });
  if (it != v.end() && it->first == index) return it->second;
  return std::nullopt;
}

inline SparseVector from_dense(const std::vector<FieldElement>& dense) {
  SparseVector out;
  for (std::size_t i = 0; i < dense.size(); ++i)
    if (!dense[i].is_zero()) out.emplace_back(i, dense[i]);
  return out;
}

/// Fully reduced echelon basis of a subspace. Each stored row has leading
/// coefficient 1 at its pivot and zeros at every other row's pivot.
class EchelonBasis {
 public:
  explicit EchelonBasis(Field f) : field_(f) {}

  Field field() const { return field_; }
  std::size_t rank() const { return rows_.size(); }
  const std::vector<SparseVector>& rows() const { return rows_; }
  std::size_t pivot(std::size_t row) const { return rows_[row].front().first; }
  bool is_pivot(std::size_t index) const { return pivot_row_.count(index) != 0; }

  /// Removes every pivot coordinate from v.
  SparseVector reduce(SparseVector v) const {
    if (rows_.empty()) return v;
    std::size_t pos = 0;
    while (pos < v.size()) {
      auto it = pivot_row_.find(v[pos].first);
      if (it == pivot_row_.end()) {
        ++pos;
        continue;
      }
      std::size_t idx = v[pos].first;
      v = axpy(v, -v[pos].second, rows_[it->second]);
      // entries before idx are unchanged; resume there
      pos = static_cast<std::size_t>(
          std::lower_bound(v.begin(), v.end(), idx,
                           [](const auto& e, std::size_t i) { return e.first < i; }) -
          v.begin());
    }
    return v;
  }

  bool contains(const SparseVector& v) const { return reduce(v).empty(); }

  /// Adds v to the spanning set. Returns the index of the new row, or nullopt
  /// if v was already in the span.
  std::optional<std::size_t> insert(const SparseVector& v) {
    SparseVector r = reduce(v);
    if (r.empty()) return std::nullopt;
    r = scaled(r, r.front().second.inverse());
    std::size_t p = r.front().first;
    for (auto& row : rows_) {
      if (auto c = entry(row, p)) row = axpy(row, -*c, r);
    }
    rows_.push_back(std::move(r));
    pivot_row_[p] = rows_.size() - 1;
    return rows_.size() - 1;
  }

  /// Value of a vector of the span at the pivot of `row`, i.e. its coordinate
  /// in this basis.
  static FieldElement coordinate(const SparseVector& in_span, std::size_t pivot, Field f) {
    auto c = entry(in_span, pivot);
    return c ? *c : FieldElement::zero(f);
  }

 private:
  Field field_;
  std::vector<SparseVector> rows_;
  std::map<std::size_t, std::size_t> pivot_row_;
};

inline std::size_t rank_of(Field f, const std::vector<SparseVector>& vectors) {
  EchelonBasis e(f);
  for (const auto& v : vectors) e.insert(v);
  return e.rank();
}

/// The quotient space span(big ∪ small) / span(small), with a chosen basis of
/// representatives and exact coordinates.
class Subquotient {
 public:
  Subquotient(Field f, const std::vector<SparseVector>& big, const std::vector<SparseVector>& small)
      : small_(f), quotient_(f) {
    for (const auto& v : small) small_.insert(v);
    for (const auto& v : big) quotient_.insert(small_.reduce(v));
  }

  Field field() const { return small_.field(); }
  std::size_t dim() const { return quotient_.rank(); }
  /// Basis representative k (a vector of the big space).
  const SparseVector& representative(std::size_t k) const { return quotient_.rows()[k]; }

  /// Coordinates of v (which must lie in span(big ∪ small)) modulo small.
  std::vector<FieldElement> coordinates(const SparseVector& v) const {
    SparseVector r = small_.reduce(v);
    std::vector<FieldElement> out;
    out.reserve(dim());
    for (std::size_t k = 0; k < dim(); ++k)
      out.push_back(EchelonBasis::coordinate(r, quotient_.pivot(k), field()));
    return out;
  }
  /// Sparse coordinates; throws if v is not in the space.
  SparseVector sparse_coordinates(const SparseVector& v) const {
    SparseVector r = small_.reduce(v);
    SparseVector out;
    for (std::size_t k = 0; k < dim(); ++k) {
      auto c = entry(r, quotient_.pivot(k));
      if (c) {
        r = axpy(r, -*c, quotient_.rows()[k]);
        out.emplace_back(k, *c);
      }
    }
    if (!r.empty()) throw DomainError("vector outside the subquotient's ambient span");
    return out;
  }

 private:
  EchelonBasis small_;
  EchelonBasis quotient_;
};

/// Column-sparse matrix.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<SparseVector> columns;

  static SparseMatrix zero(std::size_t r, std::size_t c) {
    return SparseMatrix{r, c, std::vector<SparseVector>(c)};
  }
  static SparseMatrix identity(Field f, std::size_t n) {
    SparseMatrix m = zero(n, n);
    for (std::size_t i = 0; i < n; ++i) m.columns[i] = unit_vector(f, i);
    return m;
  }

  FieldElement at(std::size_t r, std::size_t c, Field f) const {
    auto e = entry(columns[c], r);
    return e ? *e : FieldElement::zero(f);
  }

  /// this * v
  SparseVector apply(const SparseVector& v) const {
    SparseVector out;
    for (const auto& [j, c] : v) out = axpy(out, c, columns[j]);
    return out;
  }
};

/// a * b
inline SparseMatrix multiply(const SparseMatrix& a, const SparseMatrix& b) {
  if (a.cols != b.rows) throw DomainError("matrix shape mismatch in product");
  SparseMatrix out = SparseMatrix::zero(a.rows, b.cols);
  for (std::size_t j = 0; j < b.cols; ++j) out.columns[j] = a.apply(b.columns[j]);
  return out;
}

inline bool operator==(const SparseMatrix& a, const SparseMatrix& b) {
  return a.rows == b.rows && a.cols == b.cols && a.columns == b.columns;
}

inline std::size_t rank_of(Field f, const SparseMatrix& m) { return rank_of(f, m.columns); }

/// Basis of the null space of the map whose columns are given: each result
/// vector lists coefficients over the column indices.
inline std::vector<SparseVector> kernel_basis(Field f, const std::vector<SparseVector>& columns) {
  // Column reduction by leading pivot with a tracked combination.
  std::map<std::size_t, std::pair<SparseVector, SparseVector>> by_pivot;
  std::vector<SparseVector> kernel;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    SparseVector v = columns[j];
    SparseVector track = unit_vector(f, j);
    while (!v.empty()) {
      auto it = by_pivot.find(v.front().first);
      if (it == by_pivot.end()) break;
      FieldElement c = -(v.front().second / it->second.first.front().second);
      v = axpy(v, c, it->second.first);
      track = axpy(track, c, it->second.second);
    }
    if (v.empty()) {
      kernel.push_back(std::move(track));
    } else {
      const std::size_t pivot = v.front().first;
      by_pivot.emplace(pivot, std::make_pair(std::move(v), std::move(track)));
    }
  }
  return kernel;
}

/// Solves sum_k x_k * vectors[k] = target; returns one solution or nullopt.
inline std::optional<std::vector<FieldElement>> solve_in_span(
    Field f, const std::vector<SparseVector>& vectors, const SparseVector& target) {
  std::map<std::size_t, std::pair<SparseVector, SparseVector>> by_pivot;
  for (std::size_t j = 0; j < vectors.size(); ++j) {
    SparseVector v = vectors[j];
    SparseVector track = unit_vector(f, j);
    while (!v.empty()) {
      auto it = by_pivot.find(v.front().first);
      if (it == by_pivot.end()) break;
      FieldElement c = -(v.front().second / it->second.first.front().second);
      v = axpy(v, c, it->second.first);
      track = axpy(track, c, it->second.second);
    }
    if (!v.empty()) {
      const std::size_t pivot = v.front().first;
      by_pivot.emplace(pivot, std::make_pair(std::move(v), std::move(track)));
    }
  }
  SparseVector r = target;
  SparseVector combo;  // r = target - vectors * combo
  while (!r.empty()) {
    auto it = by_pivot.find(r.front().first);
    if (it == by_pivot.end()) return std::nullopt;
    FieldElement c = r.front().second / it->second.first.front().second;
    r = axpy(r, -c, it->second.first);
    combo = axpy(combo, c, it->second.second);
  }
  std::vector<FieldElement> x(vectors.size(), FieldElement::zero(f));
  for (const auto& [k, c] : combo) x[k] = c;
  return x;
}

}  // namespace mpers
