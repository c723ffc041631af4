#pragma once

// Homology of one-critical multifiltered complexes: chain complexes, 1-D
// barcodes by column reduction, grid modules (pointwise homology with
// transition matrices), presentations of homology for up to two parameters,
// image modules between fixed-scale slices, and a rank-invariant based
// lower bound for the interleaving distance of grid modules.

#include <mpers/exactnum.hpp>
#include <mpers/filtration.hpp>
#include <mpers/linalg.hpp>
#include <mpers/onedim.hpp>
#include <mpers/presentation.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mpers {

struct Cell {
  std::vector<std::size_t> vertices;
  Grade grade;
};

/// Chain complex of a one-critical complex: cells grouped by degree, boundary
/// columns expressed over the cells one degree lower.
struct GradedChainComplex {
  Field field = Field::prime(2);
  std::size_t params = 1;
  std::vector<std::vector<Cell>> cells;
  std::vector<std::vector<SparseVector>> boundary;  ///< boundary[0] columns are empty

  std::size_t top_degree() const { return cells.empty() ? 0 : cells.size() - 1; }
  std::size_t count(std::size_t d) const { return d < cells.size() ? cells[d].size() : 0; }
  const std::vector<SparseVector>& boundary_of(std::size_t d) const {
    static const std::vector<SparseVector> none;
    return d < boundary.size() ? boundary[d] : none;
  }
};

inline bool boundary_squares_to_zero(const GradedChainComplex& c) {
  for (std::size_t d = 2; d < c.cells.size(); ++d)
    for (const auto& col : c.boundary[d]) {
      SparseVector acc;
      for (const auto& [j, v] : col) acc = axpy(acc, v, c.boundary[d - 1][j]);
      if (!acc.empty()) return false;
    }
  return true;
}

inline GradedChainComplex chain_complex_of(const BifilteredComplex& complex, Field f = Field::prime(2)) {
  validate_complex(complex);
  BifilteredComplex sorted = complex;
  sort_complex(sorted);
  GradedChainComplex c;
  c.field = f;
  c.params = complex.params;
  std::map<std::vector<std::size_t>, std::size_t> index;
  for (const auto& s : sorted.simplices) {
    const std::size_t d = s.dimension();
    if (c.cells.size() <= d) {
      c.cells.resize(d + 1);
      c.boundary.resize(d + 1);
    }
    SparseVector col;
    if (d > 0) {
      for (std::size_t k = 0; k < s.vertices.size(); ++k) {
        auto face = s.vertices;
        face.erase(face.begin() + static_cast<std::ptrdiff_t>(k));
        col.emplace_back(index.at(face), FieldElement(f, k % 2 ? -1L : 1L));
      }
      std::sort(col.begin(), col.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    }
    index[s.vertices] = c.cells[d].size();
    c.cells[d].push_back({s.vertices, s.grade});
    c.boundary[d].push_back(std::move(col));
  }
  if (!boundary_squares_to_zero(c)) throw DomainError("boundary of boundary is nonzero");
  return c;
}

// ---------------------------------------------------------------------------
// 1-parameter barcodes

/// Diagram of H_degree of a 1-parameter complex by column reduction.
inline PersistenceDiagram barcode_1d(const BifilteredComplex& complex, std::size_t degree,
                                     Field f = Field::prime(2)) {
  if (complex.params != 1) throw DomainError("barcodes require a 1-parameter complex");
  GradedChainComplex c = chain_complex_of(complex, f);
  struct Entry {
    std::size_t dim, idx;
  };
  std::vector<Entry> order;
  for (std::size_t d = 0; d < c.cells.size(); ++d)
    for (std::size_t k = 0; k < c.cells[d].size(); ++k) order.push_back({d, k});
  std::stable_sort(order.begin(), order.end(), [&](const Entry& x, const Entry& y) {
    const auto& gx = c.cells[x.dim][x.idx].grade[0];
    const auto& gy = c.cells[y.dim][y.idx].grade[0];
    if (gx != gy) return gx < gy;
    return x.dim < y.dim;
  });
  std::vector<std::vector<std::size_t>> position(c.cells.size());
  for (std::size_t d = 0; d < c.cells.size(); ++d) position[d].resize(c.cells[d].size());
  for (std::size_t p = 0; p < order.size(); ++p) position[order[p].dim][order[p].idx] = p;

  std::map<std::size_t, SparseVector> by_low;  // low -> reduced column
  std::vector<bool> killed(order.size(), false), positive(order.size(), true);
  std::vector<std::optional<std::size_t>> killer(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) {
    const auto& e = order[p];
    if (e.dim == 0) continue;
    SparseVector col;
    for (const auto& [j, v] : c.boundary[e.dim][e.idx]) col.emplace_back(position[e.dim - 1][j], v);
    std::sort(col.begin(), col.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    while (!col.empty()) {
      auto it = by_low.find(col.back().first);
      if (it == by_low.end()) break;
      col = axpy(col, -(col.back().second / it->second.back().second), it->second);
    }
    if (col.empty()) continue;
    positive[p] = false;
    std::size_t low = col.back().first;
    killer[low] = p;
    killed[low] = true;
    by_low.emplace(low, std::move(col));
  }
  std::vector<DiagramPoint> pts;
  for (std::size_t p = 0; p < order.size(); ++p) {
    if (order[p].dim != degree || !positive[p]) continue;
    const Rational& birth = c.cells[degree][order[p].idx].grade[0];
    if (!killed[p]) {
      pts.push_back({birth, ExtendedReal::infinity(), 1});
      continue;
    }
    const auto& k = order[*killer[p]];
    const Rational& death = c.cells[k.dim][k.idx].grade[0];
    if (birth < death) pts.push_back({birth, death, 1});
  }
  return canonical_diagram(pts);
}

// ---------------------------------------------------------------------------
// Grid modules

/// Finite product grid, flattened row-major (last axis fastest).
struct Grid {
  std::vector<std::vector<Rational>> axes;

  std::size_t rank() const { return axes.size(); }
  std::size_t size() const {
    std::size_t s = 1;
    for (const auto& a : axes) s *= a.size();
    return axes.empty() ? 0 : s;
  }
  std::size_t stride(std::size_t k) const {
    std::size_t s = 1;
    for (std::size_t j = k + 1; j < axes.size(); ++j) s *= axes[j].size();
    return s;
  }
  std::vector<std::size_t> unflatten(std::size_t flat) const {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
      idx[k] = flat % axes[k].size();
      flat /= axes[k].size();
    }
    return idx;
  }
  std::size_t flatten(const std::vector<std::size_t>& idx) const {
    std::size_t flat = 0;
    for (std::size_t k = 0; k < axes.size(); ++k) flat = flat * axes[k].size() + idx[k];
    return flat;
  }
  Grade grade(std::size_t flat) const {
    auto idx = unflatten(flat);
    Grade g(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k) g[k] = axes[k][idx[k]];
    return g;
  }
  /// Per-axis index of the first axis value >= coordinate (axis size if none).
  std::vector<std::size_t> ceiling_index(const Grade& g) const {
    std::vector<std::size_t> idx(axes.size());
    for (std::size_t k = 0; k < axes.size(); ++k)
      idx[k] = static_cast<std::size_t>(std::lower_bound(axes[k].begin(), axes[k].end(), g[k]) - axes[k].begin());
    return idx;
  }
  friend bool operator==(const Grid&, const Grid&) = default;
};

inline Grid make_grid(std::vector<std::vector<Rational>> axes) {
  for (auto& a : axes) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }
  return Grid{std::move(axes)};
}

/// Pointwise dimensions plus the maps along each axis between adjacent grid points.
struct GridModule {
  Field field = Field::prime(2);
  Grid grid;
  std::vector<std::size_t> dims;
  /// transitions[k][flat]: dims[flat + e_k] x dims[flat]; empty at the last index of axis k.
  std::vector<std::vector<SparseMatrix>> transitions;

  bool has_successor(std::size_t flat, std::size_t k) const {
    return grid.unflatten(flat)[k] + 1 < grid.axes[k].size();
  }
};

inline bool operator==(const GridModule& a, const GridModule& b) {
  if (!(a.field == b.field) || !(a.grid == b.grid) || a.dims != b.dims) return false;
  for (std::size_t k = 0; k < a.transitions.size(); ++k)
    for (std::size_t f = 0; f < a.dims.size(); ++f)
      if (!(a.transitions[k][f] == b.transitions[k][f])) return false;
  return true;
}

/// Builds a grid module from per-point subquotients whose representatives live
/// in one ambient space; transitions are the induced maps.
inline GridModule grid_module_from_subquotients(Field f, const Grid& grid,
                                                const std::function<Subquotient(std::size_t)>& at) {
  GridModule g;
  g.field = f;
  g.grid = grid;
  const std::size_t n = grid.size();
  std::vector<Subquotient> sq;
  sq.reserve(n);
  for (std::size_t p = 0; p < n; ++p) {
    sq.push_back(at(p));
    g.dims.push_back(sq.back().dim());
  }
  g.transitions.assign(grid.rank(), std::vector<SparseMatrix>(n));
  for (std::size_t k = 0; k < grid.rank(); ++k) {
    const std::size_t st = grid.stride(k);
    for (std::size_t p = 0; p < n; ++p) {
      if (!g.has_successor(p, k)) continue;
      const std::size_t q = p + st;
      SparseMatrix m = SparseMatrix::zero(g.dims[q], g.dims[p]);
      for (std::size_t c = 0; c < g.dims[p]; ++c) m.columns[c] = sq[q].sparse_coordinates(sq[p].representative(c));
      g.transitions[k][p] = std::move(m);
    }
  }
  return g;
}

inline GridModule grid_module_of(const Presentation& p, const Grid& grid) {
  if (grid.rank() != p.n) throw DomainError("grid rank differs from the parameter count");
  return grid_module_from_subquotients(p.field, grid,
                                       [&](std::size_t flat) { return pointwise_subquotient(p, grid.grade(flat)); });
}

namespace detail {

/// Per-cell ceiling indices on the grid; a cell is present at grid point a iff idx <= a.
inline std::vector<std::vector<std::size_t>> cell_indices(const GradedChainComplex& c, std::size_t d,
                                                          const Grid& grid) {
  std::vector<std::vector<std::size_t>> out;
  if (d >= c.cells.size()) return out;
  for (const auto& cell : c.cells[d]) out.push_back(grid.ceiling_index(cell.grade));
  return out;
}

inline bool index_leq(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] > b[k]) return false;
  return true;
}

/// Cycles of the selected degree-d cells, as vectors over all degree-d cells.
inline std::vector<SparseVector> cycles_among(const GradedChainComplex& c, std::size_t d,
                                              const std::vector<std::size_t>& selected) {
  std::vector<SparseVector> out;
  if (d == 0) {
    for (std::size_t j : selected) out.push_back(unit_vector(c.field, j));
    return out;
  }
  std::vector<SparseVector> cols;
  for (std::size_t j : selected) cols.push_back(c.boundary[d][j]);
  for (const auto& k : kernel_basis(c.field, cols)) {
    SparseVector v;
    for (const auto& [local, val] : k) v.emplace_back(selected[local], val);
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    out.push_back(std::move(v));
  }
  return out;
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  /// Keeps the smaller root.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

/// H_0 by union-find: basis = components ordered by smallest vertex.
inline GridModule h0_grid_module(const GradedChainComplex& c, const Grid& grid) {
  GridModule g;
  g.field = c.field;
  g.grid = grid;
  const std::size_t n = grid.size();
  const auto vi = cell_indices(c, 0, grid);
  const auto ei = cell_indices(c, 1, grid);
  const std::size_t nv = c.count(0);
  // comp[p][v] = component index of vertex v at point p, or npos if absent.
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::vector<std::vector<std::size_t>> comp(n);
  std::vector<std::vector<std::size_t>> rep(n);  // smallest vertex of each component
  for (std::size_t p = 0; p < n; ++p) {
    auto idx = grid.unflatten(p);
    UnionFind uf(nv);
    std::vector<bool> present(nv, false);
    for (std::size_t v = 0; v < nv; ++v) present[v] = index_leq(vi[v], idx);
    for (std::size_t e = 0; e < ei.size(); ++e) {
      if (!index_leq(ei[e], idx)) continue;
      const auto& col = c.boundary[1][e];
      uf.unite(col[0].first, col[1].first);
    }
    comp[p].assign(nv, npos);
    std::map<std::size_t, std::size_t> root_index;
    for (std::size_t v = 0; v < nv; ++v) {
      if (!present[v]) continue;
      std::size_t r = uf.find(v);
      auto [it, inserted] = root_index.emplace(r, rep[p].size());
      if (inserted) rep[p].push_back(v);
      comp[p][v] = it->second;
    }
    g.dims.push_back(rep[p].size());
  }
  g.transitions.assign(grid.rank(), std::vector<SparseMatrix>(n));
  for (std::size_t k = 0; k < grid.rank(); ++k) {
    const std::size_t st = grid.stride(k);
    for (std::size_t p = 0; p < n; ++p) {
      if (!g.has_successor(p, k)) continue;
      const std::size_t q = p + st;
      SparseMatrix m = SparseMatrix::zero(g.dims[q], g.dims[p]);
      for (std::size_t j = 0; j < g.dims[p]; ++j) m.columns[j] = unit_vector(c.field, comp[q][rep[p][j]]);
      g.transitions[k][p] = std::move(m);
    }
  }
  return g;
}

inline Subquotient homology_at(const GradedChainComplex& c, std::size_t degree,
                               const std::vector<std::vector<std::size_t>>& zi,
                               const std::vector<std::vector<std::size_t>>& bi, const std::vector<std::size_t>& idx) {
  std::vector<std::size_t> sel;
  for (std::size_t j = 0; j < zi.size(); ++j)
    if (index_leq(zi[j], idx)) sel.push_back(j);
  std::vector<SparseVector> bounds;
  for (std::size_t j = 0; j < bi.size(); ++j)
    if (index_leq(bi[j], idx)) bounds.push_back(c.boundary[degree + 1][j]);
  return Subquotient(c.field, cycles_among(c, degree, sel), bounds);
}

}  // namespace detail

/// Grid module of H_degree, by per-point cycle/boundary subquotients.
inline GridModule grid_module_generic(const GradedChainComplex& c, std::size_t degree, const Grid& grid) {
  if (grid.rank() != c.params) throw DomainError("grid rank differs from the parameter count");
  const auto zi = detail::cell_indices(c, degree, grid);
  const auto bi = detail::cell_indices(c, degree + 1, grid);
  return grid_module_from_subquotients(
      c.field, grid, [&](std::size_t p) { return detail::homology_at(c, degree, zi, bi, grid.unflatten(p)); });
}

/// Grid module of H_degree; degree 0 uses union-find.
inline GridModule grid_module_of(const GradedChainComplex& c, std::size_t degree, const Grid& grid) {
  if (grid.rank() != c.params) throw DomainError("grid rank differs from the parameter count");
  if (degree == 0) return detail::h0_grid_module(c, grid);
  return grid_module_generic(c, degree, grid);
}

/// Axes holding every coordinate of the cells in degrees degree and degree + 1.
inline Grid critical_grid(const GradedChainComplex& c, std::size_t degree) {
  std::vector<std::vector<Rational>> axes(c.params);
  for (std::size_t d = degree; d <= degree + 1 && d < c.cells.size(); ++d)
    for (const auto& cell : c.cells[d])
      for (std::size_t k = 0; k < c.params; ++k) axes[k].push_back(cell.grade[k]);
  return make_grid(std::move(axes));
}

/// Dimension changes under doubling the grid density: a nonempty result
/// means the axes miss a critical value.
inline std::vector<std::size_t> refinement_mismatches(const GradedChainComplex& c, std::size_t degree,
                                                      const Grid& grid) {
  std::vector<std::vector<Rational>> fine = grid.axes;
  for (auto& a : fine) {
    std::vector<Rational> extra;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) extra.push_back((a[i] + a[i + 1]) / Rational(2));
    a.insert(a.end(), extra.begin(), extra.end());
  }
  Grid fg = make_grid(fine);
  GridModule coarse = grid_module_of(c, degree, grid), refined = grid_module_of(c, degree, fg);
  std::vector<std::size_t> bad;
  for (std::size_t p = 0; p < fg.size(); ++p) {
    Grade g = fg.grade(p);
    // floor onto the coarse grid
    std::vector<std::size_t> idx(grid.rank());
    bool below = false;
    for (std::size_t k = 0; k < grid.rank(); ++k) {
      auto it = std::upper_bound(grid.axes[k].begin(), grid.axes[k].end(), g[k]);
      if (it == grid.axes[k].begin()) below = true;
      else idx[k] = static_cast<std::size_t>(it - grid.axes[k].begin()) - 1;
    }
    if (below) continue;
    if (coarse.dims[grid.flatten(idx)] != refined.dims[p]) bad.push_back(p);
  }
  return bad;
}

// ---------------------------------------------------------------------------
// Presentations of homology

/// Presentation of H_degree for complexes with at most two parameters. The
/// cycle module is generated by sweeping the grid of degree-cell coordinates;
/// freeness is checked at every grid point and the result is minimized.
inline Presentation present_homology(const GradedChainComplex& c, std::size_t degree) {
  if (c.params < 1 || c.params > 2) throw DomainError("homology presentations need 1 or 2 parameters");
  Presentation out = Presentation::zero(c.params, c.field);
  if (c.count(degree) == 0) return out;
  std::vector<std::vector<Rational>> axes(c.params);
  for (const auto& cell : c.cells[degree])
    for (std::size_t k = 0; k < c.params; ++k) axes[k].push_back(cell.grade[k]);
  Grid grid = make_grid(std::move(axes));
  const auto zi = detail::cell_indices(c, degree, grid);

  std::vector<SparseVector> gens;
  std::vector<std::vector<std::size_t>> gen_idx;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    auto idx = grid.unflatten(p);
    std::vector<std::size_t> sel;
    for (std::size_t j = 0; j < zi.size(); ++j)
      if (detail::index_leq(zi[j], idx)) sel.push_back(j);
    auto kernel = detail::cycles_among(c, degree, sel);
    EchelonBasis span(c.field);
    std::size_t below = 0;
    for (std::size_t g = 0; g < gens.size(); ++g)
      if (detail::index_leq(gen_idx[g], idx)) {
        span.insert(gens[g]);
        ++below;
      }
    if (span.rank() != below) throw DomainError("cycle module is not free: dependent generators");
    for (const auto& v : kernel)
      if (span.insert(v)) {
        gens.push_back(v);
        gen_idx.push_back(idx);
        out.generators.push_back({"z" + std::to_string(gens.size()), grid.grade(p)});
      }
    if (span.rank() != kernel.size()) throw DomainError("cycle module is not free: generator count mismatch");
  }
  if (degree + 1 < c.cells.size()) {
    for (std::size_t t = 0; t < c.cells[degree + 1].size(); ++t) {
      const Grade& gt = c.cells[degree + 1][t].grade;
      std::vector<SparseVector> avail;
      std::vector<std::size_t> which;
      for (std::size_t g = 0; g < gens.size(); ++g)
        if (leq(out.generators[g].grade, gt)) {
          avail.push_back(gens[g]);
          which.push_back(g);
        }
      auto sol = solve_in_span(c.field, avail, c.boundary[degree + 1][t]);
      if (!sol) throw DomainError("boundary outside the cycle module at its grade");
      HomElement rel{"b" + std::to_string(t + 1), gt, {}};
      for (std::size_t k = 0; k < which.size(); ++k)
        if (!(*sol)[k].is_zero()) rel.coeffs.emplace_back(which[k], (*sol)[k]);
      std::sort(rel.coeffs.begin(), rel.coeffs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
      out.relations.push_back(std::move(rel));
    }
  }
  return minimize_presentation(out);
}

inline Presentation present_homology_2d(const GradedChainComplex& c, std::size_t degree) {
  if (c.params != 2) throw DomainError("present_homology_2d needs a 2-parameter complex");
  return present_homology(c, degree);
}

/// Grid points where the presentation's pointwise dimension differs from the grid module's.
inline std::vector<std::size_t> hilbert_mismatches(const Presentation& p, const GridModule& g) {
  std::vector<std::size_t> bad;
  for (std::size_t q = 0; q < g.grid.size(); ++q)
    if (pointwise_subquotient(p, g.grid.grade(q)).dim() != g.dims[q]) bad.push_back(q);
  return bad;
}

// ---------------------------------------------------------------------------
// Image modules between fixed-scale slices

/// Image of H_degree(slice at delta1) -> H_degree(slice at delta2) over the
/// remaining parameters, on `grid`.
inline GridModule image_grid_module(const BifilteredComplex& complex, std::size_t degree, const Rational& delta1,
                                    const Rational& delta2, const Grid& grid, Field f = Field::prime(2)) {
  if (delta2 < delta1) throw DomainError("image module needs delta1 <= delta2");
  BifilteredComplex big = fixed_scale_slice(complex, delta2);
  // Mark the cells of the smaller slice within the bigger one.
  std::set<std::vector<std::size_t>> small_cells;
  for (const auto& s : complex.simplices)
    if (simplex_scale(s) <= delta1) small_cells.insert(s.vertices);
  GradedChainComplex c = chain_complex_of(big, f);
  if (grid.rank() != c.params) throw DomainError("grid rank differs from the parameter count");
  std::vector<bool> in_small;
  if (degree < c.cells.size())
    for (const auto& cell : c.cells[degree]) in_small.push_back(small_cells.count(cell.vertices) != 0);
  const auto zi = detail::cell_indices(c, degree, grid);
  const auto bi = detail::cell_indices(c, degree + 1, grid);
  return grid_module_from_subquotients(f, grid, [&](std::size_t p) {
    auto idx = grid.unflatten(p);
    std::vector<std::size_t> sel;
    for (std::size_t j = 0; j < zi.size(); ++j)
      if (in_small[j] && detail::index_leq(zi[j], idx)) sel.push_back(j);
    std::vector<SparseVector> bounds;
    for (std::size_t j = 0; j < bi.size(); ++j)
      if (detail::index_leq(bi[j], idx)) bounds.push_back(c.boundary[degree + 1][j]);
    return Subquotient(f, detail::cycles_among(c, degree, sel), bounds);
  });
}

/// Morphism of grid modules on one grid: a matrix per grid point.
struct GridMap {
  GridModule source, target;
  std::vector<SparseMatrix> maps;  ///< maps[p]: target.dims[p] x source.dims[p]

  bool commutes() const {
    const Grid& g = source.grid;
    for (std::size_t k = 0; k < g.rank(); ++k)
      for (std::size_t p = 0; p < g.size(); ++p) {
        if (!source.has_successor(p, k)) continue;
        const std::size_t q = p + g.stride(k);
        if (!(multiply(maps[q], source.transitions[k][p]) == multiply(target.transitions[k][p], maps[p])))
          return false;
      }
    return true;
  }
  std::vector<std::size_t> pointwise_ranks() const {
    std::vector<std::size_t> r;
    for (const auto& m : maps) r.push_back(rank_of(source.field, m));
    return r;
  }
};

/// Map H_degree(slice at delta1) -> H_degree(slice at delta2) induced by inclusion.
inline GridMap slice_inclusion_map(const BifilteredComplex& complex, std::size_t degree, const Rational& delta1,
                                   const Rational& delta2, const Grid& grid, Field f = Field::prime(2)) {
  if (delta2 < delta1) throw DomainError("inclusion map needs delta1 <= delta2");
  GradedChainComplex c1 = chain_complex_of(fixed_scale_slice(complex, delta1), f);
  GradedChainComplex c2 = chain_complex_of(fixed_scale_slice(complex, delta2), f);
  if (grid.rank() != c2.params) throw DomainError("grid rank differs from the parameter count");
  std::map<std::vector<std::size_t>, std::size_t> where;
  for (std::size_t j = 0; j < c2.count(degree); ++j) where[c2.cells[degree][j].vertices] = j;
  std::vector<std::size_t> remap;
  for (std::size_t j = 0; j < c1.count(degree); ++j) remap.push_back(where.at(c1.cells[degree][j].vertices));
  const auto z1 = detail::cell_indices(c1, degree, grid), b1 = detail::cell_indices(c1, degree + 1, grid);
  const auto z2 = detail::cell_indices(c2, degree, grid), b2 = detail::cell_indices(c2, degree + 1, grid);
  GridMap out;
  out.source = grid_module_from_subquotients(
      f, grid, [&](std::size_t p) { return detail::homology_at(c1, degree, z1, b1, grid.unflatten(p)); });
  out.target = grid_module_from_subquotients(
      f, grid, [&](std::size_t p) { return detail::homology_at(c2, degree, z2, b2, grid.unflatten(p)); });
  for (std::size_t p = 0; p < grid.size(); ++p) {
    auto idx = grid.unflatten(p);
    Subquotient s1 = detail::homology_at(c1, degree, z1, b1, idx);
    Subquotient s2 = detail::homology_at(c2, degree, z2, b2, idx);
    SparseMatrix m = SparseMatrix::zero(s2.dim(), s1.dim());
    for (std::size_t col = 0; col < s1.dim(); ++col) {
      SparseVector v;
      for (const auto& [j, x] : s1.representative(col)) v.emplace_back(remap[j], x);
      std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      m.columns[col] = s2.sparse_coordinates(v);
    }
    out.maps.push_back(std::move(m));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grid module operations

/// Zero at every grid point not strictly below u.
inline GridModule restrict_grid_module(const GridModule& g, const std::vector<ExtendedReal>& u) {
  if (u.size() != g.grid.rank()) throw DomainError("restriction bound of wrong length");
  GridModule out = g;
  const std::size_t n = g.grid.size();
  std::vector<bool> alive(n);
  for (std::size_t p = 0; p < n; ++p) alive[p] = strictly_less_everywhere(g.grid.grade(p), u);
  for (std::size_t p = 0; p < n; ++p)
    if (!alive[p]) out.dims[p] = 0;
  for (std::size_t k = 0; k < g.grid.rank(); ++k) {
    const std::size_t st = g.grid.stride(k);
    for (std::size_t p = 0; p < n; ++p) {
      if (!g.has_successor(p, k)) continue;
      if (!alive[p] || !alive[p + st]) out.transitions[k][p] = SparseMatrix::zero(out.dims[p + st], out.dims[p]);
    }
  }
  return out;
}

/// Module on `axes` obtained by extending g by floor: the value at x is g at
/// the largest grid point <= x, and zero below the grid.
inline GridModule resample(const GridModule& g, const Grid& target) {
  if (target.rank() != g.grid.rank()) throw DomainError("resampling onto a grid of different rank");
  const std::size_t r = target.rank();
  constexpr long below = -1;
  std::vector<std::vector<long>> fl(r);
  for (std::size_t k = 0; k < r; ++k)
    for (const auto& x : target.axes[k]) {
      const auto& ax = g.grid.axes[k];
      auto it = std::upper_bound(ax.begin(), ax.end(), x);
      fl[k].push_back(it == ax.begin() ? below : static_cast<long>(it - ax.begin()) - 1);
    }
  auto source_of = [&](std::size_t p) -> std::optional<std::size_t> {
    auto idx = target.unflatten(p);
    std::vector<std::size_t> s(r);
    for (std::size_t k = 0; k < r; ++k) {
      if (fl[k][idx[k]] == below) return std::nullopt;
      s[k] = static_cast<std::size_t>(fl[k][idx[k]]);
    }
    return g.grid.flatten(s);
  };
  GridModule out;
  out.field = g.field;
  out.grid = target;
  const std::size_t n = target.size();
  std::vector<std::optional<std::size_t>> src(n);
  for (std::size_t p = 0; p < n; ++p) {
    src[p] = source_of(p);
    out.dims.push_back(src[p] ? g.dims[*src[p]] : 0);
  }
  out.transitions.assign(r, std::vector<SparseMatrix>(n));
  for (std::size_t k = 0; k < r; ++k) {
    const std::size_t st = target.stride(k), gst = g.grid.stride(k);
    for (std::size_t p = 0; p < n; ++p) {
      if (!out.has_successor(p, k)) continue;
      const std::size_t q = p + st;
      if (!src[p] || !src[q]) {
        out.transitions[k][p] = SparseMatrix::zero(out.dims[q], out.dims[p]);
        continue;
      }
      SparseMatrix m = SparseMatrix::identity(g.field, g.dims[*src[p]]);
      for (std::size_t s = *src[p]; s != *src[q]; s += gst) m = multiply(g.transitions[k][s], m);
      out.transitions[k][p] = std::move(m);
    }
  }
  return out;
}

/// Per-axis union of the two grids.
inline Grid common_refinement(const Grid& a, const Grid& b) {
  if (a.rank() != b.rank()) throw DomainError("grids of different rank");
  std::vector<std::vector<Rational>> axes(a.rank());
  for (std::size_t k = 0; k < a.rank(); ++k) {
    axes[k] = a.axes[k];
    axes[k].insert(axes[k].end(), b.axes[k].begin(), b.axes[k].end());
  }
  return make_grid(std::move(axes));
}

/// Every square of transition maps commutes.
inline bool squares_commute(const GridModule& g) {
  const std::size_t r = g.grid.rank();
  for (std::size_t p = 0; p < g.grid.size(); ++p)
    for (std::size_t k = 0; k < r; ++k)
      for (std::size_t l = k + 1; l < r; ++l) {
        if (!g.has_successor(p, k) || !g.has_successor(p, l)) continue;
        const std::size_t sk = g.grid.stride(k), sl = g.grid.stride(l);
        SparseMatrix a = multiply(g.transitions[l][p + sk], g.transitions[k][p]);
        SparseMatrix b = multiply(g.transitions[k][p + sl], g.transitions[l][p]);
        if (!(a == b)) return false;
      }
  return true;
}

/// Ranks of the composite maps between all comparable grid points.
class RankTable {
 public:
  explicit RankTable(const GridModule& g) : grid_(g.grid), n_(g.grid.size()), ranks_(n_ * n_, 0) {
    bool functional = true;
    for (const auto& per_axis : g.transitions)
      for (const auto& m : per_axis)
        for (const auto& col : m.columns)
          if (col.size() > 1 || (col.size() == 1 && !col.front().second.is_one())) functional = false;
    if (functional)
      fill_functional(g);
    else
      fill_generic(g);
  }

  std::size_t operator()(std::size_t a, std::size_t b) const { return ranks_[a * n_ + b]; }
  const Grid& grid() const { return grid_; }

 private:
  /// Visits b >= a in increasing flat order with the axis used to reach it.
  template <class Visit>
  void sweep(std::size_t a, Visit&& visit) const {
    const std::size_t r = grid_.rank();
    auto lo = grid_.unflatten(a);
    auto idx = lo;
    for (;;) {
      std::size_t b = grid_.flatten(idx);
      long axis = -1;
      for (std::size_t k = r; k-- > 0;)
        if (idx[k] > lo[k]) {
          axis = static_cast<long>(k);
          break;
        }
      visit(b, axis);
      std::size_t k = r;
      while (k-- > 0) {
        if (++idx[k] < grid_.axes[k].size()) break;
        idx[k] = lo[k];
      }
      if (k == static_cast<std::size_t>(-1)) return;
    }
  }

  void fill_generic(const GridModule& g) {
    std::vector<SparseMatrix> comp(n_);
    for (std::size_t a = 0; a < n_; ++a) {
      if (g.dims[a] == 0) continue;
      sweep(a, [&](std::size_t b, long axis) {
        if (axis < 0) {
          comp[b] = SparseMatrix::identity(g.field, g.dims[a]);
          ranks_[a * n_ + b] = g.dims[a];
          return;
        }
        const std::size_t prev = b - grid_.stride(static_cast<std::size_t>(axis));
        if (ranks_[a * n_ + prev] == 0) {
          comp[b] = SparseMatrix::zero(g.dims[b], g.dims[a]);
          return;
        }
        comp[b] = multiply(g.transitions[static_cast<std::size_t>(axis)][prev], comp[prev]);
        ranks_[a * n_ + b] = static_cast<std::uint16_t>(rank_of(g.field, comp[b]));
      });
    }
  }

  /// Transitions send basis vectors to basis vectors or zero: compose index maps.
  void fill_functional(const GridModule& g) {
    constexpr std::uint32_t none = static_cast<std::uint32_t>(-1);
    std::vector<std::vector<std::uint32_t>> comp(n_);
    std::vector<std::uint32_t> seen;
    std::uint32_t stamp = 0;
    for (std::size_t a = 0; a < n_; ++a) {
      if (g.dims[a] == 0) continue;
      sweep(a, [&](std::size_t b, long axis) {
        auto& cb = comp[b];
        if (axis < 0) {
          cb.resize(g.dims[a]);
          std::iota(cb.begin(), cb.end(), 0u);
          ranks_[a * n_ + b] = static_cast<std::uint16_t>(g.dims[a]);
          return;
        }
        const std::size_t prev = b - grid_.stride(static_cast<std::size_t>(axis));
        if (ranks_[a * n_ + prev] == 0) return;
        const auto& t = g.transitions[static_cast<std::size_t>(axis)][prev];
        const auto& cp = comp[prev];
        cb.resize(cp.size());
        if (seen.size() < g.dims[b]) seen.resize(g.dims[b], 0);
        ++stamp;
        std::uint16_t distinct = 0;
        for (std::size_t j = 0; j < cp.size(); ++j) {
          std::uint32_t v = cp[j] == none || t.columns[cp[j]].empty() ? none
                                                                      : static_cast<std::uint32_t>(t.columns[cp[j]].front().first);
          cb[j] = v;
          if (v != none && seen[v] != stamp) {
            seen[v] = stamp;
            ++distinct;
          }
        }
        ranks_[a * n_ + b] = distinct;
      });
    }
  }

  Grid grid_;
  std::size_t n_;
  std::vector<std::uint16_t> ranks_;
};

/// Rank-invariant lower bound for the interleaving distance of two grid
/// modules on the same grid, each extended off the grid by floor (zero below).
/// Returns the least eps such that for every eps' > eps and grid points
/// a <= b, rank M(a - eps' -> b + eps') <= rank N(a -> b) and symmetrically.
/// This is a proxy, not the interleaving distance.
inline ExtendedReal rank_shift_distance(const GridModule& m, const GridModule& n) {
  if (m.grid.rank() != n.grid.rank()) throw DomainError("grid modules of different rank");
  if (!(m.grid == n.grid)) return rank_shift_distance(resample(m, common_refinement(m.grid, n.grid)),
                                                       resample(n, common_refinement(m.grid, n.grid)));
  const Grid& grid = m.grid;
  const std::size_t size = grid.size(), r = grid.rank();
  if (size == 0) return ExtendedReal(0);
  RankTable rm(m), rn(n);

  std::set<Rational> cand{Rational(0)};
  for (const auto& ax : grid.axes)
    for (const auto& x : ax)
      for (const auto& y : ax)
        if (y < x) cand.insert(x - y);
  std::vector<Rational> c(cand.begin(), cand.end());

  std::vector<std::vector<std::size_t>> multi(size);
  for (std::size_t p = 0; p < size; ++p) multi[p] = grid.unflatten(p);

  auto feasible = [&](const Rational& eps) {
    // Just above eps: the lower point floors strictly, the upper point weakly.
    std::vector<std::vector<long>> low(r), high(r);
    for (std::size_t k = 0; k < r; ++k) {
      const auto& ax = grid.axes[k];
      for (const auto& x : ax) {
        Rational lo = x - eps, hi = x + eps;
        low[k].push_back(static_cast<long>(std::lower_bound(ax.begin(), ax.end(), lo) - ax.begin()) - 1);
        high[k].push_back(static_cast<long>(std::upper_bound(ax.begin(), ax.end(), hi) - ax.begin()) - 1);
      }
    }
    std::vector<long> lowflat(size), highflat(size);
    for (std::size_t p = 0; p < size; ++p) {
      std::vector<std::size_t> li(r), hi(r);
      bool under = false;
      for (std::size_t k = 0; k < r; ++k) {
        long l = low[k][multi[p][k]];
        if (l < 0) under = true;
        li[k] = static_cast<std::size_t>(std::max(l, 0L));
        hi[k] = static_cast<std::size_t>(high[k][multi[p][k]]);
      }
      lowflat[p] = under ? -1 : static_cast<long>(grid.flatten(li));
      highflat[p] = static_cast<long>(grid.flatten(hi));
    }
    for (std::size_t a = 0; a < size; ++a) {
      if (lowflat[a] < 0) continue;
      const std::size_t la = static_cast<std::size_t>(lowflat[a]);
      for (std::size_t b = a; b < size; ++b) {
        if (!detail::index_leq(multi[a], multi[b])) continue;
        const std::size_t hb = static_cast<std::size_t>(highflat[b]);
        if (rm(la, hb) > rn(a, b) || rn(la, hb) > rm(a, b)) return false;
      }
    }
    return true;
  };
  std::size_t lo = 0, hi = c.size() - 1;  // beyond the largest difference every lower point leaves the grid
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (feasible(c[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return ExtendedReal(c[hi]);
}

}  // namespace mpers
