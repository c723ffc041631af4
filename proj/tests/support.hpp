#pragma once

// Random instance generators and independent oracles shared by the unit tests
// and the acceptance binary. Oracles here deliberately avoid the library's
// linear algebra: they work on dense byte matrices over Z/p.

#include <mpers/exactnum.hpp>
#include <mpers/filtration.hpp>
#include <mpers/onedim.hpp>
#include <mpers/presentation.hpp>
#include <mpers/quadsys.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

namespace mpers::testing {

using Rng = std::mt19937_64;

inline long uniform_int(Rng& rng, long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

/// k / 2 for k in [0, 8]: the half-integer grid {0, 1/2, ..., 4}.
inline Rational half_grade(Rng& rng) { return Rational(uniform_int(rng, 0, 8), 2); }

/// Random valid n-parameter presentation over Z/p on the half-integer grid.
/// Each relation is supported on a nonempty generator subset; its grade is
/// the join of their grades plus a random nonnegative offset.
inline Presentation random_presentation(Rng& rng, std::size_t n, std::size_t max_gens = 3,
                                        std::size_t max_rels = 3, std::uint32_t p = 2) {
  Field f = Field::prime(p);
  Presentation out = Presentation::zero(n, f);
  const std::size_t g = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(max_gens)));
  for (std::size_t k = 0; k < g; ++k) {
    Grade a;
    for (std::size_t i = 0; i < n; ++i) a.push_back(half_grade(rng));
    out.generators.push_back({"g" + std::to_string(k + 1), a});
  }
  if (g == 0) return out;
  const std::size_t r = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(max_rels)));
  for (std::size_t k = 0; k < r; ++k) {
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < g; ++j)
      if (uniform_int(rng, 0, 1)) support.push_back(j);
    if (support.empty()) support.push_back(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(g) - 1)));
    Grade grade = out.generators[support[0]].grade;
    for (std::size_t j : support) grade = join(grade, out.generators[j].grade);
    for (auto& x : grade) x += Rational(uniform_int(rng, 0, 2), 2);
    HomElement rel{"r" + std::to_string(k + 1), grade, {}};
    for (std::size_t j : support)
      rel.coeffs.emplace_back(j, FieldElement(f, uniform_int(rng, 1, static_cast<long>(p) - 1)));
    out.relations.push_back(std::move(rel));
  }
  return out;
}

inline Presentation random_presentation_1d(Rng& rng, std::size_t max_gens = 3, std::size_t max_rels = 3,
                                           std::uint32_t p = 2) {
  return random_presentation(rng, 1, max_gens, max_rels, p);
}

/// Same module, different presentation: `ops` random unit graded row and
/// column operations on the relation matrix, then one generator together
/// with a relation that kills it.
inline Presentation scramble_presentation(Rng& rng, Presentation p, std::size_t ops) {
  const Field f = p.field;
  const long q = p.field.modulus();
  auto coeff = [&](const HomElement& r, std::size_t j) {
    auto e = entry(r.coeffs, j);
    return e ? *e : FieldElement::zero(f);
  };
  for (std::size_t k = 0; k < ops; ++k) {
    const FieldElement c(f, uniform_int(rng, 1, q - 1));
    const std::size_t g = p.generators.size(), r = p.relations.size();
    if (uniform_int(rng, 0, 1) && g >= 2) {
      // row_i += c row_j is the basis change g_j -> g_j - c g_i; needs gr(g_i) <= gr(g_j).
      std::size_t i = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(g) - 1));
      std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(g) - 1));
      if (i == j || !leq(p.generators[i].grade, p.generators[j].grade)) continue;
      for (auto& rel : p.relations) {
        SparseVector add;
        FieldElement v = coeff(rel, j) * c;
        if (!v.is_zero()) add.emplace_back(i, v);
        rel.coeffs = axpy(rel.coeffs, FieldElement::one(f), add);
      }
    } else if (r >= 2) {
      // r_i += c r_j needs gr(r_j) <= gr(r_i).
      std::size_t i = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(r) - 1));
      std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(r) - 1));
      if (i == j || !leq(p.relations[j].grade, p.relations[i].grade)) continue;
      p.relations[i].coeffs = axpy(p.relations[i].coeffs, c, p.relations[j].coeffs);
    }
  }
  Grade a;
  for (std::size_t i = 0; i < p.n; ++i) a.push_back(half_grade(rng));
  const std::size_t x = p.generators.size();
  HomElement kill{"y_extra", a, {}};
  for (std::size_t j = 0; j < x; ++j)
    if (leq(p.generators[j].grade, a) && uniform_int(rng, 0, 1))
      kill.coeffs.emplace_back(j, FieldElement(f, uniform_int(rng, 1, q - 1)));
  kill.coeffs.emplace_back(x, FieldElement::one(f));
  p.generators.push_back({"x_extra", a});
  p.relations.insert(p.relations.begin() + uniform_int(rng, 0, static_cast<long>(p.relations.size())), kill);
  return p;
}

/// Random diagram with at most `max_points` expanded points, finite births on
/// the half-integer grid, deaths finite or +inf.
inline PersistenceDiagram random_diagram(Rng& rng, std::size_t max_points) {
  std::vector<DiagramPoint> pts;
  std::size_t total = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(max_points)));
  while (total > 0) {
    Rational b = half_grade(rng);
    ExtendedReal d = uniform_int(rng, 0, 5) == 0 ? ExtendedReal::infinity()
                                                 : ExtendedReal(b + Rational(uniform_int(rng, 1, 6), 2));
    std::size_t m = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<long>(std::min<std::size_t>(total, 2))));
    pts.push_back({b, d, m});
    total -= m;
  }
  return canonical_diagram(pts);
}

/// Exhaustive solvability over Z/p.
inline bool exhaustive_solvable(const QuadraticSystem& sys) {
  const std::uint32_t p = sys.field.modulus();
  std::vector<long> v(sys.var_count, 0);
  for (;;) {
    Assignment a;
    for (long x : v) a.push_back(FieldElement(sys.field, x));
    if (!evaluate(sys, a)) return true;
    std::size_t k = 0;
    while (k < v.size() && ++v[k] == static_cast<long>(p)) v[k++] = 0;
    if (k == v.size()) return false;
  }
}

/// Random affine-quadratic system with `vars` variables over Z/p.
inline QuadraticSystem random_system(Rng& rng, std::size_t vars, std::uint32_t p) {
  QuadraticSystem sys{Field::prime(p), vars, {}};
  const long eqs = uniform_int(rng, 1, static_cast<long>(vars) + 2);
  for (long e = 0; e < eqs; ++e) {
    EquationBuilder b(sys.field);
    const long terms = uniform_int(rng, 1, 4);
    for (long t = 0; t < terms; ++t) {
      FieldElement c(sys.field, uniform_int(rng, 1, static_cast<long>(p) - 1));
      std::size_t i = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(vars) - 1));
      std::size_t j = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<long>(vars) - 1));
      switch (uniform_int(rng, 0, 2)) {
        case 0: b.quadratic(c, std::min(i, j), std::max(i, j)); break;
        case 1: b.linear(c, i); break;
        default: b.constant(c); break;
      }
    }
    sys.equations.push_back(b.build());
  }
  return sys;
}

// ---------------------------------------------------------------------------
// Dense mod-p homology oracle

/// Rank of a dense matrix over Z/p by row reduction.
inline std::size_t dense_rank(std::vector<std::vector<long>> m, long p) {
  std::size_t rank = 0;
  const std::size_t rows = m.size(), cols = rows ? m[0].size() : 0;
  auto inv = [p](long a) {
    for (long x = 1; x < p; ++x)
      if (a * x % p == 1) return x;
    return 0L;
  };
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && m[piv][c] % p == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[rank]);
    long iv = inv(((m[rank][c] % p) + p) % p);
    for (auto& x : m[rank]) x = ((x * iv) % p + p) % p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || m[r][c] % p == 0) continue;
      long f = m[r][c];
      for (std::size_t k = 0; k < cols; ++k) m[r][k] = ((m[r][k] - f * m[rank][k]) % p + p) % p;
    }
    ++rank;
  }
  return rank;
}

/// dim M_a of a presentation over Z/p: generators <= a minus the rank of the
/// relations <= a, by dense elimination.
inline std::size_t presentation_dim_at(const Presentation& pr, const Grade& a) {
  const long p = pr.field.modulus();
  std::size_t gens = 0;
  for (const auto& g : pr.generators) gens += leq(g.grade, a);
  std::vector<std::vector<long>> rows;
  for (const auto& r : pr.relations) {
    if (!leq(r.grade, a)) continue;
    std::vector<long> row(pr.generators.size(), 0);
    for (const auto& [j, c] : r.coeffs) row[j] = c.residue();
    rows.push_back(row);
  }
  return gens - dense_rank(rows, p);
}

/// dim H_degree of the subcomplex of simplices with grade <= a, over Z/p.
inline std::size_t homology_dim_at(const BifilteredComplex& c, std::size_t degree, const Grade& a, long p = 2) {
  std::vector<std::vector<std::size_t>> lo, mid, hi;
  for (const auto& s : c.simplices) {
    if (!leq(s.grade, a)) continue;
    const std::size_t d = s.vertices.size() - 1;
    if (d + 1 == degree) lo.push_back(s.vertices);
    if (d == degree) mid.push_back(s.vertices);
    if (d == degree + 1) hi.push_back(s.vertices);
  }
  auto boundary = [p](const std::vector<std::vector<std::size_t>>& faces,
                      const std::vector<std::vector<std::size_t>>& cofaces) {
    std::vector<std::vector<long>> m(faces.size(), std::vector<long>(cofaces.size(), 0));
    for (std::size_t j = 0; j < cofaces.size(); ++j)
      for (std::size_t k = 0; k < cofaces[j].size(); ++k) {
        auto face = cofaces[j];
        face.erase(face.begin() + static_cast<std::ptrdiff_t>(k));
        auto it = std::find(faces.begin(), faces.end(), face);
        if (it != faces.end()) m[static_cast<std::size_t>(it - faces.begin())][j] = (k % 2 ? p - 1 : 1);
      }
    return m;
  };
  std::size_t rank_in = degree == 0 ? 0 : dense_rank(boundary(lo, mid), p);
  std::size_t rank_out = dense_rank(boundary(mid, hi), p);
  return mid.size() - rank_in - rank_out;
}

/// Kernel basis of a dense rows x cols matrix over Z/p.
inline std::vector<std::vector<long>> dense_kernel(std::vector<std::vector<long>> m, std::size_t cols, long p) {
  auto inv = [p](long a) {
    for (long x = 1; x < p; ++x)
      if (a * x % p == 1) return x;
    return 0L;
  };
  const std::size_t rows = m.size();
  std::vector<long> pivot_col_of_row;
  std::vector<bool> is_pivot(cols, false);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t piv = rank;
    while (piv < rows && m[piv][c] % p == 0) ++piv;
    if (piv == rows) continue;
    std::swap(m[piv], m[rank]);
    long iv = inv(m[rank][c] % p);
    for (auto& x : m[rank]) x = x * iv % p;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == rank || m[r][c] % p == 0) continue;
      long f = m[r][c];
      for (std::size_t k = 0; k < cols; ++k) m[r][k] = ((m[r][k] - f * m[rank][k]) % p + p) % p;
    }
    pivot_col_of_row.push_back(static_cast<long>(c));
    is_pivot[c] = true;
    ++rank;
  }
  std::vector<std::vector<long>> basis;
  for (std::size_t fcol = 0; fcol < cols; ++fcol) {
    if (is_pivot[fcol]) continue;
    std::vector<long> v(cols, 0);
    v[fcol] = 1;
    for (std::size_t r = 0; r < rank; ++r) v[static_cast<std::size_t>(pivot_col_of_row[r])] = (p - m[r][fcol]) % p;
    basis.push_back(v);
  }
  return basis;
}

/// Rank of H_degree(K_a) -> H_degree(K_b) over Z/p for a <= b, as
/// dim(Z_a + B_b) - dim(B_b) in the degree-chains of K_b.
inline std::size_t homology_rank_between(const BifilteredComplex& c, std::size_t degree, const Grade& a,
                                         const Grade& b, long p = 2) {
  std::vector<std::vector<std::size_t>> lo, mid, hi;
  std::vector<bool> mid_in_a;
  for (const auto& s : c.simplices) {
    if (!leq(s.grade, b)) continue;
    const std::size_t d = s.vertices.size() - 1;
    if (d + 1 == degree) lo.push_back(s.vertices);
    if (d == degree) {
      mid.push_back(s.vertices);
      mid_in_a.push_back(leq(s.grade, a));
    }
    if (d == degree + 1) hi.push_back(s.vertices);
  }
  auto sign_of = [p](std::size_t k) { return k % 2 ? p - 1 : 1L; };
  auto index_of = [](const std::vector<std::vector<std::size_t>>& v, const std::vector<std::size_t>& x) {
    return static_cast<std::size_t>(std::find(v.begin(), v.end(), x) - v.begin());
  };
  // Cycles of K_a: kernel of the boundary restricted to degree-cells <= a.
  std::vector<std::size_t> in_a;
  for (std::size_t j = 0; j < mid.size(); ++j)
    if (mid_in_a[j]) in_a.push_back(j);
  std::vector<std::vector<long>> d_a(lo.size(), std::vector<long>(in_a.size(), 0));
  if (degree > 0)
    for (std::size_t j = 0; j < in_a.size(); ++j) {
      const auto& cell = mid[in_a[j]];
      for (std::size_t k = 0; k < cell.size(); ++k) {
        auto face = cell;
        face.erase(face.begin() + static_cast<std::ptrdiff_t>(k));
        d_a[index_of(lo, face)][j] = sign_of(k);
      }
    }
  std::vector<std::vector<long>> vectors;
  for (const auto& z : dense_kernel(d_a, in_a.size(), p)) {
    std::vector<long> v(mid.size(), 0);
    for (std::size_t j = 0; j < in_a.size(); ++j) v[in_a[j]] = z[j];
    vectors.push_back(v);
  }
  std::vector<std::vector<long>> bounds;
  for (const auto& cell : hi) {
    std::vector<long> v(mid.size(), 0);
    for (std::size_t k = 0; k < cell.size(); ++k) {
      auto face = cell;
      face.erase(face.begin() + static_cast<std::ptrdiff_t>(k));
      v[index_of(mid, face)] = sign_of(k);
    }
    bounds.push_back(v);
  }
  std::vector<std::vector<long>> both = bounds;
  both.insert(both.end(), vectors.begin(), vectors.end());
  return dense_rank(both, p) - dense_rank(bounds, p);
}

/// Random one-critical complex with at most `max_simplices` simplices and
/// `params` parameters; grades on the half-integer grid.
inline BifilteredComplex random_complex(Rng& rng, std::size_t params, std::size_t max_simplices,
                                        std::size_t max_vertices = 5) {
  BifilteredComplex c;
  c.params = params;
  auto random_grade = [&] {
    Grade g;
    for (std::size_t k = 0; k < params; ++k) g.push_back(Rational(uniform_int(rng, 0, 4), 2));
    return g;
  };
  const std::size_t nv = static_cast<std::size_t>(uniform_int(rng, 1, static_cast<long>(max_vertices)));
  std::map<std::vector<std::size_t>, Grade> grade;
  for (std::size_t v = 0; v < nv && c.simplices.size() < max_simplices; ++v) {
    Grade g = random_grade();
    grade[{v}] = g;
    c.simplices.push_back({{v}, g, std::nullopt});
  }
  std::vector<std::vector<std::size_t>> edges;
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t b = a + 1; b < nv; ++b) edges.push_back({a, b});
  std::shuffle(edges.begin(), edges.end(), rng);
  for (const auto& e : edges) {
    if (c.simplices.size() >= max_simplices) break;
    if (uniform_int(rng, 0, 3) == 0) continue;
    Grade g = join(join(grade[{e[0]}], grade[{e[1]}]), random_grade());
    grade[e] = g;
    c.simplices.push_back({e, g, std::nullopt});
  }
  for (std::size_t a = 0; a < nv; ++a)
    for (std::size_t b = a + 1; b < nv; ++b)
      for (std::size_t d = b + 1; d < nv; ++d) {
        if (c.simplices.size() >= max_simplices) break;
        std::vector<std::size_t> t{a, b, d};
        if (!grade.count({a, b}) || !grade.count({a, d}) || !grade.count({b, d})) continue;
        if (uniform_int(rng, 0, 1) == 0) continue;
        Grade g = join(join(grade[{a, b}], grade[{a, d}]), join(grade[{b, d}], random_grade()));
        grade[t] = g;
        c.simplices.push_back({t, g, std::nullopt});
      }
  return c;
}

/// All coordinates of the complex per axis, plus one value below the minimum.
inline std::vector<std::vector<Rational>> complex_axes(const BifilteredComplex& c) {
  std::vector<std::set<Rational>> s(c.params);
  for (const auto& x : c.simplices)
    for (std::size_t k = 0; k < c.params; ++k) s[k].insert(x.grade[k]);
  std::vector<std::vector<Rational>> out;
  for (auto& axis : s) {
    std::vector<Rational> v(axis.begin(), axis.end());
    v.insert(v.begin(), v.empty() ? Rational(-1) : v.front() - Rational(1));
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace mpers::testing
