#pragma once

// Finitely presented n-parameter persistence modules <G | R>: graded sets,
// homogeneous elements, graded matrices, shifts, restrictions, pointwise
// linear algebra and presentation minimization.

#include <mpers/exactnum.hpp>
#include <mpers/linalg.hpp>

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace mpers {

/// A point of R^n, ordered componentwise.
using Grade = std::vector<Rational>;

inline bool leq(const Grade& a, const Grade& b) {
  if (a.size() != b.size()) throw DomainError("grades of different lengths compared");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (b[i] < a[i]) return false;
  return true;
}
inline bool strictly_less_everywhere(const Grade& a, const std::vector<ExtendedReal>& u) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(ExtendedReal(a[i]) < u[i])) return false;
  return true;
}
inline Grade join(const Grade& a, const Grade& b) {
  Grade out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = max(a[i], b[i]);
  return out;
}
inline Grade meet(const Grade& a, const Grade& b) {
  Grade out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = min(a[i], b[i]);
  return out;
}
inline Grade translate(const Grade& a, const Rational& eps) {
  Grade out = a;
  for (auto& x : out) x += eps;
  return out;
}
inline std::string grade_str(const Grade& g) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) s += (i ? " " : "") + g[i].str();
  return s;
}

struct GradedItem {
  std::string name;
  Grade grade;
};

/// Ordered n-graded set; names are unique.
using GradedSet = std::vector<GradedItem>;

/// Homogeneous element of a free module: a grade and coefficients over the
/// generators, zero on every generator whose grade is not <= grade.
struct HomElement {
  std::string name;
  Grade grade;
  SparseVector coeffs;
};

/// Order-preserving affine diagonal map J(x)_i = scales_i * x_i + offsets_i.
class MonotoneAffineMap {
 public:
  MonotoneAffineMap() = default;
  MonotoneAffineMap(std::vector<Rational> scales, std::vector<Rational> offsets)
      : scales_(std::move(scales)), offsets_(std::move(offsets)) {
    if (scales_.size() != offsets_.size()) throw DomainError("affine map scale/offset length mismatch");
    for (const auto& c : scales_)
      if (c.sign() <= 0) throw DomainError("affine map scale must be positive");
  }
  static MonotoneAffineMap identity(std::size_t n) {
    return MonotoneAffineMap(std::vector<Rational>(n, Rational(1)), std::vector<Rational>(n, Rational(0)));
  }
  static MonotoneAffineMap translation(std::size_t n, const Rational& eps) {
    return MonotoneAffineMap(std::vector<Rational>(n, Rational(1)), std::vector<Rational>(n, eps));
  }
  /// (a, b) -> (a, 2b) on R^{n+1}: doubles the last (scale) coordinate.
  static MonotoneAffineMap scale_doubling(std::size_t n_plus_one) {
    MonotoneAffineMap j = identity(n_plus_one);
    j.scales_.back() = Rational(2);
    return j;
  }

  std::size_t dimension() const { return scales_.size(); }
  const std::vector<Rational>& scales() const { return scales_; }
  const std::vector<Rational>& offsets() const { return offsets_; }

  Grade operator()(const Grade& a) const {
    check(a);
    Grade out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = scales_[i] * a[i] + offsets_[i];
    return out;
  }
  Grade inverse(const Grade& a) const {
    check(a);
    Grade out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - offsets_[i]) / scales_[i];
    return out;
  }
  MonotoneAffineMap inverse_map() const {
    std::vector<Rational> c(dimension()), u(dimension());
    for (std::size_t i = 0; i < dimension(); ++i) {
      c[i] = Rational(1) / scales_[i];
      u[i] = -offsets_[i] / scales_[i];
    }
    return MonotoneAffineMap(std::move(c), std::move(u));
  }
  /// (this ∘ inner)(x) = this(inner(x))
  MonotoneAffineMap after(const MonotoneAffineMap& inner) const {
    if (inner.dimension() != dimension()) throw DomainError("composing affine maps of different dimension");
    std::vector<Rational> c(dimension()), u(dimension());
    for (std::size_t i = 0; i < dimension(); ++i) {
      c[i] = scales_[i] * inner.scales_[i];
      u[i] = scales_[i] * inner.offsets_[i] + offsets_[i];
    }
    return MonotoneAffineMap(std::move(c), std::move(u));
  }
  /// J(a) >= a for every a >= lower (componentwise).
  bool is_increasing_above(const Grade& lower) const {
    check(lower);
    for (std::size_t i = 0; i < dimension(); ++i) {
      if (scales_[i] < Rational(1)) return false;
      if ((scales_[i] - Rational(1)) * lower[i] + offsets_[i] < Rational(0)) return false;
    }
    return true;
  }

  friend bool operator==(const MonotoneAffineMap&, const MonotoneAffineMap&) = default;

 private:
  void check(const Grade& a) const {
    if (a.size() != dimension()) throw DomainError("affine map applied to a grade of wrong length");
  }
  std::vector<Rational> scales_;
  std::vector<Rational> offsets_;
};

/// A presentation <generators | relations> of an n-parameter module over a field.
struct Presentation {
  std::size_t n = 1;
  Field field = Field::prime(2);
  GradedSet generators;
  std::vector<HomElement> relations;

  static Presentation zero(std::size_t n, Field f) { return Presentation{n, f, {}, {}}; }
};

struct Diagnostic {
  std::string where;  ///< e.g. "relation 2, coefficient on g3"
  std::string message;
};

/// First violated invariant, or nullopt when the presentation is valid.
inline std::optional<Diagnostic> validate_presentation(const Presentation& p) {
  if (p.n == 0) return Diagnostic{"header", "parameter count must be >= 1"};
  std::unordered_set<std::string> names;
  for (std::size_t j = 0; j < p.generators.size(); ++j) {
    const auto& g = p.generators[j];
    std::string where = "generator " + std::to_string(j + 1) + " (" + g.name + ")";
    if (g.grade.size() != p.n) return Diagnostic{where, "grade has wrong length"};
    if (!names.insert(g.name).second) return Diagnostic{where, "duplicate name"};
  }
  for (std::size_t r = 0; r < p.relations.size(); ++r) {
    const auto& rel = p.relations[r];
    std::string where = "relation " + std::to_string(r + 1) + " (" + rel.name + ")";
    if (rel.grade.size() != p.n) return Diagnostic{where, "grade has wrong length"};
    if (!rel.name.empty() && !names.insert(rel.name).second) return Diagnostic{where, "duplicate name"};
    std::size_t last = 0;
    for (std::size_t k = 0; k < rel.coeffs.size(); ++k) {
      const auto& [j, c] = rel.coeffs[k];
      if (j >= p.generators.size()) return Diagnostic{where, "coefficient on unknown generator"};
      if (k && j <= last) return Diagnostic{where, "coefficients not sorted by generator"};
      last = j;
      std::string coeff_where = where + ", coefficient on " + p.generators[j].name;
      if (!(c.field() == p.field)) return Diagnostic{coeff_where, "coefficient in the wrong field"};
      if (c.is_zero()) return Diagnostic{coeff_where, "explicit zero coefficient"};
      if (!leq(p.generators[j].grade, rel.grade))
        return Diagnostic{coeff_where, "non-homogeneous: generator grade is not <= relation grade"};
    }
  }
  return std::nullopt;
}

inline void require_valid(const Presentation& p) {
  if (auto d = validate_presentation(p)) throw DomainError("invalid presentation: " + d->where + ": " + d->message);
}

/// M_a as span(generators <= a) / span(relations <= a).
inline Subquotient pointwise_subquotient(const Presentation& p, const Grade& a) {
  std::vector<SparseVector> big, small;
  for (std::size_t j = 0; j < p.generators.size(); ++j)
    if (leq(p.generators[j].grade, a)) big.push_back(unit_vector(p.field, j));
  for (const auto& r : p.relations)
    if (leq(r.grade, a)) small.push_back(r.coeffs);
  return Subquotient(p.field, big, small);
}

struct PointwiseSpace {
  std::size_t dim = 0;
  /// Representatives over the generators of an echelon basis of M_a.
  std::vector<SparseVector> basis;
};

inline PointwiseSpace pointwise_space(const Presentation& p, const Grade& a) {
  if (a.size() != p.n) throw DomainError("grade of wrong length");
  Subquotient s = pointwise_subquotient(p, a);
  PointwiseSpace out;
  out.dim = s.dim();
  for (std::size_t k = 0; k < s.dim(); ++k) out.basis.push_back(s.representative(k));
  return out;
}

/// Rank of the transition map M_a -> M_b.
inline std::size_t transition_rank(const Presentation& p, const Grade& a, const Grade& b) {
  if (a.size() != p.n || b.size() != p.n) throw DomainError("grade of wrong length");
  if (!leq(a, b)) throw DomainError("transition_rank requires a <= b");
  std::vector<SparseVector> rel_b;
  for (const auto& r : p.relations)
    if (leq(r.grade, b)) rel_b.push_back(r.coeffs);
  std::vector<SparseVector> both = rel_b;
  for (std::size_t j = 0; j < p.generators.size(); ++j)
    if (leq(p.generators[j].grade, a)) both.push_back(unit_vector(p.field, j));
  return rank_of(p.field, both) - rank_of(p.field, rel_b);
}

/// M(J): regrades every generator and relation by J^{-1}, so M(J)_a = M_{J(a)}.
inline Presentation shift_presentation(const Presentation& p, const MonotoneAffineMap& j) {
  if (j.dimension() != p.n) throw DomainError("shift map dimension mismatch");
  Presentation out = p;
  for (auto& g : out.generators) g.grade = j.inverse(g.grade);
  for (auto& r : out.relations) r.grade = j.inverse(r.grade);
  return out;
}

/// R_u(M): agrees with M strictly below u and vanishes elsewhere.
inline Presentation restrict_presentation(const Presentation& p, const std::vector<ExtendedReal>& u) {
  if (u.size() != p.n) throw DomainError("restriction bound of wrong length");
  Presentation out = p;
  std::unordered_set<std::string> names;
  for (const auto& g : p.generators) names.insert(g.name);
  for (const auto& r : p.relations) names.insert(r.name);
  for (std::size_t j = 0; j < p.generators.size(); ++j) {
    for (std::size_t axis = 0; axis < p.n; ++axis) {
      if (u[axis].is_pos_inf()) continue;
      HomElement kill;
      kill.grade = p.generators[j].grade;
      if (u[axis].is_finite()) kill.grade[axis] = max(kill.grade[axis], u[axis].value());
      kill.coeffs = unit_vector(p.field, j);
      std::string base = "restrict_" + p.generators[j].name + "_" + std::to_string(axis + 1);
      kill.name = base;
      for (int k = 2; names.count(kill.name); ++k) kill.name = base + "_" + std::to_string(k);
      names.insert(kill.name);
      out.relations.push_back(std::move(kill));
    }
  }
  return out;
}

/// Direct sum; generator and relation names are prefixed by the summand index
/// when they would collide.
inline Presentation direct_sum(const std::vector<Presentation>& ps, std::size_t n = 1,
                               Field f = Field::prime(2)) {
  if (ps.empty()) return Presentation::zero(n, f);
  Presentation out = Presentation::zero(ps.front().n, ps.front().field);
  std::unordered_set<std::string> names;
  auto fresh = [&names](std::string name, std::size_t summand) {
    if (names.count(name)) name = "s" + std::to_string(summand + 1) + "_" + name;
    for (int k = 2; names.count(name); ++k) name += "_" + std::to_string(k);
    names.insert(name);
    return name;
  };
  for (std::size_t s = 0; s < ps.size(); ++s) {
    const auto& p = ps[s];
    if (p.n != out.n) throw DomainError("direct sum of modules with different parameter counts");
    if (!(p.field == out.field)) throw DomainError("direct sum of modules over different fields");
    std::size_t offset = out.generators.size();
    for (const auto& g : p.generators) out.generators.push_back({fresh(g.name, s), g.grade});
    for (const auto& r : p.relations) {
      HomElement rel{fresh(r.name, s), r.grade, {}};
      for (const auto& [j, c] : r.coeffs) rel.coeffs.emplace_back(j + offset, c);
      out.relations.push_back(std::move(rel));
    }
  }
  return out;
}

namespace detail {
inline bool lex_less(const Grade& a, const Grade& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}
/// Indices of `items` sorted by (grade lexicographic, input order).
template <class Items>
std::vector<std::size_t> grade_order(const Items& items) {
  std::vector<std::size_t> idx(items.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return lex_less(items[a].grade, items[b].grade); });
  return idx;
}
}  // namespace detail

/// Minimal presentation of the same module. First cancels generator/relation
/// pairs of equal grade joined by a nonzero coefficient, then drops relations
/// that the other relations already generate.
inline Presentation minimize_presentation(const Presentation& input) {
  require_valid(input);
  Presentation p = input;
  const Field f = p.field;

  // Cancel generators against relations of the same grade.
  for (;;) {
    bool changed = false;
    for (std::size_t ri : detail::grade_order(p.relations)) {
      const HomElement& r = p.relations[ri];
      std::optional<std::size_t> pivot;
      for (const auto& [j, c] : r.coeffs)
        if (p.generators[j].grade == r.grade) pivot = j;  // last such generator
      if (!pivot) continue;
      const std::size_t g = *pivot;
      const FieldElement cg = *entry(r.coeffs, g);
      const SparseVector rel = r.coeffs;
      for (std::size_t k = 0; k < p.relations.size(); ++k) {
        if (k == ri) continue;
        if (auto c = entry(p.relations[k].coeffs, g))
          p.relations[k].coeffs = axpy(p.relations[k].coeffs, -(*c / cg), rel);
      }
      p.relations.erase(p.relations.begin() + static_cast<std::ptrdiff_t>(ri));
      p.generators.erase(p.generators.begin() + static_cast<std::ptrdiff_t>(g));
      for (auto& rr : p.relations) {
        for (auto& [j, c] : rr.coeffs)
          if (j > g) --j;
      }
      changed = true;
      break;
    }
    if (!changed) break;
  }

  // Drop relations lying in the submodule generated by the others.
  for (;;) {
    bool changed = false;
    auto order = detail::grade_order(p.relations);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const std::size_t ri = *it;
      const HomElement& r = p.relations[ri];
      EchelonBasis others(f);
      for (std::size_t k = 0; k < p.relations.size(); ++k)
        if (k != ri && leq(p.relations[k].grade, r.grade)) others.insert(p.relations[k].coeffs);
      if (others.contains(r.coeffs)) {
        p.relations.erase(p.relations.begin() + static_cast<std::ptrdiff_t>(ri));
        changed = true;
        break;
      }
    }
    if (!changed) break;
  }
  return p;
}

struct CriticalGrades {
  std::vector<std::set<Rational>> per_axis;  ///< U^i
  std::vector<Grade> grades;                 ///< U, sorted and deduplicated
};

/// Grades of the generators and relations of a minimal presentation.
inline CriticalGrades critical_grades(const Presentation& p) {
  Presentation m = minimize_presentation(p);
  CriticalGrades out;
  out.per_axis.resize(p.n);
  std::set<Grade> all;
  auto add = [&](const Grade& g) {
    all.insert(g);
    for (std::size_t i = 0; i < g.size(); ++i) out.per_axis[i].insert(g[i]);
  };
  for (const auto& g : m.generators) add(g.grade);
  for (const auto& r : m.relations) add(r.grade);
  out.grades.assign(all.begin(), all.end());
  return out;
}

/// Sorted multiset of generator grades and of relation grades.
inline std::pair<std::vector<Grade>, std::vector<Grade>> grade_multisets(const Presentation& p) {
  std::vector<Grade> gens, rels;
  for (const auto& g : p.generators) gens.push_back(g.grade);
  for (const auto& r : p.relations) rels.push_back(r.grade);
  std::sort(gens.begin(), gens.end());
  std::sort(rels.begin(), rels.end());
  return {gens, rels};
}

/// Interval module C(birth, death) = <g@birth | g@death>; death may be +inf.
inline Presentation interval_presentation(const Rational& birth, const ExtendedReal& death,
                                          Field f = Field::prime(2)) {
  Presentation p = Presentation::zero(1, f);
  p.generators.push_back({"g", {birth}});
  if (death.is_finite()) {
    if (!(birth < death.value())) throw DomainError("interval with death <= birth");
    p.relations.push_back({"r", {death.value()}, unit_vector(f, 0)});
  }
  return p;
}

/// Matrix of a morphism between free modules in chosen ordered bases: rows
/// follow `row_basis` (read as shifted by -shift), columns follow `col_basis`.
struct GradedMatrix {
  Field field = Field::prime(2);
  GradedSet row_basis;
  GradedSet col_basis;
  std::vector<std::vector<FieldElement>> entries;  ///< row-major
  Grade shift;

  /// Entry (i, j) may be nonzero only if grade(row i) <= grade(col j) + shift.
  bool is_free(std::size_t i, std::size_t j) const {
    Grade c = col_basis[j].grade;
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += shift[k];
    return leq(row_basis[i].grade, c);
  }
  bool respects_zero_pattern() const {
    for (std::size_t i = 0; i < row_basis.size(); ++i)
      for (std::size_t j = 0; j < col_basis.size(); ++j)
        if (!entries[i][j].is_zero() && !is_free(i, j)) return false;
    return true;
  }
};

/// Product of graded matrices (outer after inner): the shifts add.
inline GradedMatrix compose(const GradedMatrix& outer, const GradedMatrix& inner) {
  if (outer.col_basis.size() != inner.row_basis.size())
    throw DomainError("graded matrix shapes do not compose");
  for (std::size_t k = 0; k < outer.col_basis.size(); ++k)
    if (outer.col_basis[k].grade != inner.row_basis[k].grade)
      throw DomainError("graded matrix bases do not compose");
  GradedMatrix out;
  out.field = outer.field;
  out.row_basis = outer.row_basis;
  out.col_basis = inner.col_basis;
  out.shift = outer.shift;
  for (std::size_t k = 0; k < out.shift.size(); ++k) out.shift[k] += inner.shift[k];
  out.entries.assign(out.row_basis.size(),
                     std::vector<FieldElement>(out.col_basis.size(), FieldElement::zero(out.field)));
  for (std::size_t i = 0; i < out.row_basis.size(); ++i)
    for (std::size_t j = 0; j < out.col_basis.size(); ++j)
      for (std::size_t k = 0; k < inner.row_basis.size(); ++k)
        out.entries[i][j] += outer.entries[i][k] * inner.entries[k][j];
  return out;
}

}  // namespace mpers
