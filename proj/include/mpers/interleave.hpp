#pragma once

// Interleavings of finitely presented modules as solvability of a quadratic
// system. Variables are the entries of six matrices A..F; the equations are
// the entries of
//   A T_M = T_N C,   B T_N = T_M D,   B A - I = T_M E,   A B - I = T_N F,
// where T_M, T_N hold relation coefficient vectors as columns.

#include <mpers/exactnum.hpp>
#include <mpers/presentation.hpp>
#include <mpers/quadsys.hpp>

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mpers {

enum class VarMatrix { A = 0, B, C, D, E, F };

inline char var_matrix_name(VarMatrix m) { return static_cast<char>('A' + static_cast<int>(m)); }

struct VariableShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<bool>> free;         ///< zero pattern
  std::vector<std::vector<long>> var_index;    ///< -1 where forced zero
};

struct VariableRef {
  VarMatrix matrix;
  std::size_t row;
  std::size_t col;
};

struct InterleavingSystem {
  std::array<VariableShape, 6> shapes;
  SparseMatrix t_m;  ///< |G_M| x |R_M|
  SparseMatrix t_n;  ///< |G_N| x |R_N|
  QuadraticSystem system;
  std::vector<VariableRef> variables;  ///< variable index -> matrix entry

  const VariableShape& shape(VarMatrix m) const { return shapes[static_cast<int>(m)]; }
  std::size_t slot_count() const {
    std::size_t s = 0;
    for (const auto& sh : shapes) s += sh.rows * sh.cols;
    return s;
  }
  std::size_t free_count() const { return system.var_count; }
};

namespace detail {

inline SparseMatrix relation_matrix(const Presentation& p) {
  SparseMatrix t = SparseMatrix::zero(p.generators.size(), p.relations.size());
  for (std::size_t j = 0; j < p.relations.size(); ++j) t.columns[j] = p.relations[j].coeffs;
  return t;
}

template <class RowGrades, class ColGrades>
VariableShape make_shape(const RowGrades& rows, const ColGrades& cols, const MonotoneAffineMap& j) {
  VariableShape s;
  s.rows = rows.size();
  s.cols = cols.size();
  s.free.assign(s.rows, std::vector<bool>(s.cols, false));
  s.var_index.assign(s.rows, std::vector<long>(s.cols, -1));
  std::vector<Grade> images;
  images.reserve(cols.size());
  for (const auto& c : cols) images.push_back(j(c.grade));
  for (std::size_t r = 0; r < s.rows; ++r)
    for (std::size_t c = 0; c < s.cols; ++c) s.free[r][c] = leq(rows[r].grade, images[c]);
  return s;
}

}  // namespace detail

/// Builds the system whose solutions are (J1, J2)-interleavings between M and N.
inline InterleavingSystem assemble_system(const Presentation& m, const Presentation& n,
                                          const MonotoneAffineMap& j1, const MonotoneAffineMap& j2) {
  if (m.n != n.n) throw DomainError("presentations have different parameter counts");
  if (!(m.field == n.field)) throw DomainError("presentations are over different fields");
  if (j1.dimension() != m.n || j2.dimension() != m.n) throw DomainError("shift map dimension mismatch");
  require_valid(m);
  require_valid(n);
  const Field f = m.field;
  const auto& gm = m.generators;
  const auto& gn = n.generators;
  const auto& rm = m.relations;
  const auto& rn = n.relations;
  const MonotoneAffineMap j21 = j2.after(j1);
  const MonotoneAffineMap j12 = j1.after(j2);

  InterleavingSystem is;
  using V = VarMatrix;
  is.shapes[0] = detail::make_shape(gn, gm, j1);   // A
  is.shapes[1] = detail::make_shape(gm, gn, j2);   // B
  is.shapes[2] = detail::make_shape(rn, rm, j1);   // C
  is.shapes[3] = detail::make_shape(rm, rn, j2);   // D
  is.shapes[4] = detail::make_shape(rm, gm, j21);  // E
  is.shapes[5] = detail::make_shape(rn, gn, j12);  // F
  is.t_m = detail::relation_matrix(m);
  is.t_n = detail::relation_matrix(n);

  for (int k = 0; k < 6; ++k) {
    auto& sh = is.shapes[k];
    for (std::size_t r = 0; r < sh.rows; ++r)
      for (std::size_t c = 0; c < sh.cols; ++c)
        if (sh.free[r][c]) {
          sh.var_index[r][c] = static_cast<long>(is.variables.size());
          is.variables.push_back({static_cast<V>(k), r, c});
        }
  }
  is.system.field = f;
  is.system.var_count = is.variables.size();

  const FieldElement one = FieldElement::one(f);
  auto var = [&](V mat, std::size_t r, std::size_t c) { return is.shapes[static_cast<int>(mat)].var_index[r][c]; };

  // X T_src = T_dst Y  (X: |G_dst| x |G_src|, Y: |R_dst| x |R_src|)
  auto linear_identity = [&](V x, V y, const SparseMatrix& t_src, const SparseMatrix& t_dst, std::size_t g_dst,
                             std::size_t r_src, std::size_t r_dst) {
    for (std::size_t i = 0; i < g_dst; ++i)
      for (std::size_t k = 0; k < r_src; ++k) {
        EquationBuilder b(f);
        for (const auto& [j, c] : t_src.columns[k])
          if (long v = var(x, i, j); v >= 0) b.linear(c, static_cast<std::size_t>(v));
        for (std::size_t l = 0; l < r_dst; ++l)
          if (auto c = entry(t_dst.columns[l], i))
            if (long v = var(y, l, k); v >= 0) b.linear(-*c, static_cast<std::size_t>(v));
        is.system.equations.push_back(b.build());
      }
  };
  linear_identity(V::A, V::C, is.t_m, is.t_n, gn.size(), rm.size(), rn.size());
  linear_identity(V::B, V::D, is.t_n, is.t_m, gm.size(), rn.size(), rm.size());

  // Y X - I = T_g Z  (Y: |G_g| x |G_h|, X: |G_h| x |G_g|, Z: |R_g| x |G_g|)
  auto quadratic_identity = [&](V y, V x, V z, const SparseMatrix& t_g, std::size_t g_g, std::size_t g_h,
                                std::size_t r_g) {
    for (std::size_t i = 0; i < g_g; ++i)
      for (std::size_t j = 0; j < g_g; ++j) {
        EquationBuilder b(f);
        for (std::size_t l = 0; l < g_h; ++l) {
          long u = var(y, i, l), v = var(x, l, j);
          if (u >= 0 && v >= 0) b.quadratic(one, static_cast<std::size_t>(u), static_cast<std::size_t>(v));
        }
        if (i == j) b.constant(-one);
        for (std::size_t k = 0; k < r_g; ++k)
          if (auto c = entry(t_g.columns[k], i))
            if (long v = var(z, k, j); v >= 0) b.linear(-*c, static_cast<std::size_t>(v));
        is.system.equations.push_back(b.build());
      }
  };
  quadratic_identity(V::B, V::A, V::E, is.t_m, gm.size(), gn.size(), rm.size());
  quadratic_identity(V::A, V::B, V::F, is.t_n, gn.size(), gm.size(), rn.size());
  return is;
}

/// Entry count of the six variable matrices for the given sizes.
inline std::size_t closed_form_slot_count(std::size_t gm, std::size_t rm, std::size_t gn, std::size_t rn) {
  return 2 * gm * gn + 2 * rm * rn + rm * gm + rn * gn;
}
/// Entry count of the four matrix identities.
inline std::size_t closed_form_equation_count(std::size_t gm, std::size_t rm, std::size_t gn, std::size_t rn) {
  return gn * rm + gm * rn + gm * gm + gn * gn;
}

/// Quadratic-system text followed by `# var k = X[i][j]` lines (1-based).
inline std::string export_interleaving_system(const InterleavingSystem& is) {
  std::string out = export_system(is.system);
  for (std::size_t k = 0; k < is.variables.size(); ++k) {
    const auto& v = is.variables[k];
    out += "# var " + std::to_string(k + 1) + " = " + var_matrix_name(v.matrix) + "[" + std::to_string(v.row + 1) +
           "][" + std::to_string(v.col + 1) + "]\n";
  }
  return out;
}

enum class Decision { Yes, No, BudgetExceeded };

inline const char* decision_str(Decision d) {
  switch (d) {
    case Decision::Yes: return "yes";
    case Decision::No: return "no";
    default: return "budget_exceeded";
  }
}

struct DecisionResult {
  Decision decision = Decision::No;
  std::uint64_t nodes = 0;
  std::size_t variables = 0;
  std::size_t equations = 0;
  std::optional<Assignment> witness;
};

namespace detail {
inline Grade minimum_grade(const Presentation& m, const Presentation& n) {
  std::optional<Grade> lo;
  auto visit = [&](const Grade& g) { lo = lo ? meet(*lo, g) : g; };
  for (const auto* p : {&m, &n}) {
    for (const auto& g : p->generators) visit(g.grade);
    for (const auto& r : p->relations) visit(r.grade);
  }
  return lo ? *lo : Grade(m.n, Rational(0));
}

inline DecisionResult run_decision(const InterleavingSystem& is, std::uint64_t budget) {
  DecisionResult out;
  out.variables = is.system.var_count;
  out.equations = is.system.equations.size();
  SolveResult r = solve_finite_field(is.system, budget);
  out.nodes = r.nodes;
  out.decision = r.status == SolveStatus::Solvable     ? Decision::Yes
                 : r.status == SolveStatus::Unsolvable ? Decision::No
                                                       : Decision::BudgetExceeded;
  out.witness = std::move(r.witness);
  return out;
}

inline void require_prime_field(const Presentation& m, const Presentation& n) {
  if (!(m.field == n.field)) throw DomainError("presentations are over different fields");
  if (m.field.is_rational()) throw DomainError("interleaving decisions require a prime field");
}
}  // namespace detail

/// (J1, J2)-interleaving decision. J1 and J2 must satisfy J(a) >= a at every
/// grade at or above the smallest grade occurring in M or N.
inline DecisionResult decide_generalized(const Presentation& m, const Presentation& n, const MonotoneAffineMap& j1,
                                         const MonotoneAffineMap& j2, std::uint64_t budget = kDefaultBudget) {
  detail::require_prime_field(m, n);
  if (m.n != n.n) throw DomainError("presentations have different parameter counts");
  Presentation mm = minimize_presentation(m), nn = minimize_presentation(n);
  Grade lo = detail::minimum_grade(mm, nn);
  if (!j1.is_increasing_above(lo) || !j2.is_increasing_above(lo))
    throw DomainError("shift maps are not increasing on the grades in use");
  return detail::run_decision(assemble_system(mm, nn, j1, j2), budget);
}

/// epsilon-interleaving decision.
inline DecisionResult decide_interleaving(const Presentation& m, const Presentation& n, const Rational& eps,
                                          std::uint64_t budget = kDefaultBudget) {
  if (eps.sign() < 0) throw DomainError("epsilon must be >= 0");
  detail::require_prime_field(m, n);
  if (m.n != n.n) throw DomainError("presentations have different parameter counts");
  auto j = MonotoneAffineMap::translation(m.n, eps);
  return detail::run_decision(assemble_system(minimize_presentation(m), minimize_presentation(n), j, j), budget);
}

/// Sorted candidate values for the interleaving distance, including 0 and +inf.
inline std::vector<ExtendedReal> candidate_set(const Presentation& m, const Presentation& n) {
  if (m.n != n.n) throw DomainError("presentations have different parameter counts");
  CriticalGrades um = critical_grades(m), un = critical_grades(n);
  std::set<Rational> values{Rational(0)};
  for (std::size_t i = 0; i < m.n; ++i) {
    const auto& a = um.per_axis[i];
    const auto& b = un.per_axis[i];
    for (const auto& x : a)
      for (const auto& y : b) values.insert(abs(x - y));
    for (const auto* s : {&a, &b})
      for (const auto& x : *s)
        for (const auto& y : *s) values.insert(abs(x - y) / Rational(2));
  }
  std::vector<ExtendedReal> out(values.begin(), values.end());
  out.push_back(ExtendedReal::infinity());
  return out;
}

struct DistanceResult {
  bool exact = true;
  ExtendedReal value;  ///< d_I when exact
  /// When !exact: d_I lies in (lower, upper]; lower is the last candidate
  /// answering no (or nullopt), upper the candidate whose decision ran out of budget.
  std::optional<ExtendedReal> lower;
  ExtendedReal upper;
  std::size_t candidates = 0;
  std::size_t decisions = 0;
  std::uint64_t nodes = 0;
  std::vector<std::pair<Rational, Decision>> probes;
};

/// Interleaving distance by binary search over the candidate set.
inline DistanceResult interleaving_distance(const Presentation& m, const Presentation& n,
                                            std::uint64_t budget = kDefaultBudget) {
  detail::require_prime_field(m, n);
  Presentation mm = minimize_presentation(m), nn = minimize_presentation(n);
  std::vector<ExtendedReal> cand = candidate_set(mm, nn);
  std::vector<Rational> finite;
  for (const auto& c : cand)
    if (c.is_finite()) finite.push_back(c.value());

  DistanceResult out;
  out.candidates = cand.size();
  // Invariant: finite[lo] answers no (lo = -1: none known); finite[hi] answers yes (hi = size: +inf).
  long lo = -1, hi = static_cast<long>(finite.size());
  while (hi - lo > 1) {
    long mid = lo + (hi - lo) / 2;
    DecisionResult d = decide_interleaving(mm, nn, finite[static_cast<std::size_t>(mid)], budget);
    ++out.decisions;
    out.nodes += d.nodes;
    out.probes.emplace_back(finite[static_cast<std::size_t>(mid)], d.decision);
    if (d.decision == Decision::BudgetExceeded) {
      out.exact = false;
      if (lo >= 0) out.lower = ExtendedReal(finite[static_cast<std::size_t>(lo)]);
      out.upper = finite[static_cast<std::size_t>(mid)];
      return out;
    }
    if (d.decision == Decision::Yes)
      hi = mid;
    else
      lo = mid;
  }
  out.value = hi == static_cast<long>(finite.size()) ? ExtendedReal::infinity()
                                                     : ExtendedReal(finite[static_cast<std::size_t>(hi)]);
  return out;
}

}  // namespace mpers
