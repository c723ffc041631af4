#pragma once

// Multivariate affine-quadratic systems: normalization, evaluation, linear
// elimination, text export/import and a complete backtracking decision
// procedure over prime fields.

#include <mpers/exactnum.hpp>

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace mpers {

struct QuadTerm {
  FieldElement coeff;
  std::size_t i = 0;  ///< 0-based, i <= j
  std::size_t j = 0;
  friend bool operator==(const QuadTerm&, const QuadTerm&) = default;
};

struct LinTerm {
  FieldElement coeff;
  std::size_t i = 0;
  friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

/// sum c*x_i*x_j + sum c*x_i + constant = 0
struct QuadEquation {
  std::vector<QuadTerm> quadratic;
  std::vector<LinTerm> linear;
  FieldElement constant;

  bool is_linear() const { return quadratic.empty(); }
  friend bool operator==(const QuadEquation&, const QuadEquation&) = default;
};

/// Accumulates terms of one equation and emits it normalized: terms sorted,
/// like terms merged, zero coefficients dropped.
class EquationBuilder {
 public:
  explicit EquationBuilder(Field f) : field_(f), constant_(FieldElement::zero(f)) {}

  EquationBuilder& quadratic(const FieldElement& c, std::size_t i, std::size_t j) {
    if (j < i) std::swap(i, j);
    add(quad_, std::make_pair(i, j), c);
    return *this;
  }
  EquationBuilder& linear(const FieldElement& c, std::size_t i) {
    add(lin_, i, c);
    return *this;
  }
  EquationBuilder& constant(const FieldElement& c) {
    constant_ += c;
    return *this;
  }

  QuadEquation build() const {
    QuadEquation eq;
    for (const auto& [k, c] : quad_)
      if (!c.is_zero()) eq.quadratic.push_back({c, k.first, k.second});
    for (const auto& [k, c] : lin_)
      if (!c.is_zero()) eq.linear.push_back({c, k});
    eq.constant = constant_;
    return eq;
  }

 private:
  template <class Map, class Key>
  void add(Map& m, const Key& k, const FieldElement& c) {
    auto it = m.find(k);
    if (it == m.end())
      m.emplace(k, c);
    else
      it->second += c;
  }
  Field field_;
  std::map<std::pair<std::size_t, std::size_t>, FieldElement> quad_;
  std::map<std::size_t, FieldElement> lin_;
  FieldElement constant_;
};

struct QuadraticSystem {
  Field field = Field::prime(2);
  std::size_t var_count = 0;
  std::vector<QuadEquation> equations;

  friend bool operator==(const QuadraticSystem&, const QuadraticSystem&) = default;
};

using Assignment = std::vector<FieldElement>;

inline FieldElement evaluate_equation(const QuadEquation& eq, const Assignment& a) {
  FieldElement v = eq.constant;
  for (const auto& t : eq.quadratic) v += t.coeff * a[t.i] * a[t.j];
  for (const auto& t : eq.linear) v += t.coeff * a[t.i];
  return v;
}

/// Index of the first violated equation, or nullopt if `a` satisfies all.
inline std::optional<std::size_t> evaluate(const QuadraticSystem& sys, const Assignment& a) {
  if (a.size() != sys.var_count)
    throw DomainError("assignment has " + std::to_string(a.size()) + " values for " +
                      std::to_string(sys.var_count) + " variables");
  for (const auto& v : a)
    if (!(v.field() == sys.field)) throw DomainError("assignment value in the wrong field");
  for (std::size_t e = 0; e < sys.equations.size(); ++e)
    if (!evaluate_equation(sys.equations[e], a).is_zero()) return e;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Text format

inline std::string export_system(const QuadraticSystem& sys) {
  std::ostringstream os;
  os << "QUADSYS\nfield " << sys.field.str() << "\nvars " << sys.var_count << "\n";
  for (const auto& eq : sys.equations) {
    os << "eq:";
    bool first = true;
    auto sep = [&] {
      os << (first ? " " : "  ");
      first = false;
    };
    for (const auto& t : eq.quadratic) {
      sep();
      os << t.coeff.str() << ' ' << t.i + 1 << ' ' << t.j + 1;
    }
    for (const auto& t : eq.linear) {
      sep();
      os << t.coeff.str() << ' ' << t.i + 1 << " 0";
    }
    if (!eq.constant.is_zero()) {
      sep();
      os << eq.constant.str() << " 0 0";
    }
    os << "\n";
  }
  os << "END\n";
  return os.str();
}

namespace detail {
inline std::string strip_comment(const std::string& line) {
  std::string s = line.substr(0, line.find('#'));
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}
inline std::size_t parse_index(const std::string& tok, const std::string& context) {
  if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
    throw ParseError("bad index '" + tok + "' in " + context);
  return std::stoull(tok);
}
}  // namespace detail

inline QuadraticSystem parse_system(std::istream& in) {
  QuadraticSystem sys;
  std::string line;
  bool header = false, have_field = false, have_vars = false, done = false;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::strip_comment(line);
    if (s.empty()) continue;
    std::string where = "line " + std::to_string(lineno);
    if (done) throw ParseError("content after END at " + where);
    if (!header) {
      if (s != "QUADSYS") throw ParseError("expected QUADSYS at " + where);
      header = true;
      continue;
    }
    if (s == "END") {
      done = true;
      continue;
    }
    std::istringstream ls(s);
    std::string key;
    ls >> key;
    if (key == "field") {
      std::string rest;
      std::getline(ls, rest);
      sys.field = Field::parse(detail::strip_comment(rest));
      have_field = true;
    } else if (key == "vars") {
      std::string tok;
      ls >> tok;
      sys.var_count = detail::parse_index(tok, where);
      have_vars = true;
    } else if (key == "eq:") {
      if (!have_field || !have_vars) throw ParseError("eq: before field/vars at " + where);
      EquationBuilder b(sys.field);
      std::vector<std::string> toks;
      for (std::string t; ls >> t;) toks.push_back(t);
      if (toks.size() % 3) throw ParseError("equation terms must be triples at " + where);
      for (std::size_t k = 0; k < toks.size(); k += 3) {
        FieldElement c(sys.field, Rational::parse(toks[k]));
        std::size_t i = detail::parse_index(toks[k + 1], where);
        std::size_t j = detail::parse_index(toks[k + 2], where);
        if (i > sys.var_count || j > sys.var_count) throw ParseError("variable out of range at " + where);
        if (i == 0 && j == 0)
          b.constant(c);
        else if (j == 0)
          b.linear(c, i - 1);
        else if (i == 0)
          throw ParseError("term with i = 0 and j != 0 at " + where);
        else
          b.quadratic(c, i - 1, j - 1);
      }
      sys.equations.push_back(b.build());
    } else {
      throw ParseError("unknown directive '" + key + "' at " + where);
    }
  }
  if (!header) throw ParseError("missing QUADSYS header");
  if (!done) throw ParseError("missing END");
  return sys;
}

inline QuadraticSystem parse_system(const std::string& text) {
  std::istringstream in(text);
  return parse_system(in);
}

// ---------------------------------------------------------------------------
// Linear elimination

namespace detail {
/// Affine expression sum c_k x_k + constant.
struct Affine {
  std::map<std::size_t, FieldElement> terms;
  FieldElement constant;
};
}  // namespace detail

/// Gaussian-eliminates the purely linear equations and substitutes each pivot
/// variable into the quadratic equations. The result has the same solution
/// set; every pivot variable occurs only in its own defining equation.
inline QuadraticSystem eliminate_linear(const QuadraticSystem& sys) {
  const Field f = sys.field;
  // Reduced echelon form of the linear equations, pivot = largest variable.
  std::vector<detail::Affine> rows;
  std::map<std::size_t, std::size_t> pivot_row;
  bool inconsistent = false;
  for (const auto& eq : sys.equations) {
    if (!eq.is_linear()) continue;
    detail::Affine a{{}, eq.constant};
    for (const auto& t : eq.linear) a.terms.emplace(t.i, t.coeff);
    for (const auto& [p, r] : pivot_row) {
      auto it = a.terms.find(p);
      if (it == a.terms.end()) continue;
      FieldElement c = it->second;
      for (const auto& [k, v] : rows[r].terms) {
        auto jt = a.terms.find(k);
        FieldElement nv = (jt == a.terms.end() ? FieldElement::zero(f) : jt->second) - c * v;
        if (nv.is_zero())
          a.terms.erase(k);
        else
          a.terms[k] = nv;
      }
      a.constant -= c * rows[r].constant;
    }
    if (a.terms.empty()) {
      if (!a.constant.is_zero()) inconsistent = true;
      continue;
    }
    std::size_t p = a.terms.rbegin()->first;
    FieldElement inv = a.terms.at(p).inverse();
    for (auto& [k, v] : a.terms) v *= inv;
    a.constant *= inv;
    for (auto& row : rows) {
      auto it = row.terms.find(p);
      if (it == row.terms.end()) continue;
      FieldElement c = it->second;
      for (const auto& [k, v] : a.terms) {
        auto jt = row.terms.find(k);
        FieldElement nv = (jt == row.terms.end() ? FieldElement::zero(f) : jt->second) - c * v;
        if (nv.is_zero())
          row.terms.erase(k);
        else
          row.terms[k] = nv;
      }
      row.constant -= c * a.constant;
    }
    pivot_row[p] = rows.size();
    rows.push_back(std::move(a));
  }

  QuadraticSystem out{f, sys.var_count, {}};
  if (inconsistent) {
    out.equations.push_back(EquationBuilder(f).constant(FieldElement::one(f)).build());
    return out;
  }
  // x_p = -(sum_{k != p} c_k x_k + constant)
  auto value_of = [&](std::size_t var) {
    detail::Affine e{{}, FieldElement::zero(f)};
    auto it = pivot_row.find(var);
    if (it == pivot_row.end()) {
      e.terms.emplace(var, FieldElement::one(f));
      return e;
    }
    const auto& row = rows[it->second];
    for (const auto& [k, v] : row.terms)
      if (k != var) e.terms.emplace(k, -v);
    e.constant = -row.constant;
    return e;
  };
  for (const auto& row : rows) {
    EquationBuilder b(f);
    for (const auto& [k, v] : row.terms) b.linear(v, k);
    b.constant(row.constant);
    out.equations.push_back(b.build());
  }
  for (const auto& eq : sys.equations) {
    if (eq.is_linear()) continue;
    EquationBuilder b(f);
    b.constant(eq.constant);
    for (const auto& t : eq.linear) {
      auto e = value_of(t.i);
      for (const auto& [k, v] : e.terms) b.linear(t.coeff * v, k);
      b.constant(t.coeff * e.constant);
    }
    for (const auto& t : eq.quadratic) {
      auto ei = value_of(t.i), ej = value_of(t.j);
      for (const auto& [ki, vi] : ei.terms) {
        for (const auto& [kj, vj] : ej.terms) b.quadratic(t.coeff * vi * vj, ki, kj);
        b.linear(t.coeff * vi * ej.constant, ki);
      }
      for (const auto& [kj, vj] : ej.terms) b.linear(t.coeff * ei.constant * vj, kj);
      b.constant(t.coeff * ei.constant * ej.constant);
    }
    out.equations.push_back(b.build());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Finite-field decision procedure

enum class SolveStatus { Solvable, Unsolvable, BudgetExceeded };

struct SolveResult {
  SolveStatus status = SolveStatus::Unsolvable;
  std::optional<Assignment> witness;
  std::uint64_t nodes = 0;
};

inline constexpr std::uint64_t kDefaultBudget = 10'000'000;

namespace detail {

class FiniteFieldSolver {
 public:
  FiniteFieldSolver(const QuadraticSystem& sys, std::uint64_t budget)
      : p_(sys.field.modulus()), n_(sys.var_count), budget_(budget) {
    for (const auto& eq : sys.equations) {
      Eq e;
      for (const auto& t : eq.quadratic) e.quad.push_back({t.i, t.j, t.coeff.residue()});
      for (const auto& t : eq.linear) e.lin.push_back({t.i, t.coeff.residue()});
      e.constant = eq.constant.residue();
      eqs_.push_back(std::move(e));
    }
  }

  SolveResult run() {
    SolveResult result;
    std::vector<long> assign(n_, -1);
    try {
      if (search(assign)) {
        result.status = SolveStatus::Solvable;
        result.witness = Assignment{};
        for (long v : solution_) result.witness->push_back(FieldElement(Field::prime(p_), v));
      } else {
        result.status = SolveStatus::Unsolvable;
      }
    } catch (const BudgetHit&) {
      result.status = SolveStatus::BudgetExceeded;
    }
    result.nodes = nodes_;
    return result;
  }

 private:
  struct BudgetHit {};
  struct QT {
    std::size_t i, j;
    std::uint32_t c;
  };
  struct LT {
    std::size_t i;
    std::uint32_t c;
  };
  struct Eq {
    std::vector<QT> quad;
    std::vector<LT> lin;
    std::uint32_t constant = 0;
  };

  std::uint32_t add(std::uint64_t a, std::uint64_t b) const { return static_cast<std::uint32_t>((a + b) % p_); }
  std::uint32_t mul(std::uint64_t a, std::uint64_t b) const { return static_cast<std::uint32_t>(a * b % p_); }
  std::uint32_t neg(std::uint32_t a) const { return a ? p_ - a : 0; }
  std::uint32_t inv(std::uint32_t a) const { return mod_inverse(a, p_); }

  /// Linearized reduced echelon form of the system under the current partial
  /// assignment. Columns: quadratic monomials, then variables, then constant.
  struct Reduced {
    std::vector<std::pair<std::size_t, std::size_t>> monomials;
    std::vector<std::size_t> vars;
    std::vector<std::vector<std::uint32_t>> rows;
    std::vector<std::size_t> pivots;  // column of each row's pivot
    bool contradiction = false;
  };

  Reduced linearize(const std::vector<long>& a) const {
    Reduced red;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> mono_col;
    std::map<std::size_t, std::size_t> var_col;
    struct Row {
      std::map<std::pair<std::size_t, std::size_t>, std::uint32_t> q;
      std::map<std::size_t, std::uint32_t> l;
      std::uint32_t c = 0;
    };
    std::vector<Row> raw;
    for (const auto& e : eqs_) {
      Row r;
      r.c = e.constant;
      auto addl = [&](std::size_t v, std::uint32_t c) { r.l[v] = add(r.l[v], c); };
      for (const auto& t : e.lin) {
        if (a[t.i] >= 0)
          r.c = add(r.c, mul(t.c, static_cast<std::uint32_t>(a[t.i])));
        else
          addl(t.i, t.c);
      }
      for (const auto& t : e.quad) {
        bool ai = a[t.i] >= 0, aj = a[t.j] >= 0;
        if (ai && aj)
          r.c = add(r.c, mul(t.c, mul(static_cast<std::uint32_t>(a[t.i]), static_cast<std::uint32_t>(a[t.j]))));
        else if (ai)
          addl(t.j, mul(t.c, static_cast<std::uint32_t>(a[t.i])));
        else if (aj)
          addl(t.i, mul(t.c, static_cast<std::uint32_t>(a[t.j])));
        else if (p_ == 2 && t.i == t.j)
          addl(t.i, t.c);  // x^2 = x over Z/2
        else
          r.q[{t.i, t.j}] = add(r.q[{t.i, t.j}], t.c);
      }
      raw.push_back(std::move(r));
    }
    for (const auto& r : raw) {
      for (const auto& [k, c] : r.q)
        if (c) mono_col.emplace(k, 0);
      for (const auto& [k, c] : r.l)
        if (c) var_col.emplace(k, 0);
    }
    std::size_t col = 0;
    for (auto& [k, v] : mono_col) {
      v = col++;
      red.monomials.push_back(k);
    }
    for (auto& [k, v] : var_col) {
      v = col++;
      red.vars.push_back(k);
    }
    const std::size_t width = col + 1;  // last column: constant
    std::vector<std::vector<std::uint32_t>> m;
    for (const auto& r : raw) {
      std::vector<std::uint32_t> row(width, 0);
      for (const auto& [k, c] : r.q)
        if (c) row[mono_col[k]] = c;
      for (const auto& [k, c] : r.l)
        if (c) row[var_col[k]] = c;
      row[col] = r.c;
      bool nonzero = false;
      for (auto x : row) nonzero |= x != 0;
      if (nonzero) m.push_back(std::move(row));
    }
    // Reduced row echelon form.
    std::size_t rank = 0;
    for (std::size_t c = 0; c < col && rank < m.size(); ++c) {
      std::size_t sel = rank;
      while (sel < m.size() && m[sel][c] == 0) ++sel;
      if (sel == m.size()) continue;
      std::swap(m[rank], m[sel]);
      std::uint32_t iv = inv(m[rank][c]);
      for (std::size_t k = c; k < width; ++k) m[rank][k] = mul(m[rank][k], iv);
      for (std::size_t r = 0; r < m.size(); ++r) {
        if (r == rank || m[r][c] == 0) continue;
        std::uint32_t factor = neg(m[r][c]);
        for (std::size_t k = c; k < width; ++k)
          if (m[rank][k]) m[r][k] = add(m[r][k], mul(factor, m[rank][k]));
      }
      red.pivots.push_back(c);
      ++rank;
    }
    for (std::size_t r = rank; r < m.size(); ++r)
      if (m[r][col] != 0) red.contradiction = true;
    m.resize(rank);
    red.rows = std::move(m);
    return red;
  }

  bool search(std::vector<long>& a) {
    if (++nodes_ > budget_) throw BudgetHit{};
    std::vector<std::size_t> forced_here;
    auto undo = [&] {
      for (auto v : forced_here) a[v] = -1;
    };
    Reduced red;
    for (;;) {
      red = linearize(a);
      if (red.contradiction) {
        undo();
        return false;
      }
      const std::size_t nm = red.monomials.size();
      bool forced = false;
      for (std::size_t r = 0; r < red.rows.size(); ++r) {
        if (red.pivots[r] < nm) continue;
        std::size_t count = 0;
        for (std::size_t k = nm; k < nm + red.vars.size(); ++k) count += red.rows[r][k] != 0;
        if (count == 1) {
          std::size_t var = red.vars[red.pivots[r] - nm];
          a[var] = neg(red.rows[r].back());
          forced_here.push_back(var);
          forced = true;
        }
      }
      if (!forced) break;
    }

    const std::size_t nm = red.monomials.size();
    bool any_quadratic = false;
    for (std::size_t r = 0; r < red.rows.size(); ++r) any_quadratic |= red.pivots[r] < nm;
    if (!any_quadratic) {
      // Consistent linear system: free variables 0, pivots from their rows.
      solution_.assign(n_, 0);
      for (std::size_t v = 0; v < n_; ++v)
        if (a[v] >= 0) solution_[v] = a[v];
      for (std::size_t r = 0; r < red.rows.size(); ++r)
        solution_[red.vars[red.pivots[r] - nm]] = neg(red.rows[r].back());
      undo();
      return true;
    }

    // Most-constrained variable among those in quadratic monomials.
    std::map<std::size_t, std::size_t> occurrences;
    for (std::size_t r = 0; r < red.rows.size(); ++r)
      for (std::size_t k = 0; k < nm; ++k)
        if (red.rows[r][k]) {
          ++occurrences[red.monomials[k].first];
          ++occurrences[red.monomials[k].second];
        }
    std::map<std::size_t, std::size_t> linear_pivot_row;
    for (std::size_t r = 0; r < red.rows.size(); ++r)
      if (red.pivots[r] >= nm) linear_pivot_row[red.vars[red.pivots[r] - nm]] = r;
    std::vector<std::pair<std::size_t, std::size_t>> ranked(occurrences.begin(), occurrences.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& x, const auto& y) { return x.second > y.second; });
    std::size_t branch = ranked.front().first;
    bool found = false;
    for (const auto& [v, cnt] : ranked)
      if (!linear_pivot_row.count(v)) {
        branch = v;
        found = true;
        break;
      }
    if (!found) {
      // Every candidate is determined by a linear row; branch on a free variable of that row.
      const auto& row = red.rows[linear_pivot_row.at(branch)];
      for (std::size_t k = nm; k < nm + red.vars.size(); ++k) {
        std::size_t v = red.vars[k - nm];
        if (row[k] && v != branch && !linear_pivot_row.count(v)) {
          branch = v;
          break;
        }
      }
    }
    for (std::uint32_t val = 0; val < p_; ++val) {
      a[branch] = val;
      if (search(a)) {
        a[branch] = -1;
        undo();
        return true;
      }
    }
    a[branch] = -1;
    undo();
    return false;
  }

  std::uint32_t p_;
  std::size_t n_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<Eq> eqs_;
  std::vector<long> solution_;
};

}  // namespace detail

/// Decides solvability over Z/p. Sound and complete within the node budget;
/// a returned witness satisfies every equation.
inline SolveResult solve_finite_field(const QuadraticSystem& sys, std::uint64_t budget = kDefaultBudget) {
  if (sys.field.is_rational())
    throw DomainError("solvability over Q is not decided; export the system instead");
  for (const auto& eq : sys.equations) {
    for (const auto& t : eq.quadratic)
      if (t.i >= sys.var_count || t.j >= sys.var_count) throw DomainError("variable index out of range");
    for (const auto& t : eq.linear)
      if (t.i >= sys.var_count) throw DomainError("variable index out of range");
  }
  return detail::FiniteFieldSolver(sys, budget).run();
}

}  // namespace mpers
