#pragma once

// Text formats: presentations, persistence diagrams, complexes, grid modules
// and CSV point/function files. Every emitter is deterministic and its parser
// inverts it.

#include <mpers/exactnum.hpp>
#include <mpers/filtration.hpp>
#include <mpers/homology.hpp>
#include <mpers/onedim.hpp>
#include <mpers/presentation.hpp>
#include <mpers/quadsys.hpp>

#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace mpers {

namespace detail {

inline std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

/// Non-comment, non-blank lines with their 1-based line numbers.
inline std::vector<std::pair<std::size_t, std::string>> content_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    std::string s = strip_comment(line);
    if (!s.empty()) out.emplace_back(n, s);
  }
  return out;
}

inline std::string at_line(std::size_t n) { return " at line " + std::to_string(n); }

inline Grade parse_grade(const std::vector<std::string>& toks, std::size_t from, std::size_t to, std::size_t line) {
  Grade g;
  for (std::size_t k = from; k < to; ++k) {
    try {
      g.push_back(Rational::parse(toks[k]));
    } catch (const ParseError& e) {
      throw ParseError(std::string(e.what()) + at_line(line));
    }
  }
  return g;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Presentations

inline std::string emit_presentation(const Presentation& p) {
  std::ostringstream os;
  os << "PRESENTATION\nn " << p.n << "\nfield " << p.field.str() << "\n";
  for (const auto& g : p.generators) os << "generator " << g.name << " " << grade_str(g.grade) << "\n";
  for (const auto& r : p.relations) {
    os << "relation " << r.name << " " << grade_str(r.grade) << " :";
    for (std::size_t k = 0; k < r.coeffs.size(); ++k)
      os << (k ? "  " : " ") << p.generators[r.coeffs[k].first].name << " " << r.coeffs[k].second.str();
    os << "\n";
  }
  os << "END\n";
  return os.str();
}

/// Parses the presentation format; semantic checks are left to validate_presentation.
inline Presentation parse_presentation(std::istream& in) {
  auto lines = detail::content_lines(in);
  if (lines.empty() || lines.front().second != "PRESENTATION") throw ParseError("expected PRESENTATION header");
  Presentation p;
  bool have_n = false, have_field = false, done = false;
  std::map<std::string, std::size_t> gen_index;
  std::map<std::string, bool> rel_names;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto& [n, s] = lines[li];
    if (done) throw ParseError("content after END" + detail::at_line(n));
    if (s == "END") {
      done = true;
      continue;
    }
    auto t = detail::tokens(s);
    if (t[0] == "n") {
      if (t.size() != 2) throw ParseError("malformed n line" + detail::at_line(n));
      Rational v = Rational::parse(t[1]);
      if (!v.is_integer() || v.sign() <= 0 || v > Rational(64)) throw ParseError("bad parameter count" + detail::at_line(n));
      p.n = v.numerator().get_ui();
      have_n = true;
    } else if (t[0] == "field") {
      p.field = Field::parse(detail::strip_comment(s.substr(5)));
      have_field = true;
    } else if (t[0] == "generator") {
      if (!have_n || !have_field) throw ParseError("generator before n/field" + detail::at_line(n));
      if (t.size() != p.n + 2) throw ParseError("generator needs a name and " + std::to_string(p.n) + " coordinates" + detail::at_line(n));
      if (!gen_index.emplace(t[1], p.generators.size()).second)
        throw ParseError("duplicate generator '" + t[1] + "'" + detail::at_line(n));
      p.generators.push_back({t[1], detail::parse_grade(t, 2, t.size(), n)});
    } else if (t[0] == "relation") {
      if (!have_n || !have_field) throw ParseError("relation before n/field" + detail::at_line(n));
      if (t.size() < p.n + 3 || t[p.n + 2] != ":")
        throw ParseError("relation needs a name, " + std::to_string(p.n) + " coordinates and ':'" + detail::at_line(n));
      if (!rel_names.emplace(t[1], true).second) throw ParseError("duplicate relation '" + t[1] + "'" + detail::at_line(n));
      HomElement r{t[1], detail::parse_grade(t, 2, p.n + 2, n), {}};
      if ((t.size() - p.n - 3) % 2) throw ParseError("relation coefficients must be name/value pairs" + detail::at_line(n));
      std::map<std::size_t, FieldElement> acc;
      for (std::size_t k = p.n + 3; k < t.size(); k += 2) {
        auto it = gen_index.find(t[k]);
        if (it == gen_index.end()) throw ParseError("unknown generator '" + t[k] + "'" + detail::at_line(n));
        FieldElement c(p.field, Rational::parse(t[k + 1]));
        auto [pos, fresh] = acc.emplace(it->second, c);
        if (!fresh) pos->second += c;
      }
      for (const auto& [g, c] : acc)
        if (!c.is_zero()) r.coeffs.emplace_back(g, c);
      p.relations.push_back(std::move(r));
    } else {
      throw ParseError("unknown directive '" + t[0] + "'" + detail::at_line(n));
    }
  }
  if (!done) throw ParseError("missing END");
  if (!have_n || !have_field) throw ParseError("presentation needs n and field lines");
  return p;
}

inline Presentation parse_presentation(const std::string& text) {
  std::istringstream in(text);
  return parse_presentation(in);
}

// ---------------------------------------------------------------------------
// Diagrams

inline std::string emit_diagram(const PersistenceDiagram& d) {
  std::ostringstream os;
  for (const auto& p : canonical_diagram(d.points).points)
    os << p.birth.str() << " " << p.death.str() << " " << p.multiplicity << "\n";
  return os.str();
}

inline PersistenceDiagram parse_diagram(std::istream& in) {
  std::vector<DiagramPoint> pts;
  for (const auto& [n, s] : detail::content_lines(in)) {
    auto t = detail::tokens(s);
    if (t.size() != 3) throw ParseError("diagram line needs birth death multiplicity" + detail::at_line(n));
    Rational m = Rational::parse(t[2]);
    if (!m.is_integer() || m.sign() <= 0) throw ParseError("multiplicity must be a positive integer" + detail::at_line(n));
    DiagramPoint p{ExtendedReal::parse(t[0]), ExtendedReal::parse(t[1]), m.numerator().get_ui()};
    try {
      validate_point(p);
    } catch (const DomainError& e) {
      throw ParseError(std::string(e.what()) + detail::at_line(n));
    }
    pts.push_back(p);
  }
  return canonical_diagram(pts);
}

inline PersistenceDiagram parse_diagram(const std::string& text) {
  std::istringstream in(text);
  return parse_diagram(in);
}

// ---------------------------------------------------------------------------
// Complexes

inline std::string emit_complex(const BifilteredComplex& c) {
  std::ostringstream os;
  os << "# complex params " << c.params << "\n";
  for (const auto& s : c.simplices) {
    for (std::size_t k = 0; k < s.vertices.size(); ++k) os << (k ? "," : "") << s.vertices[k];
    os << " : " << grade_str(s.grade) << "\n";
  }
  return os.str();
}

/// Parameter count comes from the `# complex params N` header, else from the
/// first simplex, else 2.
inline BifilteredComplex parse_complex(std::istream& in) {
  BifilteredComplex c;
  std::optional<std::size_t> params;
  std::string line;
  std::vector<std::pair<std::size_t, std::string>> body;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    auto t = detail::tokens(line);
    if (t.size() == 4 && t[0] == "#" && t[1] == "complex" && t[2] == "params") {
      params = detail::parse_index(t[3], "complex header" + detail::at_line(n));
      continue;
    }
    std::string s = detail::strip_comment(line);
    if (!s.empty()) body.emplace_back(n, s);
  }
  for (const auto& [n, s] : body) {
    auto colon = s.find(':');
    if (colon == std::string::npos) throw ParseError("simplex line needs ':'" + detail::at_line(n));
    Simplex simplex;
    std::stringstream vs(detail::strip_comment(s.substr(0, colon)));
    for (std::string v; std::getline(vs, v, ',');) {
      auto tv = detail::tokens(v);
      if (tv.size() != 1) throw ParseError("bad vertex list" + detail::at_line(n));
      simplex.vertices.push_back(detail::parse_index(tv[0], "vertex list" + detail::at_line(n)));
    }
    auto g = detail::tokens(s.substr(colon + 1));
    simplex.grade = detail::parse_grade(g, 0, g.size(), n);
    if (!params) params = simplex.grade.size();
    if (simplex.grade.size() != *params) throw ParseError("simplex grade of wrong length" + detail::at_line(n));
    c.simplices.push_back(std::move(simplex));
  }
  c.params = params ? *params : 2;
  try {
    validate_complex(c);
  } catch (const DomainError& e) {
    throw ParseError(std::string("invalid complex: ") + e.what());
  }
  return c;
}

inline BifilteredComplex parse_complex(const std::string& text) {
  std::istringstream in(text);
  return parse_complex(in);
}

// ---------------------------------------------------------------------------
// Grid modules

inline std::string emit_grid_module(const GridModule& g) {
  std::ostringstream os;
  os << "GRIDMODULE\nfield " << g.field.str() << "\nparams " << g.grid.rank() << "\n";
  for (std::size_t k = 0; k < g.grid.rank(); ++k) {
    os << "axis " << k << " :";
    for (const auto& x : g.grid.axes[k]) os << " " << x.str();
    os << "\n";
  }
  auto idx_str = [&](std::size_t p) {
    std::string s;
    for (std::size_t i : g.grid.unflatten(p)) s += " " + std::to_string(i);
    return s;
  };
  for (std::size_t p = 0; p < g.grid.size(); ++p) os << "dim" << idx_str(p) << " = " << g.dims[p] << "\n";
  for (std::size_t k = 0; k < g.grid.rank(); ++k)
    for (std::size_t p = 0; p < g.grid.size(); ++p) {
      if (!g.has_successor(p, k)) continue;
      const SparseMatrix& m = g.transitions[k][p];
      const std::size_t rows = g.dims[p + g.grid.stride(k)], cols = g.dims[p];
      os << "map " << k << idx_str(p) << " : " << rows << " " << cols << "\n";  // rows follow only if both are positive
      for (std::size_t r = 0; r < rows && cols > 0; ++r) {
        for (std::size_t c = 0; c < cols; ++c) os << (c ? " " : "") << m.at(r, c, g.field).str();
        os << "\n";
      }
    }
  os << "END\n";
  return os.str();
}

inline GridModule parse_grid_module(std::istream& in) {
  auto lines = detail::content_lines(in);
  if (lines.empty() || lines.front().second != "GRIDMODULE") throw ParseError("expected GRIDMODULE header");
  GridModule g;
  std::size_t li = 1, params = 0;
  auto next = [&]() -> const std::pair<std::size_t, std::string>& {
    if (li >= lines.size()) throw ParseError("unexpected end of grid module");
    return lines[li++];
  };
  {
    const auto& [n, s] = next();
    if (s.rfind("field", 0) != 0) throw ParseError("expected field line" + detail::at_line(n));
    g.field = Field::parse(detail::strip_comment(s.substr(5)));
  }
  {
    const auto& [n, s] = next();
    auto t = detail::tokens(s);
    if (t.size() != 2 || t[0] != "params") throw ParseError("expected params line" + detail::at_line(n));
    params = detail::parse_index(t[1], "params" + detail::at_line(n));
  }
  for (std::size_t k = 0; k < params; ++k) {
    const auto& [n, s] = next();
    auto t = detail::tokens(s);
    if (t.size() < 4 || t[0] != "axis" || t[1] != std::to_string(k) || t[2] != ":")
      throw ParseError("expected axis " + std::to_string(k) + detail::at_line(n));
    std::vector<Rational> axis;
    for (std::size_t j = 3; j < t.size(); ++j) axis.push_back(Rational::parse(t[j]));
    for (std::size_t j = 1; j < axis.size(); ++j)
      if (!(axis[j - 1] < axis[j])) throw ParseError("axis values must increase" + detail::at_line(n));
    g.grid.axes.push_back(std::move(axis));
  }
  const std::size_t size = g.grid.size();
  g.dims.assign(size, 0);
  for (std::size_t p = 0; p < size; ++p) {
    const auto& [n, s] = next();
    auto t = detail::tokens(s);
    if (t.size() != params + 3 || t[0] != "dim" || t[params + 1] != "=") throw ParseError("expected dim line" + detail::at_line(n));
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < params; ++k) idx.push_back(detail::parse_index(t[k + 1], "dim" + detail::at_line(n)));
    for (std::size_t k = 0; k < params; ++k)
      if (idx[k] >= g.grid.axes[k].size()) throw ParseError("grid index out of range" + detail::at_line(n));
    if (g.grid.flatten(idx) != p) throw ParseError("dim lines out of order" + detail::at_line(n));
    g.dims[p] = detail::parse_index(t[params + 2], "dim" + detail::at_line(n));
  }
  g.transitions.assign(params, std::vector<SparseMatrix>(size));
  for (std::size_t k = 0; k < params; ++k)
    for (std::size_t p = 0; p < size; ++p) {
      if (!g.has_successor(p, k)) continue;
      const auto& [n, s] = next();
      auto t = detail::tokens(s);
      if (t.size() != params + 5 || t[0] != "map" || t[1] != std::to_string(k) || t[params + 2] != ":")
        throw ParseError("expected map line" + detail::at_line(n));
      std::vector<std::size_t> idx;
      for (std::size_t j = 0; j < params; ++j) idx.push_back(detail::parse_index(t[j + 2], "map" + detail::at_line(n)));
      if (g.grid.flatten(idx) != p) throw ParseError("map blocks out of order" + detail::at_line(n));
      const std::size_t rows = detail::parse_index(t[params + 3], "map"), cols = detail::parse_index(t[params + 4], "map");
      if (rows != g.dims[p + g.grid.stride(k)] || cols != g.dims[p]) throw ParseError("map shape disagrees with dims" + detail::at_line(n));
      SparseMatrix m = SparseMatrix::zero(rows, cols);
      for (std::size_t r = 0; r < rows && cols > 0; ++r) {
        const auto& [rn, rs] = next();
        auto row = detail::tokens(rs);
        if (row.size() != cols) throw ParseError("matrix row of wrong length" + detail::at_line(rn));
        for (std::size_t c = 0; c < cols; ++c) {
          FieldElement v(g.field, Rational::parse(row[c]));
          if (!v.is_zero()) m.columns[c].emplace_back(r, v);
        }
      }
      g.transitions[k][p] = std::move(m);
    }
  const auto& [n, s] = next();
  if (s != "END") throw ParseError("expected END" + detail::at_line(n));
  if (li != lines.size()) throw ParseError("content after END");
  return g;
}

inline GridModule parse_grid_module(const std::string& text) {
  std::istringstream in(text);
  return parse_grid_module(in);
}

// ---------------------------------------------------------------------------
// CSV

/// Rows of rationals; blank lines and `#` comments skipped; all rows equally long.
inline std::vector<std::vector<Rational>> parse_csv(std::istream& in) {
  std::vector<std::vector<Rational>> rows;
  for (const auto& [n, s] : detail::content_lines(in)) {
    std::vector<Rational> row;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) {
      auto t = detail::tokens(cell);
      if (t.size() != 1) throw ParseError("bad CSV cell" + detail::at_line(n));
      try {
        row.push_back(Rational::parse(t[0]));
      } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + detail::at_line(n));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError("CSV rows of unequal length" + detail::at_line(n));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline std::vector<std::vector<Rational>> parse_csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

inline std::string emit_csv(const std::vector<std::vector<Rational>>& rows) {
  std::ostringstream os;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k].str();
    os << "\n";
  }
  return os.str();
}

inline PointCloud points_from_csv(const std::vector<std::vector<Rational>>& rows) {
  PointCloud x{rows.empty() ? 0 : rows.front().size(), rows};
  return x;
}

}  // namespace mpers
