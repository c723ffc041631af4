#pragma once

// One-parameter modules: persistence diagrams from presentations via the rank
// table over critical values, interval presentations, and bottleneck distance.

#include <mpers/exactnum.hpp>
#include <mpers/presentation.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mpers {

struct DiagramPoint {
  ExtendedReal birth;
  ExtendedReal death;
  std::size_t multiplicity = 1;

  friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

/// Points with distinct (birth, death), sorted lexicographically.
struct PersistenceDiagram {
  std::vector<DiagramPoint> points;

  std::size_t total_count() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.multiplicity;
    return n;
  }
  friend bool operator==(const PersistenceDiagram&, const PersistenceDiagram&) = default;
};

inline void validate_point(const DiagramPoint& p) {
  if (!(p.birth < p.death)) throw DomainError("diagram point with birth >= death");
  if (p.birth.is_pos_inf()) throw DomainError("diagram point born at +inf");
  if (p.death.is_neg_inf()) throw DomainError("diagram point dying at -inf");
  if (p.multiplicity == 0) throw DomainError("diagram point with multiplicity 0");
}

/// Merges equal points, drops zero multiplicities and sorts.
inline PersistenceDiagram canonical_diagram(const std::vector<DiagramPoint>& pts) {
  std::map<std::pair<ExtendedReal, ExtendedReal>, std::size_t> acc;
  for (const auto& p : pts) {
    if (p.multiplicity == 0) continue;
    validate_point(p);
    acc[{p.birth, p.death}] += p.multiplicity;
  }
  PersistenceDiagram d;
  for (const auto& [k, m] : acc) d.points.push_back({k.first, k.second, m});
  return d;
}

/// Diagram of a 1-parameter presentation: interval multiplicities by
/// inclusion-exclusion on transition ranks over the critical values.
inline PersistenceDiagram diagram_from_presentation(const Presentation& p) {
  if (p.n != 1) throw DomainError("diagrams require a 1-parameter presentation");
  Presentation m = minimize_presentation(p);
  std::set<Rational> crit;
  for (const auto& g : m.generators) crit.insert(g.grade[0]);
  for (const auto& r : m.relations) crit.insert(r.grade[0]);
  if (crit.empty()) return {};
  // t[0] lies below every critical value, so M at t[0] is zero.
  std::vector<Rational> t{*crit.begin() - Rational(1)};
  t.insert(t.end(), crit.begin(), crit.end());
  const std::size_t last = t.size() - 1;
  std::vector<std::vector<long>> rk(t.size(), std::vector<long>(t.size(), 0));
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = i; j < t.size(); ++j)
      rk[i][j] = static_cast<long>(transition_rank(m, {t[i]}, {t[j]}));

  std::vector<DiagramPoint> pts;
  for (std::size_t i = 1; i <= last; ++i) {
    for (std::size_t j = i + 1; j <= last; ++j) {
      long mult = rk[i][j - 1] - rk[i][j] - rk[i - 1][j - 1] + rk[i - 1][j];
      if (mult < 0) throw DomainError("negative multiplicity in rank table");
      if (mult > 0) pts.push_back({t[i], t[j], static_cast<std::size_t>(mult)});
    }
    long mult = rk[i][last] - rk[i - 1][last];
    if (mult < 0) throw DomainError("negative multiplicity in rank table");
    if (mult > 0) pts.push_back({t[i], ExtendedReal::infinity(), static_cast<std::size_t>(mult)});
  }
  return canonical_diagram(pts);
}

/// Direct sum of interval presentations, one per counted point.
inline Presentation presentation_from_diagram(const PersistenceDiagram& d, Field f = Field::prime(2)) {
  Presentation p = Presentation::zero(1, f);
  for (const auto& pt : d.points) {
    validate_point(pt);
    if (!pt.birth.is_finite()) throw DomainError("points born at -inf have no finite presentation");
    for (std::size_t k = 0; k < pt.multiplicity; ++k) {
      std::size_t g = p.generators.size();
      p.generators.push_back({"g" + std::to_string(g + 1), {pt.birth.value()}});
      if (pt.death.is_finite())
        p.relations.push_back(
            {"r" + std::to_string(p.relations.size() + 1), {pt.death.value()}, unit_vector(f, g)});
    }
  }
  return p;
}

// ---------------------------------------------------------------------------
// Bottleneck distance

namespace detail {
struct Pt {
  ExtendedReal b, d;
};

inline std::vector<Pt> expand(const PersistenceDiagram& d) {
  std::vector<Pt> out;
  for (const auto& p : d.points) {
    validate_point(p);
    for (std::size_t k = 0; k < p.multiplicity; ++k) out.push_back({p.birth, p.death});
  }
  return out;
}

/// |x - y| with equal infinities at distance 0.
inline ExtendedReal coord_distance(const ExtendedReal& x, const ExtendedReal& y) {
  if (x == y) return ExtendedReal(0);
  if (!x.is_finite() || !y.is_finite()) return ExtendedReal::infinity();
  return ExtendedReal(abs(x.value() - y.value()));
}

inline ExtendedReal pair_cost(const Pt& x, const Pt& y) {
  return max(coord_distance(x.b, y.b), coord_distance(x.d, y.d));
}

/// Cost of leaving a point unmatched: (death - birth) / 2.
inline ExtendedReal half_life(const Pt& x) {
  if (!x.b.is_finite() || !x.d.is_finite()) return ExtendedReal::infinity();
  return ExtendedReal((x.d.value() - x.b.value()) / Rational(2));
}

/// Maximum bipartite matching by augmenting paths.
class BipartiteMatcher {
 public:
  explicit BipartiteMatcher(std::vector<std::vector<std::size_t>> adj, std::size_t right)
      : adj_(std::move(adj)), match_right_(right, npos) {}

  std::size_t run() {
    std::size_t size = 0;
    for (std::size_t u = 0; u < adj_.size(); ++u) {
      seen_.assign(match_right_.size(), false);
      if (augment(u)) ++size;
    }
    return size;
  }
  /// Left vertex matched to right vertex v, or npos.
  std::size_t left_of(std::size_t v) const { return match_right_[v]; }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  bool augment(std::size_t u) {
    for (std::size_t v : adj_[u]) {
      if (seen_[v]) continue;
      seen_[v] = true;
      if (match_right_[v] == npos || augment(match_right_[v])) {
        match_right_[v] = u;
        return true;
      }
    }
    return false;
  }
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_right_;
  std::vector<bool> seen_;
};
}  // namespace detail

/// A multiplicity-respecting partial matching between two diagrams.
struct Multibijection {
  struct Match {
    std::size_t left;   ///< index into D1.points
    std::size_t right;  ///< index into D2.points
    std::size_t count;
  };
  std::vector<Match> matched;
  std::vector<std::size_t> deleted_left;   ///< per D1 point
  std::vector<std::size_t> deleted_right;  ///< per D2 point
};

struct BottleneckResult {
  ExtendedReal distance;
  Multibijection matching;
};

namespace detail {
/// Perfect matching on points + diagonal copies with every used edge of cost <= eps.
inline std::optional<Multibijection> feasible_matching(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                                                       const std::vector<Pt>& a, const std::vector<Pt>& b,
                                                       const ExtendedReal& eps) {
  const std::size_t n1 = a.size(), n2 = b.size();
  // Left: a[0..n1) then diagonal copies of b; right: b[0..n2) then diagonal copies of a.
  std::vector<std::vector<std::size_t>> adj(n1 + n2);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j)
      if (pair_cost(a[i], b[j]) <= eps) adj[i].push_back(j);
    if (half_life(a[i]) <= eps) adj[i].push_back(n2 + i);
  }
  for (std::size_t j = 0; j < n2; ++j) {
    if (half_life(b[j]) <= eps) adj[n1 + j].push_back(j);
    for (std::size_t i = 0; i < n1; ++i) adj[n1 + j].push_back(n2 + i);
  }
  BipartiteMatcher bm(std::move(adj), n1 + n2);
  if (bm.run() != n1 + n2) return std::nullopt;

  auto owner = [](const PersistenceDiagram& d) {
    std::vector<std::size_t> o;
    for (std::size_t k = 0; k < d.points.size(); ++k)
      for (std::size_t c = 0; c < d.points[k].multiplicity; ++c) o.push_back(k);
    return o;
  };
  auto o1 = owner(d1), o2 = owner(d2);
  Multibijection mb;
  mb.deleted_left.assign(d1.points.size(), 0);
  mb.deleted_right.assign(d2.points.size(), 0);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairs;
  for (std::size_t j = 0; j < n2; ++j) {
    std::size_t u = bm.left_of(j);
    if (u < n1)
      ++pairs[{o1[u], o2[j]}];
    else
      ++mb.deleted_right[o2[j]];
  }
  for (std::size_t i = 0; i < n1; ++i)
    if (bm.left_of(n2 + i) == i) ++mb.deleted_left[o1[i]];
  for (const auto& [k, c] : pairs) mb.matched.push_back({k.first, k.second, c});
  return mb;
}
}  // namespace detail

/// Bottleneck distance with an optimal multibijection. Binary search over
/// pair costs and half-lives; feasibility by perfect matching.
inline BottleneckResult bottleneck_matching(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  auto a = detail::expand(d1), b = detail::expand(d2);
  std::set<ExtendedReal> cand{ExtendedReal(0), ExtendedReal::infinity()};
  for (const auto& x : a) {
    cand.insert(detail::half_life(x));
    for (const auto& y : b) cand.insert(detail::pair_cost(x, y));
  }
  for (const auto& y : b) cand.insert(detail::half_life(y));
  std::vector<ExtendedReal> c(cand.begin(), cand.end());
  std::size_t lo = 0, hi = c.size() - 1;  // c[hi] = +inf is always feasible
  auto best = detail::feasible_matching(d1, d2, a, b, c[hi]);
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (auto m = detail::feasible_matching(d1, d2, a, b, c[mid])) {
      hi = mid;
      best = std::move(m);
    } else {
      lo = mid + 1;
    }
  }
  return {c[hi], *best};
}

inline ExtendedReal bottleneck_distance(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  return bottleneck_matching(d1, d2).distance;
}

inline constexpr std::size_t kBruteForceLimit = 6;

/// Exact minimum over all partial matchings; at most 6 counted points per side.
inline ExtendedReal brute_force_bottleneck(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  auto a = detail::expand(d1), b = detail::expand(d2);
  if (a.size() > kBruteForceLimit || b.size() > kBruteForceLimit)
    throw DomainError("brute-force bottleneck limited to 6 points per side");
  std::optional<ExtendedReal> best;
  std::vector<bool> used(b.size(), false);
  std::function<void(std::size_t, ExtendedReal)> rec = [&](std::size_t i, ExtendedReal cost) {
    if (i == a.size()) {
      for (std::size_t j = 0; j < b.size(); ++j)
        if (!used[j]) cost = max(cost, detail::half_life(b[j]));
      if (!best || cost < *best) best = cost;
      return;
    }
    rec(i + 1, max(cost, detail::half_life(a[i])));
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      rec(i + 1, max(cost, detail::pair_cost(a[i], b[j])));
      used[j] = false;
    }
  };
  rec(0, ExtendedReal(0));
  return *best;
}

/// Cost of a given multibijection: max of matched distances and unmatched half-lives.
inline ExtendedReal multibijection_cost(const PersistenceDiagram& d1, const PersistenceDiagram& d2,
                                        const Multibijection& mb) {
  std::vector<std::size_t> left(d1.points.size(), 0), right(d2.points.size(), 0);
  ExtendedReal cost(0);
  auto pt = [](const DiagramPoint& p) { return detail::Pt{p.birth, p.death}; };
  for (const auto& m : mb.matched) {
    left[m.left] += m.count;
    right[m.right] += m.count;
    if (m.count) cost = max(cost, detail::pair_cost(pt(d1.points[m.left]), pt(d2.points[m.right])));
  }
  for (std::size_t i = 0; i < d1.points.size(); ++i) {
    left[i] += mb.deleted_left[i];
    if (mb.deleted_left[i]) cost = max(cost, detail::half_life(pt(d1.points[i])));
    if (left[i] != d1.points[i].multiplicity) throw DomainError("multibijection miscounts a left point");
  }
  for (std::size_t j = 0; j < d2.points.size(); ++j) {
    right[j] += mb.deleted_right[j];
    if (mb.deleted_right[j]) cost = max(cost, detail::half_life(pt(d2.points[j])));
    if (right[j] != d2.points[j].multiplicity) throw DomainError("multibijection miscounts a right point");
  }
  return cost;
}

}  // namespace mpers
