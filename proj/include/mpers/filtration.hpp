#pragma once

// Point clouds, L^p metrics, one-critical Rips and Čech bifiltrations with a
// function parameter, fixed-scale slices, function-aware distances between
// filtered point sets, seeded density sampling and kernel density estimates.

#include <mpers/exactnum.hpp>
#include <mpers/presentation.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace mpers {

struct PointCloud {
  std::size_t dim = 0;
  std::vector<std::vector<Rational>> points;

  std::size_t size() const { return points.size(); }
  void validate() const {
    for (const auto& p : points)
      if (p.size() != dim) throw DomainError("point of wrong dimension in cloud");
  }
};

/// Function values, one Grade (length n) per point.
using FunctionValues = std::vector<Grade>;

enum class Metric { L1, L2, LInf };

inline Metric parse_metric(const std::string& s) {
  if (s == "l1" || s == "1") return Metric::L1;
  if (s == "l2" || s == "2") return Metric::L2;
  if (s == "linf" || s == "inf") return Metric::LInf;
  throw ParseError("unknown metric '" + s + "' (expected l1, l2 or linf)");
}
inline std::string metric_str(Metric m) { return m == Metric::L1 ? "l1" : m == Metric::L2 ? "l2" : "linf"; }

inline SqrtRational point_distance(const std::vector<Rational>& x, const std::vector<Rational>& y, Metric m) {
  if (x.size() != y.size()) throw DomainError("points of different dimension");
  Rational acc(0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    Rational d = abs(x[i] - y[i]);
    switch (m) {
      case Metric::L1: acc += d; break;
      case Metric::L2: acc += d * d; break;
      case Metric::LInf: acc = max(acc, d); break;
    }
  }
  return m == Metric::L2 ? SqrtRational::from_square(acc) : SqrtRational::from_rational(acc);
}

struct Simplex {
  std::vector<std::size_t> vertices;  ///< strictly increasing
  Grade grade;
  /// Exact scale coordinate when it may be irrational; the stored grade holds
  /// its representative (exact value or dyadic upper bound).
  std::optional<SqrtRational> exact_scale;

  std::size_t dimension() const { return vertices.size() - 1; }
};

/// One-critical multifiltered simplicial complex; `params` grade coordinates.
struct BifilteredComplex {
  std::size_t params = 2;
  std::vector<Simplex> simplices;
};

inline bool same_complex(const BifilteredComplex& a, const BifilteredComplex& b) {
  if (a.params != b.params || a.simplices.size() != b.simplices.size()) return false;
  for (std::size_t i = 0; i < a.simplices.size(); ++i)
    if (a.simplices[i].vertices != b.simplices[i].vertices || a.simplices[i].grade != b.simplices[i].grade)
      return false;
  return true;
}

/// Sorts by (dimension, vertices).
inline void sort_complex(BifilteredComplex& c) {
  std::stable_sort(c.simplices.begin(), c.simplices.end(), [](const Simplex& x, const Simplex& y) {
    if (x.vertices.size() != y.vertices.size()) return x.vertices.size() < y.vertices.size();
    return x.vertices < y.vertices;
  });
}

/// Faces present, vertices sorted and distinct, face grade <= coface grade.
inline void validate_complex(const BifilteredComplex& c) {
  std::map<std::vector<std::size_t>, const Simplex*> index;
  for (const auto& s : c.simplices) {
    if (s.vertices.empty()) throw DomainError("empty simplex");
    if (s.grade.size() != c.params) throw DomainError("simplex grade of wrong length");
    for (std::size_t k = 1; k < s.vertices.size(); ++k)
      if (!(s.vertices[k - 1] < s.vertices[k])) throw DomainError("simplex vertices not strictly increasing");
    if (!index.emplace(s.vertices, &s).second) throw DomainError("duplicate simplex");
  }
  for (const auto& s : c.simplices) {
    if (s.vertices.size() == 1) continue;
    for (std::size_t k = 0; k < s.vertices.size(); ++k) {
      auto face = s.vertices;
      face.erase(face.begin() + static_cast<std::ptrdiff_t>(k));
      auto it = index.find(face);
      if (it == index.end()) throw DomainError("face missing from complex");
      if (!leq(it->second->grade, s.grade)) throw DomainError("face appears after its coface");
    }
  }
}

namespace detail {

inline Grade function_join(const FunctionValues& f, const std::vector<std::size_t>& vs) {
  Grade g = f[vs.front()];
  for (std::size_t v : vs) g = join(g, f[v]);
  return g;
}

/// Circumcenter of pts in their affine hull; nullopt if affinely dependent.
inline std::optional<std::vector<Rational>> circumcenter(const std::vector<const std::vector<Rational>*>& pts) {
  const auto& p0 = *pts.front();
  const std::size_t m = p0.size(), k = pts.size() - 1;
  if (k == 0) return p0;
  std::vector<std::vector<Rational>> v(k, std::vector<Rational>(m));
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t d = 0; d < m; ++d) v[i][d] = (*pts[i + 1])[d] - p0[d];
  // G lambda = b / 2 with G = Gram(v), b_i = |v_i|^2.
  std::vector<std::vector<Rational>> a(k, std::vector<Rational>(k + 1));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t d = 0; d < m; ++d) a[i][j] += v[i][d] * v[j][d];
    for (std::size_t d = 0; d < m; ++d) a[i][k] += v[i][d] * v[i][d];
    a[i][k] /= Rational(2);
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    while (piv < k && a[piv][c].is_zero()) ++piv;
    if (piv == k) return std::nullopt;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c || a[r][c].is_zero()) continue;
      Rational factor = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= factor * a[c][j];
    }
  }
  std::vector<Rational> center = p0;
  for (std::size_t i = 0; i < k; ++i) {
    Rational lambda = a[i][k] / a[i][i];
    for (std::size_t d = 0; d < m; ++d) center[d] += lambda * v[i][d];
  }
  return center;
}

inline Rational squared_l2(const std::vector<Rational>& x, const std::vector<Rational>& y) {
  Rational acc(0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    Rational d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

/// Radius of the smallest ball containing the points, exact.
inline SqrtRational enclosing_radius(const PointCloud& x, const std::vector<std::size_t>& vs, Metric m) {
  if (m == Metric::L1) throw DomainError("Čech complexes are not supported for the L1 metric");
  if (m == Metric::LInf || x.dim <= 1) {
    Rational extent(0);
    for (std::size_t d = 0; d < x.dim; ++d) {
      Rational lo = x.points[vs.front()][d], hi = lo;
      for (std::size_t v : vs) {
        lo = min(lo, x.points[v][d]);
        hi = max(hi, x.points[v][d]);
      }
      extent = max(extent, hi - lo);
    }
    return SqrtRational::from_rational(extent / Rational(2));
  }
  // The minimal ball is the smallest circumball, over vertex subsets, that
  // encloses every vertex.
  std::optional<Rational> best;
  const std::size_t k = vs.size();
  for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
    std::vector<const std::vector<Rational>*> sub;
    for (std::size_t i = 0; i < k; ++i)
      if (mask & (1u << i)) sub.push_back(&x.points[vs[i]]);
    if (sub.size() > x.dim + 1) continue;
    auto c = circumcenter(sub);
    if (!c) continue;
    Rational r2 = squared_l2(*c, *sub.front());
    if (best && !(r2 < *best)) continue;
    bool encloses = true;
    for (std::size_t v : vs)
      if (r2 < squared_l2(*c, x.points[v])) {
        encloses = false;
        break;
      }
    if (encloses) best = r2;
  }
  return SqrtRational::from_square(*best);
}

inline SqrtRational rips_scale(const PointCloud& x, const std::vector<std::size_t>& vs, Metric m) {
  SqrtRational s = SqrtRational::from_rational(Rational(0));
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j) {
      SqrtRational d = point_distance(x.points[vs[i]], x.points[vs[j]], m);
      SqrtRational half = SqrtRational::from_square(d.square() / Rational(4));
      if (s < half) s = half;
    }
  return s;
}

/// Clique expansion of the edges of scale <= cap, keeping simplices whose
/// scale (from `scale_of`) is <= cap.
inline BifilteredComplex expand(const PointCloud& x, const FunctionValues& f, std::size_t max_dim,
                                const std::optional<Rational>& cap,
                                const std::function<SqrtRational(const std::vector<std::size_t>&)>& scale_of) {
  x.validate();
  if (f.size() != x.size()) throw DomainError("function values do not align with the points");
  const std::size_t n = f.empty() ? 0 : f.front().size();
  for (const auto& v : f)
    if (v.size() != n) throw DomainError("function values of inconsistent length");
  BifilteredComplex c;
  c.params = n + 1;
  auto make = [&](std::vector<std::size_t> vs, const SqrtRational& s) {
    Simplex sx;
    sx.grade = function_join(f, vs);
    sx.grade.push_back(s.representative());
    if (!s.is_rational()) sx.exact_scale = s;
    sx.vertices = std::move(vs);
    return sx;
  };
  std::vector<std::vector<std::size_t>> level;
  for (std::size_t v = 0; v < x.size(); ++v) {
    c.simplices.push_back(make({v}, SqrtRational::from_rational(Rational(0))));
    level.push_back({v});
  }
  std::vector<std::vector<bool>> adj(x.size(), std::vector<bool>(x.size(), false));
  for (std::size_t d = 1; d <= max_dim && !level.empty(); ++d) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& s : level) {
      for (std::size_t v = s.back() + 1; v < x.size(); ++v) {
        bool ok = true;
        if (d > 1)
          for (std::size_t u : s) ok = ok && adj[u][v];
        if (!ok) continue;
        auto t = s;
        t.push_back(v);
        SqrtRational sc = scale_of(t);
        if (cap && !(sc <= *cap)) continue;
        if (d == 1) adj[s[0]][v] = adj[v][s[0]] = true;
        c.simplices.push_back(make(t, sc));
        next.push_back(std::move(t));
      }
    }
    level = std::move(next);
  }
  return c;
}

}  // namespace detail

/// Rips bifiltration: grade (max f over vertices, max pairwise distance / 2).
inline BifilteredComplex rips_bifiltration(const PointCloud& x, Metric metric, const FunctionValues& f,
                                           std::size_t max_dim, const std::optional<Rational>& scale_cap = {}) {
  return detail::expand(x, f, max_dim, scale_cap,
                        [&](const std::vector<std::size_t>& vs) { return detail::rips_scale(x, vs, metric); });
}

/// Čech bifiltration: grade (max f over vertices, smallest enclosing ball radius).
inline BifilteredComplex cech_bifiltration(const PointCloud& x, Metric metric, const FunctionValues& f,
                                           std::size_t max_dim, const std::optional<Rational>& scale_cap = {}) {
  if (metric == Metric::L1) throw DomainError("Čech complexes are not supported for the L1 metric");
  return detail::expand(x, f, max_dim, scale_cap, [&](const std::vector<std::size_t>& vs) {
    return detail::enclosing_radius(x, vs, metric);
  });
}

/// Exact scale of a simplex built by the constructions above.
inline SqrtRational simplex_scale(const Simplex& s) {
  return s.exact_scale ? *s.exact_scale : SqrtRational::from_rational(s.grade.back());
}

/// Simplices with scale coordinate <= delta, scale axis dropped.
inline BifilteredComplex fixed_scale_slice(const BifilteredComplex& c, const Rational& delta) {
  if (c.params < 2) throw DomainError("fixed-scale slice needs a scale parameter");
  if (delta.sign() < 0) throw DomainError("slice scale must be >= 0");
  BifilteredComplex out;
  out.params = c.params - 1;
  for (const auto& s : c.simplices) {
    if (!(simplex_scale(s) <= delta)) continue;
    Simplex t{s.vertices, Grade(s.grade.begin(), s.grade.end() - 1), std::nullopt};
    out.simplices.push_back(std::move(t));
  }
  return out;
}

/// Removes points that repeat both coordinates and function value.
inline void deduplicate_points(PointCloud& x, FunctionValues& f) {
  std::set<std::pair<std::vector<Rational>, Grade>> seen;
  PointCloud px{x.dim, {}};
  FunctionValues pf;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (seen.insert({x.points[i], f[i]}).second) {
      px.points.push_back(x.points[i]);
      pf.push_back(f[i]);
    }
  x = std::move(px);
  f = std::move(pf);
}

inline Rational sup_norm_difference(const Grade& a, const Grade& b) {
  if (a.size() != b.size()) throw DomainError("function values of different length");
  Rational m(0);
  for (std::size_t i = 0; i < a.size(); ++i) m = max(m, abs(a[i] - b[i]));
  return m;
}

/// max over points of the sup-norm difference of the two functions.
inline Rational sup_function_distance(const FunctionValues& f1, const FunctionValues& f2) {
  if (f1.size() != f2.size()) throw DomainError("function values over different point sets");
  Rational m(0);
  for (std::size_t i = 0; i < f1.size(); ++i) m = max(m, sup_norm_difference(f1[i], f2[i]));
  return m;
}

/// Hausdorff-type distance where a point's cost to another is
/// max(distance, function difference).
inline SqrtRational function_aware_hausdorff(const PointCloud& x1, const FunctionValues& f1, const PointCloud& x2,
                                             const FunctionValues& f2, Metric metric) {
  if (x1.size() == 0 || x2.size() == 0) throw DomainError("function-aware Hausdorff distance of an empty set");
  if (x1.dim != x2.dim) throw DomainError("point clouds in different dimensions");
  if (f1.size() != x1.size() || f2.size() != x2.size()) throw DomainError("function values do not align");
  auto directed = [&](const PointCloud& a, const FunctionValues& fa, const PointCloud& b, const FunctionValues& fb) {
    SqrtRational worst = SqrtRational::from_rational(Rational(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::optional<SqrtRational> nearest;
      for (std::size_t j = 0; j < b.size(); ++j) {
        SqrtRational c = point_distance(a.points[i], b.points[j], metric);
        SqrtRational fd = SqrtRational::from_rational(sup_norm_difference(fa[i], fb[j]));
        if (c < fd) c = fd;
        if (!nearest || c < *nearest) nearest = c;
      }
      if (worst < *nearest) worst = *nearest;
    }
    return worst;
  };
  SqrtRational a = directed(x1, f1, x2, f2), b = directed(x2, f2, x1, f1);
  return a < b ? b : a;
}

using DistanceMatrix = std::vector<std::vector<Rational>>;

/// Pairwise distances; throws if a distance is irrational.
inline DistanceMatrix distance_matrix(const PointCloud& x, Metric metric) {
  DistanceMatrix d(x.size(), std::vector<Rational>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      SqrtRational s = point_distance(x.points[i], x.points[j], metric);
      if (!s.is_rational()) throw DomainError("irrational distance in distance matrix");
      d[i][j] = d[j][i] = s.exact();
    }
  return d;
}

inline constexpr std::size_t kGromovLimit = 5;

/// Minimum over correspondences C of max(distortion(C) / 2, max |f1 - f2| on C).
inline Rational gromov_function_distance(const DistanceMatrix& d1, const FunctionValues& f1,
                                         const DistanceMatrix& d2, const FunctionValues& f2) {
  const std::size_t n1 = d1.size(), n2 = d2.size();
  if (n1 > kGromovLimit || n2 > kGromovLimit) throw DomainError("correspondence enumeration limited to 5 points");
  if (f1.size() != n1 || f2.size() != n2) throw DomainError("function values do not align");
  if (n1 == 0 || n2 == 0) {
    if (n1 == n2) return Rational(0);
    throw DomainError("no correspondence with an empty space");
  }
  const std::size_t np = n1 * n2;
  auto id = [n2](std::size_t x, std::size_t y) { return x * n2 + y; };
  std::vector<Rational> fcost(np);
  for (std::size_t x = 0; x < n1; ++x)
    for (std::size_t y = 0; y < n2; ++y) fcost[id(x, y)] = sup_norm_difference(f1[x], f2[y]);
  std::vector<std::vector<Rational>> half_distortion(np, std::vector<Rational>(np));
  std::set<Rational> cand(fcost.begin(), fcost.end());
  for (std::size_t p = 0; p < np; ++p)
    for (std::size_t q = 0; q < np; ++q) {
      Rational h = abs(d1[p / n2][q / n2] - d2[p % n2][q % n2]) / Rational(2);
      half_distortion[p][q] = h;
      cand.insert(h);
    }

  // Exists a correspondence with cost <= t: cover X1 then X2 by pairwise compatible allowed pairs.
  auto feasible = [&](const Rational& t) {
    std::vector<bool> allowed(np);
    for (std::size_t p = 0; p < np; ++p) allowed[p] = fcost[p] <= t && half_distortion[p][p] <= t;
    std::vector<std::size_t> chosen;
    std::vector<int> cover1(n1, 0), cover2(n2, 0);
    std::function<bool()> rec = [&]() -> bool {
      std::size_t x = 0;
      while (x < n1 && cover1[x]) ++x;
      std::size_t y = 0;
      while (y < n2 && cover2[y]) ++y;
      if (x == n1 && y == n2) return true;
      for (std::size_t other = 0; other < (x < n1 ? n2 : n1); ++other) {
        std::size_t p = x < n1 ? id(x, other) : id(other, y);
        if (!allowed[p]) continue;
        bool ok = true;
        for (std::size_t q : chosen) ok = ok && half_distortion[p][q] <= t;
        if (!ok) continue;
        chosen.push_back(p);
        ++cover1[p / n2];
        ++cover2[p % n2];
        bool found = rec();
        --cover1[p / n2];
        --cover2[p % n2];
        chosen.pop_back();
        if (found) return true;
      }
      return false;
    };
    return rec();
  };
  std::vector<Rational> c(cand.begin(), cand.end());
  std::size_t lo = 0, hi = c.size() - 1;  // the full product is a correspondence of cost c.back()
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (feasible(c[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return c[hi];
}

// ---------------------------------------------------------------------------
// Randomness, densities, kernel density estimates

/// Counter-based generator: value k of stream `seed` is a SplitMix64 mix of
/// seed + (k + 1) * golden ratio.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t at(std::uint64_t seed, std::uint64_t counter) {
    return mix(seed + (counter + 1) * 0x9e3779b97f4a7c15ULL);
  }

  std::uint64_t next() { return at(seed_, counter_++); }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Standard normal by Box-Muller (one value per two uniforms).
  double normal() {
    double u1 = 1.0 - uniform(), u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// Independent stream seed for (seed, a, b).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return CounterRng::mix(CounterRng::at(seed, a) ^ CounterRng::mix(b + 0x632be59bd9b4e019ULL));
}

struct GaussianComponent {
  Rational weight;
  std::vector<Rational> center;
  Rational sigma;
};

/// Mixture of isotropic Gaussians.
struct DensitySpec {
  std::vector<GaussianComponent> components;

  std::size_t dim() const { return components.empty() ? 0 : components.front().center.size(); }
  void validate() const {
    if (components.empty()) throw DomainError("density needs at least one component");
    Rational total(0);
    for (const auto& c : components) {
      if (c.weight.sign() <= 0) throw DomainError("mixture weight must be positive");
      if (c.sigma.sign() <= 0) throw DomainError("mixture sigma must be positive");
      if (c.center.size() != dim() || c.center.empty()) throw DomainError("mixture centers of inconsistent dimension");
      total += c.weight;
    }
    if (total != Rational(1)) throw DomainError("mixture weights must sum to 1");
  }
  std::string str() const {
    std::string s;
    for (std::size_t k = 0; k < components.size(); ++k) {
      if (k) s += ";";
      s += components[k].weight.str() + ":";
      for (std::size_t d = 0; d < components[k].center.size(); ++d)
        s += (d ? "," : "") + components[k].center[d].str();
      s += ":" + components[k].sigma.str();
    }
    return s;
  }
};

/// "w:c1,c2,...:sigma;w:...", e.g. "1/2:-1:1/4;1/2:1:1/4".
inline DensitySpec parse_density_spec(const std::string& text) {
  DensitySpec spec;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) {
    if (part.empty()) continue;
    auto a = part.find(':'), b = part.rfind(':');
    if (a == std::string::npos || a == b) throw ParseError("density component '" + part + "' is not w:center:sigma");
    GaussianComponent c;
    c.weight = Rational::parse(part.substr(0, a));
    c.sigma = Rational::parse(part.substr(b + 1));
    std::stringstream cs(part.substr(a + 1, b - a - 1));
    for (std::string t; std::getline(cs, t, ',');) c.center.push_back(Rational::parse(t));
    spec.components.push_back(std::move(c));
  }
  spec.validate();
  return spec;
}

inline double density_value(const DensitySpec& spec, const std::vector<double>& x) {
  double total = 0;
  const double m = static_cast<double>(x.size());
  for (const auto& c : spec.components) {
    double s = c.sigma.to_double(), r2 = 0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      double t = x[d] - c.center[d].to_double();
      r2 += t * t;
    }
    total += c.weight.to_double() * std::exp(-r2 / (2 * s * s)) / std::pow(2 * std::numbers::pi * s * s, m / 2);
  }
  return total;
}

inline constexpr unsigned kSampleBits = 20;
inline constexpr unsigned kKernelBits = 30;

/// `count` i.i.d. points, coordinates rounded to multiples of 2^-20.
inline PointCloud sample_density(const DensitySpec& spec, std::size_t count, std::uint64_t seed) {
  spec.validate();
  CounterRng rng(seed);
  PointCloud x{spec.dim(), {}};
  for (std::size_t i = 0; i < count; ++i) {
    double u = rng.uniform(), acc = 0;
    std::size_t k = 0;
    for (; k + 1 < spec.components.size(); ++k) {
      acc += spec.components[k].weight.to_double();
      if (u < acc) break;
    }
    const auto& c = spec.components[k];
    std::vector<Rational> p;
    for (std::size_t d = 0; d < x.dim; ++d)
      p.push_back(Rational::from_double(c.center[d].to_double() + c.sigma.to_double() * rng.normal(), kSampleBits));
    x.points.push_back(std::move(p));
  }
  return x;
}

enum class Kernel { Gaussian, Epanechnikov };

inline Kernel parse_kernel(const std::string& s) {
  if (s == "gaussian") return Kernel::Gaussian;
  if (s == "epanechnikov") return Kernel::Epanechnikov;
  throw ParseError("unknown kernel '" + s + "'");
}
inline std::string kernel_str(Kernel k) { return k == Kernel::Gaussian ? "gaussian" : "epanechnikov"; }

struct KdeSpec {
  Kernel kernel = Kernel::Gaussian;
  Rational bandwidth{1, 5};
};

/// Normalized kernel value at squared scaled distance u2 in dimension m.
inline double kernel_value(Kernel k, double u2, std::size_t m) {
  const double dm = static_cast<double>(m);
  if (k == Kernel::Gaussian) return std::exp(-u2 / 2) / std::pow(2 * std::numbers::pi, dm / 2);
  if (u2 >= 1) return 0;
  double unit_ball = std::pow(std::numbers::pi, dm / 2) / std::tgamma(dm / 2 + 1);
  return (dm + 2) / (2 * unit_ball) * (1 - u2);
}

/// Kernel density estimate at each point of `at`. Each kernel term is rounded
/// to a multiple of 2^-30 and the sum is exact.
inline std::vector<Rational> kde_evaluate(const PointCloud& sample, const KdeSpec& spec, const PointCloud& at) {
  if (sample.size() == 0) throw DomainError("kernel density estimate of an empty sample");
  if (spec.bandwidth.sign() <= 0) throw DomainError("bandwidth must be positive");
  if (sample.dim != at.dim) throw DomainError("evaluation points in a different dimension");
  const double h = spec.bandwidth.to_double();
  std::vector<std::vector<double>> s;
  for (const auto& p : sample.points) {
    std::vector<double> q;
    for (const auto& c : p) q.push_back(c.to_double());
    s.push_back(std::move(q));
  }
  Rational hm(1);
  for (std::size_t d = 0; d < sample.dim; ++d) hm *= spec.bandwidth;
  const Rational denom = Rational(static_cast<long>(sample.size())) * hm / dyadic_unit(kKernelBits);
  std::vector<Rational> out;
  out.reserve(at.size());
  for (const auto& p : at.points) {
    std::vector<double> q;
    for (const auto& c : p) q.push_back(c.to_double());
    long long sum = 0;
    for (const auto& x : s) {
      double r2 = 0;
      for (std::size_t d = 0; d < q.size(); ++d) r2 += (q[d] - x[d]) * (q[d] - x[d]);
      sum += std::llround(std::ldexp(kernel_value(spec.kernel, r2 / (h * h), sample.dim), kKernelBits));
    }
    out.push_back(Rational(static_cast<long>(sum)) / denom);
  }
  return out;
}

}  // namespace mpers
