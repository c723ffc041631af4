#include "support.hpp"

#include <mpers/homology.hpp>
#include <mpers/interleave.hpp>

#include <gtest/gtest.h>

using namespace mpers;
using namespace mpers::testing;

namespace {

Simplex simplex(std::vector<std::size_t> vs, Grade g) { return {std::move(vs), std::move(g), std::nullopt}; }

BifilteredComplex one_param(std::vector<Simplex> s) { return BifilteredComplex{1, std::move(s)}; }

PersistenceDiagram diag(std::vector<DiagramPoint> pts) { return canonical_diagram(pts); }

std::vector<Rational> half_axis(long lo, long hi) {
  std::vector<Rational> v;
  for (long k = lo; k <= hi; ++k) v.push_back(Rational(k, 2));
  return v;
}

// Brute-force rank-shift distance of two 1-parameter presentations on `axis`:
// smallest candidate c such that the floor-extended rank inequalities hold at
// c + delta, where delta is below every positive candidate gap.
ExtendedReal rank_shift_oracle(const Presentation& m, const Presentation& n, const std::vector<Rational>& axis) {
  auto floor_of = [&](const Rational& x) -> std::optional<Rational> {
    std::optional<Rational> out;
    for (const auto& v : axis)
      if (v <= x) out = v;
    return out;
  };
  auto rank = [&](const Presentation& p, const Rational& x, const Rational& y) -> std::size_t {
    auto fx = floor_of(x), fy = floor_of(y);
    if (!fx) return 0;
    return transition_rank(p, {*fx}, {*fy});
  };
  std::set<Rational> cand{Rational(0)};
  for (const auto& x : axis)
    for (const auto& y : axis)
      if (y < x) cand.insert(x - y);
  const Rational delta(1, 1024);
  for (const auto& c : cand) {
    const Rational e = c + delta;
    bool ok = true;
    for (std::size_t i = 0; i < axis.size() && ok; ++i)
      for (std::size_t j = i; j < axis.size() && ok; ++j) {
        const Rational &a = axis[i], &b = axis[j];
        ok = rank(m, a - e, b + e) <= rank(n, a, b) && rank(n, a - e, b + e) <= rank(m, a, b);
      }
    if (ok) return c;
  }
  return ExtendedReal::infinity();
}

}  // namespace

TEST(ChainComplex, SingleVertexAndEdge) {
  GradedChainComplex v = chain_complex_of(one_param({simplex({0}, {0})}));
  EXPECT_EQ(v.count(0), 1u);
  EXPECT_EQ(v.count(1), 0u);
  Field z3 = Field::prime(3);
  GradedChainComplex e =
      chain_complex_of(one_param({simplex({0}, {0}), simplex({1}, {0}), simplex({0, 1}, {1})}), z3);
  ASSERT_EQ(e.boundary[1].size(), 1u);
  const auto& col = e.boundary[1][0];
  ASSERT_EQ(col.size(), 2u);
  EXPECT_EQ(col[0].second + col[1].second, FieldElement::zero(z3));
}

TEST(ChainComplex, BoundarySquaresToZero) {
  Rng rng(81);
  for (int k = 0; k < 30; ++k) {
    BifilteredComplex c = random_complex(rng, 2, 15, 6);
    for (Field f : {Field::prime(2), Field::prime(3), Field::rationals()})
      EXPECT_TRUE(boundary_squares_to_zero(chain_complex_of(c, f)));
  }
}

TEST(ChainComplex, MissingFaceRejected) {
  EXPECT_THROW(chain_complex_of(one_param({simplex({0}, {0}), simplex({0, 1}, {1})})), DomainError);
}

TEST(Barcode, TwoVerticesAndAnEdge) {
  auto c = one_param({simplex({0}, {0}), simplex({1}, {0}), simplex({0, 1}, {1})});
  EXPECT_EQ(barcode_1d(c, 0), diag({{0, 1, 1}, {0, ExtendedReal::infinity(), 1}}));
}

TEST(Barcode, HollowTriangle) {
  auto c = one_param({simplex({0}, {0}), simplex({1}, {0}), simplex({2}, {0}), simplex({0, 1}, {0}),
                      simplex({0, 2}, {0}), simplex({1, 2}, {0})});
  EXPECT_EQ(barcode_1d(c, 1), diag({{0, ExtendedReal::infinity(), 1}}));
}

TEST(Barcode, CircleClosingAtT) {
  const Rational t(5, 2);
  std::vector<Simplex> s;
  for (std::size_t v = 0; v < 4; ++v) s.push_back(simplex({v}, {0}));
  s.push_back(simplex({0, 1}, {0}));
  s.push_back(simplex({1, 2}, {1}));
  s.push_back(simplex({2, 3}, {1}));
  s.push_back(simplex({0, 3}, {t}));
  EXPECT_EQ(barcode_1d(one_param(s), 1), diag({{t, ExtendedReal::infinity(), 1}}));
}

TEST(Barcode, BarCountsMatchDenseHomology) {
  Rng rng(82);
  for (int k = 0; k < 40; ++k) {
    BifilteredComplex c = random_complex(rng, 1, 14, 6);
    for (long p : {2L, 3L})
      for (std::size_t deg : {0u, 1u, 2u}) {
        PersistenceDiagram d = barcode_1d(c, deg, Field::prime(static_cast<std::uint64_t>(p)));
        for (long x = -1; x <= 10; ++x) {
          ExtendedReal a(Rational(x, 2));
          std::size_t count = 0;
          for (const auto& q : d.points)
            if (q.birth <= a && a < q.death) count += q.multiplicity;
          EXPECT_EQ(count, homology_dim_at(c, deg, {Rational(x, 2)}, p));
        }
      }
  }
}

TEST(GridModule, IntervalOnThreePoints) {
  GridModule g = grid_module_of(interval_presentation(0, ExtendedReal(1)), make_grid({{-1, 0, 1}}));
  EXPECT_EQ(g.dims, (std::vector<std::size_t>{0, 1, 0}));
}

TEST(GridModule, FreeModule) {
  Presentation p = Presentation::zero(1, Field::prime(2));
  p.generators.push_back({"g", {Rational(0)}});
  GridModule g = grid_module_of(p, make_grid({{0, 1}}));
  EXPECT_EQ(g.dims, (std::vector<std::size_t>{1, 1}));
  EXPECT_EQ(rank_of(g.field, g.transitions[0][0]), 1u);
}

TEST(GridModule, DimensionsAndRanksMatchDenseOracle) {
  Rng rng(83);
  for (int k = 0; k < 25; ++k) {
    BifilteredComplex c = random_complex(rng, 2, 12);
    GradedChainComplex cc = chain_complex_of(c);
    Grid grid = make_grid(complex_axes(c));
    for (std::size_t deg : {0u, 1u}) {
      GridModule g = grid_module_of(cc, deg, grid);
      EXPECT_TRUE(squares_commute(g));
      RankTable ranks(g);
      for (std::size_t a = 0; a < grid.size(); ++a) {
        EXPECT_EQ(g.dims[a], homology_dim_at(c, deg, grid.grade(a)));
        for (std::size_t b = 0; b < grid.size(); ++b)
          if (leq(grid.grade(a), grid.grade(b)))
            EXPECT_EQ(ranks(a, b), homology_rank_between(c, deg, grid.grade(a), grid.grade(b)));
      }
    }
  }
}

TEST(GridModule, UnionFindAgreesWithGenericDegreeZero) {
  Rng rng(84);
  for (int k = 0; k < 25; ++k) {
    BifilteredComplex c = random_complex(rng, 2, 12);
    GradedChainComplex cc = chain_complex_of(c);
    Grid grid = make_grid(complex_axes(c));
    GridModule fast = grid_module_of(cc, 0, grid), generic = grid_module_generic(cc, 0, grid);
    EXPECT_EQ(fast.dims, generic.dims);
    RankTable rf(fast), rg(generic);
    for (std::size_t a = 0; a < grid.size(); ++a)
      for (std::size_t b = 0; b < grid.size(); ++b)
        if (leq(grid.grade(a), grid.grade(b))) EXPECT_EQ(rf(a, b), rg(a, b));
  }
}

TEST(GridModule, CriticalGridIsRefinementStable) {
  Rng rng(85);
  for (int k = 0; k < 15; ++k) {
    BifilteredComplex c = random_complex(rng, 2, 12);
    GradedChainComplex cc = chain_complex_of(c);
    for (std::size_t deg : {0u, 1u}) EXPECT_TRUE(refinement_mismatches(cc, deg, critical_grid(cc, deg)).empty());
  }
}

TEST(GridModule, CoarseGridDetected) {
  auto c = one_param({simplex({0}, {0}), simplex({1}, {0}), simplex({0, 1}, {1})});
  GradedChainComplex cc = chain_complex_of(c);
  EXPECT_FALSE(refinement_mismatches(cc, 0, make_grid({{0, 2}})).empty());
}

TEST(PresentHomology, SingleVertex) {
  BifilteredComplex c{2, {simplex({0}, {0, 0})}};
  Presentation p = present_homology_2d(chain_complex_of(c), 0);
  EXPECT_EQ(p.generators.size(), 1u);
  EXPECT_TRUE(p.relations.empty());
}

TEST(PresentHomology, TwoVerticesAndAnEdge) {
  BifilteredComplex c{2, {simplex({0}, {0, 0}), simplex({1}, {0, 0}), simplex({0, 1}, {1, 1})}};
  Presentation p = present_homology_2d(chain_complex_of(c), 0);
  auto [gens, rels] = grade_multisets(p);
  EXPECT_EQ(gens, (std::vector<Grade>{{0, 0}, {0, 0}}));
  EXPECT_EQ(rels, (std::vector<Grade>{{1, 1}}));
}

TEST(PresentHomology, HilbertFunctionMatchesDenseOracle) {
  Rng rng(86);
  for (int k = 0; k < 30; ++k) {
    BifilteredComplex c = random_complex(rng, 2, 12);
    const long p = k % 2 ? 3 : 2;
    GradedChainComplex cc = chain_complex_of(c, Field::prime(static_cast<std::uint64_t>(p)));
    Grid grid = make_grid(complex_axes(c));
    for (std::size_t deg : {0u, 1u}) {
      Presentation pr = present_homology_2d(cc, deg);
      EXPECT_FALSE(validate_presentation(pr));
      for (std::size_t q = 0; q < grid.size(); ++q)
        EXPECT_EQ(presentation_dim_at(pr, grid.grade(q)), homology_dim_at(c, deg, grid.grade(q), p));
      EXPECT_TRUE(hilbert_mismatches(pr, grid_module_of(cc, deg, grid)).empty());
    }
  }
}

TEST(PresentHomology, OneParameterMatchesBarcode) {
  Rng rng(87);
  for (int k = 0; k < 30; ++k) {
    BifilteredComplex c = random_complex(rng, 1, 12, 6);
    for (std::size_t deg : {0u, 1u})
      EXPECT_EQ(diagram_from_presentation(present_homology(chain_complex_of(c), deg)), barcode_1d(c, deg));
  }
}

TEST(Image, EqualScalesGiveTheSlice) {
  Rng rng(88);
  for (int k = 0; k < 10; ++k) {
    PointCloud x{2, {}};
    FunctionValues f;
    for (int i = 0; i < 5; ++i) {
      x.points.push_back({Rational(uniform_int(rng, 0, 8), 4), Rational(uniform_int(rng, 0, 8), 4)});
      f.push_back({half_grade(rng)});
    }
    deduplicate_points(x, f);
    BifilteredComplex c = cech_bifiltration(x, Metric::LInf, f, 2);
    const Rational d(1, 2);
    Grid grid = make_grid({half_axis(-1, 8)});
    for (std::size_t deg : {0u, 1u}) {
      GridModule img = image_grid_module(c, deg, d, d, grid);
      GridModule slice = grid_module_of(chain_complex_of(fixed_scale_slice(c, d)), deg, grid);
      EXPECT_EQ(img.dims, slice.dims);
    }
  }
}

TEST(Image, DimensionsAreInclusionRanks) {
  Rng rng(89);
  for (int k = 0; k < 10; ++k) {
    PointCloud x{2, {}};
    FunctionValues f;
    for (int i = 0; i < 5; ++i) {
      x.points.push_back({Rational(uniform_int(rng, 0, 8), 4), Rational(uniform_int(rng, 0, 8), 4)});
      f.push_back({half_grade(rng)});
    }
    deduplicate_points(x, f);
    BifilteredComplex c = cech_bifiltration(x, Metric::L2, f, 2);
    const Rational d1(1, 4), d2(1);
    Grid grid = make_grid({half_axis(-1, 8)});
    for (std::size_t deg : {0u, 1u}) {
      GridModule img = image_grid_module(c, deg, d1, d2, grid);
      GridMap map = slice_inclusion_map(c, deg, d1, d2, grid);
      EXPECT_TRUE(map.commutes());
      EXPECT_EQ(img.dims, map.pointwise_ranks());
      for (std::size_t p = 0; p < grid.size(); ++p)
        EXPECT_LE(img.dims[p], std::min(map.source.dims[p], map.target.dims[p]));
      EXPECT_TRUE(squares_commute(img));
    }
  }
}

TEST(Image, SpuriousLoopDies) {
  // Unit square in L2: the loop is born at scale 1/2 and filled at sqrt(2)/2.
  PointCloud x{2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  FunctionValues f(4, Grade{Rational(0)});
  BifilteredComplex c = cech_bifiltration(x, Metric::L2, f, 2);
  Grid grid = make_grid({{-1, 0}});
  GridModule slice = grid_module_of(chain_complex_of(fixed_scale_slice(c, Rational(1, 2))), 1, grid);
  GridModule img = image_grid_module(c, 1, Rational(1, 2), Rational(1), grid);
  EXPECT_EQ(slice.dims, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(img.dims, (std::vector<std::size_t>{0, 0}));
}

TEST(Resample, FloorExtension) {
  GridModule g = grid_module_of(interval_presentation(0, ExtendedReal(1)), make_grid({{0, 1}}));
  GridModule r = resample(g, make_grid({{-1, 0, Rational(1, 2), 1, 3}}));
  EXPECT_EQ(r.dims, (std::vector<std::size_t>{0, 1, 1, 0, 0}));
  EXPECT_EQ(rank_of(r.field, r.transitions[0][1]), 1u);
  EXPECT_EQ(rank_of(r.field, r.transitions[0][2]), 0u);
}

TEST(Restrict, ZeroOutsideBound) {
  Rng rng(90);
  BifilteredComplex c = random_complex(rng, 2, 12);
  Grid grid = make_grid(complex_axes(c));
  GridModule g = grid_module_of(chain_complex_of(c), 0, grid);
  std::vector<ExtendedReal> u{ExtendedReal(1), ExtendedReal::infinity()};
  GridModule r = restrict_grid_module(g, u);
  EXPECT_TRUE(squares_commute(r));
  for (std::size_t p = 0; p < grid.size(); ++p)
    EXPECT_EQ(r.dims[p], grid.grade(p)[0] < Rational(1) ? g.dims[p] : 0u);
}

TEST(RankShift, SelfDistanceIsZero) {
  Rng rng(91);
  for (int k = 0; k < 10; ++k) {
    BifilteredComplex c = random_complex(rng, 2, 12);
    GridModule g = grid_module_of(chain_complex_of(c), 0, make_grid(complex_axes(c)));
    EXPECT_EQ(rank_shift_distance(g, g), ExtendedReal(0));
  }
}

TEST(RankShift, IntervalsOnHalfStepGrid) {
  // rank C(0,2)(1 - e -> 1 + e) = 1 > 0 = rank C(0,1)(1 -> 1) for every e < 1.
  const auto axis = half_axis(0, 4);
  Grid grid = make_grid({axis});
  Presentation m = interval_presentation(0, ExtendedReal(1)), n = interval_presentation(0, ExtendedReal(2));
  ExtendedReal d = rank_shift_distance(grid_module_of(m, grid), grid_module_of(n, grid));
  EXPECT_EQ(d, rank_shift_oracle(m, n, axis));
  EXPECT_EQ(d, ExtendedReal(1));
}

TEST(RankShift, MatchesOracleAndBoundedByInterleaving) {
  Rng rng(92);
  const auto axis = half_axis(0, 12);
  Grid grid = make_grid({axis});
  for (int k = 0; k < 25; ++k) {
    Presentation m = random_presentation_1d(rng), n = random_presentation_1d(rng);
    ExtendedReal d = rank_shift_distance(grid_module_of(m, grid), grid_module_of(n, grid));
    EXPECT_EQ(d, rank_shift_oracle(m, n, axis));
    EXPECT_LE(d, interleaving_distance(m, n).value);
  }
}

TEST(RankShift, DifferentGridsUseCommonRefinement) {
  Presentation m = interval_presentation(0, ExtendedReal(1));
  GridModule a = grid_module_of(m, make_grid({{0, 1}})), b = grid_module_of(m, make_grid({half_axis(0, 4)}));
  EXPECT_EQ(rank_shift_distance(a, b), ExtendedReal(0));
}

TEST(RankShift, BoundedBySupDistanceOfFunctions) {
  Rng rng(93);
  const std::size_t n = 6;
  auto sublevel = [&](const std::vector<Rational>& f) {
    std::vector<Simplex> s;
    for (std::size_t v = 0; v < n; ++v) s.push_back(simplex({v}, {f[v]}));
    for (std::size_t v = 0; v < n; ++v) {
      const std::size_t w = (v + 1) % n;
      s.push_back(simplex({std::min(v, w), std::max(v, w)}, {max(f[v], f[w])}));
    }
    return one_param(s);
  };
  for (int k = 0; k < 20; ++k) {
    std::vector<Rational> f, g;
    Rational sup(0);
    for (std::size_t v = 0; v < n; ++v) {
      f.push_back(half_grade(rng));
      g.push_back(f.back() + Rational(uniform_int(rng, -2, 2), 4));
      sup = max(sup, abs(f.back() - g.back()));
    }
    std::set<Rational> values(f.begin(), f.end());
    values.insert(g.begin(), g.end());
    Grid grid = make_grid({std::vector<Rational>(values.begin(), values.end())});
    for (std::size_t deg : {0u, 1u}) {
      GridModule a = grid_module_of(chain_complex_of(sublevel(f)), deg, grid);
      GridModule b = grid_module_of(chain_complex_of(sublevel(g)), deg, grid);
      EXPECT_LE(rank_shift_distance(a, b), ExtendedReal(sup));
    }
  }
}
