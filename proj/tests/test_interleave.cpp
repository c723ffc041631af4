#include "support.hpp"

#include <mpers/filtration.hpp>
#include <mpers/homology.hpp>
#include <mpers/interleave.hpp>
#include <mpers/onedim.hpp>

#include <gtest/gtest.h>

using namespace mpers;
using namespace mpers::testing;

namespace {

Presentation interval(long b, long d) { return interval_presentation(Rational(b), ExtendedReal(d)); }

Presentation free_at(const Rational& a) {
  Presentation p = Presentation::zero(1, Field::prime(2));
  p.generators.push_back({"g", {a}});
  return p;
}

Decision decide(const Presentation& m, const Presentation& n, const Rational& eps) {
  return decide_interleaving(m, n, eps).decision;
}

}  // namespace

TEST(Assemble, FreeModuleWithItself) {
  auto j = MonotoneAffineMap::translation(1, Rational(0));
  InterleavingSystem is = assemble_system(free_at(0), free_at(0), j, j);
  EXPECT_EQ(is.free_count(), 2u);  // A and B; no relation columns
  SolveResult r = solve_finite_field(is.system);
  ASSERT_EQ(r.status, SolveStatus::Solvable);
  for (const auto& x : *r.witness) EXPECT_TRUE(x.is_one());
}

TEST(Assemble, ShiftedFreeModulesAtZero) {
  auto j = MonotoneAffineMap::translation(1, Rational(0));
  InterleavingSystem is = assemble_system(free_at(0), free_at(1), j, j);
  EXPECT_FALSE(is.shape(VarMatrix::A).free[0][0]);
  EXPECT_TRUE(is.shape(VarMatrix::B).free[0][0]);
  EXPECT_EQ(solve_finite_field(is.system).status, SolveStatus::Unsolvable);
  EXPECT_FALSE(exhaustive_solvable(is.system));
}

TEST(Assemble, CountsMatchClosedForm) {
  Rng rng(51);
  for (int k = 0; k < 40; ++k) {
    Presentation m = random_presentation(rng, 1 + k % 2, 3, 3), n = random_presentation(rng, 1 + k % 2, 3, 3);
    auto j = MonotoneAffineMap::translation(m.n, half_grade(rng));
    InterleavingSystem is = assemble_system(m, n, j, j);
    const std::size_t gm = m.generators.size(), rm = m.relations.size();
    const std::size_t gn = n.generators.size(), rn = n.relations.size();
    EXPECT_EQ(is.slot_count(), closed_form_slot_count(gm, rm, gn, rn));
    EXPECT_EQ(is.system.equations.size(), closed_form_equation_count(gm, rm, gn, rn));
    EXPECT_LE(is.free_count(), is.slot_count());
    EXPECT_EQ(is.variables.size(), is.free_count());
  }
}

TEST(Assemble, ZeroPatternFollowsTargetGrade) {
  // Entry (i, j) of A is free iff gr(G_N,i) <= gr(G_M,j) + eps.
  Rng rng(52);
  for (int k = 0; k < 20; ++k) {
    Presentation m = random_presentation(rng, 2), n = random_presentation(rng, 2);
    const Rational eps = half_grade(rng);
    auto j = MonotoneAffineMap::translation(2, eps);
    InterleavingSystem is = assemble_system(m, n, j, j);
    const auto& a = is.shape(VarMatrix::A);
    for (std::size_t r = 0; r < a.rows; ++r)
      for (std::size_t c = 0; c < a.cols; ++c)
        EXPECT_EQ(a.free[r][c], leq(n.generators[r].grade, translate(m.generators[c].grade, eps)));
    const auto& e = is.shape(VarMatrix::E);
    for (std::size_t r = 0; r < e.rows; ++r)
      for (std::size_t c = 0; c < e.cols; ++c)
        EXPECT_EQ(e.free[r][c], leq(m.relations[r].grade, translate(m.generators[c].grade, eps + eps)));
  }
}

TEST(Assemble, ExportParsesBack) {
  auto j = MonotoneAffineMap::translation(1, Rational(1));
  InterleavingSystem is = assemble_system(interval(0, 1), interval(0, 2), j, j);
  std::string text = export_interleaving_system(is);
  EXPECT_NE(text.find("# var 1 = A[1][1]"), std::string::npos);
  EXPECT_EQ(parse_system(text), is.system);
}

TEST(Decide, Examples) {
  EXPECT_EQ(decide(interval(0, 1), interval(0, 1), 0), Decision::Yes);
  EXPECT_EQ(decide(interval(0, 1), interval(0, 2), 1), Decision::Yes);
  EXPECT_EQ(decide(interval(0, 1), interval(0, 2), Rational(1, 2)), Decision::No);
  Presentation zero = Presentation::zero(1, Field::prime(2));
  EXPECT_EQ(decide(interval(0, 1), zero, Rational(1, 2)), Decision::Yes);
  EXPECT_EQ(decide(interval(0, 1), zero, Rational(1, 4)), Decision::No);
}

TEST(Decide, Errors) {
  EXPECT_THROW(decide(interval(0, 1), interval_presentation(0, ExtendedReal(1), Field::prime(3)), 0), DomainError);
  Presentation q = interval_presentation(0, ExtendedReal(1), Field::rationals());
  EXPECT_THROW(decide(q, q, 0), DomainError);
  EXPECT_THROW(decide(interval(0, 1), interval(0, 1), -1), DomainError);
}

TEST(Decide, WitnessRespectsZeroPattern) {
  Rng rng(53);
  for (int k = 0; k < 20; ++k) {
    Presentation m = minimize_presentation(random_presentation(rng, 2)),
                 n = minimize_presentation(random_presentation(rng, 2));
    auto j = MonotoneAffineMap::translation(2, half_grade(rng));
    InterleavingSystem is = assemble_system(m, n, j, j);
    SolveResult r = solve_finite_field(is.system);
    if (r.status != SolveStatus::Solvable) continue;
    EXPECT_FALSE(evaluate(is.system, *r.witness));
    for (const auto& v : is.variables) EXPECT_TRUE(is.shape(v.matrix).free[v.row][v.col]);
  }
}

TEST(Decide, MonotoneInEpsilon) {
  Rng rng(54);
  for (int k = 0; k < 15; ++k) {
    Presentation m = random_presentation(rng, 1 + k % 2), n = random_presentation(rng, 1 + k % 2);
    bool seen_yes = false;
    for (long e = 0; e <= 10; ++e) {
      bool yes = decide(m, n, Rational(e, 2)) == Decision::Yes;
      EXPECT_FALSE(seen_yes && !yes);
      seen_yes = seen_yes || yes;
    }
  }
}

TEST(Decide, SymmetricInArguments) {
  Rng rng(55);
  for (int k = 0; k < 15; ++k) {
    Presentation m = random_presentation(rng, 2), n = random_presentation(rng, 2);
    Rational e = half_grade(rng);
    EXPECT_EQ(decide(m, n, e), decide(n, m, e));
  }
}

TEST(Generalized, IdentityMapsOnEqualModules) {
  Rng rng(56);
  for (int k = 0; k < 10; ++k) {
    Presentation m = random_presentation(rng, 2);
    auto id = MonotoneAffineMap::identity(2);
    EXPECT_EQ(decide_generalized(m, m, id, id).decision, Decision::Yes);
  }
}

TEST(Generalized, RipsAndCechAreScaleDoublingInterleaved) {
  Rng rng(57);
  for (int k = 0; k < 5; ++k) {
    PointCloud x{2, {}};
    const long count = uniform_int(rng, 2, 5);
    FunctionValues f;
    for (long i = 0; i < count; ++i) {
      x.points.push_back({Rational(uniform_int(rng, 0, 8), 4), Rational(uniform_int(rng, 0, 8), 4)});
      f.push_back({Rational(uniform_int(rng, 0, 4), 2)});
    }
    deduplicate_points(x, f);
    const Metric metric = k % 2 ? Metric::LInf : Metric::L2;
    Presentation rips = present_homology(chain_complex_of(rips_bifiltration(x, metric, f, 1)), 0);
    Presentation cech = present_homology(chain_complex_of(cech_bifiltration(x, metric, f, 1)), 0);
    auto j = MonotoneAffineMap::scale_doubling(2), id = MonotoneAffineMap::identity(2);
    EXPECT_EQ(decide_generalized(rips, cech, j, id).decision, Decision::Yes);
  }
}

TEST(Generalized, DecreasingMapRefused) {
  auto shrink = MonotoneAffineMap::translation(1, Rational(-1));
  EXPECT_THROW(decide_generalized(interval(0, 1), interval(0, 1), shrink, shrink), DomainError);
}

TEST(CandidateSet, Examples) {
  std::vector<ExtendedReal> expected{0, Rational(1, 2), 1, 2, ExtendedReal::infinity()};
  EXPECT_EQ(candidate_set(interval(0, 1), interval(0, 2)), expected);
  Presentation zero = Presentation::zero(1, Field::prime(2));
  EXPECT_EQ(candidate_set(zero, zero), (std::vector<ExtendedReal>{0, ExtendedReal::infinity()}));
  Rng rng(58);
  Presentation m = random_presentation(rng, 2);
  auto c = candidate_set(m, m);
  EXPECT_EQ(c.front(), ExtendedReal(0));
}

TEST(Distance, Examples) {
  EXPECT_EQ(interleaving_distance(interval(0, 1), interval(0, 1)).value, ExtendedReal(0));
  EXPECT_EQ(interleaving_distance(interval(0, 1), interval(2, 3)).value, ExtendedReal(Rational(1, 2)));
  EXPECT_EQ(interleaving_distance(interval(0, 4), interval(1, 3)).value, ExtendedReal(1));
  EXPECT_EQ(interleaving_distance(free_at(0), interval(0, 1)).value, ExtendedReal::infinity());
}

TEST(Distance, EqualsBruteForceBottleneckInOneParameter) {
  Rng rng(59);
  for (int k = 0; k < 30; ++k) {
    Presentation m = random_presentation_1d(rng), n = random_presentation_1d(rng);
    DistanceResult d = interleaving_distance(m, n);
    ASSERT_TRUE(d.exact);
    EXPECT_EQ(d.value, brute_force_bottleneck(diagram_from_presentation(m), diagram_from_presentation(n)));
  }
}

TEST(Distance, BudgetExhaustionGivesBracket) {
  Presentation m = direct_sum({interval(0, 3), interval(1, 4), interval(0, 2)});
  Presentation n = direct_sum({interval(0, 1), interval(2, 4), interval(1, 3)});
  DistanceResult d = interleaving_distance(m, n, 1);
  ASSERT_FALSE(d.exact);
  DistanceResult full = interleaving_distance(m, n);
  ASSERT_TRUE(full.exact);
  EXPECT_LE(full.value, d.upper);
  if (d.lower) EXPECT_LT(*d.lower, full.value);
}
