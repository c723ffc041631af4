#include "support.hpp"

#include <mpers/onedim.hpp>

#include <gtest/gtest.h>

using namespace mpers;
using namespace mpers::testing;

namespace {

PersistenceDiagram diag(std::vector<DiagramPoint> pts) { return canonical_diagram(pts); }
DiagramPoint pt(long b, const ExtendedReal& d, std::size_t m = 1) { return {ExtendedReal(b), d, m}; }

// Independent oracle: costs written out here, matchings by plain recursion.
ExtendedReal coord(const ExtendedReal& x, const ExtendedReal& y) {
  if (x == y) return ExtendedReal(0);
  if (!x.is_finite() || !y.is_finite()) return ExtendedReal::infinity();
  return ExtendedReal(abs(x.value() - y.value()));
}
ExtendedReal half(const std::pair<ExtendedReal, ExtendedReal>& p) {
  if (!p.first.is_finite() || !p.second.is_finite()) return ExtendedReal::infinity();
  return ExtendedReal((p.second.value() - p.first.value()) / Rational(2));
}

ExtendedReal oracle(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  std::vector<std::pair<ExtendedReal, ExtendedReal>> a, b;
  for (const auto& p : d1.points)
    for (std::size_t k = 0; k < p.multiplicity; ++k) a.emplace_back(p.birth, p.death);
  for (const auto& p : d2.points)
    for (std::size_t k = 0; k < p.multiplicity; ++k) b.emplace_back(p.birth, p.death);
  std::vector<bool> used(b.size());
  ExtendedReal best = ExtendedReal::infinity();
  bool any = false;
  std::function<void(std::size_t, ExtendedReal)> go = [&](std::size_t i, ExtendedReal c) {
    if (i == a.size()) {
      for (std::size_t j = 0; j < b.size(); ++j)
        if (!used[j]) c = max(c, half(b[j]));
      if (!any || c < best) best = c;
      any = true;
      return;
    }
    go(i + 1, max(c, half(a[i])));
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      used[j] = true;
      go(i + 1, max(c, max(coord(a[i].first, b[j].first), coord(a[i].second, b[j].second))));
      used[j] = false;
    }
  };
  go(0, ExtendedReal(0));
  return best;
}

}  // namespace

TEST(DiagramFromPresentation, Examples) {
  EXPECT_EQ(diagram_from_presentation(interval_presentation(0, ExtendedReal(1))), diag({pt(0, 1)}));
  Presentation free = Presentation::zero(1, Field::prime(2));
  free.generators.push_back({"g", {Rational(0)}});
  EXPECT_EQ(diagram_from_presentation(free), diag({pt(0, ExtendedReal::infinity())}));
  Presentation p = Presentation::zero(1, Field::prime(2));
  p.generators.push_back({"g", {Rational(0)}});
  p.generators.push_back({"h", {Rational(1)}});
  p.relations.push_back({"r", {Rational(1)}, {{0, FieldElement::one(p.field)}, {1, FieldElement::one(p.field)}}});
  EXPECT_EQ(diagram_from_presentation(p), diag({pt(0, ExtendedReal::infinity())}));
  EXPECT_THROW(diagram_from_presentation(Presentation::zero(2, Field::prime(2))), DomainError);
}

TEST(PresentationFromDiagram, Examples) {
  Presentation c = presentation_from_diagram(diag({pt(0, 1)}));
  EXPECT_EQ(c.generators.size(), 1u);
  EXPECT_EQ(c.relations.size(), 1u);
  EXPECT_TRUE(presentation_from_diagram({}).generators.empty());
  PersistenceDiagram d = diag({pt(0, 1, 2), pt(2, ExtendedReal::infinity())});
  Presentation p = presentation_from_diagram(d);
  EXPECT_EQ(p.generators.size(), 3u);
  EXPECT_EQ(p.relations.size(), 2u);
  EXPECT_EQ(diagram_from_presentation(p), d);
}

TEST(PresentationFromDiagram, RoundTripOnRandomDiagrams) {
  Rng rng(61);
  for (int k = 0; k < 50; ++k) {
    PersistenceDiagram d = random_diagram(rng, 6);
    EXPECT_EQ(diagram_from_presentation(presentation_from_diagram(d)), d);
  }
}

TEST(DiagramFromPresentation, IntervalDimensionsReproduceModule) {
  // Sum over bars of [b, d) containing a equals dim M_a.
  Rng rng(62);
  for (int k = 0; k < 40; ++k) {
    Presentation p = random_presentation_1d(rng, 4, 4);
    PersistenceDiagram d = diagram_from_presentation(p);
    for (long x = -1; x <= 12; ++x) {
      ExtendedReal a(Rational(x, 2));
      std::size_t count = 0;
      for (const auto& q : d.points)
        if (q.birth <= a && a < q.death) count += q.multiplicity;
      EXPECT_EQ(count, presentation_dim_at(p, {Rational(x, 2)}));
    }
  }
}

TEST(Bottleneck, Examples) {
  EXPECT_EQ(bottleneck_distance({}, {}), ExtendedReal(0));
  EXPECT_EQ(bottleneck_distance(diag({pt(0, 1)}), {}), ExtendedReal(Rational(1, 2)));
  EXPECT_EQ(bottleneck_distance(diag({pt(0, 2)}), diag({{ExtendedReal(Rational(1, 2)), ExtendedReal(2), 1}})),
            ExtendedReal(Rational(1, 2)));
  EXPECT_EQ(bottleneck_distance(diag({pt(0, 1)}), diag({pt(0, 1)})), ExtendedReal(0));
  EXPECT_EQ(bottleneck_distance(diag({pt(0, 1)}), diag({pt(0, 2)})), ExtendedReal(1));
  EXPECT_EQ(bottleneck_distance(diag({pt(0, ExtendedReal::infinity())}), {}), ExtendedReal::infinity());
  EXPECT_EQ(bottleneck_distance(diag({pt(0, ExtendedReal::infinity())}), diag({pt(3, ExtendedReal::infinity())})),
            ExtendedReal(3));
}

TEST(Bottleneck, MatchesIndependentEnumeration) {
  Rng rng(63);
  for (int k = 0; k < 150; ++k) {
    PersistenceDiagram a = random_diagram(rng, 5), b = random_diagram(rng, 5);
    const ExtendedReal expected = oracle(a, b);
    EXPECT_EQ(bottleneck_distance(a, b), expected);
    EXPECT_EQ(brute_force_bottleneck(a, b), expected);
  }
}

TEST(Bottleneck, MatchingAttainsDistance) {
  Rng rng(64);
  for (int k = 0; k < 100; ++k) {
    PersistenceDiagram a = random_diagram(rng, 8), b = random_diagram(rng, 8);
    BottleneckResult r = bottleneck_matching(a, b);
    EXPECT_EQ(multibijection_cost(a, b, r.matching), r.distance);
  }
}

TEST(Bottleneck, MetricProperties) {
  Rng rng(65);
  for (int k = 0; k < 100; ++k) {
    PersistenceDiagram a = random_diagram(rng, 6), b = random_diagram(rng, 6), c = random_diagram(rng, 6);
    EXPECT_EQ(bottleneck_distance(a, a), ExtendedReal(0));
    EXPECT_EQ(bottleneck_distance(a, b), bottleneck_distance(b, a));
    EXPECT_LE(bottleneck_distance(a, c), bottleneck_distance(a, b) + bottleneck_distance(b, c));
  }
}

TEST(Bottleneck, NegativeInfiniteBirths) {
  DiagramPoint p{ExtendedReal::neg_infinity(), ExtendedReal(0), 1};
  DiagramPoint q{ExtendedReal::neg_infinity(), ExtendedReal(2), 1};
  EXPECT_EQ(bottleneck_distance(diag({p}), diag({q})), ExtendedReal(2));
  EXPECT_EQ(bottleneck_distance(diag({p}), {}), ExtendedReal::infinity());
}

TEST(Diagram, Validation) {
  EXPECT_THROW(canonical_diagram({pt(1, 1)}), DomainError);
  EXPECT_THROW(canonical_diagram({pt(2, 1)}), DomainError);
  EXPECT_EQ(canonical_diagram({pt(0, 1), pt(0, 1, 2)}), diag({pt(0, 1, 3)}));
  EXPECT_TRUE(canonical_diagram({pt(0, 1, 0)}).points.empty());
  EXPECT_THROW(brute_force_bottleneck(diag({pt(0, 1, 7)}), {}), DomainError);
}
