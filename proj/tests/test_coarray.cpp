#include <gtest/gtest.h>

#include <random>

#include "fogna/coarray.hpp"
#include "fogna/optimizer.hpp"

using namespace fogna;

namespace {

// Independent oracle: brute-force set of signed quadruple sums.
std::set<Lag> brute_foca(const std::vector<Lag>& p, std::array<int, 4> sg) {
  std::set<Lag> out;
  for (Lag a : p)
    for (Lag b : p)
      for (Lag c : p)
        for (Lag d : p) out.insert(sg[0] * a + sg[1] * b + sg[2] * c + sg[3] * d);
  return out;
}

SensorArray random_array(std::mt19937& rng, int n, int span) {
  std::uniform_int_distribution<int> u(1, span);
  std::vector<Position> p{0};
  while (static_cast<int>(p.size()) < n) p.push_back(u(rng));
  return SensorArray::normalized(p);
}

}  // namespace

TEST(CrossSum, Basics) {
  EXPECT_EQ(cross_sum({0, 1}, {0, 10}), (LagSet{0, 1, 10, 11}));
  EXPECT_EQ(cross_sum({0}, {3, 7, 9}), (LagSet{3, 7, 9}));
  EXPECT_EQ(cross_sum({0, 1, 3, 5, 6}, {0, 1, 3, 5, 6}), range_set(0, 12));
  EXPECT_TRUE(cross_sum({}, {1, 2}).empty());
}

TEST(PairCoarrays, Examples) {
  const auto d = diff_coarray(SensorArray({0, 1, 4, 6}));
  EXPECT_EQ(d.underlying_set(), range_set(-6, 6));
  EXPECT_EQ(d.total(), 16u);
  const auto s = sum_coarray(SensorArray({0, 1, 3, 5, 6}));
  EXPECT_EQ(s.underlying_set(), range_set(0, 12));
  EXPECT_EQ(s.total(), 25u);
  const auto one = diff_coarray(SensorArray({0}));
  EXPECT_EQ(one.underlying_set(), LagSet{0});
  EXPECT_EQ(one.multiplicity(0), 1u);
}

TEST(Foca, CaseOneOfPair) {
  const auto f = foca(SensorArray({0, 1}), FocCase::One);
  EXPECT_EQ(f.underlying_set(), (LagSet{-1, 0, 1, 2, 3}));
  EXPECT_EQ(f.total(), 16u);
  // multiplicities: binomial-like counts of (a+b+c) - d
  EXPECT_EQ(f.multiplicity(-1), 1u);
  EXPECT_EQ(f.multiplicity(3), 1u);
  EXPECT_EQ(f.multiplicity(1), 6u);
}

TEST(Foca, MatchesBruteForceAndCaseSymmetries) {
  std::mt19937 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_array(rng, 2 + rep % 5, 25);
    const std::vector<Lag> p(s.positions().begin(), s.positions().end());
    for (FocCase c : kAllFocCases) {
      const auto f = foca(s, c);
      const auto want = brute_foca(p, sign_pattern(c));
      EXPECT_EQ(f.underlying_set(), LagSet(want.begin(), want.end()));
      EXPECT_EQ(f.total(), static_cast<std::uint64_t>(std::pow(s.size(), 4)));
    }
    const auto f2 = foca(s, FocCase::Two);
    EXPECT_TRUE(f2.same_counts(f2.negated()));
    EXPECT_TRUE(foca(s, FocCase::Three).same_counts(foca(s, FocCase::One).negated()));
  }
}

TEST(Foeca, UnionMultisetSumAndConservation) {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 15; ++rep) {
    const auto s = random_array(rng, 2 + rep % 6, 40);
    const auto f = foeca(s);
    const auto n4 = static_cast<std::uint64_t>(std::pow(s.size(), 4));
    EXPECT_EQ(f.total(), 3 * n4);
    EXPECT_TRUE(f.same_counts(f.negated()));
    LagSet u;
    for (FocCase c : kAllFocCases) u = set_union(u, foca(s, c).underlying_set());
    EXPECT_EQ(f.underlying_set(), u);
    for (const auto& [lag, m] : f.entries()) {
      std::uint64_t sum = 0;
      for (FocCase c : kAllFocCases) sum += foca(s, c).multiplicity(lag);
      ASSERT_EQ(m, sum);
    }
  }
}

TEST(Foeca, SingleSensor) {
  const auto f = foeca(SensorArray({0}));
  EXPECT_EQ(f.underlying_set(), LagSet{0});
  EXPECT_EQ(f.multiplicity(0), 3u);
}

TEST(Foeca, FourSensorArrayHoles) {
  // Brute force over the signed sums: 18 = 5+5+8-0 and 20 = 8+8+5-1 are
  // case-one lags; 22 is the only missing non-negative lag below 24.
  const auto f = foeca(SensorArray({0, 1, 5, 8}));
  LagSet positive;
  for (Lag l : f.underlying_set())
    if (l >= 0) positive.push_back(l);
  LagSet want = range_set(0, 21);
  want.push_back(23);
  want.push_back(24);
  EXPECT_EQ(positive, want);
  const auto r = analyze_segment(f);
  EXPECT_EQ(r.half_span, 21);
  EXPECT_EQ(r.holes, (LagSet{-22, 22}));
}

TEST(Foeca, GeneratorsMatchMultiplicityAndPositions) {
  const auto s = build_fogna(4, 2, 1);
  const auto f = foeca(s, true);
  ASSERT_TRUE(f.has_generators());
  std::uint64_t total = 0;
  for (const auto& [lag, gens] : f.generators()) {
    ASSERT_EQ(gens.size(), f.multiplicity(lag));
    for (const auto& g : gens) ASSERT_EQ(virtual_position(s, g.foc_case, g.idx), lag);
    total += gens.size();
  }
  EXPECT_EQ(total, 3 * 7u * 7u * 7u * 7u);
  EXPECT_THROW(foeca(s).generators(), PreconditionError);
}

TEST(Generator, FlatIndexRowMajor) {
  Generator g{FocCase::Two, {1, 2, 3, 4}};
  EXPECT_EQ(g.flat(5), ((1u * 5 + 2) * 5 + 3) * 5 + 4);
}

TEST(Segment, TrivialAndPrecondition) {
  const LagMultiset l(CoarrayKind::Dca, {{-1, 1}, {0, 1}, {1, 1}});
  const auto r = analyze_segment(l);
  EXPECT_EQ(r.dof, 3);
  EXPECT_TRUE(r.holes.empty());
  const LagMultiset no_zero(CoarrayKind::Dca, {{-1, 1}, {1, 1}});
  EXPECT_THROW(analyze_segment(no_zero), PreconditionError);
  const LagMultiset asym(CoarrayKind::Sca, {{0, 1}, {1, 1}, {2, 1}, {5, 1}});
  const auto ra = analyze_segment(asym);
  EXPECT_EQ(ra.half_span, 0);
  EXPECT_EQ(ra.holes, (LagSet{3, 4}));
}

TEST(Segment, ReportPropertiesOnRandomArrays) {
  std::mt19937 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = random_array(rng, 2 + rep % 5, 30);
    const auto f = foeca(s);
    const auto r = analyze_segment(f);
    EXPECT_EQ(r.dof % 2, 1);
    for (Lag m = -r.half_span; m <= r.half_span; ++m) ASSERT_TRUE(f.contains(m));
    EXPECT_FALSE(f.contains(r.half_span + 1) && f.contains(-r.half_span - 1));
    for (Lag h : r.holes) ASSERT_FALSE(f.contains(h));
    EXPECT_EQ(static_cast<std::size_t>(r.full_max - r.full_min + 1), f.entries().size() + r.holes.size());
  }
}

TEST(Segment, WorkedExampleEleven) {
  // The guaranteed range of the construction is [-357, 357]; the measured
  // maximal run is longer because 358 = 306 + 51 + 1 - 0 is also a case-one lag.
  const auto p = FognaParams::from_split(5, 3, 3);
  const auto f = foeca(build_fogna(p));
  EXPECT_EQ(guaranteed_half_span(p), 357);
  for (Lag m = -357; m <= 357; ++m) ASSERT_TRUE(f.contains(m));
  EXPECT_TRUE(f.contains(358));
  EXPECT_EQ(analyze_segment(f).half_span, 371);
}

TEST(Segment, NineSensorMeasuredRun) {
  const auto p = FognaParams::from_split(5, 2, 2);
  const auto r = analyze_segment(foeca(build_fogna(p)));
  EXPECT_EQ(2 * guaranteed_half_span(p) + 1, 381);
  EXPECT_EQ(r.dof, 409);
}

TEST(Construction, StepTwoCoversClosedRange) {
  for (int n = 7; n <= 13; ++n) {
    const auto p = optimize(n).best;
    const Lag w = 2 * p.e1 + p.n2 * (2 * p.e1 + 1);
    EXPECT_EQ(construction_step2(p), range_set(-w, w)) << n;
    EXPECT_EQ(construction_step3(p), range_set(-guaranteed_half_span(p), guaranteed_half_span(p))) << n;
  }
}

TEST(Construction, GuaranteedRangeInsideFoecaForAllocations) {
  for (int n = 7; n <= 15; ++n) {
    const auto p = optimize(n).best;
    const auto f = foeca(build_fogna(p));
    const auto r = analyze_segment(f);
    EXPECT_GE(r.half_span, guaranteed_half_span(p)) << n;
    for (Lag h : r.holes) EXPECT_GT(std::abs(h), r.half_span);
  }
}

TEST(Json, Shapes) {
  const auto l = foeca(SensorArray({0, 1}));
  const auto j = to_json(l);
  EXPECT_EQ(j["kind"], "FOECA");
  EXPECT_EQ(j["total"], 48);
  EXPECT_EQ(j["entries"].size(), l.entries().size());
  const auto r = to_json(analyze_segment(l));
  EXPECT_EQ(r["central_consecutive"][0], -3);
  EXPECT_EQ(r["central_consecutive"][1], 3);
  EXPECT_EQ(r["dof"], 7);
  EXPECT_TRUE(r["holes"].empty());
}
