#include <gtest/gtest.h>

#include <sstream>

#include "fogna/coarray.hpp"
#include "fogna/optimizer.hpp"

using namespace fogna;

namespace {
struct Expected {
  int n, n1, n2, n3;
  std::int64_t dof;
};
}  // namespace

TEST(Optimize, PublishedOptima) {
  const auto r9 = optimize(9);
  EXPECT_EQ(r9.best, FognaParams::from_split(5, 2, 2));
  EXPECT_EQ(r9.dof_star, 381);
  const auto r11 = optimize(11);
  EXPECT_EQ(r11.best, FognaParams::from_split(5, 3, 3));
  EXPECT_EQ(r11.dof_star, 715);
}

TEST(Optimize, NineteenSensors) {
  // Split (9,5,5) as printed; with E1 = 16 the allocation formula gives 4335.
  const auto r = optimize(19);
  EXPECT_EQ(r.best, FognaParams::from_split(9, 5, 5));
  EXPECT_EQ(r.best.e1, 16);
  EXPECT_EQ(r.dof_star, 4335);
}

TEST(Optimize, OptimaFourToTwenty) {
  // Independent oracle: the same search run in a scripting prototype.
  const std::vector<Expected> want = {
      {4, 2, 1, 1, 31},     {5, 3, 1, 1, 55},     {6, 4, 1, 1, 103},    {7, 4, 2, 1, 157},
      {8, 4, 2, 2, 261},    {9, 5, 2, 2, 381},    {10, 5, 3, 2, 511},   {11, 5, 3, 3, 715},
      {12, 6, 3, 3, 939},   {13, 6, 4, 3, 1177},  {14, 6, 4, 4, 1513},  {15, 8, 4, 3, 1877},
      {16, 8, 4, 4, 2413},  {17, 9, 4, 4, 2953},  {18, 9, 5, 4, 3547},  {19, 9, 5, 5, 4335},
      {20, 10, 5, 5, 5127},
  };
  for (const auto& w : want) {
    const auto r = optimize(w.n);
    EXPECT_EQ(r.best.n1, w.n1) << w.n;
    EXPECT_EQ(r.best.n2, w.n2) << w.n;
    EXPECT_EQ(r.best.n3, w.n3) << w.n;
    EXPECT_EQ(r.dof_star, w.dof) << w.n;
  }
}

TEST(Optimize, TraceNineteen) {
  const auto r = optimize(19);
  ASSERT_EQ(r.trace.size(), 16u);  // N1 = 2..17
  const auto& first = r.trace.front();
  EXPECT_EQ(first.params.n1, 2);
  EXPECT_EQ(first.params.n2, 9);
  EXPECT_EQ(first.params.n3, 8);
  EXPECT_EQ(first.dof, 987);
  const auto& last = r.trace.back();
  EXPECT_EQ(last.params.n1, 17);
  EXPECT_EQ(last.params.e1, 48);
  EXPECT_EQ(last.dof, 1159);
  EXPECT_EQ(r.trace[8].params.n1, 10);
  EXPECT_EQ(r.trace[8].dof, 4195);
}

TEST(Optimize, ResultInvariants) {
  for (int n = 4; n <= 24; ++n) {
    const auto r = optimize(n);
    EXPECT_EQ(r.best.total(), n);
    std::int64_t mx = 0;
    for (const auto& row : r.trace) {
      mx = std::max(mx, row.dof);
      EXPECT_EQ(row.params.total(), n);
      EXPECT_EQ(row.dof, allocation_dof(row.params));
    }
    EXPECT_EQ(r.dof_star, mx);
    // ties resolved toward the smallest N1
    for (const auto& row : r.trace)
      if (row.dof == r.dof_star) {
        EXPECT_EQ(row.params.n1, r.best.n1);
        break;
      }
    const auto [n2, n3] = tail_sizes(n, r.best.n1);
    EXPECT_EQ(r.best.n2, n2);
    EXPECT_EQ(r.best.n3, n3);
  }
}

TEST(Optimize, RejectsSmallN) {
  EXPECT_THROW(optimize(3), ParameterError);
  EXPECT_THROW(optimize(0), ParameterError);
  EXPECT_TRUE(optimize(4).n1_lower_bound_binding);
  EXPECT_FALSE(optimize(11).n1_lower_bound_binding);
}

TEST(Quadratic, ExamplesAndIdentity) {
  EXPECT_EQ(dof_quadratic(11, 5, 3), 715);
  EXPECT_EQ(dof_quadratic(11, 5, 0), 181);
  for (int n = 4; n <= 20; ++n)
    for (int n1 = 2; n1 <= n - 2; ++n1)
      for (int n3 = 1; n1 + n3 <= n - 1; ++n3)
        ASSERT_EQ(dof_quadratic(n, n1, n3),
                  competitor_dof(ArrayFamily::Fogna, {n1, n - n1 - n3, n3}));
}

TEST(Quadratic, ClosedFormSizeIsNearIntegerMaximiser) {
  // f is concave in N3; the closed-form size is the integer maximiser or one below it.
  for (int n = 4; n <= 24; ++n) {
    const auto r = optimize(n);
    const int n1 = r.best.n1;
    int arg = 1;
    for (int n3 = 1; n1 + n3 <= n - 1; ++n3)
      if (dof_quadratic(n, n1, n3) > dof_quadratic(n, n1, arg)) arg = n3;
    EXPECT_TRUE(arg == r.best.n3 || arg == r.best.n3 + 1) << n;
  }
  // an allocation where the printed floor is not the integer maximiser
  EXPECT_EQ(dof_quadratic(7, 4, 1), 157);
  EXPECT_EQ(dof_quadratic(7, 4, 2), 171);
}

TEST(Exhaustive, NeverBelowAllocation) {
  for (int n = 4; n <= 20; ++n) EXPECT_GE(exhaustive_optimum(n).dof, optimize(n).dof_star);
}

TEST(Ratio, BoundHolds) {
  for (int n : {8, 12, 16, 20}) {
    const double r = dof_growth_ratio(n);
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
  EXPECT_EQ(optimize(20).dof_star, 5127);
  EXPECT_THROW(dof_growth_ratio(10), ParameterError);
  EXPECT_THROW(dof_growth_ratio(4), ParameterError);
}

TEST(Measured, TraceMatchesCoarrayLowerBound) {
  // Every trace row's DOF is a hole-free range of the measured FOECA.
  for (int n = 7; n <= 10; ++n)
    for (const auto& row : optimize(n).trace) {
      const auto r = analyze_segment(foeca(build_fogna(row.params)));
      EXPECT_GE(r.dof, row.dof) << n << " N1=" << row.params.n1;
    }
}

TEST(TraceCsv, Layout) {
  std::ostringstream os;
  write_trace_csv(os, optimize(5));
  EXPECT_EQ(os.str(), "N1,N2,N3,M1,M2,E1,E2,DOF\n2,2,1,0,2,1,8,49\n3,1,1,1,1,2,9,55\n");
}
