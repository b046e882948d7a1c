#include "lmplan/contact_schedule.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace lmplan;

namespace {

FootArray square_stance(double half_x = 0.3, double half_y = 0.2) {
  return {Vec3(half_x, half_y, 0), Vec3(half_x, -half_y, 0), Vec3(-half_x, half_y, 0), Vec3(-half_x, -half_y, 0)};
}

StanceState stance_at(const Vec3& com, const Vec3& vel) {
  StanceState s;
  s.feet = square_stance();
  for (auto& f : s.feet) f.head<2>() += com.head<2>();
  s.com = com;
  s.com_velocity = vel;
  return s;
}

std::string mask_string(const ContactMask& m) {
  std::string s;
  for (bool b : m) s += b ? '1' : '0';
  return s;
}

}  // namespace

TEST(Halfspaces, UnitSquareCentre) {
  const std::vector<Vec2> sq{Vec2(-0.5, -0.5), Vec2(0.5, -0.5), Vec2(0.5, 0.5), Vec2(-0.5, 0.5)};
  const auto rows = polygon_halfspaces(sq);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_NEAR(r.eval(Vec2(0, 0)), -0.5, 1e-15);
  EXPECT_NEAR(rows[0].eval(Vec2(0.1, -0.5)), 0.0, 1e-15);
}

TEST(Halfspaces, MarginShrinksPolygon) {
  const std::vector<Vec2> sq{Vec2(-0.5, -0.5), Vec2(0.5, -0.5), Vec2(0.5, 0.5), Vec2(-0.5, 0.5)};
  const auto rows = polygon_halfspaces(sq, 0.1);
  for (const auto& r : rows) EXPECT_NEAR(r.eval(Vec2(0, 0)), -0.4, 1e-15);
}

TEST(Halfspaces, RejectsClockwiseOrDegenerate) {
  const std::vector<Vec2> cw{Vec2(-0.5, 0.5), Vec2(0.5, 0.5), Vec2(0.5, -0.5), Vec2(-0.5, -0.5)};
  EXPECT_THROW(polygon_halfspaces(cw), ScheduleError);
  EXPECT_THROW(polygon_halfspaces({Vec2(0, 0), Vec2(1, 0)}), ScheduleError);
}

TEST(Halfspaces, AgreeWithWindingNumber) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec2> cloud;
  for (int i = 0; i < 12; ++i) cloud.emplace_back(u(rng), u(rng));
  const auto hull = convex_hull(cloud);
  ASSERT_GE(hull.size(), 3u);
  const auto rows = polygon_halfspaces(hull);
  for (int k = 0; k < 1000; ++k) {
    const Vec2 p(1.2 * u(rng), 1.2 * u(rng));
    double worst = -1e9;
    for (const auto& r : rows) worst = std::max(worst, r.eval(p));
    if (std::abs(worst) < 1e-12) continue;
    EXPECT_EQ(worst < 0, oracle::winding_number(hull, p) != 0) << p.transpose();
  }
}

TEST(SupportSequence, StationaryIsSinglePolygon) {
  const auto seq = generate_support_sequence(stance_at(Vec3(0, 0, 0.42), Vec3::Zero()), Vec3::Zero(), GaitParams{});
  ASSERT_EQ(seq.polygons.size(), 1u);
  EXPECT_EQ(mask_string(seq.polygons[0].contacts), "1111");
  EXPECT_NEAR(seq.polygons[0].interval.duration(), GaitParams{}.hold_horizon, 1e-15);
}

TEST(SupportSequence, TrotHasFivePolygonsInOrder) {
  const GaitParams g;
  const auto seq = generate_support_sequence(stance_at(Vec3(0, 0, 0.42), Vec3::Zero()), Vec3(0.3, 0, 0), g);
  ASSERT_EQ(seq.polygons.size(), 5u);
  const char* want[] = {"1111", "1001", "1111", "0110", "1111"};
  for (int i = 0; i < 5; ++i) EXPECT_EQ(mask_string(seq.polygons[static_cast<std::size_t>(i)].contacts), want[i]) << i;
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(seq.polygons[i].interval.t0, seq.polygons[i - 1].interval.tf);
  }
  EXPECT_NEAR(seq.polygons.front().interval.t0, 0.0, 1e-15);
  EXPECT_NEAR(seq.polygons.back().interval.tf, gait_cycle_duration(g, Vec3(0.3, 0, 0)), 1e-12);
}

TEST(SupportSequence, BoundaryResolvesToLaterPolygon) {
  const auto seq =
      generate_support_sequence(stance_at(Vec3(0, 0, 0.42), Vec3::Zero()), Vec3(0.3, 0, 0), GaitParams{});
  const double t = seq.polygons[1].interval.t0;
  EXPECT_EQ(mask_string(seq.at(t).contacts), "1001");
  EXPECT_THROW(seq.at(seq.polygons.back().interval.tf + 0.1), DomainError);
}

TEST(SupportSequence, CollinearFeetRejected) {
  StanceState s;
  s.feet = {Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0.2, 0, 0), Vec3(0.3, 0, 0)};
  s.com = Vec3(0, 0, 0.4);
  EXPECT_THROW(generate_support_sequence(s, Vec3::Zero(), GaitParams{}), ScheduleError);
}

TEST(Foothold, MatchesLipOracle) {
  const GaitParams g;
  const StanceState s = stance_at(Vec3(0.1, 0.05, 0.42), Vec3(0.25, 0.02, 0));
  const Vec3 v(0.3, 0, 0);
  for (int foot = 0; foot < 4; ++foot) {
    const Vec2 got = lip_foothold(g, s, foot, v, 0.35, 0.4);
    const Vec2 want = oracle::lip_foothold(s.com.head<2>(), s.com_velocity.head<2>(),
                                           g.hip_offsets[static_cast<std::size_t>(foot)], v.head<2>(), 0.42,
                                           g.gravity, 0.35, 0.4);
    EXPECT_LE((got - want).norm(), 1e-9);
  }
}

TEST(Foothold, SwingFeetLandOnOraclePositions) {
  const GaitParams g;
  const StanceState s = stance_at(Vec3(0, 0, 0.42), Vec3(0.3, 0, 0));
  const Vec3 v(0.3, 0, 0);
  const auto seq = generate_support_sequence(s, v, g);
  // the first diagonal phase (LF, RH in stance) ends at polygon 1's end
  const double t_td = seq.polygons[1].interval.tf;
  const double t_stance = gait_cycle_duration(g, v) - g.diagonal_duration;
  for (int foot : {kRF, kLH}) {
    const Vec2 want = oracle::lip_foothold(s.com.head<2>(), s.com_velocity.head<2>(),
                                           g.hip_offsets[static_cast<std::size_t>(foot)], v.head<2>(), 0.42,
                                           g.gravity, t_td, t_stance);
    EXPECT_LE((seq.polygons[2].feet[static_cast<std::size_t>(foot)].head<2>() - want).norm(), 1e-9);
  }
  // stance feet do not move
  for (int foot : {kLF, kRH}) {
    EXPECT_EQ(seq.polygons[2].feet[static_cast<std::size_t>(foot)], s.feet[static_cast<std::size_t>(foot)]);
  }
}

TEST(SupportSequence, PhaseContinuationMatchesTrotClock) {
  const GaitParams g;
  const Vec3 v(0.3, 0, 0);
  for (double phase : {0.0, 0.1, 0.33, 0.5, 0.71}) {
    const auto seq = generate_support_sequence(stance_at(Vec3(0, 0, 0.42), v), v, g, phase);
    EXPECT_EQ(mask_string(seq.polygons[0].contacts), mask_string(trot_contacts(g, v, phase))) << phase;
  }
}

TEST(SupportPolygon, MarginIsDistanceToUnshrunkEdge) {
  const auto seq = generate_support_sequence(stance_at(Vec3(0, 0, 0.42), Vec3::Zero()), Vec3::Zero(), GaitParams{});
  const auto& p = seq.polygons[0];
  // feet at +-0.3, +-0.2 with 0.03 patches: nearest edge is y = 0.23
  EXPECT_NEAR(p.margin_of(Vec2(0, 0)), 0.23, 1e-12);
  EXPECT_LT(p.margin_of(Vec2(0.5, 0)), 0.0);
}

TEST(ForceSchedule, ConstantPush) {
  ForceEvent e;
  e.interval = {0.0, 10.0};
  e.force = Vec3(-50, 0, 0);
  const ForceSchedule s({e});
  for (double t : {0.0, 3.3, 10.0}) {
    const ForceSample f = s.at(t);
    EXPECT_EQ(f.value, Vec3(-50, 0, 0));
    EXPECT_EQ(f.rate, Vec3::Zero());
    EXPECT_EQ(f.accel, Vec3::Zero());
  }
}

TEST(ForceSchedule, TransitionTakesLaterEvent) {
  ForceEvent a, b;
  a.interval = {0.0, 0.4};
  b.interval = {0.4, 0.8};
  b.force = Vec3(0, 0, 30);
  const ForceSchedule s({a, b});
  EXPECT_EQ(s.at(0.4).value, Vec3(0, 0, 30));
  EXPECT_EQ(s.at(0.39).value, Vec3::Zero());
  EXPECT_THROW(s.at(0.9), DomainError);
}

TEST(ForceSchedule, RampProfile) {
  ForceEvent e;
  e.interval = {0.0, 2.0};
  e.force = Vec3(1, 0, 0);
  e.rate = Vec3(0, 2, 0);
  e.accel = Vec3(0, 0, 4);
  const ForceSample f = ForceSchedule({e}).at(0.5);
  EXPECT_NEAR((f.value - Vec3(1, 1, 0.5)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((f.rate - Vec3(0, 2, 2)).norm(), 0.0, 1e-15);
}

TEST(ForceSchedule, RejectsGaps) {
  ForceEvent a, b;
  a.interval = {0.0, 0.4};
  b.interval = {0.5, 0.8};
  EXPECT_THROW(ForceSchedule({a, b}), ScheduleError);
}

TEST(ManipContact, ValidatesShapes) {
  ManipContact c;
  EXPECT_THROW(c.validate(), ScheduleError);
  c.jacobian = MatX::Identity(3, 3);
  c.tau_limit = VecX::Constant(3, 10.0);
  EXPECT_NO_THROW(c.validate());
  c.f_lo.z() = 5;
  c.f_hi.z() = 1;
  EXPECT_THROW(c.validate(), ScheduleError);
}
