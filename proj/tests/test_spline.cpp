#include "lmplan/spline.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lmplan;

namespace {

Vec6 random_coeffs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec6 c;
  for (int i = 0; i < 6; ++i) c(i) = u(rng);
  return c;
}

}  // namespace

TEST(BasisRow, MonomialsAtZeroAndOne) {
  Vec6 expect0;
  expect0 << 0, 0, 0, 0, 0, 1;
  EXPECT_EQ(basis_row(0.0, 0), expect0);
  EXPECT_EQ(basis_row(1.0, 0), Vec6::Ones());
}

TEST(BasisRow, SecondDerivativeAtHalf) {
  Vec6 expect;
  expect << 2.5, 3, 3, 2, 0, 0;
  EXPECT_LT((basis_row(0.5, 2) - expect).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Spline3, ConstantAndLinear) {
  Spline3 s;
  s.domain = {0.0, 2.0};
  s.x(5) = 1.5;
  s.y(5) = 1.5;
  s.z(5) = 1.5;
  for (double t : {0.0, 0.7, 2.0}) EXPECT_EQ(s.eval(t, 0), Vec3::Constant(1.5));

  Spline3 l;
  l.domain = {1.0, 3.0};
  l.x(4) = 0.4;
  l.y(4) = 0.4;
  l.z(4) = 0.4;
  for (double t : {1.0, 1.9, 3.0}) EXPECT_LT((l.eval(t, 1) - Vec3::Constant(0.4)).norm(), 1e-15);
}

TEST(Spline3, MatchesDirectMonomialSummation) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  Spline3 s;
  s.x = random_coeffs(rng);
  s.y = random_coeffs(rng);
  s.z = random_coeffs(rng);
  s.domain = {0.4, 1.6};
  for (int k = 0; k < 100; ++k) {
    const double t = s.domain.t0 + ut(rng) * s.domain.duration();
    const double tau = t - s.domain.t0;
    for (int d = 0; d <= 2; ++d) {
      const Vec3 got = s.eval(t, d);
      const Vec3 want(oracle::monomial(s.x, tau, d), oracle::monomial(s.y, tau, d), oracle::monomial(s.z, tau, d));
      EXPECT_LE((got - want).cwiseAbs().maxCoeff(), 1e-12 * (1.0 + want.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(Spline3, DerivativesAgreeWithFiniteDifferences) {
  std::mt19937_64 rng(5);
  Spline3 s;
  s.x = random_coeffs(rng);
  s.y = random_coeffs(rng);
  s.z = random_coeffs(rng);
  s.domain = {0.0, 1.0};
  const double h = 1e-5;
  for (double t : {0.1, 0.35, 0.5, 0.9}) {
    const Vec3 fd1 = (s.eval(t + h, 0) - s.eval(t - h, 0)) / (2 * h);
    const Vec3 fd2 = (s.eval(t + h, 1) - s.eval(t - h, 1)) / (2 * h);
    EXPECT_LE((fd1 - s.eval(t, 1)).norm(), 1e-6 * (1.0 + s.eval(t, 1).norm()));
    EXPECT_LE((fd2 - s.eval(t, 2)).norm(), 1e-6 * (1.0 + s.eval(t, 2).norm()));
  }
}

TEST(Spline3, StackRoundTrip) {
  std::mt19937_64 rng(2);
  Spline3 s;
  s.x = random_coeffs(rng);
  s.y = random_coeffs(rng);
  s.z = random_coeffs(rng);
  s.domain = {0.2, 0.5};
  const Spline3 back = Spline3::from_stacked(s.stacked(), s.domain);
  EXPECT_EQ(back.x, s.x);
  EXPECT_EQ(back.y, s.y);
  EXPECT_EQ(back.z, s.z);
  EXPECT_EQ(s.stacked().segment<6>(6), s.y);
}

TEST(PiecewiseTrajectory, LooksUpPiecesHalfOpen) {
  Spline3 a, b;
  a.domain = {0.0, 0.5};
  b.domain = {0.5, 1.0};
  a.x(5) = 1.0;
  b.x(5) = 2.0;
  PiecewiseTrajectory tr({a, b});
  EXPECT_EQ(tr.piece_index(0.25), 0u);
  EXPECT_EQ(tr.piece_index(0.5), 1u);
  EXPECT_EQ(tr.piece_index(1.0), 1u);
  EXPECT_DOUBLE_EQ(tr.eval(0.5, 0).x(), 2.0);
  EXPECT_THROW(tr.eval(1.2, 0), DomainError);
  EXPECT_THROW(tr.eval(-0.1, 0), DomainError);
}

TEST(PiecewiseTrajectory, RejectsGaps) {
  Spline3 a, b;
  a.domain = {0.0, 0.5};
  b.domain = {0.6, 1.0};
  EXPECT_THROW(PiecewiseTrajectory({a, b}), DomainError);
}

TEST(SampleTimes, SixEvenSamplesWithEndpoints) {
  const auto s = sample_times({0.0, 1.0});
  const double want[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s[static_cast<std::size_t>(i)], want[i], 1e-15);
  const auto h = sample_times({0.0, 0.5});
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(h[static_cast<std::size_t>(i)], 0.1 * i, 1e-15);
}

TEST(SampleTimes, DegenerateDomainThrows) { EXPECT_THROW(sample_times({2.0, 2.0}), DomainError); }

TEST(AccelGram, LeadingEntryOnUnitDomain) {
  const Mat6 g = accel_gram({0.0, 1.0});
  EXPECT_NEAR(g(0, 0), 400.0 / 7.0, 1e-12);
}

TEST(AccelGram, LinearTermsDoNotContribute) {
  const Mat6 g = accel_gram({0.3, 0.9});
  EXPECT_EQ(g.rightCols<2>(), (Eigen::Matrix<double, 6, 2>::Zero()));
  EXPECT_EQ(g.bottomRows<2>(), (Eigen::Matrix<double, 2, 6>::Zero()));
}

TEST(AccelGram, MatchesQuadrature) {
  for (TimeDomain d : {TimeDomain{0.3, 0.9}, TimeDomain{0.0, 0.1}, TimeDomain{1.0, 3.5}}) {
    const Mat6 g = accel_gram(d);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        const double q = oracle::integrate(
            [&](double tau) {
              Vec6 ei = Vec6::Zero(), ej = Vec6::Zero();
              ei(i) = 1.0;
              ej(j) = 1.0;
              return oracle::monomial(ei, tau, 2) * oracle::monomial(ej, tau, 2);
            },
            d.t0, d.tf);
        EXPECT_LE(std::abs(g(i, j) - q), 1e-8 * std::max(1.0, std::abs(q))) << i << "," << j;
      }
    }
  }
}
