#include <gtest/gtest.h>

#include "quadsafe/safety_filter.hpp"

using namespace quadsafe;

namespace {

std::vector<ScheduledBarrier> altitudeSet(double p_z) {
    return {{BarrierSpec::altitudePosition(0.0, p_z), EcbfGains::defaultFor(2)}};
}

std::vector<ScheduledBarrier> lateralSet() {
    return {{BarrierSpec::lateralPosition(0.0, 0.0, 2.0, 2.0), EcbfGains::defaultFor(4)},
            {BarrierSpec::lateralVelocity(1.25, 0.9), EcbfGains::defaultFor(3)}};
}

}  // namespace

TEST(FilterThrust, SlackBarrierPassesNominal) {
    QuadState s;
    s.r.z() = 0.5;
    s.v.z() = 0.2;
    const FilterResult r = filter_thrust(s, 4.7, altitudeSet(50.0), QuadParams{});
    EXPECT_EQ(r.event, FilterEvent::None);
    EXPECT_EQ(r.u_star(0), 4.7);
}

TEST(FilterThrust, ClimbingTowardTheCeilingAddsThrust) {
    // z'' = g - R33 F / m, so braking motion toward +p_z needs more thrust.
    const QuadParams p;
    QuadState s;
    s.r.z() = 1.9;
    s.v.z() = 0.5;
    const double f_hat = p.hoverThrust();
    const FilterResult r = filter_thrust(s, f_hat, altitudeSet(2.0), p);
    ASSERT_EQ(r.event, FilterEvent::None);
    EXPECT_GT(r.u_star(0), f_hat);
    // The filtered thrust sits exactly on the closed-form bound F >= -b / a.
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_NEAR(r.u_star(0), -r.rows[0].b / r.rows[0].a(0), 1e-12);
}

TEST(FilterThrust, NoRowsClampsToMaximum) {
    const FilterResult r = filter_thrust(QuadState{}, 50.0, {}, QuadParams{});
    EXPECT_EQ(r.u_star(0), 36.0);
}

TEST(FilterThrust, IgnoresLateralBarriers) {
    const FilterResult r = filter_thrust(QuadState{}, 3.0, lateralSet(), QuadParams{});
    EXPECT_TRUE(r.rows.empty());
    EXPECT_EQ(r.u_star(0), 3.0);
}

TEST(FilterThrust, FallbackPoliciesOnInfeasibleRows) {
    // Diving out of a thin slab: no admissible thrust stops it in time.
    const QuadParams p;
    QuadState s;
    s.r.z() = 0.09;
    s.v.z() = 4.0;
    const auto set = altitudeSet(0.1);
    FilterOptions opts;
    const FilterResult least = filter_thrust(s, 4.0, set, p, opts);
    EXPECT_EQ(least.event, FilterEvent::Infeasible);
    EXPECT_NEAR(least.u_star(0), p.f_max, kQpFeasibilityTol);

    opts.fallback = FallbackPolicy::NominalClamped;
    EXPECT_EQ(filter_thrust(s, 40.0, set, p, opts).u_star(0), p.f_max);

    opts.fallback = FallbackPolicy::HoldLast;
    opts.previous = QpVector::Constant(1, 7.5);
    const FilterResult held = filter_thrust(s, 4.0, set, p, opts);
    EXPECT_EQ(held.event, FilterEvent::Infeasible);
    EXPECT_EQ(held.u_star(0), 7.5);
}

TEST(FilterTorque, CenteredHoverPassesNominal) {
    const QuadParams p;
    const Eigen::Vector2d tau(0.3, -0.2);
    const FilterResult r = filter_torque(QuadState{}, tau, p.hoverThrust(), lateralSet(), p);
    EXPECT_EQ(r.event, FilterEvent::None);
    EXPECT_EQ(r.u_star, QpVector(tau));
}

TEST(FilterTorque, NoRowsClampsToMomentBound) {
    const QuadParams p;
    const FilterResult r = filter_torque(QuadState{}, Eigen::Vector2d(25.0, 0.0), p.hoverThrust(), {}, p);
    EXPECT_EQ(r.u_star(0), 20.0);
    EXPECT_EQ(r.u_star(1), 0.0);
}

TEST(FilterTorque, RowsDependOnTheAppliedThrust) {
    // Cascade contract: the torque QP must see this step's filtered thrust.
    const QuadParams p;
    QuadState s;
    s.r = {1.5, -1.0, 0.0};
    s.v = {0.6, 0.3, 0.0};
    s.R = rotationFromEuler(0.1, -0.15, 0.2);
    s.omega = {0.2, 0.1, 0.0};
    const auto set = lateralSet();
    const FilterResult a = filter_torque(s, Eigen::Vector2d::Zero(), 4.0, set, p);
    const FilterResult b = filter_torque(s, Eigen::Vector2d::Zero(), 6.0, set, p);
    ASSERT_EQ(a.rows.size(), 2u);
    ASSERT_EQ(b.rows.size(), 2u);
    for (int i = 0; i < 2; ++i) {
        EXPECT_GT((a.rows[i].a - b.rows[i].a).norm(), 1e-6);
    }
}

TEST(FilterTorque, SingularChainBypassesTheQp) {
    const QuadParams p;
    QuadState s;
    s.r.x() = 0.5;
    const FilterResult r = filter_torque(s, Eigen::Vector2d(1.0, 2.0), 0.001, lateralSet(), p);
    EXPECT_EQ(r.event, FilterEvent::ThrustTooSmall);
    EXPECT_FALSE(r.solved);
    EXPECT_EQ(r.u_star, QpVector(Eigen::Vector2d(1.0, 2.0)));
}

TEST(FilterTorque, OptimalSolutionsCarryKktCertificates) {
    const QuadParams p;
    QuadState s;
    s.r = {1.95, 0.0, 0.0};
    s.v = {1.0, 0.2, 0.0};
    s.R = rotationFromEuler(0.05, -0.2, 0.0);
    const FilterResult r = filter_torque(s, Eigen::Vector2d(0.0, 0.0), p.hoverThrust(), lateralSet(), p);
    ASSERT_TRUE(r.solved);
    ASSERT_EQ(r.solution.status, QpStatus::Optimal);
    EXPECT_LE(r.solution.kkt_residual, 1e-8);
    for (const auto& row : r.rows) EXPECT_GE(row.a.dot(r.u_star) + row.b, -1e-9 * (1.0 + row.a.norm()));
}
