#include <gtest/gtest.h>

#include <cmath>

#include "quadsafe/controller.hpp"
#include "quadsafe/errors.hpp"

using namespace quadsafe;

TEST(PositionLoop, ZeroErrorGivesZeroCommand) {
    QuadState s;
    s.r = {1.0, -2.0, 0.5};
    s.v = {0.3, 0.1, -0.2};
    Reference ref;
    ref.r = s.r;
    ref.r_dot = s.v;
    EXPECT_EQ(position_loop(s, ref, ControllerGains{}), Eigen::Vector3d::Zero());
}

TEST(PositionLoop, UnitProportionalResponse) {
    ControllerGains g;
    g.kp = Eigen::Vector3d::Ones();
    g.kd = Eigen::Vector3d::Zero();
    QuadState s;
    s.v = {0.4, 0.0, 0.0};
    Reference ref;
    ref.r = {1.0, 0.0, 0.0};
    ref.r_dot = s.v;
    EXPECT_EQ(position_loop(s, ref, g), Eigen::Vector3d(1.0, 0.0, 0.0));
}

TEST(Thrust, HoverValue) {
    EXPECT_NEAR(thrust_from_accel(0.0, 1.0, QuadParams{}), 4.4145, 1e-12);
}

TEST(Thrust, FreeFallCommandNeedsNoThrust) {
    EXPECT_NEAR(thrust_from_accel(9.81, 1.0, QuadParams{}), 0.0, 1e-15);
}

TEST(Thrust, TiltedUpwardCommand) {
    EXPECT_NEAR(thrust_from_accel(-9.81, 0.5, QuadParams{}), 17.658, 1e-12);
}

TEST(Thrust, ClampsToActuatorRange) {
    const QuadParams p;
    EXPECT_EQ(thrust_from_accel(100.0, 1.0, p), 0.0);
    EXPECT_EQ(thrust_from_accel(-1000.0, 1.0, p), p.f_max);
}

TEST(Thrust, SingularAttitudeThrows) {
    EXPECT_THROW(thrust_from_accel(0.0, 0.1, QuadParams{}), AttitudeSingular);
}

TEST(AttitudeLoop, EquilibriumGivesZeroRates) {
    const QuadParams p;
    const Eigen::Vector3d w = attitude_loop(QuadState{}, Eigen::Vector3d::Zero(), p.hoverThrust(), 0.0,
                                            ControllerGains{}, p);
    EXPECT_NEAR(w.norm(), 0.0, 1e-15);
}

TEST(AttitudeLoop, YawRateIsProportional) {
    const QuadParams p;
    const Eigen::Vector3d w = attitude_loop(QuadState{}, Eigen::Vector3d::Zero(), p.hoverThrust(), 0.1,
                                            ControllerGains{}, p);
    EXPECT_NEAR(w.z(), 0.2, 1e-12);
}

TEST(AttitudeLoop, YawErrorIsWrapped) {
    const QuadParams p;
    QuadState s;
    s.R = rotationFromEuler(0.0, 0.0, 3.0);
    const Eigen::Vector3d w = attitude_loop(s, Eigen::Vector3d::Zero(), p.hoverThrust(), -3.0, ControllerGains{}, p);
    EXPECT_NEAR(w.z(), 2.0 * (2.0 * M_PI - 6.0), 1e-12);
}

TEST(AttitudeLoop, LateralCommandTurnsTheVehicleTheRightWay) {
    const QuadParams p;
    const ControllerGains g;
    const Eigen::Vector3d cmd(1.0, -0.5, 0.0);
    QuadState s;
    auto accelError = [&](const QuadState& x, double f) {
        const Eigen::Vector3d a = Eigen::Vector3d(0.0, 0.0, p.g) - x.R.col(2) * f / p.m;
        return (cmd.head<2>() - a.head<2>()).norm();
    };
    const double e0 = accelError(s, thrust_from_accel(cmd.z(), s.R(2, 2), p));
    for (int i = 0; i < 400; ++i) {
        const double f = thrust_from_accel(cmd.z(), s.R(2, 2), p);
        const Eigen::Vector3d w_cmd = attitude_loop(s, cmd, f, 0.0, g, p);
        if (i == 0) {
            // +x needs R13 < 0: pitch rate q must be negative, roll rate p negative for -y.
            EXPECT_LT(w_cmd.y(), 0.0);
            EXPECT_LT(w_cmd.x(), 0.0);
        }
        const Eigen::Vector3d tau = body_rate_loop(s, w_cmd, g, p);
        s = step(s, ControlInput{f, tau}, p, 1e-3);
    }
    const double e1 = accelError(s, thrust_from_accel(cmd.z(), s.R(2, 2), p));
    EXPECT_LT(e1, 0.1 * e0);
}

TEST(AttitudeLoop, GuardsThrowBelowFloors) {
    const QuadParams p;
    EXPECT_THROW(attitude_loop(QuadState{}, Eigen::Vector3d::Zero(), 0.01, 0.0, ControllerGains{}, p), ThrustTooSmall);
    QuadState tipped;
    tipped.R = rotationFromEuler(1.5, 0.0, 0.0);
    EXPECT_THROW(attitude_loop(tipped, Eigen::Vector3d::Zero(), p.hoverThrust(), 0.0, ControllerGains{}, p),
                 AttitudeSingular);
    EXPECT_NO_THROW(
        attitude_loop_saturated(tipped, Eigen::Vector3d::Zero(), 0.0, 0.0, ControllerGains{}, p));
}

TEST(BodyRateLoop, ZeroErrorZeroTorque) {
    EXPECT_EQ(body_rate_loop(QuadState{}, Eigen::Vector3d::Zero(), ControllerGains{}, QuadParams{}),
              Eigen::Vector3d::Zero());
}

TEST(BodyRateLoop, RollRateStep) {
    ControllerGains g;
    g.k_omega = Eigen::Vector3d::Constant(10.0);
    const Eigen::Vector3d tau = body_rate_loop(QuadState{}, Eigen::Vector3d(1.0, 0.0, 0.0), g, QuadParams{});
    EXPECT_NEAR(tau.x(), 0.91, 1e-12);
    EXPECT_EQ(tau.y(), 0.0);
    EXPECT_EQ(tau.z(), 0.0);
}

TEST(BodyRateLoop, PrincipalSpinNeedsNoTorque) {
    QuadState s;
    s.omega = {0.0, 0.0, 1.0};
    EXPECT_NEAR(body_rate_loop(s, s.omega, ControllerGains{}, QuadParams{}).norm(), 0.0, 1e-15);
}

TEST(BodyRateLoop, TorqueStaysInBoundsAndClampIsIdempotent) {
    const QuadParams p;
    QuadState s;
    s.omega = {-30.0, 40.0, 0.0};
    const Eigen::Vector3d tau = body_rate_loop(s, Eigen::Vector3d(30.0, -40.0, 0.0), ControllerGains{}, p);
    EXPECT_EQ(std::abs(tau.x()), p.tau_max.x());
    EXPECT_EQ(std::abs(tau.y()), p.tau_max.y());
}

TEST(Gains, ValidationNamesTheKey) {
    ControllerGains g;
    g.k_psi = 0.0;
    try {
        g.validate();
        FAIL();
    } catch (const InvalidArgument& e) {
        EXPECT_NE(std::string(e.what()).find("k_psi_per_s"), std::string::npos);
    }
    ControllerLimits l;
    l.sin_tilt_max = 1.5;
    EXPECT_THROW(l.validate(), InvalidArgument);
}

TEST(WrapAngle, RangeIsHalfOpen) {
    EXPECT_NEAR(wrapAngle(3.0 * M_PI), M_PI, 1e-12);
    EXPECT_NEAR(wrapAngle(-M_PI), M_PI, 1e-12);
    EXPECT_NEAR(wrapAngle(0.5), 0.5, 0.0);
}
