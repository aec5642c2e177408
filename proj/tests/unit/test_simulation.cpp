#include <gtest/gtest.h>

#include <cmath>

#include "quadsafe/errors.hpp"
#include "quadsafe/scenario_io.hpp"
#include "quadsafe/simulation.hpp"

using namespace quadsafe;

namespace {

Scenario quiet(double duration) {
    Scenario sc;
    sc.duration = duration;
    sc.reference.amplitude = Eigen::Vector3d::Zero();
    return sc;
}

double minAfterEntry(const SimulationResult& res, BarrierDomain d) {
    const auto s = summarize(res.records, 1e-3);
    return s.barriers[static_cast<std::size_t>(d)].min_h_after_entry;
}

}  // namespace

TEST(Reference, StartsAtOriginWithPeakVelocity) {
    SinusoidReference ref;
    ref.amplitude = {2.0, 1.5, 1.0};
    ref.frequency = {0.4, 0.5, 0.3};
    const Reference r = reference_at(0.0, ref);
    EXPECT_EQ(r.r, Eigen::Vector3d::Zero());
    EXPECT_NEAR((r.r_dot - Eigen::Vector3d(0.8, 0.75, 0.3)).norm(), 0.0, 1e-15);
}

TEST(Reference, SinePeak) {
    SinusoidReference ref;
    ref.amplitude = {2.0, 2.0, 1.0};
    ref.frequency = {0.4, 0.4, 0.3};
    EXPECT_NEAR(reference_at(M_PI / (2.0 * 0.4), ref).r.x(), 2.0, 1e-15);
}

TEST(Reference, YawFacesThePlanarReference) {
    SinusoidReference ref;
    ref.amplitude = {1.0, 1.0, 0.0};
    ref.frequency = {0.5, 0.5, 0.0};
    EXPECT_NEAR(reference_at(M_PI, ref).psi, M_PI / 4.0, 1e-15);
    ref.yaw_mode = YawMode::Constant;
    ref.yaw = 0.7;
    EXPECT_EQ(reference_at(1.0, ref).psi, 0.7);
}

TEST(Run, HoverStaysPut) {
    Scenario sc = quiet(10.0);
    sc.initial_state = QuadState{};
    const SimulationResult res = run(sc);
    ASSERT_FALSE(res.aborted);
    EXPECT_EQ(res.records.size(), 10000u);
    for (const auto& r : res.records) ASSERT_LE(r.state.r.norm(), 1e-3) << "t=" << r.t;
}

TEST(Run, CriticallyDampedAltitudeStepSettles) {
    Scenario sc = quiet(6.0);
    sc.gains.kp = Eigen::Vector3d::Constant(4.0);
    sc.gains.kd = Eigen::Vector3d::Constant(4.0);
    sc.initial_state.r.z() = 1.0;
    const SimulationResult res = run(sc);
    for (const auto& r : res.records) {
        if (r.t >= 3.0) ASSERT_LE(std::abs(r.state.r.z()), 0.02) << "t=" << r.t;
    }
}

TEST(Run, NominalLoopTracksModerateSinusoids) {
    Scenario sc;
    sc.reference.amplitude = {2.0, 2.0, 2.0};
    sc.reference.frequency = {0.5, 0.5, 0.5};
    const SimulationResult res = run(sc);
    ASSERT_FALSE(res.aborted);
    for (const auto& r : res.records) {
        if (r.t < 10.0) continue;
        ASSERT_LE((r.state.r - r.reference.r).cwiseAbs().maxCoeff(), 0.1) << "t=" << r.t;
    }
}

TEST(Run, IsBitDeterministic) {
    Scenario sc = preset("fig7-unified");
    sc.duration = 3.0;
    const SimulationResult a = run(sc);
    const SimulationResult b = run(sc);
    ASSERT_EQ(a.records.size(), b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        ASSERT_EQ(a.records[i].state.r, b.records[i].state.r);
        ASSERT_EQ(a.records[i].state.R, b.records[i].state.R);
        ASSERT_EQ(a.records[i].F_star, b.records[i].F_star);
        ASSERT_EQ(a.records[i].M_star, b.records[i].M_star);
    }
}

TEST(Run, FilterIsInactiveWhenTheReferenceStaysWellInside) {
    Scenario filtered = preset("fig7-unified");
    filtered.duration = 20.0;
    filtered.initial_state = QuadState{};
    filtered.reference.amplitude = Eigen::Vector3d::Constant(0.8);
    Scenario plain = filtered;
    plain.filters = {};
    const SimulationResult a = run(filtered);
    const SimulationResult b = run(plain);
    ASSERT_EQ(a.records.size(), b.records.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        worst = std::max(worst, (a.records[i].state.r - b.records[i].state.r).norm());
    }
    EXPECT_LE(worst, 1e-3);
}

TEST(Run, AltitudeBarriersHoldOnTheAltitudePreset) {
    const SimulationResult res = run(preset("fig4-altitude"));
    ASSERT_FALSE(res.aborted);
    EXPECT_GE(minAfterEntry(res, BarrierDomain::AltitudePosition), -kInvarianceSlack);
    EXPECT_GE(minAfterEntry(res, BarrierDomain::AltitudePosVel), -kInvarianceSlack);
}

TEST(Run, VelocityBoxTightensAfterTheSwitch) {
    const Scenario sc = preset("fig6-velocity-switch");
    const SimulationResult res = run(sc);
    ASSERT_FALSE(res.aborted);
    const double t_switch = sc.barriers[1].spec.active_from;
    for (const auto& r : res.records) {
        if (r.t < t_switch + 2.0) continue;
        ASSERT_LE(std::abs(r.state.v.x()), 1.25 * 1.05) << "t=" << r.t;
        ASSERT_LE(std::abs(r.state.v.y()), 0.9 * 1.05) << "t=" << r.t;
    }
}

TEST(Run, BarrierSwitchIsLogged) {
    Scenario sc = preset("fig6-velocity-switch");
    sc.barriers[0].spec.active_until = 0.5;
    sc.barriers[1].spec.active_from = 0.5;
    sc.duration = 1.0;
    const SimulationResult res = run(sc);
    int switches = 0;
    for (const auto& r : res.records) {
        for (const auto& e : r.events) switches += e.type == EventType::BarrierSwitch;
    }
    EXPECT_EQ(switches, 1);
    EXPECT_EQ(res.records[499].barrier(BarrierDomain::LateralVelocity)->spec_index, 0u);
    EXPECT_EQ(res.records[500].barrier(BarrierDomain::LateralVelocity)->spec_index, 1u);
}

TEST(Run, StartingOutsideTheSetEntersAndStays) {
    const SimulationResult res = run(preset("fig7-unified"));
    ASSERT_FALSE(res.aborted);
    const TraceSummary s = summarize(res.records, 1e-3);
    for (BarrierDomain d : kAllDomains) {
        const BarrierStats& b = s.barriers[static_cast<std::size_t>(d)];
        ASSERT_TRUE(b.present) << domainName(d);
        ASSERT_TRUE(b.first_entry_t.has_value()) << domainName(d);
        EXPECT_LE(*b.first_entry_t, 10.0);
        EXPECT_GE(b.min_h_after_entry, -kInvarianceSlack) << domainName(d);
    }
    EXPECT_LT(res.records.front().barrier(BarrierDomain::LateralVelocity)->h, 0.0);
    EXPECT_LT(res.records.front().barrier(BarrierDomain::AltitudePosVel)->h, 0.0);
}

TEST(Run, StressLogsInfeasibilityWithoutAborting) {
    const SimulationResult res = run(preset("stress"));
    EXPECT_FALSE(res.aborted);
    EXPECT_GE(summarize(res.records, 1e-3).infeasible_steps, 1u);
    for (const auto& r : res.records) ASSERT_TRUE(r.state.allFinite());
}

TEST(Run, DivergenceAbortsWithNonFiniteState) {
    Scenario sc = quiet(50.0);
    sc.dt = 0.2;
    sc.gains.k_omega = Eigen::Vector3d::Constant(400.0);
    sc.initial_state.omega = {1.0, -1.0, 0.5};
    const SimulationResult res = run(sc);
    EXPECT_TRUE(res.aborted);
    EXPECT_FALSE(res.abort_message.empty());
}

TEST(Validate, OverlappingSpecsCiteBothIntervals) {
    Scenario sc;
    BarrierSpec a = BarrierSpec::altitudePosition(0.0, 2.0);
    a.active_until = 12.0;
    BarrierSpec b = BarrierSpec::altitudePosition(0.0, 1.5);
    b.active_from = 10.0;
    sc.barriers = {{a, EcbfGains::defaultFor(2)}, {b, EcbfGains::defaultFor(2)}};
    try {
        sc.validate();
        FAIL();
    } catch (const InvalidArgument& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("barriers[0]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("barriers[1]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("12"), std::string::npos) << msg;
        EXPECT_NE(msg.find("10"), std::string::npos) << msg;
    }
}

TEST(Validate, DisjointSpecsInOneDomainAreFine) {
    Scenario sc = preset("fig6-velocity-switch");
    EXPECT_NO_THROW(sc.validate());
}

TEST(Validate, DifferentDomainsMayOverlap) {
    EXPECT_NO_THROW(preset("fig7-unified").validate());
}

TEST(Summarize, EntryViolationAndRestartPerSpec) {
    std::vector<TraceRecord> recs(6);
    const double h[] = {-0.5, 0.1, -0.03, -0.01, -0.4, 0.2};
    const std::size_t spec[] = {0, 0, 0, 0, 1, 1};
    for (std::size_t i = 0; i < recs.size(); ++i) {
        recs[i].t = 0.1 * static_cast<double>(i);
        recs[i].barriers[static_cast<std::size_t>(BarrierDomain::LateralVelocity)] = BarrierSample{h[i], {}, spec[i]};
    }
    const TraceSummary s = summarize(recs, 0.1);
    const BarrierStats& b = s.barriers[static_cast<std::size_t>(BarrierDomain::LateralVelocity)];
    EXPECT_TRUE(b.present);
    EXPECT_EQ(b.min_h, -0.5);
    ASSERT_TRUE(b.first_entry_t.has_value());
    EXPECT_DOUBLE_EQ(*b.first_entry_t, 0.5);  // restarted by the new spec at t = 0.4
    EXPECT_DOUBLE_EQ(b.violation_duration, 0.1);  // only the -0.03 step under spec 0
    EXPECT_EQ(b.min_h_after_entry, -0.03);
    EXPECT_FALSE(s.barriers[0].present);
}
