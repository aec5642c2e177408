#include <limits>
#include <string>
#include <vector>

#include "quadsafe/errors.hpp"
#include "quadsafe/scenario_io.hpp"

namespace quadsafe {

namespace {

// A third-order chain with the (-3,-4,-5) defaults lets the ECBF lower bound on
// h' and h'' outrun the h <= 1 ceiling once the velocity box is tightened
// mid-flight; faster poles keep the QP feasible through the switch.
const std::vector<double> kVelocityPoles{-5.0, -6.0, -7.0};

// The pos+vel barrier has no thrust authority at z_dot = 0, so its class-kappa
// slope must keep up with the position ECBF (fastest pole 4) or the two rows
// contradict each other near the ceiling.
constexpr double kPosVelAlpha = 4.0;

ScheduledBarrier altitudePosition(double p_z) {
    return {BarrierSpec::altitudePosition(0.0, p_z), EcbfGains::defaultFor(2)};
}

ScheduledBarrier altitudePosVel() {
    return {BarrierSpec::altitudePosVel(0.0, 2.0, 0.75), EcbfGains::classKappa(kPosVelAlpha)};
}

ScheduledBarrier lateralPosition() {
    return {BarrierSpec::lateralPosition(0.0, 0.0, 2.0, 2.0), EcbfGains::defaultFor(4)};
}

ScheduledBarrier lateralVelocity(double v_x, double v_y, double from, double until) {
    BarrierSpec s = BarrierSpec::lateralVelocity(v_x, v_y);
    s.active_from = from;
    s.active_until = until;
    return {s, EcbfGains::fromPoles(kVelocityPoles)};
}

constexpr double kForever = std::numeric_limits<double>::infinity();

Scenario fig4() {
    Scenario sc;
    sc.name = "fig4-altitude";
    sc.filters.high = true;
    sc.barriers = {altitudePosition(2.0), altitudePosVel()};
    return sc;
}

Scenario fig5() {
    Scenario sc;
    sc.name = "fig5-lateral-pos";
    sc.filters.low = true;
    sc.barriers = {lateralPosition()};
    // Same reasoning as fig6: from rest the reference pulls away at 1.6 m/s
    // and the first half second is pure catch-up.
    sc.initial_state.v = reference_at(0.0, sc.reference).r_dot;
    return sc;
}

Scenario fig6() {
    Scenario sc;
    sc.name = "fig6-velocity-switch";
    sc.filters.low = true;
    const double t_switch = 0.5 * sc.duration;
    sc.barriers = {lateralVelocity(4.0, 2.0, 0.0, t_switch), lateralVelocity(1.25, 0.9, t_switch, kForever)};
    // Start on the reference velocity so the pre-switch tracking error
    // measures tracking rather than the initial transient.
    sc.initial_state.v = reference_at(0.0, sc.reference).r_dot;
    return sc;
}

Scenario fig7() {
    Scenario sc;
    sc.name = "fig7-unified";
    sc.filters.high = true;
    sc.filters.low = true;
    sc.barriers = {altitudePosition(2.0), altitudePosVel(), lateralPosition(), lateralVelocity(1.25, 0.9, 0.0, kForever)};
    sc.initial_state.v = Eigen::Vector3d(1.6, 0.0, 1.2);
    return sc;
}

Scenario stress() {
    Scenario sc;
    sc.name = "stress";
    sc.filters.high = true;
    sc.barriers = {altitudePosition(0.1)};
    sc.initial_state.v = Eigen::Vector3d(0.0, 0.0, -3.0);
    sc.reference.amplitude = Eigen::Vector3d(2.5, 2.5, 5.0);
    sc.reference.frequency = Eigen::Vector3d(0.4, 0.5, 1.5);
    return sc;
}

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"fig4-altitude", "fig5-lateral-pos", "fig6-velocity-switch",
                                                "fig7-unified", "stress"};
    return names;
}

Scenario preset(std::string_view name) {
    if (name == "fig4-altitude") return fig4();
    if (name == "fig5-lateral-pos") return fig5();
    if (name == "fig6-velocity-switch") return fig6();
    if (name == "fig7-unified") return fig7();
    if (name == "stress") return stress();
    throw InvalidArgument("unknown preset '" + std::string(name) + "' (see `quadsafe presets`)");
}

}  // namespace quadsafe
