#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "quadsafe/barriers.hpp"
#include "quadsafe/controller.hpp"
#include "quadsafe/dynamics.hpp"
#include "quadsafe/safety_filter.hpp"

namespace quadsafe {

enum class YawMode { Atan2, Constant };

// r_d(t) = [a_x sin(w_x t), a_y sin(w_y t), a_z sin(w_z t)]
struct SinusoidReference {
    Eigen::Vector3d amplitude{2.5, 2.5, 2.5};
    Eigen::Vector3d frequency{0.4, 0.5, 0.3};
    YawMode yaw_mode = YawMode::Atan2;
    double yaw = 0.0;  // used when yaw_mode == Constant
};

Reference reference_at(double t, const SinusoidReference& ref);

struct FilterEnable {
    bool high = false;
    bool low = false;
};

struct Scenario {
    std::string name = "custom";
    double duration = 40.0;
    double dt = 1e-3;
    QuadState initial_state;
    SinusoidReference reference;
    std::vector<ScheduledBarrier> barriers;
    ControllerGains gains;
    ControllerLimits limits;
    QuadParams params;
    FilterEnable filters;
    FallbackPolicy fallback = FallbackPolicy::LeastInfeasible;

    std::size_t stepCount() const;
    // Throws InvalidArgument; messages name the offending entry.
    void validate() const;
};

enum class QpStatusField { Off, Optimal, Infeasible, Bypassed };
std::string_view statusName(QpStatusField s);

enum class EventType { Infeasible, AttitudeSingular, ThrustTooSmall, LateralSingular, BarrierSwitch, PostQpClamp };
std::string_view eventName(EventType e);

struct TraceEvent {
    EventType type;
    std::string detail;
};

struct BarrierSample {
    double h = 0.0;
    Eigen::VectorXd H;  // empty when the chain was not evaluated this step
    std::size_t spec_index = 0;  // position in Scenario::barriers
};

struct TraceRecord {
    double t = 0.0;
    QuadState state;
    EulerAngles euler;
    Reference reference;
    NominalCommand nominal;
    double F_star = 0.0;
    Eigen::Vector2d M_star = Eigen::Vector2d::Zero();
    double tau_z = 0.0;
    std::array<std::optional<BarrierSample>, 4> barriers;  // indexed by BarrierDomain
    QpStatusField qp_hi = QpStatusField::Off;
    QpStatusField qp_lo = QpStatusField::Off;
    double kkt_hi = 0.0;
    double kkt_lo = 0.0;
    std::vector<TraceEvent> events;

    const std::optional<BarrierSample>& barrier(BarrierDomain d) const {
        return barriers[static_cast<std::size_t>(d)];
    }
};

struct SimulationResult {
    std::vector<TraceRecord> records;
    bool aborted = false;
    std::string abort_message;
};

// Closed-loop run with a zero-order hold over dt. Per step: reference,
// position loop, thrust, high-level QP, attitude loop with the filtered
// thrust, body-rate loop, low-level QP, integration. Stops early only on a
// non-finite state.
SimulationResult run(const Scenario& scenario);

inline constexpr double kInvarianceSlack = 0.02;

// Entry is tracked per scheduled spec: when a domain switches to a new spec
// the entry time restarts, since the new set may not contain the state.
struct BarrierStats {
    bool present = false;
    double min_h = 0.0;
    std::optional<double> first_entry_t;  // of the most recent spec in the domain
    double min_h_after_entry = 0.0;
    double violation_duration = 0.0;  // time with h < -slack after entry
};

struct TraceSummary {
    std::array<BarrierStats, 4> barriers;
    std::size_t infeasible_steps = 0;
    std::size_t singular_steps = 0;
    std::size_t clamp_events = 0;
    std::size_t steps = 0;
};

TraceSummary summarize(const std::vector<TraceRecord>& records, double dt, double slack = kInvarianceSlack);

}  // namespace quadsafe
