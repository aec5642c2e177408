#pragma once

#include <Eigen/Dense>
#include <array>
#include <limits>
#include <string_view>
#include <vector>

#include "quadsafe/dynamics.hpp"
#include "quadsafe/qp.hpp"

namespace quadsafe {

enum class BarrierDomain { AltitudePosition, AltitudePosVel, LateralPosition, LateralVelocity };

inline constexpr std::array<BarrierDomain, 4> kAllDomains{
    BarrierDomain::AltitudePosition, BarrierDomain::AltitudePosVel, BarrierDomain::LateralPosition,
    BarrierDomain::LateralVelocity};

std::string_view domainName(BarrierDomain d);
// Relative degree of the chain built for each domain.
int relativeDegree(BarrierDomain d);
bool isAltitude(BarrierDomain d);

// One rectellipse region h = 1 - sum_j ((x_j - c_j) / p_j)^r. The constrained
// states per domain are
//   AltitudePosition  [z]
//   AltitudePosVel    [z, z_dot]
//   LateralPosition   [x, y]
//   LateralVelocity   [x_dot, y_dot]
struct BarrierSpec {
    BarrierDomain domain = BarrierDomain::AltitudePosition;
    Eigen::VectorXd center;
    Eigen::VectorXd half_width;
    int exponent = 4;
    double active_from = 0.0;
    double active_until = std::numeric_limits<double>::infinity();

    bool activeAt(double t) const { return t >= active_from && t < active_until; }
    // Throws InvalidArgument.
    void validate() const;

    static BarrierSpec altitudePosition(double c_z, double p_z);
    static BarrierSpec altitudePosVel(double c_z, double p_z, double v_z);
    static BarrierSpec lateralPosition(double c_x, double c_y, double p_x, double p_y);
    static BarrierSpec lateralVelocity(double v_x, double v_y);
};

struct EcbfGains {
    int delta = 1;
    std::vector<double> poles;
    Eigen::VectorXd K;   // [k_0 .. k_{delta-1}]
    double alpha = 1.0;  // class-kappa slope, delta = 1 only

    static EcbfGains fromPoles(std::vector<double> poles);
    static EcbfGains classKappa(double alpha);
    // Defaults: delta 1 -> alpha 1; 2 -> (-3,-4); 3 -> (-3,-4,-5); 4 -> (-3,-4,-5,-6).
    static EcbfGains defaultFor(int delta);
};

// K_j = coefficient of s^j in prod_i (s - pole_i), j = 0..delta-1. Throws
// InvalidPoles.
Eigen::VectorXd pole_place(int delta, const std::vector<double>& poles);

// Encodes L_f^d h + L_g L_f^{d-1} h u + K^T H >= 0 as a . u + b >= 0.
struct ConstraintRow {
    QpVector a;
    double b = 0.0;
    double h_value = 0.0;
    Eigen::VectorXd H;       // [h, L_f h, ..., L_f^{d-1} h]
    double lf_delta = 0.0;   // L_f^d h (input-free part of the top derivative)

    LinearConstraint constraint() const { return {a, b}; }
};

struct ChainLimits {
    double det_min = 1e-3;
    double thrust_floor = 0.05 * 0.45 * 9.81;  // N

    static ChainLimits forParams(const QuadParams& params, double floor_fraction = 0.05) {
        return {1e-3, floor_fraction * params.hoverThrust()};
    }
};

// Rotation-entry quantities of the lateral chain. With W built from R, the
// body rates A = [p, q] satisfy [R13', R23'] = R33 V A and
// [R13'', R23''] = J + L [tau_x, tau_y].
struct LateralChainTerms {
    Eigen::Matrix2d W;
    Eigen::Matrix2d V;
    Eigen::Vector2d A;
    Eigen::Matrix2d W_dot;
    Eigen::Matrix2d V_dot;
    Eigen::Vector2d J;
    Eigen::Matrix2d L_mat;
    std::array<Eigen::Vector2d, 4> eta;  // eta_i = [(x-c_x)^i / p_x^r, (y-c_y)^i / p_y^r]

    // Lateral accelerations and their first two derivatives at thrust f,
    // without the tau contribution in the last one.
    Eigen::Vector2d accel;   // [x'', y'']
    Eigen::Vector2d jerk;    // [x''', y''']
    Eigen::Vector2d snap;    // [x'''', y''''] at tau_x = tau_y = 0
    Eigen::Matrix2d snap_input;  // d[x'''', y''''] / d[tau_x, tau_y]
};

// Throws LateralSingular when |det W| < limits.det_min and ThrustTooSmall when
// f < limits.thrust_floor.
LateralChainTerms lateral_chain_terms(const QuadState& state, double f, const BarrierSpec& spec,
                                      const QuadParams& params, const ChainLimits& limits = {});

double rectellipse_h(const Eigen::VectorXd& values, const BarrierSpec& spec);

// Current value of the constrained states for the barrier's domain.
Eigen::VectorXd barrierStates(const QuadState& state, BarrierDomain domain);
double barrier_h(const QuadState& state, const BarrierSpec& spec);

// delta = 2, decision variable F.
ConstraintRow altitude_position_chain(const QuadState& state, const BarrierSpec& spec, const EcbfGains& gains,
                                      const QuadParams& params);
// delta = 1, decision variable F.
ConstraintRow altitude_posvel_chain(const QuadState& state, const BarrierSpec& spec, const EcbfGains& gains,
                                    const QuadParams& params);
// delta = 4, decision variable [tau_x, tau_y], thrust frozen at f_applied.
ConstraintRow lateral_position_chain(const QuadState& state, double f_applied, const BarrierSpec& spec,
                                     const EcbfGains& gains, const QuadParams& params,
                                     const ChainLimits& limits = {});
// delta = 3, decision variable [tau_x, tau_y], thrust frozen at f_applied.
ConstraintRow lateral_velocity_chain(const QuadState& state, double f_applied, const BarrierSpec& spec,
                                     const EcbfGains& gains, const QuadParams& params,
                                     const ChainLimits& limits = {});

// Dispatches on spec.domain; f_applied is ignored for altitude domains.
ConstraintRow barrier_row(const QuadState& state, double f_applied, const BarrierSpec& spec,
                          const EcbfGains& gains, const QuadParams& params, const ChainLimits& limits = {});

}  // namespace quadsafe
