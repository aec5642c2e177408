#pragma once

#include <Eigen/Dense>

#include "quadsafe/dynamics.hpp"

namespace quadsafe {

struct ControllerGains {
    Eigen::Vector3d kp{8.0, 8.0, 12.0};   // diagonal of Kp
    Eigen::Vector3d kd{5.0, 5.0, 7.0};    // diagonal of Kd
    double k_R = 8.0;                     // R13/R23 entry regulator
    double k_psi = 2.0;                   // yaw proportional gain
    Eigen::Vector3d k_omega{25.0, 25.0, 10.0};

    void validate() const;
};

// Guards that keep the thrust and attitude inversions away from R33 -> 0.
struct ControllerLimits {
    double r33_min = 0.2;
    double sin_tilt_max = 0.9;
    double thrust_floor_fraction = 0.05;  // of m*g, for attitude inversion

    double thrustFloor(const QuadParams& params) const { return thrust_floor_fraction * params.hoverThrust(); }
    void validate() const;
};

struct Reference {
    Eigen::Vector3d r = Eigen::Vector3d::Zero();
    Eigen::Vector3d r_dot = Eigen::Vector3d::Zero();
    Eigen::Vector3d r_ddot = Eigen::Vector3d::Zero();
    double psi = 0.0;
};

struct NominalCommand {
    double f_hat = 0.0;
    Eigen::Vector3d tau_hat = Eigen::Vector3d::Zero();
    Eigen::Vector3d r_ddot_cmd = Eigen::Vector3d::Zero();
    Eigen::Vector3d omega_cmd = Eigen::Vector3d::Zero();
};

// r_ddot_cmd = r_ddot_d + Kp (r_d - r) + Kd (r_dot_d - r_dot)
Eigen::Vector3d position_loop(const QuadState& state, const Reference& ref, const ControllerGains& gains);

// f = m (g - z_ddot_cmd) / R33, clamped to [0, f_max]. Throws AttitudeSingular
// when R33 < limits.r33_min.
double thrust_from_accel(double z_ddot_cmd, double R33, const QuadParams& params,
                         const ControllerLimits& limits = {});

// Commanded body rates. Roll/pitch from the commanded R13/R23 entries through
// the W matrix; yaw from a proportional law on the wrapped heading error.
// Throws AttitudeSingular or ThrustTooSmall.
Eigen::Vector3d attitude_loop(const QuadState& state, const Eigen::Vector3d& r_ddot_cmd, double f, double psi_d,
                              const ControllerGains& gains, const QuadParams& params,
                              const ControllerLimits& limits = {});

// Same law with f raised to the thrust floor and R33 raised to r33_min
// instead of throwing. Used by the simulator after recording the event.
Eigen::Vector3d attitude_loop_saturated(const QuadState& state, const Eigen::Vector3d& r_ddot_cmd, double f,
                                        double psi_d, const ControllerGains& gains, const QuadParams& params,
                                        const ControllerLimits& limits = {});

// tau = I k_omega o (omega_cmd - omega) + omega x I omega, with tau_x and
// tau_y clamped to the moment bounds.
Eigen::Vector3d body_rate_loop(const QuadState& state, const Eigen::Vector3d& omega_cmd, const ControllerGains& gains,
                               const QuadParams& params);

// Wraps an angle to (-pi, pi].
double wrapAngle(double a);

}  // namespace quadsafe
