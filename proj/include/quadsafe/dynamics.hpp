#pragma once

#include <Eigen/Dense>

namespace quadsafe {

// Rigid-body state. R maps body-frame vectors into the world frame.
struct QuadState {
    Eigen::Vector3d r = Eigen::Vector3d::Zero();      // position [m]
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();  // body-to-world rotation
    Eigen::Vector3d v = Eigen::Vector3d::Zero();      // inertial velocity [m/s]
    Eigen::Vector3d omega = Eigen::Vector3d::Zero();  // body rates [p, q, r_rate] [rad/s]

    bool allFinite() const;
};

struct ControlInput {
    double f = 0.0;                                  // total thrust [N]
    Eigen::Vector3d tau = Eigen::Vector3d::Zero();   // body moments [N m]
};

struct QuadParams {
    double g = 9.81;
    double m = 0.45;
    double Ix = 0.091;
    double Iy = 0.091;
    double Iz = 0.182;
    double f_max = 36.0;
    Eigen::Vector2d tau_max{20.0, 20.0};  // bounds on |tau_x|, |tau_y|
    // Rotor geometry and motor constants. Carried for completeness; the
    // control input is total thrust plus body moments so these are unused.
    double L = 0.24;
    double k_f = 0.88;
    double k_w = 1.00;

    Eigen::Vector3d inertia() const { return {Ix, Iy, Iz}; }
    double hoverThrust() const { return m * g; }
    // Throws InvalidArgument naming the offending field.
    void validate() const;
};

struct StateDerivative {
    Eigen::Vector3d r_dot;
    Eigen::Matrix3d R_dot;
    Eigen::Vector3d v_dot;
    Eigen::Vector3d omega_dot;
};

struct EulerAngles {
    double phi = 0.0;    // roll
    double theta = 0.0;  // pitch
    double psi = 0.0;    // yaw
    bool gimbal_lock = false;
};

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

// Translational and rotational rigid-body dynamics:
//   r' = v
//   v' = g z_w - R z_w f / m         (z_w = [0, 0, 1])
//   R' = R [omega]_x
//   I omega' = tau - omega x I omega
StateDerivative deriv(const QuadState& state, const ControlInput& u, const QuadParams& params);

// One classical RK4 step with the input held constant, followed by polar
// projection of R onto SO(3). Throws NonFiniteState.
QuadState step(const QuadState& state, const ControlInput& u, const QuadParams& params, double dt);

// Nearest rotation matrix in the Frobenius norm.
Eigen::Matrix3d projectToRotation(const Eigen::Matrix3d& M);

// Z-Y-X extraction, R = Rz(psi) Ry(theta) Rx(phi).
EulerAngles euler_of_R(const Eigen::Matrix3d& R);

Eigen::Matrix3d rotationFromEuler(double phi, double theta, double psi);

}  // namespace quadsafe
