#include "quadsafe/controller.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quadsafe/errors.hpp"

namespace quadsafe {

void ControllerGains::validate() const {
    auto positive = [](const Eigen::Vector3d& v) { return v.allFinite() && (v.array() > 0.0).all(); };
    if (!positive(kp)) throw InvalidArgument("gains.kp_per_s2 must be > 0 elementwise");
    if (!positive(kd)) throw InvalidArgument("gains.kd_per_s must be > 0 elementwise");
    if (!positive(k_omega)) throw InvalidArgument("gains.k_omega_per_s must be > 0 elementwise");
    if (!(k_R > 0.0)) throw InvalidArgument("gains.k_R_per_s must be > 0");
    if (!(k_psi > 0.0)) throw InvalidArgument("gains.k_psi_per_s must be > 0");
}

void ControllerLimits::validate() const {
    auto unit = [](double x) { return x > 0.0 && x < 1.0; };
    if (!unit(r33_min)) throw InvalidArgument("limits.r33_min must be in (0, 1)");
    if (!unit(sin_tilt_max)) throw InvalidArgument("limits.sin_tilt_max must be in (0, 1)");
    if (!unit(thrust_floor_fraction)) throw InvalidArgument("limits.thrust_floor_fraction must be in (0, 1)");
}

double wrapAngle(double a) {
    double w = std::remainder(a, 2.0 * M_PI);
    if (w <= -M_PI) w += 2.0 * M_PI;
    return w;
}

Eigen::Vector3d position_loop(const QuadState& state, const Reference& ref, const ControllerGains& gains) {
    return ref.r_ddot + gains.kp.cwiseProduct(ref.r - state.r) + gains.kd.cwiseProduct(ref.r_dot - state.v);
}

double thrust_from_accel(double z_ddot_cmd, double R33, const QuadParams& params, const ControllerLimits& limits) {
    if (R33 < limits.r33_min) {
        throw AttitudeSingular("R33 = " + std::to_string(R33) + " below r33_min");
    }
    const double f = params.m / R33 * (params.g - z_ddot_cmd);
    return std::clamp(f, 0.0, params.f_max);
}

namespace {

Eigen::Vector3d attitudeLaw(const QuadState& state, const Eigen::Vector3d& r_ddot_cmd, double f, double R33,
                            double psi_d, const ControllerGains& gains, const QuadParams& params,
                            const ControllerLimits& limits) {
    const Eigen::Matrix3d& R = state.R;
    // Lateral rows of the translational dynamics: x'' = -R13 f/m, y'' = -R23 f/m.
    const double s = limits.sin_tilt_max;
    const double R13_cmd = std::clamp(-params.m * r_ddot_cmd.x() / f, -s, s);
    const double R23_cmd = std::clamp(-params.m * r_ddot_cmd.y() / f, -s, s);

    const Eigen::Vector2d R_dot_cmd{gains.k_R * (R13_cmd - R(0, 2)), gains.k_R * (R23_cmd - R(1, 2))};
    Eigen::Matrix2d W;
    W << R(1, 0), -R(0, 0),
         R(1, 1), -R(0, 1);
    const Eigen::Vector2d pq = W * R_dot_cmd / R33;

    const double psi = euler_of_R(R).psi;
    const double r_cmd = gains.k_psi * wrapAngle(psi_d - psi);
    return {pq.x(), pq.y(), r_cmd};
}

}  // namespace

Eigen::Vector3d attitude_loop(const QuadState& state, const Eigen::Vector3d& r_ddot_cmd, double f, double psi_d,
                              const ControllerGains& gains, const QuadParams& params,
                              const ControllerLimits& limits) {
    const double R33 = state.R(2, 2);
    if (R33 < limits.r33_min) {
        throw AttitudeSingular("R33 = " + std::to_string(R33) + " below r33_min");
    }
    if (f < limits.thrustFloor(params)) {
        throw ThrustTooSmall("thrust " + std::to_string(f) + " N below attitude inversion floor");
    }
    return attitudeLaw(state, r_ddot_cmd, f, R33, psi_d, gains, params, limits);
}

Eigen::Vector3d attitude_loop_saturated(const QuadState& state, const Eigen::Vector3d& r_ddot_cmd, double f,
                                        double psi_d, const ControllerGains& gains, const QuadParams& params,
                                        const ControllerLimits& limits) {
    const double R33 = std::max(state.R(2, 2), limits.r33_min);
    const double f_used = std::max(f, limits.thrustFloor(params));
    return attitudeLaw(state, r_ddot_cmd, f_used, R33, psi_d, gains, params, limits);
}

Eigen::Vector3d body_rate_loop(const QuadState& state, const Eigen::Vector3d& omega_cmd, const ControllerGains& gains,
                               const QuadParams& params) {
    const Eigen::Vector3d I = params.inertia();
    const Eigen::Vector3d omega_dot_cmd = gains.k_omega.cwiseProduct(omega_cmd - state.omega);
    Eigen::Vector3d tau = I.cwiseProduct(omega_dot_cmd) + state.omega.cross(I.cwiseProduct(state.omega));
    tau.x() = std::clamp(tau.x(), -params.tau_max.x(), params.tau_max.x());
    tau.y() = std::clamp(tau.y(), -params.tau_max.y(), params.tau_max.y());
    return tau;
}

}  // namespace quadsafe
