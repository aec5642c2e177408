#include "quadsafe/dynamics.hpp"

#include <cmath>
#include <string>

#include "quadsafe/errors.hpp"

namespace quadsafe {

namespace {

void requirePositive(double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidArgument(std::string("params.") + name + " must be finite and > 0");
    }
}

QuadState advance(const QuadState& s, const StateDerivative& d, double h) {
    QuadState out;
    out.r = s.r + h * d.r_dot;
    out.R = s.R + h * d.R_dot;
    out.v = s.v + h * d.v_dot;
    out.omega = s.omega + h * d.omega_dot;
    return out;
}

}  // namespace

bool QuadState::allFinite() const {
    return r.allFinite() && R.allFinite() && v.allFinite() && omega.allFinite();
}

void QuadParams::validate() const {
    requirePositive(g, "g_mps2");
    requirePositive(m, "m_kg");
    requirePositive(Ix, "Ix_kgm2");
    requirePositive(Iy, "Iy_kgm2");
    requirePositive(Iz, "Iz_kgm2");
    requirePositive(f_max, "f_max_N");
    if (!(tau_max.array() >= 0.0).all() || !tau_max.allFinite()) {
        throw InvalidArgument("params.tau_max_Nm must be finite and >= 0");
    }
    if (!(f_max > m * g)) {
        throw InvalidArgument("params.f_max_N must exceed m_kg*g_mps2 for hover feasibility");
    }
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
    Eigen::Matrix3d S;
    S << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
         -w.y(), w.x(), 0.0;
    return S;
}

StateDerivative deriv(const QuadState& state, const ControlInput& u, const QuadParams& params) {
    const Eigen::Vector3d z_w = Eigen::Vector3d::UnitZ();
    const Eigen::Vector3d I = params.inertia();

    StateDerivative d;
    d.r_dot = state.v;
    d.v_dot = params.g * z_w - state.R * z_w * (u.f / params.m);
    d.R_dot = state.R * skew(state.omega);
    const Eigen::Vector3d Iw = I.cwiseProduct(state.omega);
    d.omega_dot = (u.tau - state.omega.cross(Iw)).cwiseQuotient(I);
    return d;
}

Eigen::Matrix3d projectToRotation(const Eigen::Matrix3d& M) {
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d U = svd.matrixU();
    const Eigen::Matrix3d V = svd.matrixV();
    if ((U * V.transpose()).determinant() < 0.0) {
        U.col(2) *= -1.0;
    }
    return U * V.transpose();
}

QuadState step(const QuadState& state, const ControlInput& u, const QuadParams& params, double dt) {
    if (!(dt > 0.0)) {
        throw InvalidArgument("dt must be > 0");
    }
    const StateDerivative k1 = deriv(state, u, params);
    const StateDerivative k2 = deriv(advance(state, k1, 0.5 * dt), u, params);
    const StateDerivative k3 = deriv(advance(state, k2, 0.5 * dt), u, params);
    const StateDerivative k4 = deriv(advance(state, k3, dt), u, params);

    const double w = dt / 6.0;
    QuadState next;
    next.r = state.r + w * (k1.r_dot + 2.0 * k2.r_dot + 2.0 * k3.r_dot + k4.r_dot);
    next.R = state.R + w * (k1.R_dot + 2.0 * k2.R_dot + 2.0 * k3.R_dot + k4.R_dot);
    next.v = state.v + w * (k1.v_dot + 2.0 * k2.v_dot + 2.0 * k3.v_dot + k4.v_dot);
    next.omega = state.omega + w * (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot);

    if (!next.allFinite()) {
        throw NonFiniteState("non-finite state after integration step");
    }
    next.R = projectToRotation(next.R);
    return next;
}

EulerAngles euler_of_R(const Eigen::Matrix3d& R) {
    EulerAngles e;
    const double r31 = R(2, 0);
    if (std::abs(r31) > 1.0 - 1e-9) {
        // theta = -/+ 90 deg: only psi -/+ phi is observable. Report phi = 0 and
        // put the whole rotation about the vertical into psi.
        e.gimbal_lock = true;
        e.theta = r31 < 0.0 ? M_PI / 2.0 : -M_PI / 2.0;
        e.phi = 0.0;
        e.psi = std::atan2(-R(0, 1), R(1, 1));
        return e;
    }
    e.theta = -std::asin(r31);
    e.phi = std::atan2(R(2, 1), R(2, 2));
    e.psi = std::atan2(R(1, 0), R(0, 0));
    return e;
}

Eigen::Matrix3d rotationFromEuler(double phi, double theta, double psi) {
    return (Eigen::AngleAxisd(psi, Eigen::Vector3d::UnitZ())
            * Eigen::AngleAxisd(theta, Eigen::Vector3d::UnitY())
            * Eigen::AngleAxisd(phi, Eigen::Vector3d::UnitX()))
        .toRotationMatrix();
}

}  // namespace quadsafe
