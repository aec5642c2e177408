#include "quadsafe/barriers.hpp"

#include <cmath>
#include <string>

#include "quadsafe/errors.hpp"

namespace quadsafe {

namespace {

constexpr int kMaxOrder = 4;
using Derivs = std::array<double, kMaxOrder + 1>;

double fallingFactorial(int r, int j) {
    double out = 1.0;
    for (int i = 0; i < j; ++i) out *= static_cast<double>(r - i);
    return out;
}

// Value and time derivatives of phi = (d / p)^r through order n, given d and
// its derivatives in d[0..n]. Also returns dphi^(n) / dd^(n), the factor that
// multiplies any input entering through the highest derivative of d.
struct PowerTerm {
    Derivs phi{};
    double top_gain = 0.0;
};

PowerTerm powerDerivatives(int r, double p, const Derivs& d, int n) {
    const double scale = 1.0 / std::pow(p, r);
    Derivs gk{};
    for (int j = 0; j <= kMaxOrder; ++j) {
        gk[j] = j > r ? 0.0 : fallingFactorial(r, j) * std::pow(d[0], r - j) * scale;
    }
    const double d1 = d[1], d2 = d[2], d3 = d[3], d4 = d[4];
    PowerTerm out;
    out.phi[0] = gk[0];
    if (n >= 1) out.phi[1] = gk[1] * d1;
    if (n >= 2) out.phi[2] = gk[2] * d1 * d1 + gk[1] * d2;
    if (n >= 3) out.phi[3] = gk[3] * d1 * d1 * d1 + 3.0 * gk[2] * d1 * d2 + gk[1] * d3;
    if (n >= 4) {
        out.phi[4] = gk[4] * d1 * d1 * d1 * d1 + 6.0 * gk[3] * d1 * d1 * d2 + 3.0 * gk[2] * d2 * d2
                     + 4.0 * gk[2] * d1 * d3 + gk[1] * d4;
    }
    out.top_gain = gk[1];
    return out;
}

int expectedStates(BarrierDomain d) {
    return d == BarrierDomain::AltitudePosition ? 1 : 2;
}

void requireDomain(const BarrierSpec& spec, BarrierDomain d) {
    if (spec.domain != d) {
        throw InvalidArgument("barrier spec domain " + std::string(domainName(spec.domain)) + " passed to "
                              + std::string(domainName(d)) + " chain");
    }
}

void requireGains(const EcbfGains& gains, BarrierDomain d) {
    if (gains.delta != relativeDegree(d) || gains.K.size() != gains.delta) {
        throw InvalidArgument("ECBF gains for " + std::string(domainName(d)) + " must have relative degree "
                              + std::to_string(relativeDegree(d)));
    }
}

ConstraintRow assemble(const Eigen::VectorXd& H, double lf_delta, QpVector a, const EcbfGains& gains) {
    ConstraintRow row;
    row.H = H;
    row.h_value = H(0);
    row.lf_delta = lf_delta;
    row.a = std::move(a);
    row.b = lf_delta + gains.K.dot(H);
    return row;
}

}  // namespace

std::string_view domainName(BarrierDomain d) {
    switch (d) {
        case BarrierDomain::AltitudePosition: return "altitude_position";
        case BarrierDomain::AltitudePosVel: return "altitude_posvel";
        case BarrierDomain::LateralPosition: return "lateral_position";
        case BarrierDomain::LateralVelocity: return "lateral_velocity";
    }
    return "unknown";
}

int relativeDegree(BarrierDomain d) {
    switch (d) {
        case BarrierDomain::AltitudePosition: return 2;
        case BarrierDomain::AltitudePosVel: return 1;
        case BarrierDomain::LateralPosition: return 4;
        case BarrierDomain::LateralVelocity: return 3;
    }
    return 0;
}

bool isAltitude(BarrierDomain d) {
    return d == BarrierDomain::AltitudePosition || d == BarrierDomain::AltitudePosVel;
}

void BarrierSpec::validate() const {
    const std::string name(domainName(domain));
    const int n = expectedStates(domain);
    if (center.size() != n || half_width.size() != n) {
        throw InvalidArgument(name + " barrier needs " + std::to_string(n) + " center and half-width entries");
    }
    if (!center.allFinite()) throw InvalidArgument(name + " barrier center must be finite");
    if (!half_width.allFinite() || !(half_width.array() > 0.0).all()) {
        throw InvalidArgument(name + " barrier half-widths must be finite and > 0");
    }
    if (exponent < 2 || exponent % 2 != 0) {
        throw InvalidArgument(name + " barrier exponent must be an even integer >= 2");
    }
    if (!std::isfinite(active_from) || !(active_from < active_until)) {
        throw InvalidArgument(name + " barrier needs finite active_from_s < active_until_s");
    }
}

BarrierSpec BarrierSpec::altitudePosition(double c_z, double p_z) {
    BarrierSpec s;
    s.domain = BarrierDomain::AltitudePosition;
    s.center = Eigen::VectorXd::Constant(1, c_z);
    s.half_width = Eigen::VectorXd::Constant(1, p_z);
    return s;
}

BarrierSpec BarrierSpec::altitudePosVel(double c_z, double p_z, double v_z) {
    BarrierSpec s;
    s.domain = BarrierDomain::AltitudePosVel;
    s.center = Eigen::Vector2d(c_z, 0.0);
    s.half_width = Eigen::Vector2d(p_z, v_z);
    return s;
}

BarrierSpec BarrierSpec::lateralPosition(double c_x, double c_y, double p_x, double p_y) {
    BarrierSpec s;
    s.domain = BarrierDomain::LateralPosition;
    s.center = Eigen::Vector2d(c_x, c_y);
    s.half_width = Eigen::Vector2d(p_x, p_y);
    return s;
}

BarrierSpec BarrierSpec::lateralVelocity(double v_x, double v_y) {
    BarrierSpec s;
    s.domain = BarrierDomain::LateralVelocity;
    s.center = Eigen::Vector2d::Zero();
    s.half_width = Eigen::Vector2d(v_x, v_y);
    return s;
}

Eigen::VectorXd pole_place(int delta, const std::vector<double>& poles) {
    if (delta < 1 || delta > 4) throw InvalidPoles("relative degree must be in 1..4");
    if (static_cast<int>(poles.size()) != delta) {
        throw InvalidPoles("expected " + std::to_string(delta) + " poles, got " + std::to_string(poles.size()));
    }
    // Ascending coefficients of prod (s - pole).
    std::vector<double> poly{1.0};
    for (double pole : poles) {
        if (!std::isfinite(pole) || !(pole < 0.0)) {
            throw InvalidPoles("pole " + std::to_string(pole) + " is not strictly negative");
        }
        std::vector<double> next(poly.size() + 1, 0.0);
        for (std::size_t j = 0; j < poly.size(); ++j) {
            next[j + 1] += poly[j];
            next[j] -= pole * poly[j];
        }
        poly = std::move(next);
    }
    Eigen::VectorXd K(delta);
    for (int j = 0; j < delta; ++j) K(j) = poly[j];
    return K;
}

EcbfGains EcbfGains::fromPoles(std::vector<double> poles) {
    EcbfGains g;
    g.delta = static_cast<int>(poles.size());
    g.K = pole_place(g.delta, poles);
    g.alpha = g.delta == 1 ? g.K(0) : 1.0;
    g.poles = std::move(poles);
    return g;
}

EcbfGains EcbfGains::classKappa(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidPoles("class-kappa slope must be > 0");
    return fromPoles({-alpha});
}

EcbfGains EcbfGains::defaultFor(int delta) {
    switch (delta) {
        case 1: return classKappa(1.0);
        case 2: return fromPoles({-3.0, -4.0});
        case 3: return fromPoles({-3.0, -4.0, -5.0});
        case 4: return fromPoles({-3.0, -4.0, -5.0, -6.0});
        default: throw InvalidPoles("relative degree must be in 1..4");
    }
}

double rectellipse_h(const Eigen::VectorXd& values, const BarrierSpec& spec) {
    double h = 1.0;
    for (Eigen::Index j = 0; j < values.size(); ++j) {
        h -= std::pow((values(j) - spec.center(j)) / spec.half_width(j), spec.exponent);
    }
    return h;
}

Eigen::VectorXd barrierStates(const QuadState& state, BarrierDomain domain) {
    switch (domain) {
        case BarrierDomain::AltitudePosition: return Eigen::VectorXd::Constant(1, state.r.z());
        case BarrierDomain::AltitudePosVel: return Eigen::Vector2d(state.r.z(), state.v.z());
        case BarrierDomain::LateralPosition: return Eigen::Vector2d(state.r.x(), state.r.y());
        case BarrierDomain::LateralVelocity: return Eigen::Vector2d(state.v.x(), state.v.y());
    }
    return {};
}

double barrier_h(const QuadState& state, const BarrierSpec& spec) {
    return rectellipse_h(barrierStates(state, spec.domain), spec);
}

LateralChainTerms lateral_chain_terms(const QuadState& state, double f, const BarrierSpec& spec,
                                      const QuadParams& params, const ChainLimits& limits) {
    const Eigen::Matrix3d& R = state.R;
    LateralChainTerms t;
    t.W << R(1, 0), -R(0, 0),
           R(1, 1), -R(0, 1);
    const double det = t.W.determinant();
    if (std::abs(det) < limits.det_min) {
        throw LateralSingular("|det W| = " + std::to_string(std::abs(det)) + " below det_min");
    }
    if (f < limits.thrust_floor) {
        throw ThrustTooSmall("thrust " + std::to_string(f) + " N below lateral chain floor");
    }

    const double p = state.omega.x(), q = state.omega.y(), r = state.omega.z();
    t.V = t.W.inverse();
    t.A = Eigen::Vector2d(p, q);

    const Eigen::Matrix3d R_dot = R * skew(state.omega);
    t.W_dot << R_dot(1, 0), -R_dot(0, 0),
               R_dot(1, 1), -R_dot(0, 1);
    t.V_dot = -t.V * t.W_dot * t.V;

    const double R33 = R(2, 2);
    const double R33_dot = R_dot(2, 2);
    const Eigen::Vector2d coupling((params.Iy - params.Iz) / params.Ix * q * r,
                                   (params.Iz - params.Ix) / params.Iy * p * r);
    t.J = R33_dot * t.V * t.A + R33 * t.V_dot * t.A + R33 * t.V * coupling;
    t.L_mat = R33 * t.V * Eigen::Vector2d(1.0 / params.Ix, 1.0 / params.Iy).asDiagonal();

    const double f_over_m = f / params.m;
    t.accel = -f_over_m * Eigen::Vector2d(R(0, 2), R(1, 2));
    t.jerk = -f_over_m * R33 * t.V * t.A;
    t.snap = -f_over_m * t.J;
    t.snap_input = -f_over_m * t.L_mat;

    const Eigen::VectorXd s = barrierStates(state, spec.domain);
    for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 2; ++k) {
            t.eta[i](k) = std::pow(s(k) - spec.center(k), i) / std::pow(spec.half_width(k), spec.exponent);
        }
    }
    return t;
}

ConstraintRow altitude_position_chain(const QuadState& state, const BarrierSpec& spec, const EcbfGains& gains,
                                      const QuadParams& params) {
    requireDomain(spec, BarrierDomain::AltitudePosition);
    requireGains(gains, spec.domain);
    const double R33 = state.R(2, 2);

    // z'' = g - R33 F / m
    const Derivs d{state.r.z() - spec.center(0), state.v.z(), params.g, 0.0, 0.0};
    const PowerTerm z = powerDerivatives(spec.exponent, spec.half_width(0), d, 2);

    Eigen::VectorXd H(2);
    H << 1.0 - z.phi[0], -z.phi[1];
    QpVector a(1);
    a(0) = z.top_gain * R33 / params.m;
    return assemble(H, -z.phi[2], a, gains);
}

ConstraintRow altitude_posvel_chain(const QuadState& state, const BarrierSpec& spec, const EcbfGains& gains,
                                    const QuadParams& params) {
    requireDomain(spec, BarrierDomain::AltitudePosVel);
    requireGains(gains, spec.domain);
    const double R33 = state.R(2, 2);

    const Derivs dz{state.r.z() - spec.center(0), state.v.z(), 0.0, 0.0, 0.0};
    const Derivs dv{state.v.z() - spec.center(1), params.g, 0.0, 0.0, 0.0};
    const PowerTerm z = powerDerivatives(spec.exponent, spec.half_width(0), dz, 1);
    const PowerTerm v = powerDerivatives(spec.exponent, spec.half_width(1), dv, 1);

    Eigen::VectorXd H(1);
    H << 1.0 - z.phi[0] - v.phi[0];
    QpVector a(1);
    a(0) = v.top_gain * R33 / params.m;
    return assemble(H, -(z.phi[1] + v.phi[1]), a, gains);
}

ConstraintRow lateral_position_chain(const QuadState& state, double f_applied, const BarrierSpec& spec,
                                     const EcbfGains& gains, const QuadParams& params, const ChainLimits& limits) {
    requireDomain(spec, BarrierDomain::LateralPosition);
    requireGains(gains, spec.domain);
    const LateralChainTerms t = lateral_chain_terms(state, f_applied, spec, params, limits);

    Eigen::VectorXd H = Eigen::VectorXd::Zero(4);
    H(0) = 1.0;
    double lf4 = 0.0;
    QpVector a = QpVector::Zero(2);
    for (int k = 0; k < 2; ++k) {
        const Derivs d{state.r(k) - spec.center(k), state.v(k), t.accel(k), t.jerk(k), t.snap(k)};
        const PowerTerm term = powerDerivatives(spec.exponent, spec.half_width(k), d, 4);
        for (int i = 0; i < 4; ++i) H(i) -= term.phi[i];
        lf4 -= term.phi[4];
        a -= term.top_gain * t.snap_input.row(k).transpose();
    }
    return assemble(H, lf4, a, gains);
}

ConstraintRow lateral_velocity_chain(const QuadState& state, double f_applied, const BarrierSpec& spec,
                                     const EcbfGains& gains, const QuadParams& params, const ChainLimits& limits) {
    requireDomain(spec, BarrierDomain::LateralVelocity);
    requireGains(gains, spec.domain);
    const LateralChainTerms t = lateral_chain_terms(state, f_applied, spec, params, limits);

    Eigen::VectorXd H = Eigen::VectorXd::Zero(3);
    H(0) = 1.0;
    double lf3 = 0.0;
    QpVector a = QpVector::Zero(2);
    for (int k = 0; k < 2; ++k) {
        const Derivs e{state.v(k) - spec.center(k), t.accel(k), t.jerk(k), t.snap(k), 0.0};
        const PowerTerm term = powerDerivatives(spec.exponent, spec.half_width(k), e, 3);
        for (int i = 0; i < 3; ++i) H(i) -= term.phi[i];
        lf3 -= term.phi[3];
        a -= term.top_gain * t.snap_input.row(k).transpose();
    }
    return assemble(H, lf3, a, gains);
}

ConstraintRow barrier_row(const QuadState& state, double f_applied, const BarrierSpec& spec,
                          const EcbfGains& gains, const QuadParams& params, const ChainLimits& limits) {
    switch (spec.domain) {
        case BarrierDomain::AltitudePosition: return altitude_position_chain(state, spec, gains, params);
        case BarrierDomain::AltitudePosVel: return altitude_posvel_chain(state, spec, gains, params);
        case BarrierDomain::LateralPosition:
            return lateral_position_chain(state, f_applied, spec, gains, params, limits);
        case BarrierDomain::LateralVelocity:
            return lateral_velocity_chain(state, f_applied, spec, gains, params, limits);
    }
    throw InvalidArgument("unknown barrier domain");
}

}  // namespace quadsafe
