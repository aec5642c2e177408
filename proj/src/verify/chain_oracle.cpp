#include "quadsafe/verify/chain_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "quadsafe/errors.hpp"

namespace quadsafe::verify {

namespace {

struct Flow {
    Eigen::Vector3d r, v, w;
    Eigen::Matrix3d R;
};

Flow operator+(const Flow& a, const Flow& b) { return {a.r + b.r, a.v + b.v, a.w + b.w, a.R + b.R}; }
Flow operator*(double k, const Flow& a) { return {k * a.r, k * a.v, k * a.w, k * a.R}; }

Flow rhs(const Flow& x, const ControlInput& u, const QuadParams& p) {
    Eigen::Matrix3d W;
    W << 0.0, -x.w.z(), x.w.y(),
         x.w.z(), 0.0, -x.w.x(),
         -x.w.y(), x.w.x(), 0.0;
    const Eigen::Vector3d I(p.Ix, p.Iy, p.Iz);
    Flow d;
    d.r = x.v;
    d.v = Eigen::Vector3d(0.0, 0.0, p.g) - x.R.col(2) * (u.f / p.m);
    d.R = x.R * W;
    d.w = (u.tau - x.w.cross(I.cwiseProduct(x.w))).cwiseQuotient(I);
    return d;
}

Flow rk4(const Flow& x, const ControlInput& u, const QuadParams& p, double dt) {
    const Flow k1 = rhs(x, u, p);
    const Flow k2 = rhs(x + (0.5 * dt) * k1, u, p);
    const Flow k3 = rhs(x + (0.5 * dt) * k2, u, p);
    const Flow k4 = rhs(x + dt * k3, u, p);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// h straight from the definition, on the raw flow state.
double hOf(const Flow& x, const BarrierSpec& spec) {
    Eigen::VectorXd s;
    switch (spec.domain) {
        case BarrierDomain::AltitudePosition: s = Eigen::VectorXd::Constant(1, x.r.z()); break;
        case BarrierDomain::AltitudePosVel: s = Eigen::Vector2d(x.r.z(), x.v.z()); break;
        case BarrierDomain::LateralPosition: s = x.r.head<2>(); break;
        case BarrierDomain::LateralVelocity: s = x.v.head<2>(); break;
    }
    double h = 1.0;
    for (int j = 0; j < s.size(); ++j) h -= std::pow((s(j) - spec.center(j)) / spec.half_width(j), spec.exponent);
    return h;
}

// Second-order central stencils for the k-th derivative at step s; g holds h
// on a uniform grid with g[mid] at t = 0 and m grid cells per step.
double stencil(int k, const std::vector<double>& g, int mid, int m, double s) {
    auto at = [&](int j) { return g[static_cast<std::size_t>(mid + j * m)]; };
    switch (k) {
        case 1: return (at(1) - at(-1)) / (2.0 * s);
        case 2: return (at(1) - 2.0 * at(0) + at(-1)) / (s * s);
        case 3: return (at(2) - 2.0 * at(1) + 2.0 * at(-1) - at(-2)) / (2.0 * s * s * s);
        case 4: return (at(2) - 4.0 * at(1) + 6.0 * at(0) - 4.0 * at(-1) + at(-2)) / (s * s * s * s);
    }
    return 0.0;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace

Eigen::VectorXd flow_derivatives(const QuadState& state, const ControlInput& u, const BarrierSpec& spec,
                                 const QuadParams& params, int order, const OracleSettings& settings) {
    if (order < 0 || order > 4) throw InvalidArgument("flow_derivatives order must be in 0..4");
    const double dt = settings.integration_step;

    // Sample on a grid of spacing `base`; every difference step must be a
    // multiple of it and of the integration step.
    const double base = settings.difference_step[0];
    const int sub = static_cast<int>(std::lround(base / dt));
    int reach = 1;
    for (int k = 1; k <= order; ++k) {
        const int m = static_cast<int>(std::lround(settings.difference_step[k - 1] / base));
        reach = std::max(reach, 8 * m);
    }

    std::vector<double> g(static_cast<std::size_t>(2 * reach + 1));
    const Flow x0{state.r, state.v, state.omega, state.R};
    g[static_cast<std::size_t>(reach)] = hOf(x0, spec);
    for (double dir : {1.0, -1.0}) {
        Flow x = x0;
        for (int j = 1; j <= reach; ++j) {
            for (int i = 0; i < sub; ++i) x = rk4(x, u, params, dir * dt);
            g[static_cast<std::size_t>(reach + (dir > 0 ? j : -j))] = hOf(x, spec);
        }
    }

    Eigen::VectorXd out(order + 1);
    out(0) = g[static_cast<std::size_t>(reach)];
    for (int k = 1; k <= order; ++k) {
        const double s = settings.difference_step[k - 1];
        const int m = static_cast<int>(std::lround(s / base));
        // Two Richardson levels remove the s^2 and s^4 error terms.
        const double d1 = stencil(k, g, reach, m, s);
        const double d2 = stencil(k, g, reach, 2 * m, 2.0 * s);
        const double d4 = stencil(k, g, reach, 4 * m, 4.0 * s);
        const double r1 = (4.0 * d1 - d2) / 3.0;
        const double r2 = (4.0 * d2 - d4) / 3.0;
        out(k) = (16.0 * r1 - r2) / 15.0;
    }
    return out;
}

double relative_error(double numeric, double analytic, double floor) {
    return std::abs(numeric - analytic) / std::max(std::abs(analytic), floor);
}

BarrierSpec oracle_spec(BarrierDomain domain) {
    switch (domain) {
        case BarrierDomain::AltitudePosition: return BarrierSpec::altitudePosition(0.3, 2.0);
        case BarrierDomain::AltitudePosVel: return BarrierSpec::altitudePosVel(0.3, 2.0, 1.5);
        case BarrierDomain::LateralPosition: return BarrierSpec::lateralPosition(0.5, -0.4, 2.0, 2.5);
        case BarrierDomain::LateralVelocity: return BarrierSpec::lateralVelocity(1.6, 1.2);
    }
    throw InvalidArgument("unknown barrier domain");
}

ChainSample random_sample(const BarrierSpec& spec, const QuadParams& params, std::mt19937_64& rng) {
    for (;;) {
        ChainSample s;
        s.state.r = Eigen::Vector3d(uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0), uniform(rng, -3.0, 3.0));
        s.state.v = Eigen::Vector3d(uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0));
        s.state.R = rotationFromEuler(uniform(rng, -0.4, 0.4), uniform(rng, -0.4, 0.4), uniform(rng, -M_PI, M_PI));
        s.state.omega = Eigen::Vector3d(uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
        s.input.f = uniform(rng, 0.6, 1.6) * params.hoverThrust();
        s.input.tau = Eigen::Vector3d(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5));
        const Flow x{s.state.r, s.state.v, s.state.omega, s.state.R};
        if (hOf(x, spec) > 0.0) return s;
    }
}

ChainReport check_chain(BarrierDomain domain, int samples, std::uint64_t seed, const QuadParams& params,
                        const OracleSettings& settings) {
    const BarrierSpec spec = oracle_spec(domain);
    const int delta = relativeDegree(domain);
    const EcbfGains gains = EcbfGains::defaultFor(delta);
    std::mt19937_64 rng(seed);

    ChainReport report{domain, samples, 0.0, 0.0};
    for (int i = 0; i < samples; ++i) {
        const ChainSample s = random_sample(spec, params, rng);
        const ConstraintRow row = barrier_row(s.state, s.input.f, spec, gains, params);
        const Eigen::VectorXd fd = flow_derivatives(s.state, s.input, spec, params, delta, settings);

        for (int k = 0; k < delta; ++k) {
            report.max_rel_lower = std::max(report.max_rel_lower,
                                            relative_error(fd(k), row.H(k), settings.relative_floor));
        }
        const double top = isAltitude(domain) ? row.lf_delta + row.a(0) * s.input.f
                                              : row.lf_delta + row.a.dot(s.input.tau.head<2>());
        report.max_rel_top = std::max(report.max_rel_top, relative_error(fd(delta), top, settings.relative_floor));
    }
    return report;
}

std::vector<ChainReport> check_all_chains(int samples, std::uint64_t seed, const QuadParams& params,
                                          const OracleSettings& settings) {
    std::vector<ChainReport> out;
    for (BarrierDomain d : kAllDomains) out.push_back(check_chain(d, samples, seed, params, settings));
    return out;
}

}  // namespace quadsafe::verify
