#include "quadsafe/safety_filter.hpp"

#include <sstream>

#include "quadsafe/errors.hpp"

namespace quadsafe {

namespace {

QpVector clampToBox(const QpVector& u, const QpProblem& p) { return u.cwiseMax(p.lower).cwiseMin(p.upper); }

void solveWithFallback(const QpProblem& problem, const FilterOptions& options, FilterResult& out) {
    out.solution = solve_qp(problem);
    out.solved = true;
    if (out.solution.status == QpStatus::Optimal) {
        out.u_star = out.solution.u_star;
        return;
    }

    out.event = FilterEvent::Infeasible;
    switch (options.fallback) {
        case FallbackPolicy::LeastInfeasible:
            out.solution = least_infeasible(problem);
            out.u_star = out.solution.u_star;
            break;
        case FallbackPolicy::HoldLast:
            out.u_star = clampToBox(options.previous.value_or(problem.u_hat), problem);
            break;
        case FallbackPolicy::NominalClamped:
            out.u_star = clampToBox(problem.u_hat, problem);
            break;
    }
    std::ostringstream msg;
    msg << "max_violation=" << out.solution.max_violation << " fallback=" << fallbackName(options.fallback);
    out.detail = msg.str();
}

}  // namespace

std::string_view fallbackName(FallbackPolicy p) {
    switch (p) {
        case FallbackPolicy::LeastInfeasible: return "least_infeasible";
        case FallbackPolicy::HoldLast: return "hold_last";
        case FallbackPolicy::NominalClamped: return "nominal_clamped";
    }
    return "unknown";
}

FilterResult filter_thrust(const QuadState& state, double f_hat, const std::vector<ScheduledBarrier>& barriers,
                           const QuadParams& params, const FilterOptions& options) {
    QpProblem problem;
    problem.dim = 1;
    problem.u_hat = QpVector::Constant(1, f_hat);
    problem.lower = QpVector::Constant(1, 0.0);
    problem.upper = QpVector::Constant(1, params.f_max);

    FilterResult out;
    for (const auto& b : barriers) {
        if (!isAltitude(b.spec.domain)) continue;
        ConstraintRow row = barrier_row(state, f_hat, b.spec, b.gains, params, options.chain_limits);
        problem.rows.push_back(row.constraint());
        out.rows.push_back(std::move(row));
        out.domains.push_back(b.spec.domain);
    }
    solveWithFallback(problem, options, out);
    return out;
}

FilterResult filter_torque(const QuadState& state, const Eigen::Vector2d& tau_hat_xy, double f_star_applied,
                           const std::vector<ScheduledBarrier>& barriers, const QuadParams& params,
                           const FilterOptions& options) {
    QpProblem problem;
    problem.dim = 2;
    problem.u_hat = tau_hat_xy;
    problem.lower = -params.tau_max;
    problem.upper = params.tau_max;

    FilterResult out;
    try {
        for (const auto& b : barriers) {
            if (isAltitude(b.spec.domain)) continue;
            ConstraintRow row = barrier_row(state, f_star_applied, b.spec, b.gains, params, options.chain_limits);
            problem.rows.push_back(row.constraint());
            out.rows.push_back(std::move(row));
            out.domains.push_back(b.spec.domain);
        }
    } catch (const LateralSingular& e) {
        out.event = FilterEvent::LateralSingular;
        out.detail = e.what();
    } catch (const ThrustTooSmall& e) {
        out.event = FilterEvent::ThrustTooSmall;
        out.detail = e.what();
    }
    if (out.event != FilterEvent::None) {
        // Chain undefined at this attitude or thrust: pass the nominal through.
        out.rows.clear();
        out.domains.clear();
        out.u_star = clampToBox(problem.u_hat, problem);
        out.solution.u_star = out.u_star;
        return out;
    }
    solveWithFallback(problem, options, out);
    return out;
}

}  // namespace quadsafe
