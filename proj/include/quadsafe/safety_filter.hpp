#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quadsafe/barriers.hpp"
#include "quadsafe/dynamics.hpp"
#include "quadsafe/qp.hpp"

namespace quadsafe {

struct ScheduledBarrier {
    BarrierSpec spec;
    EcbfGains gains;
};

enum class FallbackPolicy { LeastInfeasible, HoldLast, NominalClamped };

std::string_view fallbackName(FallbackPolicy p);

enum class FilterEvent { None, Infeasible, LateralSingular, ThrustTooSmall };

struct FilterResult {
    QpVector u_star;
    QpSolution solution;
    std::vector<ConstraintRow> rows;      // one per barrier, same order as the input list
    std::vector<BarrierDomain> domains;
    FilterEvent event = FilterEvent::None;
    std::string detail;
    bool solved = false;  // false when the QP was bypassed (singular chain)
};

struct FilterOptions {
    FallbackPolicy fallback = FallbackPolicy::LeastInfeasible;
    ChainLimits chain_limits;
    // Previous filtered output, consulted by HoldLast.
    std::optional<QpVector> previous;
};

// High-level QP: min 0.5 (F - f_hat)^2 over 0 <= F <= f_max subject to every
// active altitude barrier row.
FilterResult filter_thrust(const QuadState& state, double f_hat, const std::vector<ScheduledBarrier>& barriers,
                           const QuadParams& params, const FilterOptions& options = {});

// Low-level QP over M = [tau_x, tau_y] with |tau_i| <= tau_max_i, rows built at
// the thrust already fixed by filter_thrust for this step.
FilterResult filter_torque(const QuadState& state, const Eigen::Vector2d& tau_hat_xy, double f_star_applied,
                           const std::vector<ScheduledBarrier>& barriers, const QuadParams& params,
                           const FilterOptions& options = {});

}  // namespace quadsafe
