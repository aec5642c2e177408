#include "quadsafe/verify/qp_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "quadsafe/errors.hpp"

namespace quadsafe::verify {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int gridCount(double lo, double hi, double step) { return static_cast<int>(std::floor((hi - lo) / step)); }

struct LineBest {
    double fixed = 0.0;
    double free = 0.0;
    double cost = std::numeric_limits<double>::infinity();
};

// Grid over coordinate k; the other coordinate is solved exactly per line.
LineBest scanLines(const QpProblem& p, int k, double step) {
    const int o = 1 - k;
    LineBest best;
    const int n = gridCount(p.lower(k), p.upper(k), step);
    for (int i = 0; i <= n; ++i) {
        const double x = p.lower(k) + i * step;
        double lo = p.lower(o);
        double hi = p.upper(o);
        bool ok = true;
        for (const auto& row : p.rows) {
            const double rest = row.a(k) * x + row.b;  // row.a(o) * y + rest >= 0
            if (row.a(o) > 0.0) {
                lo = std::max(lo, -rest / row.a(o));
            } else if (row.a(o) < 0.0) {
                hi = std::min(hi, -rest / row.a(o));
            } else if (rest < 0.0) {
                ok = false;
            }
        }
        if (!ok || lo > hi) continue;
        const double y = std::clamp(p.u_hat(o), lo, hi);
        const double cost = (x - p.u_hat(k)) * (x - p.u_hat(k)) + (y - p.u_hat(o)) * (y - p.u_hat(o));
        if (cost < best.cost) best = {x, y, cost};
    }
    return best;
}

}  // namespace

QpProblem random_feasible_qp(std::mt19937_64& rng, int dim, int max_rows, double margin) {
    if (dim != 1 && dim != 2) throw InvalidArgument("random_feasible_qp dim must be 1 or 2");
    QpProblem p;
    p.dim = dim;
    p.lower.resize(dim);
    p.upper.resize(dim);
    p.u_hat.resize(dim);
    QpVector center(dim);
    for (int k = 0; k < dim; ++k) {
        p.lower(k) = -uniform(rng, 0.5, 5.0);
        p.upper(k) = uniform(rng, 0.5, 5.0);
        center(k) = uniform(rng, p.lower(k) + margin, p.upper(k) - margin);
        p.u_hat(k) = uniform(rng, p.lower(k) - 3.0, p.upper(k) + 3.0);
    }
    const int rows = std::uniform_int_distribution<int>(0, max_rows)(rng);
    std::normal_distribution<double> normal;
    for (int i = 0; i < rows; ++i) {
        LinearConstraint row;
        row.a.resize(dim);
        for (int k = 0; k < dim; ++k) row.a(k) = normal(rng);
        row.a *= std::pow(10.0, uniform(rng, -1.0, 1.0));
        // Tight rows (slack right at the margin) are common on purpose.
        const double slack = uniform(rng, 0.0, 1.0) < 0.3 ? 0.0 : uniform(rng, 0.0, 1.5);
        row.b = row.a.norm() * (margin + slack) - row.a.dot(center);
        p.rows.push_back(row);
    }
    return p;
}

QpVector grid_minimizer(const QpProblem& p, double step) {
    p.validate();
    if (p.dim == 1) {
        double best = std::numeric_limits<double>::quiet_NaN();
        double best_cost = std::numeric_limits<double>::infinity();
        const int n = gridCount(p.lower(0), p.upper(0), step);
        for (int i = 0; i <= n; ++i) {
            const double x = p.lower(0) + i * step;
            const bool ok = std::all_of(p.rows.begin(), p.rows.end(),
                                        [&](const LinearConstraint& r) { return r.a(0) * x + r.b >= 0.0; });
            const double cost = (x - p.u_hat(0)) * (x - p.u_hat(0));
            if (ok && cost < best_cost) {
                best = x;
                best_cost = cost;
            }
        }
        return QpVector::Constant(1, best);
    }
    QpVector out(2);
    out(0) = scanLines(p, 0, step).fixed;
    out(1) = scanLines(p, 1, step).fixed;
    return out;
}

}  // namespace quadsafe::verify
