#include "quadsafe/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "quadsafe/errors.hpp"

namespace quadsafe {

namespace {

// Unit-normal form of a row or a box face: n . u + c >= 0.
struct NormalizedConstraint {
    QpVector n;
    double c = 0.0;
    ActiveConstraint::Kind kind = ActiveConstraint::Kind::Row;
    int index = 0;

    double value(const QpVector& u) const { return n.dot(u) + c; }
};

struct Normalized {
    std::vector<NormalizedConstraint> rows;   // non-degenerate rows only
    std::vector<NormalizedConstraint> faces;  // box faces
    double degenerate_violation = 0.0;        // from rows with ||a|| ~ 0 and b < 0
};

Normalized normalize(const QpProblem& p) {
    Normalized out;
    for (int i = 0; i < static_cast<int>(p.rows.size()); ++i) {
        const auto& row = p.rows[i];
        const double norm = row.a.norm();
        if (norm < kQpDegenerateRowNorm) {
            if (row.b < 0.0) out.degenerate_violation = std::max(out.degenerate_violation, -row.b);
            continue;
        }
        out.rows.push_back({row.a / norm, row.b / norm, ActiveConstraint::Kind::Row, i});
    }
    for (int k = 0; k < p.dim; ++k) {
        QpVector e = QpVector::Zero(p.dim);
        e(k) = 1.0;
        out.faces.push_back({e, -p.lower(k), ActiveConstraint::Kind::Lower, k});
        out.faces.push_back({-e, p.upper(k), ActiveConstraint::Kind::Upper, k});
    }
    return out;
}

std::vector<NormalizedConstraint> allConstraints(const Normalized& nz) {
    std::vector<NormalizedConstraint> all = nz.rows;
    all.insert(all.end(), nz.faces.begin(), nz.faces.end());
    return all;
}

double maxViolation(const std::vector<NormalizedConstraint>& cs, const QpVector& u) {
    double worst = 0.0;
    for (const auto& c : cs) worst = std::max(worst, -c.value(u));
    return worst;
}

bool exactlyFeasible(const QpProblem& p, const QpVector& u) {
    for (int k = 0; k < p.dim; ++k) {
        if (!(u(k) >= p.lower(k) && u(k) <= p.upper(k))) return false;
    }
    for (const auto& row : p.rows) {
        if (!(row.a.dot(u) + row.b >= 0.0)) return false;
    }
    return true;
}

void snapToBox(const QpProblem& p, QpVector& u) {
    for (int k = 0; k < p.dim; ++k) {
        if (u(k) < p.lower(k) && p.lower(k) - u(k) <= kQpFeasibilityTol) u(k) = p.lower(k);
        if (u(k) > p.upper(k) && u(k) - p.upper(k) <= kQpFeasibilityTol) u(k) = p.upper(k);
    }
}

// Adds constraints that are tight at u but carry no multiplier.
void appendTight(const std::vector<NormalizedConstraint>& cs, const QpVector& u,
                 std::vector<ActiveConstraint>& active) {
    for (const auto& c : cs) {
        if (std::abs(c.value(u)) > kQpFeasibilityTol) continue;
        const bool present = std::any_of(active.begin(), active.end(), [&](const ActiveConstraint& a) {
            return a.kind == c.kind && a.index == c.index;
        });
        if (!present) active.push_back({c.kind, c.index, 0.0});
    }
}

struct Candidate {
    QpVector u;
    std::vector<ActiveConstraint> active;
    double objective = std::numeric_limits<double>::infinity();
};

std::optional<Candidate> solveOneDim(const QpProblem& p, const std::vector<NormalizedConstraint>& cs) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const NormalizedConstraint* lo_src = nullptr;
    const NormalizedConstraint* hi_src = nullptr;
    for (const auto& c : cs) {
        // n = +1: u >= -c;  n = -1: u <= c
        if (c.n(0) > 0.0) {
            if (-c.c > lo) { lo = -c.c; lo_src = &c; }
        } else {
            if (c.c < hi) { hi = c.c; hi_src = &c; }
        }
    }
    if (lo > hi + kQpFeasibilityTol) return std::nullopt;

    const double uh = p.u_hat(0);
    Candidate cand;
    cand.u = QpVector::Zero(1);
    if (uh < lo) {
        cand.u(0) = std::min(lo, hi);
        cand.active.push_back({lo_src->kind, lo_src->index, cand.u(0) - uh});
    } else if (uh > hi) {
        cand.u(0) = std::max(hi, lo);
        cand.active.push_back({hi_src->kind, hi_src->index, uh - cand.u(0)});
    } else {
        cand.u(0) = uh;
    }
    cand.objective = 0.5 * (cand.u - p.u_hat).squaredNorm();
    return cand;
}

std::optional<Candidate> solveTwoDim(const QpProblem& p, const std::vector<NormalizedConstraint>& cs,
                                     double dual_tol) {
    std::optional<Candidate> best;
    auto consider = [&](Candidate&& c) {
        if (maxViolation(cs, c.u) > kQpFeasibilityTol) return;
        c.objective = 0.5 * (c.u - p.u_hat).squaredNorm();
        if (!best || c.objective < best->objective) best = std::move(c);
    };

    const int n = static_cast<int>(cs.size());
    for (int i = 0; i < n; ++i) {
        const double gi = cs[i].value(p.u_hat);
        if (gi >= 0.0) continue;  // multiplier would be negative
        Candidate c;
        c.u = p.u_hat - gi * cs[i].n;
        c.active.push_back({cs[i].kind, cs[i].index, -gi});
        consider(std::move(c));
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            Eigen::Matrix2d M;
            M.row(0) = cs[i].n.transpose();
            M.row(1) = cs[j].n.transpose();
            const double det = M.determinant();
            if (std::abs(det) < 1e-12) continue;
            const Eigen::Vector2d u = M.inverse() * Eigen::Vector2d(-cs[i].c, -cs[j].c);
            const Eigen::Vector2d lambda = M.transpose().inverse() * (u - Eigen::Vector2d(p.u_hat));
            const double scale = std::max(1.0, (u - Eigen::Vector2d(p.u_hat)).norm());
            if (lambda(0) < -dual_tol * scale || lambda(1) < -dual_tol * scale) continue;
            Candidate c;
            c.u = u;
            c.active.push_back({cs[i].kind, cs[i].index, lambda(0)});
            c.active.push_back({cs[j].kind, cs[j].index, lambda(1)});
            consider(std::move(c));
        }
    }
    return best;
}

QpSolution finish(const QpProblem& p, const Normalized& nz, Candidate cand, QpStatus status) {
    QpSolution sol;
    snapToBox(p, cand.u);
    sol.u_star = cand.u;
    sol.status = status;
    sol.active_set = std::move(cand.active);
    const auto cs = allConstraints(nz);
    appendTight(cs, sol.u_star, sol.active_set);
    sol.max_violation = std::max(maxViolation(nz.rows, sol.u_star), nz.degenerate_violation);
    return sol;
}

QpSolution infeasibleAtClamp(const QpProblem& p, const Normalized& nz) {
    QpSolution sol;
    sol.u_star = p.u_hat.cwiseMax(p.lower).cwiseMin(p.upper);
    sol.status = QpStatus::Infeasible;
    sol.max_violation = std::max(maxViolation(nz.rows, sol.u_star), nz.degenerate_violation);
    sol.kkt_residual = std::numeric_limits<double>::infinity();
    return sol;
}

}  // namespace

void QpProblem::validate() const {
    if (dim != 1 && dim != 2) throw InvalidArgument("QpProblem.dim must be 1 or 2");
    if (u_hat.size() != dim || lower.size() != dim || upper.size() != dim) {
        throw InvalidArgument("QpProblem vectors must have length dim");
    }
    if (!u_hat.allFinite()) throw InvalidArgument("QpProblem.u_hat must be finite");
    for (int k = 0; k < dim; ++k) {
        if (!(lower(k) <= upper(k)) || !std::isfinite(lower(k)) || !std::isfinite(upper(k))) {
            throw InvalidArgument("QpProblem box requires finite lower <= upper");
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].a.size() != dim) {
            throw InvalidArgument("QpProblem.rows[" + std::to_string(i) + "] width does not match dim");
        }
        if (!rows[i].a.allFinite() || !std::isfinite(rows[i].b)) {
            throw InvalidArgument("QpProblem.rows[" + std::to_string(i) + "] is not finite");
        }
    }
}

double kkt_residual(const QpProblem& p, const QpVector& u, const std::vector<ActiveConstraint>& active) {
    const Normalized nz = normalize(p);
    const auto cs = allConstraints(nz);
    auto lookup = [&](const ActiveConstraint& a) -> const NormalizedConstraint* {
        for (const auto& c : cs) {
            if (c.kind == a.kind && c.index == a.index) return &c;
        }
        return nullptr;
    };

    QpVector stationarity = u - p.u_hat;
    double dual = 0.0;
    double compl_slack = 0.0;
    for (const auto& a : active) {
        const NormalizedConstraint* c = lookup(a);
        if (c == nullptr) continue;
        stationarity -= a.multiplier * c->n;
        dual = std::max(dual, -a.multiplier);
        compl_slack = std::max(compl_slack, std::abs(a.multiplier * c->value(u)));
    }
    const double primal = std::max(maxViolation(cs, u), nz.degenerate_violation);
    return std::max({stationarity.cwiseAbs().maxCoeff(), primal, dual, compl_slack});
}

QpSolution solve_qp(const QpProblem& p) {
    p.validate();
    const Normalized nz = normalize(p);
    if (nz.degenerate_violation > 0.0) return infeasibleAtClamp(p, nz);

    if (exactlyFeasible(p, p.u_hat)) {
        QpSolution sol;
        sol.u_star = p.u_hat;
        sol.status = QpStatus::Optimal;
        appendTight(allConstraints(nz), sol.u_star, sol.active_set);
        sol.kkt_residual = kkt_residual(p, sol.u_star, sol.active_set);
        return sol;
    }

    const auto cs = allConstraints(nz);
    std::optional<Candidate> cand;
    if (p.dim == 1) {
        cand = solveOneDim(p, cs);
    } else {
        cand = solveTwoDim(p, cs, 1e-12);
        if (!cand) cand = solveTwoDim(p, cs, 1e-9);
    }
    if (!cand) return infeasibleAtClamp(p, nz);

    QpSolution sol = finish(p, nz, std::move(*cand), QpStatus::Optimal);
    sol.kkt_residual = kkt_residual(p, sol.u_star, sol.active_set);
    return sol;
}

QpSolution least_infeasible(const QpProblem& p) {
    p.validate();
    const Normalized nz = normalize(p);
    const auto& rows = nz.rows;

    // The worst row violation is a convex piecewise-linear function of u; over
    // the box its minimum sits on a vertex of the arrangement formed by the
    // box faces and the lines where two rows are equally violated.
    std::vector<QpVector> points;
    auto inBox = [&](const QpVector& u) {
        for (int k = 0; k < p.dim; ++k) {
            if (u(k) < p.lower(k) - kQpFeasibilityTol || u(k) > p.upper(k) + kQpFeasibilityTol) return false;
        }
        return true;
    };
    auto add = [&](QpVector u) {
        if (!u.allFinite() || !inBox(u)) return;
        snapToBox(p, u);
        points.push_back(u);
    };

    const int n = static_cast<int>(rows.size());
    if (p.dim == 1) {
        add(p.lower);
        add(p.upper);
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const double dn = rows[i].n(0) - rows[j].n(0);
                if (std::abs(dn) < 1e-12) continue;
                QpVector u(1);
                u(0) = (rows[j].c - rows[i].c) / dn;
                add(u);
            }
        }
    } else {
        for (int corner = 0; corner < 4; ++corner) {
            QpVector u(2);
            u(0) = (corner & 1) ? p.upper(0) : p.lower(0);
            u(1) = (corner & 2) ? p.upper(1) : p.lower(1);
            add(u);
        }
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                const Eigen::Vector2d dn = rows[i].n - rows[j].n;
                const double dc = rows[j].c - rows[i].c;  // dn . u = dc
                for (int k = 0; k < 2; ++k) {
                    const int other = 1 - k;
                    if (std::abs(dn(other)) < 1e-12) continue;
                    for (double fixed : {p.lower(k), p.upper(k)}) {
                        QpVector u(2);
                        u(k) = fixed;
                        u(other) = (dc - dn(k) * fixed) / dn(other);
                        add(u);
                    }
                }
                for (int l = j + 1; l < n; ++l) {
                    Eigen::Matrix2d M;
                    M.row(0) = (rows[i].n - rows[j].n).transpose();
                    M.row(1) = (rows[i].n - rows[l].n).transpose();
                    if (std::abs(M.determinant()) < 1e-12) continue;
                    const Eigen::Vector2d rhs(rows[j].c - rows[i].c, rows[l].c - rows[i].c);
                    add(QpVector(M.inverse() * rhs));
                }
            }
        }
    }

    double best = std::numeric_limits<double>::infinity();
    for (const auto& u : points) best = std::min(best, maxViolation(rows, u));

    if (rows.empty() || best <= 0.0) {
        if (nz.degenerate_violation <= 0.0) return solve_qp(p);
        // Only rows with no input authority are violated. Honor the rest.
        QpProblem reduced = p;
        reduced.rows.clear();
        for (const auto& r : rows) reduced.rows.push_back({r.n, r.c});
        QpSolution sol = solve_qp(reduced);
        for (auto& a : sol.active_set) {
            if (a.kind == ActiveConstraint::Kind::Row) a.index = rows[a.index].index;
        }
        sol.status = QpStatus::Infeasible;
        sol.max_violation = nz.degenerate_violation;
        return sol;
    }

    // Closest point to u_hat among the least-violating ones: shift every row by
    // the optimal violation and solve the now-feasible projection.
    QpProblem relaxed = p;
    relaxed.rows.clear();
    for (const auto& r : rows) relaxed.rows.push_back({r.n, r.c + best + 1e-12});
    QpSolution sol = solve_qp(relaxed);
    if (sol.status != QpStatus::Optimal) {
        // Numerical corner case: fall back to the best vertex itself.
        const auto it = std::min_element(points.begin(), points.end(), [&](const QpVector& a, const QpVector& b) {
            return maxViolation(rows, a) < maxViolation(rows, b);
        });
        sol.u_star = *it;
        sol.active_set.clear();
    }
    sol.kkt_residual = kkt_residual(relaxed, sol.u_star, sol.active_set);
    // Report row indices against the caller's rows, not the shifted copy.
    for (auto& a : sol.active_set) {
        if (a.kind == ActiveConstraint::Kind::Row) a.index = rows[a.index].index;
    }
    sol.status = QpStatus::Infeasible;
    sol.max_violation = std::max(maxViolation(rows, sol.u_star), nz.degenerate_violation);
    return sol;
}

}  // namespace quadsafe
