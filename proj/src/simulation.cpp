#include "quadsafe/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quadsafe/errors.hpp"

namespace quadsafe {

namespace {

std::string interval(const BarrierSpec& s) {
    std::ostringstream out;
    out << "[" << s.active_from << ", ";
    if (std::isinf(s.active_until)) {
        out << "inf";
    } else {
        out << s.active_until;
    }
    out << ") s";
    return out.str();
}

std::vector<ScheduledBarrier> activeAt(const std::vector<ScheduledBarrier>& all, double t,
                                       std::vector<std::size_t>& ids) {
    std::vector<ScheduledBarrier> out;
    ids.clear();
    for (std::size_t i = 0; i < all.size(); ++i) {
        if (all[i].spec.activeAt(t)) {
            out.push_back(all[i]);
            ids.push_back(i);
        }
    }
    return out;
}

QpStatusField statusOf(const FilterResult& r) {
    if (!r.solved) return QpStatusField::Bypassed;
    return r.solution.status == QpStatus::Optimal ? QpStatusField::Optimal : QpStatusField::Infeasible;
}

void recordFilterEvent(const FilterResult& r, std::string_view level, TraceRecord& rec) {
    switch (r.event) {
        case FilterEvent::None: return;
        case FilterEvent::Infeasible:
            rec.events.push_back({EventType::Infeasible, std::string(level) + " " + r.detail});
            return;
        case FilterEvent::LateralSingular:
            rec.events.push_back({EventType::LateralSingular, std::string(level) + " " + r.detail});
            return;
        case FilterEvent::ThrustTooSmall:
            rec.events.push_back({EventType::ThrustTooSmall, std::string(level) + " " + r.detail});
            return;
    }
}

}  // namespace

Reference reference_at(double t, const SinusoidReference& ref) {
    Reference out;
    for (int k = 0; k < 3; ++k) {
        const double a = ref.amplitude(k);
        const double w = ref.frequency(k);
        out.r(k) = a * std::sin(w * t);
        out.r_dot(k) = a * w * std::cos(w * t);
        out.r_ddot(k) = -a * w * w * std::sin(w * t);
    }
    if (ref.yaw_mode == YawMode::Constant) {
        out.psi = ref.yaw;
    } else if (out.r.x() == 0.0 && out.r.y() == 0.0) {
        out.psi = 0.0;
    } else {
        out.psi = std::atan2(out.r.y(), out.r.x());
    }
    return out;
}

std::size_t Scenario::stepCount() const {
    return static_cast<std::size_t>(std::llround(duration / dt));
}

void Scenario::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) throw InvalidArgument("duration_s must be > 0");
    if (!(dt > 0.0) || !(dt <= duration)) throw InvalidArgument("dt_s must be > 0 and <= duration_s");
    if (!initial_state.allFinite()) throw InvalidArgument("initial_state must be finite");
    if (!reference.amplitude.allFinite() || !reference.frequency.allFinite()) {
        throw InvalidArgument("reference amplitude and frequency must be finite");
    }
    params.validate();
    gains.validate();
    limits.validate();
    for (std::size_t i = 0; i < barriers.size(); ++i) {
        const auto& b = barriers[i];
        const std::string key = "barriers[" + std::to_string(i) + "]";
        try {
            b.spec.validate();
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(key + ": " + e.what());
        }
        if (b.gains.delta != relativeDegree(b.spec.domain) || b.gains.K.size() != b.gains.delta) {
            throw InvalidArgument(key + ": " + std::string(domainName(b.spec.domain)) + " needs "
                                  + std::to_string(relativeDegree(b.spec.domain)) + " poles");
        }
    }
    for (std::size_t i = 0; i < barriers.size(); ++i) {
        for (std::size_t j = i + 1; j < barriers.size(); ++j) {
            const auto& a = barriers[i].spec;
            const auto& b = barriers[j].spec;
            if (a.domain != b.domain) continue;
            if (a.active_from < b.active_until && b.active_from < a.active_until) {
                throw InvalidArgument("barriers[" + std::to_string(i) + "] " + std::string(domainName(a.domain))
                                      + " " + interval(a) + " overlaps barriers[" + std::to_string(j) + "] "
                                      + interval(b));
            }
        }
    }
}

std::string_view statusName(QpStatusField s) {
    switch (s) {
        case QpStatusField::Off: return "off";
        case QpStatusField::Optimal: return "optimal";
        case QpStatusField::Infeasible: return "infeasible";
        case QpStatusField::Bypassed: return "bypassed";
    }
    return "unknown";
}

std::string_view eventName(EventType e) {
    switch (e) {
        case EventType::Infeasible: return "infeasible";
        case EventType::AttitudeSingular: return "attitude_singular";
        case EventType::ThrustTooSmall: return "thrust_too_small";
        case EventType::LateralSingular: return "lateral_singular";
        case EventType::BarrierSwitch: return "barrier_switch";
        case EventType::PostQpClamp: return "post_qp_clamp";
    }
    return "unknown";
}

SimulationResult run(const Scenario& sc) {
    sc.validate();
    const QuadParams& params = sc.params;
    const std::size_t n = sc.stepCount();

    SimulationResult result;
    result.records.reserve(n);

    FilterOptions hi_opts;
    hi_opts.fallback = sc.fallback;
    hi_opts.chain_limits = ChainLimits::forParams(params, sc.limits.thrust_floor_fraction);
    FilterOptions lo_opts = hi_opts;

    QuadState state = sc.initial_state;
    std::vector<std::size_t> prev_ids;
    std::vector<std::size_t> ids;

    for (std::size_t k = 0; k < n; ++k) {
        TraceRecord rec;
        rec.t = static_cast<double>(k) * sc.dt;
        rec.state = state;
        rec.euler = euler_of_R(state.R);
        rec.reference = reference_at(rec.t, sc.reference);

        const auto active = activeAt(sc.barriers, rec.t, ids);
        if (k > 0 && ids != prev_ids) {
            std::ostringstream msg;
            msg << "active barriers:";
            for (std::size_t id : ids) msg << " " << id << ":" << domainName(sc.barriers[id].spec.domain);
            rec.events.push_back({EventType::BarrierSwitch, msg.str()});
        }
        prev_ids = ids;

        NominalCommand& nom = rec.nominal;
        nom.r_ddot_cmd = position_loop(state, rec.reference, sc.gains);
        try {
            nom.f_hat = thrust_from_accel(nom.r_ddot_cmd.z(), state.R(2, 2), params, sc.limits);
        } catch (const AttitudeSingular& e) {
            rec.events.push_back({EventType::AttitudeSingular, std::string("thrust: ") + e.what()});
            nom.f_hat = thrust_from_accel(nom.r_ddot_cmd.z(), sc.limits.r33_min, params, sc.limits);
        }

        rec.F_star = nom.f_hat;
        if (sc.filters.high) {
            const FilterResult hi = filter_thrust(state, nom.f_hat, active, params, hi_opts);
            rec.F_star = hi.u_star(0);
            rec.qp_hi = statusOf(hi);
            rec.kkt_hi = hi.solution.kkt_residual;
            recordFilterEvent(hi, "high", rec);
            for (std::size_t i = 0; i < hi.rows.size(); ++i) {
                rec.barriers[static_cast<std::size_t>(hi.domains[i])] = BarrierSample{hi.rows[i].h_value, hi.rows[i].H, 0};
            }
            hi_opts.previous = hi.u_star;
        }

        try {
            nom.omega_cmd = attitude_loop(state, nom.r_ddot_cmd, rec.F_star, rec.reference.psi, sc.gains, params,
                                          sc.limits);
        } catch (const AttitudeSingular& e) {
            rec.events.push_back({EventType::AttitudeSingular, std::string("attitude: ") + e.what()});
            nom.omega_cmd = attitude_loop_saturated(state, nom.r_ddot_cmd, rec.F_star, rec.reference.psi, sc.gains,
                                                    params, sc.limits);
        } catch (const ThrustTooSmall& e) {
            rec.events.push_back({EventType::ThrustTooSmall, std::string("attitude: ") + e.what()});
            nom.omega_cmd = attitude_loop_saturated(state, nom.r_ddot_cmd, rec.F_star, rec.reference.psi, sc.gains,
                                                    params, sc.limits);
        }
        nom.tau_hat = body_rate_loop(state, nom.omega_cmd, sc.gains, params);

        rec.M_star = nom.tau_hat.head<2>();
        rec.tau_z = nom.tau_hat.z();
        if (sc.filters.low) {
            const FilterResult lo = filter_torque(state, nom.tau_hat.head<2>(), rec.F_star, active, params, lo_opts);
            rec.M_star = Eigen::Vector2d(lo.u_star);
            rec.qp_lo = statusOf(lo);
            rec.kkt_lo = lo.solution.kkt_residual;
            recordFilterEvent(lo, "low", rec);
            for (std::size_t i = 0; i < lo.rows.size(); ++i) {
                rec.barriers[static_cast<std::size_t>(lo.domains[i])] = BarrierSample{lo.rows[i].h_value, lo.rows[i].H, 0};
            }
            lo_opts.previous = lo.u_star;
        }

        // Barriers that were not evaluated by a filter still get their h logged.
        for (std::size_t i = 0; i < active.size(); ++i) {
            auto& slot = rec.barriers[static_cast<std::size_t>(active[i].spec.domain)];
            if (!slot) slot = BarrierSample{barrier_h(state, active[i].spec), {}, 0};
            slot->spec_index = ids[i];
        }

        ControlInput u;
        u.f = std::clamp(rec.F_star, 0.0, params.f_max);
        u.tau = Eigen::Vector3d(std::clamp(rec.M_star.x(), -params.tau_max.x(), params.tau_max.x()),
                                std::clamp(rec.M_star.y(), -params.tau_max.y(), params.tau_max.y()), rec.tau_z);
        if (u.f != rec.F_star || u.tau.x() != rec.M_star.x() || u.tau.y() != rec.M_star.y()) {
            std::ostringstream msg;
            msg << "F*=" << rec.F_star << " M*=(" << rec.M_star.x() << "," << rec.M_star.y() << ")";
            rec.events.push_back({EventType::PostQpClamp, msg.str()});
            rec.F_star = u.f;
            rec.M_star = u.tau.head<2>();
        }

        result.records.push_back(std::move(rec));
        try {
            state = step(state, u, params, sc.dt);
        } catch (const NonFiniteState& e) {
            result.aborted = true;
            result.abort_message = e.what();
            break;
        }
    }
    return result;
}

TraceSummary summarize(const std::vector<TraceRecord>& records, double dt, double slack) {
    TraceSummary s;
    s.steps = records.size();
    std::array<std::size_t, 4> spec_of{};
    for (const auto& rec : records) {
        bool infeasible = false;
        bool singular = false;
        for (const auto& e : rec.events) {
            infeasible |= e.type == EventType::Infeasible;
            singular |= e.type == EventType::AttitudeSingular || e.type == EventType::LateralSingular
                        || e.type == EventType::ThrustTooSmall;
            if (e.type == EventType::PostQpClamp) ++s.clamp_events;
        }
        s.infeasible_steps += infeasible ? 1 : 0;
        s.singular_steps += singular ? 1 : 0;

        for (std::size_t d = 0; d < 4; ++d) {
            const auto& sample = rec.barriers[d];
            if (!sample) continue;
            BarrierStats& b = s.barriers[d];
            const double h = sample->h;
            if (!b.present) {
                b.present = true;
                b.min_h = h;
                b.min_h_after_entry = std::numeric_limits<double>::infinity();
                spec_of[d] = sample->spec_index;
            } else if (spec_of[d] != sample->spec_index) {
                spec_of[d] = sample->spec_index;
                b.first_entry_t.reset();
            }
            b.min_h = std::min(b.min_h, h);
            if (!b.first_entry_t && h >= 0.0) b.first_entry_t = rec.t;
            if (b.first_entry_t) {
                b.min_h_after_entry = std::min(b.min_h_after_entry, h);
                if (h < -slack) b.violation_duration += dt;
            }
        }
    }
    return s;
}

}  // namespace quadsafe
