#include "quadsafe/scenario_io.hpp"

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "quadsafe/errors.hpp"

namespace quadsafe {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw InvalidArgument(path + ": " + what);
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void requireMap(const YAML::Node& n, const std::string& path) {
    if (!n.IsMap()) fail(path.empty() ? "document" : path, "expected a mapping");
}

void checkKeys(const YAML::Node& n, const std::string& path, const std::set<std::string>& allowed) {
    requireMap(n, path);
    for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        if (!allowed.count(key)) {
            std::string list;
            for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
            fail(join(path, key), "unknown key (allowed: " + list + ")");
        }
    }
}

double number(const YAML::Node& parent, const std::string& path, const char* key, double fallback) {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
        return n.as<double>();
    } catch (const YAML::Exception&) {
        fail(join(path, key), "expected a number");
    }
}

double positive(const YAML::Node& parent, const std::string& path, const char* key, double fallback) {
    const double v = number(parent, path, key, fallback);
    if (!(v > 0.0) || !std::isfinite(v)) fail(join(path, key), "must be finite and > 0");
    return v;
}

double finite(const YAML::Node& parent, const std::string& path, const char* key, double fallback) {
    const double v = number(parent, path, key, fallback);
    if (!std::isfinite(v)) fail(join(path, key), "must be finite");
    return v;
}

std::vector<double> numbers(const YAML::Node& parent, const std::string& path, const char* key) {
    const YAML::Node n = parent[key];
    if (!n.IsSequence()) fail(join(path, key), "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        try {
            out.push_back(n[i].as<double>());
        } catch (const YAML::Exception&) {
            fail(join(path, key) + "[" + std::to_string(i) + "]", "expected a number");
        }
    }
    return out;
}

template <int N>
Eigen::Matrix<double, N, 1> fixed(const YAML::Node& parent, const std::string& path, const char* key,
                                  const Eigen::Matrix<double, N, 1>& fallback) {
    if (!parent[key]) return fallback;
    const auto v = numbers(parent, path, key);
    if (static_cast<int>(v.size()) != N) fail(join(path, key), "expected " + std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> out;
    for (int i = 0; i < N; ++i) {
        if (!std::isfinite(v[i])) fail(join(path, key), "entries must be finite");
        out(i) = v[i];
    }
    return out;
}

bool boolean(const YAML::Node& parent, const std::string& path, const char* key, bool fallback) {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    try {
        return n.as<bool>();
    } catch (const YAML::Exception&) {
        fail(join(path, key), "expected true or false");
    }
}

std::string text(const YAML::Node& parent, const std::string& path, const char* key, const std::string& fallback) {
    const YAML::Node n = parent[key];
    if (!n) return fallback;
    if (!n.IsScalar()) fail(join(path, key), "expected a string");
    return n.as<std::string>();
}

BarrierDomain parseDomain(const std::string& s, const std::string& path) {
    for (BarrierDomain d : kAllDomains) {
        if (s == domainName(d)) return d;
    }
    fail(path, "unknown domain '" + s + "' (expected altitude_position, altitude_posvel, lateral_position or "
               "lateral_velocity)");
}

ScheduledBarrier parseBarrier(const YAML::Node& n, const std::string& path) {
    requireMap(n, path);
    if (!n["domain"]) fail(join(path, "domain"), "required");
    const BarrierDomain d = parseDomain(text(n, path, "domain", ""), join(path, "domain"));

    std::set<std::string> keys{"domain", "exponent", "active_from_s", "active_until_s"};
    switch (d) {
        case BarrierDomain::AltitudePosition: keys.insert({"center_z_m", "p_z_m", "poles_per_s"}); break;
        case BarrierDomain::AltitudePosVel: keys.insert({"center_z_m", "p_z_m", "v_z_mps", "alpha_per_s"}); break;
        case BarrierDomain::LateralPosition:
            keys.insert({"center_x_m", "center_y_m", "p_x_m", "p_y_m", "poles_per_s"});
            break;
        case BarrierDomain::LateralVelocity: keys.insert({"v_x_mps", "v_y_mps", "poles_per_s"}); break;
    }
    checkKeys(n, path, keys);

    auto required = [&](const char* key) {
        if (!n[key]) fail(join(path, key), "required for " + std::string(domainName(d)));
        return positive(n, path, key, 0.0);
    };

    ScheduledBarrier b;
    switch (d) {
        case BarrierDomain::AltitudePosition:
            b.spec = BarrierSpec::altitudePosition(finite(n, path, "center_z_m", 0.0), required("p_z_m"));
            break;
        case BarrierDomain::AltitudePosVel:
            b.spec = BarrierSpec::altitudePosVel(finite(n, path, "center_z_m", 0.0), required("p_z_m"),
                                                 required("v_z_mps"));
            break;
        case BarrierDomain::LateralPosition:
            b.spec = BarrierSpec::lateralPosition(finite(n, path, "center_x_m", 0.0), finite(n, path, "center_y_m", 0.0),
                                                  required("p_x_m"), required("p_y_m"));
            break;
        case BarrierDomain::LateralVelocity:
            b.spec = BarrierSpec::lateralVelocity(required("v_x_mps"), required("v_y_mps"));
            break;
    }

    const double exponent = number(n, path, "exponent", 4.0);
    if (exponent != std::floor(exponent) || exponent < 2.0 || std::fmod(exponent, 2.0) != 0.0 || exponent > 64.0) {
        fail(join(path, "exponent"), "must be an even integer >= 2");
    }
    b.spec.exponent = static_cast<int>(exponent);
    b.spec.active_from = finite(n, path, "active_from_s", 0.0);
    b.spec.active_until = number(n, path, "active_until_s", std::numeric_limits<double>::infinity());
    if (std::isnan(b.spec.active_until) || !(b.spec.active_until > b.spec.active_from)) {
        fail(join(path, "active_until_s"), "must be greater than active_from_s");
    }

    const int delta = relativeDegree(d);
    try {
        if (d == BarrierDomain::AltitudePosVel) {
            b.gains = EcbfGains::classKappa(positive(n, path, "alpha_per_s", 1.0));
        } else if (n["poles_per_s"]) {
            const auto poles = numbers(n, path, "poles_per_s");
            if (static_cast<int>(poles.size()) != delta) {
                fail(join(path, "poles_per_s"), std::string(domainName(d)) + " has relative degree "
                                                    + std::to_string(delta) + " and needs "
                                                    + std::to_string(delta) + " poles");
            }
            b.gains = EcbfGains::fromPoles(poles);
        } else {
            b.gains = EcbfGains::defaultFor(delta);
        }
    } catch (const InvalidPoles& e) {
        fail(join(path, d == BarrierDomain::AltitudePosVel ? "alpha_per_s" : "poles_per_s"), e.what());
    }
    return b;
}

FallbackPolicy parseFallback(const std::string& s, const std::string& path) {
    for (FallbackPolicy p : {FallbackPolicy::LeastInfeasible, FallbackPolicy::HoldLast, FallbackPolicy::NominalClamped}) {
        if (s == fallbackName(p)) return p;
    }
    fail(path, "unknown policy '" + s + "' (expected least_infeasible, hold_last or nominal_clamped)");
}

Scenario parseDocument(const YAML::Node& root) {
    checkKeys(root, "", {"name", "duration_s", "dt_s", "fallback", "filters", "reference", "initial_state",
                         "barriers", "gains", "limits", "params"});
    Scenario sc;
    sc.name = text(root, "", "name", sc.name);
    sc.duration = positive(root, "", "duration_s", sc.duration);
    sc.dt = positive(root, "", "dt_s", sc.dt);
    if (sc.dt > sc.duration) fail("dt_s", "must not exceed duration_s");
    sc.fallback = parseFallback(text(root, "", "fallback", std::string(fallbackName(sc.fallback))), "fallback");

    if (const YAML::Node n = root["filters"]) {
        checkKeys(n, "filters", {"high", "low"});
        sc.filters.high = boolean(n, "filters", "high", false);
        sc.filters.low = boolean(n, "filters", "low", false);
    }

    if (const YAML::Node n = root["reference"]) {
        const std::string p = "reference";
        checkKeys(n, p, {"amplitude_m", "frequency_radps", "yaw_mode", "yaw_rad"});
        sc.reference.amplitude = fixed<3>(n, p, "amplitude_m", sc.reference.amplitude);
        sc.reference.frequency = fixed<3>(n, p, "frequency_radps", sc.reference.frequency);
        const std::string mode = text(n, p, "yaw_mode", "atan2");
        if (mode == "atan2") {
            sc.reference.yaw_mode = YawMode::Atan2;
        } else if (mode == "constant") {
            sc.reference.yaw_mode = YawMode::Constant;
        } else {
            fail(join(p, "yaw_mode"), "expected atan2 or constant");
        }
        sc.reference.yaw = finite(n, p, "yaw_rad", 0.0);
    }

    if (const YAML::Node n = root["initial_state"]) {
        const std::string p = "initial_state";
        checkKeys(n, p, {"position_m", "velocity_mps", "euler_rad", "body_rates_radps"});
        sc.initial_state.r = fixed<3>(n, p, "position_m", Eigen::Vector3d::Zero());
        sc.initial_state.v = fixed<3>(n, p, "velocity_mps", Eigen::Vector3d::Zero());
        const Eigen::Vector3d e = fixed<3>(n, p, "euler_rad", Eigen::Vector3d::Zero());
        sc.initial_state.R = rotationFromEuler(e.x(), e.y(), e.z());
        sc.initial_state.omega = fixed<3>(n, p, "body_rates_radps", Eigen::Vector3d::Zero());
    }

    if (const YAML::Node n = root["barriers"]) {
        if (!n.IsSequence()) fail("barriers", "expected a list");
        for (std::size_t i = 0; i < n.size(); ++i) {
            sc.barriers.push_back(parseBarrier(n[i], "barriers[" + std::to_string(i) + "]"));
        }
    }

    if (const YAML::Node n = root["gains"]) {
        const std::string p = "gains";
        checkKeys(n, p, {"kp_per_s2", "kd_per_s", "k_R_per_s", "k_psi_per_s", "k_omega_per_s"});
        sc.gains.kp = fixed<3>(n, p, "kp_per_s2", sc.gains.kp);
        sc.gains.kd = fixed<3>(n, p, "kd_per_s", sc.gains.kd);
        sc.gains.k_R = positive(n, p, "k_R_per_s", sc.gains.k_R);
        sc.gains.k_psi = positive(n, p, "k_psi_per_s", sc.gains.k_psi);
        sc.gains.k_omega = fixed<3>(n, p, "k_omega_per_s", sc.gains.k_omega);
    }

    if (const YAML::Node n = root["limits"]) {
        const std::string p = "limits";
        checkKeys(n, p, {"r33_min", "sin_tilt_max", "thrust_floor_fraction"});
        sc.limits.r33_min = number(n, p, "r33_min", sc.limits.r33_min);
        sc.limits.sin_tilt_max = number(n, p, "sin_tilt_max", sc.limits.sin_tilt_max);
        sc.limits.thrust_floor_fraction = number(n, p, "thrust_floor_fraction", sc.limits.thrust_floor_fraction);
    }

    if (const YAML::Node n = root["params"]) {
        const std::string p = "params";
        checkKeys(n, p, {"g_mps2", "m_kg", "Ix_kgm2", "Iy_kgm2", "Iz_kgm2", "f_max_N", "tau_max_Nm", "L_m", "k_f",
                         "k_w"});
        QuadParams& q = sc.params;
        q.g = positive(n, p, "g_mps2", q.g);
        q.m = positive(n, p, "m_kg", q.m);
        q.Ix = positive(n, p, "Ix_kgm2", q.Ix);
        q.Iy = positive(n, p, "Iy_kgm2", q.Iy);
        q.Iz = positive(n, p, "Iz_kgm2", q.Iz);
        q.f_max = positive(n, p, "f_max_N", q.f_max);
        q.tau_max = fixed<2>(n, p, "tau_max_Nm", q.tau_max);
        q.L = positive(n, p, "L_m", q.L);
        q.k_f = positive(n, p, "k_f", q.k_f);
        q.k_w = positive(n, p, "k_w", q.k_w);
    }

    sc.validate();
    return sc;
}

constexpr const char* kKeyGuide =
    "# duration_s, dt_s: one fixed step drives the controller, both QPs and RK4.\n"
    "# fallback: least_infeasible | hold_last | nominal_clamped, used when a QP is infeasible.\n"
    "# filters.high filters thrust over altitude barriers; filters.low filters\n"
    "#   roll/pitch moments over lateral barriers.\n"
    "# reference: r_d(t) = amplitude_m * sin(frequency_radps * t) per axis; yaw_mode atan2\n"
    "#   sets yaw to atan2(y_d, x_d), constant holds yaw_rad.\n"
    "# initial_state.euler_rad: roll, pitch, yaw with R = Rz(yaw) Ry(pitch) Rx(roll).\n"
    "# barriers: h = 1 - sum(((s - center) / half_width)^exponent). At most one spec per\n"
    "#   domain is active at any time, over [active_from_s, active_until_s) (open-ended\n"
    "#   when active_until_s is omitted). poles_per_s must be negative reals, one per\n"
    "#   relative degree (altitude_position 2, lateral_velocity 3, lateral_position 4);\n"
    "#   altitude_posvel takes a class-kappa slope alpha_per_s instead.\n"
    "# limits.thrust_floor_fraction is a fraction of m_kg * g_mps2.\n"
    "# params L_m, k_f, k_w are carried but unused: inputs are total thrust and moments.\n";

std::string num(double x) {
    if (x == 0.0) return "0";
    if (std::isinf(x)) return x > 0 ? ".inf" : "-.inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

template <typename Vec>
void emitVector(YAML::Emitter& out, const Vec& v) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index i = 0; i < v.size(); ++i) out << num(v(i));
    out << YAML::EndSeq;
}

}  // namespace

Scenario parse_scenario(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw InvalidArgument(std::string("malformed YAML: ") + e.what());
    }
    if (!root || root.IsNull()) throw InvalidArgument("document: empty scenario");
    return parseDocument(root);
}

Scenario load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read scenario file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(path.string() + ": " + e.what());
    }
}

std::string emit_scenario(const Scenario& sc, bool commented) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << sc.name;
    out << YAML::Key << "duration_s" << YAML::Value << num(sc.duration);
    out << YAML::Key << "dt_s" << YAML::Value << num(sc.dt);
    out << YAML::Key << "fallback" << YAML::Value << std::string(fallbackName(sc.fallback));

    out << YAML::Key << "filters" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "high" << YAML::Value << sc.filters.high;
    out << YAML::Key << "low" << YAML::Value << sc.filters.low;
    out << YAML::EndMap;

    out << YAML::Key << "reference" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "amplitude_m" << YAML::Value;
    emitVector(out, sc.reference.amplitude);
    out << YAML::Key << "frequency_radps" << YAML::Value;
    emitVector(out, sc.reference.frequency);
    out << YAML::Key << "yaw_mode" << YAML::Value << (sc.reference.yaw_mode == YawMode::Atan2 ? "atan2" : "constant");
    out << YAML::Key << "yaw_rad" << YAML::Value << num(sc.reference.yaw);
    out << YAML::EndMap;

    const EulerAngles e = euler_of_R(sc.initial_state.R);
    out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "position_m" << YAML::Value;
    emitVector(out, sc.initial_state.r);
    out << YAML::Key << "velocity_mps" << YAML::Value;
    emitVector(out, sc.initial_state.v);
    out << YAML::Key << "euler_rad" << YAML::Value;
    emitVector(out, Eigen::Vector3d(e.phi, e.theta, e.psi));
    out << YAML::Key << "body_rates_radps" << YAML::Value;
    emitVector(out, sc.initial_state.omega);
    out << YAML::EndMap;

    out << YAML::Key << "barriers" << YAML::Value << YAML::BeginSeq;
    for (const auto& b : sc.barriers) {
        const BarrierSpec& s = b.spec;
        out << YAML::BeginMap;
        out << YAML::Key << "domain" << YAML::Value << std::string(domainName(s.domain));
        switch (s.domain) {
            case BarrierDomain::AltitudePosition:
                out << YAML::Key << "center_z_m" << YAML::Value << num(s.center(0));
                out << YAML::Key << "p_z_m" << YAML::Value << num(s.half_width(0));
                break;
            case BarrierDomain::AltitudePosVel:
                out << YAML::Key << "center_z_m" << YAML::Value << num(s.center(0));
                out << YAML::Key << "p_z_m" << YAML::Value << num(s.half_width(0));
                out << YAML::Key << "v_z_mps" << YAML::Value << num(s.half_width(1));
                break;
            case BarrierDomain::LateralPosition:
                out << YAML::Key << "center_x_m" << YAML::Value << num(s.center(0));
                out << YAML::Key << "center_y_m" << YAML::Value << num(s.center(1));
                out << YAML::Key << "p_x_m" << YAML::Value << num(s.half_width(0));
                out << YAML::Key << "p_y_m" << YAML::Value << num(s.half_width(1));
                break;
            case BarrierDomain::LateralVelocity:
                out << YAML::Key << "v_x_mps" << YAML::Value << num(s.half_width(0));
                out << YAML::Key << "v_y_mps" << YAML::Value << num(s.half_width(1));
                break;
        }
        out << YAML::Key << "exponent" << YAML::Value << s.exponent;
        out << YAML::Key << "active_from_s" << YAML::Value << num(s.active_from);
        if (!std::isinf(s.active_until)) out << YAML::Key << "active_until_s" << YAML::Value << num(s.active_until);
        if (s.domain == BarrierDomain::AltitudePosVel) {
            out << YAML::Key << "alpha_per_s" << YAML::Value << num(b.gains.alpha);
        } else {
            out << YAML::Key << "poles_per_s" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double p : b.gains.poles) out << num(p);
            out << YAML::EndSeq;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "gains" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kp_per_s2" << YAML::Value;
    emitVector(out, sc.gains.kp);
    out << YAML::Key << "kd_per_s" << YAML::Value;
    emitVector(out, sc.gains.kd);
    out << YAML::Key << "k_R_per_s" << YAML::Value << num(sc.gains.k_R);
    out << YAML::Key << "k_psi_per_s" << YAML::Value << num(sc.gains.k_psi);
    out << YAML::Key << "k_omega_per_s" << YAML::Value;
    emitVector(out, sc.gains.k_omega);
    out << YAML::EndMap;

    out << YAML::Key << "limits" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "r33_min" << YAML::Value << num(sc.limits.r33_min);
    out << YAML::Key << "sin_tilt_max" << YAML::Value << num(sc.limits.sin_tilt_max);
    out << YAML::Key << "thrust_floor_fraction" << YAML::Value << num(sc.limits.thrust_floor_fraction);
    out << YAML::EndMap;

    const QuadParams& q = sc.params;
    out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "g_mps2" << YAML::Value << num(q.g);
    out << YAML::Key << "m_kg" << YAML::Value << num(q.m);
    out << YAML::Key << "Ix_kgm2" << YAML::Value << num(q.Ix);
    out << YAML::Key << "Iy_kgm2" << YAML::Value << num(q.Iy);
    out << YAML::Key << "Iz_kgm2" << YAML::Value << num(q.Iz);
    out << YAML::Key << "f_max_N" << YAML::Value << num(q.f_max);
    out << YAML::Key << "tau_max_Nm" << YAML::Value;
    emitVector(out, q.tau_max);
    out << YAML::Key << "L_m" << YAML::Value << num(q.L);
    out << YAML::Key << "k_f" << YAML::Value << num(q.k_f);
    out << YAML::Key << "k_w" << YAML::Value << num(q.k_w);
    out << YAML::EndMap;

    out << YAML::EndMap;
    return (commented ? std::string(kKeyGuide) : std::string()) + out.c_str() + "\n";
}

Scenario resolve_scenario(const std::string& ref) {
    constexpr std::string_view prefix = "presets:";
    if (ref.rfind(prefix, 0) == 0) return preset(std::string_view(ref).substr(prefix.size()));
    return load_scenario_file(ref);
}

}  // namespace quadsafe
