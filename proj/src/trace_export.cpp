#include "quadsafe/trace_export.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "quadsafe/errors.hpp"

namespace quadsafe {

namespace {

void field(std::string& line, double x) {
    line += ',';
    line += format_number(x);
}

std::string csvQuote(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

std::string trace_csv(const std::vector<TraceRecord>& records) {
    std::string out(kTraceHeader);
    out += '\n';
    std::string line;
    for (const auto& r : records) {
        line = format_number(r.t);
        for (int i = 0; i < 3; ++i) field(line, r.state.r(i));
        field(line, r.euler.phi);
        field(line, r.euler.theta);
        field(line, r.euler.psi);
        for (int i = 0; i < 3; ++i) field(line, r.state.v(i));
        for (int i = 0; i < 3; ++i) field(line, r.state.omega(i));
        field(line, r.nominal.f_hat);
        field(line, r.F_star);
        field(line, r.nominal.tau_hat.x());
        field(line, r.nominal.tau_hat.y());
        field(line, r.M_star.x());
        field(line, r.M_star.y());
        field(line, r.tau_z);
        for (BarrierDomain d : kAllDomains) {
            line += ',';
            if (const auto& b = r.barrier(d)) line += format_number(b->h);
        }
        line += ',';
        line += statusName(r.qp_hi);
        line += ',';
        line += statusName(r.qp_lo);
        line += '\n';
        out += line;
    }
    return out;
}

std::string events_csv(const std::vector<TraceRecord>& records) {
    std::string out = "t,event_type,detail\n";
    for (const auto& r : records) {
        for (const auto& e : r.events) {
            out += format_number(r.t) + "," + std::string(eventName(e.type)) + "," + csvQuote(e.detail) + "\n";
        }
    }
    return out;
}

std::string summary_text(const Scenario& sc, const SimulationResult& result, double wall_time_s) {
    const TraceSummary s = summarize(result.records, sc.dt);
    std::ostringstream out;
    out << "scenario: " << sc.name << "\n";
    out << "steps: " << s.steps << "\n";
    out << "dt_s: " << format_number(sc.dt) << "\n";
    out << "status: " << (result.aborted ? "aborted (" + result.abort_message + ")" : std::string("completed")) << "\n";
    out << "infeasible_steps: " << s.infeasible_steps << "\n";
    out << "singular_steps: " << s.singular_steps << "\n";
    out << "post_qp_clamps: " << s.clamp_events << "\n";
    out << "violation_slack: " << format_number(kInvarianceSlack) << "\n";
    for (BarrierDomain d : kAllDomains) {
        const BarrierStats& b = s.barriers[static_cast<std::size_t>(d)];
        out << "barrier " << domainName(d) << ": ";
        if (!b.present) {
            out << "absent\n";
            continue;
        }
        out << "min_h=" << format_number(b.min_h);
        if (b.first_entry_t) {
            out << " entry_t=" << format_number(*b.first_entry_t)
                << " min_h_after_entry=" << format_number(b.min_h_after_entry);
        } else {
            out << " entry_t=never";
        }
        out << " violation_duration_s=" << format_number(b.violation_duration) << "\n";
    }
    out << "wall_time_s: " << format_number(wall_time_s) << "\n";
    return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
        f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        f.close();
        if (!f) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename " + tmp.string() + " to " + path.string());
    }
}

void export_trace(const Scenario& sc, const SimulationResult& result, const std::filesystem::path& dir,
                  double wall_time_s) {
    if (result.records.empty()) throw InvalidArgument("export_trace needs a non-empty trace");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
    write_file_atomic(dir / "trace.csv", trace_csv(result.records));
    write_file_atomic(dir / "events.csv", events_csv(result.records));
    write_file_atomic(dir / "summary.txt", summary_text(sc, result, wall_time_s));
}

}  // namespace quadsafe
