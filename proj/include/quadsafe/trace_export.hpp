#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "quadsafe/simulation.hpp"

namespace quadsafe {

// Append-only: new columns go at the end.
inline constexpr std::string_view kTraceHeader =
    "t,x,y,z,phi,theta,psi,vx,vy,vz,p,q,r_rate,f_hat,F_star,taux_hat,tauy_hat,Mx_star,My_star,tauz,"
    "h_alt,h_altvel,h_latpos,h_latvel,qp_hi_status,qp_lo_status";

// Shortest decimal that parses back to the same double.
std::string format_number(double x);

std::string trace_csv(const std::vector<TraceRecord>& records);
std::string events_csv(const std::vector<TraceRecord>& records);
std::string summary_text(const Scenario& scenario, const SimulationResult& result, double wall_time_s);

// Writes trace.csv, events.csv and summary.txt into dir (created if needed).
// Each file is written to a temporary name and renamed into place. Throws
// IoError naming the path.
void export_trace(const Scenario& scenario, const SimulationResult& result, const std::filesystem::path& dir,
                  double wall_time_s);

void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace quadsafe
