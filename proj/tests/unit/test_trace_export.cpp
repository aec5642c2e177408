#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "quadsafe/errors.hpp"
#include "quadsafe/scenario_io.hpp"
#include "quadsafe/trace_export.hpp"

using namespace quadsafe;

namespace {

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("quadsafe_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

Scenario shortRun(const std::string& name, int steps) {
    Scenario sc = preset(name);
    sc.duration = steps * sc.dt;
    return sc;
}

}  // namespace

TEST(TraceCsv, HeaderIsGolden) {
    EXPECT_EQ(std::string(kTraceHeader),
              "t,x,y,z,phi,theta,psi,vx,vy,vz,p,q,r_rate,f_hat,F_star,taux_hat,tauy_hat,Mx_star,My_star,tauz,"
              "h_alt,h_altvel,h_latpos,h_latvel,qp_hi_status,qp_lo_status");
}

TEST(TraceCsv, ThreeStepsGiveFourLines) {
    const Scenario sc = shortRun("fig7-unified", 3);
    const SimulationResult res = run(sc);
    const auto dir = scratch("three");
    export_trace(sc, res, dir, 0.0);
    const auto l = lines(slurp(dir / "trace.csv"));
    ASSERT_EQ(l.size(), 4u);
    EXPECT_EQ(l[0], kTraceHeader);
    for (std::size_t i = 1; i < l.size(); ++i) EXPECT_EQ(fields(l[i]).size(), 26u);
    EXPECT_TRUE(std::filesystem::exists(dir / "events.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "summary.txt"));
    EXPECT_FALSE(std::filesystem::exists(dir / "trace.csv.tmp"));
}

TEST(TraceCsv, AbsentBarriersLeaveEmptyColumns) {
    const SimulationResult res = run(shortRun("fig5-lateral-pos", 2));
    const auto l = lines(trace_csv(res.records));
    EXPECT_EQ(l[0], kTraceHeader);
    const auto f = fields(l[1]);
    ASSERT_EQ(f.size(), 26u);
    EXPECT_EQ(f[20], "");
    EXPECT_EQ(f[21], "");
    EXPECT_EQ(f[22], "1");
    EXPECT_EQ(f[23], "");
    EXPECT_EQ(f[24], "off");
    EXPECT_EQ(f[25], "optimal");
}

TEST(TraceCsv, NumbersRoundTripExactly) {
    const SimulationResult res = run(shortRun("fig7-unified", 50));
    const auto l = lines(trace_csv(res.records));
    const auto f = fields(l.back());
    const TraceRecord& r = res.records.back();
    EXPECT_EQ(std::stod(f[0]), r.t);
    EXPECT_EQ(std::stod(f[1]), r.state.r.x());
    EXPECT_EQ(std::stod(f[9]), r.state.v.z());
    EXPECT_EQ(std::stod(f[14]), r.F_star);
    EXPECT_EQ(std::stod(f[23]), r.barrier(BarrierDomain::LateralVelocity)->h);
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(1e-300), "1e-300");
}

TEST(TraceCsv, RerunsAreByteIdentical) {
    const Scenario sc = shortRun("fig7-unified", 2000);
    const auto a = scratch("rerun_a");
    const auto b = scratch("rerun_b");
    export_trace(sc, run(sc), a, 0.0);
    export_trace(sc, run(sc), b, 0.0);
    EXPECT_EQ(slurp(a / "trace.csv"), slurp(b / "trace.csv"));
    EXPECT_EQ(slurp(a / "events.csv"), slurp(b / "events.csv"));
}

TEST(EventsCsv, DetailsAreQuoted) {
    std::vector<TraceRecord> recs(1);
    recs[0].events.push_back({EventType::Infeasible, "a,b \"c\""});
    const auto l = lines(events_csv(recs));
    ASSERT_EQ(l.size(), 2u);
    EXPECT_EQ(l[0], "t,event_type,detail");
    EXPECT_EQ(l[1], "0,infeasible,\"a,b \"\"c\"\"\"");
}

TEST(Summary, ReportsPerBarrierFigures) {
    const Scenario sc = shortRun("fig4-altitude", 100);
    const std::string s = summary_text(sc, run(sc), 0.25);
    EXPECT_NE(s.find("barrier altitude_position: min_h="), std::string::npos) << s;
    EXPECT_NE(s.find("violation_duration_s="), std::string::npos);
    EXPECT_NE(s.find("barrier lateral_position: absent"), std::string::npos);
    EXPECT_NE(s.find("infeasible_steps: 0"), std::string::npos);
    EXPECT_NE(s.find("wall_time_s: 0.25"), std::string::npos);
}

TEST(Export, UnwritableDirectoryIsAnIoErrorNamingThePath) {
    const auto file = scratch("blocker");
    std::ofstream(file) << "x";
    const Scenario sc = shortRun("fig4-altitude", 2);
    try {
        export_trace(sc, run(sc), file / "sub", 0.0);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find(file.string()), std::string::npos) << e.what();
    }
    std::filesystem::remove(file);
}

TEST(Export, EmptyTraceIsRejected) {
    EXPECT_THROW(export_trace(Scenario{}, SimulationResult{}, scratch("empty"), 0.0), InvalidArgument);
}
