#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

#include "vpquad/config.hpp"
#include "vpquad/telemetry.hpp"

using namespace vpquad;

TEST(Config, EmptyDocumentGivesDefaults) {
    const Config c = parse_config("");
    EXPECT_EQ(c.scenario.vehicle.mass, 1.34);
    EXPECT_EQ(c.scenario.rotor.radius, 0.18);
    EXPECT_EQ(c.scenario.dt, 1e-3);
    EXPECT_EQ(c.output_path, "telemetry.csv");
    EXPECT_EQ(c.source("vehicle.mass"), Provenance::Default);
}

TEST(Config, OverrideAndProvenance) {
    const Config c = parse_config("vehicle:\n  mass: 2.0\n");
    EXPECT_EQ(c.scenario.vehicle.mass, 2.0);
    EXPECT_EQ(c.scenario.vehicle.ixx, 1e-3);
    EXPECT_EQ(c.source("vehicle.mass"), Provenance::User);
    EXPECT_EQ(c.source("vehicle.ixx"), Provenance::Default);
}

TEST(Config, PresetThenOverride) {
    const Config c = parse_config(
        "scenario:\n"
        "  preset: inverted\n"
        "  duration: 3\n"
        "  reference:\n"
        "    amplitude: [0.5, 0.5, 0.2]\n");
    EXPECT_EQ(c.scenario.name, "inverted");
    ASSERT_TRUE(c.scenario.flip_time);
    EXPECT_EQ(c.scenario.duration, 3.0);
    EXPECT_EQ(c.scenario.reference.kind, ReferenceKind::Sinusoid);
    EXPECT_EQ(c.scenario.reference.amplitude, Vec3(0.5, 0.5, 0.2));
    EXPECT_EQ(c.source("scenario.duration"), Provenance::User);
}

TEST(Config, ScalarGainBroadcasts) {
    const Config c = parse_config("gains:\n  omega_in: 25\n  zeta_out: [0.9, 0.8, 0.7]\n");
    EXPECT_EQ(c.scenario.controller.gains.wn_in, Vec3::Constant(25.0));
    EXPECT_EQ(c.scenario.controller.gains.zeta_out, Vec3(0.9, 0.8, 0.7));
}

TEST(Config, DegreeKeys) {
    const Config c = parse_config("scenario:\n  initial:\n    euler_deg: [45, 30, 10]\n");
    EXPECT_NEAR(c.scenario.initial.euler[0], std::numbers::pi / 4, 1e-15);
}

TEST(Config, NegativeRadiusNamesField) {
    try {
        parse_config("rotor:\n  radius: -0.1\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("radius"), std::string::npos);
    }
}

TEST(Config, UnknownKeyReportsPosition) {
    try {
        parse_config("vehicle:\n  mass: 1.0\n  masss: 2.0\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_EQ(e.column(), 3);
        EXPECT_NE(std::string(e.what()).find("masss"), std::string::npos);
    }
}

TEST(Config, MalformedYamlReportsPosition) {
    try {
        parse_config("vehicle:\n  mass: [1, 2\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_GT(e.line(), 0);
    }
}

TEST(Config, WrongTypeIsParseError) {
    EXPECT_THROW(parse_config("vehicle:\n  mass: heavy\n"), ParseError);
    EXPECT_THROW(parse_config("scenario:\n  reference:\n    type: circle\n"), ParseError);
    EXPECT_THROW(parse_config("scenario:\n  preset: loop\n"), ParseError);
    EXPECT_THROW(parse_config("- 1\n- 2\n"), ParseError);
}

TEST(Config, FlipTimeNull) {
    const Config c = parse_config("scenario:\n  preset: flip\n  flip_time: null\n");
    EXPECT_FALSE(c.scenario.flip_time);
}

TEST(Telemetry, GoldenHeader) {
    std::ostringstream os;
    write_telemetry(os, {});
    EXPECT_EQ(os.str(),
              "t[s],x[m],y[m],z[m],altitude[m],phi[rad],theta[rad],psi[rad],phi[deg],theta[deg],psi[deg],"
              "u[m/s],v[m/s],w[m/s],p[rad/s],q[rad/s],r[rad/s],ct1[-],ct2[-],ct3[-],ct4[-],"
              "theta0_1[rad],theta0_2[rad],theta0_3[rad],theta0_4[rad],"
              "theta0_1[deg],theta0_2[deg],theta0_3[deg],theta0_4[deg],"
              "T_d[N],phi_d[rad],theta_d[rad],psi_d[rad],phi_d[deg],theta_d[deg],psi_d[deg],"
              "T[N],l[N*m],m[N*m],n[N*m],flip[-],flag[-],sigma_d[-],"
              "clamp[count],regularized[-],asin_clamp[count]\n");
}

TEST(Telemetry, RowsAndRoundTrip) {
    TelemetryFrame a, b;
    a.t = 0.0;
    b.t = 0.01;
    b.state.pos = Vec3(0.123456789012, -2.5, -1.0);
    b.state.euler = Vec3(0.5, -0.25, 3.0);
    b.ct = Vec4(0.0101785570608, -0.003, 0.0188883876179, 1e-7);
    b.wrench.thrust = -13.1454;
    b.flag = 1;
    b.flip = 1;
    b.sigma_d = -1;
    std::stringstream ss;
    write_telemetry(ss, {a, b});
    const std::string text = ss.str();
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
    const CsvTable t = read_csv(ss);
    ASSERT_EQ(t.rows.size(), 2u);
    ASSERT_EQ(t.header, telemetry_columns());
    const auto ref = telemetry_row(b);
    for (std::size_t i = 0; i < ref.size(); ++i)
        EXPECT_NEAR(t.rows[1][i], ref[i], 1e-8 * std::max(1.0, std::abs(ref[i]))) << t.header[i];
    EXPECT_EQ(t.rows[1][t.column("altitude[m]")], 1.0);
    EXPECT_NEAR(t.rows[1][t.column("phi[deg]")], 0.5 * 180 / std::numbers::pi, 1e-6);
    EXPECT_EQ(t.rows[1][t.column("flag[-]")], 1.0);
}

TEST(Telemetry, UnwritablePathThrows) {
    EXPECT_THROW(write_telemetry({}, "/nonexistent-dir/x.csv"), std::runtime_error);
}

TEST(Telemetry, FileRoundTrip) {
    const auto p = std::filesystem::temp_directory_path() / "vpquad_telemetry_test.csv";
    TelemetryFrame f;
    f.t = 1.5;
    write_telemetry({f, f}, p.string());
    const CsvTable t = read_csv(p.string());
    EXPECT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0][0], 1.5);
    std::filesystem::remove(p);
}
