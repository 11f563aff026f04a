#pragma once

// CSV telemetry. Column names carry their unit in brackets.

#include <array>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sim_engine.hpp"

namespace vpquad {

inline const std::vector<std::string>& telemetry_columns() {
    static const std::vector<std::string> cols = {
        "t[s]",
        "x[m]", "y[m]", "z[m]", "altitude[m]",
        "phi[rad]", "theta[rad]", "psi[rad]",
        "phi[deg]", "theta[deg]", "psi[deg]",
        "u[m/s]", "v[m/s]", "w[m/s]",
        "p[rad/s]", "q[rad/s]", "r[rad/s]",
        "ct1[-]", "ct2[-]", "ct3[-]", "ct4[-]",
        "theta0_1[rad]", "theta0_2[rad]", "theta0_3[rad]", "theta0_4[rad]",
        "theta0_1[deg]", "theta0_2[deg]", "theta0_3[deg]", "theta0_4[deg]",
        "T_d[N]", "phi_d[rad]", "theta_d[rad]", "psi_d[rad]",
        "phi_d[deg]", "theta_d[deg]", "psi_d[deg]",
        "T[N]", "l[N*m]", "m[N*m]", "n[N*m]",
        "flip[-]", "flag[-]", "sigma_d[-]",
        "clamp[count]", "regularized[-]", "asin_clamp[count]",
    };
    return cols;
}

inline std::vector<double> telemetry_row(const TelemetryFrame& f) {
    constexpr double r2d = 180.0 / std::numbers::pi;
    const State12& s = f.state;
    std::vector<double> row;
    row.reserve(telemetry_columns().size());
    row.push_back(f.t);
    row.insert(row.end(), {s.pos[0], s.pos[1], s.pos[2], -s.pos[2]});
    row.insert(row.end(), {s.euler[0], s.euler[1], s.euler[2]});
    row.insert(row.end(), {s.euler[0] * r2d, s.euler[1] * r2d, s.euler[2] * r2d});
    row.insert(row.end(), {s.vel[0], s.vel[1], s.vel[2]});
    row.insert(row.end(), {s.rates[0], s.rates[1], s.rates[2]});
    for (int i = 0; i < 4; ++i) row.push_back(f.ct[i]);
    for (int i = 0; i < 4; ++i) row.push_back(f.collective[i]);
    for (int i = 0; i < 4; ++i) row.push_back(f.collective[i] * r2d);
    row.insert(row.end(), {f.thrust_d, f.phi_d, f.theta_d, f.psi_d});
    row.insert(row.end(), {f.phi_d * r2d, f.theta_d * r2d, f.psi_d * r2d});
    row.insert(row.end(), {f.wrench.thrust, f.wrench.roll, f.wrench.pitch, f.wrench.yaw});
    row.insert(row.end(), {double(f.flip), double(f.flag), double(f.sigma_d)});
    row.insert(row.end(), {double(f.clamp), double(f.regularized), double(f.asin_clamp)});
    return row;
}

inline void write_telemetry(std::ostream& out, const std::vector<TelemetryFrame>& log) {
    const auto& cols = telemetry_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    std::array<char, 32> buf{};
    for (const auto& f : log) {
        const auto row = telemetry_row(f);
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf.data(), buf.size(), "%.9g", row[i]);
            if (i) out << ',';
            out << buf.data();
        }
        out << '\n';
    }
}

inline void write_telemetry(const std::vector<TelemetryFrame>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open telemetry file '" + path + "': " + std::strerror(errno));
    write_telemetry(out, log);
    out.flush();
    if (!out) throw std::runtime_error("failed writing telemetry file '" + path + "'");
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] int column(const std::string& name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        return -1;
    }
};

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    if (!std::getline(in, line)) return t;
    t.header = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        for (const auto& c : split(line)) row.push_back(std::stod(c));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_csv(in);
}

}  // namespace vpquad
