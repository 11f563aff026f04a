// vpquad: command-line front end for the variable-pitch quadrotor simulator.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vpquad/vpquad.hpp"

namespace {

using nlohmann::json;
using namespace vpquad;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr double kR2D = 180.0 / std::numbers::pi;

struct Common {
    std::string config;
    std::string out;
    std::string scenario;
    std::optional<int> decimation;
    std::optional<double> dt;
    std::optional<double> duration;
};

json vec_json(const Vec4& v) { return json::array({v[0], v[1], v[2], v[3]}); }

json summary_json(const Scenario& sc, const RunResult& r) {
    const SummaryMetrics& m = r.summary;
    auto num = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
    json j;
    j["scenario"] = sc.name;
    j["dt_s"] = sc.dt;
    j["steps"] = m.steps;
    j["aborted"] = r.aborted;
    if (r.aborted) j["abort_reason"] = r.abort_reason;
    j["attitude_settling_time_s"] = num(m.settling_time);
    j["position_recovery_time_s"] = num(m.recovery_time);
    j["max_collective_deg"] = m.max_collective * kR2D;
    j["rms_tracking_error_final_5s_m"] = num(m.rms_final);
    j["flip_latch_time_s"] = m.latch_time ? json(*m.latch_time) : json(nullptr);
    j["flip_lateral_displacement_m"] = num(m.flip_lateral);
    j["flip_vertical_displacement_m"] = num(m.flip_vertical);
    j["flip_lateral_excursion_total_m"] = num(m.flip_lateral_total);
    j["flip_vertical_excursion_total_m"] = num(m.flip_vertical_total);
    j["altitude_drift_m"] = num(m.altitude_drift);
    j["final_ct"] = vec_json(m.final_ct);
    j["final_collective_deg"] = vec_json(m.final_collective * kR2D);
    j["events"] = {{"asin_clamps", m.asin_clamps},
                   {"degenerate_thrust", m.degenerate},
                   {"ct_clamps", m.ct_clamps},
                   {"allocation_regularized", m.regularized}};
    return j;
}

Config load(const Common& c) {
    Config cfg = c.config.empty() ? parse_config("") : load_config(c.config);
    if (!c.scenario.empty()) {
        auto p = Scenario::preset(c.scenario);
        if (!p) throw CLI::ValidationError("--scenario", "unknown scenario '" + c.scenario + "'");
        Scenario sc = *p;
        sc.rotor = cfg.scenario.rotor;
        sc.vehicle = cfg.scenario.vehicle;
        sc.controller = cfg.scenario.controller;
        sc.decimation = cfg.scenario.decimation;
        cfg.scenario = sc;
    }
    if (c.decimation) cfg.scenario.decimation = *c.decimation;
    if (c.dt) cfg.scenario.dt = *c.dt;
    if (c.duration) cfg.scenario.duration = *c.duration;
    if (!c.out.empty()) cfg.output_path = c.out;
    cfg.scenario.validate();
    return cfg;
}

int cmd_trim(const Common& c) {
    const Config cfg = load(c);
    const HoverTrim h = hover_trim(cfg.scenario.rotor, cfg.scenario.vehicle);
    std::printf("K        = %.6f N\n", h.gain);
    std::printf("C_T      = %.9f\n", h.ct);
    std::printf("C_Q      = %.9e\n", h.torque_coeff);
    std::printf("T_i      = %.6f N\n", h.rotor_thrust);
    std::printf("theta0   = %.6f rad (%.4f deg)\n", h.collective, h.collective * kR2D);
    std::printf("residual = %.3e\n", h.residual);
    return kExitOk;
}

int cmd_run(const Common& c) {
    const Config cfg = load(c);
    const RunResult r = run_scenario(cfg.scenario);
    write_telemetry(r.log, cfg.output_path);
    const json j = summary_json(cfg.scenario, r);
    std::ofstream(cfg.output_path + ".summary.json") << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    if (r.aborted) {
        std::cerr << "vpquad: run aborted: " << r.abort_reason << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

int cmd_acceptance(const Common& c) {
    const Config cfg = load(c);
    const auto results = run_acceptance(cfg.scenario);
    print_acceptance(stdout, results);
    bool ok = true;
    for (const auto& r : results) ok = ok && r.pass;
    std::printf("%s\n", ok ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
    return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variable-pitch quadrotor NDI flight simulator"};
    app.require_subcommand(1);
    Common common;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--dt", common.dt, "integration step [s]")->check(CLI::PositiveNumber);
        sub->add_option("--duration", common.duration, "simulated time [s]")->check(CLI::PositiveNumber);
        sub->add_option("--scenario", common.scenario,
                        "built-in scenario: stabilization, tracking, flip, inverted");
    };

    CLI::App* trim = app.add_subcommand("trim", "print hover trim for the configured vehicle");
    trim->add_option("--config", common.config, "YAML scenario configuration");

    CLI::App* run = app.add_subcommand("run", "simulate one scenario and write CSV telemetry");
    std::string run_config_flag;
    run->add_option("config_path", common.config, "YAML scenario configuration");
    run->add_option("--config", run_config_flag, "YAML scenario configuration");
    add_common(run);
    run->add_option("--out", common.out, "telemetry CSV path");
    run->add_option("--decimation", common.decimation, "log every n-th step")->check(CLI::PositiveNumber);

    CLI::App* acc = app.add_subcommand("acceptance", "run the reference scenarios and check the criteria");
    acc->add_option("--config", common.config, "YAML configuration for vehicle, rotor and gains");
    acc->add_option("--dt", common.dt, "integration step [s]")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*trim) return cmd_trim(common);
        if (*run) {
            if (!run_config_flag.empty()) {
                if (!common.config.empty() && common.config != run_config_flag)
                    throw CLI::ValidationError("run", "give the config either positionally or with --config");
                common.config = run_config_flag;
            }
            if (common.config.empty() && common.scenario.empty())
                throw CLI::ValidationError("run", "a config file or --scenario is required");
            return cmd_run(common);
        }
        if (*acc) return cmd_acceptance(common);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "vpquad: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "vpquad: config parse error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        std::cerr << "vpquad: invalid configuration: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "vpquad: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}
