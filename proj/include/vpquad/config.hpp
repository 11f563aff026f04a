#pragma once

// YAML scenario configuration.
//
// Every section and key is optional; missing values keep their defaults.
// Unknown keys are rejected so typos do not silently fall back to defaults.
// See README.md for the full key list.

#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include <yaml-cpp/yaml.h>

#include "sim_engine.hpp"

namespace vpquad {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int column)
        : std::runtime_error(format(msg, line, column)), line_(line), column_(column) {}
    [[nodiscard]] int line() const noexcept { return line_; }
    [[nodiscard]] int column() const noexcept { return column_; }

private:
    static std::string format(const std::string& msg, int line, int column) {
        if (line <= 0) return msg;
        return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
    }
    int line_;
    int column_;
};

enum class Provenance { Default, Preset, User };

inline const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Default: return "default";
        case Provenance::Preset: return "preset";
        case Provenance::User: return "user";
    }
    return "?";
}

struct Config {
    Scenario scenario;
    std::string output_path = "telemetry.csv";
    std::map<std::string, Provenance> provenance;

    [[nodiscard]] Provenance source(const std::string& key) const {
        auto it = provenance.find(key);
        return it == provenance.end() ? Provenance::Default : it->second;
    }
};

namespace detail {

constexpr double kDeg = std::numbers::pi / 180.0;

inline ParseError error_at(const YAML::Node& n, const std::string& msg) {
    const YAML::Mark m = n.Mark();
    return {msg, m.line + 1, m.column + 1};
}

template <class T>
T scalar_as(const YAML::Node& n, const std::string& key) {
    if (!n.IsScalar()) throw error_at(n, key + ": expected a scalar");
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        throw error_at(n, key + ": cannot convert '" + n.Scalar() + "'");
    }
}

inline Vec3 vec3_as(const YAML::Node& n, const std::string& key) {
    if (n.IsScalar()) return Vec3::Constant(scalar_as<double>(n, key));
    if (!n.IsSequence() || n.size() != 3) throw error_at(n, key + ": expected a scalar or a 3-element list");
    return {scalar_as<double>(n[0], key), scalar_as<double>(n[1], key), scalar_as<double>(n[2], key)};
}

/// Walks one mapping section, dispatching known keys and rejecting others.
class Section {
public:
    using Handler = std::function<void(const YAML::Node&, const std::string&)>;

    Section(Config& cfg, std::string prefix) : cfg_(cfg), prefix_(std::move(prefix)) {}

    Section& on(const std::string& key, Handler h) {
        handlers_.emplace(key, std::move(h));
        cfg_.provenance.try_emplace(prefix_ + key, Provenance::Default);
        return *this;
    }

    void apply(const YAML::Node& node) {
        if (!node || node.IsNull()) return;
        if (!node.IsMap()) throw error_at(node, prefix_ + ": expected a mapping");
        for (const auto& kv : node) {
            const std::string key = kv.first.as<std::string>();
            auto it = handlers_.find(key);
            if (it == handlers_.end()) throw error_at(kv.first, "unknown key '" + prefix_ + key + "'");
            it->second(kv.second, prefix_ + key);
            cfg_.provenance[prefix_ + key] = Provenance::User;
        }
    }

private:
    Config& cfg_;
    std::string prefix_;
    std::map<std::string, Handler> handlers_;
};

inline std::function<void(const YAML::Node&, const std::string&)> num(double& dst) {
    return [&dst](const YAML::Node& n, const std::string& k) { dst = scalar_as<double>(n, k); };
}
inline std::function<void(const YAML::Node&, const std::string&)> deg(double& dst) {
    return [&dst](const YAML::Node& n, const std::string& k) { dst = scalar_as<double>(n, k) * kDeg; };
}
inline std::function<void(const YAML::Node&, const std::string&)> vec(Vec3& dst, double scale = 1.0) {
    return [&dst, scale](const YAML::Node& n, const std::string& k) { dst = vec3_as(n, k) * scale; };
}

}  // namespace detail

/// Parses YAML text into a fully populated, validated Config.
inline Config parse_config(const std::string& text) {
    using namespace detail;
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ParseError(e.msg, e.mark.line + 1, e.mark.column + 1);
    }
    Config cfg;
    const bool empty = !root || root.IsNull();
    if (!empty && !root.IsMap()) throw error_at(root, "top level: expected a mapping");

    // A preset replaces the scenario defaults before any other key applies.
    bool preset = false;
    if (const YAML::Node sc = empty ? YAML::Node() : root["scenario"]; sc && sc.IsMap() && sc["preset"]) {
        const std::string name = scalar_as<std::string>(sc["preset"], "scenario.preset");
        auto p = Scenario::preset(name);
        if (!p) throw error_at(sc["preset"], "scenario.preset: unknown preset '" + name + "'");
        cfg.scenario = *p;
        preset = true;
    }
    Scenario& s = cfg.scenario;

    Section vehicle(cfg, "vehicle.");
    vehicle.on("mass", num(s.vehicle.mass))
        .on("ixx", num(s.vehicle.ixx))
        .on("iyy", num(s.vehicle.iyy))
        .on("izz", num(s.vehicle.izz))
        .on("arm", num(s.vehicle.arm))
        .on("gravity", num(s.vehicle.gravity))
        .on("eps_sing", num(s.vehicle.eps_sing));

    Section rotor(cfg, "rotor.");
    rotor.on("radius", num(s.rotor.radius))
        .on("chord", num(s.rotor.chord))
        .on("blades", [&](const YAML::Node& n, const std::string& k) { s.rotor.blade_count = scalar_as<int>(n, k); })
        .on("lift_slope", num(s.rotor.lift_slope))
        .on("drag_coeff", num(s.rotor.zero_lift_drag))
        .on("omega", num(s.rotor.rot_speed))
        .on("air_density", num(s.rotor.air_density))
        .on("collective_max", num(s.rotor.collective_max));

    Gains& g = s.controller.gains;
    Section gains(cfg, "gains.");
    gains.on("zeta_out", vec(g.zeta_out))
        .on("omega_out", vec(g.wn_out))
        .on("zeta_in", vec(g.zeta_in))
        .on("omega_in", vec(g.wn_in))
        .on("zeta_ca", vec(g.zeta_ca))
        .on("omega_ca", vec(g.wn_ca))
        .on("kp", num(g.kp));

    ControllerConfig& c = s.controller;
    Section controller(cfg, "controller.");
    controller.on("tau_cmd", num(c.tau_cmd))
        .on("tau_rate", num(c.tau_rate))
        .on("phi_tol", num(c.phi_tol))
        .on("thrust_min_frac", num(c.thrust_min_frac))
        .on("tilt_max_deg", deg(c.tilt_max))
        .on("ct_floor", num(c.allocation.ct_floor))
        .on("cond_max", num(c.allocation.cond_max));

    Section initial(cfg, "scenario.initial.");
    initial.on("position", vec(s.initial.pos))
        .on("euler_deg", vec(s.initial.euler, kDeg))
        .on("velocity", vec(s.initial.vel))
        .on("rates", vec(s.initial.rates));

    Section reference(cfg, "scenario.reference.");
    reference
        .on("type",
            [&](const YAML::Node& n, const std::string& k) {
                const std::string t = scalar_as<std::string>(n, k);
                if (t == "hover") s.reference.kind = ReferenceKind::Hover;
                else if (t == "sinusoid") s.reference.kind = ReferenceKind::Sinusoid;
                else throw error_at(n, k + ": expected 'hover' or 'sinusoid'");
            })
        .on("position", vec(s.reference.position))
        .on("amplitude", vec(s.reference.amplitude))
        .on("omega", num(s.reference.omega))
        .on("psi_deg", deg(s.reference.psi));

    Section scenario(cfg, "scenario.");
    scenario.on("preset", [](const YAML::Node&, const std::string&) {})
        .on("name", [&](const YAML::Node& n, const std::string& k) { s.name = scalar_as<std::string>(n, k); })
        .on("duration", num(s.duration))
        .on("dt", num(s.dt))
        .on("flip_time",
            [&](const YAML::Node& n, const std::string& k) {
                if (n.IsNull()) s.flip_time.reset();
                else s.flip_time = scalar_as<double>(n, k);
            })
        .on("initial", [&](const YAML::Node& n, const std::string&) { initial.apply(n); })
        .on("reference", [&](const YAML::Node& n, const std::string&) { reference.apply(n); });

    Section output(cfg, "output.");
    output.on("path", [&](const YAML::Node& n, const std::string& k) { cfg.output_path = scalar_as<std::string>(n, k); })
        .on("decimation", [&](const YAML::Node& n, const std::string& k) { s.decimation = scalar_as<int>(n, k); });

    Section top(cfg, "");
    top.on("vehicle", [&](const YAML::Node& n, const std::string&) { vehicle.apply(n); })
        .on("rotor", [&](const YAML::Node& n, const std::string&) { rotor.apply(n); })
        .on("gains", [&](const YAML::Node& n, const std::string&) { gains.apply(n); })
        .on("controller", [&](const YAML::Node& n, const std::string&) { controller.apply(n); })
        .on("scenario", [&](const YAML::Node& n, const std::string&) { scenario.apply(n); })
        .on("output", [&](const YAML::Node& n, const std::string&) { output.apply(n); });
    if (!empty) top.apply(root);

    // Section names are not leaves.
    for (const char* k : {"vehicle", "rotor", "gains", "controller", "scenario", "output",
                          "scenario.initial", "scenario.reference"})
        cfg.provenance.erase(k);
    if (preset) {
        for (auto& [key, src] : cfg.provenance)
            if (src == Provenance::Default && key.rfind("scenario.", 0) == 0) src = Provenance::Preset;
    }

    cfg.scenario.validate();
    return cfg;
}

inline Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace vpquad
