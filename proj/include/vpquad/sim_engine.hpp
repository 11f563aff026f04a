#pragma once

// Fixed-step closed-loop simulation of the variable-pitch quadrotor.

#include <cmath>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ndi_controller.hpp"
#include "rigid_body.hpp"
#include "rotor_aero.hpp"

namespace vpquad {

class NonFinite : public std::runtime_error {
public:
    explicit NonFinite(double t)
        : std::runtime_error("non-finite state at t = " + std::to_string(t)), t_(t) {}
    [[nodiscard]] double time() const noexcept { return t_; }

private:
    double t_;
};

enum class ReferenceKind { Hover, Sinusoid };

struct ReferenceSpec {
    ReferenceKind kind = ReferenceKind::Hover;
    Vec3 position = Vec3::Zero(); // hover setpoint / sinusoid offset [m]
    Vec3 amplitude = Vec3::Ones();// per-axis sinusoid amplitude [m]
    double omega = std::numbers::pi / 2.0; // [rad/s]
    double psi = 0.0;

    [[nodiscard]] ReferencePoint at(double t) const {
        ReferencePoint r;
        r.pos = position;
        r.psi = psi;
        if (kind == ReferenceKind::Sinusoid) {
            const double s = std::sin(omega * t), c = std::cos(omega * t);
            r.pos += amplitude * s;
            r.vel = amplitude * (omega * c);
            r.acc = amplitude * (-omega * omega * s);
        }
        return r;
    }
};

struct Scenario {
    std::string name = "stabilization";
    State12 initial;
    ReferenceSpec reference;
    std::optional<double> flip_time; // sigma_d = -1 from this time on
    double duration = 5.0;
    double dt = 1e-3;
    int decimation = 10;
    RotorModel rotor;
    VehicleParams vehicle;
    ControllerConfig controller;

    void validate() const {
        rotor.validate();
        vehicle.validate();
        controller.validate();
        if (!(dt > 0.0)) throw ValidationError("scenario.dt must be > 0");
        if (!(duration >= dt)) throw ValidationError("scenario.duration must be >= dt");
        if (decimation < 1) throw ValidationError("output.decimation must be >= 1");
        if (!(reference.omega >= 0.0)) throw ValidationError("scenario.reference.omega must be >= 0");
        if (flip_time && !(*flip_time >= 0.0)) throw ValidationError("scenario.flip_time must be >= 0");
    }

    static Scenario stabilization() {
        Scenario sc;
        sc.name = "stabilization";
        const double deg = std::numbers::pi / 180.0;
        sc.initial.euler = Vec3(45.0 * deg, 30.0 * deg, 10.0 * deg);
        sc.duration = 5.0;
        return sc;
    }
    static Scenario tracking() {
        Scenario sc;
        sc.name = "tracking";
        sc.reference.kind = ReferenceKind::Sinusoid;
        sc.duration = 20.0;
        return sc;
    }
    static Scenario flip() {
        Scenario sc;
        sc.name = "flip";
        sc.flip_time = 0.0;
        sc.duration = 5.0;
        return sc;
    }
    static Scenario inverted() {
        Scenario sc;
        sc.name = "inverted";
        sc.reference.kind = ReferenceKind::Sinusoid;
        sc.flip_time = 0.0;
        sc.duration = 20.0;
        return sc;
    }
    static std::optional<Scenario> preset(const std::string& name) {
        if (name == "stabilization") return stabilization();
        if (name == "tracking") return tracking();
        if (name == "flip") return flip();
        if (name == "inverted") return inverted();
        return std::nullopt;
    }
};

struct TelemetryFrame {
    double t = 0.0;
    State12 state;
    Vec4 ct = Vec4::Zero();
    Vec4 collective = Vec4::Zero();
    double thrust_d = 0.0, phi_d = 0.0, theta_d = 0.0, psi_d = 0.0;
    Wrench wrench;
    int flip = 0, flag = -1, sigma_d = 1;
    int clamp = 0;       // saturated rotors this step
    int regularized = 0; // allocation regularization this step
    int asin_clamp = 0;
};

struct SummaryMetrics {
    double settling_time = std::numeric_limits<double>::quiet_NaN();
    double recovery_time = std::numeric_limits<double>::quiet_NaN();
    double max_collective = 0.0; // [rad]
    double rms_final = std::numeric_limits<double>::quiet_NaN();
    std::optional<double> latch_time;
    double flip_lateral = std::numeric_limits<double>::quiet_NaN();  // command -> latch
    double flip_vertical = std::numeric_limits<double>::quiet_NaN();
    double flip_lateral_total = std::numeric_limits<double>::quiet_NaN(); // command -> end
    double flip_vertical_total = std::numeric_limits<double>::quiet_NaN();
    double altitude_drift = std::numeric_limits<double>::quiet_NaN();
    Vec4 final_ct = Vec4::Zero();
    Vec4 final_collective = Vec4::Zero();
    double min_flag_cos_margin = 0.0; // max of flag*cos(phi), must be <= 0
    long asin_clamps = 0, degenerate = 0, ct_clamps = 0, regularized = 0;
    long steps = 0;
};

struct RunResult {
    std::vector<TelemetryFrame> log;
    SummaryMetrics summary;
    bool aborted = false;
    std::string abort_reason;
};

/// Classical RK4 on the plant with the wrench held over the step.
inline Vec12 rk4_step(const Vec12& x, const Wrench& wr, const VehicleParams& veh, double dt) {
    const Vec12 k1 = state_derivative(x, wr, veh);
    const Vec12 k2 = state_derivative(Vec12(x + 0.5 * dt * k1), wr, veh);
    const Vec12 k3 = state_derivative(Vec12(x + 0.5 * dt * k2), wr, veh);
    const Vec12 k4 = state_derivative(Vec12(x + dt * k3), wr, veh);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// One closed-loop step: plant by RK4 under the held wrench, then the
/// controller virtual states by explicit Euler.
inline State12 rk4_step(const State12& s, Controller& ctrl, const ControlOutput& out,
                        const VehicleParams& veh, double dt) {
    const Vec12 x = rk4_step(s.to_vector(), out.alloc.wrench, veh, dt);
    ctrl.commit(out, dt);
    return State12::from_vector(x);
}

namespace detail {

inline TelemetryFrame make_frame(double t, const State12& s, const Controller& ctrl,
                                 const ControlOutput& out, const RotorModel& rotor, int clamps) {
    TelemetryFrame f;
    f.t = t;
    f.state = s;
    f.ct = ctrl.state().ct;
    for (int i = 0; i < 4; ++i) f.collective[i] = collective_from_ct(f.ct[i], rotor);
    f.thrust_d = out.outer.thrust;
    f.phi_d = out.outer.phi;
    f.theta_d = out.outer.theta;
    f.psi_d = out.outer.psi;
    f.wrench = out.alloc.wrench;
    f.flip = ctrl.state().fb.flip;
    f.flag = ctrl.state().fb.flag;
    f.sigma_d = ctrl.state().fb.sigma_d;
    f.clamp = clamps;
    f.regularized = out.alloc.regularized ? 1 : 0;
    f.asin_clamp = out.outer.asin_clamps;
    return f;
}

}  // namespace detail

inline RunResult run_scenario(const Scenario& sc) {
    sc.validate();
    RunResult res;
    SummaryMetrics& m = res.summary;

    Controller ctrl(sc.controller, sc.rotor, sc.vehicle);
    State12 s = sc.initial;
    ctrl.reset(s);

    const long n = std::lround(sc.duration / sc.dt);
    const double dt = sc.dt;
    const double flip_t = sc.flip_time.value_or(std::numeric_limits<double>::infinity());
    const double rms_start = sc.duration - 5.0;

    const Vec3 att0 = s.euler - Vec3(0.0, 0.0, sc.reference.psi);
    const double att_err0 = att0.norm();
    double last_att_out = 0.0, last_pos_out = 0.0;
    bool any_att_out = false, any_pos_out = false;
    double rms_acc = 0.0;
    long rms_n = 0;
    Vec3 flip_origin = Vec3::Zero();
    bool flip_started = false, latched = false;
    double lat_win = 0.0, vert_win = 0.0, lat_all = 0.0, vert_all = 0.0;
    double flag_margin = -std::numeric_limits<double>::infinity();

    auto track_state = [&](double t, const State12& st, const ControllerState& cs) {
        const ReferencePoint ref = sc.reference.at(t);
        const double ec = (st.pos - ref.pos).norm();
        if (!sc.flip_time) {
            const double ea = (st.euler - Vec3(0.0, 0.0, ref.psi)).norm();
            if (ea > 0.05 * att_err0) { last_att_out = t; any_att_out = true; }
        }
        if (ec > 0.05) { last_pos_out = t; any_pos_out = true; }
        if (t > rms_start + 1e-12) { rms_acc += ec * ec; ++rms_n; }
        for (int i = 0; i < 4; ++i)
            m.max_collective = std::max(m.max_collective, std::abs(collective_from_ct(cs.ct[i], sc.rotor)));
        flag_margin = std::max(flag_margin, thrust_flag(st.phi()) * std::cos(st.phi()));
        if (flip_started) {
            const Vec3 d = st.pos - flip_origin;
            const double lat = std::hypot(d[0], d[1]);
            lat_all = std::max(lat_all, lat);
            vert_all = std::max(vert_all, std::abs(d[2]));
            if (!latched) {
                lat_win = std::max(lat_win, lat);
                vert_win = std::max(vert_win, std::abs(d[2]));
            }
        }
    };

    track_state(0.0, s, ctrl.state());
    try {
        for (long k = 0; k < n; ++k) {
            const double t = static_cast<double>(k) * dt;
            if (t >= flip_t - 1e-12 && !flip_started) {
                ctrl.command_orientation(-1);
                flip_started = true;
                flip_origin = s.pos;
            }
            const ControlOutput out = ctrl.compute(s, sc.reference.at(t), dt);
            if (out.latched && !latched) {
                latched = true;
                m.latch_time = t;
            }
            State12 next = State12::from_vector(rk4_step(s.to_vector(), out.alloc.wrench, sc.vehicle, dt));
            if (!next.to_vector().allFinite()) throw NonFinite(t + dt);
            const bool keep = k % sc.decimation == 0;
            if (keep) res.log.push_back(detail::make_frame(t, s, ctrl, out, sc.rotor, 0));
            const int clamps = ctrl.commit(out, dt);
            if (keep) res.log.back().clamp = clamps;
            s = next;
            ++m.steps;
            track_state(t + dt, s, ctrl.state());
        }
    } catch (const SingularAttitude& e) {
        res.aborted = true;
        res.abort_reason = e.what();
    } catch (const NonFinite& e) {
        res.aborted = true;
        res.abort_reason = e.what();
    }

    const double t_end = static_cast<double>(m.steps) * dt;
    m.settling_time = sc.flip_time ? std::numeric_limits<double>::quiet_NaN()
                                   : (any_att_out ? last_att_out : 0.0);
    m.recovery_time = any_pos_out ? last_pos_out : 0.0;
    if (rms_n > 0) m.rms_final = std::sqrt(rms_acc / static_cast<double>(rms_n));
    if (flip_started && latched) {
        m.flip_lateral = lat_win;
        m.flip_vertical = vert_win;
    }
    if (flip_started) {
        m.flip_lateral_total = lat_all;
        m.flip_vertical_total = vert_all;
    }
    m.altitude_drift = std::abs(s.pos[2] - sc.reference.at(t_end).pos[2]);
    m.final_ct = ctrl.state().ct;
    m.final_collective = collectives_from_state(ctrl.state(), sc.rotor);
    m.min_flag_cos_margin = flag_margin;
    m.asin_clamps = ctrl.counters().asin_clamps;
    m.degenerate = ctrl.counters().degenerate;
    m.ct_clamps = ctrl.counters().ct_clamps;
    m.regularized = ctrl.counters().regularized;
    return res;
}

/// Runs independent scenarios concurrently; results keep the input order.
inline std::vector<RunResult> run_scenarios(const std::vector<Scenario>& scenarios) {
    std::vector<std::future<RunResult>> jobs;
    jobs.reserve(scenarios.size());
    for (const auto& sc : scenarios)
        jobs.push_back(std::async(std::launch::async, [sc] { return run_scenario(sc); }));
    std::vector<RunResult> out;
    out.reserve(jobs.size());
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace vpquad
