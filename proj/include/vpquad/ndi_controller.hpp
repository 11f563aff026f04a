#pragma once

// Three-loop nonlinear dynamic inversion autopilot.
//
//  outer:  position error dynamics -> T_d, phi_d, theta_d
//  inner:  attitude error dynamics -> desired body angular acceleration, moments
//  CA:     body-rate error dynamics -> moment rates -> C_T rates (integrated)

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "allocation.hpp"
#include "rigid_body.hpp"
#include "rotor_aero.hpp"

namespace vpquad {

struct Gains {
    Vec3 zeta_out = Vec3::Constant(0.95);
    Vec3 wn_out = Vec3::Constant(4.7);
    Vec3 zeta_in = Vec3::Constant(0.92);
    Vec3 wn_in = Vec3(30.5, 30.5, 20.5);
    Vec3 zeta_ca = Vec3::Constant(0.91);
    Vec3 wn_ca = Vec3(50.0, 50.0, 25.0);
    double kp = 10.0;

    void validate() const {
        auto positive = [](const Vec3& v, const char* name) {
            if (!(v.array() > 0.0).all()) throw ValidationError(std::string("gains.") + name + " must be > 0");
        };
        positive(zeta_out, "zeta_out");
        positive(wn_out, "omega_out");
        positive(zeta_in, "zeta_in");
        positive(wn_in, "omega_in");
        positive(zeta_ca, "zeta_ca");
        positive(wn_ca, "omega_ca");
        if (!(kp > 0.0)) throw ValidationError("gains.kp must be > 0");
    }
};

struct ControllerConfig {
    Gains gains;
    double tau_cmd = 0.02;         // desired Euler-angle derivative filter [s]
    double tau_rate = 0.002;       // desired angular-acceleration derivative filter [s]
    double phi_tol = 0.087;        // flip latch band [rad]
    double thrust_min_frac = 0.05; // |T_d| below this fraction of Mg holds attitude
    double tilt_max = 35.0 * std::numbers::pi / 180.0; // horizontal acceleration cone [rad]
    AllocationSettings allocation;

    void validate() const {
        gains.validate();
        auto require = [](bool ok, const char* what) {
            if (!ok) throw ValidationError(what);
        };
        require(tau_cmd > 0.0, "controller.tau_cmd must be > 0");
        require(tau_rate > 0.0, "controller.tau_rate must be > 0");
        require(phi_tol > 0.0 && phi_tol < std::numbers::pi, "controller.phi_tol must be in (0, pi)");
        require(thrust_min_frac >= 0.0 && thrust_min_frac < 1.0,
                "controller.thrust_min_frac must be in [0, 1)");
        require(tilt_max > 0.0 && tilt_max < std::numbers::pi / 2, "controller.tilt_max_deg must be in (0, 90)");
        require(allocation.ct_floor > 0.0, "controller.ct_floor must be > 0");
        require(allocation.cond_max > 1.0, "controller.cond_max must be > 1");
    }
};

struct FlipBookkeeping {
    int sigma_d = 1; // commanded orientation sign
    int flip = 0;    // flip-completed latch
    int flag = -1;   // -sgn(cos phi)

    /// Maneuvering towards inversion but not yet there.
    [[nodiscard]] bool flip_phase() const noexcept { return sigma_d < 0 && flip == 0; }
    [[nodiscard]] bool inverted_mode() const noexcept { return sigma_d < 0 && flip == 1; }
};

struct ReferencePoint {
    Vec3 pos = Vec3::Zero();
    Vec3 vel = Vec3::Zero();
    Vec3 acc = Vec3::Zero();
    double psi = 0.0;
    double psi_dot = 0.0;
    double psi_ddot = 0.0;
};

struct OuterCommand {
    double thrust = 0.0; // T_d [N], body-z force
    double phi = 0.0;
    double theta = 0.0;
    double psi = 0.0;
    double psi_dot = 0.0;
    double psi_ddot = 0.0;
    double ux = 0.0;
    double uy = 0.0;
    Vec3 acc_cmd = Vec3::Zero();
    int asin_clamps = 0;
    bool degenerate = false;
    bool tilt_limited = false;

    [[nodiscard]] Vec3 euler() const { return {phi, theta, psi}; }
};

struct InnerCommand {
    Vec3 moments = Vec3::Zero();   // l_d, m_d, n_d
    Vec3 omega_dot = Vec3::Zero(); // desired body angular acceleration
    Vec3 omega = Vec3::Zero();     // desired body rates
    Vec3 euler_ddot = Vec3::Zero();// commanded Euler-angle acceleration
};

/// First-order filtered finite difference, D_k = (tau D_{k-1} + y_k - y_{k-1}) / (tau + dt).
/// The first sample after a reset only primes the memory and yields zero.
class DirtyDerivative {
public:
    explicit DirtyDerivative(double tau = 0.02) : tau_(tau) {}

    Vec3 update(const Vec3& y, double dt) {
        if (!primed_) {
            prev_ = y;
            primed_ = true;
            return out_;
        }
        out_ = (tau_ * out_ + (y - prev_)) / (tau_ + dt);
        prev_ = y;
        return out_;
    }
    void reset() {
        primed_ = false;
        prev_.setZero();
        out_.setZero();
    }
    void set_tau(double tau) { tau_ = tau; }
    [[nodiscard]] const Vec3& value() const noexcept { return out_; }
    [[nodiscard]] const Vec3& previous() const noexcept { return prev_; }
    [[nodiscard]] bool primed() const noexcept { return primed_; }
    void restore(const Vec3& prev, const Vec3& out, bool primed) {
        prev_ = prev;
        out_ = out;
        primed_ = primed;
    }

private:
    double tau_;
    Vec3 prev_ = Vec3::Zero();
    Vec3 out_ = Vec3::Zero();
    bool primed_ = false;
};

struct ControllerState {
    Vec4 ct = Vec4::Zero();          // virtual states C_T1..4
    Vec3 omega_d = Vec3::Zero();     // integrated desired body rates
    Vec3 omega_dot_d = Vec3::Zero(); // last desired body angular acceleration
    DirtyDerivative euler_rate_filter;
    DirtyDerivative euler_acc_filter;
    DirtyDerivative omega_jerk_filter;
    FlipBookkeeping fb;
    OuterCommand held;  // last non-degenerate attitude command
    bool have_held = false;

    static constexpr int kPackedSize = 4 + 3 + 3 * 6;

    /// Continuous controller memory as a flat vector (filter prime flags excluded).
    [[nodiscard]] Eigen::VectorXd pack() const {
        Eigen::VectorXd x(kPackedSize);
        x << ct, omega_d, euler_rate_filter.previous(), euler_rate_filter.value(),
            euler_acc_filter.previous(), euler_acc_filter.value(), omega_jerk_filter.previous(),
            omega_jerk_filter.value();
        return x;
    }
    void unpack(const Eigen::VectorXd& x) {
        ct = x.segment<4>(0);
        omega_d = x.segment<3>(4);
        euler_rate_filter.restore(x.segment<3>(7), x.segment<3>(10), euler_rate_filter.primed());
        euler_acc_filter.restore(x.segment<3>(13), x.segment<3>(16), euler_acc_filter.primed());
        omega_jerk_filter.restore(x.segment<3>(19), x.segment<3>(22), omega_jerk_filter.primed());
    }
};

inline double wrap_pi(double a) {
    a = std::remainder(a, 2.0 * std::numbers::pi);
    return a;
}

inline double clamp_unit(double x, int& clamps) {
    if (x > 1.0) { ++clamps; return 1.0; }
    if (x < -1.0) { ++clamps; return -1.0; }
    return x;
}

/// Updates flag from the current roll and latches flip once the commanded
/// inverted attitude is reached. Returns true on the latching call.
inline bool flip_supervisor(const State12& s, FlipBookkeeping& fb, double phi_target, double phi_tol) {
    fb.flag = static_cast<int>(thrust_flag(s.phi()));
    if (fb.sigma_d < 0 && fb.flip == 0 && std::abs(wrap_pi(s.phi() - phi_target)) < phi_tol) {
        fb.flip = 1;
        return true;
    }
    return false;
}

/// Position loop. `held` supplies the attitude to keep when thrust is degenerate.
inline OuterCommand outer_loop(const State12& s, const ReferencePoint& ref, const ControllerConfig& cfg,
                               const FlipBookkeeping& fb, const VehicleParams& veh,
                               const OuterCommand* held = nullptr) {
    const Gains& g = cfg.gains;
    const bool flip_phase = fb.flip_phase();
    Vec3 wn = g.wn_out;
    if (flip_phase) wn.head<2>().setZero();

    const Vec3 vel = rotation_body_to_inertial(s.euler) * s.vel;
    Vec3 a = ref.acc + (2.0 * g.zeta_out.array() * wn.array() * (ref.vel - vel).array()).matrix() +
             (wn.array().square() * (ref.pos - s.pos).array()).matrix();
    if (flip_phase) a.head<2>().setZero();

    OuterCommand oc;
    const double vert = veh.gravity - a[2];
    const double amax = std::abs(vert) * std::tan(cfg.tilt_max);
    const double h = std::hypot(a[0], a[1]);
    if (h > amax) {
        a.head<2>() *= (h > 0.0 ? amax / h : 0.0);
        oc.tilt_limited = true;
    }
    oc.acc_cmd = a;
    oc.psi = ref.psi;
    oc.psi_dot = ref.psi_dot;
    oc.psi_ddot = ref.psi_ddot;
    oc.thrust = veh.mass * fb.flag * std::sqrt(a[0] * a[0] + a[1] * a[1] + vert * vert);

    if (flip_phase) {
        oc.phi = std::numbers::pi;
        oc.theta = 0.0;
        return oc;
    }
    if (std::abs(oc.thrust) < cfg.thrust_min_frac * veh.weight()) {
        oc.degenerate = true;
        if (held != nullptr) {
            oc.phi = held->phi;
            oc.theta = held->theta;
            oc.ux = held->ux;
            oc.uy = held->uy;
        }
        return oc;
    }
    oc.ux = veh.mass * a[0] / oc.thrust;
    oc.uy = veh.mass * a[1] / oc.thrust;
    const double sp = std::sin(oc.psi), cp = std::cos(oc.psi);
    const double as = std::asin(clamp_unit(oc.ux * sp - oc.uy * cp, oc.asin_clamps));
    oc.phi = fb.inverted_mode() ? std::numbers::pi - as : as;
    oc.theta = std::asin(clamp_unit((oc.ux * cp + oc.uy * sp) / std::cos(oc.phi), oc.asin_clamps));
    return oc;
}

/// Attitude loop. Advances the desired Euler-derivative filters held in `cs`.
inline InnerCommand inner_loop(const State12& s, const OuterCommand& oc, const ControllerConfig& cfg,
                               ControllerState& cs, const VehicleParams& veh, double dt) {
    const Gains& g = cfg.gains;
    const Vec3 eta_d = oc.euler();
    Vec3 eta_d_dot = cs.euler_rate_filter.update(eta_d, dt);
    Vec3 eta_d_ddot = cs.euler_acc_filter.update(eta_d_dot, dt);
    if (cs.fb.flip_phase()) {
        eta_d_dot.setZero();
        eta_d_ddot.setZero();
    }
    eta_d_dot[2] = oc.psi_dot;
    eta_d_ddot[2] = oc.psi_ddot;

    const double phi = s.phi(), theta = s.theta();
    const Vec3 eta_dot = euler_rates(s.rates, s.euler, veh.eps_sing);

    InnerCommand ic;
    ic.euler_ddot = eta_d_ddot +
                    (2.0 * g.zeta_in.array() * g.wn_in.array() * (eta_d_dot - eta_dot).array()).matrix() +
                    (g.wn_in.array().square() * (eta_d - s.euler).array()).matrix();
    ic.omega_dot = euler_to_body_matrix(phi, theta) * ic.euler_ddot +
                   euler_to_body_matrix_dot(phi, theta, eta_dot[0], eta_dot[1]) * eta_dot;
    ic.omega = cs.omega_d;

    const double p = s.rates[0], q = s.rates[1], r = s.rates[2];
    ic.moments = {veh.ixx * ic.omega_dot[0] + (veh.izz - veh.iyy) * q * r,
                  veh.iyy * ic.omega_dot[1] + (veh.ixx - veh.izz) * p * r,
                  veh.izz * ic.omega_dot[2] + (veh.iyy - veh.ixx) * p * q};
    return ic;
}

struct AllocationOutput {
    Vec4 rates = Vec4::Zero(); // U = C_T_dot
    Vec4 rhs = Vec4::Zero();   // (T_dot, l_dot, m_dot, n_dot)
    Vec3 omega_ddot = Vec3::Zero();
    Wrench wrench;             // current wrench from cs.ct
    double condition = 0.0;
    bool regularized = false;
};

/// Rate-level allocation loop. Advances the jerk feedforward filter in `cs`.
inline AllocationOutput control_allocation(const State12& s, const InnerCommand& ic, double thrust_d,
                                           ControllerState& cs, const ControllerConfig& cfg,
                                           const RotorModel& rotor, const VehicleParams& veh, double dt) {
    const Gains& g = cfg.gains;
    AllocationOutput out;
    out.wrench = wrench_from_cts(cs.ct, rotor, veh);
    const Vec3& w = s.rates;
    const Vec3 w_dot = angular_acceleration(w, out.wrench, veh);
    const Vec3 w_d_ddot = cs.omega_jerk_filter.update(ic.omega_dot, dt);

    const Vec3 wdd = w_d_ddot +
                     (2.0 * g.zeta_ca.array() * g.wn_ca.array() * (ic.omega_dot - w_dot).array()).matrix() +
                     (g.wn_ca.array().square() * (ic.omega - w).array()).matrix();
    out.omega_ddot = wdd;

    const double p = w[0], q = w[1], r = w[2];
    const double pd = w_dot[0], qd = w_dot[1], rd = w_dot[2];
    out.rhs[0] = g.kp * (thrust_d - out.wrench.thrust);
    out.rhs[1] = veh.ixx * wdd[0] + (veh.izz - veh.iyy) * (qd * r + q * rd);
    out.rhs[2] = veh.iyy * wdd[1] + (veh.ixx - veh.izz) * (pd * r + p * rd);
    out.rhs[3] = veh.izz * wdd[2] + (veh.iyy - veh.ixx) * (pd * q + p * qd);

    const AllocationResult res = allocate(out.rhs, cs.ct, rotor, veh, cfg.allocation);
    out.rates = res.rates;
    out.condition = res.condition;
    out.regularized = res.regularized;
    return out;
}

/// Project an unconstrained C_T update onto |C_T| <= ct_max.
///
/// The increment is split into collective, roll/pitch and yaw patterns.
/// Roll/pitch authority is kept first, then as much yaw as fits, and the
/// collective level is moved last. Returns the number of saturated rotors.
inline int project_thrust_coefficients(Vec4& c, double ct_max) {
    if ((c.array().abs() <= ct_max).all()) return 0;
    int clamps = 0;
    for (int i = 0; i < 4; ++i) clamps += std::abs(c[i]) > ct_max ? 1 : 0;

    static const Vec4 e_roll(1.0, -1.0, -1.0, 1.0);
    static const Vec4 e_pitch(1.0, 1.0, -1.0, -1.0);
    const Vec4& e_yaw = yaw_sense();
    const double mean = c.mean();
    const Vec4 d_lm = (c.dot(e_roll) / 4.0) * e_roll + (c.dot(e_pitch) / 4.0) * e_pitch;
    const Vec4 d_n = (c.dot(e_yaw) / 4.0) * e_yaw;
    auto spread = [](const Vec4& d) { return d.maxCoeff() - d.minCoeff(); };

    const double width = 2.0 * ct_max;
    Vec4 d = d_lm + d_n;
    if (spread(d) > width) {
        if (spread(d_lm) <= width) {
            double lo = 0.0, hi = 1.0;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (spread(d_lm + mid * d_n) <= width) lo = mid; else hi = mid;
            }
            d = d_lm + lo * d_n;
        } else {
            d = d_lm * (width / spread(d_lm));
        }
    }
    const double lo = -ct_max - d.minCoeff();
    const double hi = ct_max - d.maxCoeff();
    const double m = std::clamp(mean, std::min(lo, hi), std::max(lo, hi));
    c = (Vec4::Constant(m) + d).cwiseMax(-ct_max).cwiseMin(ct_max);
    return clamps;
}

/// Explicit Euler step of the virtual states followed by saturation.
inline int integrate_virtual(ControllerState& cs, const Vec4& rates, double dt, double ct_max) {
    Vec4 c = cs.ct + dt * rates;
    const int clamps = project_thrust_coefficients(c, ct_max);
    cs.ct = c;
    return clamps;
}

inline Vec4 collectives_from_state(const ControllerState& cs, const RotorModel& rotor) {
    Vec4 th;
    for (int i = 0; i < 4; ++i) th[i] = collective_from_ct(cs.ct[i], rotor);
    return th;
}

struct ControlOutput {
    OuterCommand outer;
    InnerCommand inner;
    AllocationOutput alloc;
    bool latched = false;
};

/// Stateful autopilot. Usage per step: compute() with the current plant state,
/// propagate the plant with wrench(), then commit() to advance the virtual states.
class Controller {
public:
    Controller(const ControllerConfig& cfg, const RotorModel& rotor, const VehicleParams& veh)
        : cfg_(cfg), rotor_(rotor), veh_(veh), ct_max_(ct_limit(rotor)) {
        cs_.euler_rate_filter.set_tau(cfg.tau_cmd);
        cs_.euler_acc_filter.set_tau(cfg.tau_cmd);
        cs_.omega_jerk_filter.set_tau(cfg.tau_rate);
    }

    /// Trim initialization: every C_T at the hover value with the thrust sign
    /// that opposes gravity in the current attitude.
    void reset(const State12& s0) {
        const double flag = thrust_flag(s0.phi());
        cs_.ct = Vec4::Constant(-flag * hover_ct(rotor_, veh_));
        cs_.omega_d = s0.rates;
        cs_.omega_dot_d.setZero();
        cs_.euler_rate_filter.reset();
        cs_.euler_acc_filter.reset();
        cs_.omega_jerk_filter.reset();
        cs_.fb = FlipBookkeeping{};
        cs_.fb.flag = static_cast<int>(flag);
        cs_.have_held = false;
        reset_counters();
    }

    void command_orientation(int sigma_d) {
        const int sd = sigma_d < 0 ? -1 : 1;
        if (sd != cs_.fb.sigma_d) {
            cs_.fb.sigma_d = sd;
            cs_.fb.flip = 0;
            reset_command_filters();
        }
    }

    ControlOutput compute(const State12& s, const ReferencePoint& ref, double dt) {
        ControlOutput out;
        out.latched = flip_supervisor(s, cs_.fb, std::numbers::pi, cfg_.phi_tol);
        if (out.latched) reset_command_filters();
        out.outer = outer_loop(s, ref, cfg_, cs_.fb, veh_, cs_.have_held ? &cs_.held : nullptr);
        if (!out.outer.degenerate) {
            cs_.held = out.outer;
            cs_.have_held = true;
        } else {
            ++counters_.degenerate;
        }
        counters_.asin_clamps += out.outer.asin_clamps;
        compute_inner(s, out, dt);
        return out;
    }

    /// Inner and allocation loops for a given outer command.
    ControlOutput compute_with_command(const State12& s, const OuterCommand& oc, double dt) {
        ControlOutput out;
        cs_.fb.flag = static_cast<int>(thrust_flag(s.phi()));
        out.outer = oc;
        compute_inner(s, out, dt);
        return out;
    }

    /// Advance virtual states after the plant step.
    int commit(const ControlOutput& out, double dt) {
        const int clamps = integrate_virtual(cs_, out.alloc.rates, dt, ct_max_);
        cs_.omega_d += dt * out.inner.omega_dot;
        cs_.omega_dot_d = out.inner.omega_dot;
        counters_.ct_clamps += clamps;
        if (out.alloc.regularized) ++counters_.regularized;
        return clamps;
    }

    [[nodiscard]] Wrench wrench() const { return wrench_from_cts(cs_.ct, rotor_, veh_); }
    [[nodiscard]] const ControllerState& state() const noexcept { return cs_; }
    ControllerState& mutable_state() noexcept { return cs_; }
    [[nodiscard]] const ControllerConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] double ct_max() const noexcept { return ct_max_; }

    struct Counters {
        long asin_clamps = 0;
        long degenerate = 0;
        long ct_clamps = 0;
        long regularized = 0;
    };
    [[nodiscard]] const Counters& counters() const noexcept { return counters_; }
    void reset_counters() { counters_ = Counters{}; }

private:
    void compute_inner(const State12& s, ControlOutput& out, double dt) {
        out.inner = inner_loop(s, out.outer, cfg_, cs_, veh_, dt);
        out.alloc = control_allocation(s, out.inner, out.outer.thrust, cs_, cfg_, rotor_, veh_, dt);
    }
    void reset_command_filters() {
        cs_.euler_rate_filter.reset();
        cs_.euler_acc_filter.reset();
    }

    ControllerConfig cfg_;
    RotorModel rotor_;
    VehicleParams veh_;
    double ct_max_;
    ControllerState cs_;
    Counters counters_;
};

}  // namespace vpquad
