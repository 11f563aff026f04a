#pragma once

// Acceptance checks for the four reference scenarios and the property suites.

#include <chrono>
#include <complex>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "allocation.hpp"
#include "sim_engine.hpp"
#include "telemetry.hpp"

namespace vpquad {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
};

namespace detail {

inline std::string fmt(const char* f, ...) {
    std::array<char, 512> buf{};
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf.data(), buf.size(), f, ap);
    va_end(ap);
    return buf.data();
}

inline void note(std::string& detail, bool& all, bool ok, const std::string& what) {
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [FAIL]");
    all = all && ok;
}

constexpr double kR2D = 180.0 / std::numbers::pi;

}  // namespace detail

struct HoverTrim {
    double ct = 0.0;
    double collective = 0.0; // rad
    double gain = 0.0;       // K [N]
    double rotor_thrust = 0.0;
    double residual = 0.0;
    double torque_coeff = 0.0;
};

inline HoverTrim hover_trim(const RotorModel& rotor, const VehicleParams& veh) {
    HoverTrim h;
    h.gain = rotor.dimensional_gain();
    h.ct = hover_ct(rotor, veh);
    h.collective = collective_from_ct(h.ct, rotor);
    h.rotor_thrust = dimensionalize(h.ct, 0.0, rotor).thrust;
    h.residual = thrust_equation_residual(ct_from_collective(h.collective, rotor), h.collective, rotor);
    h.torque_coeff = cq_from_ct(h.ct, rotor);
    return h;
}

inline CriterionResult check_trim(const Scenario& base) {
    using namespace detail;
    CriterionResult c{1, "hover trim", true, {}};
    const HoverTrim h = hover_trim(base.rotor, base.vehicle);
    const double quarter = base.vehicle.weight() / 4.0;
    note(c.detail, c.pass, std::abs(h.residual) < 1e-6, fmt("thrust-equation residual %.2e < 1e-6", h.residual));
    note(c.detail, c.pass, std::abs(h.rotor_thrust - quarter) < 1e-9 * quarter,
         fmt("T_i %.4f N = Mg/4 %.4f N", h.rotor_thrust, quarter));
    note(c.detail, c.pass, std::abs(h.collective * kR2D - 12.44) < 0.01,
         fmt("theta0 %.3f deg ~ 12.44", h.collective * kR2D));
    note(c.detail, c.pass, h.collective * kR2D < 16.0, "theta0 < 16 deg");
    return c;
}

inline CriterionResult check_stabilization(const Scenario& sc) {
    using namespace detail;
    CriterionResult c{2, "attitude stabilization", true, {}};
    const auto t0 = std::chrono::steady_clock::now();
    const RunResult r = run_scenario(sc);
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const SummaryMetrics& m = r.summary;
    note(c.detail, c.pass, !r.aborted, r.aborted ? "aborted: " + r.abort_reason : "completed");
    note(c.detail, c.pass, m.settling_time < 1.0, fmt("settling %.3f s < 1.0", m.settling_time));
    note(c.detail, c.pass, m.recovery_time < 1.5, fmt("recovery %.3f s < 1.5", m.recovery_time));
    note(c.detail, c.pass, m.max_collective * kR2D < 16.0,
         fmt("max |theta0| %.2f deg < 16", m.max_collective * kR2D));
    note(c.detail, c.pass, wall < 5.0, fmt("wall %.2f s < 5", wall));
    return c;
}

inline CriterionResult check_tracking(const Scenario& sc) {
    using namespace detail;
    CriterionResult c{3, "trajectory tracking", true, {}};
    const RunResult r = run_scenario(sc);
    note(c.detail, c.pass, !r.aborted, r.aborted ? "aborted: " + r.abort_reason : "completed");
    note(c.detail, c.pass, r.summary.rms_final < 0.05, fmt("RMS final 5 s %.4f m < 0.05", r.summary.rms_final));
    return c;
}

inline CriterionResult check_flip(const Scenario& sc) {
    using namespace detail;
    CriterionResult c{4, "flip maneuver", true, {}};
    const RunResult r = run_scenario(sc);
    const SummaryMetrics& m = r.summary;
    note(c.detail, c.pass, !r.aborted, r.aborted ? "aborted: " + r.abort_reason : "completed");
    const double flip_t = sc.flip_time.value_or(0.0);
    const bool latched = m.latch_time.has_value();
    note(c.detail, c.pass, latched && *m.latch_time - flip_t < 1.5,
         latched ? fmt("latch after %.3f s < 1.5", *m.latch_time - flip_t) : std::string("no latch"));
    const double lat = m.flip_lateral, vert = m.flip_vertical;
    note(c.detail, c.pass, lat >= 0.14 / 3.0 && lat <= 0.14 * 3.0,
         fmt("lateral %.3f m in [%.3f, %.3f]", lat, 0.14 / 3.0, 0.42));
    note(c.detail, c.pass, vert >= 0.07 / 3.0 && vert <= 0.07 * 3.0,
         fmt("vertical %.3f m in [%.3f, %.3f]", vert, 0.07 / 3.0, 0.21));
    note(c.detail, c.pass, m.altitude_drift < 0.1, fmt("altitude drift %.4f m < 0.1", m.altitude_drift));
    note(c.detail, c.pass, (m.final_collective.array() < 0.0).all(),
         fmt("final theta0 [%.2f %.2f %.2f %.2f] deg < 0", m.final_collective[0] * kR2D,
             m.final_collective[1] * kR2D, m.final_collective[2] * kR2D, m.final_collective[3] * kR2D));
    const double spread = m.final_ct.maxCoeff() - m.final_ct.minCoeff();
    note(c.detail, c.pass, spread < 1e-6, fmt("final C_T spread %.1e < 1e-6", spread));
    return c;
}

inline CriterionResult check_inverted(const Scenario& sc) {
    using namespace detail;
    CriterionResult c{5, "inverted tracking", true, {}};
    const RunResult r = run_scenario(sc);
    const SummaryMetrics& m = r.summary;
    note(c.detail, c.pass, !r.aborted, r.aborted ? "aborted: " + r.abort_reason : "completed");
    note(c.detail, c.pass, m.latch_time.has_value(), "flip latched");
    note(c.detail, c.pass, m.rms_final < 0.1, fmt("RMS final 5 s %.4f m < 0.1", m.rms_final));
    note(c.detail, c.pass, (m.final_collective.array() < 0.0).all(),
         fmt("final theta0 [%.2f %.2f %.2f %.2f] deg < 0", m.final_collective[0] * kR2D,
             m.final_collective[1] * kR2D, m.final_collective[2] * kR2D, m.final_collective[3] * kR2D));
    return c;
}

// Property checks. Each returns the worst observed error.

inline double prop_rotor_round_trip(const RotorModel& rotor) {
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double th = -rotor.collective_max + 2.0 * rotor.collective_max * i / 1000.0;
        worst = std::max(worst, std::abs(collective_from_ct(ct_from_collective(th, rotor), rotor) - th));
    }
    return worst;
}

inline double prop_rotor_residual(const RotorModel& rotor) {
    double worst = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double th = -rotor.collective_max + 2.0 * rotor.collective_max * i / 1000.0;
        worst = std::max(worst, std::abs(thrust_equation_residual(ct_from_collective(th, rotor), th, rotor)));
    }
    return worst;
}

inline bool prop_rotor_monotone(const RotorModel& rotor) {
    double prev = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
        const double ct = ct_from_collective(-rotor.collective_max + 2.0 * rotor.collective_max * i / 1000.0, rotor);
        if (!(ct > prev)) return false;
        prev = ct;
    }
    return true;
}

inline double prop_rotation_orthonormal(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> a(-std::numbers::pi, std::numbers::pi);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const Mat3 r = rotation_body_to_inertial(a(rng), a(rng), a(rng));
        worst = std::max(worst, (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(r.determinant() - 1.0));
    }
    return worst;
}

/// Random state and wrench for frame checks.
inline std::pair<State12, Wrench> random_state(std::mt19937_64& rng, const RotorModel& rotor,
                                               const VehicleParams& veh) {
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> pitch(-1.2, 1.2);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    const double cm = ct_limit(rotor);
    State12 s;
    s.pos = Vec3(sym(rng), sym(rng), sym(rng)) * 5.0;
    s.euler = Vec3(ang(rng), pitch(rng), ang(rng));
    s.vel = Vec3(sym(rng), sym(rng), sym(rng)) * 3.0;
    s.rates = Vec3(sym(rng), sym(rng), sym(rng)) * 4.0;
    const Vec4 ct(sym(rng) * cm, sym(rng) * cm, sym(rng) * cm, sym(rng) * cm);
    return {s, wrench_from_cts(ct, rotor, veh)};
}

/// Complex-step derivative of R(eta + t eta_dot) (v + t v_dot) at t = 0.
inline Vec3 complex_step_inertial_rate(const Vec3& eta, const Vec3& eta_dot, const Vec3& v, const Vec3& v_dot) {
    using C = std::complex<double>;
    constexpr double h = 1e-30;
    const C f(eta[0], h * eta_dot[0]), t(eta[1], h * eta_dot[1]), p(eta[2], h * eta_dot[2]);
    const C cf = std::cos(f), sf = std::sin(f), ct = std::cos(t), st = std::sin(t);
    const C cp = std::cos(p), sp = std::sin(p);
    const C r[3][3] = {{ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp},
                       {ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp},
                       {-st, sf * ct, cf * ct}};
    const C vv[3] = {C(v[0], h * v_dot[0]), C(v[1], h * v_dot[1]), C(v[2], h * v_dot[2])};
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = (r[i][0] * vv[0] + r[i][1] * vv[1] + r[i][2] * vv[2]).imag() / h;
    return out;
}

/// Inertial acceleration written in the inertial frame versus d/dt of R(eta) v
/// along the body-frame equations.
inline double prop_frame_equivalence(const RotorModel& rotor, const VehicleParams& veh, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto [s, wr] = random_state(rng, rotor, veh);
        const Vec12 dx = state_derivative(s, wr, veh);
        const Vec3 cs = complex_step_inertial_rate(s.euler, dx.segment<3>(3), s.vel, dx.segment<3>(6));
        worst = std::max(worst, (cs - inertial_acceleration(s, wr, veh)).cwiseAbs().maxCoeff());
    }
    return worst;
}

inline double prop_hover_equilibrium(const RotorModel& rotor, const VehicleParams& veh, bool inverted) {
    State12 s;
    if (inverted) s.euler[0] = std::numbers::pi;
    const double c = hover_ct(rotor, veh) * (inverted ? -1.0 : 1.0);
    const Wrench wr = wrench_from_cts(Vec4::Constant(c), rotor, veh);
    return state_derivative(s, wr, veh).cwiseAbs().maxCoeff();
}

inline double prop_allocation_consistency(const RotorModel& rotor, const VehicleParams& veh, std::uint64_t seed,
                                          int* unregularized = nullptr) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> sym(-1.0, 1.0);
    const double cm = ct_limit(rotor);
    double worst = 0.0;
    int n = 0;
    for (int i = 0; i < 1000; ++i) {
        const Vec4 ct(sym(rng) * cm, sym(rng) * cm, sym(rng) * cm, sym(rng) * cm);
        const Vec4 rhs(sym(rng) * 50.0, sym(rng) * 5.0, sym(rng) * 5.0, sym(rng) * 1.0);
        const AllocationResult a = allocate(rhs, ct, rotor, veh);
        if (a.regularized) continue;
        ++n;
        const Vec4 back = allocation_matrix(ct, rotor, veh) * a.rates;
        worst = std::max(worst, (back - rhs).norm() / rhs.norm());
    }
    if (unregularized) *unregularized = n;
    return worst;
}

/// Ratio of successive step-halving differences on a torque-free spin; 16 for
/// a fourth-order method.
inline double prop_rk4_order(const VehicleParams& veh) {
    auto run = [&](double dt) {
        State12 s;
        s.rates = Vec3(2.0, -1.0, 3.0);
        s.vel = Vec3(0.5, 0.2, -0.3);
        Wrench wr;
        wr.thrust = -veh.weight();
        Vec12 x = s.to_vector();
        const long n = std::lround(1.0 / dt);
        for (long k = 0; k < n; ++k) x = rk4_step(x, wr, veh, dt);
        return x;
    };
    const Vec12 a = run(0.02), b = run(0.01), c = run(0.005);
    return (a - b).norm() / (b - c).norm();
}

struct HalvingResult {
    double worst = 0.0; // max |a-b| / max(1, |a|)
    double worst_abs = 0.0;
};

/// Compare logged states at matched timestamps between dt and dt/2.
inline HalvingResult prop_dt_halving(Scenario sc) {
    sc.decimation = 10;
    Scenario half = sc;
    half.dt = sc.dt / 2.0;
    half.decimation = 20;
    const RunResult a = run_scenario(sc), b = run_scenario(half);
    HalvingResult h;
    const std::size_t n = std::min(a.log.size(), b.log.size());
    for (std::size_t i = 0; i < n; ++i) {
        const Vec12 xa = a.log[i].state.to_vector(), xb = b.log[i].state.to_vector();
        for (int j = 0; j < 12; ++j) {
            const double d = std::abs(xa[j] - xb[j]);
            h.worst_abs = std::max(h.worst_abs, d);
            h.worst = std::max(h.worst, d / std::max(1.0, std::abs(xa[j])));
        }
    }
    if (a.log.size() != b.log.size()) h.worst = std::numeric_limits<double>::infinity();
    return h;
}

inline bool prop_determinism(const Scenario& sc) {
    const RunResult a = run_scenario(sc), b = run_scenario(sc);
    if (a.log.size() != b.log.size()) return false;
    for (std::size_t i = 0; i < a.log.size(); ++i) {
        const auto ra = telemetry_row(a.log[i]), rb = telemetry_row(b.log[i]);
        if (std::memcmp(ra.data(), rb.data(), ra.size() * sizeof(double)) != 0) return false;
    }
    return true;
}

inline CriterionResult check_properties(const std::vector<Scenario>& scenarios) {
    using namespace detail;
    CriterionResult c{6, "property suites", true, {}};
    const Scenario& base = scenarios.front();
    const RotorModel& rotor = base.rotor;
    const VehicleParams& veh = base.vehicle;

    const double rt = prop_rotor_round_trip(rotor);
    note(c.detail, c.pass, rt < 1e-10, fmt("rotor round trip %.1e < 1e-10", rt));
    const double res = prop_rotor_residual(rotor);
    note(c.detail, c.pass, res < 1e-12, fmt("thrust residual %.1e < 1e-12", res));
    note(c.detail, c.pass, prop_rotor_monotone(rotor), "C_T monotone");
    const double orth = prop_rotation_orthonormal(7);
    note(c.detail, c.pass, orth < 1e-14, fmt("rotation orthonormal %.1e < 1e-14", orth));
    const double fe = prop_frame_equivalence(rotor, veh, 11);
    note(c.detail, c.pass, fe < 1e-10, fmt("frame equivalence %.1e < 1e-10", fe));
    const double up = prop_hover_equilibrium(rotor, veh, false);
    const double inv = prop_hover_equilibrium(rotor, veh, true);
    note(c.detail, c.pass, up < 1e-12 && inv < 1e-12, fmt("hover equilibria %.1e / %.1e < 1e-12", up, inv));
    int nreg = 0;
    const double al = prop_allocation_consistency(rotor, veh, 13, &nreg);
    note(c.detail, c.pass, al < 1e-9 && nreg >= 500, fmt("allocation B*U %.1e < 1e-9 (%d cases)", al, nreg));
    const double ord = prop_rk4_order(veh);
    note(c.detail, c.pass, ord > 8.0 && ord < 32.0, fmt("RK4 halving ratio %.1f in [8, 32]", ord));

    std::vector<std::future<HalvingResult>> jobs;
    for (const auto& sc : scenarios)
        jobs.push_back(std::async(std::launch::async, [sc] { return prop_dt_halving(sc); }));
    for (std::size_t i = 0; i < scenarios.size(); ++i) {
        const HalvingResult h = jobs[i].get();
        note(c.detail, c.pass, h.worst < 1e-6,
             fmt("dt halving %s %.2e < 1e-6", scenarios[i].name.c_str(), h.worst));
    }
    note(c.detail, c.pass, prop_determinism(scenarios[1 % scenarios.size()]), "bit-identical rerun");
    return c;
}

/// Default scenario set in criterion order.
inline std::vector<Scenario> reference_scenarios(const Scenario& base) {
    std::vector<Scenario> out;
    for (const char* n : {"stabilization", "tracking", "flip", "inverted"}) {
        Scenario sc = *Scenario::preset(n);
        sc.rotor = base.rotor;
        sc.vehicle = base.vehicle;
        sc.controller = base.controller;
        sc.dt = base.dt;
        out.push_back(sc);
    }
    return out;
}

inline std::vector<CriterionResult> run_acceptance(const Scenario& base = Scenario{}) {
    const auto scs = reference_scenarios(base);
    std::vector<CriterionResult> out(6);
    out[0] = check_trim(base);
    // Stabilization runs alone so its wall-clock figure is not inflated by the others.
    out[1] = check_stabilization(scs[0]);
    auto f3 = std::async(std::launch::async, [&] { return check_tracking(scs[1]); });
    auto f4 = std::async(std::launch::async, [&] { return check_flip(scs[2]); });
    auto f5 = std::async(std::launch::async, [&] { return check_inverted(scs[3]); });
    out[2] = f3.get();
    out[3] = f4.get();
    out[4] = f5.get();
    out[5] = check_properties(scs);
    return out;
}

inline void print_acceptance(std::FILE* out, const std::vector<CriterionResult>& results) {
    for (const auto& r : results)
        std::fprintf(out, "%s  criterion %d  %-24s %s\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                     r.detail.c_str());
}

}  // namespace vpquad
