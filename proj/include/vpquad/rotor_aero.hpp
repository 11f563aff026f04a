#pragma once

// Blade-element / momentum-theory rotor model for a constant-speed,
// variable-pitch rotor in hover.
//
// All functions are pure. Negative collective maps to negative thrust
// through odd symmetry of the symmetric-airfoil blade section.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vpquad {

class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline double sign_nonneg(double x) noexcept { return x >= 0.0 ? 1.0 : -1.0; }

struct RotorModel {
    double radius = 0.18;        // R [m]
    double chord = 0.03;         // c [m]
    int blade_count = 2;         // N_b
    double lift_slope = 5.23;    // C_l_alpha [1/rad]
    double zero_lift_drag = 0.01;// C_d0
    double rot_speed = 282.7;    // Omega [rad/s]
    double air_density = 1.225;  // rho [kg/m^3]
    double collective_max = 0.35;// |theta0| travel limit [rad]

    [[nodiscard]] double solidity() const noexcept {
        return blade_count * chord / (std::numbers::pi * radius);
    }
    [[nodiscard]] double disk_area() const noexcept { return std::numbers::pi * radius * radius; }
    [[nodiscard]] double tip_speed() const noexcept { return rot_speed * radius; }
    /// K = rho * A * V_tip^2, thrust per unit C_T [N].
    [[nodiscard]] double dimensional_gain() const noexcept {
        const double vt = tip_speed();
        return air_density * disk_area() * vt * vt;
    }
    /// K * R, torque per unit C_Q [N m].
    [[nodiscard]] double torque_gain() const noexcept { return dimensional_gain() * radius; }

    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw ValidationError(what);
        };
        require(radius > 0.0, "rotor.radius must be > 0");
        require(chord > 0.0, "rotor.chord must be > 0");
        require(blade_count >= 2, "rotor.blades must be >= 2");
        require(lift_slope > 0.0, "rotor.lift_slope must be > 0");
        require(zero_lift_drag >= 0.0, "rotor.drag_coeff must be >= 0");
        require(rot_speed > 0.0, "rotor.omega must be > 0");
        require(air_density > 0.0, "rotor.air_density must be > 0");
        require(collective_max > 0.0 && collective_max < std::numbers::pi / 2,
                "rotor.collective_max must be in (0, pi/2)");
    }
};

/// Hover inflow from momentum theory, sign-extended: lambda = sgn(ct) sqrt(|ct|/2).
inline double inflow_ratio(double ct) noexcept {
    return std::copysign(std::sqrt(std::abs(ct) / 2.0), ct);
}

inline double collective_from_ct(double ct, const RotorModel& rotor) noexcept {
    const double a = std::abs(ct);
    const double theta = 6.0 * a / (rotor.solidity() * rotor.lift_slope) + 1.5 * std::sqrt(a / 2.0);
    return ct < 0.0 ? -theta : theta;
}

/// Inverse of collective_from_ct. With s = sqrt(C_T) the implicit thrust
/// equation is the quadratic s^2 + b s - a theta0 = 0; the positive root is taken.
inline double ct_from_collective(double theta0, const RotorModel& rotor) noexcept {
    const double sc = rotor.solidity() * rotor.lift_slope;
    const double a = sc / 6.0;
    const double b = sc / (4.0 * std::numbers::sqrt2);
    const double t = std::abs(theta0);
    // Rationalized root avoids cancellation for small theta0.
    const double s = 2.0 * a * t / (b + std::sqrt(b * b + 4.0 * a * t));
    const double ct = s * s;
    return theta0 < 0.0 ? -ct : ct;
}

/// Torque coefficient magnitude. The reaction-torque sense is applied at
/// wrench composition.
inline double cq_from_ct(double ct, const RotorModel& rotor) noexcept {
    const double sigma = rotor.solidity();
    const double a = std::abs(ct);
    return 0.5 * sigma * (std::numbers::sqrt2 * a * std::sqrt(a) / sigma + rotor.zero_lift_drag / 4.0);
}

struct RotorLoads {
    double thrust;  // N
    double torque;  // N m
};

inline RotorLoads dimensionalize(double ct, double cq, const RotorModel& rotor) noexcept {
    return {rotor.dimensional_gain() * ct, rotor.torque_gain() * cq};
}

/// Thrust-coefficient limit implied by the collective travel.
inline double ct_limit(const RotorModel& rotor) noexcept {
    return ct_from_collective(rotor.collective_max, rotor);
}

struct RotorCommand {
    double collective;   // theta0 [rad]
    double thrust_coeff; // C_T
    double torque_coeff; // C_Q
    double inflow;       // lambda
};

inline RotorCommand rotor_command(double ct, const RotorModel& rotor) noexcept {
    return {collective_from_ct(ct, rotor), ct, cq_from_ct(ct, rotor), inflow_ratio(ct)};
}

/// Residual of the implicit thrust equation C_T = sigma C_la / 2 (theta0/3 - lambda/2).
inline double thrust_equation_residual(double ct, double theta0, const RotorModel& rotor) noexcept {
    return ct - 0.5 * rotor.solidity() * rotor.lift_slope * (theta0 / 3.0 - inflow_ratio(ct) / 2.0);
}

}  // namespace vpquad
