#pragma once

// 6-DOF Newton-Euler model of the quadrotor airframe.
//
// Frames: inertial z axis points down, Z-Y-X Euler angles. Rotor thrust acts
// along the body z axis. The thrust entry of the wrench is the body-z force,
// so upright hover has T = -Mg and inverted hover (phi = pi) has T = +Mg.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "rotor_aero.hpp"

namespace vpquad {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Vec12 = Eigen::Matrix<double, 12, 1>;

class SingularAttitude : public std::runtime_error {
public:
    explicit SingularAttitude(double theta)
        : std::runtime_error("singular attitude: |cos(theta)| too small at theta = " +
                             std::to_string(theta)),
          theta_(theta) {}
    [[nodiscard]] double theta() const noexcept { return theta_; }

private:
    double theta_;
};

struct VehicleParams {
    double mass = 1.34;    // M [kg]
    double ixx = 1e-3;     // [kg m^2]
    double iyy = 1e-3;
    double izz = 2e-3;     // I_xx + I_yy
    double arm = 0.3;      // d [m]
    double gravity = 9.81; // [m/s^2]
    double eps_sing = 1e-6;

    [[nodiscard]] double weight() const noexcept { return mass * gravity; }

    void validate() const {
        auto require = [](bool ok, const std::string& what) {
            if (!ok) throw ValidationError(what);
        };
        require(mass > 0.0, "vehicle.mass must be > 0");
        require(ixx > 0.0, "vehicle.ixx must be > 0");
        require(iyy > 0.0, "vehicle.iyy must be > 0");
        require(izz > 0.0, "vehicle.izz must be > 0");
        require(arm > 0.0, "vehicle.arm must be > 0");
        require(gravity > 0.0, "vehicle.gravity must be > 0");
        require(eps_sing > 0.0 && eps_sing < 1.0, "vehicle.eps_sing must be in (0, 1)");
    }
};

struct State12 {
    Vec3 pos = Vec3::Zero();  // x, y, z [m], inertial
    Vec3 euler = Vec3::Zero();// phi, theta, psi [rad]
    Vec3 vel = Vec3::Zero();  // u, v, w [m/s], body
    Vec3 rates = Vec3::Zero();// p, q, r [rad/s], body

    [[nodiscard]] Vec12 to_vector() const {
        Vec12 x;
        x << pos, euler, vel, rates;
        return x;
    }
    static State12 from_vector(const Vec12& x) {
        State12 s;
        s.pos = x.segment<3>(0);
        s.euler = x.segment<3>(3);
        s.vel = x.segment<3>(6);
        s.rates = x.segment<3>(9);
        return s;
    }
    [[nodiscard]] double phi() const noexcept { return euler[0]; }
    [[nodiscard]] double theta() const noexcept { return euler[1]; }
    [[nodiscard]] double psi() const noexcept { return euler[2]; }
};

struct Wrench {
    double thrust = 0.0; // body-z force T [N]
    double roll = 0.0;   // l [N m]
    double pitch = 0.0;  // m [N m]
    double yaw = 0.0;    // n [N m]

    [[nodiscard]] Vec4 as_vector() const { return {thrust, roll, pitch, yaw}; }
};

/// R_b^i for Z-Y-X Euler angles.
inline Mat3 rotation_body_to_inertial(double phi, double theta, double psi) {
    const double cf = std::cos(phi), sf = std::sin(phi);
    const double ct = std::cos(theta), st = std::sin(theta);
    const double cp = std::cos(psi), sp = std::sin(psi);
    Mat3 r;
    r << ct * cp, sf * st * cp - cf * sp, cf * st * cp + sf * sp,
         ct * sp, sf * st * sp + cf * cp, cf * st * sp - sf * cp,
         -st,     sf * ct,                cf * ct;
    return r;
}

inline Mat3 rotation_body_to_inertial(const Vec3& euler) {
    return rotation_body_to_inertial(euler[0], euler[1], euler[2]);
}

inline Vec3 euler_rates(double p, double q, double r, double phi, double theta,
                        double eps_sing = 1e-6) {
    const double ct = std::cos(theta);
    if (std::abs(ct) <= eps_sing) throw SingularAttitude(theta);
    const double sf = std::sin(phi), cf = std::cos(phi);
    const double qr = q * sf + r * cf;
    return {p + std::tan(theta) * qr, q * cf - r * sf, qr / ct};
}

inline Vec3 euler_rates(const Vec3& pqr, const Vec3& euler, double eps_sing = 1e-6) {
    return euler_rates(pqr[0], pqr[1], pqr[2], euler[0], euler[1], eps_sing);
}

/// W(phi, theta): body rates = W * Euler rates.
inline Mat3 euler_to_body_matrix(double phi, double theta) {
    const double sf = std::sin(phi), cf = std::cos(phi);
    const double st = std::sin(theta), ct = std::cos(theta);
    Mat3 w;
    w << 1.0, 0.0, -st,
         0.0, cf, sf * ct,
         0.0, -sf, cf * ct;
    return w;
}

/// dW/dt along (phi_dot, theta_dot).
inline Mat3 euler_to_body_matrix_dot(double phi, double theta, double phi_dot, double theta_dot) {
    const double sf = std::sin(phi), cf = std::cos(phi);
    const double st = std::sin(theta), ct = std::cos(theta);
    Mat3 w;
    w << 0.0, 0.0, -ct * theta_dot,
         0.0, -sf * phi_dot, cf * ct * phi_dot - sf * st * theta_dot,
         0.0, -cf * phi_dot, -sf * ct * phi_dot - cf * st * theta_dot;
    return w;
}

inline Vec3 body_rates_from_euler(const Vec3& euler_dot, double phi, double theta) {
    return euler_to_body_matrix(phi, theta) * euler_dot;
}

/// flag = -sgn(cos phi) with sgn(0) = +1.
inline double thrust_flag(double phi) noexcept { return -sign_nonneg(std::cos(phi)); }

/// Rotor layout: 1 and 3 spin so that their reaction torque is +z body,
/// 2 and 4 give -z. Rotors 1,4 sit on +y roll arm side, 1,2 on +x pitch side.
inline Wrench wrench_from_cts(const Vec4& ct, const RotorModel& rotor, const VehicleParams& veh) {
    const double k = rotor.dimensional_gain();
    const double kd = k * veh.arm;
    const double kn = k * rotor.radius / std::numbers::sqrt2;
    auto p15 = [](double c) { const double a = std::abs(c); return a * std::sqrt(a); };
    Wrench w;
    w.thrust = -k * ct.sum();
    w.roll = kd * (ct[0] - ct[1] - ct[2] + ct[3]);
    w.pitch = kd * (ct[0] + ct[1] - ct[2] - ct[3]);
    w.yaw = kn * (p15(ct[0]) - p15(ct[1]) + p15(ct[2]) - p15(ct[3]));
    return w;
}

/// Body angular acceleration from Euler's rotational equations.
inline Vec3 angular_acceleration(const Vec3& pqr, const Wrench& wr, const VehicleParams& veh) {
    const double p = pqr[0], q = pqr[1], r = pqr[2];
    return {((veh.iyy - veh.izz) * q * r + wr.roll) / veh.ixx,
            ((veh.izz - veh.ixx) * p * r + wr.pitch) / veh.iyy,
            ((veh.ixx - veh.iyy) * p * q + wr.yaw) / veh.izz};
}

/// Body-frame translational acceleration (u_dot, v_dot, w_dot).
inline Vec3 body_acceleration(const State12& s, const Wrench& wr, const VehicleParams& veh) {
    const double u = s.vel[0], v = s.vel[1], w = s.vel[2];
    const double p = s.rates[0], q = s.rates[1], r = s.rates[2];
    const double g = veh.gravity;
    const double sf = std::sin(s.phi()), cf = std::cos(s.phi());
    const double st = std::sin(s.theta()), ct = std::cos(s.theta());
    return {-g * st + r * v - q * w,
            g * sf * ct + p * w - u * r,
            wr.thrust / veh.mass + g * cf * ct + q * u - p * v};
}

/// Inertial acceleration written directly in the inertial frame.
inline Vec3 inertial_acceleration(const State12& s, const Wrench& wr, const VehicleParams& veh) {
    const Mat3 r = rotation_body_to_inertial(s.euler);
    return r.col(2) * (wr.thrust / veh.mass) + Vec3(0.0, 0.0, veh.gravity);
}

inline Vec12 state_derivative(const State12& s, const Wrench& wr, const VehicleParams& veh) {
    Vec12 dx;
    dx.segment<3>(0) = rotation_body_to_inertial(s.euler) * s.vel;
    dx.segment<3>(3) = euler_rates(s.rates, s.euler, veh.eps_sing);
    dx.segment<3>(6) = body_acceleration(s, wr, veh);
    dx.segment<3>(9) = angular_acceleration(s.rates, wr, veh);
    return dx;
}

inline Vec12 state_derivative(const Vec12& x, const Wrench& wr, const VehicleParams& veh) {
    return state_derivative(State12::from_vector(x), wr, veh);
}

/// Per-rotor hover thrust coefficient Mg/(4K).
inline double hover_ct(const RotorModel& rotor, const VehicleParams& veh) noexcept {
    return veh.weight() / (4.0 * rotor.dimensional_gain());
}

}  // namespace vpquad
