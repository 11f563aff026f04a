#pragma once

// Rate-level control allocation: maps (T_dot, l_dot, m_dot, n_dot) to the
// thrust-coefficient rates C_T_dot through the Jacobian of the wrench map.

#include <array>
#include <cmath>
#include <limits>

#include "rigid_body.hpp"

namespace vpquad {

/// Dense 4x4 LU factorization with partial pivoting.
class Lu4 {
public:
    explicit Lu4(const Mat4& a) : lu_(a) {
        for (int i = 0; i < 4; ++i) perm_[i] = i;
        for (int k = 0; k < 4; ++k) {
            int piv = k;
            double best = std::abs(lu_(k, k));
            for (int i = k + 1; i < 4; ++i) {
                if (std::abs(lu_(i, k)) > best) {
                    best = std::abs(lu_(i, k));
                    piv = i;
                }
            }
            if (piv != k) {
                lu_.row(k).swap(lu_.row(piv));
                std::swap(perm_[k], perm_[piv]);
            }
            if (lu_(k, k) == 0.0) {
                singular_ = true;
                continue;
            }
            for (int i = k + 1; i < 4; ++i) {
                lu_(i, k) /= lu_(k, k);
                for (int j = k + 1; j < 4; ++j) lu_(i, j) -= lu_(i, k) * lu_(k, j);
            }
        }
    }

    [[nodiscard]] bool singular() const noexcept { return singular_; }

    [[nodiscard]] Vec4 solve(const Vec4& b) const {
        Vec4 y;
        for (int i = 0; i < 4; ++i) {
            double acc = b[perm_[i]];
            for (int j = 0; j < i; ++j) acc -= lu_(i, j) * y[j];
            y[i] = acc;
        }
        Vec4 x;
        for (int i = 3; i >= 0; --i) {
            double acc = y[i];
            for (int j = i + 1; j < 4; ++j) acc -= lu_(i, j) * x[j];
            x[i] = acc / lu_(i, i);
        }
        return x;
    }

    [[nodiscard]] Mat4 inverse() const {
        Mat4 inv;
        for (int j = 0; j < 4; ++j) inv.col(j) = solve(Vec4::Unit(j));
        return inv;
    }

private:
    Mat4 lu_;
    std::array<int, 4> perm_{};
    bool singular_ = false;
};

inline double norm1(const Mat4& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

/// 1-norm condition number, infinite when singular.
inline double condition_number(const Mat4& a) {
    const Lu4 lu(a);
    if (lu.singular()) return std::numeric_limits<double>::infinity();
    return norm1(a) * norm1(lu.inverse());
}

struct AllocationSettings {
    double ct_floor = 1e-4;  // |C_T| floor inside the yaw row
    double cond_max = 1e8;
};

/// Yaw-torque sense of each rotor.
inline const Vec4& yaw_sense() {
    static const Vec4 s(1.0, -1.0, 1.0, -1.0);
    return s;
}

/// Jacobian of the wrench with respect to C_T, with the yaw row's |C_T| floored.
inline Mat4 allocation_matrix(const Vec4& ct, const RotorModel& rotor, const VehicleParams& veh,
                              double ct_floor = 1e-4) {
    const double k = rotor.dimensional_gain();
    const double kd = k * veh.arm;
    const double ky = 1.5 * k * rotor.radius;
    Mat4 b;
    b.row(0) << -k, -k, -k, -k;
    b.row(1) << kd, -kd, -kd, kd;
    b.row(2) << kd, kd, -kd, -kd;
    for (int i = 0; i < 4; ++i) {
        const double a = std::max(std::abs(ct[i]), ct_floor);
        b(3, i) = yaw_sense()[i] * sign_nonneg(ct[i]) * ky * std::sqrt(a / 2.0);
    }
    return b;
}

struct AllocationResult {
    Vec4 rates = Vec4::Zero();  // C_T_dot
    Mat4 matrix = Mat4::Zero(); // matrix actually inverted
    double condition = 0.0;     // of the unregularized matrix
    bool regularized = false;
};

/// Solve B * U = rhs. Rows 1-3 of B are mutually orthogonal and all orthogonal
/// to the yaw pattern (1,-1,1,-1), so det(B) is proportional to the projection
/// of the yaw row on that pattern. When this projection falls below the value
/// it takes with every |C_T| at the floor, or the condition bound is exceeded,
/// the yaw row is shifted along the pattern to restore that projection.
/// Thrust, roll and pitch rows are never modified.
inline AllocationResult allocate(const Vec4& rhs, const Vec4& ct, const RotorModel& rotor,
                                 const VehicleParams& veh, const AllocationSettings& cfg = {}) {
    AllocationResult out;
    out.matrix = allocation_matrix(ct, rotor, veh, cfg.ct_floor);
    out.condition = condition_number(out.matrix);
    const Vec4& v = yaw_sense();
    const double den_floor = 4.0 * 1.5 * rotor.dimensional_gain() * rotor.radius *
                             std::sqrt(cfg.ct_floor / 2.0);
    const double den = out.matrix.row(3).dot(v);
    if (std::abs(den) < den_floor || !(out.condition <= cfg.cond_max)) {
        const double mag = std::max(std::abs(den), den_floor);
        const double target = den >= 0.0 ? mag : -mag;
        out.matrix.row(3) += ((target - den) / v.squaredNorm()) * v.transpose();
        out.regularized = true;
    }
    const Lu4 lu(out.matrix);
    out.rates = lu.solve(rhs);
    return out;
}

}  // namespace vpquad
