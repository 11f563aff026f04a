#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vpquad/rotor_aero.hpp"

using namespace vpquad;

namespace {

// Values below were evaluated at 40 digits by an independent script from the
// default rotor and vehicle parameters with rho = 1.225.
constexpr double kSigma = 0.10610329539459689;
constexpr double kGain = 322.86992943693718;
constexpr double kHoverCt = 0.010178557060829935;
constexpr double kHoverTheta = 0.21706304104418330;
constexpr double kHoverCq = 8.5875902836274225e-4;
constexpr double kCq0 = 1.3262911924324611e-4;
constexpr double kCtAt01 = 3.4700553835911790e-3;  // bisection on the thrust equation
constexpr double kCtMax = 0.018888387617901650;

/// Bisection on the implicit thrust equation, independent of the closed form.
double bisect_ct(double theta0, const RotorModel& r) {
    double lo = 0.0, hi = 0.05;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        const double res = m - 0.5 * r.solidity() * r.lift_slope * (theta0 / 3.0 - std::sqrt(m / 2.0) / 2.0);
        (res > 0.0 ? hi : lo) = m;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST(RotorModel, DerivedQuantities) {
    const RotorModel r;
    EXPECT_NEAR(r.solidity(), kSigma, 1e-16);
    EXPECT_NEAR(r.dimensional_gain(), kGain, 1e-10);
    EXPECT_NEAR(r.torque_gain(), kGain * 0.18, 1e-11);
    EXPECT_DOUBLE_EQ(r.disk_area(), std::numbers::pi * 0.18 * 0.18);
    EXPECT_DOUBLE_EQ(r.tip_speed(), 282.7 * 0.18);
    // Recomputation is bitwise stable.
    EXPECT_EQ(r.solidity(), RotorModel{}.solidity());
}

TEST(RotorModel, ValidationNamesField) {
    RotorModel r;
    r.radius = -1.0;
    try {
        r.validate();
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("radius"), std::string::npos);
    }
    RotorModel b;
    b.blade_count = 1;
    EXPECT_THROW(b.validate(), ValidationError);
    EXPECT_NO_THROW(RotorModel{}.validate());
}

TEST(InflowRatio, Examples) {
    EXPECT_EQ(inflow_ratio(0.0), 0.0);
    EXPECT_NEAR(inflow_ratio(0.02), 0.1, 1e-15);
    EXPECT_NEAR(inflow_ratio(0.010178), 0.071337, 1e-6);
    EXPECT_NEAR(inflow_ratio(-0.02), -0.1, 1e-15);
}

TEST(InflowRatio, SquareAndSign) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-0.03, 0.03);
    for (int i = 0; i < 1000; ++i) {
        const double ct = u(rng);
        const double l = inflow_ratio(ct);
        EXPECT_NEAR(l * l, std::abs(ct) / 2.0, 1e-16);
        EXPECT_EQ(std::signbit(l), std::signbit(ct));
    }
}

TEST(CollectiveFromCt, Examples) {
    const RotorModel r;
    EXPECT_EQ(collective_from_ct(0.0, r), 0.0);
    EXPECT_NEAR(collective_from_ct(kHoverCt, r), kHoverTheta, 1e-14);
    EXPECT_NEAR(collective_from_ct(0.010178, r), 0.2171, 1e-4);
    EXPECT_NEAR(collective_from_ct(0.010178, r) * 180.0 / std::numbers::pi, 12.44, 0.01);
    EXPECT_NEAR(collective_from_ct(-0.010178, r), -0.2171, 1e-4);
}

TEST(CtFromCollective, Examples) {
    const RotorModel r;
    EXPECT_EQ(ct_from_collective(0.0, r), 0.0);
    EXPECT_NEAR(ct_from_collective(0.2171, r), 0.010178, 5e-6);
    EXPECT_NEAR(ct_from_collective(0.1, r), kCtAt01, 1e-15);
    EXPECT_LT(std::abs(thrust_equation_residual(ct_from_collective(0.1, r), 0.1, r)), 1e-12);
    EXPECT_NEAR(ct_limit(r), kCtMax, 1e-15);
}

TEST(CtFromCollective, RoundTripAndComposition) {
    const RotorModel r;
    for (int i = 0; i <= 2000; ++i) {
        const double th = -0.35 + 0.7 * i / 2000.0;
        EXPECT_NEAR(collective_from_ct(ct_from_collective(th, r), r), th, 1e-10);
    }
    for (int i = 1; i <= 200; ++i) {
        const double ct = 0.02 * i / 200.0;
        const double back = ct_from_collective(collective_from_ct(ct, r), r);
        EXPECT_NEAR(back, ct, 1e-12 * ct);
    }
}

TEST(CtFromCollective, ResidualMonotoneOdd) {
    const RotorModel r;
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double th = -0.35 + 0.7 * i / 1000.0;
        const double ct = ct_from_collective(th, r);
        EXPECT_LT(std::abs(thrust_equation_residual(ct, th, r)), 1e-12);
        EXPECT_GT(ct, prev);
        prev = ct;
        EXPECT_EQ(ct_from_collective(-th, r), -ct);
    }
}

TEST(CtFromCollective, MatchesBisectionOracle) {
    const RotorModel r;
    for (int i = 0; i < 1000; ++i) {
        const double th = 0.35 * (i + 0.5) / 1000.0;
        EXPECT_NEAR(ct_from_collective(th, r), bisect_ct(th, r), 1e-10);
    }
}

TEST(CqFromCt, Examples) {
    const RotorModel r;
    EXPECT_NEAR(cq_from_ct(0.0, r), kCq0, 1e-18);
    EXPECT_NEAR(cq_from_ct(0.0, r), 1.326e-4, 1e-7);
    EXPECT_NEAR(cq_from_ct(kHoverCt, r), kHoverCq, 1e-17);
    EXPECT_NEAR(cq_from_ct(0.010178, r), 8.59e-4, 1e-6);
    EXPECT_EQ(cq_from_ct(-0.010178, r), cq_from_ct(0.010178, r));
}

TEST(CqFromCt, ProfileFloor) {
    const RotorModel r;
    const double floor = r.solidity() * r.zero_lift_drag / 8.0;
    EXPECT_DOUBLE_EQ(cq_from_ct(0.0, r), floor);
    for (int i = 1; i <= 100; ++i) EXPECT_GT(cq_from_ct(0.0002 * i, r), floor);
}

TEST(Dimensionalize, Examples) {
    const RotorModel r;
    const auto z = dimensionalize(0.0, 0.0, r);
    EXPECT_EQ(z.thrust, 0.0);
    EXPECT_EQ(z.torque, 0.0);
    const auto h = dimensionalize(kHoverCt, kHoverCq, r);
    EXPECT_NEAR(h.thrust, 1.34 * 9.81 / 4.0, 1e-12);
    EXPECT_NEAR(h.thrust, 3.286, 1e-3);
    EXPECT_NEAR(dimensionalize(0.0, 8.59e-4, r).torque, 0.0499, 1e-4);
}

TEST(RotorCommand, Consistency) {
    const RotorModel r;
    const RotorCommand c = rotor_command(-kHoverCt, r);
    EXPECT_NEAR(c.collective, -kHoverTheta, 1e-14);
    EXPECT_LT(c.inflow, 0.0);
    EXPECT_GE(c.torque_coeff, r.solidity() * r.zero_lift_drag / 8.0);
}
