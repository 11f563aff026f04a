#include <gtest/gtest.h>

#include <random>

#include "vpquad/acceptance.hpp"
#include "vpquad/allocation.hpp"

using namespace vpquad;

namespace {
const RotorModel kRotor;
const VehicleParams kVeh;
}  // namespace

TEST(Lu4, SolvesAgainstEigen) {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        Mat4 a;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) a(r, c) = n(rng);
        const Vec4 b(n(rng), n(rng), n(rng), n(rng));
        const Vec4 x = Lu4(a).solve(b);
        const Vec4 ref = a.fullPivLu().solve(b);
        EXPECT_LT((x - ref).norm(), 1e-9 * (1.0 + ref.norm()));
    }
}

TEST(Lu4, PivotsOnZeroDiagonal) {
    Mat4 p;
    p << 0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0;
    const Vec4 x = Lu4(p).solve(Vec4(1, 2, 3, 4));
    EXPECT_TRUE(x.isApprox(Vec4(2, 1, 4, 3)));
}

TEST(Lu4, ConditionNumber) {
    EXPECT_DOUBLE_EQ(condition_number(Mat4::Identity()), 1.0);
    const Mat4 d = Vec4(1, 2, 4, 1e-9).asDiagonal();
    EXPECT_NEAR(condition_number(d), 4e9, 1.0);
    EXPECT_TRUE(std::isinf(condition_number(Mat4::Zero())));
}

TEST(AllocationMatrix, IsWrenchJacobian) {
    std::mt19937_64 rng(37);
    const double cm = ct_limit(kRotor);
    std::uniform_real_distribution<double> u(0.1 * cm, cm), sgn(-1, 1);
    for (int i = 0; i < 200; ++i) {
        Vec4 c;
        for (int k = 0; k < 4; ++k) c[k] = u(rng) * (sgn(rng) < 0 ? -1 : 1);
        const Mat4 b = allocation_matrix(c, kRotor, kVeh);
        for (int j = 0; j < 4; ++j) {
            const double h = 1e-7;
            Vec4 cp = c, cn = c;
            cp[j] += h;
            cn[j] -= h;
            const Vec4 col = (wrench_from_cts(cp, kRotor, kVeh).as_vector() - wrench_from_cts(cn, kRotor, kVeh).as_vector()) / (2 * h);
            EXPECT_LT((col - b.col(j)).cwiseAbs().maxCoeff(), 1e-5 * (1.0 + b.col(j).cwiseAbs().maxCoeff()));
        }
    }
}

TEST(Allocate, HoverZeroDemand) {
    const Vec4 c = Vec4::Constant(hover_ct(kRotor, kVeh));
    const AllocationResult r = allocate(Vec4::Zero(), c, kRotor, kVeh);
    EXPECT_FALSE(r.regularized);
    EXPECT_EQ(r.rates.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Allocate, ThrustStep) {
    const Vec4 c = Vec4::Constant(hover_ct(kRotor, kVeh));
    const double kp = 10.0, dT = -0.5;
    const Vec4 rhs(kp * dT, 0, 0, 0);
    const AllocationResult r = allocate(rhs, c, kRotor, kVeh);
    const Vec4 back = allocation_matrix(c, kRotor, kVeh) * r.rates;
    EXPECT_LT((back - rhs).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(r.rates[0], r.rates[1], 1e-14);
    EXPECT_NEAR(r.rates[0], r.rates[3], 1e-14);
    EXPECT_NEAR(r.rates[0], -kp * dT / (4 * kRotor.dimensional_gain()), 1e-14);
}

TEST(Allocate, PureYawDemand) {
    const Vec4 c = Vec4::Constant(hover_ct(kRotor, kVeh));
    const Vec4 rhs(0, 0, 0, 0.2);
    const AllocationResult r = allocate(rhs, c, kRotor, kVeh);
    const Vec4 back = allocation_matrix(c, kRotor, kVeh) * r.rates;
    EXPECT_LT((back - rhs).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(r.rates[0], 0.0);
    EXPECT_NEAR(r.rates[0], -r.rates[1], 1e-14);
    EXPECT_NEAR(r.rates[0], r.rates[2], 1e-14);
    EXPECT_NEAR(r.rates[1], r.rates[3], 1e-14);
}

TEST(Allocate, ForwardMultiplyConsistency) {
    int n = 0;
    EXPECT_LT(prop_allocation_consistency(kRotor, kVeh, 41, &n), 1e-9);
    EXPECT_GE(n, 500);
}

TEST(Allocate, RegularizesThroughSingularity) {
    // Sum of signed square roots vanishes: B is exactly singular unregularized.
    const Vec4 c(0.004, 0.004, -0.004, -0.004);
    EXPECT_GT(condition_number(allocation_matrix(c, kRotor, kVeh)), 1e12);
    const Vec4 rhs(1.0, 0.1, -0.1, 0.05);
    const AllocationResult r = allocate(rhs, c, kRotor, kVeh);
    EXPECT_TRUE(r.regularized);
    ASSERT_TRUE(r.rates.allFinite());
    // Thrust, roll and pitch rows are honoured exactly.
    const Vec4 back = allocation_matrix(c, kRotor, kVeh) * r.rates;
    EXPECT_LT((back.head<3>() - rhs.head<3>()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LT(condition_number(r.matrix), 1e8);
}

TEST(Allocate, FloorOnlyTouchesYawRow) {
    const Vec4 c(0.0, 0.01, 0.01, 0.01);
    const Mat4 b = allocation_matrix(c, kRotor, kVeh);
    const double k = kRotor.dimensional_gain();
    EXPECT_DOUBLE_EQ(b(0, 0), -k);
    EXPECT_NEAR(b(3, 0), 1.5 * k * kRotor.radius * std::sqrt(1e-4 / 2), 1e-12);
}

TEST(Allocate, MatchesRowDecomposition) {
    // Rows 1-3 are orthogonal to each other and to (1,-1,1,-1); the solution is
    // the minimum-norm part plus a multiple of that pattern.
    std::mt19937_64 rng(43);
    const double cm = ct_limit(kRotor);
    std::uniform_real_distribution<double> u(0.2 * cm, cm), d(-1, 1);
    const Vec4 v(1, -1, 1, -1);
    for (int i = 0; i < 200; ++i) {
        const Vec4 c(u(rng), u(rng), u(rng), u(rng));
        const Vec4 rhs(d(rng) * 20, d(rng), d(rng), d(rng) * 0.2);
        const Mat4 b = allocation_matrix(c, kRotor, kVeh);
        Vec4 u0 = Vec4::Zero();
        for (int k = 0; k < 3; ++k) u0 += rhs[k] * b.row(k).transpose() / b.row(k).squaredNorm();
        const double alpha = (rhs[3] - b.row(3).dot(u0)) / b.row(3).dot(v);
        const Vec4 ref = u0 + alpha * v;
        EXPECT_LT((allocate(rhs, c, kRotor, kVeh).rates - ref).norm(), 1e-9 * (1 + ref.norm()));
    }
}
