#include <pillbug/fixtures.hpp>
#include <pillbug/kin.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pillbug;
using std::numbers::pi;

namespace {

double worst_tracer_error(const Configuration& c, const TargetSet& t, std::size_t state) {
    double worst = 0.0;
    for (std::size_t i = 0; i < kUnits; ++i)
        worst = std::max(worst, distance(c.units[i].tracer, t.point(state, unit_column(i))));
    return worst;
}

double closure_norm(const MechanismParams& m, const Configuration& c) {
    return closure_residuals(m, c).lpNorm<Eigen::Infinity>();
}

// Straight body along y = 0; every unit stands on a rail 50 mm below its
// tracer with all three links 50 mm long.
MechanismParams flat_toy() {
    MechanismParams m;
    m.r = 50.0;
    const std::array<double, kUnits> xs{-150.0, -100.0, -50.0, 50.0, 100.0, 150.0};
    for (std::size_t i = 0; i < kUnits; ++i) {
        m.units[i] = {50.0, 50.0, 50.0, -50.0, {xs[i], xs[i], xs[i]}};
        m.schedule.w[i] = xs[i];
    }
    m.schedule.s = {1.0, 1.0, 1.0};
    return m;
}

} // namespace

TEST(ForwardKinematics, StretchedAndFolded) {
    const Vec2 a = fk_two_link({0, 0}, 1.0, 1.0, 0.0, 0.0);
    EXPECT_NEAR(a.x, 2.0, 1e-15);
    EXPECT_NEAR(a.y, 0.0, 1e-15);
    const Vec2 b = fk_two_link({0, 0}, 1.0, 1.0, 0.0, pi);
    EXPECT_NEAR(b.x, 0.0, 1e-15);
    EXPECT_NEAR(b.y, 0.0, 1e-15);
}

TEST(InverseKinematics, BoundaryAndOutOfReach) {
    const auto one = ik_two_link({0, 0}, 1.0, 1.0, {2.0, 0.0});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_NEAR(one[0].alpha, 0.0, 1e-12);
    EXPECT_NEAR(one[0].beta, 0.0, 1e-12);
    EXPECT_TRUE(ik_two_link({0, 0}, 3.0, 1.0, {5.0, 0.0}).empty());
    EXPECT_TRUE(ik_two_link({0, 0}, 3.0, 1.0, {1.0, 0.0}).empty());
}

TEST(InverseKinematics, TableUnitRoundTrip) {
    const Vec2 base{-29.1552, -79.2894};
    const Vec2 target{-92.927, -102.15};
    const auto branches = ik_two_link(base, 61.6407, 50.0, target);
    ASSERT_EQ(branches.size(), 2u);
    for (const auto& b : branches) {
        const Vec2 p = fk_two_link(base, 61.6407, 50.0, b.alpha, b.beta);
        EXPECT_NEAR(p.x, target.x, 1e-9);
        EXPECT_NEAR(p.y, target.y, 1e-9);
    }
    EXPECT_GE(std::sin(branches[0].beta - branches[0].alpha), 0.0);
    EXPECT_LE(std::sin(branches[1].beta - branches[1].alpha), 0.0);
}

TEST(InverseKinematics, RandomRoundTrips) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> len(5.0, 100.0), pos(-150.0, 150.0), frac(0.0, 1.0),
        ang(-pi, pi);
    int checked = 0;
    for (int n = 0; n < 1000; ++n) {
        const Vec2 base{pos(rng), pos(rng)};
        const double L1 = len(rng), L2 = len(rng);
        const double lo = std::abs(L1 - L2), hi = L1 + L2;
        const double d = lo + (hi - lo) * frac(rng);
        const Vec2 target = base + d * unit(ang(rng));
        const auto branches = ik_two_link(base, L1, L2, target);
        ASSERT_FALSE(branches.empty());
        for (const auto& b : branches) {
            const Vec2 p = fk_two_link(base, L1, L2, b.alpha, b.beta);
            ASSERT_NEAR(distance(p, target), 0.0, 1e-9);
            ++checked;
        }
        const double L3 = len(rng);
        const double rail = target.y - (2.0 * frac(rng) - 1.0) * L3;
        for (double xc : ik_coupler(target, L3, rail))
            ASSERT_NEAR(distance({xc, rail}, target), L3, 1e-9);
    }
    EXPECT_GE(checked, 1000);
}

TEST(CouplerInverse, TangentAndTwoSolutions) {
    const auto t = ik_coupler({0, 0}, 5.0, -5.0);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_NEAR(t[0], 0.0, 1e-12);
    const auto two = ik_coupler({0, 0}, 5.0, -3.0);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NEAR(two[0], -4.0, 1e-12);
    EXPECT_NEAR(two[1], 4.0, 1e-12);
    EXPECT_TRUE(ik_coupler({0, 0}, 5.0, -6.0).empty());
}

TEST(CouplerInverse, TableUnitThreeAnchor) {
    const auto xs = ik_coupler({-47.392, -15.9374}, 57.0854, -60.8849);
    ASSERT_EQ(xs.size(), 2u);
    EXPECT_NEAR(xs[1], -12.2, 0.05);
}

TEST(SliderSchedule, TableColumns) {
    const auto m = fixtures::table_params();
    std::array<double, kUnits> w{};
    for (std::size_t i = 0; i < kUnits; ++i)
        w[i] = m.units[i].anchor_x[0];
    const auto s1 = slider_schedule(w, 1.0);
    const auto s2 = slider_schedule(w, 1.8726);
    for (std::size_t i = 0; i < kUnits; ++i) {
        EXPECT_EQ(s1[i], m.units[i].anchor_x[0]);
        EXPECT_NEAR(s2[i], m.units[i].anchor_x[1], 2e-3 * std::abs(m.units[i].anchor_x[1]));
    }
    for (double x : slider_schedule(w, 0.0))
        EXPECT_EQ(x, 0.0);
}

TEST(SliderSchedule, FittedScalesMatchTableRatios) {
    const auto m = fixtures::table_params();
    EXPECT_EQ(m.schedule.s[0], 1.0);
    EXPECT_NEAR(m.schedule.s[1], 1.8726, 2e-3);
    EXPECT_NEAR(m.schedule.s[2], 4.1633, 2e-3);
}

TEST(TableIdentities, SharedLinks) {
    const auto m = fixtures::table_params();
    EXPECT_NEAR(m.units[1].L3, m.units[0].L1, 1e-4);
    EXPECT_NEAR(m.units[2].L3, m.units[1].L1, 1e-4);
    EXPECT_NEAR(m.units[3].L3, m.units[4].L1, 1e-4);
    EXPECT_NEAR(m.units[4].L3, m.units[5].L1, 1e-4);
    for (std::size_t i = 0; i < kUnits; ++i) {
        if (const auto k = inner_unit(i))
            EXPECT_NEAR(m.units[*k].L3, m.units[i].L1, 1e-4);
    }
}

TEST(TableIdentities, AnchorToTargetIsCouplerLength) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    for (std::size_t i = 0; i < kUnits; ++i)
        for (std::size_t j = 0; j < kStates; ++j) {
            const Vec2 b{m.units[i].anchor_x[j], m.units[i].rail_y};
            const double tol = i < 5 ? 0.05 : 0.5;
            EXPECT_NEAR(distance(b, t.point(j, unit_column(i))), m.units[i].L3, tol)
                << "unit " << i + 1 << " state " << j + 1;
        }
}

TEST(Mobility, Grubler) {
    EXPECT_EQ(grubler_dof(6), 6);
    EXPECT_EQ(grubler_dof(1), 1);
    EXPECT_EQ(grubler_dof(10), 10);
    for (int a = 1; a <= 10; ++a)
        for (int b = 1; b <= 10; ++b)
            EXPECT_EQ(grubler_dof(a + b), grubler_dof(a) + grubler_dof(b));
    EXPECT_THROW(grubler_dof(0), Error);
}

TEST(Solve, FlatToyMatchesClosedForm) {
    const auto m = flat_toy();
    std::array<Vec2, kUnits> guess{};
    const std::array<double, kUnits> xs{-150.0, -100.0, -50.0, 50.0, 100.0, 150.0};
    for (std::size_t i = 0; i < kUnits; ++i)
        guess[i] = {xs[i] + 1.5, 2.0};
    const auto c = solve_configuration(m, 1.0, initial_guess(m, 1.0, guess));
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = c.units[i];
        EXPECT_NEAR(u.tracer.x, xs[i], 1e-9);
        EXPECT_NEAR(u.tracer.y, 0.0, 1e-9);
        EXPECT_NEAR(u.coupler_x, xs[i], 1e-9);
        EXPECT_NEAR(wrap_angle(u.gamma - pi / 2), 0.0, 1e-9);
        // Isosceles dyad with all sides 50: elbow 60 degrees off the vertical.
        EXPECT_NEAR(wrap_angle(u.alpha - (pi / 2 - pi / 3)), 0.0, 1e-9);
        EXPECT_NEAR(wrap_angle(u.beta - (pi / 2 + pi / 3)), 0.0, 1e-9);
    }
    EXPECT_LE(closure_norm(m, c), 1e-9);
}

TEST(Solve, TableStatesNearTargets) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    const auto c1 = solve_configuration(m, 1.0, initial_guess(m, 1.0, t, 0));
    EXPECT_LE(closure_norm(m, c1), 1e-9);
    EXPECT_LE(worst_tracer_error(c1, t, 0), 0.5);
    const auto c3 = solve_configuration(m, 4.1633, initial_guess(m, 4.1633, t, 2));
    EXPECT_LE(closure_norm(m, c3), 1e-9);
    EXPECT_LE(worst_tracer_error(c3, t, 2), 1.0);
}

TEST(Solve, SolveNearPicksClosestState) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    const auto c = solve_near(m, t, m.schedule.s[1]);
    EXPECT_LE(worst_tracer_error(c, t, 1), 1.0);
}

TEST(Sweep, TableSweepPassesIntermediateState) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    const auto seed = solve_configuration(m, 1.0, initial_guess(m, 1.0, t, 0));
    const auto steps = sweep(m, 1.0, 4.1633, 50, seed);
    ASSERT_EQ(steps.size(), 50u);
    for (const auto& c : steps)
        EXPECT_LE(closure_norm(m, c), kClosureTolerance);
    std::size_t nearest = 0;
    for (std::size_t k = 1; k < steps.size(); ++k)
        if (std::abs(steps[k].s - 1.8726) < std::abs(steps[nearest].s - 1.8726))
            nearest = k;
    const auto at_s2 = solve_configuration(m, 1.8726, steps[nearest]);
    EXPECT_LE(worst_tracer_error(at_s2, t, 1), 1.0);
    EXPECT_LT(max_angle_change(steps[nearest], at_s2), kBranchJumpLimit);
}

TEST(Sweep, TwoStepsAreEndpoints) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    const auto seed = solve_configuration(m, 1.0, initial_guess(m, 1.0, t, 0));
    const auto steps = sweep(m, 1.0, 1.2, 2, seed);
    ASSERT_EQ(steps.size(), 2u);
    EXPECT_EQ(steps[0].s, 1.0);
    EXPECT_EQ(steps[1].s, 1.2);
    const auto end = solve_configuration(m, 1.2, steps[0]);
    for (std::size_t i = 0; i < kUnits; ++i)
        EXPECT_NEAR(distance(end.units[i].tracer, steps[1].units[i].tracer), 0.0, 1e-9);
    EXPECT_THROW(sweep(m, 1.0, 2.0, 1, seed), Error);
    // One step across the whole first interval moves the elbows too far.
    try {
        sweep(m, 1.0, 1.8726, 2, seed);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BranchJump);
    }
}

TEST(Sweep, ReverseReturnsToStart) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    const auto seed = solve_configuration(m, 1.0, initial_guess(m, 1.0, t, 0));
    const auto fwd = sweep(m, 1.0, 4.1633, 30, seed);
    const auto back = sweep(m, 4.1633, 1.0, 30, fwd.back());
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& a = seed.units[i];
        const auto& b = back.back().units[i];
        EXPECT_NEAR(distance(a.tracer, b.tracer), 0.0, 1e-6);
        EXPECT_NEAR(wrap_angle(a.alpha - b.alpha), 0.0, 1e-6);
        EXPECT_NEAR(wrap_angle(a.beta - b.beta), 0.0, 1e-6);
        EXPECT_NEAR(wrap_angle(a.gamma - b.gamma), 0.0, 1e-6);
    }
}

TEST(Sweep, FlippedElbowExceedsJumpLimit) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    const auto seed = solve_configuration(m, 1.0, initial_guess(m, 1.0, t, 0));
    // Flipping one elbow in the seed forces the first solve onto the other branch.
    Configuration flipped = seed;
    const auto& p = m.units[0];
    const auto branches = ik_two_link(slider_point(m, 0, 1.0), p.L1, p.L2, seed.units[0].tracer);
    ASSERT_EQ(branches.size(), 2u);
    flipped.units[0].alpha = branches[1].alpha;
    flipped.units[0].beta = branches[1].beta;
    const auto start = solve_configuration(m, 1.0, flipped);
    EXPECT_GE(max_angle_change(seed, start), kBranchJumpLimit);
}
