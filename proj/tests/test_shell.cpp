#include <pillbug/fixtures.hpp>
#include <pillbug/shell.hpp>

#include <gtest/gtest.h>

using namespace pillbug;

namespace {

const ShellCurve* curve(const std::vector<ShellCurve>& all, int shell, ShellSide side) {
    for (const auto& c : all)
        if (c.shell_index == shell && c.side == side)
            return &c;
    return nullptr;
}

std::vector<Configuration> table_states() {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    std::vector<Configuration> out;
    for (std::size_t j = 0; j < kStates; ++j) {
        const double s = fixtures::kStateScales[j];
        out.push_back(solve_configuration(m, s, initial_guess(m, s, t, j)));
    }
    return out;
}

std::map<int, double> scaled(std::map<int, double> lengths, double f) {
    for (auto& [k, l] : lengths)
        l *= f;
    return lengths;
}

} // namespace

TEST(Intersect, ReferenceShellPairs) {
    const auto all = fixtures::shell_curves();
    struct Case {
        int lower;
        Vec2 oracle;
        Vec2 published;
    };
    // Second root of each pair, 50-digit reference.
    const Case cases[] = {
        {1, {-113.07927087685021, -7.9424038872594859}, fixtures::kS12},
        {2, {-70.427715842689489, -1.4083626579863605}, fixtures::kS23},
        {5, {89.477199725005833, -12.974139938019799}, fixtures::kS56},
    };
    for (const auto& c : cases) {
        const auto pts = intersect_conics(*curve(all, c.lower, ShellSide::Upper),
                                          *curve(all, c.lower + 1, ShellSide::Lower));
        ASSERT_EQ(pts.size(), 2u);
        EXPECT_LT(pts[0].x, pts[1].x);
        EXPECT_NEAR(pts[1].x, c.oracle.x, 1e-9);
        EXPECT_NEAR(pts[1].y, c.oracle.y, 1e-9);
        EXPECT_NEAR(pts[1].x, c.published.x, 0.01);
        EXPECT_NEAR(pts[1].y, c.published.y, 0.01);
    }
}

TEST(Intersect, ParallelAndIdentical) {
    const auto a = make_shell_curve(1, ShellSide::Upper, Polynomial{0.0, 0.0, -1.0});
    const auto b = make_shell_curve(2, ShellSide::Lower, Polynomial{1.0, 0.0, -1.0});
    EXPECT_TRUE(intersect_conics(a, b).empty());
    try {
        intersect_conics(a, a);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IdenticalCurves);
    }
}

TEST(Intersect, TangentAndSymmetric) {
    const auto a = make_shell_curve(1, ShellSide::Upper, Polynomial{0.0, 0.0, 1.0});
    const auto b = make_shell_curve(2, ShellSide::Lower, Polynomial{0.0, 0.0, -1.0});
    const auto pts = intersect_conics(a, b);
    ASSERT_EQ(pts.size(), 1u);
    EXPECT_EQ(pts[0].x, 0.0);
    const auto c = make_shell_curve(2, ShellSide::Lower, Polynomial{-4.0, 0.0, 2.0});
    const auto two = intersect_conics(a, c);
    ASSERT_EQ(two.size(), 2u);
    EXPECT_NEAR(two[0].x, -2.0, 1e-12);
    EXPECT_NEAR(two[1].x, 2.0, 1e-12);
    EXPECT_EQ(intersect_conics(c, a).size(), 2u);
}

TEST(Intersect, RejectsNonQuadratic) {
    EXPECT_THROW(make_shell_curve(1, ShellSide::Upper, Polynomial{1.0, 2.0}), Error);
    EXPECT_THROW(make_shell_curve(7, ShellSide::Upper, Polynomial{1.0, 2.0, 3.0}), Error);
}

TEST(ShellLength, DistanceAndSymmetry) {
    EXPECT_EQ(shell_length({0, 0}, {3, 4}), 5.0);
    EXPECT_EQ(shell_length({3, 4}, {0, 0}), 5.0);
    EXPECT_NEAR(shell_length({0.0, 0.0}, fixtures::kS23), fixtures::kShell3Length, 0.01);
}

TEST(Trim, ReferenceLengths) {
    const auto r = trim_lengths(fixtures::target_matrix(), fixtures::shell_curves());
    EXPECT_NEAR(r.lengths.at(2), fixtures::kShell2Length, 0.01);
    EXPECT_NEAR(r.lengths.at(3), fixtures::kShell3Length, 0.01);
    EXPECT_NEAR(r.lengths.at(6), fixtures::kShell6Length, 0.01);
    for (int k : {1, 4, 5})
        EXPECT_EQ(r.lengths.at(k), 70.0);
    ASSERT_EQ(r.cuts.size(), 3u);
    EXPECT_NEAR(r.cuts[0].point.x, fixtures::kS12.x, 0.01);
}

TEST(Trim, InputOrderDoesNotMatter) {
    auto curves = fixtures::shell_curves();
    const auto a = trim_lengths(fixtures::target_matrix(), curves);
    std::reverse(curves.begin(), curves.end());
    const auto b = trim_lengths(fixtures::target_matrix(), curves);
    EXPECT_EQ(a.lengths, b.lengths);
}

TEST(Trim, CutOutsideWorkingRegion) {
    auto curves = fixtures::shell_curves();
    for (auto& c : curves)
        if (c.shell_index == 2 && c.side == ShellSide::Lower)
            c.q = Polynomial({c.q.coeff(0) - 50.0, c.q.coeff(1), c.q.coeff(2)});
    try {
        trim_lengths(fixtures::target_matrix(), curves);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoIntersection);
    }
}

TEST(Trim, UnpairedShellsKeepDefault) {
    std::vector<ShellCurve> curves;
    for (const auto& c : fixtures::shell_curves())
        if (c.shell_index == 5 || c.shell_index == 6)
            curves.push_back(c);
    const auto r = trim_lengths(fixtures::target_matrix(), curves, {80.0, 140.0});
    for (int k = 1; k <= 5; ++k)
        EXPECT_EQ(r.lengths.at(k), 80.0);
    EXPECT_NEAR(r.lengths.at(6), fixtures::kShell6Length, 0.01);
    EXPECT_THROW(trim_lengths(fixtures::target_matrix(), {curves[0], curves[0]}), Error);
}

TEST(Scan, TrimmedShellsClearAtAllStates) {
    const auto states = table_states();
    const auto curves = fixtures::shell_curves();
    const auto lengths = trim_lengths(fixtures::target_matrix(), curves).lengths;
    const auto specs = make_shell_specs(states.back().body_nodes(), curves, lengths);
    const auto report = scan_interference(specs, states);
    ASSERT_EQ(report.steps.size(), 3u);
    EXPECT_TRUE(report.passed());
}

TEST(Scan, OversizedShellsCollideWhenSpread) {
    const auto states = table_states();
    const auto curves = fixtures::shell_curves();
    const auto lengths = trim_lengths(fixtures::target_matrix(), curves).lengths;
    const auto specs = make_shell_specs(states.back().body_nodes(), curves, scaled(lengths, 1.5));
    const auto report = scan_interference(specs, states);
    EXPECT_FALSE(report.steps[2].passed());
    EXPECT_TRUE(report.has_pair(2, 1, 2));
    EXPECT_TRUE(report.has_pair(2, 5, 6));
    for (const auto& c : report.steps[2].collisions)
        EXPECT_GT(c.depth_mm, 0.0);
}

TEST(Scan, CollisionsGrowWithLength) {
    const auto states = table_states();
    const auto curves = fixtures::shell_curves();
    const auto lengths = trim_lengths(fixtures::target_matrix(), curves).lengths;
    std::size_t prev = 0;
    for (double f : {1.0, 1.2, 1.5, 2.0}) {
        const auto specs = make_shell_specs(states.back().body_nodes(), curves, scaled(lengths, f));
        std::size_t n = 0;
        for (const auto& s : scan_interference(specs, states).steps)
            n += s.collisions.size();
        EXPECT_GE(n, prev) << "factor " << f;
        prev = n;
    }
}

TEST(Scan, SingleShellIsVacuous) {
    const auto states = table_states();
    std::vector<ShellCurve> one;
    for (const auto& c : fixtures::shell_curves())
        if (c.shell_index == 3)
            one.push_back(c);
    const auto specs = make_shell_specs(states.back().body_nodes(), one, {{3, 500.0}});
    EXPECT_TRUE(scan_interference(specs, states).passed());
}

TEST(Scan, RejectsCoarseSampling) {
    const auto states = table_states();
    const auto specs = make_shell_specs(states.back().body_nodes(), fixtures::shell_curves(), {});
    try {
        scan_interference(specs, states, {4, 0.1});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
    }
    EXPECT_THROW(make_shell_specs(states.back().body_nodes(), fixtures::shell_curves(), {{2, -1.0}}), Error);
}

TEST(Scan, TableSweepIsClear) {
    const auto m = fixtures::table_params();
    const auto states = table_states();
    const auto curves = fixtures::shell_curves();
    const auto lengths = trim_lengths(fixtures::target_matrix(), curves).lengths;
    const auto specs = make_shell_specs(states.back().body_nodes(), curves, lengths);
    const auto path = sweep(m, 1.0, 4.1633, 50, states.front());
    EXPECT_TRUE(scan_interference(specs, path).passed());
}
