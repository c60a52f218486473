#include <pillbug/fixtures.hpp>
#include <pillbug/io.hpp>

#include <gtest/gtest.h>

#include <filesystem>

using namespace pillbug;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::size_t count_lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

} // namespace

TEST(Format, ShortestRoundTrip) {
    EXPECT_EQ(io::fmt(0.1), "0.1");
    EXPECT_EQ(io::fmt(-2.0), "-2");
    for (double v : {1.0 / 3.0, -92.927, 1e-17, 4.1633e8})
        EXPECT_EQ(std::stod(io::fmt(v)), v);
}

TEST(Json, PolynomialRoundTrip) {
    const auto p = fixtures::profile_curves()[0];
    EXPECT_EQ(io::polynomial_from_json(io::to_json(p)), p);
    EXPECT_THROW(io::polynomial_from_json(io::json::parse(R"({"coeffs": []})")), Error);
    EXPECT_THROW(io::polynomial_from_json(io::json::parse(R"({"c": [1]})")), Error);
}

TEST(Json, TargetsRoundTrip) {
    const auto t = fixtures::target_matrix();
    const auto back = io::targets_from_json(io::to_json(t));
    EXPECT_EQ(back.r, t.r);
    for (std::size_t j = 0; j < kStates; ++j)
        for (std::size_t k = 0; k < kPointsPerState; ++k)
            EXPECT_EQ(back.point(j, k), t.point(j, k));
    EXPECT_THROW(io::targets_from_json(io::json::parse(R"({"r": 50, "states": [[]]})")), Error);
}

TEST(Json, MechanismRoundTrip) {
    const auto m = fixtures::table_params();
    const auto back = io::mechanism_from_json(io::to_json(m));
    EXPECT_EQ(back.r, m.r);
    EXPECT_EQ(back.schedule.w, m.schedule.w);
    EXPECT_EQ(back.schedule.s, m.schedule.s);
    for (std::size_t i = 0; i < kUnits; ++i) {
        EXPECT_EQ(back.units[i].L1, m.units[i].L1);
        EXPECT_EQ(back.units[i].L3, m.units[i].L3);
        EXPECT_EQ(back.units[i].anchor_x, m.units[i].anchor_x);
        EXPECT_EQ(back.units[i].rail_y, m.units[i].rail_y);
    }
}

TEST(Json, MechanismWithoutScheduleIsFitted) {
    auto j = io::to_json(fixtures::table_params());
    j.erase("schedule");
    const auto m = io::mechanism_from_json(j);
    EXPECT_EQ(m.schedule.s[0], 1.0);
    EXPECT_NEAR(m.schedule.s[1], 1.8726, 2e-3);
}

TEST(Json, ConfigurationRoundTrip) {
    const auto m = fixtures::table_params();
    const auto t = fixtures::target_matrix();
    const auto c = solve_configuration(m, 1.0, initial_guess(m, 1.0, t, 0));
    const auto back = io::configuration_from_json(io::to_json(c));
    EXPECT_EQ(back.s, c.s);
    for (std::size_t i = 0; i < kUnits; ++i) {
        EXPECT_EQ(back.units[i].alpha, c.units[i].alpha);
        EXPECT_EQ(back.units[i].tracer, c.units[i].tracer);
    }
}

TEST(Csv, Headers) {
    const auto t = fixtures::target_matrix();
    const auto csv = io::targets_csv(t);
    EXPECT_EQ(first_line(csv), "state,k,x,y");
    EXPECT_EQ(count_lines(csv), 1 + kStates * kPointsPerState);

    const auto m = fixtures::table_params();
    const auto c = solve_configuration(m, 1.0, initial_guess(m, 1.0, t, 0));
    EXPECT_EQ(first_line(io::configuration_csv(c)), "unit,alpha,beta,gamma,coupler_x,Dx,Dy");
    const auto sw = io::sweep_csv({c, c, c});
    EXPECT_EQ(first_line(sw), "unit,step,s,alpha,beta,gamma,coupler_x,Dx,Dy");
    EXPECT_EQ(count_lines(sw), 1 + 3 * kUnits);
}

TEST(Csv, SamplesRoundTrip) {
    SampleSet s{{{1.0, 2.5}, {2.0, -0.125}, {3.5, 1e-3}}};
    const auto back = io::parse_samples_csv(io::samples_csv(s));
    ASSERT_EQ(back.points.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k)
        EXPECT_EQ(back.points[k], s.points[k]);
}

TEST(Csv, SamplesRejectGarbage) {
    EXPECT_THROW(io::parse_samples_csv("x,y\n1,abc\n"), Error);
    EXPECT_THROW(io::parse_samples_csv("x,y\n1\n"), Error);
}

TEST(Files, MissingFileIsIoError) {
    try {
        io::read_json("/nonexistent/dir/file.json");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Io);
        EXPECT_FALSE(e.is_numerical());
    }
}

TEST(Files, WriteCreatesParents) {
    const auto dir = std::filesystem::temp_directory_path() / "pillbug_io_test";
    std::filesystem::remove_all(dir);
    io::write_json(dir / "a" / "b.json", io::to_json(fixtures::target_matrix()));
    const auto back = io::targets_from_json(io::read_json(dir / "a" / "b.json"));
    EXPECT_EQ(back.point(2, 6), fixtures::target_matrix().point(2, 6));
    std::filesystem::remove_all(dir);
}
