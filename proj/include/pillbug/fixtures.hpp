#pragma once

// Reference design data for the six-segment pillbug body: the three
// digitized profile curves, their apex-normalized forms, the 21 body
// targets for a 50 mm chord, the tabulated link and slider record, and the
// spread-state shell profiles with their published cut points and lengths.
// Tests and the bundled project configuration both draw on these values.

#include <pillbug/geometry.hpp>
#include <pillbug/kin.hpp>
#include <pillbug/poly.hpp>
#include <pillbug/shell.hpp>
#include <pillbug/targetgen.hpp>

#include <array>
#include <vector>

namespace pillbug::fixtures {

/// Fitted profile curves, one per state (curled, intermediate, spread).
inline std::array<Polynomial, kStates> profile_curves() {
    return {
        Polynomial::from_highest_first(
            {4.372e-11, -6.15e-8, 3.563e-5, -0.01088, 1.851, -167.4, 6394}),
        Polynomial::from_highest_first(
            {2.921e-14, -6.297e-11, 7.821e-8, -4.677e-5, 0.01666, -3.456, 321.9}),
        Polynomial::from_highest_first(
            {4.736e-14, -1.128e-10, 8.786e-8, -2.84e-5, 0.004256, -0.4234, 58.27}),
    };
}

inline constexpr std::array<Vec2, kStates> kApexes{{
    {252.79, 26.3873},
    {261.73, 19.1253},
    {273.32, 18.6198},
}};

/// Apex-normalized curves as printed (three significant figures).
inline std::array<Polynomial, kStates> normalized_curves() {
    return {
        Polynomial::from_highest_first(
            {-3.32e-10, -2.44e-8, 6.6e-7, 6.2e-5, -0.00656, -2.82e-5, 0.0}),
        Polynomial::from_highest_first(
            {-2.22e-13, 8.66e-11, -8.71e-8, -5.51e-6, -0.00427, 2.6e-6, 0.0}),
        Polynomial::from_highest_first(
            {-3.6e-13, 1.78e-10, 4.46e-8, -6.14e-6, -0.00192, 8.6e-6, 0.0}),
    };
}

inline std::array<NormalizedCurve, kStates> normalized_curve_set() {
    const auto f = normalized_curves();
    std::array<NormalizedCurve, kStates> out;
    for (std::size_t j = 0; j < kStates; ++j)
        out[j] = {f[j], static_cast<int>(j + 1), kApexes[j]};
    return out;
}

inline constexpr double kChord = 50.0;

/// Published body targets, r = 50 mm.
inline TargetSet target_matrix() {
    TargetSet t;
    t.r = kChord;
    t.states = {{
        {{{-92.927, -102.15}, {-79.985, -53.854}, {-47.392, -15.9374}, {0.0, 0.0},
          {47.765, -14.7814}, {67.102, -60.8919}, {75.453, -110.1883}}},
        {{{-122.28, -76.403}, {-90.728, -37.616}, {-48.964, -10.1248}, {0.0, 0.0},
          {48.719, -11.2475}, {88.199, -41.9290}, {117.2, -82.6518}}},
        {{{-148.93, -17.398}, {-99.378, -10.696}, {-49.855, -3.8071}, {0.0, 0.0},
          {49.73, -5.1925}, {97.841, -18.8049}, {146.19, -31.5663}}},
    }};
    return t;
}

/// Tabulated link lengths, slider positions and rail heights.
inline MechanismParams table_params() {
    MechanismParams m;
    m.r = kChord;
    m.units = {{
        {61.6407, 50.0, 67.7454, -79.2894, {-29.1552, -54.5961, -121.3820}},
        {57.0854, 50.0, 61.6407, -70.9686, {-20.7679, -38.8899, -86.4629}},
        {80.0, 50.0, 57.0854, -60.8849, {-12.2000, -22.8457, -50.7923}},
        {80.0, 50.0, 76.0363, -80.0, {8.6747, 16.2442, 36.1154}},
        {76.0363, 50.0, 40.3542, -56.4486, {26.9932, 50.5475, 112.3808}},
        {40.3542, 50.0, 49.1272, -80.0, {36.3793, 68.1239, 151.4581}},
    }};
    m.schedule = fit_schedule(m.units);
    return m;
}

/// Slider scale of each state relative to the first.
inline constexpr std::array<double, kStates> kStateScales{1.0, 1.8726, 4.1633};

struct ShellCurveCoeffs {
    int shell = 0;
    bool upper = false;
    std::array<double, 3> highest_first{};
};

/// Spread-state shell profile curves.
inline constexpr std::array<ShellCurveCoeffs, 6> kShellCurves{{
    {1, true, {-0.001576, -0.3341, -25.57}},
    {2, false, {-0.001484, -0.1651, -7.636}},
    {2, true, {-0.001577, -0.1839, -6.538}},
    {3, false, {-0.00147, -0.07325, 0.7241}},
    {5, true, {-0.001852, -0.1134, 12.0}},
    {6, false, {-0.001635, 0.0747, -6.568}},
}};

inline std::vector<ShellCurve> shell_curves() {
    std::vector<ShellCurve> out;
    for (const auto& c : kShellCurves)
        out.push_back(make_shell_curve(
            c.shell, c.upper ? ShellSide::Upper : ShellSide::Lower,
            Polynomial::from_highest_first({c.highest_first.begin(), c.highest_first.end()})));
    return out;
}

inline constexpr Vec2 kS12{-113.0793, -7.9424};
inline constexpr Vec2 kS23{-70.4277, -1.4084};
inline constexpr Vec2 kS56{89.4772, -12.9741};

inline constexpr double kShell2Length = 63.3594;
inline constexpr double kShell3Length = 70.4418;
inline constexpr double kShell6Length = 59.6826;

} // namespace pillbug::fixtures
