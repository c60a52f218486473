#pragma once

// Target generation: locate the hump of each profile curve, move it to the
// origin, and cut each curve into equal chords on both sides of the apex.

#include <pillbug/error.hpp>
#include <pillbug/geometry.hpp>
#include <pillbug/poly.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace pillbug {

inline constexpr std::size_t kStates = 3;
inline constexpr std::size_t kPointsPerSide = 3;
inline constexpr std::size_t kPointsPerState = 2 * kPointsPerSide + 1;
inline constexpr std::size_t kApexColumn = kPointsPerSide;

struct ApexWindow {
    double lo = 150.0;
    double hi = 350.0;
};

/// Stationary point of p inside the window. The derivative is scanned on a
/// 1 mm grid first so a window holding several humps is rejected rather than
/// silently resolved to one of them.
inline Vec2 find_apex(const Polynomial& p, double search_lo, double search_hi) {
    const Polynomial dp = derivative(p);
    int changes = 0;
    double bracket_lo = search_lo, bracket_hi = search_hi;
    double prev_x = search_lo;
    double prev = dp(search_lo);
    if (prev == 0.0) {
        ++changes;
        bracket_hi = search_lo;
    }
    for (double x = search_lo + 1.0; prev_x < search_hi; x += 1.0) {
        const double xc = std::min(x, search_hi);
        const double v = dp(xc);
        if (v == 0.0 || (prev != 0.0 && (v < 0.0) != (prev < 0.0))) {
            ++changes;
            bracket_lo = prev_x;
            bracket_hi = xc;
        }
        prev = v;
        prev_x = xc;
    }
    if (changes == 0)
        throw Error(ErrorKind::NoSignChange, "no stationary point in [" + std::to_string(search_lo) +
                                                 ", " + std::to_string(search_hi) + "]");
    if (changes > 1)
        throw Error(ErrorKind::MultipleRoots,
                    std::to_string(changes) + " stationary points in [" + std::to_string(search_lo) +
                        ", " + std::to_string(search_hi) + "]; narrow the window");
    const double xd = find_root_bracketed(dp, bracket_lo, bracket_hi);
    return {xd, p(xd)};
}

inline Vec2 find_apex(const Polynomial& p, ApexWindow window) {
    return find_apex(p, window.lo, window.hi);
}

/// Profile curve with its apex moved to the origin.
struct NormalizedCurve {
    Polynomial f;
    int state_index = 1; // 1..3
    Vec2 source_apex;
};

inline constexpr double kApexTolerance = 0.01;

/// f(x) = scale * g(x / scale): the same curve drawn `scale` times larger.
inline Polynomial scale_curve(const Polynomial& g, double scale) {
    if (!(scale > 0.0))
        throw Error(ErrorKind::InvalidInput, "curve scale must be positive");
    std::vector<double> c(g.coeffs().begin(), g.coeffs().end());
    double factor = scale; // scale^(1 - k)
    for (double& ck : c) {
        ck *= factor;
        factor /= scale;
    }
    return Polynomial(std::move(c));
}

/// Apex moved to the origin, hump turned downwards, then scaled about the
/// origin by `scale`.
inline NormalizedCurve normalize(const Polynomial& p, Vec2 apex, int state_index,
                                 double scale = 1.0) {
    Polynomial g = shift_and_flip(p, apex.x, apex.y);
    if (scale != 1.0)
        g = scale_curve(g, scale);
    NormalizedCurve out{std::move(g), state_index, apex};
    const double f0 = out.f(0.0);
    const double slope0 = derivative(out.f)(0.0);
    if (std::abs(f0) > kApexTolerance || std::abs(slope0) > kApexTolerance)
        throw Error(ErrorKind::ApexMismatch, "normalized curve " + std::to_string(state_index) +
                                                 " has f(0) = " + std::to_string(f0) +
                                                 ", f'(0) = " + std::to_string(slope0));
    return out;
}

/// Next point on y = f(x) at chord distance r from prev, on the side given by
/// direction (+1 right, -1 left). The first crossing of the circle is taken:
/// the chord residual is marched in steps of r/20 until it changes sign.
inline Vec2 next_point_on_curve(const Polynomial& f, Vec2 prev, double r, int direction) {
    if (r <= 0.0)
        throw Error(ErrorKind::InvalidInput, "chord length must be positive");
    if (direction != 1 && direction != -1)
        throw Error(ErrorKind::InvalidInput, "direction must be +1 or -1");

    const Polynomial df = derivative(f);
    const auto residual = [&](double x) {
        const double dx = x - prev.x;
        const double dy = f(x) - prev.y;
        return dx * dx + dy * dy - r * r;
    };
    const auto slope = [&](double x) { return 2.0 * (x - prev.x) + 2.0 * (f(x) - prev.y) * df(x); };

    const double step = r / 20.0;
    const double horizon = 4.0 * r;
    double x_prev = prev.x;
    double g_prev = residual(x_prev);
    for (int k = 1; k * step <= horizon + 1e-12; ++k) {
        const double x = prev.x + direction * k * step;
        const double g = residual(x);
        if ((g_prev < 0.0) != (g < 0.0) || g == 0.0) {
            const double xr = find_root_bracketed(residual, slope, x_prev, x);
            return {xr, f(xr)};
        }
        x_prev = x;
        g_prev = g;
    }
    throw Error(ErrorKind::NoIntersection,
                "no chord of length " + std::to_string(r) + " within " + std::to_string(horizon) +
                    " mm of x = " + std::to_string(prev.x));
}

/// Seven points per state, left to right, apex in the middle column.
struct TargetSet {
    double r = 50.0;
    std::array<std::array<Vec2, kPointsPerState>, kStates> states{};

    Vec2 point(std::size_t state, std::size_t column) const { return states.at(state).at(column); }
};

inline TargetSet build_target_set(const std::array<NormalizedCurve, kStates>& curves, double r) {
    if (!(r > 0.0))
        throw Error(ErrorKind::InvalidInput, "chord length must be positive");
    TargetSet out;
    out.r = r;
    for (std::size_t j = 0; j < kStates; ++j) {
        auto& row = out.states[j];
        row[kApexColumn] = {0.0, 0.0};
        for (int direction : {-1, 1}) {
            Vec2 prev{0.0, 0.0};
            for (std::size_t step = 1; step <= kPointsPerSide; ++step) {
                const std::size_t column =
                    direction < 0 ? kApexColumn - step : kApexColumn + step;
                try {
                    prev = next_point_on_curve(curves[j].f, prev, r, direction);
                } catch (const Error& e) {
                    throw Error(e.kind(), "state " + std::to_string(j + 1) + ", column " +
                                              std::to_string(column + 1) + ": " + e.message());
                }
                row[column] = prev;
            }
        }
    }
    return out;
}

} // namespace pillbug
