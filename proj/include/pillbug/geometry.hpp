#pragma once

#include <cmath>
#include <numbers>

namespace pillbug {

/// Planar point or displacement, millimetres.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) noexcept { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) noexcept { x -= o.x; y -= o.y; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) noexcept { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) noexcept { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) noexcept { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) noexcept { return {s * a.x, s * a.y}; }
    friend constexpr bool operator==(Vec2, Vec2) noexcept = default;
};

constexpr double dot(Vec2 a, Vec2 b) noexcept { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) noexcept { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) noexcept { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) noexcept { return norm(a - b); }

/// Unit vector at angle theta.
inline Vec2 unit(double theta) noexcept { return {std::cos(theta), std::sin(theta)}; }

inline double heading(Vec2 a) noexcept { return std::atan2(a.y, a.x); }

/// Wraps an angle difference into (-pi, pi].
inline double wrap_angle(double a) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::remainder(a, two_pi);
    if (a <= -std::numbers::pi)
        a += two_pi;
    return a;
}

/// Rigid planar frame: origin plus heading of the local x-axis.
struct Frame {
    Vec2 origin;
    double angle = 0.0;

    Vec2 to_world(Vec2 local) const noexcept {
        const double c = std::cos(angle), s = std::sin(angle);
        return origin + Vec2{c * local.x - s * local.y, s * local.x + c * local.y};
    }

    Vec2 to_local(Vec2 world) const noexcept {
        const double c = std::cos(angle), s = std::sin(angle);
        const Vec2 d = world - origin;
        return {c * d.x + s * d.y, -s * d.x + c * d.y};
    }
};

} // namespace pillbug
