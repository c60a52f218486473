#pragma once

// Shell profiles: cut points between overlapping shells, trimmed lengths,
// and polyline interference scans over a motion sweep.
//
// Shell k (1..6) is fixed to body node k (node 0 is the head tracer, node 3
// the apex) and extends toward -x over the segment ending at node k - 1. Its
// profile curves are given in the spread-state frame; in any other pose the
// shell moves rigidly with the frame whose x-axis runs from node k to node
// k - 1.

#include <pillbug/error.hpp>
#include <pillbug/geometry.hpp>
#include <pillbug/kin.hpp>
#include <pillbug/poly.hpp>
#include <pillbug/targetgen.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pillbug {

inline constexpr int kShells = 6;

enum class ShellSide { Upper, Lower };

inline std::string_view to_string(ShellSide side) noexcept {
    return side == ShellSide::Upper ? "upper" : "lower";
}

struct ShellCurve {
    Polynomial q;
    ShellSide side = ShellSide::Upper;
    int shell_index = 1;
};

inline ShellCurve make_shell_curve(int shell_index, ShellSide side, Polynomial q) {
    if (q.degree() != 2)
        throw Error(ErrorKind::InvalidInput,
                    "shell " + std::to_string(shell_index) + " profile must be quadratic");
    if (shell_index < 1 || shell_index > kShells)
        throw Error(ErrorKind::InvalidInput, "shell index out of range");
    return {std::move(q), side, shell_index};
}

/// Real intersections of two quadratic profiles, ordered by x.
inline std::vector<Vec2> intersect_conics(const ShellCurve& a, const ShellCurve& b) {
    const double d0 = a.q.coeff(0) - b.q.coeff(0);
    const double d1 = a.q.coeff(1) - b.q.coeff(1);
    const double d2 = a.q.coeff(2) - b.q.coeff(2);
    if (std::abs(d0) < 1e-12 && std::abs(d1) < 1e-12 && std::abs(d2) < 1e-12)
        throw Error(ErrorKind::IdenticalCurves, "shell curves coincide");

    std::vector<double> xs;
    if (d2 == 0.0) {
        if (d1 != 0.0)
            xs.push_back(-d0 / d1);
    } else {
        const double disc = d1 * d1 - 4.0 * d2 * d0;
        if (disc == 0.0) {
            xs.push_back(-d1 / (2.0 * d2));
        } else if (disc > 0.0) {
            // Cancellation-free pair of roots.
            const double q = -0.5 * (d1 + std::copysign(std::sqrt(disc), d1));
            xs.push_back(q / d2);
            if (q != 0.0)
                xs.push_back(d0 / q);
        }
    }
    std::sort(xs.begin(), xs.end());
    std::vector<Vec2> out;
    out.reserve(xs.size());
    for (double x : xs)
        out.push_back({x, a.q(x)});
    return out;
}

inline double shell_length(Vec2 anchor, Vec2 cut) { return distance(anchor, cut); }

/// Body node a shell is fixed to.
constexpr std::size_t shell_anchor_node(int shell_index) noexcept {
    return static_cast<std::size_t>(shell_index);
}

struct TrimOptions {
    double default_length = 70.0;
    /// Cut points farther than this from the trimmed shell's anchor are
    /// treated as outside the shells' working region.
    double max_reach = 140.0;
};

struct ShellCut {
    int lower_shell = 0; // shell k - 1, upper side
    int upper_shell = 0; // shell k, lower side
    Vec2 point;
};

struct TrimResult {
    std::map<int, double> lengths;
    std::vector<ShellCut> cuts;
};

namespace detail {

inline const ShellCurve* find_curve(const std::vector<ShellCurve>& curves, int shell,
                                    ShellSide side) {
    const ShellCurve* found = nullptr;
    for (const auto& c : curves) {
        if (c.shell_index == shell && c.side == side) {
            if (found)
                throw Error(ErrorKind::InvalidInput, "duplicate " + std::string(to_string(side)) +
                                                         " curve for shell " +
                                                         std::to_string(shell));
            found = &c;
        }
    }
    return found;
}

} // namespace detail

/// Cut where shell k's lower side meets shell k-1's upper side: the
/// intersection on the -x side of shell k's anchor, within reach, nearest
/// the anchor.
inline Vec2 cut_point(const ShellCurve& below_upper, const ShellCurve& above_lower, Vec2 anchor,
                      double max_reach) {
    std::optional<Vec2> best;
    for (const Vec2& p : intersect_conics(below_upper, above_lower)) {
        if (p.x >= anchor.x || distance(p, anchor) > max_reach)
            continue;
        if (!best || distance(p, anchor) < distance(*best, anchor))
            best = p;
    }
    if (!best)
        throw Error(ErrorKind::NoIntersection,
                    "shells (" + std::to_string(below_upper.shell_index) + "," +
                        std::to_string(above_lower.shell_index) + ") do not meet between anchors");
    return *best;
}

/// Longest non-interfering length for each shell whose lower side meets the
/// previous shell's upper side in the spread state; other shells get the
/// default length.
inline TrimResult trim_lengths(const TargetSet& targets, const std::vector<ShellCurve>& curves,
                               const TrimOptions& options = {}) {
    const auto& spread = targets.states[kStates - 1];
    TrimResult out;
    for (int k = 1; k <= kShells; ++k)
        out.lengths[k] = options.default_length;
    for (int k = 2; k <= kShells; ++k) {
        const ShellCurve* below = detail::find_curve(curves, k - 1, ShellSide::Upper);
        const ShellCurve* above = detail::find_curve(curves, k, ShellSide::Lower);
        if (!below || !above)
            continue;
        const Vec2 anchor = spread[shell_anchor_node(k)];
        const Vec2 cut = cut_point(*below, *above, anchor, options.max_reach);
        out.lengths[k] = shell_length(anchor, cut);
        out.cuts.push_back({k - 1, k, cut});
    }
    return out;
}

struct ShellSpec {
    int shell_index = 1;
    /// Anchor node position in the frame the profiles are written in.
    Vec2 anchor;
    double length = 70.0;
    /// Zero, one or two sides; a side without a profile is not scanned.
    std::vector<ShellCurve> profiles;
    /// Attachment frame in the profiles' coordinate system.
    Frame reference;
};

inline Frame node_frame(const std::array<Vec2, kBodyNodes>& nodes, int shell_index) {
    const std::size_t k = shell_anchor_node(shell_index);
    return {nodes[k], heading(nodes[k - 1] - nodes[k])};
}

/// Specs for all six shells against a reference pose of the body nodes.
inline std::vector<ShellSpec> make_shell_specs(const std::array<Vec2, kBodyNodes>& reference_nodes,
                                               const std::vector<ShellCurve>& curves,
                                               const std::map<int, double>& lengths) {
    std::vector<ShellSpec> specs;
    for (int k = 1; k <= kShells; ++k) {
        ShellSpec s;
        s.shell_index = k;
        s.reference = node_frame(reference_nodes, k);
        s.anchor = s.reference.origin;
        const auto it = lengths.find(k);
        s.length = it != lengths.end() ? it->second : TrimOptions{}.default_length;
        if (!(s.length > 0.0))
            throw Error(ErrorKind::InvalidInput, "shell " + std::to_string(k) + " length must be positive");
        for (ShellSide side : {ShellSide::Lower, ShellSide::Upper})
            if (const auto* c = detail::find_curve(curves, k, side))
                s.profiles.push_back(*c);
        specs.push_back(std::move(s));
    }
    return specs;
}

/// Polyline of one profile from the anchor's x toward -x, ending where the
/// profile is `length` away from the anchor; in the spec's local frame.
inline std::vector<Vec2> profile_polyline(const ShellSpec& spec, const ShellCurve& curve,
                                          std::size_t samples) {
    const Vec2 a = spec.anchor;
    const auto reach = [&](double x) { return distance({x, curve.q(x)}, a) - spec.length; };
    if (reach(a.x) >= 0.0)
        return {};
    const Polynomial dq = derivative(curve.q);
    const auto reach_slope = [&](double x) {
        const Vec2 d = Vec2{x, curve.q(x)} - a;
        const double n = norm(d);
        return n > 0.0 ? (d.x + d.y * dq(x)) / n : 0.0;
    };

    const double step = std::max(spec.length / 64.0, 1e-3);
    double x_end = a.x;
    for (double x = a.x - step;; x -= step) {
        if (reach(x) >= 0.0) {
            x_end = find_root_bracketed(reach, reach_slope, x, x + step);
            break;
        }
        if (a.x - x > 4.0 * spec.length)
            throw Error(ErrorKind::NoIntersection,
                        "shell " + std::to_string(spec.shell_index) + " profile never reaches its length");
    }

    std::vector<Vec2> out;
    out.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(samples - 1);
        const double x = a.x + t * (x_end - a.x);
        out.push_back(spec.reference.to_local({x, curve.q(x)}));
    }
    // Pin the free end exactly on the trim circle.
    out.back() = spec.reference.to_local({x_end, curve.q(x_end)});
    return out;
}

namespace detail {

inline int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    return (v > 0.0) - (v < 0.0);
}

inline bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    return distance(p, a + t * ab);
}

inline double point_polyline_distance(Vec2 p, const std::vector<Vec2>& line) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < line.size(); ++i)
        best = std::min(best, point_segment_distance(p, line[i], line[i + 1]));
    return best;
}

} // namespace detail

/// Closed-segment intersection test on orientation signs; collinear
/// overlaps count as intersecting.
inline bool segments_intersect(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    using detail::on_segment;
    using detail::orientation;
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 != o2 && o3 != o4)
        return true;
    return (o1 == 0 && on_segment(p1, p2, q1)) || (o2 == 0 && on_segment(p1, p2, q2)) ||
           (o3 == 0 && on_segment(q1, q2, p1)) || (o4 == 0 && on_segment(q1, q2, p2));
}

/// A representative contact point of two intersecting segments.
inline Vec2 segment_contact_point(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    const Vec2 r = p2 - p1;
    const Vec2 s = q2 - q1;
    const double denom = cross(r, s);
    if (denom != 0.0) {
        const double t = std::clamp(cross(q1 - p1, s) / denom, 0.0, 1.0);
        return p1 + t * r;
    }
    for (Vec2 c : {q1, q2})
        if (detail::on_segment(p1, p2, c))
            return c;
    return p1;
}

struct Collision {
    int shell_a = 0;
    int shell_b = 0;
    double depth_mm = 0.0;
};

struct StepInterference {
    std::size_t step = 0;
    double s = 0.0;
    std::vector<Collision> collisions;

    bool passed() const noexcept { return collisions.empty(); }
};

struct InterferenceReport {
    std::vector<StepInterference> steps;

    bool passed() const noexcept {
        return std::all_of(steps.begin(), steps.end(),
                           [](const StepInterference& s) { return s.passed(); });
    }

    bool has_pair(std::size_t step, int a, int b) const {
        for (const auto& c : steps.at(step).collisions)
            if (c.shell_a == a && c.shell_b == b)
                return true;
        return false;
    }
};

struct ScanOptions {
    std::size_t samples_per_shell = 64;
    /// Neighbouring shells may touch this close to a free end (the designed
    /// cut point) without it counting as interference.
    double contact_tolerance = 0.1;
};

namespace detail {

/// Penetration of polyline `a` past its first crossing with `b`, measured as
/// the farthest later vertex from `b`.
inline double penetration(const std::vector<Vec2>& a, std::size_t seg, const std::vector<Vec2>& b) {
    double depth = 0.0;
    for (std::size_t i = seg + 1; i < a.size(); ++i)
        depth = std::max(depth, point_polyline_distance(a[i], b));
    return depth;
}

inline std::optional<double> polyline_collision(const std::vector<Vec2>& a,
                                                const std::vector<Vec2>& b, bool adjacent,
                                                double contact_tolerance) {
    std::optional<double> worst;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) {
        for (std::size_t j = 0; j + 1 < b.size(); ++j) {
            if (!segments_intersect(a[i], a[i + 1], b[j], b[j + 1]))
                continue;
            if (adjacent) {
                const Vec2 p = segment_contact_point(a[i], a[i + 1], b[j], b[j + 1]);
                if (distance(p, a.back()) <= contact_tolerance ||
                    distance(p, b.back()) <= contact_tolerance)
                    continue;
            }
            const double depth = std::min(penetration(a, i, b), penetration(b, j, a));
            worst = std::max(worst.value_or(0.0), depth);
        }
    }
    return worst;
}

} // namespace detail

/// World-frame polylines of every profile of every shell at one pose.
inline std::vector<std::vector<std::vector<Vec2>>> place_shells(
    const std::vector<ShellSpec>& specs,
    const std::vector<std::vector<std::vector<Vec2>>>& local,
    const std::array<Vec2, kBodyNodes>& nodes) {
    std::vector<std::vector<std::vector<Vec2>>> world(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const Frame frame = node_frame(nodes, specs[k].shell_index);
        for (const auto& line : local[k]) {
            std::vector<Vec2> w;
            w.reserve(line.size());
            for (const Vec2& p : line)
                w.push_back(frame.to_world(p));
            world[k].push_back(std::move(w));
        }
    }
    return world;
}

inline std::vector<std::vector<std::vector<Vec2>>> local_outlines(
    const std::vector<ShellSpec>& specs, std::size_t samples) {
    std::vector<std::vector<std::vector<Vec2>>> local(specs.size());
    for (std::size_t k = 0; k < specs.size(); ++k)
        for (const auto& curve : specs[k].profiles)
            if (auto line = profile_polyline(specs[k], curve, samples); !line.empty())
                local[k].push_back(std::move(line));
    return local;
}

inline InterferenceReport scan_interference(const std::vector<ShellSpec>& specs,
                                            const std::vector<Configuration>& sweep,
                                            const ScanOptions& options = {}) {
    if (options.samples_per_shell < 8)
        throw Error(ErrorKind::InvalidInput, "at least 8 samples per shell are required");
    const auto local = local_outlines(specs, options.samples_per_shell);

    InterferenceReport report;
    for (std::size_t step = 0; step < sweep.size(); ++step) {
        StepInterference result;
        result.step = step;
        result.s = sweep[step].s;
        const auto world = place_shells(specs, local, sweep[step].body_nodes());
        for (std::size_t a = 0; a < specs.size(); ++a) {
            for (std::size_t b = a + 1; b < specs.size(); ++b) {
                const bool adjacent = std::abs(specs[a].shell_index - specs[b].shell_index) == 1;
                std::optional<double> worst;
                for (const auto& la : world[a])
                    for (const auto& lb : world[b])
                        if (auto d = detail::polyline_collision(la, lb, adjacent,
                                                                options.contact_tolerance))
                            worst = std::max(worst.value_or(0.0), *d);
                if (worst)
                    result.collisions.push_back(
                        {std::min(specs[a].shell_index, specs[b].shell_index),
                         std::max(specs[a].shell_index, specs[b].shell_index), *worst});
            }
        }
        report.steps.push_back(std::move(result));
    }
    return report;
}

} // namespace pillbug
