#pragma once

// Static SVG drawings of solved poses, targets and shells.

#include <pillbug/geometry.hpp>
#include <pillbug/io.hpp>
#include <pillbug/kin.hpp>
#include <pillbug/targetgen.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <string>
#include <vector>

namespace pillbug::svg {

inline constexpr std::array<const char*, kStates> kStateColours{"#1f77b4", "#ff7f0e", "#2ca02c"};

/// Accumulates primitives in mechanism coordinates (y up) and emits a
/// document whose viewBox fits them.
class Canvas {
public:
    void line(Vec2 a, Vec2 b, const std::string& style) {
        grow(a);
        grow(b);
        body_ += "<line x1=\"" + x(a) + "\" y1=\"" + y(a) + "\" x2=\"" + x(b) + "\" y2=\"" + y(b) +
                 "\" " + style + "/>\n";
    }

    void polyline(const std::vector<Vec2>& pts, const std::string& style) {
        if (pts.empty())
            return;
        std::string coords;
        for (const Vec2& p : pts) {
            grow(p);
            if (!coords.empty())
                coords += ' ';
            coords += x(p) + "," + y(p);
        }
        body_ += "<polyline points=\"" + coords + "\" fill=\"none\" " + style + "/>\n";
    }

    void circle(Vec2 c, double radius, const std::string& cls, const std::string& style) {
        grow(c);
        body_ += "<circle class=\"" + cls + "\" cx=\"" + x(c) + "\" cy=\"" + y(c) + "\" r=\"" +
                 io::fmt(radius) + "\" " + style + "/>\n";
    }

    void text(Vec2 at, const std::string& content) {
        grow(at);
        body_ += "<text x=\"" + x(at) + "\" y=\"" + y(at) +
                 "\" font-family=\"sans-serif\" font-size=\"8\">" + content + "</text>\n";
    }

    std::string document(double margin = 15.0) const {
        const double w = hi_.x - lo_.x + 2 * margin;
        const double h = hi_.y - lo_.y + 2 * margin;
        return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
               "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" +
               io::fmt(lo_.x - margin) + " " + io::fmt(-hi_.y - margin) + " " + io::fmt(w) + " " +
               io::fmt(h) + "\" width=\"" + io::fmt(3 * w) + "\" height=\"" + io::fmt(3 * h) +
               "\">\n" + body_ + "</svg>\n";
    }

private:
    static std::string x(Vec2 p) { return io::fmt(p.x); }
    static std::string y(Vec2 p) { return io::fmt(-p.y); }

    void grow(Vec2 p) {
        lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
        hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
    }

    std::string body_;
    Vec2 lo_{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    Vec2 hi_{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
};

inline void draw_targets(Canvas& c, const TargetSet& t, std::size_t state) {
    for (const Vec2& p : t.states[state])
        c.circle(p, 2.0, "target", std::string("fill=\"") + kStateColours[state] + "\"");
}

inline void draw_pose(Canvas& c, const MechanismParams& m, const Configuration& pose,
                      const char* colour) {
    const std::string link = std::string("stroke=\"") + colour + "\" stroke-width=\"1.2\"";
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = m.units[i];
        const auto& p = pose.units[i];
        const Vec2 slider = slider_point(m, i, pose.s);
        const Vec2 elbow = slider + u.L1 * unit(p.alpha);
        c.line({slider.x - 8, u.rail_y}, {slider.x + 8, u.rail_y},
               "stroke=\"#999\" stroke-dasharray=\"2,2\"");
        c.line(slider, elbow, link);
        c.line(elbow, p.tracer, link);
        c.line({p.coupler_x, u.rail_y}, p.tracer, link + " stroke-dasharray=\"4,2\"");
        c.circle(slider, 1.5, "slider", "fill=\"#444\"");
    }
    const auto nodes = pose.body_nodes();
    c.polyline({nodes.begin(), nodes.end()}, std::string("stroke=\"") + colour +
                                                 "\" stroke-width=\"2.5\"");
    for (const Vec2& n : nodes)
        c.circle(n, 1.2, "joint", "fill=\"#000\"");
}

inline std::string render_state(const MechanismParams& m, const Configuration& pose,
                                const TargetSet& targets, std::size_t state) {
    Canvas c;
    draw_pose(c, m, pose, kStateColours[state]);
    draw_targets(c, targets, state);
    c.text({-20.0, 20.0}, "state " + std::to_string(state + 1) + ", s = " + io::fmt(pose.s));
    return c.document();
}

/// All three body curves with every target.
inline std::string render_overlay(const std::array<Configuration, kStates>& poses,
                                  const TargetSet& targets) {
    Canvas c;
    for (std::size_t j = 0; j < kStates; ++j) {
        const auto nodes = poses[j].body_nodes();
        c.polyline({nodes.begin(), nodes.end()},
                   std::string("stroke=\"") + kStateColours[j] + "\" stroke-width=\"2\"");
    }
    for (std::size_t j = 0; j < kStates; ++j)
        draw_targets(c, targets, j);
    return c.document();
}

} // namespace pillbug::svg
