#pragma once

// Kinematics of the loop-coupled slider-crank body.
//
// Six units, left to right. Unit i owns one slider on the rail y = rail_y,
// placed by the scissor schedule at x = s * w_i. Two chains hang from that
// slider and meet at the unit's tracer point D_i:
//   - a two-link dyad L1 (angle alpha) then L2 (angle beta);
//   - a single coupler link L3 (angle gamma) from the coupler slider at
//     (coupler_x, rail_y), which rides at the scheduled position.
// Consecutive tracer points, with the fixed apex node between units 3 and 4,
// are one body chord r apart.

#include <pillbug/error.hpp>
#include <pillbug/geometry.hpp>
#include <pillbug/targetgen.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace pillbug {

inline constexpr std::size_t kUnits = 6;
inline constexpr std::size_t kBodyNodes = kUnits + 1;

struct UnitParams {
    double L1 = 0.0;
    double L2 = 0.0;
    double L3 = 0.0;
    double rail_y = 0.0;
    /// Slider x for each synthesized state.
    std::array<double, kStates> anchor_x{};
};

/// Rank-1 slider schedule: slider i sits at s * w[i].
struct SliderSchedule {
    std::array<double, kUnits> w{};
    std::array<double, kStates> s{1.0, 1.0, 1.0};
};

struct MechanismParams {
    std::array<UnitParams, kUnits> units{};
    double r = 50.0;
    SliderSchedule schedule;
};

/// Target column tracked by unit i; the apex column is a passive node.
constexpr std::size_t unit_column(std::size_t unit) noexcept {
    return unit < kPointsPerSide ? unit : unit + 1;
}

/// Unit whose tracer is the inner body neighbour of `unit`, or nullopt when
/// the neighbour is the apex.
constexpr std::optional<std::size_t> inner_unit(std::size_t unit) noexcept {
    if (unit + 1 == kPointsPerSide || unit == kPointsPerSide)
        return std::nullopt;
    return unit < kPointsPerSide ? unit + 1 : unit - 1;
}

inline std::array<double, kUnits> slider_schedule(const std::array<double, kUnits>& w,
                                                  double s_state) {
    std::array<double, kUnits> out{};
    for (std::size_t i = 0; i < kUnits; ++i)
        out[i] = s_state * w[i];
    return out;
}

/// Least-squares rank-1 factorization of tabulated anchors, with s[0] = 1.
inline SliderSchedule fit_schedule(const std::array<UnitParams, kUnits>& units) {
    SliderSchedule out;
    double ww = 0.0;
    for (std::size_t i = 0; i < kUnits; ++i) {
        out.w[i] = units[i].anchor_x[0];
        ww += out.w[i] * out.w[i];
    }
    out.s[0] = 1.0;
    for (std::size_t j = 1; j < kStates; ++j) {
        double wx = 0.0;
        for (std::size_t i = 0; i < kUnits; ++i)
            wx += out.w[i] * units[i].anchor_x[j];
        out.s[j] = ww > 0.0 ? wx / ww : 1.0;
    }
    return out;
}

inline Vec2 slider_point(const MechanismParams& params, std::size_t unit, double s_state) {
    return {s_state * params.schedule.w[unit], params.units[unit].rail_y};
}

inline int grubler_dof(int n_units) {
    if (n_units < 1)
        throw Error(ErrorKind::InvalidInput, "unit count must be positive");
    const int moving_links = 3 * n_units;
    const int joints = 4 * n_units;
    return 3 * moving_links - 2 * joints;
}

inline Vec2 fk_two_link(Vec2 base, double L1, double L2, double alpha, double beta) {
    return base + L1 * unit(alpha) + L2 * unit(beta);
}

struct TwoLinkBranch {
    double alpha = 0.0;
    double beta = 0.0;
};

/// All dyad poses reaching `target`. Two branches inside the annulus, one on
/// its boundary, none outside. Branches are ordered with sin(beta - alpha)
/// non-negative first.
inline std::vector<TwoLinkBranch> ik_two_link(Vec2 base, double L1, double L2, Vec2 target) {
    const Vec2 d = target - base;
    const double dist = norm(d);
    const double reach_hi = L1 + L2;
    const double reach_lo = std::abs(L1 - L2);
    const double tol = 1e-12 * std::max(1.0, reach_hi);

    if (dist > reach_hi + tol || dist < reach_lo - tol)
        return {};
    if (dist <= tol) {
        // Coincident base and target with equal links: any alpha works.
        return {{0.0, std::numbers::pi}};
    }

    const double theta = heading(d);
    const double cos_phi =
        std::clamp((L1 * L1 + dist * dist - L2 * L2) / (2.0 * L1 * dist), -1.0, 1.0);
    const double phi = std::acos(cos_phi);
    const auto make = [&](double alpha) {
        const Vec2 elbow = base + L1 * unit(alpha);
        return TwoLinkBranch{alpha, heading(target - elbow)};
    };

    if (std::abs(dist - reach_hi) <= tol || std::abs(dist - reach_lo) <= tol || phi == 0.0)
        return {make(theta)};

    // alpha = theta - phi puts the elbow clockwise of the base-target line,
    // which gives sin(beta - alpha) > 0.
    return {make(theta - phi), make(theta + phi)};
}

/// Coupler slider positions on the rail from which a link of length L3 reaches
/// `target`.
inline std::vector<double> ik_coupler(Vec2 target, double L3, double rail_y) {
    const double dy = target.y - rail_y;
    const double tol = 1e-12 * std::max(1.0, L3);
    if (std::abs(dy) > L3 + tol)
        return {};
    const double h2 = L3 * L3 - dy * dy;
    if (std::abs(std::abs(dy) - L3) <= tol || h2 <= 0.0)
        return {target.x};
    const double h = std::sqrt(h2);
    return {target.x - h, target.x + h};
}

struct UnitPose {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    double coupler_x = 0.0;
    Vec2 tracer;
};

struct Configuration {
    double s = 1.0;
    std::array<UnitPose, kUnits> units{};

    /// Body chain, left to right: D1, D2, D3, apex, D4, D5, D6.
    std::array<Vec2, kBodyNodes> body_nodes() const {
        std::array<Vec2, kBodyNodes> nodes{};
        for (std::size_t i = 0; i < kUnits; ++i)
            nodes[unit_column(i)] = units[i].tracer;
        nodes[kApexColumn] = {0.0, 0.0};
        return nodes;
    }
};

inline constexpr std::size_t kUnknownsPerUnit = 6;
inline constexpr std::size_t kSystemSize = kUnits * kUnknownsPerUnit;

namespace detail {

inline Eigen::VectorXd pack(const Configuration& c) {
    Eigen::VectorXd x(kSystemSize);
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = c.units[i];
        const auto o = static_cast<Eigen::Index>(i * kUnknownsPerUnit);
        x.segment(o, 6) << u.alpha, u.beta, u.gamma, u.coupler_x, u.tracer.x, u.tracer.y;
    }
    return x;
}

inline Configuration unpack(const Eigen::VectorXd& x, double s) {
    Configuration c;
    c.s = s;
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto o = static_cast<Eigen::Index>(i * kUnknownsPerUnit);
        c.units[i] = {x(o), x(o + 1), x(o + 2), x(o + 3), {x(o + 4), x(o + 5)}};
    }
    return c;
}

inline Vec2 inner_node(const Configuration& c, std::size_t unit) {
    const auto inner = inner_unit(unit);
    return inner ? c.units[*inner].tracer : Vec2{0.0, 0.0};
}

} // namespace detail

/// Stacked closure residual, millimetres. Per unit: dyad closure (2), coupler
/// closure (2), coupler slider on schedule (1), body chord (1).
inline Eigen::VectorXd closure_residuals(const MechanismParams& params, const Configuration& c) {
    Eigen::VectorXd f(kSystemSize);
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& p = params.units[i];
        const auto& u = c.units[i];
        const Vec2 slider = slider_point(params, i, c.s);
        const Vec2 dyad = fk_two_link(slider, p.L1, p.L2, u.alpha, u.beta) - u.tracer;
        const Vec2 coupler = Vec2{u.coupler_x, p.rail_y} + p.L3 * unit(u.gamma) - u.tracer;
        const double chord = distance(u.tracer, detail::inner_node(c, i)) - params.r;
        const auto o = static_cast<Eigen::Index>(i * kUnknownsPerUnit);
        f.segment(o, 6) << dyad.x, dyad.y, coupler.x, coupler.y, u.coupler_x - slider.x, chord;
    }
    return f;
}

inline Eigen::MatrixXd closure_jacobian(const MechanismParams& params, const Configuration& c) {
    const auto n = static_cast<Eigen::Index>(kSystemSize);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& p = params.units[i];
        const auto& u = c.units[i];
        const auto o = static_cast<Eigen::Index>(i * kUnknownsPerUnit);
        // columns: alpha, beta, gamma, coupler_x, Dx, Dy
        J(o + 0, o + 0) = -p.L1 * std::sin(u.alpha);
        J(o + 1, o + 0) = p.L1 * std::cos(u.alpha);
        J(o + 0, o + 1) = -p.L2 * std::sin(u.beta);
        J(o + 1, o + 1) = p.L2 * std::cos(u.beta);
        J(o + 0, o + 4) = -1.0;
        J(o + 1, o + 5) = -1.0;

        J(o + 2, o + 2) = -p.L3 * std::sin(u.gamma);
        J(o + 3, o + 2) = p.L3 * std::cos(u.gamma);
        J(o + 2, o + 3) = 1.0;
        J(o + 2, o + 4) = -1.0;
        J(o + 3, o + 5) = -1.0;

        J(o + 4, o + 3) = 1.0;

        const Vec2 inner = detail::inner_node(c, i);
        const Vec2 d = u.tracer - inner;
        const double len = norm(d);
        const Vec2 g = len > 0.0 ? (1.0 / len) * d : Vec2{0.0, 0.0};
        J(o + 5, o + 4) = g.x;
        J(o + 5, o + 5) = g.y;
        if (const auto k = inner_unit(i)) {
            const auto ok = static_cast<Eigen::Index>(*k * kUnknownsPerUnit);
            J(o + 5, ok + 4) = -g.x;
            J(o + 5, ok + 5) = -g.y;
        }
    }
    return J;
}

/// Pose built from tracer guesses by closed-form IK on each chain. Used to
/// seed the Newton solve.
inline Configuration initial_guess(const MechanismParams& params, double s_state,
                                   const std::array<Vec2, kUnits>& tracers,
                                   std::size_t dyad_branch = 0) {
    Configuration c;
    c.s = s_state;
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& p = params.units[i];
        const Vec2 slider = slider_point(params, i, s_state);
        auto& u = c.units[i];
        u.tracer = tracers[i];
        u.coupler_x = slider.x;
        u.gamma = heading(tracers[i] - Vec2{slider.x, p.rail_y});
        const auto branches = ik_two_link(slider, p.L1, p.L2, tracers[i]);
        if (!branches.empty()) {
            const auto& b = branches[std::min(dyad_branch, branches.size() - 1)];
            u.alpha = b.alpha;
            u.beta = b.beta;
        } else {
            // Out of reach: stretch or fold the dyad toward the target.
            const double theta = heading(tracers[i] - slider);
            const bool too_far = distance(tracers[i], slider) > p.L1 + p.L2;
            u.alpha = theta;
            u.beta = too_far || p.L2 > p.L1 ? theta : theta + std::numbers::pi;
        }
    }
    return c;
}

/// Seed from the tracked columns of one target state.
inline Configuration initial_guess(const MechanismParams& params, double s_state,
                                   const TargetSet& targets, std::size_t state,
                                   std::size_t dyad_branch = 0) {
    std::array<Vec2, kUnits> tracers{};
    for (std::size_t i = 0; i < kUnits; ++i)
        tracers[i] = targets.point(state, unit_column(i));
    return initial_guess(params, s_state, tracers, dyad_branch);
}

inline constexpr double kClosureTolerance = 1e-9;

/// Index of the unit whose local block is closest to singular.
inline std::size_t most_singular_unit(const MechanismParams& params, const Configuration& c) {
    std::size_t worst = 0;
    double worst_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = c.units[i];
        const auto& p = params.units[i];
        // Dyad: sin(beta - alpha). Tracer: coupler link against body chord.
        const double dyad = std::abs(std::sin(u.beta - u.alpha));
        const Vec2 chord = u.tracer - detail::inner_node(c, i);
        const Vec2 link = u.tracer - Vec2{u.coupler_x, p.rail_y};
        const double n = norm(chord) * norm(link);
        const double tracer = n > 0.0 ? std::abs(cross(chord, link)) / n : 0.0;
        const double v = std::min(dyad, tracer);
        if (v < worst_value) {
            worst_value = v;
            worst = i;
        }
    }
    return worst;
}

/// Damped Newton solve of the stacked closure system at slider scale s_state.
inline Configuration solve_configuration(const MechanismParams& params, double s_state,
                                         const Configuration& guess, int max_iterations = 100) {
    Configuration c = guess;
    c.s = s_state;
    Eigen::VectorXd x = detail::pack(c);
    Eigen::VectorXd f = closure_residuals(params, c);
    double fnorm = f.norm();

    for (int iter = 0; iter < max_iterations; ++iter) {
        if (f.lpNorm<Eigen::Infinity>() < 1e-3 * kClosureTolerance)
            return c;

        const Eigen::MatrixXd J = closure_jacobian(params, c);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) {
            const auto unit_index = most_singular_unit(params, c);
            throw Error(ErrorKind::SingularJacobian,
                        "near-singular closure block at unit " + std::to_string(unit_index + 1) +
                            " (s = " + std::to_string(s_state) + ")");
        }
        const Eigen::VectorXd step = lu.solve(-f);

        double lambda = 1.0;
        for (int k = 0; k < 30; ++k, lambda *= 0.5) {
            const Eigen::VectorXd trial_x = x + lambda * step;
            const Configuration trial = detail::unpack(trial_x, s_state);
            const Eigen::VectorXd trial_f = closure_residuals(params, trial);
            const double trial_norm = trial_f.norm();
            if (std::isfinite(trial_norm) && (trial_norm < fnorm || k == 29)) {
                x = trial_x;
                c = trial;
                f = trial_f;
                fnorm = trial_norm;
                break;
            }
        }
    }
    if (f.lpNorm<Eigen::Infinity>() <= kClosureTolerance)
        return c;
    throw Error(ErrorKind::NonConvergence,
                "closure residual " + std::to_string(f.lpNorm<Eigen::Infinity>()) + " mm after " +
                    std::to_string(max_iterations) + " iterations (s = " + std::to_string(s_state) +
                    ")");
}

/// Solve at scale s seeded from the target state whose scheduled scale is
/// nearest s; the dyad branches are tried in order.
inline Configuration solve_near(const MechanismParams& params, const TargetSet& targets,
                                double s_state) {
    std::size_t state = 0;
    for (std::size_t j = 1; j < kStates; ++j)
        if (std::abs(params.schedule.s[j] - s_state) < std::abs(params.schedule.s[state] - s_state))
            state = j;
    std::optional<Error> first_error;
    for (std::size_t branch = 0; branch < 2; ++branch) {
        try {
            return solve_configuration(params, s_state,
                                       initial_guess(params, s_state, targets, state, branch));
        } catch (const Error& e) {
            if (!first_error)
                first_error = e;
        }
    }
    throw *first_error;
}

inline constexpr double kBranchJumpLimit = 0.5;

inline double max_angle_change(const Configuration& a, const Configuration& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = a.units[i];
        const auto& v = b.units[i];
        for (double d : {u.alpha - v.alpha, u.beta - v.beta, u.gamma - v.gamma})
            worst = std::max(worst, std::abs(wrap_angle(d)));
    }
    return worst;
}

/// Continuation in the slider scale. Each solve is seeded with the previous
/// pose; an angle jump of kBranchJumpLimit or more between neighbours is
/// reported as a branch change.
inline std::vector<Configuration> sweep(const MechanismParams& params, double s_from, double s_to,
                                        int steps, const Configuration& seed) {
    if (steps < 2)
        throw Error(ErrorKind::InvalidInput, "a sweep needs at least 2 steps");
    std::vector<Configuration> out;
    out.reserve(static_cast<std::size_t>(steps));
    Configuration prev = seed;
    for (int k = 0; k < steps; ++k) {
        const double s = k + 1 == steps ? s_to
                                        : s_from + (s_to - s_from) * static_cast<double>(k) /
                                                       static_cast<double>(steps - 1);
        Configuration next;
        try {
            next = solve_configuration(params, s, prev);
        } catch (const Error& e) {
            throw Error(e.kind(), "sweep step " + std::to_string(k) + ": " + e.message());
        }
        if (k > 0) {
            const double jump = max_angle_change(prev, next);
            if (jump >= kBranchJumpLimit)
                throw Error(ErrorKind::BranchJump, "angle change of " + std::to_string(jump) +
                                                       " rad at sweep step " + std::to_string(k));
        }
        out.push_back(next);
        prev = next;
    }
    return out;
}

} // namespace pillbug
