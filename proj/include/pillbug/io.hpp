#pragma once

// JSON and CSV forms of every pipeline artifact. Numbers are written in
// shortest round-trip form so reruns on the same inputs are byte-identical.

#include <pillbug/error.hpp>
#include <pillbug/kin.hpp>
#include <pillbug/poly.hpp>
#include <pillbug/shell.hpp>
#include <pillbug/synth.hpp>
#include <pillbug/targetgen.hpp>

#include <json.hpp>

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace pillbug::io {

using json = nlohmann::ordered_json;

inline std::string fmt(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    if (!out)
        throw Error(ErrorKind::Io, "write failed for " + path.string());
}

inline json read_json(const std::filesystem::path& path) {
    try {
        return json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Io, path.string() + ": " + e.what());
    }
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    write_text(path, j.dump(2) + "\n");
}

/// Runs a JSON field accessor, mapping type or key errors to InvalidInput.
template <class F>
auto guarded(std::string_view what, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::InvalidInput, std::string(what) + ": " + e.what());
    }
}

// polynomials and samples

inline json to_json(const Polynomial& p) {
    return {{"coeffs", std::vector<double>(p.coeffs().begin(), p.coeffs().end())}};
}

inline Polynomial polynomial_from_json(const json& j) {
    return guarded("polynomial", [&] {
        const auto c = j.at("coeffs").get<std::vector<double>>();
        if (c.empty())
            throw Error(ErrorKind::InvalidInput, "polynomial has no coefficients");
        return Polynomial(c);
    });
}

namespace detail {

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    for (auto& s : out) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' '))
            s.pop_back();
        while (!s.empty() && s.front() == ' ')
            s.erase(s.begin());
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw Error(ErrorKind::InvalidInput, where + ": '" + s + "' is not a number");
    return v;
}

} // namespace detail

inline SampleSet parse_samples_csv(std::string_view text, const std::string& name = "samples") {
    SampleSet out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cells = detail::split(line);
        if (cells.size() == 1 && cells[0].empty())
            continue;
        if (!header_seen) {
            header_seen = true;
            if (cells.size() == 2 && cells[0] == "x" && cells[1] == "y")
                continue;
            throw Error(ErrorKind::InvalidInput, name + ": expected header 'x,y'");
        }
        if (cells.size() != 2)
            throw Error(ErrorKind::InvalidInput,
                        name + ":" + std::to_string(lineno) + ": expected 2 columns");
        const std::string where = name + ":" + std::to_string(lineno);
        out.points.push_back({detail::parse_double(cells[0], where),
                              detail::parse_double(cells[1], where)});
    }
    return out;
}

inline SampleSet read_samples_csv(const std::filesystem::path& path) {
    return parse_samples_csv(read_text(path), path.string());
}

inline std::string samples_csv(const SampleSet& s) {
    std::string out = "x,y\n";
    for (const auto& p : s.points)
        out += fmt(p.x) + "," + fmt(p.y) + "\n";
    return out;
}

// targets

inline std::string targets_csv(const TargetSet& t) {
    std::string out = "state,k,x,y\n";
    for (std::size_t j = 0; j < kStates; ++j)
        for (std::size_t k = 0; k < kPointsPerState; ++k) {
            const Vec2 p = t.point(j, k);
            out += std::to_string(j + 1) + "," + std::to_string(k + 1) + "," + fmt(p.x) + "," +
                   fmt(p.y) + "\n";
        }
    return out;
}

/// One row per state, each row a list of [x, y] pairs left to right.
inline json to_json(const TargetSet& t) {
    json states = json::array();
    for (const auto& row : t.states) {
        json r = json::array();
        for (const Vec2& p : row)
            r.push_back({p.x, p.y});
        states.push_back(std::move(r));
    }
    return {{"r", t.r}, {"states", std::move(states)}};
}

inline TargetSet targets_from_json(const json& j) {
    return guarded("targets", [&] {
        TargetSet t;
        t.r = j.at("r").get<double>();
        const auto& states = j.at("states");
        if (states.size() != kStates)
            throw Error(ErrorKind::InvalidInput, "targets: expected 3 states");
        for (std::size_t s = 0; s < kStates; ++s) {
            if (states[s].size() != kPointsPerState)
                throw Error(ErrorKind::InvalidInput, "targets: expected 7 points per state");
            for (std::size_t k = 0; k < kPointsPerState; ++k)
                t.states[s][k] = {states[s][k].at(0).get<double>(), states[s][k].at(1).get<double>()};
        }
        return t;
    });
}

// mechanism

inline json to_json(const MechanismParams& m) {
    json units = json::array();
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = m.units[i];
        units.push_back({{"i", i + 1},
                         {"link1", u.L1},
                         {"link2", u.L2},
                         {"link3", u.L3},
                         {"xb", u.anchor_x},
                         {"yb", u.rail_y}});
    }
    return {{"r", m.r},
            {"units", std::move(units)},
            {"schedule", {{"w", m.schedule.w}, {"s", m.schedule.s}}}};
}

/// Reads tabulated unit parameters. Without a "schedule" object the slider
/// schedule is fitted to the tabulated slider positions.
inline MechanismParams mechanism_from_json(const json& j) {
    return guarded("mechanism", [&] {
        MechanismParams m;
        m.r = j.value("r", 50.0);
        const auto& units = j.at("units");
        if (units.size() != kUnits)
            throw Error(ErrorKind::InvalidInput, "mechanism: expected 6 units");
        for (std::size_t i = 0; i < kUnits; ++i) {
            auto& u = m.units[i];
            const auto& ju = units[i];
            u.L1 = ju.at("link1").get<double>();
            u.L2 = ju.value("link2", m.r);
            u.L3 = ju.at("link3").get<double>();
            u.anchor_x = ju.at("xb").get<std::array<double, kStates>>();
            u.rail_y = ju.at("yb").get<double>();
        }
        if (j.contains("schedule")) {
            m.schedule.w = j["schedule"].at("w").get<std::array<double, kUnits>>();
            m.schedule.s = j["schedule"].at("s").get<std::array<double, kStates>>();
        } else {
            m.schedule = fit_schedule(m.units);
        }
        return m;
    });
}

// configurations

inline std::string configuration_csv(const Configuration& c) {
    std::string out = "unit,alpha,beta,gamma,coupler_x,Dx,Dy\n";
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = c.units[i];
        out += std::to_string(i + 1) + "," + fmt(u.alpha) + "," + fmt(u.beta) + "," +
               fmt(u.gamma) + "," + fmt(u.coupler_x) + "," + fmt(u.tracer.x) + "," +
               fmt(u.tracer.y) + "\n";
    }
    return out;
}

/// Sweep rows grouped by unit, in step order within each group.
inline std::string sweep_csv(const std::vector<Configuration>& steps) {
    std::string out = "unit,step,s,alpha,beta,gamma,coupler_x,Dx,Dy\n";
    for (std::size_t i = 0; i < kUnits; ++i)
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const auto& u = steps[k].units[i];
            out += std::to_string(i + 1) + "," + std::to_string(k) + "," + fmt(steps[k].s) + "," +
                   fmt(u.alpha) + "," + fmt(u.beta) + "," + fmt(u.gamma) + "," +
                   fmt(u.coupler_x) + "," + fmt(u.tracer.x) + "," + fmt(u.tracer.y) + "\n";
        }
    return out;
}

inline json to_json(const Configuration& c) {
    json units = json::array();
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = c.units[i];
        units.push_back({{"unit", i + 1},
                         {"alpha", u.alpha},
                         {"beta", u.beta},
                         {"gamma", u.gamma},
                         {"coupler_x", u.coupler_x},
                         {"Dx", u.tracer.x},
                         {"Dy", u.tracer.y}});
    }
    return {{"s", c.s}, {"units", std::move(units)}};
}

inline Configuration configuration_from_json(const json& j) {
    return guarded("configuration", [&] {
        Configuration c;
        c.s = j.at("s").get<double>();
        const auto& units = j.at("units");
        if (units.size() != kUnits)
            throw Error(ErrorKind::InvalidInput, "configuration: expected 6 units");
        for (std::size_t i = 0; i < kUnits; ++i) {
            auto& u = c.units[i];
            u.alpha = units[i].at("alpha").get<double>();
            u.beta = units[i].at("beta").get<double>();
            u.gamma = units[i].at("gamma").get<double>();
            u.coupler_x = units[i].at("coupler_x").get<double>();
            u.tracer = {units[i].at("Dx").get<double>(), units[i].at("Dy").get<double>()};
        }
        return c;
    });
}

// synthesis

inline json to_json(const SynthesisReport& r) {
    const MechanismParams m = to_mechanism(r.best);
    json residuals = json::array();
    for (std::size_t i = 0; i < kUnits; ++i)
        for (std::size_t j = 0; j < kStates; ++j)
            residuals.push_back(
                {{"unit", i + 1}, {"state", j + 1}, {"residual", r.residuals[i * kStates + j]}});
    return {{"seed", r.seed},
            {"generations_run", r.generations_run},
            {"objective_value", r.objective_value},
            {"tie_constraints", r.best.tie_constraints},
            {"rank1", !r.best.free_anchors.has_value()},
            {"mechanism", to_json(m)},
            {"residuals", std::move(residuals)}};
}

inline json to_json(const VerificationReport& v, double tolerance) {
    json checks = json::array();
    for (const auto& c : v.checks)
        checks.push_back({{"unit", c.unit + 1},
                          {"state", c.state + 1},
                          {"annulus_deficit", c.annulus_deficit},
                          {"coupler_deviation", c.coupler_deviation},
                          {"dyad_branches", c.dyad_branches},
                          {"coupler_solutions", c.coupler_solutions},
                          {"passed", c.passed()}});
    return {{"tolerance", tolerance}, {"passed", v.passed()}, {"checks", std::move(checks)}};
}

// shells

inline json to_json(const ShellSpec& s) {
    json profiles = json::array();
    for (const auto& c : s.profiles)
        profiles.push_back({{"side", std::string(to_string(c.side))},
                            {"coeffs", to_json(c.q)["coeffs"]}});
    return {{"shell", s.shell_index},
            {"anchor", {s.anchor.x, s.anchor.y}},
            {"length", s.length},
            {"frame_angle", s.reference.angle},
            {"profiles", std::move(profiles)}};
}

inline json to_json(const std::vector<ShellSpec>& specs) {
    json out = json::array();
    for (const auto& s : specs)
        out.push_back(to_json(s));
    return out;
}

inline std::string interference_csv(const InterferenceReport& r) {
    std::string out = "step,s,pair,depth_mm\n";
    for (const auto& step : r.steps)
        for (const auto& c : step.collisions)
            out += std::to_string(step.step) + "," + fmt(step.s) + "," +
                   std::to_string(c.shell_a) + "-" + std::to_string(c.shell_b) + "," +
                   fmt(c.depth_mm) + "\n";
    return out;
}

} // namespace pillbug::io
