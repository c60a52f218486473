#pragma once

// Project file for the command-line tool. See config/paper.config for a
// complete example.

#include <pillbug/io.hpp>
#include <pillbug/kin.hpp>
#include <pillbug/shell.hpp>
#include <pillbug/synth.hpp>
#include <pillbug/targetgen.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pillbug::app {

using io::json;

struct CurveSource {
    std::optional<Polynomial> coeffs;
    std::optional<std::filesystem::path> samples;
    std::size_t degree = 6;
    ApexWindow window{};
};

/// Slider scales to sweep; unset ends follow the mechanism's schedule.
struct SweepRange {
    std::optional<double> from;
    std::optional<double> to;
    int steps = 50;
};

struct ProjectConfig {
    std::filesystem::path base_dir;
    std::array<CurveSource, kStates> curves{};
    double normalization_scale = 1.0;
    /// Apex-normalized curves given directly; replaces fit + normalize.
    std::optional<std::array<Polynomial, kStates>> normalized;
    double r = 50.0;

    SynthesisBounds bounds{};
    GaOptions ga{};
    PolishOptions polish{};

    std::optional<MechanismParams> mechanism;
    std::array<double, kUnits> verify_tolerance{};

    std::vector<ShellCurve> shell_curves;
    TrimOptions trim{};
    std::size_t scan_samples = 64;
    double length_scale = 1.0;

    SweepRange sweep{};
    std::filesystem::path output_dir = "out";
};

namespace detail {

inline Polynomial coeffs_field(const json& j) {
    if (j.contains("coeffs_highest_first"))
        return Polynomial::from_highest_first(j["coeffs_highest_first"].get<std::vector<double>>());
    return io::polynomial_from_json(j);
}

inline ShellSide side_from(const std::string& s) {
    if (s == "upper")
        return ShellSide::Upper;
    if (s == "lower")
        return ShellSide::Lower;
    throw Error(ErrorKind::InvalidInput, "shell side must be 'upper' or 'lower', got '" + s + "'");
}

} // namespace detail

inline void validate(const ProjectConfig& c) {
    if (!(c.r > 0.0))
        throw Error(ErrorKind::InvalidInput, "config: r must be positive");
    if (!(c.normalization_scale > 0.0))
        throw Error(ErrorKind::InvalidInput, "config: normalization_scale must be positive");
    if (c.sweep.steps < 2)
        throw Error(ErrorKind::InvalidInput, "config: sweep.steps must be at least 2");
    if (c.ga.population < 10 || c.ga.generations < 1)
        throw Error(ErrorKind::InvalidInput, "config: GA needs population >= 10 and generations >= 1");
    if (c.scan_samples < 8)
        throw Error(ErrorKind::InvalidInput, "config: shells.samples must be at least 8");
    if (!(c.length_scale > 0.0))
        throw Error(ErrorKind::InvalidInput, "config: shells.length_scale must be positive");
    for (double t : c.verify_tolerance)
        if (!(t > 0.0))
            throw Error(ErrorKind::InvalidInput, "config: verify tolerances must be positive");
    if (!c.normalized)
        for (std::size_t j = 0; j < kStates; ++j)
            if (!c.curves[j].coeffs && !c.curves[j].samples)
                throw Error(ErrorKind::InvalidInput,
                            "config: curve " + std::to_string(j + 1) + " has no coefficients or samples");
}

inline ProjectConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
    return io::guarded("config", [&] {
        ProjectConfig c;
        c.base_dir = base_dir;
        c.r = j.value("r", c.r);
        c.normalization_scale = j.value("normalization_scale", c.normalization_scale);

        if (j.contains("curves")) {
            const auto& curves = j["curves"];
            if (curves.size() != kStates)
                throw Error(ErrorKind::InvalidInput, "config: expected 3 curves");
            for (std::size_t s = 0; s < kStates; ++s) {
                const auto& jc = curves[s];
                auto& src = c.curves[s];
                if (jc.contains("samples")) {
                    src.samples = base_dir / jc["samples"].get<std::string>();
                    src.degree = jc.value("degree", src.degree);
                } else {
                    src.coeffs = detail::coeffs_field(jc);
                }
                if (jc.contains("apex_window")) {
                    const auto w = jc["apex_window"].get<std::array<double, 2>>();
                    src.window = {w[0], w[1]};
                }
            }
        }
        if (j.contains("normalized_curves")) {
            const auto& nc = j["normalized_curves"];
            if (nc.size() != kStates)
                throw Error(ErrorKind::InvalidInput, "config: expected 3 normalized curves");
            std::array<Polynomial, kStates> polys;
            for (std::size_t s = 0; s < kStates; ++s)
                polys[s] = detail::coeffs_field(nc[s]);
            c.normalized = polys;
        }

        if (j.contains("synthesis")) {
            const auto& js = j["synthesis"];
            c.ga.population = js.value("population", c.ga.population);
            c.ga.generations = js.value("generations", c.ga.generations);
            c.ga.seed = js.value("seed", c.ga.seed);
            c.ga.tie_constraints = js.value("tie_constraints", c.ga.tie_constraints);
            c.ga.rank1 = js.value("rank1", c.ga.rank1);
            c.polish.max_rounds = js.value("polish_rounds", c.polish.max_rounds);
            if (js.contains("bounds")) {
                const auto& b = js["bounds"];
                const auto range = [&](const char* key, double& lo, double& hi) {
                    if (b.contains(key)) {
                        const auto v = b[key].get<std::array<double, 2>>();
                        lo = v[0];
                        hi = v[1];
                    }
                };
                range("length", c.bounds.length_min, c.bounds.length_max);
                range("weight", c.bounds.weight_min, c.bounds.weight_max);
                range("rail_y", c.bounds.rail_min, c.bounds.rail_max);
                range("scale", c.bounds.scale_min, c.bounds.scale_max);
                range("anchor", c.bounds.anchor_min, c.bounds.anchor_max);
            }
        }

        if (j.contains("mechanism"))
            c.mechanism = io::mechanism_from_json(j["mechanism"]);

        c.verify_tolerance.fill(1e-3);
        if (j.contains("verify_tolerance")) {
            const auto& t = j["verify_tolerance"];
            if (t.is_array())
                c.verify_tolerance = t.get<std::array<double, kUnits>>();
            else
                c.verify_tolerance.fill(t.get<double>());
        }

        if (j.contains("shells")) {
            const auto& sh = j["shells"];
            if (sh.contains("curves"))
                for (const auto& jc : sh["curves"])
                    c.shell_curves.push_back(make_shell_curve(jc.at("shell").get<int>(),
                                                              detail::side_from(jc.at("side").get<std::string>()),
                                                              detail::coeffs_field(jc)));
            c.trim.default_length = sh.value("default_length", c.trim.default_length);
            c.trim.max_reach = sh.value("max_reach", c.trim.max_reach);
            c.scan_samples = sh.value("samples", c.scan_samples);
            c.length_scale = sh.value("length_scale", c.length_scale);
        }

        if (j.contains("sweep")) {
            const auto& sw = j["sweep"];
            if (sw.contains("from"))
                c.sweep.from = sw["from"].get<double>();
            if (sw.contains("to"))
                c.sweep.to = sw["to"].get<double>();
            c.sweep.steps = sw.value("steps", c.sweep.steps);
        }

        c.output_dir = j.value("output_dir", c.output_dir.string());
        return c;
    });
}

inline ProjectConfig load_config(const std::filesystem::path& path) {
    const json j = io::read_json(path);
    auto c = parse_config(j, path.has_parent_path() ? path.parent_path() : ".");
    validate(c);
    return c;
}

} // namespace pillbug::app
