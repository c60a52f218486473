// pillbug: command-line driver for the body-mechanism design pipeline.
//
//   pillbug --config paper.config targets
//   pillbug --config paper.config --out run1 synth --seed 7
//
// Exit codes: 0 ok, 1 failed checks under --strict, 2 I/O or configuration
// error, 3 numerical failure.

#include "project_config.hpp"

#include <pillbug/io.hpp>
#include <pillbug/kin.hpp>
#include <pillbug/shell.hpp>
#include <pillbug/svg.hpp>
#include <pillbug/synth.hpp>
#include <pillbug/targetgen.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace pillbug;
using pillbug::app::ProjectConfig;
using pillbug::io::json;

namespace {

enum Exit { kOk = 0, kChecksFailed = 1, kIoError = 2, kNumericalError = 3 };

struct Globals {
    std::string config_path;
    std::string out_dir;
    bool strict = false;
    std::optional<std::uint64_t> seed;
    std::string params_path;
};

struct Context {
    ProjectConfig cfg;
    fs::path out;
    bool strict = false;

    fs::path path(const std::string& name) const { return out / name; }
};

// fit

struct CurveStage {
    std::array<NormalizedCurve, kStates> curves;
    json doc;
    std::string report_csv;
};

CurveStage run_curves(const Context& ctx) {
    CurveStage st;
    st.doc = {{"normalization_scale", ctx.cfg.normalization_scale}, {"curves", json::array()}};
    st.report_csv = "state,source,samples,degree,ssr\n";
    for (std::size_t j = 0; j < kStates; ++j) {
        const int idx = static_cast<int>(j) + 1;
        json entry = {{"state", idx}};
        if (ctx.cfg.normalized) {
            st.curves[j] = {(*ctx.cfg.normalized)[j], idx, {}};
            entry["source"] = "normalized";
            st.report_csv += std::to_string(idx) + ",normalized,0,0,0\n";
        } else {
            const auto& src = ctx.cfg.curves[j];
            Polynomial p;
            if (src.samples) {
                const SampleSet samples = io::read_samples_csv(*src.samples);
                const FitResult fit = fit_polynomial(samples, src.degree);
                p = fit.polynomial;
                entry["source"] = "samples";
                entry["ssr"] = fit.residual;
                st.report_csv += std::to_string(idx) + ",samples," +
                                 std::to_string(samples.points.size()) + "," +
                                 std::to_string(src.degree) + "," + io::fmt(fit.residual) + "\n";
            } else {
                p = *src.coeffs;
                entry["source"] = "coefficients";
                st.report_csv += std::to_string(idx) + ",coefficients,0," +
                                 std::to_string(p.degree()) + ",0\n";
            }
            const Vec2 apex = find_apex(p, src.window);
            st.curves[j] = normalize(p, apex, idx, ctx.cfg.normalization_scale);
            entry["fitted"] = io::to_json(p);
            entry["apex"] = {apex.x, apex.y};
        }
        entry["normalized"] = io::to_json(st.curves[j].f);
        st.doc["curves"].push_back(std::move(entry));
    }
    return st;
}

std::array<NormalizedCurve, kStates> load_curves(const Context& ctx) {
    const fs::path p = ctx.path("curves.json");
    if (!fs::exists(p))
        return run_curves(ctx).curves;
    const json doc = io::read_json(p);
    std::array<NormalizedCurve, kStates> out;
    io::guarded("curves.json", [&] {
        const auto& curves = doc.at("curves");
        if (curves.size() != kStates)
            throw Error(ErrorKind::InvalidInput, "curves.json: expected 3 curves");
        for (std::size_t j = 0; j < kStates; ++j)
            out[j] = {io::polynomial_from_json(curves[j].at("normalized")), static_cast<int>(j) + 1, {}};
        return 0;
    });
    return out;
}

int cmd_fit(const Context& ctx) {
    const CurveStage st = run_curves(ctx);
    io::write_json(ctx.path("curves.json"), st.doc);
    io::write_text(ctx.path("fit_report.csv"), st.report_csv);
    std::cout << st.report_csv;
    return kOk;
}

// targets

TargetSet compute_targets(const Context& ctx) { return build_target_set(load_curves(ctx), ctx.cfg.r); }

TargetSet load_targets(const Context& ctx) {
    const fs::path p = ctx.path("targets.json");
    if (fs::exists(p))
        return io::targets_from_json(io::read_json(p));
    return compute_targets(ctx);
}

int cmd_targets(const Context& ctx) {
    const TargetSet t = compute_targets(ctx);
    io::write_text(ctx.path("targets.csv"), io::targets_csv(t));
    io::write_json(ctx.path("targets.json"), io::to_json(t));
    for (std::size_t j = 0; j < kStates; ++j) {
        std::cout << "state " << j + 1 << ":";
        for (const Vec2& p : t.states[j]) {
            char buf[48];
            std::snprintf(buf, sizeof buf, " (%.4f, %.4f)", p.x, p.y);
            std::cout << buf;
        }
        std::cout << "\n";
    }
    return kOk;
}

// synth / verify

constexpr double kPipelineObjective = 1e-6;

int cmd_synth(const Context& ctx) {
    const TargetSet t = load_targets(ctx);
    const SynthesisReport report = synthesize(t, ctx.cfg.bounds, ctx.cfg.ga, ctx.cfg.polish);
    const MechanismParams m = to_mechanism(report.best);
    const auto stuck = motion_failure(m, t, ctx.cfg.sweep.steps);
    json doc = io::to_json(report);
    doc["motion"] = stuck ? *stuck : "ok";
    io::write_json(ctx.path("synth_report.json"), doc);
    io::write_json(ctx.path("mechanism.json"), io::to_json(m));
    std::cout << "objective " << io::fmt(report.objective_value) << " mm^2 (seed " << report.seed
              << ", " << report.generations_run << " generations)\n";
    std::cout << "motion between states: " << (stuck ? *stuck : "ok") << "\n";
    bool ok = true;
    if (!(report.objective_value <= kPipelineObjective)) {
        std::cerr << "objective above " << kPipelineObjective << " mm^2\n";
        ok = false;
    }
    if (stuck)
        ok = false;
    return ctx.strict && !ok ? kChecksFailed : kOk;
}

MechanismParams load_mechanism(const Context& ctx, const std::string& params_path) {
    if (!params_path.empty())
        return io::mechanism_from_json(io::read_json(params_path));
    if (const fs::path p = ctx.path("mechanism.json"); fs::exists(p))
        return io::mechanism_from_json(io::read_json(p));
    if (ctx.cfg.mechanism)
        return *ctx.cfg.mechanism;
    throw Error(ErrorKind::Io, "no mechanism: pass --params, run synth, or add one to the config");
}

int cmd_verify(const Context& ctx, const std::string& params_path) {
    const MechanismParams m = load_mechanism(ctx, params_path);
    const TargetSet t = load_targets(ctx);
    const VerificationReport v = verify_design(m, t, ctx.cfg.verify_tolerance);
    json doc = io::to_json(v, ctx.cfg.verify_tolerance[0]);
    doc["tolerance"] = ctx.cfg.verify_tolerance;
    io::write_json(ctx.path("verify.json"), doc);
    std::size_t failed = 0;
    for (const auto& c : v.checks)
        if (!c.passed()) {
            ++failed;
            std::cout << "unit " << c.unit + 1 << " state " << c.state + 1 << ": coupler deviation "
                      << io::fmt(c.coupler_deviation) << " mm, annulus deficit "
                      << io::fmt(c.annulus_deficit) << " mm\n";
        }
    std::cout << (v.passed() ? "verify passed" : "verify FAILED") << " (" << v.checks.size() - failed
              << "/" << v.checks.size() << " checks)\n";
    return ctx.strict && !v.passed() ? kChecksFailed : kOk;
}

// sweep

std::vector<Configuration> run_sweep(const Context& ctx, const MechanismParams& m, const TargetSet& t) {
    const double from = ctx.cfg.sweep.from.value_or(m.schedule.s.front());
    const double to = ctx.cfg.sweep.to.value_or(m.schedule.s.back());
    return sweep(m, from, to, ctx.cfg.sweep.steps, solve_near(m, t, from));
}

std::array<Configuration, kStates> solve_states(const MechanismParams& m, const TargetSet& t) {
    std::array<Configuration, kStates> out;
    for (std::size_t j = 0; j < kStates; ++j)
        out[j] = solve_near(m, t, m.schedule.s[j]);
    return out;
}

int cmd_sweep(const Context& ctx, const std::string& params_path) {
    const MechanismParams m = load_mechanism(ctx, params_path);
    const TargetSet t = load_targets(ctx);
    const auto steps = run_sweep(ctx, m, t);
    io::write_text(ctx.path("sweep.csv"), io::sweep_csv(steps));
    json all = json::array();
    double worst = 0.0;
    for (const auto& c : steps) {
        all.push_back(io::to_json(c));
        worst = std::max(worst, closure_residuals(m, c).lpNorm<Eigen::Infinity>());
    }
    io::write_json(ctx.path("sweep.json"), all);

    const auto states = solve_states(m, t);
    for (std::size_t j = 0; j < kStates; ++j) {
        const std::string stem = "state_" + std::to_string(j + 1);
        io::write_text(ctx.path(stem + ".csv"), io::configuration_csv(states[j]));
        io::write_json(ctx.path(stem + ".json"), io::to_json(states[j]));
        double err = 0.0;
        for (std::size_t i = 0; i < kUnits; ++i)
            err = std::max(err, distance(states[j].units[i].tracer, t.point(j, unit_column(i))));
        std::cout << "state " << j + 1 << " (s = " << io::fmt(m.schedule.s[j])
                  << "): worst tracer error " << io::fmt(err) << " mm\n";
    }
    std::cout << steps.size() << " sweep steps, worst closure residual " << io::fmt(worst) << " mm\n";
    return ctx.strict && worst > kClosureTolerance ? kChecksFailed : kOk;
}

// shells

int cmd_shells(const Context& ctx, const std::string& params_path) {
    if (ctx.cfg.shell_curves.empty())
        throw Error(ErrorKind::InvalidInput, "config: no shell curves");
    const MechanismParams m = load_mechanism(ctx, params_path);
    const TargetSet t = load_targets(ctx);
    const TrimResult trim = trim_lengths(t, ctx.cfg.shell_curves, ctx.cfg.trim);
    auto lengths = trim.lengths;
    for (auto& [k, len] : lengths)
        len *= ctx.cfg.length_scale;

    const auto states = solve_states(m, t);
    const auto specs = make_shell_specs(states[kStates - 1].body_nodes(), ctx.cfg.shell_curves, lengths);
    const ScanOptions scan{ctx.cfg.scan_samples};
    const auto at_states = scan_interference(specs, {states.begin(), states.end()}, scan);
    const auto along = scan_interference(specs, run_sweep(ctx, m, t), scan);

    json cuts = json::array();
    for (const auto& c : trim.cuts)
        cuts.push_back({{"pair", {c.lower_shell, c.upper_shell}}, {"point", {c.point.x, c.point.y}}});
    io::write_json(ctx.path("shells.json"), {{"cuts", std::move(cuts)}, {"shells", io::to_json(specs)}});
    io::write_text(ctx.path("interference_states.csv"), io::interference_csv(at_states));
    io::write_text(ctx.path("interference.csv"), io::interference_csv(along));

    for (const auto& s : specs)
        std::cout << "shell " << s.shell_index << ": length " << io::fmt(s.length) << " mm\n";
    std::cout << "states " << (at_states.passed() ? "clear" : "INTERFERE") << ", sweep "
              << (along.passed() ? "clear" : "INTERFERES") << "\n";
    return ctx.strict && !(at_states.passed() && along.passed()) ? kChecksFailed : kOk;
}

// render

int cmd_render(const Context& ctx, const std::string& params_path) {
    const MechanismParams m = load_mechanism(ctx, params_path);
    const TargetSet t = load_targets(ctx);
    const auto states = solve_states(m, t);
    for (std::size_t j = 0; j < kStates; ++j)
        io::write_text(ctx.path("state_" + std::to_string(j + 1) + ".svg"),
                       svg::render_state(m, states[j], t, j));
    io::write_text(ctx.path("overlay.svg"), svg::render_overlay(states, t));
    std::cout << "wrote " << kStates + 1 << " SVG files to " << ctx.out.string() << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Design pipeline for the pillbug body mechanism"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "project configuration (JSON)")->required();
    app.add_option("--out", g.out_dir, "output directory (overrides the config)");
    app.add_flag("--strict", g.strict, "exit 1 when a stage's checks fail");
    app.add_option("--seed", g.seed, "GA seed (overrides the config)");

    auto* fit = app.add_subcommand("fit", "fit or echo the profile curves and normalize them");
    auto* targets = app.add_subcommand("targets", "equal-chord body targets");
    auto* synth = app.add_subcommand("synth", "GA synthesis with local polish");
    auto* verify = app.add_subcommand("verify", "check a mechanism against the targets");
    auto* sweep_cmd = app.add_subcommand("sweep", "solve poses along the slider schedule");
    auto* shells = app.add_subcommand("shells", "shell trim lengths and interference scan");
    auto* render = app.add_subcommand("render", "SVG drawings of the three states");
    for (auto* sub : {verify, sweep_cmd, shells, render})
        sub->add_option("--params", g.params_path, "mechanism JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kIoError;
    }

    try {
        Context ctx;
        ctx.cfg = app::load_config(g.config_path);
        if (g.seed)
            ctx.cfg.ga.seed = *g.seed;
        ctx.out = g.out_dir.empty() ? ctx.cfg.output_dir : fs::path(g.out_dir);
        ctx.strict = g.strict;

        if (fit->parsed())
            return cmd_fit(ctx);
        if (targets->parsed())
            return cmd_targets(ctx);
        if (synth->parsed())
            return cmd_synth(ctx);
        if (verify->parsed())
            return cmd_verify(ctx, g.params_path);
        if (sweep_cmd->parsed())
            return cmd_sweep(ctx, g.params_path);
        if (shells->parsed())
            return cmd_shells(ctx, g.params_path);
        if (render->parsed())
            return cmd_render(ctx, g.params_path);
    } catch (const Error& e) {
        std::cerr << "pillbug: " << e.what() << "\n";
        return e.is_numerical() ? kNumericalError : kIoError;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "pillbug: " << e.what() << "\n";
        return kIoError;
    }
    return kOk;
}
