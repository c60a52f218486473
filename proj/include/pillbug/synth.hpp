#pragma once

// Dimensional synthesis of the body mechanism against a target set.
//
// The chain angles are eliminated in closed form: for a slider B and a
// target D, the dyad (L1, L2) reaches D iff |D - B| lies in the annulus
// [|L1 - L2|, L1 + L2], and the coupler link reaches D from its scheduled
// slider iff |D - B| = L3. What remains to search over is link lengths, rail
// heights and the slider schedule.

#include <pillbug/error.hpp>
#include <pillbug/geometry.hpp>
#include <pillbug/kin.hpp>
#include <pillbug/targetgen.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace pillbug {

inline constexpr std::size_t kResiduals = kUnits * kStates;

struct UnitDesign {
    double L1 = 50.0;
    double L3 = 50.0;
    double w = 0.0; // schedule weight, mm
    double rail_y = -60.0;
};

using AnchorTable = std::array<std::array<double, kStates>, kUnits>;

struct DesignVector {
    std::array<UnitDesign, kUnits> units{};
    double s2 = 2.0;
    double s3 = 4.0;
    double r = 50.0; // L2 of every unit
    bool tie_constraints = true;
    /// Per-state slider positions when the rank-1 schedule is switched off.
    std::optional<AnchorTable> free_anchors;

    double scale(std::size_t state) const { return state == 0 ? 1.0 : state == 1 ? s2 : s3; }

    double anchor_x(std::size_t unit, std::size_t state) const {
        return free_anchors ? (*free_anchors)[unit][state] : scale(state) * units[unit].w;
    }
};

/// Shared links: the coupler of unit k is the first dyad link of the unit
/// whose inner neighbour is k.
inline void apply_ties(DesignVector& d) {
    if (!d.tie_constraints)
        return;
    for (std::size_t i = 0; i < kUnits; ++i)
        if (const auto k = inner_unit(i))
            d.units[*k].L3 = d.units[i].L1;
}

inline MechanismParams to_mechanism(const DesignVector& d) {
    MechanismParams m;
    m.r = d.r;
    for (std::size_t i = 0; i < kUnits; ++i) {
        auto& u = m.units[i];
        u.L1 = d.units[i].L1;
        u.L2 = d.r;
        u.L3 = d.units[i].L3;
        u.rail_y = d.units[i].rail_y;
        for (std::size_t j = 0; j < kStates; ++j)
            u.anchor_x[j] = d.anchor_x(i, j);
    }
    if (d.free_anchors) {
        m.schedule = fit_schedule(m.units);
    } else {
        for (std::size_t i = 0; i < kUnits; ++i)
            m.schedule.w[i] = d.units[i].w;
        m.schedule.s = {1.0, d.s2, d.s3};
    }
    return m;
}

/// Design that uses the tabulated per-state anchors verbatim.
inline DesignVector from_mechanism(const MechanismParams& m, bool rank1) {
    DesignVector d;
    d.r = m.r;
    d.tie_constraints = false;
    AnchorTable anchors{};
    for (std::size_t i = 0; i < kUnits; ++i) {
        d.units[i] = {m.units[i].L1, m.units[i].L3, m.schedule.w[i], m.units[i].rail_y};
        anchors[i] = m.units[i].anchor_x;
    }
    d.s2 = m.schedule.s[1];
    d.s3 = m.schedule.s[2];
    if (!rank1)
        d.free_anchors = anchors;
    return d;
}

/// Residual of one unit in one state: the dyad's distance to its reachable
/// annulus and the coupler link's length mismatch.
struct TermParts {
    double annulus = 0.0;
    double coupler = 0.0;
};

inline TermParts residual_parts(const DesignVector& d, const TargetSet& targets, std::size_t unit,
                                std::size_t state) {
    const auto& u = d.units[unit];
    const Vec2 target = targets.point(state, unit_column(unit));
    const Vec2 slider{d.anchor_x(unit, state), u.rail_y};
    const double dist = distance(target, slider);
    const double lo = std::abs(u.L1 - d.r);
    const double hi = u.L1 + d.r;
    return {std::clamp(dist, lo, hi) - dist, dist - u.L3};
}

/// Per unit and state (unit-major) root of the squared residual contribution.
inline std::array<double, kResiduals> objective_terms(const DesignVector& d,
                                                      const TargetSet& targets) {
    std::array<double, kResiduals> out{};
    for (std::size_t i = 0; i < kUnits; ++i)
        for (std::size_t j = 0; j < kStates; ++j) {
            const auto p = residual_parts(d, targets, i, j);
            out[i * kStates + j] = std::hypot(p.annulus, p.coupler);
        }
    return out;
}

/// Sum over units and states of squared residuals, mm^2.
inline double objective(const DesignVector& d, const TargetSet& targets) {
    double total = 0.0;
    for (std::size_t i = 0; i < kUnits; ++i)
        for (std::size_t j = 0; j < kStates; ++j) {
            const auto p = residual_parts(d, targets, i, j);
            total += p.annulus * p.annulus + p.coupler * p.coupler;
        }
    return total;
}

struct SynthesisBounds {
    double length_min = 20.0;
    double length_max = 80.0;
    double weight_min = -80.0;
    double weight_max = 80.0;
    double rail_min = -100.0;
    double rail_max = -20.0;
    double scale_min = 1.05;
    double scale_max = 6.0;
    double anchor_min = -200.0;
    double anchor_max = 200.0;
};

/// Flat gene view of a DesignVector: only free variables get a gene; tied
/// lengths and the fixed chord are rebuilt on decode.
class DesignCodec {
public:
    enum class Field { L1, L3, Weight, Rail, S2, S3, Anchor };

    struct Gene {
        Field field;
        std::size_t unit = 0;
        std::size_t state = 0;
        double lo = 0.0;
        double hi = 0.0;
    };

    DesignCodec(const SynthesisBounds& bounds, bool tie_constraints, bool rank1, double r)
        : tie_constraints_(tie_constraints), rank1_(rank1), r_(r) {
        std::array<bool, kUnits> tied_l3{};
        if (tie_constraints)
            for (std::size_t i = 0; i < kUnits; ++i)
                if (const auto k = inner_unit(i))
                    tied_l3[*k] = true;
        for (std::size_t i = 0; i < kUnits; ++i) {
            genes_.push_back({Field::L1, i, 0, bounds.length_min, bounds.length_max});
            if (!tied_l3[i])
                genes_.push_back({Field::L3, i, 0, bounds.length_min, bounds.length_max});
            genes_.push_back({Field::Rail, i, 0, bounds.rail_min, bounds.rail_max});
            if (rank1) {
                genes_.push_back({Field::Weight, i, 0, bounds.weight_min, bounds.weight_max});
            } else {
                for (std::size_t j = 0; j < kStates; ++j)
                    genes_.push_back({Field::Anchor, i, j, bounds.anchor_min, bounds.anchor_max});
            }
        }
        if (rank1) {
            genes_.push_back({Field::S2, 0, 0, bounds.scale_min, bounds.scale_max});
            genes_.push_back({Field::S3, 0, 0, bounds.scale_min, bounds.scale_max});
        }
    }

    std::size_t size() const noexcept { return genes_.size(); }
    const std::vector<Gene>& genes() const noexcept { return genes_; }
    bool tie_constraints() const noexcept { return tie_constraints_; }
    bool rank1() const noexcept { return rank1_; }

    std::vector<double> encode(const DesignVector& d) const {
        std::vector<double> g;
        g.reserve(genes_.size());
        for (const auto& gene : genes_) {
            const auto& u = d.units[gene.unit];
            switch (gene.field) {
            case Field::L1: g.push_back(u.L1); break;
            case Field::L3: g.push_back(u.L3); break;
            case Field::Weight: g.push_back(u.w); break;
            case Field::Rail: g.push_back(u.rail_y); break;
            case Field::S2: g.push_back(d.s2); break;
            case Field::S3: g.push_back(d.s3); break;
            case Field::Anchor: g.push_back(d.anchor_x(gene.unit, gene.state)); break;
            }
        }
        repair(g);
        return g;
    }

    /// Clamps into bounds and keeps s2 < s3.
    void repair(std::vector<double>& g) const {
        std::size_t s2 = genes_.size(), s3 = genes_.size();
        for (std::size_t k = 0; k < genes_.size(); ++k) {
            g[k] = std::clamp(g[k], genes_[k].lo, genes_[k].hi);
            if (genes_[k].field == Field::S2)
                s2 = k;
            if (genes_[k].field == Field::S3)
                s3 = k;
        }
        if (s2 < g.size() && s3 < g.size() && g[s3] < g[s2])
            std::swap(g[s2], g[s3]);
    }

    DesignVector decode(const std::vector<double>& g) const {
        DesignVector d;
        d.r = r_;
        d.tie_constraints = tie_constraints_;
        if (!rank1_) {
            d.free_anchors = AnchorTable{};
            d.s2 = d.s3 = 1.0;
        }
        for (std::size_t k = 0; k < genes_.size(); ++k) {
            const auto& gene = genes_[k];
            auto& u = d.units[gene.unit];
            switch (gene.field) {
            case Field::L1: u.L1 = g[k]; break;
            case Field::L3: u.L3 = g[k]; break;
            case Field::Weight: u.w = g[k]; break;
            case Field::Rail: u.rail_y = g[k]; break;
            case Field::S2: d.s2 = g[k]; break;
            case Field::S3: d.s3 = g[k]; break;
            case Field::Anchor: (*d.free_anchors)[gene.unit][gene.state] = g[k]; break;
            }
        }
        if (!rank1_)
            for (std::size_t i = 0; i < kUnits; ++i)
                d.units[i].w = (*d.free_anchors)[i][0];
        apply_ties(d);
        return d;
    }

private:
    std::vector<Gene> genes_;
    bool tie_constraints_;
    bool rank1_;
    double r_;
};

struct GaOptions {
    std::size_t population = 200;
    std::size_t generations = 500;
    std::uint64_t seed = 1;
    bool tie_constraints = true;
    bool rank1 = true;
    std::size_t tournament = 3;
    double blend_alpha = 0.5;
    double mutation_rate = 0.1;
    double mutation_sigma = 0.02; // fraction of each gene's range
    /// Whether mutation_rate applies to each gene or to each offspring.
    bool mutate_per_gene = true;
    std::size_t elites = 2;
    /// Individuals placed in the first generation ahead of the random ones.
    std::vector<DesignVector> initial;
};

struct SynthesisReport {
    DesignVector best;
    double objective_value = 0.0;
    std::array<double, kResiduals> residuals{};
    std::size_t generations_run = 0;
    std::uint64_t seed = 0;
    /// Best objective after each generation.
    std::vector<double> best_history;
};

inline SynthesisReport make_report(const DesignVector& d, const TargetSet& targets) {
    SynthesisReport out;
    out.best = d;
    out.residuals = objective_terms(d, targets);
    out.objective_value = 0.0;
    for (double r : out.residuals)
        out.objective_value += r * r;
    return out;
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for one (generation, slot) pair, so the draws of an
/// individual do not depend on how many draws its siblings made.
inline std::mt19937_64 stream(std::uint64_t seed, std::uint64_t generation, std::uint64_t slot) {
    return std::mt19937_64(splitmix64(splitmix64(splitmix64(seed) ^ generation) ^ slot));
}

} // namespace detail

/// Real-coded genetic algorithm over the free design variables.
inline SynthesisReport run_ga(const TargetSet& targets, const SynthesisBounds& bounds,
                              const GaOptions& options) {
    if (options.population < 10)
        throw Error(ErrorKind::InvalidOptions, "population must be at least 10");
    if (options.generations < 1)
        throw Error(ErrorKind::InvalidOptions, "generations must be at least 1");
    if (options.tournament < 1 || options.elites >= options.population)
        throw Error(ErrorKind::InvalidOptions, "tournament/elite sizes out of range");

    const DesignCodec codec(bounds, options.tie_constraints, options.rank1, targets.r);
    const std::size_t n_genes = codec.size();
    const std::size_t pop_size = options.population;

    using Genome = std::vector<double>;
    std::vector<Genome> pop(pop_size);
    for (std::size_t k = 0; k < pop_size; ++k) {
        if (k < options.initial.size()) {
            DesignVector seeded = options.initial[k];
            seeded.tie_constraints = options.tie_constraints;
            pop[k] = codec.encode(seeded);
            continue;
        }
        auto rng = detail::stream(options.seed, 0, k);
        Genome g(n_genes);
        for (std::size_t i = 0; i < n_genes; ++i) {
            const auto& gene = codec.genes()[i];
            g[i] = std::uniform_real_distribution<double>(gene.lo, gene.hi)(rng);
        }
        codec.repair(g);
        pop[k] = std::move(g);
    }

    std::vector<double> fitness(pop_size);
    const auto evaluate = [&] {
        // Pure per-individual work; safe to parallelize without changing results.
        for (std::size_t k = 0; k < pop_size; ++k)
            fitness[k] = objective(codec.decode(pop[k]), targets);
    };
    std::vector<std::size_t> order(pop_size);
    const auto rank = [&] {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
    };

    SynthesisReport report;
    report.seed = options.seed;
    evaluate();
    rank();

    std::size_t gen = 0;
    for (; gen < options.generations; ++gen) {
        std::vector<Genome> next(pop_size);
        for (std::size_t e = 0; e < options.elites; ++e)
            next[e] = pop[order[e]];

        for (std::size_t k = options.elites; k < pop_size; ++k) {
            auto rng = detail::stream(options.seed, gen + 1, k);
            std::uniform_int_distribution<std::size_t> pick(0, pop_size - 1);
            const auto tournament = [&] {
                std::size_t best = pick(rng);
                for (std::size_t t = 1; t < options.tournament; ++t) {
                    const std::size_t c = pick(rng);
                    if (fitness[c] < fitness[best] || (fitness[c] == fitness[best] && c < best))
                        best = c;
                }
                return best;
            };
            const Genome& a = pop[tournament()];
            const Genome& b = pop[tournament()];

            Genome child(n_genes);
            std::uniform_real_distribution<double> unit01(0.0, 1.0);
            const bool mutant = !options.mutate_per_gene && unit01(rng) < options.mutation_rate;
            for (std::size_t i = 0; i < n_genes; ++i) {
                const double lo = std::min(a[i], b[i]);
                const double hi = std::max(a[i], b[i]);
                const double span = hi - lo;
                const double u = unit01(rng);
                child[i] = lo - options.blend_alpha * span +
                           u * (1.0 + 2.0 * options.blend_alpha) * span;
                if (options.mutate_per_gene ? unit01(rng) < options.mutation_rate : mutant) {
                    const auto& gene = codec.genes()[i];
                    std::normal_distribution<double> noise(0.0,
                                                           options.mutation_sigma * (gene.hi - gene.lo));
                    child[i] += noise(rng);
                }
            }
            codec.repair(child);
            next[k] = std::move(child);
        }
        pop = std::move(next);
        evaluate();
        rank();
        report.best_history.push_back(fitness[order[0]]);
    }

    report.generations_run = gen;
    const DesignVector best = codec.decode(pop[order[0]]);
    auto summary = make_report(best, targets);
    report.best = summary.best;
    report.objective_value = summary.objective_value;
    report.residuals = summary.residuals;
    return report;
}

struct RefineOptions {
    std::size_t max_evaluations = 2000;
    double min_diameter = 1e-10;
    /// Initial simplex edge as a fraction of each gene's range.
    double initial_step = 1e-3;
};

/// Bounded Nelder-Mead polish of a design; never returns a worse design.
/// Uses the dimension-adaptive coefficients of Gao and Han.
inline DesignVector refine_local(const DesignVector& design, const TargetSet& targets,
                                 const SynthesisBounds& bounds = {},
                                 const RefineOptions& options = {}) {
    const DesignCodec codec(bounds, design.tie_constraints, !design.free_anchors.has_value(),
                            design.r);
    const std::size_t n = codec.size();
    const double nd = static_cast<double>(n);
    const double reflect = 1.0;
    const double expand = 1.0 + 2.0 / nd;
    const double contract = 0.75 - 1.0 / (2.0 * nd);
    const double shrink = 1.0 - 1.0 / nd;

    std::size_t evaluations = 0;
    const auto eval = [&](std::vector<double>& g) {
        codec.repair(g);
        ++evaluations;
        return objective(codec.decode(g), targets);
    };

    const double start_value = objective(design, targets);
    std::vector<std::vector<double>> simplex(n + 1, codec.encode(design));
    std::vector<double> values(n + 1);
    values[0] = eval(simplex[0]);
    for (std::size_t i = 0; i < n; ++i) {
        auto& v = simplex[i + 1];
        const auto& gene = codec.genes()[i];
        const double step = options.initial_step * (gene.hi - gene.lo);
        v[i] = v[i] + step <= gene.hi ? v[i] + step : v[i] - step;
        values[i + 1] = eval(v);
    }

    std::vector<std::size_t> idx(n + 1);
    const auto sort_simplex = [&] {
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<std::vector<double>> s(n + 1);
        std::vector<double> f(n + 1);
        for (std::size_t k = 0; k <= n; ++k) {
            s[k] = std::move(simplex[idx[k]]);
            f[k] = values[idx[k]];
        }
        simplex = std::move(s);
        values = std::move(f);
    };
    const auto diameter = [&] {
        double d = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                d = std::max(d, std::abs(simplex[k][i] - simplex[0][i]));
        return d;
    };

    sort_simplex();
    while (evaluations < options.max_evaluations && diameter() >= options.min_diameter &&
           values[0] > 0.0) {
        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t i = 0; i < n; ++i)
                centroid[i] += simplex[k][i] / nd;
        const auto along = [&](double t) {
            std::vector<double> p(n);
            for (std::size_t i = 0; i < n; ++i)
                p[i] = centroid[i] + t * (simplex[n][i] - centroid[i]);
            return p;
        };

        auto xr = along(-reflect);
        const double fr = eval(xr);
        if (fr < values[0]) {
            auto xe = along(-reflect * expand);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[n] = std::move(xe);
                values[n] = fe;
            } else {
                simplex[n] = std::move(xr);
                values[n] = fr;
            }
        } else if (fr < values[n - 1]) {
            simplex[n] = std::move(xr);
            values[n] = fr;
        } else {
            const bool outside = fr < values[n];
            auto xc = along(outside ? -reflect * contract : contract);
            const double fc = eval(xc);
            if (fc < std::min(fr, values[n])) {
                simplex[n] = std::move(xc);
                values[n] = fc;
            } else {
                for (std::size_t k = 1; k <= n; ++k) {
                    for (std::size_t i = 0; i < n; ++i)
                        simplex[k][i] = simplex[0][i] + shrink * (simplex[k][i] - simplex[0][i]);
                    values[k] = eval(simplex[k]);
                }
            }
        }
        sort_simplex();
    }

    if (values[0] < start_value)
        return codec.decode(simplex[0]);
    return design;
}

struct PolishOptions {
    RefineOptions refine{};
    std::size_t max_rounds = 500;
    double target_objective = 1e-10;
    /// A round must cut the objective by at least this fraction to continue.
    double min_relative_gain = 1e-3;
};

/// Restarted refine_local: each round rebuilds the simplex around the best
/// design so far, until the objective reaches the target or stops improving.
inline DesignVector polish(DesignVector design, const TargetSet& targets,
                           const SynthesisBounds& bounds = {}, const PolishOptions& options = {}) {
    double value = objective(design, targets);
    for (std::size_t round = 0; round < options.max_rounds && value > options.target_objective;
         ++round) {
        DesignVector next = refine_local(design, targets, bounds, options.refine);
        const double next_value = objective(next, targets);
        const bool stalled = next_value > value * (1.0 - options.min_relative_gain);
        design = std::move(next);
        value = next_value;
        if (stalled)
            break;
    }
    return design;
}

/// Why the rank-1 design cannot be driven from the first to the last state,
/// or nullopt when a continuation sweep of `steps` poses succeeds.
inline std::optional<std::string> motion_failure(const MechanismParams& params,
                                                 const TargetSet& targets, int steps = 50) {
    try {
        const double from = params.schedule.s.front();
        const double to = params.schedule.s.back();
        sweep(params, from, to, steps, solve_near(params, targets, from));
        return std::nullopt;
    } catch (const Error& e) {
        return e.message();
    }
}

/// GA followed by a restarted local polish.
inline SynthesisReport synthesize(const TargetSet& targets, const SynthesisBounds& bounds,
                                  const GaOptions& ga, const PolishOptions& polish_options = {}) {
    SynthesisReport report = run_ga(targets, bounds, ga);
    const auto summary = make_report(polish(report.best, targets, bounds, polish_options), targets);
    report.best = summary.best;
    report.objective_value = summary.objective_value;
    report.residuals = summary.residuals;
    return report;
}

struct DesignCheck {
    std::size_t unit = 0;
    std::size_t state = 0;
    /// Distance from |D - B| to the dyad's reachable annulus.
    double annulus_deficit = 0.0;
    /// |D - B| - L3.
    double coupler_deviation = 0.0;
    std::size_t dyad_branches = 0;
    std::size_t coupler_solutions = 0;
    bool annulus_ok = false;
    bool coupler_ok = false;
    bool ik_ok = false;

    bool passed() const noexcept { return annulus_ok && coupler_ok && ik_ok; }
};

struct VerificationReport {
    std::vector<DesignCheck> checks;

    bool passed() const noexcept {
        return std::all_of(checks.begin(), checks.end(),
                           [](const DesignCheck& c) { return c.passed(); });
    }

    double worst_coupler_deviation(std::size_t unit) const {
        double worst = 0.0;
        for (const auto& c : checks)
            if (c.unit == unit)
                worst = std::max(worst, std::abs(c.coupler_deviation));
        return worst;
    }
};

/// Checks a mechanism's tabulated sliders against the targets, one tolerance
/// per unit.
inline VerificationReport verify_design(const MechanismParams& params, const TargetSet& targets,
                                        const std::array<double, kUnits>& tolerance) {
    VerificationReport report;
    for (std::size_t i = 0; i < kUnits; ++i) {
        const auto& u = params.units[i];
        for (std::size_t j = 0; j < kStates; ++j) {
            const Vec2 target = targets.point(j, unit_column(i));
            const Vec2 slider{u.anchor_x[j], u.rail_y};
            const double dist = distance(target, slider);
            const double lo = std::abs(u.L1 - u.L2);
            const double hi = u.L1 + u.L2;

            DesignCheck c;
            c.unit = i;
            c.state = j;
            c.annulus_deficit = std::abs(std::clamp(dist, lo, hi) - dist);
            c.coupler_deviation = dist - u.L3;
            c.annulus_ok = c.annulus_deficit <= tolerance[i];
            c.coupler_ok = std::abs(c.coupler_deviation) <= tolerance[i];

            // Within tolerance of the annulus, test the nearest reachable point.
            Vec2 reach = target;
            if (c.annulus_ok && c.annulus_deficit > 0.0 && dist > 0.0)
                reach = slider + (std::clamp(dist, lo, hi) / dist) * (target - slider);
            c.dyad_branches = ik_two_link(slider, u.L1, u.L2, reach).size();
            c.coupler_solutions = ik_coupler(target, u.L3, u.rail_y).size();
            c.ik_ok = c.dyad_branches > 0 && c.coupler_solutions > 0;
            report.checks.push_back(c);
        }
    }
    return report;
}

inline VerificationReport verify_design(const MechanismParams& params, const TargetSet& targets,
                                        double tolerance) {
    std::array<double, kUnits> tol{};
    tol.fill(tolerance);
    return verify_design(params, targets, tol);
}

} // namespace pillbug
