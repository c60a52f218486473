#pragma once

// Dense univariate polynomials: least-squares fitting, evaluation,
// differentiation, apex shifts and bracketed root finding.

#include <pillbug/error.hpp>
#include <pillbug/geometry.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pillbug {

/// y(x) = sum_k coeffs[k] * x^k, lowest degree first. Trailing zero
/// coefficients are dropped so the leading coefficient is nonzero unless the
/// polynomial is the zero polynomial of degree 0.
class Polynomial {
public:
    Polynomial() : coeffs_{0.0} {}

    explicit Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) { normalize(); }

    Polynomial(std::initializer_list<double> coeffs) : coeffs_(coeffs) { normalize(); }

    /// Builds from coefficients printed highest degree first.
    static Polynomial from_highest_first(std::vector<double> coeffs) {
        std::reverse(coeffs.begin(), coeffs.end());
        return Polynomial(std::move(coeffs));
    }

    std::size_t degree() const noexcept { return coeffs_.size() - 1; }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    double coeff(std::size_t k) const noexcept { return k < coeffs_.size() ? coeffs_[k] : 0.0; }
    bool is_zero() const noexcept { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

    /// Compensated Horner evaluation.
    double operator()(double x) const noexcept {
        double s = coeffs_.back();
        double err = 0.0;
        for (std::size_t i = coeffs_.size() - 1; i-- > 0;) {
            const double p = s * x;
            const double p_err = std::fma(s, x, -p);
            const double t = p + coeffs_[i];
            const double z = t - p;
            const double t_err = (p - (t - z)) + (coeffs_[i] - z);
            s = t;
            err = std::fma(err, x, p_err + t_err);
        }
        return s + err;
    }

    friend bool operator==(const Polynomial&, const Polynomial&) = default;

private:
    void normalize() {
        while (coeffs_.size() > 1 && coeffs_.back() == 0.0)
            coeffs_.pop_back();
        if (coeffs_.empty())
            coeffs_.push_back(0.0);
    }

    std::vector<double> coeffs_;
};

inline double evaluate(const Polynomial& p, double x) noexcept { return p(x); }

inline Polynomial derivative(const Polynomial& p) {
    if (p.degree() == 0)
        return Polynomial{};
    std::vector<double> d(p.degree());
    for (std::size_t k = 1; k <= p.degree(); ++k)
        d[k - 1] = static_cast<double>(k) * p.coeff(k);
    return Polynomial(std::move(d));
}

/// Coefficients of q(x) = p(x + shift), by binomial expansion.
inline Polynomial taylor_shift(const Polynomial& p, double shift) {
    const auto n = p.degree();
    std::vector<double> out(n + 1, 0.0);
    // out[m] = sum_{k>=m} c_k * C(k, m) * shift^(k-m)
    for (std::size_t m = 0; m <= n; ++m) {
        double binom = 1.0; // C(m, m)
        double power = 1.0; // shift^0
        double acc = 0.0;
        for (std::size_t k = m; k <= n; ++k) {
            acc += p.coeff(k) * binom * power;
            binom = binom * static_cast<double>(k + 1) / static_cast<double>(k + 1 - m);
            power *= shift;
        }
        out[m] = acc;
    }
    return Polynomial(std::move(out));
}

/// g(x) = -(p(x + x_apex) - y_apex): moves the apex to the origin and turns
/// the hump downwards.
inline Polynomial shift_and_flip(const Polynomial& p, double x_apex, double y_apex) {
    const Polynomial shifted = taylor_shift(p, x_apex);
    std::vector<double> g(shifted.coeffs().begin(), shifted.coeffs().end());
    g[0] -= y_apex;
    for (double& c : g)
        c = -c;
    return Polynomial(std::move(g));
}

struct SampleSet {
    std::vector<Vec2> points;
};

struct FitResult {
    Polynomial polynomial;
    /// Sum of squared residuals of the returned polynomial over the samples.
    double residual = 0.0;
};

inline double sum_squared_residuals(const Polynomial& p, std::span<const Vec2> points) {
    double ssr = 0.0;
    for (const auto& pt : points) {
        const double e = p(pt.x) - pt.y;
        ssr += e * e;
    }
    return ssr;
}

/// Least-squares polynomial fit. The abscissae are centred and scaled onto
/// [-1, 1] and the Vandermonde system is solved by column-pivoted Householder
/// QR; the result is mapped back to the caller's x coordinate.
inline FitResult fit_polynomial(const SampleSet& samples, std::size_t degree) {
    if (degree < 1)
        throw Error(ErrorKind::InvalidInput, "fit degree must be at least 1");

    const auto& pts = samples.points;
    std::vector<double> xs;
    xs.reserve(pts.size());
    for (const auto& p : pts)
        xs.push_back(p.x);
    std::sort(xs.begin(), xs.end());
    const auto distinct = static_cast<std::size_t>(
        std::distance(xs.begin(), std::unique(xs.begin(), xs.end())));
    if (distinct < degree + 1)
        throw Error(ErrorKind::InsufficientSamples,
                    std::to_string(distinct) + " distinct x values for a degree-" +
                        std::to_string(degree) + " fit");

    const double lo = xs.front();
    const double hi = xs[distinct - 1];
    const double centre = 0.5 * (lo + hi);
    const double half_width = 0.5 * (hi - lo);

    const auto n = static_cast<Eigen::Index>(pts.size());
    const auto m = static_cast<Eigen::Index>(degree + 1);
    Eigen::MatrixXd vander(n, m);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (pts[static_cast<std::size_t>(i)].x - centre) / half_width;
        double tk = 1.0;
        for (Eigen::Index k = 0; k < m; ++k) {
            vander(i, k) = tk;
            tk *= t;
        }
        rhs(i) = pts[static_cast<std::size_t>(i)].y;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
    qr.setThreshold(1e-13);
    if (qr.rank() < m)
        throw Error(ErrorKind::SingularFit, "design matrix has rank " + std::to_string(qr.rank()) +
                                                " < " + std::to_string(m));
    const Eigen::VectorXd scaled = qr.solve(rhs);

    // sum a_k ((x - c)/h)^k  ->  sum b_k (x - c)^k  ->  shift by -c.
    std::vector<double> b(static_cast<std::size_t>(m));
    double inv_h = 1.0;
    for (Eigen::Index k = 0; k < m; ++k) {
        b[static_cast<std::size_t>(k)] = scaled(k) * inv_h;
        inv_h /= half_width;
    }
    Polynomial result = taylor_shift(Polynomial(std::move(b)), -centre);
    const double ssr = sum_squared_residuals(result, pts);
    return {std::move(result), ssr};
}

inline constexpr double kRootBracketTolerance = 1e-10;

/// Safeguarded Newton iteration inside a sign-change bracket. Newton steps
/// that leave the bracket or stall fall back to bisection; the loop ends once
/// the bracket is narrower than `xtol`.
template <class F, class DF>
double find_root_bracketed(F&& f, DF&& df, double lo, double hi,
                           double xtol = kRootBracketTolerance) {
    if (lo > hi)
        std::swap(lo, hi);
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0)
        return lo;
    if (fhi == 0.0)
        return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw Error(ErrorKind::NoSignChange, "no sign change on [" + std::to_string(lo) + ", " +
                                                 std::to_string(hi) + "]");

    double x = 0.5 * (lo + hi);
    double prev_width = hi - lo;
    for (int iter = 0; iter < 500 && hi - lo >= xtol; ++iter) {
        const double fx = f(x);
        if (fx == 0.0)
            return x;
        if ((fx < 0.0) == (flo < 0.0)) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        if (hi - lo < xtol)
            break;

        const double d = df(x);
        double next = (d != 0.0) ? x - fx / d : lo - 1.0;
        const bool inside = next > lo && next < hi;
        const bool shrinking = (hi - lo) < 0.5 * prev_width;
        prev_width = hi - lo;
        if (!inside || (!shrinking && std::abs(next - x) > 0.25 * (hi - lo))) {
            next = 0.5 * (lo + hi);
        } else if (std::abs(next - x) < 0.25 * xtol) {
            // Converged Newton step: probe just past it to close the bracket.
            const double probe = next + std::copysign(0.25 * xtol, next - x == 0.0 ? 1.0 : next - x);
            if (probe > lo && probe < hi) {
                const double fp = f(probe);
                if ((fp < 0.0) == (flo < 0.0)) {
                    lo = probe;
                    flo = fp;
                } else {
                    hi = probe;
                }
            }
            next = std::clamp(next, lo, hi);
            if (next == lo || next == hi)
                next = 0.5 * (lo + hi);
        }
        x = next;
    }
    const double flo_abs = std::abs(f(lo));
    const double fhi_abs = std::abs(f(hi));
    const double fx_abs = (x >= lo && x <= hi) ? std::abs(f(x)) : std::max(flo_abs, fhi_abs);
    if (fx_abs <= flo_abs && fx_abs <= fhi_abs)
        return x;
    return flo_abs <= fhi_abs ? lo : hi;
}

inline double find_root_bracketed(const Polynomial& p, double lo, double hi) {
    const Polynomial dp = derivative(p);
    return find_root_bracketed([&](double x) { return p(x); }, [&](double x) { return dp(x); }, lo,
                               hi);
}

} // namespace pillbug
