#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpi/format.hpp"
#include "dpi/parallel.hpp"
#include "dpi/params.hpp"
#include "dpi/series.hpp"
#include "dpi/special.hpp"

namespace dpi {

/// n_terms == 0 selects adaptive truncation with an analytic tail estimate;
/// otherwise exactly n_terms factors are multiplied.
struct PiOptions {
    std::size_t n_terms = 0;
    double tol = kDefaultTol;
};

struct PiResult {
    double log_pi;
    double T;
    std::size_t n_terms;
    double tail_bound;
    bool converged;
    ModelParams params_snapshot;
};

namespace detail {

// Factor n of Pi: ln Erf(x_n sqrt(1 + r_n)) - ln Erf(x_n) with
// x_n = c_n n pi / T, c_n = B / n^alpha and r_n = (omega T / n pi)^2.
struct PiFactors {
    double B;
    double alpha;
    double T;
    double omega;

    [[nodiscard]] double x(double n) const { return B * std::numbers::pi / T * std::pow(n, 1.0 - alpha); }

    [[nodiscard]] double operator()(double n) const {
        const double r = omega * T / (n * std::numbers::pi);
        return log_erf_ratio_scaled(x(n), r * r);
    }

    // a = omega T / pi, so that each factor is at most (1/2) ln(1 + a^2 / n^2).
    [[nodiscard]] double a() const { return omega * T / std::numbers::pi; }
};

inline PiFactors pi_factors(double T, const ModelParams& params) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::domain_error("log_pi: T must be positive");
    const ModelParams p = params.with_T(T);
    p.validate();
    if (!(p.alpha > 1.0)) throw std::domain_error("log_pi: requires alpha > 1");
    return {p.B(), p.alpha, T, p.omega_value()};
}

// Integral over [X, inf) of (1/2) ln(1 + a^2 / x^2).
inline double log_lambda_tail(double a, double X) {
    if (a == 0.0) return 0.0;
    const double q = a / X;
    return a * std::atan(q) - 0.5 * X * std::log1p(q * q);
}

inline double log_lambda_slope(double a, double x) { return -a * a / (x * (x * x + a * a)); }

}  // namespace detail

/// Plain truncation after n_terms factors. The omitted factors are each in
/// [0, (1/2) ln(1 + a^2/n^2)], so the tail bound is the integral of that bound.
[[nodiscard]] inline PiResult log_pi_truncated(double T, const ModelParams& params, std::size_t n_terms,
                                               double tol = kDefaultTol) {
    const auto f = detail::pi_factors(T, params);
    if (n_terms < 1) throw std::invalid_argument("log_pi_truncated: n_terms must be >= 1");
    CompensatedSum sum;
    for (std::size_t n = 1; n <= n_terms; ++n) sum.add(f(static_cast<double>(n)));
    const double value = sum.value();
    const double bound = detail::log_lambda_tail(f.a(), static_cast<double>(n_terms));
    return {value, T, n_terms, bound, bound <= tol * std::max(1.0, std::abs(value)), params.with_T(T)};
}

/// Adaptive truncation: the omitted factors are replaced by the midpoint
/// Euler-Maclaurin estimate of sum (1/2) ln(1 + a^2/n^2). Once x_n < 1/2 the
/// estimate is accurate to (omega^2 / 3) sum c_n^2; before that only the
/// enclosure [0, U] is used.
[[nodiscard]] inline PiResult log_pi(double T, const ModelParams& params, double tol = kDefaultTol) {
    const auto f = detail::pi_factors(T, params);
    const double a = f.a();
    CompensatedSum sum;
    std::size_t done = 0;
    std::size_t target = 1024;
    PiResult out{0.0, T, 0, 0.0, false, params.with_T(T)};
    while (true) {
        for (std::size_t n = done + 1; n <= target; ++n) sum.add(f(static_cast<double>(n)));
        done = target;
        const double N = static_cast<double>(done);
        const double mid = N + 0.5;
        const double slope = detail::log_lambda_slope(a, mid);
        const double upper = detail::log_lambda_tail(a, mid) + slope / 24.0;
        const double em_err = std::abs(slope) / 24.0;
        double estimate, bound;
        if (f.x(N + 1.0) <= 0.5) {
            const double p = 2.0 * f.alpha - 1.0;
            estimate = upper;
            bound = em_err + f.omega * f.omega * f.B * f.B / 3.0 * std::pow(N, -p) / p;
        } else {
            estimate = 0.5 * upper;
            bound = 0.5 * upper + em_err;
        }
        out.log_pi = sum.value() + estimate;
        out.n_terms = done;
        out.tail_bound = bound;
        out.converged = bound <= tol * std::abs(out.log_pi);
        if (out.converged || done >= kMaxSeriesTerms) return out;
        target = std::min(2 * done, kMaxSeriesTerms);
    }
}

[[nodiscard]] inline PiResult log_pi(double T, const ModelParams& params, const PiOptions& opts) {
    return opts.n_terms > 0 ? log_pi_truncated(T, params, opts.n_terms, opts.tol) : log_pi(T, params, opts.tol);
}

/// sum_{n <= N} ln Erf(c_n n pi / T), the free-particle factor. The full
/// product tends to 0 for finite A, so its tail bound is infinite.
[[nodiscard]] inline SeriesValue normalization_ratio(const ModelParams& params, std::size_t N) {
    params.validate();
    if (!(params.alpha > 1.0)) throw std::domain_error("normalization_ratio: requires alpha > 1");
    if (N < 1) throw std::invalid_argument("normalization_ratio: N must be >= 1");
    const double B = params.B();
    SeriesValue out{0.0, N, 0.0, true};
    if (std::isinf(B)) return out;
    const detail::PiFactors f{B, params.alpha, params.T, 0.0};
    CompensatedSum sum;
    for (std::size_t n = 1; n <= N; ++n) sum.add(log_erf(f.x(static_cast<double>(n))));
    out.value = sum.value();
    out.tail_bound = std::numeric_limits<double>::infinity();
    out.converged = false;
    return out;
}

struct SpectrumShift {
    double T;
    double delta_omega;
    double E0_D;
    double En_D;
    int n_level;
    double spacing;
    double hbar;
    double omega;
    PiResult pi;

    /// E^D_n = hbar omega (n + 1/2) - hbar delta_omega.
    [[nodiscard]] double level(int n) const { return hbar * (omega * (n + 0.5) - delta_omega); }
};

[[nodiscard]] inline SpectrumShift spectrum_shift(double T, const ModelParams& params, int n_level = 0,
                                                  const PiOptions& opts = {}) {
    if (n_level < 0) throw std::invalid_argument("spectrum_shift: n_level must be >= 0");
    const PiResult pi = log_pi(T, params, opts);
    const double w = params.omega_value();
    SpectrumShift s{T, pi.log_pi / T, 0.0, 0.0, n_level, params.hbar * w, params.hbar, w, pi};
    s.E0_D = s.level(0);
    s.En_D = s.level(n_level);
    return s;
}

struct PartitionFunctions {
    double Z_F;
    double Z_D;
    double log_Z_F;
    double log_Z_D;
    PiResult pi;
};

/// Z_F = e^{-omega T / 2} / (1 - e^{-omega T}), Z_D = Z_F Pi(T).
[[nodiscard]] inline PartitionFunctions partition_functions(double T, const ModelParams& params,
                                                            const PiOptions& opts = {}) {
    const double w = params.omega_value();
    if (!(w > 0.0)) throw std::domain_error("partition_functions: requires omega > 0");
    const PiResult pi = log_pi(T, params, opts);
    const double log_zf = -0.5 * w * T - std::log1p(-std::exp(-w * T));
    const double log_zd = log_zf + pi.log_pi;
    return {std::exp(log_zf), std::exp(log_zd), log_zf, log_zd, pi};
}

[[nodiscard]] inline std::vector<SpectrumShift> scan_shift(std::span<const double> T_grid, const ModelParams& params,
                                                           const PiOptions& opts = {}) {
    std::vector<SpectrumShift> rows(T_grid.size());
    parallel_for(T_grid.size(), [&](std::size_t i) { rows[i] = spectrum_shift(T_grid[i], params, 0, opts); });
    return rows;
}

inline void write_shift_csv(std::ostream& os, std::span<const SpectrumShift> rows) {
    os << "T,delta_omega,log_pi,n_terms\n";
    for (const auto& r : rows) {
        write_csv_row(os, {format_double(r.T), format_double(r.delta_omega), format_double(r.pi.log_pi),
                           std::to_string(r.pi.n_terms)});
    }
}

// ============================================================================
// Unitarity diagnostic (Euclidean: ln Pi linear in T, i.e. constant delta_omega)
// ============================================================================

struct UnitarityPoint {
    double T;
    double delta_omega;
    double log_pi;
    std::size_t n_terms;
    bool converged;
    bool coarse;            // T >= eps_D
    double rel_deviation;   // relative to the mean of its own sub-grid
    bool consistent;        // rel_deviation <= threshold
};

struct UnitaritySubgrid {
    std::size_t n_points = 0;
    double mean_delta_omega = 0.0;
    double max_rel_deviation = 0.0;
};

struct UnitarityReport {
    std::vector<UnitarityPoint> points;
    UnitaritySubgrid coarse;
    UnitaritySubgrid fine;
    double max_rel_deviation;
    double mean_delta_omega;
    double fitted_omega;  // least-squares slope of ln Pi against T on the coarse grid, NaN if < 2 points
    double threshold;
    bool unitary_compatible;
};

[[nodiscard]] inline UnitarityReport unitarity_diagnostic(std::span<const double> T_grid, const ModelParams& params,
                                                          const PiOptions& opts = {}, double threshold = 0.1) {
    if (T_grid.empty()) throw std::invalid_argument("unitarity_diagnostic: empty grid");
    if (!std::is_sorted(T_grid.begin(), T_grid.end())) throw std::invalid_argument("unitarity_diagnostic: grid must be sorted");
    const double eps_d = params.epsilon_D();
    const auto shifts = scan_shift(T_grid, params, opts);

    UnitarityReport rep{};
    rep.threshold = threshold;
    for (const auto& s : shifts)
        rep.points.push_back({s.T, s.delta_omega, s.pi.log_pi, s.pi.n_terms, s.pi.converged, s.T >= eps_d, 0.0, true});

    auto summarise = [&](bool coarse) {
        UnitaritySubgrid g;
        CompensatedSum sum;
        for (const auto& p : rep.points)
            if (p.coarse == coarse) {
                ++g.n_points;
                sum.add(p.delta_omega);
            }
        if (g.n_points == 0) return g;
        g.mean_delta_omega = sum.value() / static_cast<double>(g.n_points);
        for (auto& p : rep.points) {
            if (p.coarse != coarse) continue;
            const double dev = std::abs(p.delta_omega - g.mean_delta_omega);
            p.rel_deviation = dev == 0.0 ? 0.0 : dev / std::abs(g.mean_delta_omega);
            p.consistent = p.rel_deviation <= threshold;
            g.max_rel_deviation = std::max(g.max_rel_deviation, p.rel_deviation);
        }
        return g;
    };
    rep.coarse = summarise(true);
    rep.fine = summarise(false);
    const auto& primary = rep.coarse.n_points > 0 ? rep.coarse : rep.fine;
    rep.max_rel_deviation = primary.max_rel_deviation;
    rep.mean_delta_omega = primary.mean_delta_omega;
    rep.unitary_compatible = rep.coarse.n_points > 0 && rep.coarse.max_rel_deviation <= threshold;

    rep.fitted_omega = std::numeric_limits<double>::quiet_NaN();
    if (rep.coarse.n_points >= 2) {
        double st = 0, sl = 0, stt = 0, stl = 0, n = 0;
        for (const auto& p : rep.points)
            if (p.coarse) {
                n += 1;
                st += p.T;
                sl += p.log_pi;
                stt += p.T * p.T;
                stl += p.T * p.log_pi;
            }
        const double den = n * stt - st * st;
        if (den > 0) rep.fitted_omega = (n * stl - st * sl) / den;
    }
    return rep;
}

// ============================================================================
// Ground-state energy against omega
// ============================================================================

struct LinearFit {
    double a;
    double b;
    double residual;  // root-mean-square relative residual of the fitted points
    std::size_t n_points;
};

/// Least squares for y = a + b x with weights 1/y^2 (relative errors).
[[nodiscard]] inline LinearFit relative_linear_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("relative_linear_fit: need >= 2 points");
    double S = 0, Sx = 0, Sy = 0, Sxx = 0, Sxy = 0;
    std::vector<double> w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double scale = std::max(std::abs(y[i]), std::numeric_limits<double>::min());
        w[i] = 1.0 / (scale * scale);
        S += w[i];
        Sx += w[i] * x[i];
        Sy += w[i] * y[i];
        Sxx += w[i] * x[i] * x[i];
        Sxy += w[i] * x[i] * y[i];
    }
    const double den = S * Sxx - Sx * Sx;
    if (!(den > 0)) throw std::invalid_argument("relative_linear_fit: degenerate abscissae");
    const double b = (S * Sxy - Sx * Sy) / den;
    const double a = (Sy - b * Sx) / S;
    double r2 = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (a + b * x[i]);
        r2 += w[i] * r * r;
    }
    return {a, b, std::sqrt(r2 / static_cast<double>(x.size())), x.size()};
}

struct E0Row {
    double omega;
    double E0_D;
    std::size_t n_terms;
    bool converged;
};

struct E0Scan {
    std::vector<E0Row> rows;
    LinearFit fit;
};

/// E^D_0(omega) at fixed T, fitted as a + b omega over the upper half of the grid.
[[nodiscard]] inline E0Scan scan_E0_vs_omega(std::span<const double> omega_grid, const ModelParams& params, double T,
                                             const PiOptions& opts = {}) {
    if (omega_grid.size() < 3) throw std::invalid_argument("scan_E0_vs_omega: need at least 3 grid points");
    for (double w : omega_grid)
        if (!(w > 0.0)) throw std::invalid_argument("scan_E0_vs_omega: omega must be positive");
    E0Scan out;
    out.rows.resize(omega_grid.size());
    parallel_for(omega_grid.size(), [&](std::size_t i) {
        const auto s = spectrum_shift(T, params.with_omega(omega_grid[i]), 0, opts);
        out.rows[i] = {omega_grid[i], s.E0_D, s.pi.n_terms, s.pi.converged};
    });
    std::vector<std::size_t> order(out.rows.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return out.rows[i].omega < out.rows[j].omega; });
    std::vector<double> xs, ys;
    for (std::size_t k = order.size() / 2; k < order.size(); ++k) {
        xs.push_back(out.rows[order[k]].omega);
        ys.push_back(out.rows[order[k]].E0_D);
    }
    out.fit = relative_linear_fit(xs, ys);
    return out;
}

inline void write_E0_csv(std::ostream& os, std::span<const E0Row> rows) {
    os << "omega,E0_D\n";
    for (const auto& r : rows) write_csv_row(os, {format_double(r.omega), format_double(r.E0_D)});
}

}  // namespace dpi
