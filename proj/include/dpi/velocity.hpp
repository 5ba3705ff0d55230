#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "dpi/format.hpp"
#include "dpi/parallel.hpp"
#include "dpi/params.hpp"
#include "dpi/series.hpp"
#include "dpi/special.hpp"

namespace dpi {

enum class Model { feynman, differentiable };

[[nodiscard]] inline std::string_view to_string(Model m) {
    return m == Model::feynman ? "feynman" : "differentiable";
}

namespace detail {

struct InverseSquareWeight {
    double operator()(double x) const { return 1.0 / (x * x); }
    double tail_integral(double x) const { return 1.0 / x; }
};

inline double one_minus_zed_or_limit(double W) {
    if (W <= 0.0) return 0.0;
    if (W > 1e4) return 1.0;
    return one_minus_zed(W);
}

// w(x) = (1 - Z(s^2)) / x^2 with s = A_bar / x^(alpha - 1).
struct RestrictedWeight {
    double abar;
    double alpha;

    double operator()(double x) const {
        const double s = abar / std::pow(x, alpha - 1.0);
        return one_minus_zed_or_limit(s * s) / (x * x);
    }

    // Integral of w over [x, inf), written as an integral over u = 1/x in [0, 1/x].
    double tail_integral(double x) const {
        auto f = [this](double u) {
            const double s = abar * std::pow(u, alpha - 1.0);
            return one_minus_zed_or_limit(s * s);
        };
        thread_local boost::math::quadrature::tanh_sinh<double> rule;
        return rule.integrate(f, 0.0, 1.0 / x, 1e-13);
    }
};

inline void check_fraction(double tau, const char* what) {
    if (!(tau >= 0.0 && tau < 1.0)) throw std::domain_error(std::string(what) + ": tau must lie in [0, 1)");
}

inline void check_resolution(double eps, const ModelParams& params) {
    params.validate();
    if (!(eps > 0.0 && eps < params.T)) throw std::domain_error("velocity: eps must lie in (0, T)");
}

inline double v2_prefactor(double eps, const ModelParams& p) {
    const double r = p.T / (std::numbers::pi * eps);
    return 2.0 * p.hbar / (p.m * p.T) * r * r;
}

inline SeriesValue scaled(SeriesValue s, double factor) {
    s.value *= factor;
    s.tail_bound *= factor;
    return s;
}

}  // namespace detail

/// sum_j j^-2 [sin(j pi (t0 + eps)/T) - sin(j pi t0/T)]^2 with tau = eps/T.
[[nodiscard]] inline SeriesValue s_feynman(double tau, double t0_frac = 0.0, double tol = kDefaultTol) {
    detail::check_fraction(tau, "s_feynman");
    detail::check_fraction(t0_frac, "s_feynman");
    if (tau == 0.0) return {0.0, 0, 0.0, true};
    const double h = std::numbers::pi * tau;
    const double x0 = std::numbers::pi * t0_frac;
    auto term = [h, x0](double j) {
        const double d = std::sin(j * (x0 + h)) - std::sin(j * x0);
        return d * d / (j * j);
    };
    // (sin A - sin B)^2 = 1 - cos(2A)/2 - cos(2B)/2 - cos(A - B) + cos(A + B)
    const TrigSeries shape{1.0, {{-0.5, 2.0 * (x0 + h)}, {-0.5, 2.0 * x0}, {-1.0, h}, {1.0, 2.0 * x0 + h}}};
    return sum_trig_series(term, detail::InverseSquareWeight{}, shape, SeriesControl{tol});
}

/// Dilogarithm form of s_feynman, exact for every tau.
[[nodiscard]] inline double s_feynman_closed(double tau, double t0_frac = 0.0) {
    detail::check_fraction(tau, "s_feynman_closed");
    detail::check_fraction(t0_frac, "s_feynman_closed");
    if (tau == 0.0) return 0.0;
    using cd = std::complex<double>;
    const cd mu(0.0, std::numbers::pi * tau);
    const cd mu0(0.0, std::numbers::pi * t0_frac);
    const cd combo = li2_exp(2.0 * mu0 + 2.0 * mu) - 2.0 * li2_exp(2.0 * mu0 + mu) + 2.0 * li2_exp(mu) + li2_exp(2.0 * mu0);
    return kZeta2 - 0.5 * combo.real();
}

/// <v^2>_F = (2 hbar / m T)(T / pi eps)^2 s_feynman(eps / T, 0).
[[nodiscard]] inline SeriesValue v2_feynman(double eps, const ModelParams& params, double tol = kDefaultTol) {
    detail::check_resolution(eps, params);
    return detail::scaled(s_feynman(eps / params.T, 0.0, tol), detail::v2_prefactor(eps, params));
}

/// sum_j j^-2 sin^2(j pi tau)(1 - Z(s_j^2)), s_j = A_bar / j^(alpha - 1).
[[nodiscard]] inline SeriesValue s_diff(double tau, const ModelParams& params, double tol = kDefaultTol) {
    params.validate();
    detail::check_fraction(tau, "s_diff");
    if (!(params.alpha > 1.0)) throw std::domain_error("s_diff: requires alpha > 1");
    if (tau == 0.0) return {0.0, 0, 0.0, true};
    const detail::RestrictedWeight w{params.A_bar(), params.alpha};
    const double h = std::numbers::pi * tau;
    auto term = [h, &w](double j) {
        const double s = std::sin(j * h);
        return s * s * w(j);
    };
    const TrigSeries shape{0.5, {{-0.5, 2.0 * h}}};
    return sum_trig_series(term, w, shape, SeriesControl{tol});
}

[[nodiscard]] inline SeriesValue v2_diff(double eps, const ModelParams& params, double tol = kDefaultTol) {
    detail::check_resolution(eps, params);
    return detail::scaled(s_diff(eps / params.T, params, tol), detail::v2_prefactor(eps, params));
}

[[nodiscard]] inline SeriesValue v2(Model model, double eps, const ModelParams& params, double tol = kDefaultTol) {
    return model == Model::feynman ? v2_feynman(eps, params, tol) : v2_diff(eps, params, tol);
}

/// Upper bound on v2_feynman - v2_diff in the low-resolution regime: (2 hbar T / pi^2 m A_bar) / eps^2.
[[nodiscard]] inline double low_resolution_correction_bound(double eps, const ModelParams& params) {
    detail::check_resolution(eps, params);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return 2.0 * params.hbar * params.T / (pi2 * params.m * params.A_bar()) / (eps * eps);
}

struct RegimeReport {
    double v2_uv;
    double c_coeff;
    double epsilon_D;
    double p_uv;
    /// Resolution at which v2_diff drops to half of v2_feynman, if found.
    std::optional<double> crossing_eps;
};

/// Largest eps at which v2_diff / v2_feynman falls to `fraction`, searched
/// downward from min(T/2, 8 eps_D) and refined by log-space bisection.
[[nodiscard]] inline std::optional<double> regime_crossing(const ModelParams& params, double fraction = 0.5,
                                                           double tol = 1e-9) {
    params.validate();
    const double eps_d = params.epsilon_D();
    auto ratio = [&](double eps) {
        const double tau = eps / params.T;
        return s_diff(tau, params, tol).value / s_feynman(tau, 0.0, tol).value;
    };
    double hi = std::min(0.5 * params.T, 8.0 * eps_d);
    if (!(ratio(hi) >= fraction)) return std::nullopt;
    const double floor = std::max(1e-4 * eps_d, 1e-9 * params.T);
    double lo = hi;
    while (true) {
        lo *= 0.5;
        if (lo < floor) return std::nullopt;
        if (ratio(lo) < fraction) break;
        hi = lo;
    }
    for (int it = 0; it < 60 && hi / lo > 1.0 + 1e-10; ++it) {
        const double mid = std::sqrt(lo * hi);
        (ratio(mid) < fraction ? lo : hi) = mid;
    }
    return std::sqrt(lo * hi);
}

/// Two-regime characterisation of <v^2>_D; requires alpha > 2.
[[nodiscard]] inline RegimeReport regime_report(const ModelParams& params) {
    params.validate();
    if (!(params.alpha > 2.0)) throw std::domain_error("regime_report: alpha <= 2 is the fractal regime, the velocity is not bounded");
    const double pi = std::numbers::pi;
    const double A = params.A();
    const double v2_uv = (pi * A / params.T) * std::sqrt(params.hbar / (params.m * params.T));
    const double c = 4.0 / (pi * pi * pi) / A * std::pow(params.hbar * params.T / params.m, 1.5);
    return {v2_uv, c, params.epsilon_D(), params.m * std::sqrt(v2_uv), regime_crossing(params)};
}

struct V2Row {
    double eps;
    SeriesValue v2;
    Model model;
};

[[nodiscard]] inline std::vector<V2Row> scan_v2(std::span<const double> eps_grid, const ModelParams& params, Model model,
                                                double tol = kDefaultTol) {
    params.validate();
    for (double e : eps_grid) detail::check_resolution(e, params);
    std::vector<V2Row> rows(eps_grid.size());
    parallel_for(eps_grid.size(), [&](std::size_t i) { rows[i] = {eps_grid[i], v2(model, eps_grid[i], params, tol), model}; });
    return rows;
}

inline void write_v2_csv(std::ostream& os, std::span<const V2Row> rows, bool header = true) {
    if (header) os << "eps,v2,n_terms,tail_bound,model\n";
    for (const auto& r : rows) {
        write_csv_row(os, {format_double(r.eps), format_double(r.v2.value), std::to_string(r.v2.n_terms),
                           format_double(r.v2.tail_bound), std::string(to_string(r.model))});
    }
}

}  // namespace dpi
