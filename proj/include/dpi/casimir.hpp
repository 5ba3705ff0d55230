#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dpi/format.hpp"
#include "dpi/series.hpp"
#include "dpi/special.hpp"

namespace dpi {

enum class Regulator { exponential, gaussian };
enum class CasimirModel { standard, tanh };

[[nodiscard]] inline std::string_view to_string(Regulator r) { return r == Regulator::exponential ? "exp" : "gauss"; }
[[nodiscard]] inline std::string_view to_string(CasimirModel m) { return m == CasimirModel::standard ? "standard" : "tanh"; }

[[nodiscard]] inline double regulator_value(Regulator r, double x) {
    return r == Regulator::exponential ? std::exp(-x) : std::exp(-x * x);
}

struct CasimirConfig {
    double L = 1.0;
    double omega_D = std::numeric_limits<double>::infinity();
    double c = 1.0;
    double hbar = 1.0;
    double n_c = 100.0;
    Regulator regulator = Regulator::exponential;

    void validate() const {
        if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("CasimirConfig: L must be positive");
        if (!(omega_D > 0.0)) throw std::invalid_argument("CasimirConfig: omega_D must be positive");
        if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("CasimirConfig: c must be positive");
        if (!(hbar > 0.0) || !std::isfinite(hbar)) throw std::invalid_argument("CasimirConfig: hbar must be positive");
        if (!(n_c >= 10.0) || !std::isfinite(n_c)) throw std::invalid_argument("CasimirConfig: n_c must be >= 10");
    }

    /// x = pi c / (L omega_D); zero when omega_D is infinite.
    [[nodiscard]] double x() const { return std::numbers::pi * c / (L * omega_D); }
};

/// -sum_{k=1}^{K} B_k / k! f^{(k-1)}(0); derivs[i] holds f^{(i)}(0).
[[nodiscard]] inline double euler_maclaurin_delta(std::span<const double> derivs, std::size_t K) {
    if (K > 20) throw std::domain_error("euler_maclaurin_delta: K <= 20 supported");
    if (derivs.size() < K) throw std::invalid_argument("euler_maclaurin_delta: insufficient derivatives");
    double sum = 0.0;
    double fact = 1.0;
    for (std::size_t k = 1; k <= K; ++k) {
        fact *= static_cast<double>(k);
        sum += bernoulli(static_cast<unsigned>(k)) / fact * derivs[k - 1];
    }
    return -sum;
}

/// k-th derivative of tanh at 0: 2^{2m}(2^{2m} - 1) B_{2m} / (2m) for k = 2m - 1, zero for even k.
[[nodiscard]] inline double tanh_derivative_at_zero(std::size_t k) {
    if (k % 2 == 0) return 0.0;
    const unsigned two_m = static_cast<unsigned>(k + 1);
    const double p = std::ldexp(1.0, static_cast<int>(two_m));
    return p * (p - 1.0) * bernoulli(two_m) / two_m;
}

/// Derivatives at 0 of f_D(n) = tanh(x n) / x, orders 0..K-1 (f(n) = n when x = 0).
[[nodiscard]] inline std::vector<double> tanh_model_derivatives(double x, std::size_t K) {
    std::vector<double> d(K, 0.0);
    for (std::size_t k = 1; k < K; ++k) d[k] = std::pow(x, static_cast<double>(k) - 1.0) * tanh_derivative_at_zero(k);
    return d;
}

/// Mode function of the model: n, or tanh(x n) / x.
[[nodiscard]] inline std::function<double(double)> casimir_mode_function(CasimirModel model, double x) {
    if (model == CasimirModel::standard || x == 0.0) return [](double n) { return n; };
    return [x](double n) { return std::tanh(x * n) / x; };
}

/// sum_{n>=0} f(n) g(n/n_c) - integral_0^inf f(n) g(n/n_c) dn.
[[nodiscard]] inline double sum_minus_integral(const std::function<double(double)>& f, Regulator g, double n_c) {
    if (!(n_c >= 10.0) || !std::isfinite(n_c)) throw std::invalid_argument("sum_minus_integral: n_c must be >= 10");
    // g(cut) is below 1e-21 for either regulator
    const double cut = g == Regulator::exponential ? 50.0 : 7.0;
    const double upper = std::ceil(cut * n_c);
    auto h = [&](double n) { return f(n) * regulator_value(g, n / n_c); };

    CompensatedSum sum;
    for (double n = 0.0; n <= upper; n += 1.0) sum.add(h(n));

    CompensatedSum integral;
    const double width = 0.25 * n_c;
    for (double a = 0.0; a < upper; a += width) {
        double err = 0.0;
        integral.add(boost::math::quadrature::gauss_kronrod<double, 61>::integrate(h, a, std::min(a + width, upper), 10, 1e-15, &err));
    }
    const double tail = std::abs(h(upper)) * n_c;
    if (!std::isfinite(sum.value()) || !std::isfinite(integral.value()) || tail > 1e-12 * (1.0 + std::abs(integral.value())))
        throw std::runtime_error("sum_minus_integral: integrand does not decay under the regulator");
    return sum.value() - integral.value();
}

/// Richardson extrapolation over n_c, 10 n_c, 100 n_c for an error series in 1/n_c^2.
[[nodiscard]] inline double sum_minus_integral_extrapolated(const std::function<double(double)>& f, Regulator g,
                                                            double n_c) {
    const double v1 = sum_minus_integral(f, g, n_c);
    const double v2 = sum_minus_integral(f, g, 10.0 * n_c);
    const double v3 = sum_minus_integral(f, g, 100.0 * n_c);
    const double r1 = (100.0 * v2 - v1) / 99.0;
    const double r2 = (100.0 * v3 - v2) / 99.0;
    return (1e4 * r2 - r1) / (1e4 - 1.0);
}

/// Regularised coefficient delta such that Delta E = (1/2)(hbar c pi / L) delta.
[[nodiscard]] inline double casimir_coefficient(const CasimirConfig& config, CasimirModel model) {
    config.validate();
    return sum_minus_integral_extrapolated(casimir_mode_function(model, config.x()), config.regulator, config.n_c);
}

[[nodiscard]] inline double casimir_energy(const CasimirConfig& config, CasimirModel model) {
    return 0.5 * config.hbar * config.c * std::numbers::pi / config.L * casimir_coefficient(config, model);
}

struct EpsilonDBound {
    double L_exp;
    double rel_error;
    double c;
    double x2_coefficient;  // |d delta / d x^2| of the tanh model at x = 0
    double x_max;
    double omega_D_min;
    double epsilon_D_exact;  // 1 / omega_D_min
    double epsilon_D_order;  // L_exp / c, the order-of-magnitude form
};

/// Smallest omega_D keeping the tanh-model correction below rel_error of the
/// standard 1/12 term, and the implied bound on eps_D ~ 1 / omega_D.
[[nodiscard]] inline EpsilonDBound epsilon_d_bound(double L_exp, double rel_error, double c) {
    if (!(L_exp > 0.0) || !std::isfinite(L_exp)) throw std::invalid_argument("epsilon_d_bound: L_exp must be positive");
    if (!(rel_error > 0.0 && rel_error < 1.0)) throw std::invalid_argument("epsilon_d_bound: rel_error must lie in (0, 1)");
    if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("epsilon_d_bound: c must be positive");
    const auto d = tanh_model_derivatives(1.0, 5);
    const double k2 = std::abs(euler_maclaurin_delta(d, 5) + 1.0 / 12.0);
    const double x_max = std::sqrt(rel_error / (12.0 * k2));
    const double omega_min = std::numbers::pi * c / (L_exp * x_max);
    return {L_exp, rel_error, c, k2, x_max, omega_min, 1.0 / omega_min, L_exp / c};
}

struct CasimirRow {
    double L;
    double delta_E;
    CasimirModel model;
    double x;
};

inline void write_casimir_csv(std::ostream& os, std::span<const CasimirRow> rows) {
    os << "L,delta_E,model,x\n";
    for (const auto& r : rows)
        write_csv_row(os, {format_double(r.L), format_double(r.delta_E), std::string(to_string(r.model)), format_double(r.x)});
}

}  // namespace dpi
