#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dpi/format.hpp"
#include "dpi/parallel.hpp"
#include "dpi/params.hpp"
#include "dpi/velocity.hpp"

namespace dpi {

enum class Regime { sub_eps_D, super_eps_D };

[[nodiscard]] inline std::string_view to_string(Regime r) {
    return r == Regime::sub_eps_D ? "sub_eps_D" : "super_eps_D";
}

struct GupCoefficient {
    double beta;
    double p_uv;
    double p_D;
};

/// beta = (2/pi)^2 / p_uv^2 with p_uv = m v_uv; p_D = sqrt(hbar m / eps_D).
[[nodiscard]] inline GupCoefficient gup_coefficient(const ModelParams& params) {
    params.validate();
    if (!(params.alpha > 2.0)) throw std::domain_error("gup_coefficient: requires alpha > 2");
    const double pi = std::numbers::pi;
    const double A = params.A();
    const double v2_uv = (pi * A / params.T) * std::sqrt(params.hbar / (params.m * params.T));
    const double p_uv = params.m * std::sqrt(v2_uv);
    const double beta = (2.0 / pi) * (2.0 / pi) / (p_uv * p_uv);
    return {beta, p_uv, std::sqrt(params.hbar * params.m / params.epsilon_D())};
}

/// [x, p]_D = hbar (1 - beta p^2), meaningful for p < p_D.
struct GupBracket {
    double hbar;
    double beta;
    double p_D;

    [[nodiscard]] bool valid(double p) const { return std::abs(p) < p_D; }

    [[nodiscard]] double operator()(double p) const {
        if (!valid(p)) throw std::domain_error("GupBracket: momentum outside the validity range p < p_D");
        return hbar * (1.0 - beta * p * p);
    }
};

[[nodiscard]] inline GupBracket gup_bracket(const ModelParams& params) {
    const auto g = gup_coefficient(params);
    return {params.hbar, g.beta, g.p_D};
}

/// <p^2> = m^2 <v^2>.
[[nodiscard]] inline double momentum_squared_from_v2(double m, double v2) { return m * m * v2; }

/// Resolution probed by momentum p: from <v^2>_F = hbar / (m eps), eps = m hbar / p^2.
[[nodiscard]] inline double resolution_from_momentum_squared(double p2, double m, double hbar) {
    if (!(p2 > 0.0)) throw std::domain_error("resolution_from_momentum_squared: p^2 must be positive");
    return m * hbar / p2;
}

/// Low-resolution form hbar - m C / eps.
[[nodiscard]] inline double low_resolution_commutator(double eps, const ModelParams& params) {
    const double pi = std::numbers::pi;
    const double c = 4.0 / (pi * pi * pi) / params.A() * std::pow(params.hbar * params.T / params.m, 1.5);
    return params.hbar - params.m * c / eps;
}

struct CommutatorReport {
    double eps;
    double value;
    Regime regime;
    double beta;
    double p_D;
    SeriesValue v2;
};

/// <[x, p]> = m eps <v^2>(eps).
[[nodiscard]] inline CommutatorReport commutator_expectation(double eps, const ModelParams& params, Model model,
                                                             double tol = kDefaultTol) {
    const SeriesValue v = v2(model, eps, params, tol);
    constexpr double inf = std::numeric_limits<double>::infinity();
    double beta = 0.0;
    double p_D = inf;
    Regime regime = Regime::super_eps_D;
    if (params.alpha > 1.0) {
        const double eps_d = params.epsilon_D();
        regime = eps < eps_d ? Regime::sub_eps_D : Regime::super_eps_D;
        if (model == Model::differentiable) p_D = std::sqrt(params.hbar * params.m / eps_d);
    }
    if (model == Model::differentiable && params.alpha > 2.0) beta = gup_coefficient(params).beta;
    return {eps, params.m * eps * v.value, regime, beta, p_D, v};
}

[[nodiscard]] inline std::vector<CommutatorReport> scan_commutator(std::span<const double> eps_grid,
                                                                   const ModelParams& params, Model model,
                                                                   double tol = kDefaultTol) {
    std::vector<CommutatorReport> rows(eps_grid.size());
    parallel_for(eps_grid.size(), [&](std::size_t i) { rows[i] = commutator_expectation(eps_grid[i], params, model, tol); });
    return rows;
}

inline void write_commutator_csv(std::ostream& os, std::span<const CommutatorReport> rows) {
    os << "eps,commutator,regime\n";
    for (const auto& r : rows) write_csv_row(os, {format_double(r.eps), format_double(r.value), std::string(to_string(r.regime))});
}

}  // namespace dpi
