#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "dpi/format.hpp"
#include "dpi/params.hpp"
#include "dpi/rng.hpp"
#include "dpi/special.hpp"

namespace dpi {

/// x(t) = sum_n a_n sin(n pi t / T), n = 1..N; coeffs[0] holds a_1.
struct FourierPath {
    double T = 1.0;
    std::vector<double> coeffs;

    [[nodiscard]] static double bound(double A, double alpha, std::size_t n) {
        return A / std::pow(static_cast<double>(n), alpha);
    }

    [[nodiscard]] bool restriction_satisfied(double A, double alpha) const {
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            if (std::abs(coeffs[i]) > bound(A, alpha, i + 1)) return false;
        }
        return true;
    }
};

namespace detail {
inline void check_time(const FourierPath& p, double t) {
    if (!(t >= 0.0 && t <= p.T)) throw std::domain_error("FourierPath: t outside [0, T]");
}
}  // namespace detail

[[nodiscard]] inline double eval_path(const FourierPath& p, double t) {
    detail::check_time(p, t);
    const double k = std::numbers::pi * t / p.T;
    double x = 0.0;
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) x += p.coeffs[i] * std::sin(static_cast<double>(i + 1) * k);
    return x;
}

[[nodiscard]] inline double eval_velocity(const FourierPath& p, double t) {
    detail::check_time(p, t);
    const double k = std::numbers::pi / p.T;
    double v = 0.0;
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
        const double n = static_cast<double>(i + 1);
        v += p.coeffs[i] * n * k * std::cos(n * k * t);
    }
    return v;
}

struct SupBounds {
    double x_bound;
    double v_bound;
};

/// |x| <= A zeta(alpha) for alpha > 1; |v| <= (pi A / T) zeta(alpha - 1) for alpha > 2.
[[nodiscard]] inline SupBounds sup_bounds(const ModelParams& params) {
    params.validate();
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double A = params.A();
    const double a = params.alpha;
    return {a > 1.0 ? A * zeta(a) : inf, a > 2.0 ? std::numbers::pi * A / params.T * zeta(a - 1.0) : inf};
}

/// a_j = sqrt(hbar T / m) N_j / j with N_j uniform on [-1, 1).
[[nodiscard]] inline FourierPath sample_brownian(const ModelParams& params, std::size_t N, std::uint64_t seed) {
    params.validate();
    if (N < 1) throw std::invalid_argument("sample_brownian: N must be >= 1");
    Rng rng(seed, 0);
    const double scale = params.diffusion_length();
    FourierPath p{params.T, std::vector<double>(N)};
    for (std::size_t j = 1; j <= N; ++j) p.coeffs[j - 1] = scale * rng.symmetric() / static_cast<double>(j);
    return p;
}

/// floor((A / sqrt(hbar T / m))^(1 / (alpha - 1))), saturated to the uint64 range.
[[nodiscard]] inline std::uint64_t crossover_index(const ModelParams& params) {
    if (!(params.alpha > 1.0)) throw std::domain_error("crossover_index: requires alpha > 1");
    const double jd = std::floor(std::pow(params.A() / params.diffusion_length(), 1.0 / (params.alpha - 1.0)));
    if (!(jd < 9.0e18)) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(jd);
}

struct TwinResult {
    FourierPath twin;
    std::uint64_t j_D;
};

/// Copies modes j <= j_D and clamps the rest to sign(a_j) min(|a_j|, A / j^alpha).
[[nodiscard]] inline TwinResult differentiable_twin(const FourierPath& p, const ModelParams& params) {
    params.validate();
    if (!(params.alpha > 1.0)) throw std::domain_error("differentiable_twin: requires alpha > 1");
    const std::uint64_t jd = crossover_index(params);
    const double A = params.A();
    TwinResult out{p, jd};
    for (std::size_t i = 0; i < out.twin.coeffs.size(); ++i) {
        const std::uint64_t j = i + 1;
        if (j <= jd) continue;
        double& a = out.twin.coeffs[i];
        const double b = FourierPath::bound(A, params.alpha, j);
        if (std::abs(a) > b) a = std::copysign(b, a);
    }
    return out;
}

struct ScaleRelations {
    double epsilon_D;
    double A_of_T;
    std::uint64_t j_D;
};

/// (T / eps_D)^(alpha - 1) = A / sqrt(hbar T / m) and its inverse.
[[nodiscard]] inline ScaleRelations scale_relations(const ModelParams& params) {
    params.validate();
    if (!(params.alpha > 1.0)) throw std::domain_error("scale_relations: requires alpha > 1");
    const double eps = params.epsilon_D();
    const double A = params.diffusion_length() * std::pow(params.T / eps, params.alpha - 1.0);
    return {eps, A, crossover_index(params)};
}

inline void write_coefficients_csv(std::ostream& os, const FourierPath& p) {
    os << "n,a_n\n";
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) os << (i + 1) << ',' << format_double(p.coeffs[i]) << '\n';
}

inline void write_trajectory_csv(std::ostream& os, const FourierPath& p, std::span<const double> grid) {
    os << "t,x\n";
    for (double t : grid) os << format_double(t) << ',' << format_double(eval_path(p, t)) << '\n';
}

}  // namespace dpi
