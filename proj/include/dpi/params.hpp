#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <variant>

namespace dpi {

/// Bound A on the Fourier amplitudes, |a_n| <= A / n^alpha.
struct AmplitudeBound {
    double A;
};

/// Differentiable time scale; A follows from A(T) = sqrt(hbar T / m) (T / eps_D)^(alpha - 1).
struct DifferentiableScale {
    double epsilon_D;
};

/// Physical and control parameters shared by every module.
struct ModelParams {
    double m = 1.0;
    double hbar = 1.0;
    double T = 1.0;
    double alpha = 2.1;
    std::variant<AmplitudeBound, DifferentiableScale> amplitude = AmplitudeBound{10.0};
    std::optional<double> omega;

    static ModelParams with_amplitude(double A, double alpha, double T = 1.0, double m = 1.0, double hbar = 1.0) {
        ModelParams p;
        p.m = m;
        p.hbar = hbar;
        p.T = T;
        p.alpha = alpha;
        p.amplitude = AmplitudeBound{A};
        return p;
    }

    static ModelParams with_scale(double epsilon_D, double alpha, double T = 1.0, double m = 1.0, double hbar = 1.0) {
        ModelParams p = with_amplitude(1.0, alpha, T, m, hbar);
        p.amplitude = DifferentiableScale{epsilon_D};
        return p;
    }

    void validate() const {
        auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
        if (!positive(m)) throw std::invalid_argument("ModelParams: m must be positive");
        if (!positive(hbar)) throw std::invalid_argument("ModelParams: hbar must be positive");
        if (!positive(T)) throw std::invalid_argument("ModelParams: T must be positive");
        if (!positive(alpha)) throw std::invalid_argument("ModelParams: alpha must be positive");
        if (const auto* a = std::get_if<AmplitudeBound>(&amplitude)) {
            if (!(a->A > 0.0) || std::isnan(a->A)) throw std::invalid_argument("ModelParams: A must be positive");
        } else {
            const double e = std::get<DifferentiableScale>(amplitude).epsilon_D;
            if (!positive(e)) throw std::invalid_argument("ModelParams: epsilon_D must be positive");
        }
        if (omega && !(std::isfinite(*omega) && *omega >= 0.0))
            throw std::invalid_argument("ModelParams: omega must be non-negative");
    }

    [[nodiscard]] bool amplitude_is_primary() const { return std::holds_alternative<AmplitudeBound>(amplitude); }

    /// sqrt(hbar T / m), the Brownian amplitude scale.
    [[nodiscard]] double diffusion_length() const { return std::sqrt(hbar * T / m); }

    [[nodiscard]] double A() const {
        if (const auto* a = std::get_if<AmplitudeBound>(&amplitude)) return a->A;
        const double e = std::get<DifferentiableScale>(amplitude).epsilon_D;
        return diffusion_length() * std::pow(T / e, alpha - 1.0);
    }

    [[nodiscard]] double epsilon_D() const {
        if (const auto* d = std::get_if<DifferentiableScale>(&amplitude)) return d->epsilon_D;
        if (!(alpha > 1.0)) throw std::domain_error("epsilon_D requires alpha > 1");
        return T * std::pow(A() / diffusion_length(), -1.0 / (alpha - 1.0));
    }

    /// A_bar = sqrt(m pi^2 / (4 hbar T)) A.
    [[nodiscard]] double A_bar() const { return std::sqrt(m * std::numbers::pi * std::numbers::pi / (4.0 * hbar * T)) * A(); }

    /// B = A sqrt(m T / (4 hbar)).
    [[nodiscard]] double B() const { return A() * std::sqrt(m * T / (4.0 * hbar)); }

    [[nodiscard]] double omega_value() const {
        if (!omega) throw std::invalid_argument("ModelParams: omega required");
        return *omega;
    }

    /// Same parameters at another total time; A is recomputed when eps_D is primary.
    [[nodiscard]] ModelParams with_T(double new_T) const {
        ModelParams p = *this;
        p.T = new_T;
        return p;
    }

    [[nodiscard]] ModelParams with_omega(double w) const {
        ModelParams p = *this;
        p.omega = w;
        return p;
    }
};

}  // namespace dpi
