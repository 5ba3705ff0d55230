#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/bernoulli.hpp>
#include <boost/math/special_functions/zeta.hpp>

namespace dpi {

inline constexpr double kZeta2 = std::numbers::pi * std::numbers::pi / 6.0;

[[nodiscard]] inline double erf(double x) { return std::erf(x); }
[[nodiscard]] inline double erfc(double x) { return std::erfc(x); }

/// Riemann zeta for real s > 1.
[[nodiscard]] inline double zeta(double s) {
    if (!(s > 1.0)) throw std::domain_error("zeta: requires s > 1");
    return boost::math::zeta(s);
}

/// ln Erf(x), x > 0. Uses log1p(-erfc) once Erf is close to 1.
[[nodiscard]] inline double log_erf(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_erf: argument must be positive");
    if (x > 0.5) return std::log1p(-std::erfc(x));
    return std::log(std::erf(x));
}

/// ln(Erf(u) / Erf(v)).
[[nodiscard]] inline double log_erf_ratio(double u, double v) {
    if (!(u > 0.0) || !(v > 0.0)) throw std::domain_error("log_erf_ratio: arguments must be positive");
    if (u == v) return 0.0;
    return log_erf(u) - log_erf(v);
}

namespace detail {

// ln(sqrt(pi) Erf(y) / (2y)) for 0 < y; the Maclaurin series of Erf(y)/y keeps
// full relative precision as y -> 0.
inline double log_erf_over_linear(double y) {
    if (y < 0.5) {
        const double y2 = y * y;
        double term = 1.0;
        double s = 0.0;
        for (int k = 1; k < 40; ++k) {
            term *= -y2 / k;
            const double add = term / (2 * k + 1);
            s += add;
            if (std::abs(add) < 1e-18) break;
        }
        return std::log1p(s);
    }
    return log_erf(y) - std::log(2.0 * y / std::sqrt(std::numbers::pi));
}

}  // namespace detail

/// ln(Erf(x sqrt(1 + r2)) / Erf(x)) for x > 0, r2 >= 0, accurate when r2 is tiny.
[[nodiscard]] inline double log_erf_ratio_scaled(double x, double r2) {
    if (!(x > 0.0) || !(r2 >= 0.0)) throw std::domain_error("log_erf_ratio_scaled: invalid arguments");
    if (r2 == 0.0) return 0.0;
    const double u = x * std::sqrt(1.0 + r2);
    if (x >= 0.5) return log_erf_ratio(u, x);
    return 0.5 * std::log1p(r2) + detail::log_erf_over_linear(u) - detail::log_erf_over_linear(x);
}

/// 1 - Z(W), evaluated without cancellation for small W.
[[nodiscard]] inline double one_minus_zed(double W) {
    if (!(W > 0.0)) throw std::domain_error("one_minus_zed: W must be positive");
    const double s = std::sqrt(W);
    if (W < 0.5) {
        // erf(s) - (2/sqrt(pi)) s e^{-W} = (2/sqrt(pi)) s sum_{n>=1} (-1)^{n+1} W^n 2n / (n! (2n+1))
        double pow_over_fact = 1.0;
        double sum = 0.0;
        for (int n = 1; n < 40; ++n) {
            pow_over_fact *= W / n;
            const double add = ((n % 2 == 1) ? 1.0 : -1.0) * pow_over_fact * 2.0 * n / (2.0 * n + 1.0);
            sum += add;
            if (std::abs(add) < 1e-18 * std::abs(sum)) break;
        }
        return 2.0 / std::sqrt(std::numbers::pi) * s * sum / std::erf(s);
    }
    return 1.0 - 2.0 / std::sqrt(std::numbers::pi) * s * std::exp(-W) / std::erf(s);
}

/// Z(W) = (2/sqrt(pi)) sqrt(W) e^{-W} / Erf(sqrt(W)).
[[nodiscard]] inline double zed(double W) {
    if (!(W > 0.0)) throw std::domain_error("zed: W must be positive");
    if (W < 0.5) return 1.0 - one_minus_zed(W);
    const double s = std::sqrt(W);
    return 2.0 / std::sqrt(std::numbers::pi) * s * std::exp(-W) / std::erf(s);
}

/// Second moment of e^{-b a^2} restricted to |a| <= B: (1/2b)(1 - Z(b B^2)).
[[nodiscard]] inline double truncated_gaussian_ratio(double b, double B) {
    if (!(b > 0.0) || !(B > 0.0)) throw std::domain_error("truncated_gaussian_ratio: b and B must be positive");
    return one_minus_zed(b * B * B) / (2.0 * b);
}

/// Bernoulli numbers with B_1 = -1/2, k <= 20.
[[nodiscard]] inline double bernoulli(unsigned k) {
    if (k > 20) throw std::domain_error("bernoulli: only k <= 20 supported");
    if (k == 0) return 1.0;
    if (k == 1) return -0.5;
    if (k % 2 == 1) return 0.0;
    return boost::math::bernoulli_b2n<double>(static_cast<int>(k / 2));
}

namespace detail {

inline constexpr int kLi2Terms = 40;

// (-1)^m 2 zeta(2m) / ((2 pi)^{2m} 2m (2m+1)), m = 1..kLi2Terms
inline const std::array<double, kLi2Terms + 1>& li2_coefficients() {
    static const auto table = [] {
        std::array<double, kLi2Terms + 1> c{};
        const double two_pi_sq = 4.0 * std::numbers::pi * std::numbers::pi;
        double scale = 1.0;
        for (int m = 1; m <= kLi2Terms; ++m) {
            scale /= two_pi_sq;
            const double z = boost::math::zeta(2.0 * m);
            c[m] = ((m % 2 == 0) ? 2.0 : -2.0) * z * scale / (2.0 * m * (2.0 * m + 1.0));
        }
        return c;
    }();
    return table;
}

}  // namespace detail

/// Li_2(e^mu) for Re(mu) <= 0.
[[nodiscard]] inline std::complex<double> li2_exp(std::complex<double> mu) {
    using cd = std::complex<double>;
    if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag())) throw std::domain_error("li2_exp: non-finite argument");
    if (mu.real() > 0.0) throw std::domain_error("li2_exp: requires |e^mu| <= 1");
    mu = cd(mu.real(), std::remainder(mu.imag(), 2.0 * std::numbers::pi));
    if (mu == cd(0.0, 0.0)) return {kZeta2, 0.0};

    if (mu.real() < -1.0) {
        const cd z = std::exp(mu);
        cd zj = z;
        cd sum = 0.0;
        for (int j = 1; j < 200; ++j) {
            const cd add = zj / static_cast<double>(j) / static_cast<double>(j);
            sum += add;
            if (std::abs(add) < 1e-18) break;
            zj *= z;
        }
        return sum;
    }

    const auto& c = detail::li2_coefficients();
    const cd mu2 = mu * mu;
    cd pw = mu;
    cd series = 0.0;
    for (int m = 1; m <= detail::kLi2Terms; ++m) {
        pw *= mu2;
        const cd add = c[m] * pw;
        series += add;
        if (std::abs(add) < 1e-18) break;
    }
    return kZeta2 + mu * (1.0 - std::log(-mu)) - mu2 / 4.0 + series;
}

}  // namespace dpi
