#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dpi/format.hpp"
#include "dpi/parallel.hpp"
#include "dpi/params.hpp"
#include "dpi/rng.hpp"
#include "dpi/series.hpp"
#include "dpi/special.hpp"

namespace dpi {

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_samples = 0;
    std::uint64_t seed = 0;
    /// Upper bound on the contribution of modes that were not sampled.
    double truncation_bound = 0.0;
    /// False when truncation_bound is not below std_error.
    bool sufficient_modes = true;
};

inline constexpr std::size_t kDefaultMcSamples = 100'000;
inline constexpr std::size_t kDefaultMcModes = 1'000;
/// Fixed replica count, so results never depend on the number of threads.
inline constexpr std::size_t kMcReplicas = 64;

/// Density proportional to e^{-b a^2} on |a| <= B.
class TruncatedGaussian {
public:
    TruncatedGaussian(double b, double B) : b_(b), B_(B) {
        if (!(b > 0.0) || !(B > 0.0)) throw std::domain_error("TruncatedGaussian: b and B must be positive");
        sigma_ = 1.0 / std::sqrt(2.0 * b);
        gaussian_proposal_ = std::erf(std::sqrt(b) * B) >= 0.1;
    }

    double operator()(Rng& rng) const {
        if (gaussian_proposal_) {
            while (true) {
                const double a = sigma_ * rng.normal();
                if (std::abs(a) <= B_) return a;
            }
        }
        while (true) {
            const double a = B_ * rng.symmetric();
            if (rng.uniform() < std::exp(-b_ * a * a)) return a;
        }
    }

    [[nodiscard]] double second_moment() const {
        return std::isinf(B_) ? 0.5 / b_ : truncated_gaussian_ratio(b_, B_);
    }

private:
    double b_;
    double B_;
    double sigma_;
    bool gaussian_proposal_;
};

/// One exact draw; Gaussian rejection when the acceptance Erf(sqrt(b) B) >= 0.1, uniform rejection otherwise.
[[nodiscard]] inline double sample_truncated_gaussian(double b, double B, Rng& rng) { return TruncatedGaussian(b, B)(rng); }

namespace detail {

struct Welford {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }

    void merge(const Welford& o) {
        if (o.n == 0.0) return;
        if (n == 0.0) {
            *this = o;
            return;
        }
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
};

// Splits n_samples over the fixed replicas, replica r using stream r of the root seed.
template <class Draw>
McEstimate run_replicas(std::size_t n_samples, std::uint64_t seed, const Draw& draw) {
    if (n_samples < 2) throw std::invalid_argument("Monte Carlo: n_samples must be >= 2");
    std::vector<Welford> parts(kMcReplicas);
    parallel_for(kMcReplicas, [&](std::size_t r) {
        const std::size_t count = n_samples / kMcReplicas + (r < n_samples % kMcReplicas ? 1 : 0);
        Rng rng(seed, r);
        for (std::size_t i = 0; i < count; ++i) parts[r].add(draw(rng));
    });
    Welford total;
    for (const auto& p : parts) total.merge(p);
    McEstimate e;
    e.mean = total.mean;
    e.std_error = std::sqrt(total.m2 / (total.n - 1.0) / total.n);
    e.n_samples = n_samples;
    e.seed = seed;
    return e;
}

}  // namespace detail

/// Per-mode measures b_j = m T lambda_j / (4 hbar), B_j = A / j^alpha, lambda_j = (j pi / T)^2.
[[nodiscard]] inline std::vector<TruncatedGaussian> mode_measures(const ModelParams& params, std::size_t N_modes,
                                                                  double omega = 0.0) {
    params.validate();
    if (N_modes < 1) throw std::invalid_argument("mode_measures: N_modes must be >= 1");
    std::vector<TruncatedGaussian> modes;
    modes.reserve(N_modes);
    const double A = params.A();
    for (std::size_t j = 1; j <= N_modes; ++j) {
        const double k = static_cast<double>(j) * std::numbers::pi / params.T;
        const double b = params.m * params.T * (k * k + omega * omega) / (4.0 * params.hbar);
        modes.emplace_back(b, A / std::pow(static_cast<double>(j), params.alpha));
    }
    return modes;
}

namespace detail {

inline std::vector<double> velocity_weights(const ModelParams& p, double eps, double t0, std::size_t N) {
    if (!(eps > 0.0 && eps < p.T)) throw std::domain_error("estimate_v2: eps must lie in (0, T)");
    if (!(t0 >= 0.0 && t0 < p.T)) throw std::domain_error("estimate_v2: t0 must lie in [0, T)");
    std::vector<double> ds(N);
    for (std::size_t j = 1; j <= N; ++j) {
        const double k = static_cast<double>(j) * std::numbers::pi / p.T;
        ds[j - 1] = (std::sin(k * (t0 + eps)) - std::sin(k * t0)) / eps;
    }
    return ds;
}

}  // namespace detail

/// Sum over the first N_modes of (Delta s_j / eps)^2 <a_j^2>, which estimate_v2 converges to.
[[nodiscard]] inline double v2_mode_sum(const ModelParams& params, double eps, double t0, std::size_t N_modes) {
    const auto modes = mode_measures(params, N_modes);
    const auto ds = detail::velocity_weights(params, eps, t0, N_modes);
    CompensatedSum sum;
    for (std::size_t j = 0; j < N_modes; ++j) sum.add(ds[j] * ds[j] * modes[j].second_moment());
    return sum.value();
}

/// Bound on the modes beyond N: (8 hbar T / m pi^2 eps^2) sum_{j>N} min(j^-2, (2/3) A_bar^2 j^-2alpha).
[[nodiscard]] inline double v2_truncation_bound(const ModelParams& params, double eps, std::size_t N_modes) {
    const double N = static_cast<double>(N_modes);
    const double abar = params.A_bar();
    double tail = 1.0 / N;
    if (params.alpha > 0.5 && std::isfinite(abar)) {
        const double p = 2.0 * params.alpha - 1.0;
        tail = std::min(tail, 2.0 / 3.0 * abar * abar * std::pow(N, -p) / p);
    }
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return 8.0 * params.hbar * params.T / (params.m * pi2 * eps * eps) * tail;
}

/// Direct sampling of <v^2> with v = sum_j a_j Delta s_j / eps.
[[nodiscard]] inline McEstimate estimate_v2(const ModelParams& params, double eps, double t0,
                                            std::size_t N_modes = kDefaultMcModes,
                                            std::size_t n_samples = kDefaultMcSamples, std::uint64_t seed = 1) {
    const auto modes = mode_measures(params, N_modes);
    const auto ds = detail::velocity_weights(params, eps, t0, N_modes);
    auto e = detail::run_replicas(n_samples, seed, [&](Rng& rng) {
        double v = 0.0;
        for (std::size_t j = 0; j < N_modes; ++j) v += modes[j](rng) * ds[j];
        return v * v;
    });
    e.truncation_bound = v2_truncation_bound(params, eps, N_modes);
    e.sufficient_modes = e.truncation_bound < e.std_error;
    return e;
}

/// <a_j^2> for a single mode (1-based j).
[[nodiscard]] inline McEstimate estimate_mode_second_moment(const ModelParams& params, std::size_t j,
                                                            std::size_t n_samples = kDefaultMcSamples,
                                                            std::uint64_t seed = 1) {
    if (j < 1) throw std::invalid_argument("estimate_mode_second_moment: j must be >= 1");
    const TruncatedGaussian mode = mode_measures(params, j).back();
    return detail::run_replicas(n_samples, seed, [&](Rng& rng) {
        const double a = mode(rng);
        return a * a;
    });
}

/// <a_j a_k>, which vanishes for j != k.
[[nodiscard]] inline McEstimate estimate_cross_moment(const ModelParams& params, std::size_t j, std::size_t k,
                                                      std::size_t n_samples = kDefaultMcSamples,
                                                      std::uint64_t seed = 1) {
    if (j < 1 || k < 1) throw std::invalid_argument("estimate_cross_moment: indices must be >= 1");
    const auto modes = mode_measures(params, std::max(j, k));
    return detail::run_replicas(n_samples, seed, [&](Rng& rng) {
        const double aj = modes[j - 1](rng);
        const double ak = j == k ? aj : modes[k - 1](rng);
        return aj * ak;
    });
}

/// ln Pi over the first N_modes by importance sampling under the free
/// truncated measure: Pi_N = E[exp(-(m T omega^2 / 4 hbar) sum a_j^2)] prod_j sqrt(1 + omega^2 / lambda_j).
[[nodiscard]] inline McEstimate estimate_log_pi(double T, const ModelParams& params,
                                                std::size_t N_modes, std::size_t n_samples = kDefaultMcSamples,
                                                std::uint64_t seed = 1) {
    const ModelParams p = params.with_T(T);
    const double w = p.omega_value();
    const auto modes = mode_measures(p, N_modes);
    const double delta = p.m * T * w * w / (4.0 * p.hbar);
    auto e = detail::run_replicas(n_samples, seed, [&](Rng& rng) {
        double s = 0.0;
        for (const auto& m : modes) {
            const double a = m(rng);
            s += a * a;
        }
        return std::exp(-delta * s);
    });
    CompensatedSum log_norm;
    for (std::size_t j = 1; j <= N_modes; ++j) {
        const double r = w * T / (static_cast<double>(j) * std::numbers::pi);
        log_norm.add(0.5 * std::log1p(r * r));
    }
    McEstimate out = e;
    out.mean = std::log(e.mean) + log_norm.value();
    out.std_error = e.std_error / e.mean;
    return out;
}

struct McRow {
    std::string quantity;
    McEstimate estimate;
};

inline void write_mc_csv(std::ostream& os, std::span<const McRow> rows) {
    os << "quantity,mean,stderr,n_samples,seed\n";
    for (const auto& r : rows) {
        write_csv_row(os, {r.quantity, format_double(r.estimate.mean), format_double(r.estimate.std_error),
                           std::to_string(r.estimate.n_samples), std::to_string(r.estimate.seed)});
    }
}

}  // namespace dpi
