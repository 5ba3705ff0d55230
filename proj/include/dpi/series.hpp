#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace dpi {

inline constexpr double kDefaultTol = 1e-10;
inline constexpr std::size_t kMaxSeriesTerms = 10'000'000;

/// A summed series together with a bound on everything that was not summed.
struct SeriesValue {
    double value = 0.0;
    std::size_t n_terms = 0;
    double tail_bound = 0.0;
    bool converged = false;
};

class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const SeriesValue& require_converged(const SeriesValue& s, const char* what) {
    if (!s.converged) throw ConvergenceError(what);
    return s;
}

/// Neumaier's compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    [[nodiscard]] double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// ============================================================================
// Weighted trigonometric series
//
//   S = sum_{j>=1} w_j * (c0 + sum_k c_k cos(j * theta_k))
//
// with w_j > 0 decreasing and convex. The partial sum uses the exact summand
// supplied by the caller; the decomposition is used only for the tail. The
// non-oscillating part of the tail is estimated by the midpoint
// Euler-Maclaurin rule, each cosine by second-order Abel summation, whose
// remainder is bounded by d_{N+1} / (4 sin^2(theta/2)) with d_j = w_j - w_{j+1}.
// ============================================================================

struct CosineMode {
    double coeff;
    double angle;
};

struct TrigSeries {
    double constant = 0.0;
    std::vector<CosineMode> modes;
};

struct SeriesControl {
    double tol = kDefaultTol;
    std::size_t first_check = 64;
    std::size_t max_terms = kMaxSeriesTerms;
};

namespace detail {

struct TailEstimate {
    double estimate;
    double bound;
};

// Angles equivalent to 0 mod 2*pi contribute to the constant part; equal
// angles are merged so cancelling modes do not inflate the bound.
inline TrigSeries normalise(const TrigSeries& in) {
    TrigSeries out;
    out.constant = in.constant;
    for (const auto& m : in.modes) {
        const double theta = std::abs(std::remainder(m.angle, 2.0 * std::numbers::pi));
        if (std::abs(std::sin(0.5 * theta)) < 1e-12) {
            out.constant += m.coeff;
            continue;
        }
        auto same = std::find_if(out.modes.begin(), out.modes.end(), [&](const CosineMode& o) { return o.angle == theta; });
        if (same != out.modes.end()) {
            same->coeff += m.coeff;
        } else {
            out.modes.push_back({m.coeff, theta});
        }
    }
    std::erase_if(out.modes, [](const CosineMode& m) { return m.coeff == 0.0; });
    return out;
}

template <class Weight>
TailEstimate trig_tail(const TrigSeries& s, const Weight& w, std::size_t n) {
    const double N = static_cast<double>(n);
    const double wn = w(N);
    const double w1 = w(N + 1.0);
    const double w2 = w(N + 2.0);
    const double d1 = w1 - w2;

    double est = 0.0;
    double bound = 0.0;
    if (s.constant != 0.0) {
        est += s.constant * (w.tail_integral(N + 0.5) + (w1 - wn) / 24.0);
        bound += std::abs(s.constant) * (wn - w1) / 24.0;
    }
    for (const auto& m : s.modes) {
        const double half = std::sin(0.5 * m.angle);
        const double sq = 4.0 * half * half;
        const double first = -w1 * std::sin((N + 0.5) * m.angle) / (2.0 * half);
        const double second = d1 * std::cos((N + 1.0) * m.angle) / sq;
        est += m.coeff * (first + second);
        bound += std::abs(m.coeff) * std::abs(d1) / sq;
    }
    return {est, bound};
}

}  // namespace detail

/// Sums `term(j)` for j = 1, 2, ... doubling the truncation until the tail
/// bound drops below tol * |value| or the term cap is reached.
template <class Term, class Weight>
SeriesValue sum_trig_series(const Term& term, const Weight& weight, const TrigSeries& shape,
                            const SeriesControl& ctl = {}) {
    const TrigSeries s = detail::normalise(shape);
    CompensatedSum partial;
    std::size_t done = 0;
    std::size_t target = std::min(std::max<std::size_t>(ctl.first_check, 1), ctl.max_terms);
    SeriesValue out;
    while (true) {
        for (std::size_t j = done + 1; j <= target; ++j) partial.add(term(static_cast<double>(j)));
        done = target;
        const auto tail = detail::trig_tail(s, weight, done);
        out.value = partial.value() + tail.estimate;
        out.n_terms = done;
        out.tail_bound = tail.bound;
        out.converged = tail.bound <= ctl.tol * std::abs(out.value);
        if (out.converged || done >= ctl.max_terms) return out;
        target = std::min(2 * done, ctl.max_terms);
    }
}

}  // namespace dpi
