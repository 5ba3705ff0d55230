#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpi/dpi.hpp"

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;
    std::vector<std::string> info;

    // Records one clause; the criterion passes only if every clause does.
    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        details.push_back(std::string(ok ? "ok " : "FAILED ") + what);
    }
};

struct Criterion {
    int id;
    double limit_s;
    const char* title;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[192];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    v.back() = b;
    return v;
}

const dpi::ModelParams fig2 = dpi::ModelParams::with_amplitude(10.0, 2.1);
const dpi::ModelParams fig4 = dpi::ModelParams::with_scale(0.1, 2.1);
constexpr std::size_t kFig4Terms = 100'000;

double v2_uv(const dpi::ModelParams& p) { return pi * p.A() / p.T * std::sqrt(p.hbar / (p.m * p.T)); }

// === Criteria ================================================================

Outcome feynman_law() {
    Outcome o;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const double r = dpi::v2_feynman(eps, fig2).value * fig2.m * eps / fig2.hbar;
        o.check(r >= 0.97 && r <= 1.03, fmt("eps=%g: v2*m*eps/hbar=%.6f in [0.97,1.03]", eps, r));
    }
    return o;
}

Outcome start_time_independence() {
    Outcome o;
    const double ref = dpi::s_feynman(0.01, 0.0).value;
    for (double t0 : {0.1, 0.3, 0.7}) {
        const double d = std::abs(dpi::s_feynman(0.01, t0).value - ref);
        o.check(d <= 1e-8, fmt("t0=%g: |diff|=%.3e <= 1e-8", t0, d));
    }
    return o;
}

Outcome closed_form() {
    Outcome o;
    for (double tau : {1e-3, 1e-2, 0.1}) {
        const double d = std::abs(dpi::s_feynman_closed(tau) - dpi::s_feynman(tau, 0.0).value);
        o.check(d <= 1e-8, fmt("tau=%g: |closed-series|=%.3e <= 1e-8", tau, d));
    }
    return o;
}

Outcome plateau() {
    Outcome o;
    const double a = dpi::v2_diff(1e-5, fig2).value;
    const double b = dpi::v2_diff(1e-6, fig2).value;
    const double uv = v2_uv(fig2);
    const double rel = std::abs(a - b) / b;
    o.check(rel < 0.05, fmt("v2(1e-5)=%.6f v2(1e-6)=%.6f differ by %.3e < 5%%", a, b, rel));
    o.check(a <= uv && b <= uv, fmt("both <= v2_UV=%.6f (max %.6f)", uv, std::max(a, b)));
    return o;
}

Outcome bifurcation() {
    Outcome o;
    const auto c = dpi::regime_crossing(fig2);
    o.check(c.has_value(), "crossing found");
    if (c) o.check(*c >= 0.005 && *c <= 0.1, fmt("crossing eps=%.6f in [0.005,0.1]", *c));
    return o;
}

Outcome low_resolution_correction() {
    Outcome o;
    const double eps_d = fig2.epsilon_D();
    const double hi = std::min(10.0 * eps_d, 0.99 * fig2.T);
    o.info.push_back(fmt("eps grid [%.4f, %.4f] (10 eps_D=%.4f clipped below T)", 3.0 * eps_d, hi, 10.0 * eps_d));
    bool ok = true;
    double worst = 0.0;
    for (double eps : linspace(3.0 * eps_d, hi, 25)) {
        const double diff = dpi::v2_feynman(eps, fig2).value - dpi::v2_diff(eps, fig2).value;
        const double bound = dpi::low_resolution_correction_bound(eps, fig2);
        ok = ok && diff >= 0.0 && diff <= bound;
        worst = std::max(worst, diff / bound);
    }
    o.check(ok, fmt("0 <= v2_F - v2_D <= bound on 25 points, max diff/bound=%.4f", worst));
    return o;
}

Outcome commutator_regimes() {
    Outcome o;
    const double uv = v2_uv(fig2);
    const auto c5 = dpi::commutator_expectation(1e-5, fig2, dpi::Model::differentiable);
    const auto c6 = dpi::commutator_expectation(1e-6, fig2, dpi::Model::differentiable);
    const double linear = c5.value / c6.value;
    o.check(std::abs(linear - 10.0) <= 0.5, fmt("<[x,p]>(1e-5)/<[x,p]>(1e-6)=%.4f (linear vanishing)", linear));
    const double slope = c6.value / 1e-6;
    const double rel = std::abs(fig2.m * uv - slope) / slope;
    o.check(rel <= 0.2, fmt("slope m*v2_UV=%.4f vs measured %.4f, rel %.4f <= 0.2", fig2.m * uv, slope, rel));
    const double high = dpi::commutator_expectation(0.3, fig2, dpi::Model::differentiable).value;
    const double dev = std::abs(high - fig2.hbar) / fig2.hbar;
    o.check(dev <= 0.03, fmt("eps=0.3: <[x,p]>=%.4f, |.-hbar|/hbar=%.4f <= 0.03", high, dev));
    o.info.push_back(fmt("Feynman model at eps=0.3 gives %.4f", dpi::commutator_expectation(0.3, fig2, dpi::Model::feynman).value));
    return o;
}

Outcome monte_carlo() {
    Outcome o;
    for (double eps : {1e-3, 0.05}) {
        const auto e = dpi::estimate_v2(fig2, eps, 0.0, 1000, 100'000, 1);
        const double exact = dpi::v2_diff(eps, fig2).value;
        const double z = std::abs(e.mean - exact) / e.std_error;
        o.check(z <= 3.0, fmt("eps=%g: mc=%.5f analytic=%.5f", eps, e.mean, exact) + fmt(" |z|=%.2f <= 3", z));
    }
    const auto modes = dpi::mode_measures(fig2, 1000);
    bool ok = true;
    double worst = 0.0;
    for (std::size_t j : {1u, 2u, 5u, 10u, 100u, 1000u}) {
        const auto e = dpi::estimate_mode_second_moment(fig2, j, 100'000, 2);
        const double z = std::abs(e.mean - modes[j - 1].second_moment()) / e.std_error;
        ok = ok && z <= 3.0;
        worst = std::max(worst, z);
    }
    o.check(ok, fmt("mode second moments j=1..1000 within 3 sigma (max |z|=%.2f)", worst));
    return o;
}

Outcome oscillator_limits() {
    Outcome o;
    const auto zero = dpi::log_pi(1.0, fig4.with_omega(0.0));
    o.check(zero.log_pi == 0.0, fmt("omega=0: log_pi=%g exactly 0", zero.log_pi));
    const auto free = dpi::log_pi_truncated(1.0, dpi::ModelParams::with_amplitude(1e12, 2.1).with_omega(1.0), kFig4Terms);
    o.check(std::abs(free.log_pi) < 1e-8, fmt("A=1e12: |log_pi|=%.3e < 1e-8", std::abs(free.log_pi)));
    return o;
}

Outcome fig4_magnitudes() {
    Outcome o;
    const auto low = dpi::spectrum_shift(1.0, fig4.with_omega(1.0), 0, {kFig4Terms});
    const auto high = dpi::spectrum_shift(1.0, fig4.with_omega(1e4), 0, {kFig4Terms});
    const double r1 = low.delta_omega / low.omega;
    const double r2 = high.delta_omega / high.omega;
    o.check(r1 >= 0.002 && r1 <= 0.05, fmt("omega=1: d_omega/omega=%.5f in [0.002,0.05]", r1));
    o.check(r2 >= 0.5 && r2 <= 1.0, fmt("omega=1e4: d_omega/omega=%.5f in [0.5,1]", r2));
    o.info.push_back(fmt("hbar d_omega / E0 = 2 d_omega/omega: %.5f at omega=1, %.5f at omega=1e4", 2.0 * r1, 2.0 * r2));
    o.info.push_back(fmt("upper limit ln(sinh(wT)/wT)/(2 wT) at omega=1e4: %.5f",
                         (1e4 - std::log(2.0) - std::log(1e4)) / 2e4));
    return o;
}

Outcome unitarity() {
    Outcome o;
    const auto p = fig4.with_omega(1.0);
    const auto coarse = linspace(0.2, 5.0, 25);
    const auto fine = linspace(0.01, 0.05, 9);
    const auto rc = dpi::unitarity_diagnostic(coarse, p, {kFig4Terms});
    const auto rf = dpi::unitarity_diagnostic(fine, p, {kFig4Terms});
    o.check(rc.max_rel_deviation <= 0.1, fmt("T in [0.2,5]: max rel deviation %.4f <= 0.1", rc.max_rel_deviation));
    o.check(rf.max_rel_deviation > 0.5, fmt("T in [0.01,0.05]: max rel deviation %.4f > 0.5", rf.max_rel_deviation));
    o.info.push_back(fmt("fitted slope of ln Pi against T: %.6f, mean d_omega %.6f", rc.fitted_omega, rc.mean_delta_omega));
    return o;
}

Outcome level_spacing() {
    Outcome o;
    const auto p = fig4.with_omega(1.0);
    const auto s = dpi::spectrum_shift(1.0, p, 0, {1000});
    double worst = 0.0;
    for (int n : {0, 5, 50}) {
        const double gap = s.level(n + 1) - s.level(n);
        worst = std::max(worst, std::abs(gap - p.hbar * s.omega) / (p.hbar * s.omega));
    }
    o.check(worst <= 1e-12, fmt("max |E_{n+1}-E_n-hbar omega|/(hbar omega)=%.3e <= 1e-12", worst));
    return o;
}

Outcome large_omega_linearity() {
    Outcome o;
    const auto scan = dpi::scan_E0_vs_omega(linspace(100.0, 1e4, 50), fig4, 1.0, {kFig4Terms});
    o.check(scan.fit.residual <= 0.05, fmt("E0_D = a + b omega: relative residual %.4f <= 0.05", scan.fit.residual));
    o.info.push_back(fmt("a=%.4f b=%.6f over %g points", scan.fit.a, scan.fit.b, static_cast<double>(scan.fit.n_points)));
    return o;
}

Outcome casimir() {
    Outcome o;
    dpi::CasimirConfig std_exp;
    dpi::CasimirConfig std_gauss;
    std_gauss.regulator = dpi::Regulator::gaussian;
    const double s = dpi::casimir_coefficient(std_exp, dpi::CasimirModel::standard);
    o.check(std::abs(s + 1.0 / 12.0) <= 1e-4, fmt("standard: delta=%.8f, |delta+1/12|=%.2e <= 1e-4", s, std::abs(s + 1.0 / 12.0)));

    const double x = 0.1;
    dpi::CasimirConfig tanh_exp;
    tanh_exp.omega_D = pi * tanh_exp.c / (tanh_exp.L * x);
    dpi::CasimirConfig tanh_gauss = tanh_exp;
    tanh_gauss.regulator = dpi::Regulator::gaussian;
    const double t = dpi::casimir_coefficient(tanh_exp, dpi::CasimirModel::tanh);
    const double target = -1.0 / 12.0 - x * x / 40.0;
    o.check(std::abs(t - target) <= std::pow(x, 4),
            fmt("tanh x=0.1: delta=%.8f vs -1/12-x^2/40=%.8f, |diff|=%.2e <= x^4", t, target, std::abs(t - target)));
    o.info.push_back(fmt("tanh x=0.1 vs -1/12-x^2/360=%.8f: |diff|=%.2e", -1.0 / 12.0 - x * x / 360.0,
                         std::abs(t + 1.0 / 12.0 + x * x / 360.0)));

    const double d1 = std::abs(s - dpi::casimir_coefficient(std_gauss, dpi::CasimirModel::standard));
    const double d2 = std::abs(t - dpi::casimir_coefficient(tanh_gauss, dpi::CasimirModel::tanh));
    o.check(d1 < 1e-4 && d2 < 1e-4, fmt("regulator swap changes delta by %.2e (standard), %.2e (tanh) < 1e-4", d1, d2));
    return o;
}

Outcome epsilon_d_bound() {
    Outcome o;
    const auto b = dpi::epsilon_d_bound(1e-7, 0.01, 299'792'458.0);
    o.check(b.epsilon_D_order >= 1e-16 && b.epsilon_D_order <= 1e-14,
            fmt("eps_D ~ L/c = %.3e s in [1e-16,1e-14]", b.epsilon_D_order));
    o.info.push_back(fmt("exact inequality: omega_D >= %.3e /s, eps_D <= %.3e s", b.omega_D_min, b.epsilon_D_exact));
    return o;
}

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list{
        {1, 5, "Feynman velocity law", feynman_law},
        {2, 5, "start-time independence", start_time_independence},
        {3, 5, "closed form vs series", closed_form},
        {4, 60, "plateau regularization", plateau},
        {5, 60, "bifurcation location", bifurcation},
        {6, 60, "low-resolution correction", low_resolution_correction},
        {7, 30, "commutator regimes", commutator_regimes},
        {8, 120, "Monte-Carlo oracle", monte_carlo},
        {9, 10, "oscillator trivial limits", oscillator_limits},
        {10, 300, "shift magnitudes", fig4_magnitudes},
        {11, 300, "unitarity", unitarity},
        {12, 1, "level-spacing invariance", level_spacing},
        {13, 300, "large-omega linearity", large_omega_linearity},
        {14, 30, "Casimir energy", casimir},
        {15, 1, "epsilon_D bound", epsilon_d_bound},
    };
    return list;
}

bool run(const Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = c.run();
    } catch (const std::exception& e) {
        o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    std::printf("C%02d %s %s (%.2f s, limit %g s)\n", c.id, pass ? "PASS" : "FAIL", c.title, secs, c.limit_s);
    for (const auto& d : o.details) std::printf("    %s\n", d.c_str());
    if (!in_time) std::printf("    FAILED runtime limit exceeded\n");
    for (const auto& i : o.info) std::printf("    info: %s\n", i.c_str());
    std::fflush(stdout);
    return pass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks"};
    int which = 0;
    app.add_option("--criterion", which, "Run a single criterion (1-15); default runs all")->check(CLI::Range(0, 15));
    CLI11_PARSE(app, argc, argv);

    int failed = 0;
    for (const auto& c : criteria())
        if (which == 0 || c.id == which) failed += run(c) ? 0 : 1;
    if (which == 0) std::printf("%d of %zu criteria failed\n", failed, criteria().size());
    return failed == 0 ? 0 : 1;
}
