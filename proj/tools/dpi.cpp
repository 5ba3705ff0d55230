#include <cmath>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpi/dpi.hpp"

namespace {

using json = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitConvergence = 2;

// === Shared flags ============================================================

struct Grid {
    double min = 0.0;
    double max = 0.0;
    int points = 1;
    bool log = false;

    [[nodiscard]] std::vector<double> values(const char* what) const {
        if (points < 1) throw UsageError(std::string(what) + ": --points must be >= 1");
        if (!(min > 0.0) || !(max >= min)) throw UsageError(std::string(what) + ": need 0 < min <= max");
        std::vector<double> v(static_cast<std::size_t>(points));
        for (int i = 0; i < points; ++i) {
            const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
            v[i] = log ? std::exp(std::log(min) + f * (std::log(max) - std::log(min))) : min + f * (max - min);
        }
        if (points > 1) v.back() = max;
        return v;
    }

    [[nodiscard]] std::string describe() const {
        return dpi::format_double(min) + ".." + dpi::format_double(max) + " x" + std::to_string(points) +
               (log ? " log" : " linear");
    }
};

struct Flags {
    double m = 1.0;
    double hbar = 1.0;
    double T = 1.0;
    double alpha = 2.1;
    std::optional<double> A;
    std::optional<double> epsilon_D;
    std::optional<double> omega;
    double tol = dpi::kDefaultTol;
    std::uint64_t seed = 1;
    std::string out;
    std::string json_out;

    // One grid per subcommand: defaults must not leak between subcommands.
    Grid v2_grid{1e-4, 0.5, 60};
    Grid spectrum_grid{0.01, 5.0, 50};
    Grid unitarity_grid{0.2, 5.0, 25};
    Grid commutator_grid{1e-5, 0.5, 40};
    Grid casimir_grid{1.0, 1.0, 1};
    std::string v2_model = "both";
    std::string commutator_model = "differentiable";
    double unitarity_omega = 1.0;
    std::size_t n_terms = 0;
    std::string scan = "T";
    double threshold = 0.1;

    std::size_t N = 256;
    std::string format = "coefficients";
    std::string variant = "brownian";
    int grid_points = 201;

    std::string casimir_model = "standard";
    std::string regulator = "exp";
    double omega_D = std::numeric_limits<double>::infinity();
    double c = 1.0;
    double n_c = 100.0;
    bool bound = false;
    double L_exp = 1e-7;
    double rel_error = 0.01;

    std::vector<double> eps_list{1e-3, 0.05};
    std::size_t modes = dpi::kDefaultMcModes;
    std::size_t samples = dpi::kDefaultMcSamples;
    std::string quantity = "v2";
    std::vector<std::size_t> mode_indices{1, 2, 5, 10};
};

dpi::ModelParams model_params(const Flags& f) {
    dpi::ModelParams p = f.epsilon_D ? dpi::ModelParams::with_scale(*f.epsilon_D, f.alpha, f.T, f.m, f.hbar)
                                     : dpi::ModelParams::with_amplitude(f.A.value_or(10.0), f.alpha, f.T, f.m, f.hbar);
    p.omega = f.omega;
    try {
        p.validate();
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return p;
}

void add_model_flags(CLI::App* app, Flags& f) {
    app->add_option("--m", f.m, "Mass")->capture_default_str();
    app->add_option("--hbar", f.hbar, "Reduced Planck constant")->capture_default_str();
    app->add_option("--T", f.T, "Total time")->capture_default_str();
    app->add_option("--alpha", f.alpha, "Differentiability exponent")->capture_default_str();
    auto* a = app->add_option("--A", f.A, "Amplitude bound (default 10)");
    auto* e = app->add_option("--epsilon-D", f.epsilon_D, "Differentiable time scale");
    a->excludes(e);
}

void add_run_flags(CLI::App* app, Flags& f) {
    app->add_option("--tol", f.tol, "Relative tail tolerance")->capture_default_str();
    app->add_option("--seed", f.seed, "Root random seed")->capture_default_str();
    app->add_option("--out", f.out, "Output file (default: standard output)");
}

// === Output ==================================================================

struct Output {
    std::ostringstream header;
    std::ostringstream body;

    void meta(const std::string& line) { header << "# " << line << '\n'; }
};

std::string command_line(int argc, char** argv) {
    std::string s = "dpi";
    for (int i = 1; i < argc; ++i) {
        s += ' ';
        s += argv[i];
    }
    return s;
}

void write_params_meta(Output& o, const dpi::ModelParams& p) {
    std::string line = "params: m=" + dpi::format_double(p.m) + " hbar=" + dpi::format_double(p.hbar) +
                       " T=" + dpi::format_double(p.T) + " alpha=" + dpi::format_double(p.alpha);
    line += p.amplitude_is_primary() ? " A=" + dpi::format_double(p.A()) : " epsilon_D=" + dpi::format_double(p.epsilon_D());
    if (p.omega) line += " omega=" + dpi::format_double(*p.omega);
    o.meta(line);
    std::string derived = "derived: A=" + dpi::format_double(p.A()) + " A_bar=" + dpi::format_double(p.A_bar()) +
                          " B=" + dpi::format_double(p.B());
    if (p.alpha > 1.0) derived += " epsilon_D=" + dpi::format_double(p.epsilon_D());
    o.meta(derived);
}

void emit(const Flags& f, const Output& o) {
    const std::string text = o.header.str() + o.body.str();
    if (f.out.empty()) {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream file(f.out, std::ios::binary);
    if (!file) throw UsageError("cannot open output file " + f.out);
    file << text;
}

void emit_json(const std::string& path, const json& j) {
    std::ofstream file(path, std::ios::binary);
    if (!file) throw UsageError("cannot open output file " + path);
    file << j.dump(2) << '\n';
}

json meta_json(const std::string& cmdline, const Flags& f) {
    return {{"command", cmdline}, {"tol", f.tol}, {"seed", f.seed}, {"rng", std::string(dpi::kRngAlgorithm)}};
}

void require_in_duration(const std::vector<double>& grid, const dpi::ModelParams& p) {
    for (double e : grid)
        if (!(e > 0.0 && e < p.T)) throw UsageError("resolution grid must lie inside (0, T); got " + dpi::format_double(e));
}

// === Subcommands =============================================================

int cmd_v2(const Flags& f, Output& o) {
    const auto p = model_params(f);
    const auto grid = f.v2_grid.values("v2");
    require_in_duration(grid, p);
    if (f.v2_model != "both" && f.v2_model != "feynman" && f.v2_model != "differentiable")
        throw UsageError("--model must be both, feynman or differentiable");
    write_params_meta(o, p);
    o.meta("grid: eps " + f.v2_grid.describe());
    o.meta("truncation: adaptive, tol=" + dpi::format_double(f.tol));

    std::vector<dpi::V2Row> feyn, diff;
    if (f.v2_model != "differentiable") feyn = dpi::scan_v2(grid, p, dpi::Model::feynman, f.tol);
    if (f.v2_model != "feynman") diff = dpi::scan_v2(grid, p, dpi::Model::differentiable, f.tol);
    std::vector<dpi::V2Row> rows;
    bool converged = true;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (const auto* part : {&feyn, &diff}) {
            if (part->empty()) continue;
            rows.push_back((*part)[i]);
            converged = converged && (*part)[i].v2.converged;
        }
    }
    dpi::write_v2_csv(o.body, rows);
    return converged ? kExitOk : kExitConvergence;
}

int cmd_spectrum(const Flags& f, Output& o, const std::string& cmdline) {
    const auto p = model_params(f);
    if (!p.omega && f.scan == "T") throw UsageError("--omega is required for a T scan");
    const dpi::PiOptions opts{f.n_terms, f.tol};
    const auto grid = f.spectrum_grid.values("spectrum");
    write_params_meta(o, p);
    o.meta("grid: " + f.scan + " " + f.spectrum_grid.describe());
    o.meta(f.n_terms ? "truncation: n_terms=" + std::to_string(f.n_terms) : "truncation: adaptive, tol=" + dpi::format_double(f.tol));

    bool converged = true;
    if (f.scan == "T") {
        const auto rows = dpi::scan_shift(grid, p, opts);
        for (const auto& r : rows) converged = converged && r.pi.converged;
        dpi::write_shift_csv(o.body, rows);
    } else if (f.scan == "omega") {
        const auto scan = dpi::scan_E0_vs_omega(grid, p, p.T, opts);
        for (const auto& r : scan.rows) converged = converged && r.converged;
        o.meta("fit: E0_D = a + b omega over the upper half of the grid; a=" + dpi::format_double(scan.fit.a) +
               " b=" + dpi::format_double(scan.fit.b) + " residual=" + dpi::format_double(scan.fit.residual));
        dpi::write_E0_csv(o.body, scan.rows);
        if (!f.json_out.empty()) {
            emit_json(f.json_out, {{"meta", meta_json(cmdline, f)},
                                   {"fit", {{"a", scan.fit.a}, {"b", scan.fit.b}, {"residual", scan.fit.residual},
                                            {"n_points", scan.fit.n_points}}}});
        }
    } else {
        throw UsageError("--scan must be T or omega");
    }
    return converged || f.n_terms > 0 ? kExitOk : kExitConvergence;
}

int cmd_unitarity(const Flags& f, Output& o, const std::string& cmdline) {
    const auto p = model_params(f).with_omega(f.unitarity_omega);
    const auto grid = f.unitarity_grid.values("unitarity");
    const auto rep = dpi::unitarity_diagnostic(grid, p, {f.n_terms, f.tol}, f.threshold);
    const std::string verdict = rep.unitary_compatible ? "unitary-compatible" : "non-unitary";
    write_params_meta(o, p);
    o.meta("grid: T " + f.unitarity_grid.describe());
    o.meta(f.n_terms ? "truncation: n_terms=" + std::to_string(f.n_terms) : "truncation: adaptive, tol=" + dpi::format_double(f.tol));
    o.meta("verdict: " + verdict + " max_rel_deviation=" + dpi::format_double(rep.max_rel_deviation) +
           " threshold=" + dpi::format_double(f.threshold));

    o.body << "T,delta_omega,log_pi,n_terms,coarse,rel_deviation\n";
    bool converged = true;
    for (const auto& pt : rep.points) {
        dpi::write_csv_row(o.body, {dpi::format_double(pt.T), dpi::format_double(pt.delta_omega), dpi::format_double(pt.log_pi),
                                    std::to_string(pt.n_terms), pt.coarse ? "1" : "0", dpi::format_double(pt.rel_deviation)});
        converged = converged && pt.converged;
    }
    if (!f.json_out.empty()) {
        auto sub = [](const dpi::UnitaritySubgrid& g) {
            return json{{"n_points", g.n_points}, {"mean_delta_omega", g.mean_delta_omega}, {"max_rel_deviation", g.max_rel_deviation}};
        };
        json j{{"meta", meta_json(cmdline, f)},
               {"verdict", verdict},
               {"max_rel_deviation", rep.max_rel_deviation},
               {"mean_delta_omega", rep.mean_delta_omega},
               {"threshold", rep.threshold},
               {"coarse", sub(rep.coarse)},
               {"fine", sub(rep.fine)}};
        j["fitted_omega"] = std::isnan(rep.fitted_omega) ? json(nullptr) : json(rep.fitted_omega);
        emit_json(f.json_out, j);
    }
    return converged || f.n_terms > 0 ? kExitOk : kExitConvergence;
}

int cmd_paths(const Flags& f, Output& o) {
    const auto p = model_params(f);
    if (f.N < 1) throw UsageError("--N must be >= 1");
    auto path = dpi::sample_brownian(p, f.N, f.seed);
    write_params_meta(o, p);
    o.meta("modes: N=" + std::to_string(f.N) + " variant=" + f.variant);
    if (f.variant == "twin") {
        const auto twin = dpi::differentiable_twin(path, p);
        o.meta("j_D=" + std::to_string(twin.j_D));
        path = twin.twin;
    } else if (f.variant != "brownian") {
        throw UsageError("--variant must be brownian or twin");
    }
    if (f.format == "coefficients") {
        dpi::write_coefficients_csv(o.body, path);
    } else if (f.format == "trajectory") {
        if (f.grid_points < 2) throw UsageError("--grid-points must be >= 2");
        std::vector<double> t(static_cast<std::size_t>(f.grid_points));
        for (int i = 0; i < f.grid_points; ++i) t[i] = p.T * i / (f.grid_points - 1);
        t.back() = p.T;
        dpi::write_trajectory_csv(o.body, path, t);
    } else {
        throw UsageError("--format must be coefficients or trajectory");
    }
    return kExitOk;
}

int cmd_commutator(const Flags& f, Output& o) {
    const auto p = model_params(f);
    const auto grid = f.commutator_grid.values("commutator");
    require_in_duration(grid, p);
    dpi::Model model;
    if (f.commutator_model == "feynman") model = dpi::Model::feynman;
    else if (f.commutator_model == "differentiable") model = dpi::Model::differentiable;
    else throw UsageError("--model must be feynman or differentiable");
    write_params_meta(o, p);
    o.meta("grid: eps " + f.commutator_grid.describe() + " model=" + f.commutator_model);
    const auto rows = dpi::scan_commutator(grid, p, model, f.tol);
    if (model == dpi::Model::differentiable && p.alpha > 2.0) {
        const auto g = dpi::gup_coefficient(p);
        o.meta("gup: beta=" + dpi::format_double(g.beta) + " p_uv=" + dpi::format_double(g.p_uv) + " p_D=" + dpi::format_double(g.p_D));
    }
    dpi::write_commutator_csv(o.body, rows);
    for (const auto& r : rows)
        if (!r.v2.converged) return kExitConvergence;
    return kExitOk;
}

int cmd_casimir(const Flags& f, Output& o, const std::string& cmdline) {
    if (f.bound) {
        dpi::EpsilonDBound b;
        try {
            b = dpi::epsilon_d_bound(f.L_exp, f.rel_error, f.c);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        const json j{{"meta", meta_json(cmdline, f)},
                     {"L_exp", b.L_exp},
                     {"rel_error", b.rel_error},
                     {"c", b.c},
                     {"x2_coefficient", b.x2_coefficient},
                     {"x_max", b.x_max},
                     {"omega_D_min", b.omega_D_min},
                     {"epsilon_D_exact", b.epsilon_D_exact},
                     {"epsilon_D_order", b.epsilon_D_order}};
        o.body << j.dump(2) << '\n';
        return kExitOk;
    }
    dpi::CasimirModel model;
    if (f.casimir_model == "standard") model = dpi::CasimirModel::standard;
    else if (f.casimir_model == "tanh") model = dpi::CasimirModel::tanh;
    else throw UsageError("--model must be standard or tanh");
    dpi::Regulator reg;
    if (f.regulator == "exp") reg = dpi::Regulator::exponential;
    else if (f.regulator == "gauss") reg = dpi::Regulator::gaussian;
    else throw UsageError("--regulator must be exp or gauss");

    const auto grid = f.casimir_grid.values("casimir");
    std::vector<dpi::CasimirConfig> configs;
    for (double L : grid) {
        dpi::CasimirConfig c{L, f.omega_D, f.c, f.hbar, f.n_c, reg};
        try {
            c.validate();
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
        configs.push_back(c);
    }
    o.meta("casimir: model=" + f.casimir_model + " regulator=" + f.regulator + " omega_D=" + dpi::format_double(f.omega_D) +
           " c=" + dpi::format_double(f.c) + " hbar=" + dpi::format_double(f.hbar));
    o.meta("extrapolation: Richardson over n_c=" + dpi::format_double(f.n_c) + ",10x,100x");
    o.meta("grid: L " + f.casimir_grid.describe());
    std::vector<dpi::CasimirRow> rows(configs.size());
    dpi::parallel_for(configs.size(), [&](std::size_t i) {
        rows[i] = {configs[i].L, dpi::casimir_energy(configs[i], model), model, configs[i].x()};
    });
    dpi::write_casimir_csv(o.body, rows);
    return kExitOk;
}

int cmd_oracle(const Flags& f, Output& o) {
    const auto p = model_params(f);
    write_params_meta(o, p);
    o.meta("monte-carlo: modes=" + std::to_string(f.modes) + " samples=" + std::to_string(f.samples) +
           " replicas=" + std::to_string(dpi::kMcReplicas));
    std::vector<dpi::McRow> rows;
    auto analytic = [](double v) {
        dpi::McEstimate e;
        e.mean = v;
        return e;
    };
    auto z_row = [](const dpi::McEstimate& mc, double v) {
        dpi::McEstimate e;
        e.mean = mc.std_error > 0.0 ? (mc.mean - v) / mc.std_error : 0.0;
        return e;
    };
    bool converged = true;
    if (f.quantity == "v2") {
        std::vector<double> eps = f.eps_list;
        require_in_duration(eps, p);
        o.meta("rows: v2_mc, v2_analytic (stderr column holds the series tail bound), z = (mc - analytic)/stderr");
        for (double e : eps) {
            const auto mc = dpi::estimate_v2(p, e, 0.0, f.modes, f.samples, f.seed);
            const auto an = dpi::v2_diff(e, p, f.tol);
            converged = converged && an.converged;
            const std::string tag = "(eps=" + dpi::format_double(e) + ")";
            o.meta("truncation" + tag + ": bound=" + dpi::format_double(mc.truncation_bound) +
                   (mc.sufficient_modes ? " sufficient" : " insufficient"));
            auto an_row = analytic(an.value);
            an_row.std_error = an.tail_bound;
            rows.push_back({"v2_mc" + tag, mc});
            rows.push_back({"v2_analytic" + tag, an_row});
            rows.push_back({"z" + tag, z_row(mc, an.value)});
        }
    } else if (f.quantity == "moments") {
        o.meta("rows: a2_mc, a2_exact, z = (mc - exact)/stderr");
        for (std::size_t j : f.mode_indices) {
            if (j < 1) throw UsageError("--mode indices must be >= 1");
            const auto mc = dpi::estimate_mode_second_moment(p, j, f.samples, f.seed);
            const double exact = dpi::mode_measures(p, j).back().second_moment();
            const std::string tag = "(j=" + std::to_string(j) + ")";
            rows.push_back({"a2_mc" + tag, mc});
            rows.push_back({"a2_exact" + tag, analytic(exact)});
            rows.push_back({"z" + tag, z_row(mc, exact)});
        }
    } else {
        throw UsageError("--quantity must be v2 or moments");
    }
    dpi::write_mc_csv(o.body, rows);
    return converged ? kExitOk : kExitConvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable path integral numerics"};
    app.require_subcommand(1);
    Flags f;

    auto* v2 = app.add_subcommand("v2", "Mean square velocity against resolution, both models");
    add_model_flags(v2, f);
    add_run_flags(v2, f);
    v2->add_option("--eps-min", f.v2_grid.min, "Smallest resolution")->capture_default_str();
    v2->add_option("--eps-max", f.v2_grid.max, "Largest resolution")->capture_default_str();
    v2->add_option("--points", f.v2_grid.points, "Grid points")->capture_default_str();
    v2->add_flag("--log", f.v2_grid.log, "Logarithmic spacing");
    v2->add_option("--model", f.v2_model, "both, feynman or differentiable")->capture_default_str();

    auto* spectrum = app.add_subcommand("spectrum", "Energy shift against T, or ground-state energy against omega");
    add_model_flags(spectrum, f);
    add_run_flags(spectrum, f);
    spectrum->add_option("--omega", f.omega, "Oscillator frequency (fixed for a T scan)");
    spectrum->add_option("--scan", f.scan, "T or omega")->capture_default_str();
    spectrum->add_option("--min", f.spectrum_grid.min, "Grid minimum")->capture_default_str();
    spectrum->add_option("--max", f.spectrum_grid.max, "Grid maximum")->capture_default_str();
    spectrum->add_option("--points", f.spectrum_grid.points, "Grid points")->capture_default_str();
    spectrum->add_flag("--log", f.spectrum_grid.log, "Logarithmic spacing");
    spectrum->add_option("--n-terms", f.n_terms, "Fixed number of factors (0 = adaptive)")->capture_default_str();
    spectrum->add_option("--json-out", f.json_out, "Write the omega-scan linear fit as JSON");

    auto* unitarity = app.add_subcommand("unitarity", "Constancy of the energy shift over T");
    add_model_flags(unitarity, f);
    add_run_flags(unitarity, f);
    unitarity->add_option("--omega", f.unitarity_omega, "Oscillator frequency")->capture_default_str();
    unitarity->add_option("--T-min", f.unitarity_grid.min, "Smallest T")->capture_default_str();
    unitarity->add_option("--T-max", f.unitarity_grid.max, "Largest T")->capture_default_str();
    unitarity->add_option("--points", f.unitarity_grid.points, "Grid points")->capture_default_str();
    unitarity->add_flag("--log", f.unitarity_grid.log, "Logarithmic spacing");
    unitarity->add_option("--n-terms", f.n_terms, "Fixed number of factors (0 = adaptive)")->capture_default_str();
    unitarity->add_option("--threshold", f.threshold, "Maximum relative deviation")->capture_default_str();
    unitarity->add_option("--json-out", f.json_out, "Write the verdict as JSON");

    auto* paths = app.add_subcommand("paths", "Random Fourier paths and their differentiable twins");
    add_model_flags(paths, f);
    add_run_flags(paths, f);
    paths->add_option("--N", f.N, "Number of Fourier modes")->capture_default_str();
    paths->add_option("--format", f.format, "coefficients or trajectory")->capture_default_str();
    paths->add_option("--variant", f.variant, "brownian or twin")->capture_default_str();
    paths->add_option("--grid-points", f.grid_points, "Trajectory samples on [0, T]")->capture_default_str();

    auto* commutator = app.add_subcommand("commutator", "Expectation of [x, p] against resolution");
    add_model_flags(commutator, f);
    add_run_flags(commutator, f);
    commutator->add_option("--eps-min", f.commutator_grid.min, "Smallest resolution")->capture_default_str();
    commutator->add_option("--eps-max", f.commutator_grid.max, "Largest resolution")->capture_default_str();
    commutator->add_option("--points", f.commutator_grid.points, "Grid points")->capture_default_str();
    commutator->add_flag("--log", f.commutator_grid.log, "Logarithmic spacing");
    commutator->add_option("--model", f.commutator_model, "feynman or differentiable")->capture_default_str();

    auto* casimir = app.add_subcommand("casimir", "One-dimensional Casimir energy and the resulting bound");
    add_run_flags(casimir, f);
    casimir->add_option("--model", f.casimir_model, "standard or tanh")->capture_default_str();
    casimir->add_option("--regulator", f.regulator, "exp or gauss")->capture_default_str();
    casimir->add_option("--L-min", f.casimir_grid.min, "Smallest plate separation")->capture_default_str();
    casimir->add_option("--L-max", f.casimir_grid.max, "Largest plate separation")->capture_default_str();
    casimir->add_option("--points", f.casimir_grid.points, "Grid points")->capture_default_str();
    casimir->add_flag("--log", f.casimir_grid.log, "Logarithmic spacing");
    casimir->add_option("--omega-D", f.omega_D, "Differentiability frequency (default infinite)");
    casimir->add_option("--c", f.c, "Speed of light")->capture_default_str();
    casimir->add_option("--hbar", f.hbar, "Reduced Planck constant")->capture_default_str();
    casimir->add_option("--n-c", f.n_c, "Base regulator cutoff")->capture_default_str();
    casimir->add_flag("--bound", f.bound, "Print the epsilon_D bound as JSON instead of an energy scan");
    casimir->add_option("--L-exp", f.L_exp, "Experimental plate separation for --bound")->capture_default_str();
    casimir->add_option("--rel-error", f.rel_error, "Relative precision for --bound")->capture_default_str();

    auto* oracle = app.add_subcommand("oracle", "Monte-Carlo estimates against the analytic series");
    add_model_flags(oracle, f);
    add_run_flags(oracle, f);
    oracle->add_option("--quantity", f.quantity, "v2 or moments")->capture_default_str();
    oracle->add_option("--eps", f.eps_list, "Resolutions for v2")->delimiter(',');
    oracle->add_option("--mode", f.mode_indices, "Mode indices for moments")->delimiter(',');
    oracle->add_option("--modes", f.modes, "Number of sampled modes")->capture_default_str();
    oracle->add_option("--samples", f.samples, "Samples per estimate")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string cmdline = command_line(argc, argv);
    Output o;
    o.meta(cmdline);
    o.meta("tol=" + dpi::format_double(f.tol) + " seed=" + std::to_string(f.seed));
    o.meta("rng: " + std::string(dpi::kRngAlgorithm));
    try {
        int code = kExitOk;
        if (*v2) code = cmd_v2(f, o);
        else if (*spectrum) code = cmd_spectrum(f, o, cmdline);
        else if (*unitarity) code = cmd_unitarity(f, o, cmdline);
        else if (*paths) code = cmd_paths(f, o);
        else if (*commutator) code = cmd_commutator(f, o);
        else if (*casimir) code = cmd_casimir(f, o, cmdline);
        else if (*oracle) code = cmd_oracle(f, o);
        emit(f, o);
        if (code == kExitConvergence) std::cerr << "dpi: series did not reach the requested tolerance\n";
        return code;
    } catch (const UsageError& e) {
        std::cerr << "dpi: " << e.what() << '\n';
        return kExitUsage;
    } catch (const dpi::ConvergenceError& e) {
        std::cerr << "dpi: " << e.what() << '\n';
        return kExitConvergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "dpi: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "dpi: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "dpi: " << e.what() << '\n';
        return kExitUsage;
    }
}
