#include "cli/run.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ostream>
#include <thread>

#include <Eigen/Core>

#include "cli/config.hpp"
#include "cli/io.hpp"
#include "qbath/master_eq.hpp"
#include "qbath/observables.hpp"
#include "qbath/parallel.hpp"
#include "qbath/rwa_oracle.hpp"

#ifndef QBATH_VERSION
#define QBATH_VERSION "0.0.0"
#endif

namespace qbath::cli {

namespace fs = std::filesystem;

namespace {

constexpr double heisenberg_slack = 1e-9;
constexpr double purity_slack = 1e-9;

struct Context {
    const RunConfig& cfg;
    fs::path dir;
    std::uint64_t seed;
    unsigned threads;
    std::ostream& out;
    std::vector<std::string> artifacts{};

    void csv(const std::string& name, const Csv& table) {
        if (!cfg.outputs.csv) return;
        write_text(dir / name, table.text());
        artifacts.push_back(name);
    }
    void json(const std::string& name, const ojson& doc) {
        if (!cfg.outputs.json) return;
        write_json(dir / name, doc);
        artifacts.push_back(name);
    }
};

ojson beta_json(double beta) { return std::isinf(beta) ? ojson("inf") : ojson(beta); }

ojson optional_json(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

ojson estimate_json(const EnsembleEstimate& e) {
    return {{"estimate", e.estimate}, {"std_error", e.std_error}, {"n_samples", e.n_samples}, {"seed", e.seed}};
}

ojson window_json(const std::optional<Window>& w, const TimeGrid& grid) {
    if (!w || w->size() == 0) return nullptr;
    return {{"t_begin", grid.t[w->begin]}, {"t_end", grid.t[w->end - 1]}, {"points", w->size()}};
}

ojson decay_json(const DecayReport& d, const TimeGrid& grid) {
    return {{"late_window_t_begin", grid.t[d.late_begin]},
            {"late_sup_A", d.late_sup_A},
            {"late_sup_C", d.late_sup_C},
            {"decayed", d.decayed},
            {"recurrence_onset", optional_json(d.recurrence_onset)}};
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Evaluation grid {0, t}; t defaults to the end of the configured grid.
TimeGrid instant_grid(const RunConfig& cfg) {
    const double t = cfg.experiment.time.value_or(cfg.t_max);
    return t > 0.0 ? TimeGrid{{0.0, t}} : TimeGrid{{0.0}};
}

std::size_t nearest_index(const TimeGrid& grid, double t) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (std::abs(grid.t[i] - t) < std::abs(grid.t[best] - t)) best = i;
    }
    return best;
}

void check_physical(double var_x, double var_p, double purity, double hbar, double t) {
    const double ratio = var_x * var_p / (0.25 * hbar * hbar);
    if (!(ratio >= 1.0 - heisenberg_slack)) {
        throw PhysicalityError("uncertainty product below hbar^2/4 at t = " + format_double(t), ratio, 0.0);
    }
    if (!(purity > 0.0 && purity <= 1.0 + purity_slack)) {
        throw PhysicalityError("purity " + format_double(purity) + " outside (0, 1] at t = " + format_double(t), purity, 0.0);
    }
}

void cmd_validate(Context& ctx) {
    const ModelSpec& m = ctx.cfg.model;
    const double min_eig = validate_model(m);
    ctx.out << "model ok: N = " << m.modes() << ", coupling " << to_string(m.coupling_family) << "\n";
    ctx.out << "min eigenvalue " << format_double(min_eig) << "\n";
    ctx.json("validate.json", {{"modes", m.modes()},
                               {"nu", m.nu},
                               {"coupling_family", to_string(m.coupling_family)},
                               {"min_eigenvalue", min_eig},
                               {"time_points", ctx.cfg.steps + 1},
                               {"bath", to_string(ctx.cfg.bath.kind)}});
}

void cmd_propagate(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const PropagatorCoefficients p = compute_propagator(cfg.model, cfg.grid(), ctx.threads);
    Csv table({"t", "re_A", "im_A", "re_C", "im_C", "sum_rule_defect"});
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double defect = sum_rule_defect(p, i);
        worst = std::max(worst, std::abs(defect));
        table.row({p.grid.t[i], p.A(r).real(), p.A(r).imag(), p.C(r).real(), p.C(r).imag(), defect});
    }
    ctx.csv("propagator.csv", table);
    if (cfg.outputs.binary) {
        write_bd_sidecar(ctx.dir / "propagator_BD.bin", p);
        ctx.artifacts.push_back("propagator_BD.bin");
    }
    const DecayReport decay = decay_report(p, cfg.experiment.threshold);
    ctx.json("propagator.json", {{"modes", p.modes()},
                                 {"time_points", p.size()},
                                 {"max_abs_sum_rule_defect", worst},
                                 {"decay", decay_json(decay, p.grid)},
                                 {"plateau", window_json(plateau_window(p, cfg.experiment.plateau_level), p.grid)}});
    ctx.out << "propagated " << p.size() << " points, max |sum rule defect| " << format_double(worst) << "\n";
}

void cmd_observables(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const PropagatorCoefficients p = compute_propagator(cfg.model, cfg.grid(), ctx.threads);
    const BathSpec bath = resolve_bath(cfg, cfg.model, ctx.seed);
    std::vector<Moments> rows(p.size());
    parallel_for(p.size(), ctx.threads, [&](std::size_t i) { rows[i] = moments(p, i, bath, cfg.oscillator); });

    Csv table({"t", "mean_x", "mean_p", "var_x", "var_p", "purity"});
    double min_ratio = std::numeric_limits<double>::infinity(), min_purity = 1.0, max_purity = 0.0;
    const double hbar = cfg.model.units.hbar;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const Moments& m = rows[i];
        check_physical(m.var_x, m.var_p, m.purity, hbar, p.grid.t[i]);
        min_ratio = std::min(min_ratio, m.var_x * m.var_p / (0.25 * hbar * hbar));
        min_purity = std::min(min_purity, m.purity);
        max_purity = std::max(max_purity, m.purity);
        table.row({p.grid.t[i], m.mean_x, m.mean_p, m.var_x, m.var_p, m.purity});
    }
    ctx.csv("observables.csv", table);

    const auto plateau = plateau_window(p, cfg.experiment.plateau_level);
    ojson doc{{"bath", to_string(cfg.bath.kind)},
              {"beta", beta_json(cfg.bath.beta)},
              {"seed", ctx.seed},
              {"plateau", window_json(plateau, p.grid)},
              {"final", {{"t", p.grid.t.back()},
                         {"mean_x", rows.back().mean_x},
                         {"mean_p", rows.back().mean_p},
                         {"var_x", rows.back().var_x},
                         {"var_p", rows.back().var_p},
                         {"purity", rows.back().purity}}},
              {"min_uncertainty_ratio", min_ratio},
              {"purity_range", {min_purity, max_purity}}};
    if (plateau) {
        double lo = 1.0, hi = 0.0;
        for (std::size_t i = plateau->begin; i < plateau->end; ++i) {
            lo = std::min(lo, rows[i].purity);
            hi = std::max(hi, rows[i].purity);
        }
        doc["plateau_purity_range"] = {lo, hi};
    }
    ctx.json("observables.json", doc);
    ctx.out << "observables on " << p.size() << " points, purity in [" << format_double(min_purity) << ", "
            << format_double(max_purity) << "]\n";
}

void cmd_purity(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const PropagatorCoefficients p = compute_propagator(cfg.model, cfg.grid(), ctx.threads);
    const BathSpec bath = resolve_bath(cfg, cfg.model, ctx.seed);
    std::vector<double> values(p.size());
    parallel_for(p.size(), ctx.threads, [&](std::size_t i) { values[i] = purity(p, i, bath, cfg.oscillator); });

    Csv table({"t", "abs_A2", "abs_C2", "purity"});
    std::size_t argmin = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!(values[i] > 0.0 && values[i] <= 1.0 + purity_slack)) {
            throw PhysicalityError("purity " + format_double(values[i]) + " outside (0, 1] at t = " +
                                       format_double(p.grid.t[i]),
                                   values[i], 0.0);
        }
        if (values[i] < values[argmin]) argmin = i;
        const auto r = static_cast<Eigen::Index>(i);
        table.row({p.grid.t[i], std::norm(p.A(r)), std::norm(p.C(r)), values[i]});
    }
    ctx.csv("purity.csv", table);
    ctx.json("purity.json", {{"bath", to_string(cfg.bath.kind)},
                             {"min_purity", values[argmin]},
                             {"t_at_min", p.grid.t[argmin]},
                             {"final_purity", values.back()},
                             {"plateau", window_json(plateau_window(p, cfg.experiment.plateau_level), p.grid)}});
    ctx.out << "purity minimum " << format_double(values[argmin]) << " at t = " << format_double(p.grid.t[argmin]) << "\n";
}

void cmd_ensemble(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const BathKind kind = cfg.bath.kind;
    if (kind != BathKind::SampleNumber && kind != BathKind::SampleCoherent) {
        cfg.fail("/bath/kind", "ensemble needs bath kind 'sample_number' or 'sample_coherent'");
    }
    const double beta = cfg.bath.beta;
    const PropagatorCoefficients p = compute_propagator(cfg.model, instant_grid(cfg));
    const std::size_t i = p.size() - 1;
    const std::size_t n = cfg.experiment.n_samples;
    const OscillatorState& s = cfg.oscillator;

    std::vector<Moments> members(n);
    std::vector<std::uint64_t> seeds(n);
    parallel_for(n, ctx.threads, [&](std::size_t k) {
        seeds[k] = member_seed(ctx.seed, k);
        const BathSpec bath = kind == BathKind::SampleNumber ? BathSpec(sample_number_state(beta, cfg.model, seeds[k]))
                                                             : BathSpec(sample_coherent_state(beta, cfg.model, seeds[k]));
        members[k] = moments(p, i, bath, s);
    });

    Csv table({"member", "seed", "mean_x", "mean_p", "var_x", "var_p", "purity"});
    std::vector<double> vx(n), vp(n), pur(n), x2(n), p2(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Moments& m = members[k];
        check_physical(m.var_x, m.var_p, m.purity, cfg.model.units.hbar, p.grid.t[i]);
        vx[k] = m.var_x;
        vp[k] = m.var_p;
        pur[k] = m.purity;
        x2[k] = m.mean_x * m.mean_x;
        p2[k] = m.mean_p * m.mean_p;
        table.row({static_cast<double>(k), static_cast<double>(seeds[k]), m.mean_x, m.mean_p, m.var_x, m.var_p, m.purity});
    }
    ctx.csv("ensemble.csv", table);

    const EnsembleEstimate mean_vx = summarize(vx, ctx.seed);
    std::vector<double> dev2(n);
    for (std::size_t k = 0; k < n; ++k) dev2[k] = (vx[k] - mean_vx.estimate) * (vx[k] - mean_vx.estimate);

    const Moments eq = moments(p, i, Equilibrium{beta}, s);
    ojson reference{{"var_x", eq.var_x}, {"var_p", eq.var_p}, {"purity", eq.purity}};
    if (kind == BathKind::SampleNumber) {
        reference["variance_of_var_x"] = number_variance_of_variance(p, i, beta);
        reference["averaged_purity"] = averaged_purity_number_exact(p, i, beta, s);
    } else {
        const Moments cold = moments(p, i, Equilibrium{zero_temperature}, s);
        const GaussianFParams hot_f = equilibrium_F_params(p, i, beta);
        const GaussianFParams cold_f = equilibrium_F_params(p, i, zero_temperature);
        const ModelSpec& m = cfg.model;
        const double dalpha = hot_f.alpha - cold_f.alpha, dgamma = (hot_f.gamma - cold_f.gamma).real();
        reference["member_var_x"] = cold.var_x;
        reference["member_var_p"] = cold.var_p;
        reference["mean_x_sq_excess"] = m.units.hbar / (m.units.mass * m.nu) * (dalpha + 2.0 * dgamma);
        reference["mean_p_sq_excess"] = m.units.hbar * m.units.mass * m.nu * (dalpha - 2.0 * dgamma);
        reference["oscillator_mean_x"] = cold.mean_x;
        reference["oscillator_mean_p"] = cold.mean_p;
    }
    ctx.json("ensemble.json", {{"bath", to_string(kind)},
                               {"beta", beta_json(beta)},
                               {"t", p.grid.t[i]},
                               {"seed", ctx.seed},
                               {"statistics",
                                {{"var_x", estimate_json(mean_vx)},
                                 {"var_p", estimate_json(summarize(vp, ctx.seed))},
                                 {"purity", estimate_json(summarize(pur, ctx.seed))},
                                 {"mean_x_sq", estimate_json(summarize(x2, ctx.seed))},
                                 {"mean_p_sq", estimate_json(summarize(p2, ctx.seed))},
                                 {"var_x_population_variance", estimate_json(summarize(dev2, ctx.seed))}}},
                               {"reference", reference}});
    ctx.out << n << " members at t = " << format_double(p.grid.t[i]) << ", mean var_x " << format_double(mean_vx.estimate)
            << " +- " << format_double(mean_vx.std_error) << "\n";
}

void cmd_master_eq(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const PropagatorCoefficients p = compute_propagator(cfg.model, cfg.grid(), ctx.threads);
    const BathSpec bath = resolve_bath(cfg, cfg.model, ctx.seed);
    const OscillatorState& s = cfg.oscillator;
    const double floor = cfg.experiment.denom_floor;
    const bool gaussian_path = !std::holds_alternative<NumberState>(bath) && is_gaussian(s);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::vector<GeneratorCoefficients> coeffs(p.size());
    parallel_for(p.size(), ctx.threads, [&](std::size_t i) {
        if (const auto jet = gaussian_F_jet(p, i, bath)) {
            coeffs[i] = try_gaussian_generator(p, i, *jet, floor);
            return;
        }
        try {
            const XiZeta g = xi_zeta(p, i, floor);
            coeffs[i].xi = g.xi;
            coeffs[i].zeta = g.zeta;
            coeffs[i].denom = g.denom;
            coeffs[i].valid = true;
            coeffs[i].kappa = coeffs[i].mu = coeffs[i].sigma = cplx(nan, nan);
        } catch (const SingularGeneratorError& e) {
            coeffs[i].valid = false;
            coeffs[i].denom = e.denom;
        }
    });

    const DecayReport decay = decay_report(p, cfg.experiment.threshold);
    const double horizon = decay.recurrence_onset.value_or(std::numeric_limits<double>::infinity());
    std::vector<std::size_t> window;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (coeffs[i].valid && p.grid.t[i] < horizon) window.push_back(i);
    }
    const std::vector<cplx> eta = eta_test_grid();
    std::vector<ResidualReport> residuals(window.size());
    parallel_for(window.size(), ctx.threads, [&](std::size_t k) {
        residuals[k] = gaussian_path ? generator_residual(p, window[k], bath, s, eta, floor)
                                     : general_residual(p, window[k], bath, s, eta, floor);
    });

    Csv table({"t", "re_xi", "im_xi", "re_zeta", "im_zeta", "re_kappa", "re_mu", "im_mu", "re_sigma", "im_sigma", "denom",
               "valid_flag"});
    std::size_t singular = 0;
    double max_sigma = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const GeneratorCoefficients& g = coeffs[i];
        if (!g.valid) {
            ++singular;
            table.row({p.grid.t[i], nan, nan, nan, nan, nan, nan, nan, nan, nan, g.denom, 0.0});
            continue;
        }
        if (std::isfinite(g.sigma.real())) max_sigma = std::max(max_sigma, std::abs(g.sigma));
        table.row({p.grid.t[i], g.xi.real(), g.xi.imag(), g.zeta.real(), g.zeta.imag(), g.kappa.real(), g.mu.real(),
                   g.mu.imag(), g.sigma.real(), g.sigma.imag(), g.denom, 1.0});
    }
    ctx.csv("master_eq.csv", table);

    double worst = 0.0;
    std::size_t flagged = 0, nodes = 0;
    for (const ResidualReport& r : residuals) {
        worst = std::max(worst, r.max_residual);
        flagged += r.flagged_nodes;
        nodes += r.nodes;
    }
    ojson win = nullptr;
    if (!window.empty()) {
        win = {{"t_begin", p.grid.t[window.front()]}, {"t_end", p.grid.t[window.back()]}, {"points", window.size()}};
    }
    ctx.json("master_eq.json", {{"bath", to_string(cfg.bath.kind)},
                                {"path", gaussian_path ? "gaussian" : "general"},
                                {"max_residual", worst},
                                {"flagged_nodes", flagged},
                                {"nodes", nodes},
                                {"window", win},
                                {"singular_points", singular},
                                {"max_abs_sigma", max_sigma},
                                {"recurrence_onset", optional_json(decay.recurrence_onset)}});
    ctx.out << "generator on " << p.size() << " points (" << singular << " singular), max residual "
            << format_double(worst) << "\n";
}

void cmd_rwa_compare(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    if (cfg.coupling_family != CouplingFamily::RWA) {
        cfg.fail("/model/coupling_family", "rwa-compare needs coupling_family 'rwa'");
    }
    const BathKind kind = cfg.bath.kind;
    const bool vacuum = kind == BathKind::Equilibrium && std::isinf(cfg.bath.beta);
    if (!vacuum && kind != BathKind::Coherent && kind != BathKind::SampleCoherent) {
        cfg.fail("/bath/kind", "rwa-compare needs a coherent bath or an equilibrium bath at beta \"inf\"");
    }
    const OscillatorState& s = cfg.oscillator;
    if (std::holds_alternative<GaussianMoments>(s)) {
        cfg.fail("/oscillator/kind", "rwa-compare needs oscillator kind 'squeezed' or 'cat'");
    }
    const PropagatorCoefficients p = compute_propagator(cfg.model, cfg.grid(), ctx.threads);
    const BathSpec bath = resolve_bath(cfg, cfg.model, ctx.seed);

    std::vector<double> engine(p.size()), oracle(p.size()), abs_a2(p.size());
    parallel_for(p.size(), ctx.threads, [&](std::size_t i) {
        abs_a2[i] = std::min(1.0, std::norm(p.A(static_cast<Eigen::Index>(i))));
        engine[i] = purity(p, i, bath, s);
        if (const auto* sq = std::get_if<SqueezedDisplaced>(&s)) {
            oracle[i] = purity_squeezed_rwa(abs_a2[i], sq->r);
        } else {
            const auto& cat = std::get<CatState>(s);
            oracle[i] = purity_cat_rwa(abs_a2[i], cat.alpha, cat.beta);
        }
    });

    Csv table({"t", "abs_A2", "purity", "oracle", "abs_diff"});
    double worst = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double diff = std::abs(engine[i] - oracle[i]);
        worst = std::max(worst, diff);
        table.row({p.grid.t[i], abs_a2[i], engine[i], oracle[i], diff});
    }
    ctx.csv("rwa_compare.csv", table);
    const MinPurityReport r = min_purity_check(engine, abs_a2);
    ctx.json("rwa_compare.json", {{"max_abs_diff", worst},
                                  {"min_purity", r.min_purity},
                                  {"t_at_min", p.grid.t[r.argmin]},
                                  {"abs_A2_at_min", r.abs_a2_at_min},
                                  {"min_at_half", r.min_at_half},
                                  {"resolution", r.resolution},
                                  {"symmetry_defect", r.symmetry_defect},
                                  {"constant", r.constant},
                                  {"passed", r.passed}});
    ctx.out << "engine vs closed form: max |diff| " << format_double(worst) << ", minimum " << format_double(r.min_purity)
            << " at |A|^2 = " << format_double(r.abs_a2_at_min) << "\n";
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        mx += std::log(x[k]);
        my += std::log(y[k]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
        sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
    }
    return sxy / sxx;
}

struct SweepPoint {
    DecayReport decay;
    std::optional<Window> plateau;
    double plateau_sup_a{0.0};
    double t_eval{0.0};
    double vov{0.0};
    TimeGrid grid;
};

void cmd_n_sweep(Context& ctx) {
    const RunConfig& cfg = ctx.cfg;
    const std::vector<std::size_t>& ns = cfg.experiment.sweep_N;
    if (ns.empty()) cfg.fail("/experiment", "n-sweep needs 'experiment.sweep_N'");
    if (cfg.spectral.family == SpectralFamily::Explicit) cfg.fail("/model/explicit", "n-sweep needs a 'spectral' model");
    const BathKind kind = cfg.bath.kind;
    if (kind == BathKind::Number || kind == BathKind::Coherent) {
        cfg.fail("/bath/kind", "n-sweep needs a bath described by beta alone (equilibrium or sample_*)");
    }
    const double beta = cfg.bath.beta;
    const double t_eval = cfg.experiment.time.value_or(cfg.t_max);

    std::vector<SweepPoint> points(ns.size());
    parallel_for(ns.size(), ctx.threads, [&](std::size_t k) {
        const ModelSpec model = cfg.model_with_modes(ns[k]);
        if (!(validate_model(model) > 0.0)) {
            throw NumericalError("n-sweep: quadratic form not positive definite at N = " + std::to_string(ns[k]));
        }
        const PropagatorCoefficients p = compute_propagator(model, cfg.grid());
        SweepPoint& pt = points[k];
        pt.grid = p.grid;
        pt.decay = decay_report(p, cfg.experiment.threshold);
        pt.plateau = plateau_window(p, cfg.experiment.plateau_level);
        const std::size_t lo = pt.plateau ? pt.plateau->begin : pt.decay.late_begin;
        const std::size_t hi = pt.plateau ? pt.plateau->end : p.size();
        for (std::size_t i = lo; i < hi; ++i) pt.plateau_sup_a = std::max(pt.plateau_sup_a, std::abs(p.A(static_cast<Eigen::Index>(i))));
        const std::size_t i_eval = nearest_index(p.grid, t_eval);
        pt.t_eval = p.grid.t[i_eval];
        pt.vov = number_variance_of_variance(p, i_eval, beta);
    });

    Csv table({"N", "late_sup_A", "plateau_t_begin", "plateau_t_end", "plateau_sup_A", "recurrence_onset",
               "variance_of_var_x", "decayed"});
    ojson entries = ojson::array();
    std::vector<double> xs, ys;
    bool positive = true, monotone = true, no_decay = false;
    std::optional<double> previous;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const SweepPoint& pt = points[k];
        const auto onset = pt.decay.recurrence_onset;
        table.row({static_cast<double>(ns[k]), pt.decay.late_sup_A, pt.plateau ? pt.grid.t[pt.plateau->begin] : nan,
                   pt.plateau ? pt.grid.t[pt.plateau->end - 1] : nan, pt.plateau_sup_a, onset.value_or(nan), pt.vov,
                   pt.decay.decayed ? 1.0 : 0.0});
        entries.push_back({{"N", ns[k]},
                           {"decay", decay_json(pt.decay, pt.grid)},
                           {"plateau", window_json(pt.plateau, pt.grid)},
                           {"plateau_sup_A", pt.plateau_sup_a},
                           {"no_decay", !pt.decay.decayed},
                           {"t_eval", pt.t_eval},
                           {"variance_of_var_x", pt.vov}});
        xs.push_back(static_cast<double>(ns[k]));
        ys.push_back(pt.vov);
        positive = positive && pt.vov > 0.0;
        no_decay = no_decay || !pt.decay.decayed;
        if (!onset || (previous && !(*onset > *previous))) monotone = false;
        previous = onset;
    }
    ctx.csv("n_sweep.csv", table);
    const ojson slope = positive && ns.size() >= 2 ? ojson(log_log_slope(xs, ys)) : ojson(nullptr);
    ctx.json("n_sweep.json", {{"beta", beta_json(beta)},
                              {"entries", entries},
                              {"variance_of_variance_slope", slope},
                              {"recurrence_onset_increasing", monotone},
                              {"no_decay", no_decay}});
    ctx.out << "swept " << ns.size() << " mode counts, variance-of-variance slope "
            << (slope.is_null() ? std::string("n/a") : format_double(slope.get<double>())) << "\n";
}

ojson diagnostic(const std::exception& e) {
    ojson d{{"error", "numerical"}, {"message", e.what()}};
    if (const auto* s = dynamic_cast<const SingularGeneratorError*>(&e)) {
        d["error"] = "singular_generator";
        d["index"] = s->index;
        d["denom"] = s->denom;
    } else if (const auto* n = dynamic_cast<const NumericalError*>(&e)) {
        d["error"] = "ill_conditioned";
        d["condition_number"] = n->condition_number;
    } else if (const auto* ph = dynamic_cast<const PhysicalityError*>(&e)) {
        d["error"] = "unphysical";
        d["a"] = ph->a;
        d["abs_g"] = ph->abs_g;
    } else if (const auto* acc = dynamic_cast<const AccuracyError*>(&e)) {
        d["error"] = "accuracy";
        d["error_estimate"] = acc->error_estimate;
    }
    return d;
}

}  // namespace

unsigned resolve_threads(std::optional<unsigned> flag, const char* env_value) {
    if (flag && *flag > 0) return *flag;
    if (env_value) {
        unsigned n = 0;
        const char* end = env_value + std::char_traits<char>::length(env_value);
        const auto [ptr, ec] = std::from_chars(env_value, end, n);
        if (ec == std::errc() && ptr == end && n > 0) return n;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

int run(const RunRequest& request, std::ostream& out, std::ostream& err) {
    const auto start = std::chrono::steady_clock::now();
    if (std::find(subcommands.begin(), subcommands.end(), request.subcommand) == subcommands.end()) {
        err << "qbath: unknown subcommand '" << request.subcommand << "'\n";
        return exit_invalid;
    }

    RunConfig cfg;
    try {
        cfg = load_config(request.config);
        if (cfg.experiment.kind && *cfg.experiment.kind != request.subcommand) {
            cfg.fail("/experiment/kind",
                     "experiment kind '" + *cfg.experiment.kind + "' does not match subcommand '" + request.subcommand + "'");
        }
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        return exit_invalid;
    }

    const fs::path dir = request.out.value_or(fs::path(cfg.outputs.directory));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        err << cfg.source << ":" << cfg.line_of("/outputs/directory") << ": cannot create output directory '"
            << dir.string() << "'\n";
        return exit_invalid;
    }

    const std::uint64_t seed = request.seed ? *request.seed : cfg.bath.seed.value_or(cfg.experiment.seed);
    const unsigned threads = resolve_threads(request.threads, std::getenv("QBATH_THREADS"));
    Context ctx{cfg, dir, seed, threads, out};

    int code = exit_ok;
    ojson diag = nullptr;
    try {
        const std::string& sub = request.subcommand;
        if (sub == "validate") cmd_validate(ctx);
        else if (sub == "propagate") cmd_propagate(ctx);
        else if (sub == "observables") cmd_observables(ctx);
        else if (sub == "purity") cmd_purity(ctx);
        else if (sub == "ensemble") cmd_ensemble(ctx);
        else if (sub == "master-eq") cmd_master_eq(ctx);
        else if (sub == "rwa-compare") cmd_rwa_compare(ctx);
        else cmd_n_sweep(ctx);
    } catch (const ConfigError& e) {
        err << e.what() << "\n";
        code = exit_invalid;
    } catch (const std::invalid_argument& e) {
        err << cfg.source << ":1: " << e.what() << "\n";
        code = exit_invalid;
    } catch (const std::exception& e) {
        diag = diagnostic(e);
        diag["subcommand"] = request.subcommand;
        diag["config_hash"] = hex64(cfg.hash);
        err << diag.dump() << "\n";
        write_json(dir / "error.json", diag);
        ctx.artifacts.push_back("error.json");
        code = exit_numerical;
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ojson manifest{{"subcommand", request.subcommand},
                   {"config_hash", "fnv1a64:" + hex64(cfg.hash)},
                   {"seed", seed},
                   {"threads", threads},
                   {"exit_code", code},
                   {"artifacts", ctx.artifacts},
                   {"versions",
                    {{"qbath", QBATH_VERSION},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}}},
                   {"wall_time_s", wall}};
    write_json(dir / "manifest.json", manifest);
    return code;
}

}  // namespace qbath::cli
