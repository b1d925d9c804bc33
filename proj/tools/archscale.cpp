// archscale: architecture-conditioned scaling analysis from the command line.
//
// Subcommands: fit, predict, dcrit, audit, plan, simulate, verify, report.
// Results go to stdout (or --out), diagnostics to stderr. Exit codes:
// 0 success, 1 validation/usage error, 2 numerical non-convergence.

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "archscale/audit.hpp"
#include "archscale/dataset.hpp"
#include "archscale/errors.hpp"
#include "archscale/fit.hpp"
#include "archscale/gradsim.hpp"
#include "archscale/model.hpp"
#include "archscale/planner.hpp"
#include "archscale/scaling_law.hpp"
#include "archscale/svg.hpp"

namespace {

using namespace archscale;

struct GlobalOpts {
    std::uint64_t seed = 42;
    double kappa = kDefaultKappa;
    bool kappa_given = false;
    std::string dcrit_form = "log";
    bool form_given = false;
    std::string out_path;
};

void write_output(const GlobalOpts& g, const std::string& text) {
    if (g.out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(g.out_path, std::ios::binary);
    if (!out) throw ValidationError("cannot open output file '" + g.out_path + "'");
    out << text;
}

Dataset load_data(const std::string& spec) {
    if (spec == "bundled") {
        if (const char* env = std::getenv("ARCHSCALE_DATA")) return load_csv(env);
        return bundled_dataset();
    }
    return load_csv(spec);
}

std::vector<ScaleGroup> parse_groups(const std::string& spec) {
    if (spec == "baseline") return {ScaleGroup::Baseline};
    if (spec == "all")
        return {ScaleGroup::Baseline, ScaleGroup::OneB, ScaleGroup::ThreeB, ScaleGroup::SevenB};
    std::vector<ScaleGroup> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto g = parse_scale_group(item);
        if (!g) throw ValidationError("unknown scale group '" + item + "'");
        out.push_back(*g);
    }
    if (out.empty()) throw ValidationError("no scale groups selected");
    return out;
}

ScalingLawParams base_params(const GlobalOpts& g) {
    ScalingLawParams p;
    p.kappa = g.kappa;
    p.dcrit_form = parse_dcrit_form(g.dcrit_form);
    return p;
}

ScalingLawParams load_params_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open params file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return params_from_json(buf.str());
}

// Params for predict/plan: file if given, else reference exponents with A, B
// calibrated on the bundled baseline rows.
ScalingLawParams resolve_params(const GlobalOpts& g, const std::string& params_path) {
    ScalingLawParams p;
    if (!params_path.empty()) {
        p = load_params_file(params_path);
    } else {
        const Dataset baseline = filter(load_data("bundled"), {ScaleGroup::Baseline});
        p = calibrated_reference_params(baseline.records);
        std::cerr << "using reference exponents with A, B calibrated on the bundled "
                     "baseline rows (pass --params to override)\n";
    }
    if (g.kappa_given) p.kappa = g.kappa;
    if (g.form_given || params_path.empty()) p.dcrit_form = parse_dcrit_form(g.dcrit_form);
    return p;
}

std::string fmt1(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string fit_result_to_text(const FitResult& r) {
    std::ostringstream os;
    os << std::setprecision(6);
    os << "converged: " << (r.converged ? "yes" : "NO") << " (" << r.iterations_used
       << " iterations)\n";
    os << "records:   " << r.n_records << "\n";
    os << "R^2:       " << r.r_squared << "\n";
    os << "RMSE:      " << r.rmse << " nats\n";
    const auto& p = r.params;
    const auto ci = [&](const char* name) {
        const auto it = r.ci95.find(name);
        if (it == r.ci95.end()) return std::string();
        std::ostringstream c;
        c << std::setprecision(4) << "  ci95 [" << it->second.first << ", " << it->second.second
          << "]";
        return c.str();
    };
    os << "params:\n";
    os << "  A      = " << p.A << ci("A") << "\n";
    os << "  alpha  = " << p.alpha << ci("alpha") << "\n";
    os << "  B      = " << p.B << ci("B") << "\n";
    os << "  delta  = " << p.delta << ci("delta") << "\n";
    os << "  gamma  = " << p.gamma << ci("gamma") << "\n";
    os << "  mu     = " << p.mu << ci("mu") << "\n";
    os << "  kappa  = " << p.kappa << ci("kappa") << "\n";
    for (const auto& [name, value] : r.group_offsets)
        os << "  " << name << " = " << value << ci(name.c_str()) << "\n";
    for (const auto& note : r.notes) os << "note: " << note << "\n";
    return os.str();
}

int cmd_fit(const GlobalOpts& g, const std::string& data, const std::string& group,
            int bootstrap, const std::vector<std::string>& free_names,
            const std::vector<std::string>& fix_specs, int max_iterations,
            const std::string& format) {
    const Dataset ds = filter(load_data(data), parse_groups(group));
    FitConfig config;
    config.rng_seed = g.seed;
    config.dcrit_form = parse_dcrit_form(g.dcrit_form);
    if (max_iterations > 0) config.max_iterations = max_iterations;
    if (g.kappa_given && config.fixed_params.count("kappa"))
        config.fixed_params["kappa"] = g.kappa;
    for (const auto& name : free_names) {
        config.free_params.insert(name);
        config.fixed_params.erase(name);
    }
    for (const auto& spec : fix_specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--fix expects name=value, got '" + spec + "'");
        const std::string name = spec.substr(0, eq);
        config.fixed_params[name] = std::stod(spec.substr(eq + 1));
        config.free_params.erase(name);
    }
    if (bootstrap > 0) config.bootstrap_resamples = bootstrap;

    const FitResult result = bootstrap > 0 ? fit_with_bootstrap(ds.records, config)
                                           : fit_scaling_law(ds.records, config);
    write_output(g, format == "json" ? fit_result_to_json(result) + "\n"
                                     : fit_result_to_text(result));
    return result.converged ? 0 : 2;
}

int cmd_predict(const GlobalOpts& g, std::uint32_t depth, std::uint32_t width,
                std::uint32_t vocab, std::uint32_t context, double tokens,
                const std::string& params_path, const std::string& format, bool explain) {
    const ScalingLawParams p = resolve_params(g, params_path);
    const Architecture arch{depth, width, vocab, context};
    const double loss = predict_loss(arch, tokens, p);
    if (format == "json") {
        nlohmann::json j;
        j["depth"] = depth;
        j["width"] = width;
        j["params_count"] = count_params(arch);
        j["tokens"] = tokens;
        j["flops"] = compute_flops(arch, tokens);
        j["d_crit"] = d_crit(width, p);
        j["penalty"] = penalty(arch, p);
        j["predicted_loss"] = loss;
        write_output(g, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << std::setprecision(6);
        if (explain) os << explain_params(arch);
        os << "N = " << count_params(arch) << ", C = " << compute_flops(arch, tokens)
           << " FLOPs\n";
        os << "d_crit(" << width << ") = " << fmt1(d_crit(width, p)) << ", penalty = "
           << penalty(arch, p) << "\n";
        os << "predicted loss = " << loss << " nats\n";
        write_output(g, os.str());
    }
    return 0;
}

int cmd_dcrit(const GlobalOpts& g, const std::vector<std::uint32_t>& widths,
              const std::string& format) {
    const ScalingLawParams p = base_params(g);
    if (format == "json") {
        nlohmann::json j = nlohmann::json::array();
        for (const auto w : widths)
            j.push_back({{"width", w}, {"d_crit", d_crit(w, p)},
                         {"form", to_string(p.dcrit_form)}, {"kappa", p.kappa}});
        write_output(g, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        for (const auto w : widths) os << fmt1(d_crit(w, p)) << "\n";
        write_output(g, os.str());
    }
    return 0;
}

int cmd_audit(const GlobalOpts& g, bool builtin, const std::string& roster_path,
              const std::string& name, std::uint32_t depth, std::uint32_t width,
              const std::string& format) {
    const ScalingLawParams p = base_params(g);
    std::vector<RosterModel> roster;
    if (!roster_path.empty()) roster = load_roster_csv(roster_path);
    else if (!name.empty()) roster.push_back({name, depth, width});
    else if (builtin) roster = built_in_roster();
    else throw ValidationError("audit: pass --builtin, --roster FILE, or --name/--depth/--width");
    const AuditReport rep = audit_report(roster, p);
    write_output(g, format == "json" ? audit_to_json(rep) + "\n" : audit_to_text(rep));
    return 0;
}

int cmd_plan(const GlobalOpts& g, double budget, const std::string& params_path,
             const std::string& exponents_spec, std::uint32_t dmin, std::uint32_t dmax,
             std::uint32_t wmin, std::uint32_t wmax, std::uint32_t wstep,
             const std::string& frontier_path, const std::string& format) {
    PlanQuery query;
    query.params = resolve_params(g, params_path);
    query.depth_min = dmin;
    query.depth_max = dmax;
    query.width_min = wmin;
    query.width_max = wmax;
    query.width_step = wstep;

    if (!exponents_spec.empty()) {
        std::vector<double> budgets;
        std::stringstream ss(exponents_spec);
        std::string item;
        while (std::getline(ss, item, ',')) budgets.push_back(std::stod(item));
        const ScalingExponents e = fit_scaling_exponents(budgets, query);
        if (format == "json") {
            write_output(g, exponents_to_json(e) + "\n");
        } else {
            std::ostringstream os;
            os << std::setprecision(4);
            os << "fitted:    D* ~ C^" << e.d_exp << " (R^2 " << e.d_r2 << "), W* ~ C^"
               << e.w_exp << " (R^2 " << e.w_r2 << "), ratio " << e.ratio << "\n";
            os << "reference: D* ~ C^" << kReferenceDepthExponent << ", W* ~ C^"
               << kReferenceWidthExponent << ", ratio " << kReferenceExponentRatio << "\n";
            os << "comparison only; the grid optimum rides the degenerate capacity "
                  "level set below the critical depth, so the fitted slopes are noisy\n";
            write_output(g, os.str());
        }
        return 0;
    }

    if (!(budget > 0.0)) throw ValidationError("plan: --budget is required (FLOPs)");
    query.compute_budget = budget;
    const PlanResult result = optimize_shape(query);
    if (!frontier_path.empty()) {
        std::ofstream out(frontier_path, std::ios::binary);
        if (!out) throw ValidationError("cannot open '" + frontier_path + "'");
        out << frontier_to_csv(result);
    }
    if (format == "json") {
        write_output(g, plan_to_json(result, query) + "\n");
    } else {
        std::ostringstream os;
        os << std::setprecision(6);
        os << "best shape: " << result.depth << "L x " << result.width << "W\n";
        os << "tokens:     " << result.tokens << " (C = " << query.compute_budget << ")\n";
        os << "loss:       " << result.predicted_loss << " nats\n";
        os << "D/D_crit:   " << std::setprecision(3) << result.d_over_dcrit << "\n";
        if (result.degenerate)
            os << "note: gamma = 0, the optimum is degenerate across equal-N shapes; "
                  "reported shape is the tie-break representative\n";
        write_output(g, os.str());
    }
    return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& mode, std::uint32_t width,
                 const std::string& sweep_spec, std::uint32_t depth, double sigma,
                 std::uint32_t trials, bool rms, const std::string& plot_path,
                 const std::string& format) {
    SimConfig config;
    config.mode = parse_sim_mode(mode);
    config.depth = depth;
    config.sigma = sigma;
    config.trials = trials;
    config.rng_seed = g.seed;
    config.rms_aggregation = rms;

    if (!sweep_spec.empty()) {
        std::vector<std::uint32_t> widths;
        std::stringstream ss(sweep_spec);
        std::string item;
        while (std::getline(ss, item, ',')) widths.push_back(static_cast<std::uint32_t>(std::stoul(item)));
        const auto sweep = sweep_tau(widths, config);
        std::vector<std::pair<double, double>> curve;
        bool all_decay = true;
        for (const auto& p : sweep) {
            if (p.kind == DecayKind::Decay) curve.emplace_back(p.width, p.tau_hat);
            else all_decay = false;
        }
        if (format == "json") {
            nlohmann::json j;
            j["mode"] = mode;
            j["sigma"] = sigma;
            j["points"] = nlohmann::json::array();
            for (const auto& p : sweep)
                j["points"].push_back({{"width", p.width},
                                       {"tau_hat", std::isinf(p.tau_hat) ? nlohmann::json()
                                                                         : nlohmann::json(p.tau_hat)},
                                       {"kind", p.kind == DecayKind::Decay ? "decay"
                                                : p.kind == DecayKind::Growth ? "growth" : "flat"}});
            if (all_decay && curve.size() >= 3) {
                const TauModelFit f = fit_tau_models(curve);
                j["power_fit"] = {{"c", f.power_c}, {"a", f.power_a}, {"r2", f.power_r2}};
                j["log_fit"] = {{"c", f.log_c}, {"r2", f.log_r2}};
            }
            write_output(g, j.dump(2) + "\n");
        } else {
            std::ostringstream os;
            os << sweep_to_csv(sweep);
            if (all_decay && curve.size() >= 3) {
                const TauModelFit f = fit_tau_models(curve);
                os << std::setprecision(6);
                os << "# power fit: tau = " << f.power_c << " * W^" << f.power_a
                   << "  (R^2 " << f.power_r2 << ")\n";
                os << "# log fit:   tau = " << f.log_c << " * ln W  (R^2 " << f.log_r2 << ")\n";
            } else if (!all_decay) {
                os << "# tau model fits skipped: sweep contains non-decaying profiles\n";
            }
            write_output(g, os.str());
        }
        if (!plot_path.empty()) {
            Series pts{"simulated tau", {}, {}};
            for (const auto& p : sweep) {
                pts.x.push_back(p.width);
                pts.y.push_back(p.tau_hat);
            }
            PlotOptions opt;
            opt.title = "Persistence length vs width";
            opt.x_label = "width";
            opt.y_label = "tau";
            std::vector<Series> series = {pts};
            if (all_decay && curve.size() >= 3) {
                opt.log_x = opt.log_y = true;
                const TauModelFit f = fit_tau_models(curve);
                Series pfit{"power fit", {}, {}}, lfit{"log fit", {}, {}};
                for (double w = curve.front().first; w <= curve.back().first * 1.001; w *= 1.1) {
                    pfit.x.push_back(w);
                    pfit.y.push_back(f.power_c * std::pow(w, f.power_a));
                    lfit.x.push_back(w);
                    lfit.y.push_back(f.log_c * std::log(w));
                }
                series.push_back(pfit);
                series.push_back(lfit);
            }
            emit_plot(series, PlotKind::Scatter, plot_path, opt);
        }
        return 0;
    }

    if (config.depth == 0) {
        const ScalingLawParams ref = base_params(g);
        config.depth = static_cast<std::uint32_t>(
            std::max(8l, std::lround(3.0 * d_crit(std::max<std::uint32_t>(width, 2), ref))));
    }
    config.width = width;
    const GradientProfile profile = simulate(config);
    write_output(g, format == "json" ? profile_to_json(profile) + "\n" : profile_to_csv(profile));
    if (!plot_path.empty()) {
        Series s{"ratio", {}, {}};
        for (std::size_t i = 0; i < profile.ratios.size(); ++i) {
            s.x.push_back(static_cast<double>(i + 1));
            s.y.push_back(profile.ratios[i]);
        }
        PlotOptions opt;
        opt.title = "Gradient-norm profile";
        opt.x_label = "layer";
        opt.y_label = "norm ratio";
        emit_plot({s}, PlotKind::Line, plot_path, opt);
    }
    return 0;
}

int cmd_verify(const GlobalOpts& g, const std::string& data, const std::string& format) {
    const Dataset ds = load_data(data);
    const VerifyReport rep = verify_headline_orderings(ds);
    write_output(g, format == "json" ? report_to_json(rep) + "\n" : report_to_text(rep));
    return rep.failures() > 0 ? 1 : 0;
}

void emit_report_plots(const std::string& dir, const Dataset& ds, const ScalingLawParams& ref,
                       const GlobalOpts& g) {
    // depth sweep U-curve at width 512 with the critical-depth marker
    Series ucurve{"width 512", {}, {}};
    for (const auto& rec : ds.records)
        if (rec.group == ScaleGroup::Baseline && rec.arch.width == 512) {
            ucurve.x.push_back(rec.arch.depth);
            ucurve.y.push_back(rec.loss);
        }
    std::vector<std::size_t> order(ucurve.x.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ucurve.x[a] < ucurve.x[b]; });
    Series sorted{"width 512", {}, {}};
    for (const auto i : order) {
        sorted.x.push_back(ucurve.x[i]);
        sorted.y.push_back(ucurve.y[i]);
    }
    PlotOptions uopt;
    uopt.title = "Loss vs depth at width 512";
    uopt.x_label = "depth (layers)";
    uopt.y_label = "loss (nats)";
    uopt.vline = d_crit(512, ref);
    uopt.vline_label = "D_crit";
    emit_plot({sorted}, PlotKind::UCurve, dir + "/ucurve_w512.svg", uopt);

    // norm-recursion tau sweep, log-log, with both fitted curves
    SimConfig sim;
    sim.mode = SimMode::NormRecursion;
    sim.sigma = 1.0;
    sim.depth = 0;
    sim.rng_seed = g.seed;
    const std::vector<std::uint32_t> widths = {256, 512, 1024, 1536};
    const auto sweep = sweep_tau(widths, sim);
    Series pts{"simulated tau", {}, {}};
    std::vector<std::pair<double, double>> curve;
    for (const auto& p : sweep) {
        pts.x.push_back(p.width);
        pts.y.push_back(p.tau_hat);
        curve.emplace_back(p.width, p.tau_hat);
    }
    const TauModelFit f = fit_tau_models(curve);
    Series pfit{"power fit", {}, {}}, lfit{"log fit", {}, {}};
    for (double w = 256.0; w <= 1536.0; w *= 1.1) {
        pfit.x.push_back(w);
        pfit.y.push_back(f.power_c * std::pow(w, f.power_a));
        lfit.x.push_back(w);
        lfit.y.push_back(f.log_c * std::log(w));
    }
    PlotOptions topt;
    topt.title = "Persistence length vs width (norm recursion)";
    topt.x_label = "width";
    topt.y_label = "tau";
    topt.log_x = true;
    topt.log_y = true;
    emit_plot({pts, pfit, lfit}, PlotKind::Scatter, dir + "/tau_sweep.svg", topt);
}

int cmd_report(const GlobalOpts& g, const std::string& data, const std::string& svg_dir,
               const std::string& format) {
    const Dataset ds = load_data(data);
    const Dataset baseline = filter(ds, {ScaleGroup::Baseline});
    const VerifyReport verify = verify_headline_orderings(ds);

    FitConfig config;
    config.rng_seed = g.seed;
    const FitResult fit = fit_scaling_law(baseline.records, config);
    const ScalingLawParams ref = base_params(g);
    const ScalingLawParams planner_params = calibrated_reference_params(baseline.records);

    PlanQuery query;
    query.params = planner_params;
    query.compute_budget = 5.89e21;
    const PlanResult plan = optimize_shape(query);
    const ClosedFormExponents cf = closed_form_exponents(0.076, 0.095);
    const AuditReport audit = audit_report(built_in_roster(), ref);

    SimConfig sim;
    sim.mode = SimMode::NormRecursion;
    sim.depth = 0;
    sim.rng_seed = g.seed;
    const auto rec_sweep = sweep_tau({256, 512, 1024, 1536}, sim);
    std::vector<std::pair<double, double>> curve;
    for (const auto& p : rec_sweep) curve.emplace_back(p.width, p.tau_hat);
    const TauModelFit tau_fit = fit_tau_models(curve);

    sim.mode = SimMode::MatrixProduct;
    sim.width = 512;
    sim.depth = 48;
    sim.trials = 64;
    const GradientProfile mp = simulate_matrix_product(sim);

    ScalingLawParams power = ref;
    power.dcrit_form = DcritForm::PowerLaw;

    if (format == "json") {
        nlohmann::json j;
        j["verify"] = nlohmann::json::parse(report_to_json(verify));
        j["fit"] = nlohmann::json::parse(fit_result_to_json(fit));
        j["plan_7b"] = nlohmann::json::parse(plan_to_json(plan, query));
        j["closed_form_exponents"] = {{"d_exp", cf.d_exp},
                                      {"w_exp", cf.w_exp},
                                      {"consistent_with_reference", cf.consistent_with_reference}};
        j["audit"] = nlohmann::json::parse(audit_to_json(audit));
        j["tau_recursion_sweep"] = {{"power_r2", tau_fit.power_r2}, {"log_r2", tau_fit.log_r2},
                                    {"power_a", tau_fit.power_a}};
        j["matrix_product_w512_d48"] = {{"tau_hat", mp.tau_hat},
                                        {"kind", mp.decay_kind == DecayKind::Growth ? "growth"
                                                                                     : "decay"},
                                        {"first_layer_ratio", mp.ratios.front()}};
        j["dual_calibration"] = {{"d_crit_log_512", d_crit(512, ref)},
                                 {"tau_power_512", tau(512, power)}};
        write_output(g, j.dump(2) + "\n");
    } else {
        std::ostringstream os;
        os << "== dataset checks ==\n" << report_to_text(verify);
        os << "\n== ansatz fit (baseline rows) ==\n" << fit_result_to_text(fit);
        os << "\n== critical depth ==\n";
        for (const std::uint32_t w : {512u, 1024u, 1536u, 4096u, 8192u, 12288u, 18432u})
            os << "  d_crit(" << w << ") = " << fmt1(d_crit(w, ref)) << "\n";
        os << std::setprecision(4)
           << "  dual calibration at width 512: log law " << d_crit(512, ref)
           << " vs persistence power law " << tau(512, power)
           << " - same order of magnitude, different values; the toolkit keeps both\n";
        os << "\n== audit ==\n" << audit_to_text(audit);
        os << "\n== compute-optimal shape at C = 5.89e21 ==\n";
        os << "  best " << plan.depth << "L x " << plan.width << "W, D/D_crit = "
           << std::setprecision(3) << plan.d_over_dcrit << "\n";
        os << "  closed-form shape exponents at (alpha 0.076, delta 0.095): d_exp = "
           << cf.d_exp << ", w_exp = " << cf.w_exp
           << (cf.consistent_with_reference ? "" : "  [does not match the quoted (0.12, 0.34)]")
           << "\n";
        os << "\n== gradient simulators ==\n";
        os << std::setprecision(4);
        os << "  norm recursion sweep: tau grows linearly in W; power fit R^2 "
           << tau_fit.power_r2 << " vs log fit R^2 " << tau_fit.log_r2 << "\n";
        os << "  matrix product (W=512, D=48, sigma=1): mean norms GROW toward early layers "
              "(first-layer ratio "
           << mp.ratios.front() << ", fitted tau " << mp.tau_hat
           << "); the additive isotropic chain expands norms at ~sigma^2/2W per layer\n";
        os << "  neither simulator reproduces the sublinear W^0.44 persistence measured on "
              "trained models; that calibration is empirical, not derivable from these "
              "models\n";
        os << "\n== known model-data gaps ==\n";
        {
            const double l16 = predict_loss({16, 512}, 6.4e9, planner_params);
            const double l24 = predict_loss({24, 512}, 6.4e9, planner_params);
            os << "  with the reference vector the capacity gain from 16L to 24L at width 512 ("
               << fmt1((l16 - l24 + penalty({24, 512}, planner_params)) * 1000.0)
               << " millinats) outweighs the depth penalty ("
               << fmt1(penalty({24, 512}, planner_params) * 1000.0)
               << " millinats), so the ansatz predicts " << (l24 < l16 ? "24L BELOW 16L" : "24L above 16L")
               << " while the measured table shows 24L worse by 33 millinats; the penalty "
                  "magnitude gamma/W^mu is too small at these widths to reproduce the "
                  "measured regression\n";
        }
        write_output(g, os.str());
    }

    if (!svg_dir.empty()) emit_report_plots(svg_dir, ds, ref, g);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"architecture-conditioned scaling law toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file (key = value; flags win)");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed")->capture_default_str();
    auto* kappa_opt =
        app.add_option("--kappa", g.kappa, "log-law critical-depth coefficient")
            ->capture_default_str();
    auto* form_opt =
        app.add_option("--dcrit-form", g.dcrit_form, "critical depth form: log|power")
            ->check(CLI::IsMember({"log", "power"}))
            ->capture_default_str();
    app.add_option("-o,--out", g.out_path, "write results to a file instead of stdout");

    // fit
    auto* fit_cmd = app.add_subcommand("fit", "fit the loss ansatz to a dataset");
    std::string fit_data = "bundled", fit_group = "baseline", fit_format = "text";
    int fit_bootstrap = 0;
    std::vector<std::string> fit_free, fit_fix;
    fit_cmd->add_option("--data", fit_data, "bundled or a CSV path")->capture_default_str();
    fit_cmd->add_option("--group", fit_group, "baseline, all, or comma list")
        ->capture_default_str();
    fit_cmd->add_option("--bootstrap", fit_bootstrap,
                        "bootstrap resamples for 95% CIs (0 = off)");
    fit_cmd->add_option("--free", fit_free, "additionally free these parameters");
    fit_cmd->add_option("--fix", fit_fix, "fix parameter, e.g. --fix gamma=0.18");
    int fit_max_iterations = 0;
    fit_cmd->add_option("--max-iterations", fit_max_iterations,
                        "override the solver iteration cap");
    fit_cmd->add_option("--format", fit_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // predict
    auto* predict_cmd = app.add_subcommand("predict", "predict loss for a shape and budget");
    std::uint32_t p_depth = 0, p_width = 0, p_vocab = 50257, p_context = 1024;
    double p_tokens = 0.0;
    std::string p_params, p_format = "text";
    bool p_explain = false;
    predict_cmd->add_option("--depth", p_depth, "layers")->required();
    predict_cmd->add_option("--width", p_width, "hidden dimension")->required();
    predict_cmd->add_option("--tokens", p_tokens, "training tokens")->required();
    predict_cmd->add_option("--vocab", p_vocab, "vocabulary size")->capture_default_str();
    predict_cmd->add_option("--context", p_context, "positional table length")
        ->capture_default_str();
    predict_cmd->add_option("--params", p_params, "params JSON file (default: calibrated)");
    predict_cmd->add_flag("--explain", p_explain, "print the parameter-count breakdown");
    predict_cmd->add_option("--format", p_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // dcrit
    auto* dcrit_cmd = app.add_subcommand("dcrit", "critical depth for widths");
    std::vector<std::uint32_t> d_widths;
    std::string d_format = "text";
    dcrit_cmd->add_option("--width", d_widths, "width (repeatable)")->required();
    dcrit_cmd->add_option("--format", d_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // audit
    auto* audit_cmd = app.add_subcommand("audit", "score model shapes against critical depth");
    bool a_builtin = false;
    std::string a_roster, a_name, a_format = "text";
    std::uint32_t a_depth = 0, a_width = 0;
    audit_cmd->add_flag("--builtin", a_builtin, "audit the built-in flagship roster");
    audit_cmd->add_option("--roster", a_roster, "roster CSV (name,depth,width)");
    audit_cmd->add_option("--name", a_name, "single model name");
    audit_cmd->add_option("--depth", a_depth, "single model depth");
    audit_cmd->add_option("--width", a_width, "single model width");
    audit_cmd->add_option("--format", a_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "compute-optimal shape under a FLOP budget");
    double pl_budget = 0.0;
    std::string pl_params, pl_exponents, pl_frontier, pl_format = "text";
    std::uint32_t pl_dmin = 1, pl_dmax = 256, pl_wmin = 256, pl_wmax = 32768, pl_wstep = 64;
    plan_cmd->add_option("--budget", pl_budget, "compute budget in FLOPs");
    plan_cmd->add_option("--params", pl_params, "params JSON file (default: calibrated)");
    plan_cmd->add_option("--exponents", pl_exponents,
                         "comma list of budgets: regress optimal-shape scaling exponents");
    plan_cmd->add_option("--depth-min", pl_dmin)->capture_default_str();
    plan_cmd->add_option("--depth-max", pl_dmax)->capture_default_str();
    plan_cmd->add_option("--width-min", pl_wmin)->capture_default_str();
    plan_cmd->add_option("--width-max", pl_wmax)->capture_default_str();
    plan_cmd->add_option("--width-step", pl_wstep)->capture_default_str();
    plan_cmd->add_option("--frontier", pl_frontier, "write per-depth frontier CSV here");
    plan_cmd->add_option("--format", pl_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "gradient-norm decay simulator");
    std::string s_mode = "matrix", s_sweep, s_format = "csv";
    std::uint32_t s_width = 512, s_depth = 0, s_trials = 64;
    double s_sigma = 1.0;
    bool s_rms = false;
    sim_cmd->add_option("--mode", s_mode, "matrix|recursion")
        ->check(CLI::IsMember({"matrix", "recursion"}))
        ->capture_default_str();
    sim_cmd->add_option("--width", s_width, "width")->capture_default_str();
    sim_cmd->add_option("--sweep", s_sweep, "comma list of widths: tau sweep");
    sim_cmd->add_option("--depth", s_depth, "depth (0 = 3 x d_crit)")->capture_default_str();
    sim_cmd->add_option("--sigma", s_sigma, "perturbation scale")->capture_default_str();
    sim_cmd->add_option("--trials", s_trials, "Monte Carlo trials")->capture_default_str();
    sim_cmd->add_flag("--rms", s_rms, "aggregate sqrt(mean ||g||^2) instead of mean ||g||");
    std::string s_plot;
    sim_cmd->add_option("--plot", s_plot, "also render the profile or sweep as SVG here");
    sim_cmd->add_option("--format", s_format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "check the dataset's headline orderings");
    std::string v_data = "bundled", v_format = "text";
    verify_cmd->add_option("--data", v_data, "bundled or a CSV path")->capture_default_str();
    verify_cmd->add_option("--format", v_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    // report
    auto* report_cmd = app.add_subcommand("report", "full analysis report");
    std::string r_data = "bundled", r_svg, r_format = "text";
    report_cmd->add_option("--data", r_data, "bundled or a CSV path")->capture_default_str();
    report_cmd->add_option("--svg-dir", r_svg, "also emit SVG plots into this directory");
    report_cmd->add_option("--format", r_format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);  // exit 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    g.kappa_given = kappa_opt->count() > 0;
    g.form_given = form_opt->count() > 0;

    try {
        if (fit_cmd->parsed())
            return cmd_fit(g, fit_data, fit_group, fit_bootstrap, fit_free, fit_fix,
                           fit_max_iterations, fit_format);
        if (predict_cmd->parsed())
            return cmd_predict(g, p_depth, p_width, p_vocab, p_context, p_tokens, p_params,
                               p_format, p_explain);
        if (dcrit_cmd->parsed()) return cmd_dcrit(g, d_widths, d_format);
        if (audit_cmd->parsed())
            return cmd_audit(g, a_builtin, a_roster, a_name, a_depth, a_width, a_format);
        if (plan_cmd->parsed())
            return cmd_plan(g, pl_budget, pl_params, pl_exponents, pl_dmin, pl_dmax, pl_wmin,
                            pl_wmax, pl_wstep, pl_frontier, pl_format);
        if (sim_cmd->parsed())
            return cmd_simulate(g, s_mode, s_width, s_sweep, s_depth, s_sigma, s_trials, s_rms,
                                s_plot, s_format);
        if (verify_cmd->parsed()) return cmd_verify(g, v_data, v_format);
        if (report_cmd->parsed()) return cmd_report(g, r_data, r_svg, r_format);
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
