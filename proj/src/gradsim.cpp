#include "archscale/gradsim.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "archscale/errors.hpp"
#include "archscale/rng.hpp"
#include "archscale/scaling_law.hpp"

namespace archscale {

const char* to_string(SimMode m) {
    return m == SimMode::MatrixProduct ? "matrix" : "recursion";
}

SimMode parse_sim_mode(const std::string& s) {
    if (s == "matrix" || s == "MatrixProduct") return SimMode::MatrixProduct;
    if (s == "recursion" || s == "NormRecursion") return SimMode::NormRecursion;
    throw ValidationError("unknown simulator mode '" + s + "' (expected 'matrix' or 'recursion')");
}

void validate(const SimConfig& config) {
    if (config.depth < 2) throw ValidationError("simulate: depth must be >= 2");
    if (config.width < 1) throw ValidationError("simulate: width must be >= 1");
    if (!(config.sigma >= 0.0)) throw ValidationError("simulate: sigma must be >= 0");
    if (config.trials < 1) throw ValidationError("simulate: trials must be >= 1");
}

namespace {

DecayFit extract_tau(const std::vector<double>& ratios) {
    std::vector<std::pair<int, double>> pairs;
    pairs.reserve(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i)
        pairs.emplace_back(static_cast<int>(i + 1), ratios[i]);
    return fit_exponential_decay(pairs);
}

}  // namespace

GradientProfile simulate_matrix_product(const SimConfig& config) {
    validate(config);
    const std::uint64_t work = static_cast<std::uint64_t>(config.width) * config.depth *
                               config.trials;
    if (work > config.work_cap) {
        std::ostringstream os;
        os << "simulate: width * depth * trials = " << work << " samples exceeds the work cap "
           << config.work_cap << "; lower the sizes or raise the cap";
        throw ValidationError(os.str());
    }

    const auto d = static_cast<std::size_t>(config.depth);
    const auto w = static_cast<Eigen::Index>(config.width);
    const double scale = config.sigma / static_cast<double>(config.width);
    const double n_trials = static_cast<double>(config.trials);

    std::vector<double> acc(d, 0.0), acc2(d, 0.0);
    Eigen::VectorXd g(w), z(w);
    for (std::uint32_t trial = 0; trial < config.trials; ++trial) {
        Rng rng(config.rng_seed, config.width, trial);
        for (Eigen::Index i = 0; i < w; ++i) g[i] = rng.normal();
        g /= g.norm();
        // layer D down to 1; start vector is the output-layer gradient
        acc[d - 1] += 1.0;
        acc2[d - 1] += 1.0;
        for (std::size_t layer = d - 1; layer-- > 0;) {
            const double gn = g.norm();
            for (Eigen::Index i = 0; i < w; ++i) z[i] = rng.normal();
            g += (scale * gn) * z;
            const double v = config.rms_aggregation ? g.squaredNorm() : g.norm();
            acc[layer] += v;
            acc2[layer] += v * v;
        }
    }

    GradientProfile profile;
    profile.width = config.width;
    profile.depth = config.depth;
    profile.trials = config.trials;
    profile.mode = SimMode::MatrixProduct;
    profile.ratios.resize(d);
    profile.ratio_se.assign(d, 0.0);
    const double top = acc[d - 1] / n_trials;
    for (std::size_t i = 0; i < d; ++i) {
        double mean = acc[i] / n_trials;
        double se = 0.0;
        if (config.trials > 1) {
            const double var = std::max(acc2[i] / n_trials - mean * mean, 0.0);
            se = std::sqrt(var / (n_trials - 1.0));
        }
        if (config.rms_aggregation && i != d - 1) {
            se = mean > 0.0 ? se / (2.0 * std::sqrt(mean)) : 0.0;
            mean = std::sqrt(mean);
        }
        profile.ratios[i] = mean / top;
        profile.ratio_se[i] = se / top;
    }
    profile.ratios[d - 1] = 1.0;
    profile.ratio_se[d - 1] = 0.0;
    const DecayFit fit = extract_tau(profile.ratios);
    profile.tau_hat = fit.tau_hat;
    profile.decay_kind = fit.kind;
    return profile;
}

GradientProfile simulate_norm_recursion(const SimConfig& config) {
    validate(config);
    const double contraction = 1.0 - config.sigma * config.sigma / static_cast<double>(config.width);
    if (!(contraction > 0.0 && contraction < 1.0))
        throw ValidationError("simulate: norm recursion needs sigma^2/width in (0, 1), got "
                              "contraction factor " + std::to_string(contraction));

    GradientProfile profile;
    profile.width = config.width;
    profile.depth = config.depth;
    profile.trials = 1;  // closed form, no sampling
    profile.mode = SimMode::NormRecursion;
    const auto d = static_cast<std::size_t>(config.depth);
    profile.ratios.resize(d);
    profile.ratio_se.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        const double dist = static_cast<double>(d - (i + 1));
        profile.ratios[i] = std::pow(contraction, dist / 2.0);
    }
    profile.ratios[d - 1] = 1.0;
    const DecayFit fit = extract_tau(profile.ratios);
    profile.tau_hat = fit.tau_hat;
    profile.decay_kind = fit.kind;
    return profile;
}

GradientProfile simulate(const SimConfig& config) {
    return config.mode == SimMode::MatrixProduct ? simulate_matrix_product(config)
                                                 : simulate_norm_recursion(config);
}

std::vector<TauPoint> sweep_tau(const std::vector<std::uint32_t>& widths, SimConfig config) {
    if (widths.size() < 3)
        throw ValidationError("sweep_tau: need at least 3 widths");
    ScalingLawParams ref;
    std::vector<TauPoint> out;
    for (const auto w : widths) {
        SimConfig c = config;
        c.width = w;
        if (config.depth == 0) {
            const double dc = d_crit(std::max<std::uint32_t>(w, 2), ref);
            c.depth = static_cast<std::uint32_t>(std::lround(3.0 * dc));
            c.depth = std::max<std::uint32_t>(c.depth, 8);
        }
        try {
            const GradientProfile p = simulate(c);
            out.push_back({w, p.tau_hat, p.decay_kind});
        } catch (const Error& e) {
            throw ValidationError("sweep_tau: width " + std::to_string(w) + ": " + e.what());
        }
    }
    return out;
}

namespace {

std::string fmt_g(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string profile_to_csv(const GradientProfile& profile) {
    std::ostringstream os;
    os << "width,depth,layer,ratio\n";
    for (std::size_t i = 0; i < profile.ratios.size(); ++i)
        os << profile.width << ',' << profile.depth << ',' << i + 1 << ','
           << fmt_g(profile.ratios[i]) << "\n";
    return os.str();
}

std::string profile_to_json(const GradientProfile& profile) {
    nlohmann::json j;
    j["width"] = profile.width;
    j["depth"] = profile.depth;
    j["trials"] = profile.trials;
    j["mode"] = to_string(profile.mode);
    j["ratios"] = profile.ratios;
    if (std::isinf(profile.tau_hat)) j["tau_hat"] = nullptr;
    else j["tau_hat"] = profile.tau_hat;
    j["decay_kind"] = profile.decay_kind == DecayKind::Decay    ? "decay"
                      : profile.decay_kind == DecayKind::Growth ? "growth"
                                                                : "flat";
    return j.dump(2);
}

std::string sweep_to_csv(const std::vector<TauPoint>& sweep) {
    std::ostringstream os;
    os << "width,tau_hat,kind\n";
    for (const auto& p : sweep)
        os << p.width << ',' << fmt_g(p.tau_hat) << ','
           << (p.kind == DecayKind::Decay ? "decay" : p.kind == DecayKind::Growth ? "growth" : "flat")
           << "\n";
    return os.str();
}

}  // namespace archscale
