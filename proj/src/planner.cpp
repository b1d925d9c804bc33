#include "archscale/planner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "archscale/errors.hpp"
#include "archscale/model.hpp"

namespace archscale {

void validate(const PlanQuery& query) {
    if (!(query.compute_budget > 0.0)) throw ValidationError("plan: compute budget must be > 0");
    if (query.depth_min < 1 || query.depth_max < query.depth_min)
        throw ValidationError("plan: empty depth range");
    if (query.width_min < 2 || query.width_max < query.width_min)
        throw ValidationError("plan: empty or invalid width range");
    if (query.width_step < 1) throw ValidationError("plan: width_step must be >= 1");
    validate(query.params);
    if (std::isnan(query.params.A) || std::isnan(query.params.B))
        throw ValidationError("plan: params need calibrated A and B");
}

PlanResult optimize_shape(const PlanQuery& query) {
    validate(query);
    const ScalingLawParams& p = query.params;

    PlanResult result;
    result.degenerate = (p.gamma == 0.0);

    bool any = false;
    for (std::uint32_t w = query.width_min; w <= query.width_max; w += query.width_step) {
        const Architecture probe{1, w, query.vocab, query.context};
        const double dc = d_crit(w, p);
        const double ln_w = std::log(static_cast<double>(w));
        const double pen_scale = p.gamma * std::exp(-p.mu * ln_w);
        // N(D, W) = D * per_block + fixed(W)
        const std::uint64_t fixed = count_params(probe) - core_params(probe) -
                                    4ULL * probe.width;
        const std::uint64_t per_block = 12ULL * w * static_cast<std::uint64_t>(w) + 4ULL * w;

        for (std::uint32_t d = query.depth_min; d <= query.depth_max; ++d) {
            const double n = static_cast<double>(fixed + per_block * d);
            const double tokens = query.compute_budget / (6.0 * n);
            const double excess = (static_cast<double>(d) - dc) / dc;
            const double loss = p.A * std::pow(n, -p.alpha) +
                                p.B * std::pow(tokens, -p.delta) +
                                (excess > 0.0 ? pen_scale * excess : 0.0);
            if (!std::isfinite(loss)) continue;
            const bool better =
                !any || loss < result.predicted_loss ||
                (loss == result.predicted_loss &&
                 (d < result.depth || (d == result.depth && w < result.width)));
            if (better) {
                result.depth = d;
                result.width = w;
                result.predicted_loss = loss;
                any = true;
            }
        }
    }
    if (!any) throw ValidationError("plan: no feasible grid point produced a finite loss");

    // Per-depth frontier (second pass keeps the main scan simple).
    result.frontier.reserve(query.depth_max - query.depth_min + 1);
    for (std::uint32_t d = query.depth_min; d <= query.depth_max; ++d) {
        FrontierPoint fp;
        bool have = false;
        for (std::uint32_t w = query.width_min; w <= query.width_max; w += query.width_step) {
            const Architecture arch{d, w, query.vocab, query.context};
            const double n = static_cast<double>(count_params(arch));
            const double tokens = query.compute_budget / (6.0 * n);
            const double loss = p.A * std::pow(n, -p.alpha) +
                                p.B * std::pow(tokens, -p.delta) + penalty(arch, p);
            if (!std::isfinite(loss)) continue;
            if (!have || loss < fp.loss || (loss == fp.loss && w < fp.width)) {
                fp = {d, w, loss};
                have = true;
            }
        }
        if (have) result.frontier.push_back(fp);
    }

    const Architecture best{result.depth, result.width, query.vocab, query.context};
    result.tokens = query.compute_budget / (6.0 * static_cast<double>(count_params(best)));
    result.d_over_dcrit = static_cast<double>(result.depth) / d_crit(result.width, p);
    return result;
}

ScalingExponents fit_scaling_exponents(const std::vector<double>& budgets, PlanQuery query) {
    if (budgets.size() < 4)
        throw ValidationError("scaling exponents: need at least 4 budgets");
    std::vector<double> sorted = budgets;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() <= 0.0) throw ValidationError("scaling exponents: budgets must be > 0");
    for (std::size_t i = 1; i < sorted.size(); ++i)
        if (sorted[i] == sorted[i - 1])
            throw ValidationError("scaling exponents: duplicate budget " +
                                  std::to_string(sorted[i]));
    if (sorted.back() / sorted.front() < 100.0)
        throw ValidationError("scaling exponents: budgets must span at least two decades");
    if (query.params.gamma == 0.0)
        throw ValidationError(
            "scaling exponents: with gamma = 0 the ansatz depends on the shape only through "
            "N, the optimizer ties across (D, W) at fixed N, and the regression is meaningless");

    ScalingExponents e;
    e.budgets = sorted;
    for (const double c : sorted) {
        query.compute_budget = c;
        const PlanResult r = optimize_shape(query);
        e.depths.push_back(r.depth);
        e.widths.push_back(r.width);
    }

    const auto n = static_cast<double>(sorted.size());
    const auto regress = [&](const std::vector<std::uint32_t>& ys, double& slope, double& r2) {
        double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double x = std::log(sorted[i]);
            const double y = std::log(static_cast<double>(ys[i]));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        const double det = n * sxx - sx * sx;
        slope = (n * sxy - sx * sy) / det;
        const double intercept = (sy - slope * sx) / n;
        double ss_res = 0.0, ss_tot = 0.0;
        const double mean = sy / n;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const double x = std::log(sorted[i]);
            const double y = std::log(static_cast<double>(ys[i]));
            ss_res += (y - intercept - slope * x) * (y - intercept - slope * x);
            ss_tot += (y - mean) * (y - mean);
        }
        r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    };
    regress(e.depths, e.d_exp, e.d_r2);
    regress(e.widths, e.w_exp, e.w_r2);
    e.ratio = e.d_exp != 0.0 ? e.w_exp / e.d_exp : std::numeric_limits<double>::quiet_NaN();
    return e;
}

ClosedFormExponents closed_form_exponents(double alpha, double delta) {
    if (!(alpha > 0.0) || !(delta > 0.0))
        throw ValidationError("closed_form_exponents: alpha and delta must be > 0");
    ClosedFormExponents out;
    const double ratio = alpha / delta;
    out.d_exp = 1.0 / (2.0 * (1.0 + ratio));
    out.w_exp = 1.0 / (1.0 + ratio) - 1.0 / (2.0 * (1.0 + ratio));
    out.consistent_with_reference = std::abs(out.d_exp - kReferenceDepthExponent) < 5e-3 &&
                                    std::abs(out.w_exp - kReferenceWidthExponent) < 5e-3;
    return out;
}

std::string plan_to_json(const PlanResult& result, const PlanQuery& query) {
    nlohmann::json j;
    j["compute_budget"] = query.compute_budget;
    j["best"] = {{"depth", result.depth},
                 {"width", result.width},
                 {"tokens", result.tokens},
                 {"predicted_loss", result.predicted_loss}};
    j["d_over_dcrit"] = result.d_over_dcrit;
    j["degenerate"] = result.degenerate;
    j["params"] = nlohmann::json::parse(params_to_json(query.params));
    return j.dump(2);
}

std::string frontier_to_csv(const PlanResult& result) {
    std::ostringstream os;
    os << "depth,width,loss\n";
    os.precision(12);
    for (const auto& fp : result.frontier)
        os << fp.depth << ',' << fp.width << ',' << fp.loss << "\n";
    return os.str();
}

std::string exponents_to_json(const ScalingExponents& e) {
    nlohmann::json j;
    j["d_exp"] = e.d_exp;
    j["w_exp"] = e.w_exp;
    j["ratio"] = std::isnan(e.ratio) ? nlohmann::json() : nlohmann::json(e.ratio);
    j["d_r2"] = e.d_r2;
    j["w_r2"] = e.w_r2;
    j["reference"] = {{"d_exp", kReferenceDepthExponent},
                      {"w_exp", kReferenceWidthExponent},
                      {"ratio", kReferenceExponentRatio}};
    j["budgets"] = e.budgets;
    j["depths"] = e.depths;
    j["widths"] = e.widths;
    return j.dump(2);
}

}  // namespace archscale
