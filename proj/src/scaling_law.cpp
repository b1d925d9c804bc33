#include "archscale/scaling_law.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "archscale/errors.hpp"

namespace archscale {

const char* to_string(DcritForm f) {
    return f == DcritForm::LogLaw ? "log" : "power";
}

DcritForm parse_dcrit_form(const std::string& s) {
    if (s == "log" || s == "LogLaw") return DcritForm::LogLaw;
    if (s == "power" || s == "PowerLaw") return DcritForm::PowerLaw;
    throw ValidationError("unknown dcrit form '" + s + "' (expected 'log' or 'power')");
}

void validate(const ScalingLawParams& p) {
    if (!std::isnan(p.A) && !(p.A > 0.0)) throw ValidationError("params: A must be > 0");
    if (!std::isnan(p.B) && !(p.B > 0.0)) throw ValidationError("params: B must be > 0");
    if (!(p.gamma >= 0.0)) throw ValidationError("params: gamma must be >= 0");
    if (!(p.kappa > 0.0)) throw ValidationError("params: kappa must be > 0");
    if (!(p.tau_c > 0.0)) throw ValidationError("params: tau_c must be > 0");
    if (!(p.tau_a > 0.0 && p.tau_a < 1.0))
        throw ValidationError("params: tau_a must lie in (0, 1)");
}

double d_crit(std::uint32_t width, const ScalingLawParams& p) {
    if (p.dcrit_form == DcritForm::LogLaw) {
        if (width < 2)
            throw ValidationError("d_crit: width must be >= 2 under the log law "
                                  "(ln(W) would give a non-positive depth)");
        return p.kappa * std::log(static_cast<double>(width));
    }
    if (width < 1) throw ValidationError("d_crit: width must be >= 1");
    return p.tau_c * std::pow(static_cast<double>(width), p.tau_a);
}

double tau(std::uint32_t width, const ScalingLawParams& p) {
    if (width < 1) throw ValidationError("tau: width must be >= 1");
    if (p.dcrit_form == DcritForm::PowerLaw)
        return p.tau_c * std::pow(static_cast<double>(width), p.tau_a);
    if (width < 2)
        throw ValidationError("tau: width must be >= 2 under the log law");
    return p.kappa * std::log(static_cast<double>(width));
}

double penalty(const Architecture& arch, const ScalingLawParams& p) {
    validate(arch);
    const double dc = d_crit(arch.width, p);
    const double excess = (static_cast<double>(arch.depth) - dc) / dc;
    if (excess <= 0.0) return 0.0;
    return p.gamma * std::pow(static_cast<double>(arch.width), -p.mu) * excess;
}

double predict_loss(const Architecture& arch, double tokens, const ScalingLawParams& p) {
    validate(arch);
    if (!(tokens > 0.0))
        throw ValidationError("predict_loss: tokens must be a known positive count; "
                              "for records without a token budget use the fit module's "
                              "per-group offset scheme");
    if (std::isnan(p.A) || std::isnan(p.B))
        throw ValidationError("predict_loss: normalization constants A and B are not set; "
                              "calibrate them with the fit module or load a params file");
    const double n = static_cast<double>(count_params(arch));
    return p.A * std::pow(n, -p.alpha) + p.B * std::pow(tokens, -p.delta) + penalty(arch, p);
}

namespace {

double json_num_or_nan(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j[key].get<double>();
}

}  // namespace

std::string params_to_json(const ScalingLawParams& p) {
    nlohmann::json j;
    if (std::isnan(p.A)) j["A"] = nullptr; else j["A"] = p.A;
    j["alpha"] = p.alpha;
    if (std::isnan(p.B)) j["B"] = nullptr; else j["B"] = p.B;
    j["delta"] = p.delta;
    j["gamma"] = p.gamma;
    j["mu"] = p.mu;
    j["kappa"] = p.kappa;
    j["tau_c"] = p.tau_c;
    j["tau_a"] = p.tau_a;
    j["dcrit_form"] = to_string(p.dcrit_form);
    return j.dump(2);
}

ScalingLawParams params_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("params JSON: ") + e.what());
    }
    ScalingLawParams p;
    p.A = json_num_or_nan(j, "A");
    if (j.contains("alpha")) p.alpha = j["alpha"].get<double>();
    p.B = json_num_or_nan(j, "B");
    if (j.contains("delta")) p.delta = j["delta"].get<double>();
    if (j.contains("gamma")) p.gamma = j["gamma"].get<double>();
    if (j.contains("mu")) p.mu = j["mu"].get<double>();
    if (j.contains("kappa")) p.kappa = j["kappa"].get<double>();
    if (j.contains("tau_c")) p.tau_c = j["tau_c"].get<double>();
    if (j.contains("tau_a")) p.tau_a = j["tau_a"].get<double>();
    if (j.contains("dcrit_form")) p.dcrit_form = parse_dcrit_form(j["dcrit_form"].get<std::string>());
    validate(p);
    return p;
}

}  // namespace archscale
