#include "archscale/model.hpp"

#include <cmath>
#include <sstream>

#include "archscale/errors.hpp"

namespace archscale {

void validate(const Architecture& arch) {
    if (arch.depth < 1) throw ValidationError("Architecture: depth must be >= 1");
    if (arch.width < 1) throw ValidationError("Architecture: width must be >= 1");
}

std::uint64_t core_params(const Architecture& arch) {
    const auto d = static_cast<std::uint64_t>(arch.depth);
    const auto w = static_cast<std::uint64_t>(arch.width);
    return 12ULL * d * w * w;
}

ParamBreakdown param_breakdown(const Architecture& arch) {
    validate(arch);
    const auto d = static_cast<std::uint64_t>(arch.depth);
    const auto w = static_cast<std::uint64_t>(arch.width);
    const auto v = static_cast<std::uint64_t>(arch.vocab);
    const auto p = static_cast<std::uint64_t>(arch.context);
    ParamBreakdown b;
    b.blocks = 12ULL * d * w * w;
    b.embeddings = 2ULL * v * w;
    b.positional = p * w;
    b.block_norms = 4ULL * d * w;
    b.final_norm = 2ULL * w;
    b.total = b.blocks + b.embeddings + b.positional + b.block_norms + b.final_norm;
    return b;
}

std::uint64_t count_params(const Architecture& arch) {
    return param_breakdown(arch).total;
}

std::string explain_params(const Architecture& arch) {
    const ParamBreakdown b = param_breakdown(arch);
    std::ostringstream os;
    os << "N(D=" << arch.depth << ", W=" << arch.width << ", V=" << arch.vocab
       << ", P=" << arch.context << ")\n"
       << "  blocks      12*D*W^2 = " << b.blocks << "\n"
       << "  embeddings  2*V*W    = " << b.embeddings << "\n"
       << "  positional  P*W      = " << b.positional << "\n"
       << "  block norms 4*D*W    = " << b.block_norms << "\n"
       << "  final norm  2*W      = " << b.final_norm << "\n"
       << "  total                = " << b.total << "\n";
    return os.str();
}

double compute_flops(const Architecture& arch, double tokens) {
    if (!(tokens > 0.0)) throw ValidationError("compute_flops: tokens must be > 0");
    return 6.0 * static_cast<double>(count_params(arch)) * tokens;
}

double tokens_for_flops(const Architecture& arch, double flops) {
    if (!(flops > 0.0)) throw ValidationError("tokens_for_flops: flops must be > 0");
    return flops / (6.0 * static_cast<double>(count_params(arch)));
}

TrainingBudget make_budget(const Architecture& arch, double tokens) {
    return TrainingBudget{tokens, compute_flops(arch, tokens)};
}

const char* to_string(ScaleGroup g) {
    switch (g) {
        case ScaleGroup::Baseline: return "Baseline";
        case ScaleGroup::OneB: return "OneB";
        case ScaleGroup::ThreeB: return "ThreeB";
        case ScaleGroup::SevenB: return "SevenB";
    }
    return "?";
}

std::optional<ScaleGroup> parse_scale_group(const std::string& s) {
    if (s == "Baseline") return ScaleGroup::Baseline;
    if (s == "OneB") return ScaleGroup::OneB;
    if (s == "ThreeB") return ScaleGroup::ThreeB;
    if (s == "SevenB") return ScaleGroup::SevenB;
    return std::nullopt;
}

void validate(const LossRecord& rec) {
    validate(rec.arch);
    if (!(rec.loss > 0.0)) throw ValidationError("LossRecord: loss must be > 0");
    if (rec.tokens && !(*rec.tokens > 0.0))
        throw ValidationError("LossRecord: tokens must be > 0 when present");
    if (rec.params_reported) {
        const double reported = *rec.params_reported;
        if (!(reported > 0.0)) throw ValidationError("LossRecord: params_reported must be > 0");
        const double counted = static_cast<double>(count_params(rec.arch));
        const double rel = std::abs(reported - counted) / reported;
        if (rel > 0.02) {
            std::ostringstream os;
            os << "LossRecord: reported parameter count " << reported
               << " differs from computed " << counted << " by "
               << rel * 100.0 << "% (> 2%) for D=" << rec.arch.depth
               << " W=" << rec.arch.width;
            throw ValidationError(os.str());
        }
    }
}

}  // namespace archscale
