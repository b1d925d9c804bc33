#pragma once

// Shared test helper: synthetic LossRecords drawn from known parameters.

#include <vector>

#include "archscale/model.hpp"
#include "archscale/rng.hpp"
#include "archscale/scaling_law.hpp"

namespace archscale::testing {

// Varied shapes and token budgets so every parameter (including delta and the
// penalty constants) is identifiable. noise = multiplicative sigma (0 = exact).
inline std::vector<LossRecord> synthetic_records(const ScalingLawParams& truth, int n,
                                                 std::uint64_t seed, double noise = 0.0) {
    static const std::uint32_t kWidths[] = {256, 512, 768, 1024, 1536, 2048};
    std::vector<LossRecord> out;
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        LossRecord rec;
        rec.arch.width = kWidths[rng.uniform_index(6)];
        rec.arch.depth = static_cast<std::uint32_t>(2 + rng.uniform_index(47));
        rec.tokens = std::pow(10.0, 9.0 + 2.5 * rng.uniform());
        rec.loss = predict_loss(rec.arch, *rec.tokens, truth);
        if (noise > 0.0) rec.loss *= 1.0 + noise * rng.normal();
        out.push_back(rec);
    }
    return out;
}

inline ScalingLawParams roundtrip_truth() {
    ScalingLawParams p;
    p.A = 1.5;
    p.alpha = 0.2;
    p.B = 2.0;
    p.delta = 0.1;
    p.gamma = 0.18;
    p.mu = 0.35;
    p.kappa = 2.43;
    p.dcrit_form = DcritForm::LogLaw;
    return p;
}

}  // namespace archscale::testing
