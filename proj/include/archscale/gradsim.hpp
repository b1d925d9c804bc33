#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "archscale/fit.hpp"

namespace archscale {

enum class SimMode { MatrixProduct, NormRecursion };

const char* to_string(SimMode m);
SimMode parse_sim_mode(const std::string& s);

struct SimConfig {
    std::uint32_t depth = 2;
    std::uint32_t width = 1;
    double sigma = 1.0;
    std::uint32_t trials = 64;
    std::uint64_t rng_seed = 42;
    SimMode mode = SimMode::MatrixProduct;
    // Refuse runs whose width * depth * trials exceeds this many samples.
    std::uint64_t work_cap = 1ULL << 31;
    // Aggregate sqrt(mean ||g||^2) instead of mean ||g|| (for comparing the
    // sampled chain against the squared-norm recursion).
    bool rms_aggregation = false;
};

void validate(const SimConfig& config);

// Backward gradient-norm profile. ratios[l-1] is the per-layer norm ratio
// ||grad_l|| / ||grad_D|| for l = 1..D; ratios[D-1] == 1 exactly.
struct GradientProfile {
    std::uint32_t width = 0;
    std::uint32_t depth = 0;
    std::vector<double> ratios;
    std::vector<double> ratio_se;  // standard error of each mean (zero when exact)
    double tau_hat = 0.0;
    DecayKind decay_kind = DecayKind::Decay;
    std::uint32_t trials = 0;
    SimMode mode = SimMode::MatrixProduct;
};

// Monte Carlo product of transposed residual-block Jacobians J_k = I + s*H_k
// with s = sigma/sqrt(W) and H_k i.i.d. Gaussian entries of variance 1/W.
// For such H the vector H^T g is, conditionally on g, Gaussian with
// covariance ||g||^2/W * I, so each layer is sampled exactly without
// materializing the W x W matrix. Mean norms over trials, normalized to the
// output layer; deterministic per (seed, width, trial) streams.
GradientProfile simulate_matrix_product(const SimConfig& config);

// Deterministic closed-form recursion for the squared-norm mean-field model
// E||g_l||^2 = E||g_{l+1}||^2 * (1 - sigma^2/W):
//   ratios[l] = (1 - sigma^2/W)^((D - l)/2)
// Requires sigma^2/W < 1.
GradientProfile simulate_norm_recursion(const SimConfig& config);

GradientProfile simulate(const SimConfig& config);

struct TauPoint {
    std::uint32_t width = 0;
    double tau_hat = 0.0;
    DecayKind kind = DecayKind::Decay;
};

// Runs the configured mode per width (config.width ignored) and extracts tau
// via fit_exponential_decay. config.depth == 0 selects depth = 3 * d_crit(W)
// rounded, so the decay regime is visible. Needs >= 3 widths.
std::vector<TauPoint> sweep_tau(const std::vector<std::uint32_t>& widths, SimConfig config);

std::string profile_to_csv(const GradientProfile& profile);
std::string profile_to_json(const GradientProfile& profile);
std::string sweep_to_csv(const std::vector<TauPoint>& sweep);

}  // namespace archscale
