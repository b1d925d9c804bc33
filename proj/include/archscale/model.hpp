#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace archscale {

// A decoder-only transformer shape. depth = number of blocks, width = hidden
// dimension, vocab = token vocabulary, context = learned positional table
// length (0 for rotary-style models, but the reference configs count it).
struct Architecture {
    std::uint32_t depth = 1;
    std::uint32_t width = 1;
    std::uint32_t vocab = 50257;
    std::uint32_t context = 1024;
};

// Throws ValidationError unless depth >= 1 and width >= 1.
void validate(const Architecture& arch);

struct ParamBreakdown {
    std::uint64_t blocks = 0;        // 12 * D * W^2
    std::uint64_t embeddings = 0;    // 2 * V * W (input + tied output head)
    std::uint64_t positional = 0;    // P * W
    std::uint64_t block_norms = 0;   // 4 * D * W (two gain/bias pairs per block)
    std::uint64_t final_norm = 0;    // 2 * W
    std::uint64_t total = 0;
};

// Exact integer parameter count under the toolkit's accounting convention.
// Matches the bundled results table to better than 0.5% everywhere the table
// is internally consistent (see data/data_notes.md for the one row that isn't).
std::uint64_t count_params(const Architecture& arch);

// The bare 12*D*W^2 block term.
std::uint64_t core_params(const Architecture& arch);

ParamBreakdown param_breakdown(const Architecture& arch);
std::string explain_params(const Architecture& arch);

// Training FLOPs approximated as 6 * N * tokens. Double-valued so the product
// cannot overflow for any realistic shape.
double compute_flops(const Architecture& arch, double tokens);

// Tokens that exhaust a FLOP budget on this architecture: C / (6 N).
double tokens_for_flops(const Architecture& arch, double flops);

struct TrainingBudget {
    double tokens = 0.0;  // token count
    double flops = 0.0;   // 6 * N * tokens when materialized
};

TrainingBudget make_budget(const Architecture& arch, double tokens);

enum class ScaleGroup { Baseline, OneB, ThreeB, SevenB };

const char* to_string(ScaleGroup g);
std::optional<ScaleGroup> parse_scale_group(const std::string& s);

// One trained-model observation. tokens is empty where the source table does
// not state a token budget.
struct LossRecord {
    Architecture arch;
    std::optional<double> tokens;           // absolute token count
    double loss = 0.0;                      // nats
    std::optional<double> params_reported;  // absolute count, as printed
    ScaleGroup group = ScaleGroup::Baseline;
};

// Checks loss > 0 and, when params_reported is present, that it agrees with
// count_params(arch) to within 2%.
void validate(const LossRecord& rec);

}  // namespace archscale
