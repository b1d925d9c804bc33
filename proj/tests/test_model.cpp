#include <doctest.h>

#include <cmath>

#include "archscale/errors.hpp"
#include "archscale/model.hpp"
#include "archscale/rng.hpp"

using namespace archscale;

TEST_CASE("count_params matches the accounting formula") {
    // independent oracle: term-by-term integer arithmetic
    const auto oracle = [](std::uint64_t d, std::uint64_t w, std::uint64_t v, std::uint64_t p) {
        return 12 * d * w * w + 2 * v * w + p * w + 4 * d * w + 2 * w;
    };
    const Architecture a{16, 512};
    CHECK(count_params(a) == oracle(16, 512, 50257, 1024));
    CHECK(count_params(a) == 102352896ULL);

    // reference totals, printed in millions, reproduced to better than 0.5%
    const auto rel = [](double got, double want) { return std::abs(got - want) / want; };
    CHECK(rel(static_cast<double>(count_params(a)), 102.2e6) < 0.005);
    CHECK(rel(static_cast<double>(count_params({2, 256})), 27.5e6) < 0.005);

    const Architecture unit{1, 1, 0, 0};
    CHECK(core_params(unit) == 12ULL);
    CHECK(count_params(unit) == 18ULL);  // 12 + 4 block-norm + 2 final-norm
}

TEST_CASE("each extra block adds the same parameter count") {
    Rng rng(7);
    for (int i = 0; i < 25; ++i) {
        const auto w = static_cast<std::uint32_t>(64 + rng.uniform_index(4096));
        const auto d = static_cast<std::uint32_t>(2 + rng.uniform_index(120));
        const Architecture hi{d, w}, lo{d - 1, w};
        CHECK(count_params(hi) - count_params(lo) == 12ULL * w * w + 4ULL * w);
    }
}

TEST_CASE("count_params is monotone in every dimension") {
    const Architecture base{8, 384, 1000, 128};
    CHECK(count_params({9, 384, 1000, 128}) > count_params(base));
    CHECK(count_params({8, 385, 1000, 128}) > count_params(base));
    CHECK(count_params({8, 384, 1001, 128}) > count_params(base));
    CHECK(count_params({8, 384, 1000, 129}) > count_params(base));
}

TEST_CASE("explain_params itemizes the breakdown") {
    const auto b = param_breakdown({16, 512});
    CHECK(b.blocks + b.embeddings + b.positional + b.block_norms + b.final_norm == b.total);
    const std::string text = explain_params({16, 512});
    CHECK(text.find("50331648") != std::string::npos);  // 12*16*512^2
    CHECK(text.find("102352896") != std::string::npos);
}

TEST_CASE("compute_flops is 6 N T") {
    const Architecture a{16, 512};
    const double flops = compute_flops(a, 6.4e9);
    // 6 * 102.1e6 * 6.4e9 from the quoted round numbers
    CHECK(std::abs(flops - 3.92e18) / 3.92e18 < 0.005);
    CHECK(compute_flops(a, 1.0) == 6.0 * static_cast<double>(count_params(a)));

    // back-solving the seven-billion-scale optimum's budget
    const double tokens = tokens_for_flops({32, 4096}, 5.89e21);
    CHECK(std::abs(tokens - 1.43e11) / 1.43e11 < 0.005);

    // no overflow at the extreme corner of the documented domain
    const double big = compute_flops({10000, 1000000}, 1e15);
    CHECK(std::isfinite(big));
    CHECK(big > 1e32);
}

TEST_CASE("validation rejects bad shapes and records") {
    CHECK_THROWS_AS(validate(Architecture{0, 512}), ValidationError);
    CHECK_THROWS_AS(validate(Architecture{4, 0}), ValidationError);
    CHECK_THROWS_AS(compute_flops({4, 64}, 0.0), ValidationError);

    LossRecord rec;
    rec.arch = {16, 512};
    rec.loss = 3.435;
    rec.params_reported = 102.2e6;
    CHECK_NOTHROW(validate(rec));
    rec.params_reported = 110.0e6;  // 7% off
    CHECK_THROWS_AS(validate(rec), ValidationError);
    rec.params_reported.reset();
    rec.loss = -1.0;
    CHECK_THROWS_AS(validate(rec), ValidationError);
}

TEST_CASE("training budget materializes both token and FLOP views") {
    const TrainingBudget b = make_budget({16, 512}, 6.4e9);
    CHECK(b.tokens == 6.4e9);
    CHECK(b.flops == compute_flops({16, 512}, 6.4e9));
}

TEST_CASE("scale group round trip") {
    for (const auto g :
         {ScaleGroup::Baseline, ScaleGroup::OneB, ScaleGroup::ThreeB, ScaleGroup::SevenB})
        CHECK(parse_scale_group(to_string(g)) == g);
    CHECK(!parse_scale_group("2B").has_value());
}
