#pragma once

#include <string>
#include <vector>

#include "archscale/model.hpp"

namespace archscale {

struct Dataset {
    std::vector<LossRecord> records;
    std::string source;
    int schema_version = 1;
};

// Validates every record and rejects duplicate (depth, width, scale_group) keys.
void validate(const Dataset& ds);

// The 30-architecture results table shipped with the toolkit: 18 Baseline,
// 5 OneB, 5 ThreeB, 2 SevenB rows. Printed parameter counts are attached as
// params_reported where the source table is internally consistent; see
// data/data_notes.md for the one row that is not.
const Dataset& bundled_dataset();

// Raw CSV text of the bundled table (exact canonical formatting).
const std::string& bundled_csv();

// CSV schema (exact header): depth,width,tokens_billions,loss,scale_group
// An optional trailing params_millions column is accepted and validated
// against count_params to within 2%. tokens_billions may be blank.
Dataset load_csv(const std::string& path);
Dataset parse_csv(const std::string& text, const std::string& source);

std::string write_csv(const Dataset& ds);
std::string dataset_to_json(const Dataset& ds);

// Subset by scale group.
Dataset filter(const Dataset& ds, const std::vector<ScaleGroup>& groups);

enum class CheckStatus { Pass, Fail, Skipped };

struct VerifyCheck {
    std::string name;
    CheckStatus status = CheckStatus::Skipped;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed() const;  // SKIPPED does not count as passed or failed
    int failures() const;
};

// Ordering checks against the headline results: the 24L/16L and 32L/16L
// penalties at width 512, the monotone width sweep at depth 16, the depth
// U-curve at width 512, and the two seven-billion-scale rows.
VerifyReport verify_headline_orderings(const Dataset& ds);

std::string report_to_text(const VerifyReport& report);
std::string report_to_json(const VerifyReport& report);

}  // namespace archscale
