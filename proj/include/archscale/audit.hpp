#pragma once

#include <string>
#include <vector>

#include "archscale/scaling_law.hpp"

namespace archscale {

enum class Verdict { UnderCritical, NearOptimal, OverDeep, Delusive };

const char* to_string(Verdict v);

// Quantization of depth/critical-depth ratio into verdict bands:
//   ratio < 1 UnderCritical, [1, 2) NearOptimal, [2, 3) OverDeep, >= 3 Delusive.
Verdict verdict_for(double ratio);

struct AuditEntry {
    std::string name;
    std::uint32_t depth = 0;
    std::uint32_t width = 0;
    double d_crit = 0.0;
    double ratio = 0.0;
    Verdict verdict = Verdict::UnderCritical;
};

AuditEntry audit_model(const std::string& name, std::uint32_t depth, std::uint32_t width,
                       const ScalingLawParams& params);

struct RosterModel {
    std::string name;
    std::uint32_t depth = 0;
    std::uint32_t width = 0;
};

// GPT-3, PaLM, Llama-2-70B, Llama-3-70B, Mistral-7B with their published
// depth/width.
const std::vector<RosterModel>& built_in_roster();

// CSV with header: name,depth,width
std::vector<RosterModel> load_roster_csv(const std::string& path);

struct AuditReport {
    std::vector<AuditEntry> entries;  // sorted by ratio descending, then name
    double kappa = 0.0;
    DcritForm form = DcritForm::LogLaw;
};

// Throws on an empty roster or duplicate names.
AuditReport audit_report(const std::vector<RosterModel>& roster, const ScalingLawParams& params);

std::string audit_to_text(const AuditReport& report);
std::string audit_to_json(const AuditReport& report);

}  // namespace archscale
