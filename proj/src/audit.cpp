#include "archscale/audit.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "archscale/errors.hpp"

namespace archscale {

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::UnderCritical: return "UnderCritical";
        case Verdict::NearOptimal: return "NearOptimal";
        case Verdict::OverDeep: return "OverDeep";
        case Verdict::Delusive: return "Delusive";
    }
    return "?";
}

Verdict verdict_for(double ratio) {
    if (ratio < 1.0) return Verdict::UnderCritical;
    if (ratio < 2.0) return Verdict::NearOptimal;
    if (ratio < 3.0) return Verdict::OverDeep;
    return Verdict::Delusive;
}

AuditEntry audit_model(const std::string& name, std::uint32_t depth, std::uint32_t width,
                       const ScalingLawParams& params) {
    if (depth < 1) throw ValidationError("audit: depth must be >= 1");
    if (width < 2) throw ValidationError("audit: width must be >= 2");
    AuditEntry e;
    e.name = name;
    e.depth = depth;
    e.width = width;
    e.d_crit = d_crit(width, params);
    e.ratio = static_cast<double>(depth) / e.d_crit;
    e.verdict = verdict_for(e.ratio);
    return e;
}

const std::vector<RosterModel>& built_in_roster() {
    static const std::vector<RosterModel> roster = {
        {"GPT-3", 96, 12288},
        {"PaLM", 118, 18432},
        {"Llama-2-70B", 80, 8192},
        {"Llama-3-70B", 80, 8192},
        {"Mistral-7B", 32, 4096},
    };
    return roster;
}

std::vector<RosterModel> load_roster_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open roster file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty roster file");
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != "name,depth,width")
        throw ValidationError(path + ": roster header must be 'name,depth,width'");
    std::vector<RosterModel> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 == std::string::npos ? c1 : c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ValidationError(path + ": row " + std::to_string(row) +
                                  ": expected 3 columns");
        RosterModel m;
        m.name = line.substr(0, c1);
        const auto parse_u32 = [&](const std::string& s, const char* col) {
            std::uint32_t v{};
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc{} || p != s.data() + s.size())
                throw ValidationError(path + ": row " + std::to_string(row) + ", column '" +
                                      col + "': cannot parse '" + s + "'");
            return v;
        };
        m.depth = parse_u32(line.substr(c1 + 1, c2 - c1 - 1), "depth");
        m.width = parse_u32(line.substr(c2 + 1), "width");
        out.push_back(m);
    }
    return out;
}

AuditReport audit_report(const std::vector<RosterModel>& roster,
                         const ScalingLawParams& params) {
    if (roster.empty()) throw ValidationError("audit: roster is empty");
    std::set<std::string> names;
    for (const auto& m : roster)
        if (!names.insert(m.name).second)
            throw ValidationError("audit: duplicate model name '" + m.name + "'");

    AuditReport rep;
    rep.kappa = params.kappa;
    rep.form = params.dcrit_form;
    for (const auto& m : roster)
        rep.entries.push_back(audit_model(m.name, m.depth, m.width, params));
    std::sort(rep.entries.begin(), rep.entries.end(), [](const AuditEntry& a, const AuditEntry& b) {
        if (a.ratio != b.ratio) return a.ratio > b.ratio;
        return a.name < b.name;
    });
    return rep;
}

std::string audit_to_text(const AuditReport& report) {
    std::size_t name_w = 5;
    for (const auto& e : report.entries) name_w = std::max(name_w, e.name.size());
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_w) + 2) << "model" << std::right
       << std::setw(7) << "depth" << std::setw(8) << "width" << std::setw(9) << "d_crit"
       << std::setw(8) << "ratio" << "  verdict\n";
    os << std::setprecision(1) << std::fixed;
    for (const auto& e : report.entries) {
        os << std::left << std::setw(static_cast<int>(name_w) + 2) << e.name << std::right
           << std::setw(7) << e.depth << std::setw(8) << e.width << std::setw(9)
           << std::setprecision(1) << e.d_crit << std::setw(8) << std::setprecision(2)
           << e.ratio << "  " << to_string(e.verdict) << "\n";
    }
    os << "critical depths use " << (report.form == DcritForm::LogLaw ? "kappa * ln(W)"
                                                                       : "c * W^a")
       << " with kappa = " << std::setprecision(3) << report.kappa
       << "; they are extrapolations from sub-10B calibration and are unvalidated "
          "predictions at these scales\n";
    return os.str();
}

std::string audit_to_json(const AuditReport& report) {
    nlohmann::json j;
    j["kappa"] = report.kappa;
    j["dcrit_form"] = to_string(report.form);
    j["entries"] = nlohmann::json::array();
    for (const auto& e : report.entries) {
        j["entries"].push_back({{"name", e.name},
                                {"depth", e.depth},
                                {"width", e.width},
                                {"d_crit", e.d_crit},
                                {"ratio", e.ratio},
                                {"verdict", to_string(e.verdict)}});
    }
    return j.dump(2);
}

}  // namespace archscale
