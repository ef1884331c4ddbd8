#ifndef GREEDYFOOL_REPORT_HPP
#define GREEDYFOOL_REPORT_HPP

// JSON serialisation of attack and metric reports. The layouts are described
// by schemas/attack_report.schema.json and schemas/metrics_report.schema.json.

#include <string>
#include <vector>

#include <json.hpp>

#include "greedyfool/attack.hpp"
#include "greedyfool/perceptual_metrics.hpp"

namespace greedyfool {

inline constexpr const char* kReportSchemaVersion = "1.0";

inline nlohmann::json unit_to_json(const PerturbationUnit& u)
{
    return {{"x", u.x}, {"y", u.y}, {"r", u.r}, {"g", u.g}, {"b", u.b}};
}

/// `include_timing` = false drops elapsed_seconds so reports compare byte-for-byte.
inline nlohmann::json to_json(const AttackReport& r, bool include_timing = true)
{
    nlohmann::json units = nlohmann::json::array();
    for (const auto& a : r.applied_units) {
        auto u = unit_to_json(a.unit);
        u["priority"] = a.priority;
        units.push_back(std::move(u));
    }
    nlohmann::json j{
        {"schema_version", kReportSchemaVersion},
        {"method", r.method},
        {"mode", to_string(r.mode)},
        {"true_label", r.true_label},
        {"target_label", r.target_label ? nlohmann::json(*r.target_label) : nlohmann::json(nullptr)},
        {"success", r.success},
        {"applied_units", std::move(units)},
        {"final_label", r.final_label},
        {"final_confidence", r.final_confidence},
        {"oracle_calls", r.oracle_calls},
        {"candidates_ranked", r.candidates_ranked},
        {"metrics",
         {{"mul_factor_loss", r.metrics.mul_factor_loss},
          {"l0", r.metrics.l0},
          {"l2", r.metrics.l2},
          {"linf", r.metrics.linf}}},
        {"warnings", r.warnings},
        {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)},
    };
    if (include_timing)
        j["elapsed_seconds"] = r.elapsed_seconds;
    return j;
}

inline nlohmann::json breakdown_to_json(const metrics::PixelLoss& p)
{
    auto j = unit_to_json(p.unit);
    j["ps"] = p.breakdown.ps;
    j["sd"] = p.breakdown.sd;
    j["weighted"] = p.breakdown.weighted;
    j["integ_loss"] = p.breakdown.total;
    return j;
}

/// Lp norms and the perceptual loss; optionally the per-pixel terms.
inline nlohmann::json metrics_report(const ImageTensor& benign, const ImageTensor& adversarial,
                                     const metrics::LossModel& model, bool with_breakdown)
{
    const auto lp = metrics::lp_norms(benign, adversarial);
    const auto pixels = metrics::pixel_losses(benign, adversarial, model.weights, model.table, model.sd_floor);
    double total = 0.0;
    for (const auto& p : pixels)
        total += p.breakdown.total;
    nlohmann::json j{{"schema_version", kReportSchemaVersion},
                     {"L0", lp.l0},
                     {"L2", lp.l2},
                     {"Linf", lp.linf},
                     {"MulFactorLoss", total}};
    if (with_breakdown) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& p : pixels)
            list.push_back(breakdown_to_json(p));
        j["pixels"] = std::move(list);
    }
    return j;
}

} // namespace greedyfool

#endif // GREEDYFOOL_REPORT_HPP
