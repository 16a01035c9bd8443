#pragma once

#include <json.hpp>

#include "tsadapt/metrics.hpp"
#include "tsadapt/run_config.hpp"

namespace tsadapt {

// Flat object with the reporting table's column names: Thr, tau, Acc, Prec,
// Rec, F1, AUROC, AUPRC, TN, FP, FN, TP and the '+' point-adjusted variants.
nlohmann::json report_to_json(const EvalReport& report);

nlohmann::json config_to_json(const RunConfig& cfg);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

} // namespace tsadapt
