#include "tsadapt/json_io.hpp"

#include <fstream>

#include "tsadapt/errors.hpp"

namespace tsadapt {

using nlohmann::json;

json report_to_json(const EvalReport& r) {
    json j;
    j["Thr"] = r.threshold_spec.str();
    j["tau"] = r.tau;
    j["Acc"] = r.accuracy;
    j["Prec"] = r.precision;
    j["Rec"] = r.recall;
    j["F1"] = r.f1;
    j["AUROC"] = r.auroc ? json(*r.auroc) : json(nullptr);
    j["AUPRC"] = r.auprc ? json(*r.auprc) : json(nullptr);
    j["TN"] = r.counts.tn;
    j["FP"] = r.counts.fp;
    j["FN"] = r.counts.fn;
    j["TP"] = r.counts.tp;
    j["Acc+"] = r.accuracy_pa;
    j["Prec+"] = r.precision_pa;
    j["Rec+"] = r.recall_pa;
    j["F1+"] = r.f1_pa;
    j["TN+"] = r.counts_pa.tn;
    j["FP+"] = r.counts_pa.fp;
    j["FN+"] = r.counts_pa.fn;
    j["TP+"] = r.counts_pa.tp;
    return j;
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["window"] = cfg.window;
    j["stride_train"] = cfg.effective_stride_train();
    j["stride_test"] = cfg.effective_stride_test();
    j["hidden"] = cfg.effective_hidden();
    j["latent"] = cfg.latent;
    j["gamma"] = cfg.gamma;
    j["eta"] = cfg.eta;
    j["threshold"] = cfg.threshold;
    j["epochs"] = cfg.epochs;
    j["batch"] = cfg.batch_size;
    j["lr"] = cfg.lr;
    j["seed"] = cfg.seed;
    j["seeds"] = cfg.seeds;
    j["detrend"] = cfg.use_detrend;
    j["adapt"] = cfg.use_tta;
    j["scale"] = cfg.standardize;
    j["synthetic"] = cfg.use_synthetic;
    return j;
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw InvalidInput("write failed: " + path);
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InvalidInput("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

} // namespace tsadapt
