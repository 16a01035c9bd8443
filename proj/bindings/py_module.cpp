#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>

#include "tsadapt/adaptation.hpp"
#include "tsadapt/commands.hpp"
#include "tsadapt/dataset.hpp"
#include "tsadapt/errors.hpp"
#include "tsadapt/metrics.hpp"
#include "tsadapt/model.hpp"
#include "tsadapt/serialize.hpp"
#include "tsadapt/threshold.hpp"
#include "tsadapt/trend.hpp"

namespace py = pybind11;
using namespace tsadapt;

namespace {

py::array_t<double> matrix_to_array(const Matrix& m) {
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

Matrix array_to_matrix(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) {
        throw InvalidInput("expected a 2-d array");
    }
    Matrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), m.data.begin());
    return m;
}

TimeSeriesDataset make_dataset(const py::array_t<double>& values,
                               const std::optional<std::vector<int>>& labels,
                               const std::optional<std::vector<std::string>>& feature_names) {
    TimeSeriesDataset ds;
    ds.values = array_to_matrix(values);
    for (double v : ds.values.data) {
        if (!std::isfinite(v)) throw InvalidInput("values must be finite");
    }
    if (labels) {
        if (labels->size() != ds.timesteps()) {
            throw InvalidInput("labels length does not match the number of timesteps");
        }
        for (int y : *labels) {
            if (y != 0 && y != 1) throw InvalidInput("labels must be 0 or 1");
        }
        ds.labels = *labels;
    }
    if (feature_names) {
        if (feature_names->size() != ds.features()) {
            throw InvalidInput("feature_names length does not match the number of features");
        }
        ds.feature_names = *feature_names;
    } else {
        for (std::size_t j = 0; j < ds.features(); ++j) {
            ds.feature_names.push_back("f" + std::to_string(j + 1));
        }
    }
    return ds;
}

py::dict report_to_dict(const EvalReport& r) {
    py::dict d;
    d["Thr"] = r.threshold_spec.str();
    d["tau"] = r.tau;
    d["Acc"] = r.accuracy;
    d["Prec"] = r.precision;
    d["Rec"] = r.recall;
    d["F1"] = r.f1;
    d["AUROC"] = r.auroc ? py::object(py::float_(*r.auroc)) : py::object(py::none());
    d["AUPRC"] = r.auprc ? py::object(py::float_(*r.auprc)) : py::object(py::none());
    d["TN"] = r.counts.tn;
    d["FP"] = r.counts.fp;
    d["FN"] = r.counts.fn;
    d["TP"] = r.counts.tp;
    d["Acc+"] = r.accuracy_pa;
    d["Prec+"] = r.precision_pa;
    d["Rec+"] = r.recall_pa;
    d["F1+"] = r.f1_pa;
    d["TN+"] = r.counts_pa.tn;
    d["FP+"] = r.counts_pa.fp;
    d["FN+"] = r.counts_pa.fn;
    d["TP+"] = r.counts_pa.tp;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Streaming time-series anomaly detection with trend-aware test-time adaptation";
#ifdef TSADAPT_VERSION
    m.attr("__version__") = TSADAPT_VERSION;
#else
    m.attr("__version__") = "dev";
#endif

    py::register_exception<InvalidInput>(m, "InvalidInputError", PyExc_ValueError);
    py::register_exception<NumericFailure>(m, "NumericFailureError", PyExc_ArithmeticError);

    // --- data ---
    py::class_<TimeSeriesDataset>(m, "TimeSeriesDataset")
        .def(py::init(&make_dataset), py::arg("values"), py::arg("labels") = std::nullopt,
             py::arg("feature_names") = std::nullopt)
        .def_property_readonly("values",
                               [](const TimeSeriesDataset& ds) { return matrix_to_array(ds.values); })
        .def_property_readonly("labels",
                               [](const TimeSeriesDataset& ds) { return ds.labels; })
        .def_property_readonly("feature_names",
                               [](const TimeSeriesDataset& ds) { return ds.feature_names; })
        .def_property_readonly("timesteps", &TimeSeriesDataset::timesteps)
        .def_property_readonly("features", &TimeSeriesDataset::features)
        .def("__repr__", [](const TimeSeriesDataset& ds) {
            return "TimeSeriesDataset(" + std::to_string(ds.timesteps()) + "x" +
                   std::to_string(ds.features()) + (ds.labels ? ", labeled)" : ")");
        });

    py::class_<Scaler>(m, "Scaler")
        .def_readonly("mean", &Scaler::mean)
        .def_readonly("std", &Scaler::std_dev);

    py::class_<Window>(m, "Window")
        .def(py::init([](const py::array_t<double>& data, std::size_t end_index) {
                 return Window{array_to_matrix(data), end_index};
             }),
             py::arg("data"), py::arg("end_index"))
        .def_property_readonly("data", [](const Window& w) { return matrix_to_array(w.data); })
        .def_readonly("end_index", &Window::end_index);

    py::class_<SyntheticSpec>(m, "SyntheticSpec")
        .def(py::init<>())
        .def_readwrite("length_train", &SyntheticSpec::length_train)
        .def_readwrite("length_test", &SyntheticSpec::length_test)
        .def_readwrite("period", &SyntheticSpec::period)
        .def_readwrite("amplitude", &SyntheticSpec::amplitude)
        .def_readwrite("shift_at", &SyntheticSpec::shift_at)
        .def_readwrite("shift_magnitude", &SyntheticSpec::shift_magnitude)
        .def_readwrite("anomaly_count", &SyntheticSpec::anomaly_count)
        .def_readwrite("anomaly_magnitude", &SyntheticSpec::anomaly_magnitude)
        .def_readwrite("noise_std", &SyntheticSpec::noise_std)
        .def_readwrite("seed", &SyntheticSpec::seed);

    m.def("load_csv", &load_csv, py::arg("path"), py::arg("label_column") = std::nullopt);
    m.def("write_csv", &write_csv, py::arg("dataset"), py::arg("path"));
    m.def("fit_scaler", &fit_scaler, py::arg("train"));
    m.def("apply_scaler", &apply_scaler, py::arg("dataset"), py::arg("scaler"));
    m.def("invert_scaler", &invert_scaler, py::arg("dataset"), py::arg("scaler"));
    m.def("make_windows", &make_windows, py::arg("dataset"), py::arg("window"),
          py::arg("stride"));
    m.def("generate_synthetic", &generate_synthetic, py::arg("spec"));

    // --- trend ---
    py::class_<TrendEstimator>(m, "TrendEstimator")
        .def(py::init<std::vector<double>, double>(), py::arg("initial_mu"), py::arg("gamma"))
        .def_static("from_training", &TrendEstimator::from_training, py::arg("train"),
                    py::arg("gamma"))
        .def("update", &TrendEstimator::update, py::arg("window"),
             py::return_value_policy::copy)
        .def_property_readonly("mu", &TrendEstimator::mu)
        .def_property_readonly("gamma", &TrendEstimator::gamma);

    m.def("detrend", &detrend, py::arg("window"), py::arg("mu"));
    m.def("retrend", &retrend, py::arg("recon"), py::arg("mu"));

    // --- model ---
    py::class_<ModelDims>(m, "ModelDims")
        .def(py::init([](std::size_t window, std::size_t features, std::size_t hidden,
                         std::size_t latent) {
                 return ModelDims{window, features, hidden, latent};
             }),
             py::arg("window"), py::arg("features"), py::arg("hidden"), py::arg("latent"))
        .def_readwrite("window", &ModelDims::window)
        .def_readwrite("features", &ModelDims::features)
        .def_readwrite("hidden", &ModelDims::hidden)
        .def_readwrite("latent", &ModelDims::latent);

    py::class_<MlpAutoencoder>(m, "MlpAutoencoder")
        .def_static("init", &MlpAutoencoder::init, py::arg("dims"), py::arg("seed"))
        .def("forward", &MlpAutoencoder::forward, py::arg("window"))
        .def_property_readonly("dims", &MlpAutoencoder::dims)
        .def_property_readonly("seed", &MlpAutoencoder::seed)
        .def_property_readonly("parameter_count", &MlpAutoencoder::parameter_count);

    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("train_scores", &TrainResult::train_scores)
        .def_readonly("epoch_losses", &TrainResult::epoch_losses);

    m.def("score", &score, py::arg("window"), py::arg("recon"));
    m.def(
        "masked_loss",
        [](const Window& x, const Window& recon, const std::vector<int>& mask) {
            const MaskedLoss ml = masked_loss(x, recon, mask);
            return py::make_tuple(ml.loss, ml.per_row);
        },
        py::arg("window"), py::arg("recon"), py::arg("mask"));
    m.def("train_offline", &train_offline, py::arg("model"), py::arg("windows"),
          py::arg("epochs"), py::arg("batch_size"), py::arg("lr"), py::arg("seed"));

    // --- adaptation ---
    py::class_<AdaptationConfig>(m, "AdaptationConfig")
        .def(py::init<>())
        .def_readwrite("gamma", &AdaptationConfig::gamma)
        .def_readwrite("eta", &AdaptationConfig::eta)
        .def_readwrite("tau", &AdaptationConfig::tau)
        .def_readwrite("window", &AdaptationConfig::window)
        .def_readwrite("use_detrend", &AdaptationConfig::use_detrend)
        .def_readwrite("use_tta", &AdaptationConfig::use_tta);

    py::class_<AdaptationState>(m, "AdaptationState")
        .def(py::init([](const MlpAutoencoder& model, const std::vector<double>& trend_init,
                         const AdaptationConfig& config) {
                 return AdaptationState{model, TrendEstimator(trend_init, config.gamma), config,
                                        0};
             }),
             py::arg("model"), py::arg("trend_init"), py::arg("config"))
        .def_readonly("windows_processed", &AdaptationState::windows_processed)
        .def_property_readonly("model",
                               [](const AdaptationState& s) { return s.model; })
        .def_property_readonly("mu",
                               [](const AdaptationState& s) { return s.trend.mu(); });

    py::class_<StreamResult>(m, "StreamResult")
        .def_readonly("scores", &StreamResult::scores)
        .def_readonly("preds", &StreamResult::preds)
        .def_readonly("window_of", &StreamResult::window_of)
        .def_readonly("window_ends", &StreamResult::window_ends)
        .def_property_readonly("trend_trace", [](const StreamResult& r) {
            return matrix_to_array(r.trend_trace);
        });

    m.def(
        "process_window",
        [](AdaptationState& state, const Window& window) {
            const WindowOutcome out = process_window(state, window);
            return py::make_tuple(out.scores, out.preds);
        },
        py::arg("state"), py::arg("window"));
    m.def("run_stream", &run_stream, py::arg("state"), py::arg("test"), py::arg("stride"));
    m.def(
        "snapshot",
        [](const AdaptationState& state) {
            const auto bytes = snapshot(state);
            return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
        },
        py::arg("state"));
    m.def(
        "restore",
        [](const py::bytes& blob) {
            const std::string_view view = blob;
            return restore(std::vector<std::uint8_t>(view.begin(), view.end()));
        },
        py::arg("blob"));

    // --- thresholds & metrics ---
    m.def("percentile_threshold", &percentile_threshold, py::arg("scores"), py::arg("p"));
    m.def("oracle_threshold", &oracle_threshold, py::arg("scores"), py::arg("labels"));

    py::class_<ConfusionCounts>(m, "ConfusionCounts")
        .def_readonly("tn", &ConfusionCounts::tn)
        .def_readonly("fp", &ConfusionCounts::fp)
        .def_readonly("fn", &ConfusionCounts::fn)
        .def_readonly("tp", &ConfusionCounts::tp);

    m.def("confusion", &confusion, py::arg("preds"), py::arg("labels"));
    m.def(
        "prf1",
        [](const ConfusionCounts& c) {
            const PrfStats s = prf1(c);
            py::dict d;
            d["precision"] = s.precision;
            d["recall"] = s.recall;
            d["f1"] = s.f1;
            d["accuracy"] = s.accuracy;
            return d;
        },
        py::arg("counts"));
    m.def("point_adjust", &point_adjust, py::arg("preds"), py::arg("labels"));
    m.def("auroc", &auroc, py::arg("scores"), py::arg("labels"));
    m.def("auprc", &auprc, py::arg("scores"), py::arg("labels"));
    m.def(
        "kld_shift",
        [](const TimeSeriesDataset& train, const TimeSeriesDataset& test, std::size_t bins) {
            const KldReport r = kld_shift(train, test, bins);
            return py::make_tuple(r.per_feature, r.total);
        },
        py::arg("train"), py::arg("test"), py::arg("bins") = 50);
    m.def(
        "evaluate",
        [](const std::vector<double>& scores, const std::vector<int>& preds,
           const std::vector<int>& labels, double tau, const std::string& spec) {
            return report_to_dict(evaluate(scores, preds, labels, tau,
                                           ThresholdSpec::parse(spec)));
        },
        py::arg("scores"), py::arg("preds"), py::arg("labels"), py::arg("tau"),
        py::arg("threshold_spec") = "fixed:0");
}
