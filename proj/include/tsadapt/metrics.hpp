#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tsadapt/dataset.hpp"
#include "tsadapt/threshold.hpp"

namespace tsadapt {

struct ConfusionCounts {
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tp = 0;

    std::size_t total() const { return tn + fp + fn + tp; }

    bool operator==(const ConfusionCounts&) const = default;
};

struct PrfStats {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double accuracy = 0.0;
};

struct EvalReport {
    ConfusionCounts counts;
    ConfusionCounts counts_pa;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    double accuracy_pa = 0.0, precision_pa = 0.0, recall_pa = 0.0, f1_pa = 0.0;
    std::optional<double> auroc;
    std::optional<double> auprc;
    double tau = 0.0;
    ThresholdSpec threshold_spec;
};

ConfusionCounts confusion(const std::vector<int>& preds, const std::vector<int>& labels);

// Degenerate denominators yield 0 so reports never fail on all-negative
// predictions; accuracy of an empty instance is 0.
PrfStats prf1(const ConfusionCounts& c);

// Marks a whole maximal run of label==1 timesteps as detected if any
// prediction inside it fired. Predictions at label==0 positions are
// untouched. Idempotent.
std::vector<int> point_adjust(const std::vector<int>& preds, const std::vector<int>& labels);

// Mann-Whitney rank statistic with half credit for ties; equals trapezoidal
// ROC integration. Requires both classes.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

// Step-wise average precision, descending score order, tie groups processed
// as one block (no interpolation). Requires at least one positive.
double auprc(const std::vector<double>& scores, const std::vector<int>& labels);

struct KldReport {
    std::vector<double> per_feature;
    double total = 0.0;
};

// Histogram KL divergence D(test || train) per feature on shared bin edges
// spanning the pooled min/max, with add-epsilon smoothing
// (epsilon = 1 / (10 * count) of bin mass) before normalizing.
KldReport kld_shift(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                    std::size_t bins = 50);

// Full report from per-timestep scores, thresholded predictions, and labels.
// AUROC is null unless both classes occur; AUPRC is null without positives.
EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& preds,
                    const std::vector<int>& labels, double tau, const ThresholdSpec& spec);

} // namespace tsadapt
