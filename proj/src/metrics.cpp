#include "tsadapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tsadapt/errors.hpp"

namespace tsadapt {

namespace {

void check_binary(const std::vector<int>& v, const char* who) {
    for (int x : v) {
        if (x != 0 && x != 1) {
            throw InvalidInput(std::string(who) + ": entries must be 0 or 1");
        }
    }
}

void check_same_length(std::size_t a, std::size_t b, const char* who) {
    if (a != b) {
        throw InvalidInput(std::string(who) + ": length mismatch (" + std::to_string(a) +
                           " vs " + std::to_string(b) + ")");
    }
}

std::size_t count_positives(const std::vector<int>& labels) {
    std::size_t p = 0;
    for (int y : labels) p += (y == 1);
    return p;
}

} // namespace

ConfusionCounts confusion(const std::vector<int>& preds, const std::vector<int>& labels) {
    check_same_length(preds.size(), labels.size(), "confusion");
    check_binary(preds, "confusion");
    check_binary(labels, "confusion");
    ConfusionCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (labels[i] == 1) {
            preds[i] == 1 ? ++c.tp : ++c.fn;
        } else {
            preds[i] == 1 ? ++c.fp : ++c.tn;
        }
    }
    return c;
}

PrfStats prf1(const ConfusionCounts& c) {
    PrfStats s;
    const double tp = static_cast<double>(c.tp);
    if (c.tp + c.fp > 0) s.precision = tp / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0) s.recall = tp / static_cast<double>(c.tp + c.fn);
    if (s.precision + s.recall > 0.0) {
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    }
    if (c.total() > 0) {
        s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    }
    return s;
}

std::vector<int> point_adjust(const std::vector<int>& preds, const std::vector<int>& labels) {
    check_same_length(preds.size(), labels.size(), "point_adjust");
    check_binary(preds, "point_adjust");
    check_binary(labels, "point_adjust");
    std::vector<int> adjusted = preds;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i] == 0) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < labels.size() && labels[end] == 1) ++end;
        bool hit = false;
        for (std::size_t k = i; k < end && !hit; ++k) hit = preds[k] == 1;
        if (hit) {
            for (std::size_t k = i; k < end; ++k) adjusted[k] = 1;
        }
        i = end;
    }
    return adjusted;
}

double auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_same_length(scores.size(), labels.size(), "auroc");
    check_binary(labels, "auroc");
    const std::size_t n = scores.size();
    const std::size_t pos = count_positives(labels);
    if (pos == 0 || pos == n) {
        throw InvalidInput("auroc: labels must contain both classes");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Mann-Whitney U from average ranks; tie groups share their mean rank,
    // which is exactly the half-credit convention.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = static_cast<double>(i + 1 + j) / 2.0; // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    const double p = static_cast<double>(pos);
    const double u = rank_sum_pos - p * (p + 1.0) / 2.0;
    return u / (p * static_cast<double>(n - pos));
}

double auprc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_same_length(scores.size(), labels.size(), "auprc");
    check_binary(labels, "auprc");
    const std::size_t n = scores.size();
    const std::size_t pos = count_positives(labels);
    if (pos == 0) {
        throw InvalidInput("auprc: labels must contain at least one positive");
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            labels[order[j]] == 1 ? ++tp : ++fp;
            ++j;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

KldReport kld_shift(const TimeSeriesDataset& train, const TimeSeriesDataset& test,
                    std::size_t bins) {
    if (bins < 2) {
        throw InvalidInput("kld_shift: need at least 2 bins");
    }
    if (train.features() != test.features()) {
        throw InvalidInput("kld_shift: feature count mismatch (" +
                           std::to_string(train.features()) + " vs " +
                           std::to_string(test.features()) + ")");
    }
    if (train.timesteps() == 0 || test.timesteps() == 0) {
        throw InvalidInput("kld_shift: empty dataset");
    }

    const std::size_t f = train.features();
    KldReport report;
    report.per_feature.assign(f, 0.0);

    for (std::size_t j = 0; j < f; ++j) {
        double lo = train.values(0, j), hi = lo;
        for (std::size_t i = 0; i < train.timesteps(); ++i) {
            lo = std::min(lo, train.values(i, j));
            hi = std::max(hi, train.values(i, j));
        }
        for (std::size_t i = 0; i < test.timesteps(); ++i) {
            lo = std::min(lo, test.values(i, j));
            hi = std::max(hi, test.values(i, j));
        }
        if (hi == lo) continue; // everything in one bin on both sides, divergence 0

        auto histogram = [&](const TimeSeriesDataset& ds) {
            std::vector<double> counts(bins, 0.0);
            for (std::size_t i = 0; i < ds.timesteps(); ++i) {
                const double x = ds.values(i, j);
                auto b = static_cast<std::size_t>((x - lo) / (hi - lo) *
                                                  static_cast<double>(bins));
                counts[std::min(b, bins - 1)] += 1.0;
            }
            const double n = static_cast<double>(ds.timesteps());
            const double eps = 1.0 / (10.0 * n);
            const double norm = 1.0 + static_cast<double>(bins) * eps;
            for (double& c : counts) c = (c / n + eps) / norm;
            return counts;
        };

        const std::vector<double> p = histogram(test);
        const std::vector<double> q = histogram(train);
        double kld = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            kld += p[b] * std::log(p[b] / q[b]);
        }
        report.per_feature[j] = kld;
    }

    for (double v : report.per_feature) report.total += v;
    return report;
}

EvalReport evaluate(const std::vector<double>& scores, const std::vector<int>& preds,
                    const std::vector<int>& labels, double tau, const ThresholdSpec& spec) {
    check_same_length(scores.size(), preds.size(), "evaluate");
    check_same_length(preds.size(), labels.size(), "evaluate");

    EvalReport report;
    report.tau = tau;
    report.threshold_spec = spec;
    report.counts = confusion(preds, labels);
    const PrfStats base = prf1(report.counts);
    report.accuracy = base.accuracy;
    report.precision = base.precision;
    report.recall = base.recall;
    report.f1 = base.f1;

    report.counts_pa = confusion(point_adjust(preds, labels), labels);
    const PrfStats adjusted = prf1(report.counts_pa);
    report.accuracy_pa = adjusted.accuracy;
    report.precision_pa = adjusted.precision;
    report.recall_pa = adjusted.recall;
    report.f1_pa = adjusted.f1;

    const std::size_t pos = count_positives(labels);
    if (pos > 0 && pos < labels.size()) {
        report.auroc = auroc(scores, labels);
    }
    if (pos > 0) {
        report.auprc = auprc(scores, labels);
    }
    return report;
}

} // namespace tsadapt
