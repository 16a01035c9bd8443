#include "tsadapt/threshold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tsadapt/errors.hpp"
#include "tsadapt/num_format.hpp"

namespace tsadapt {

ThresholdSpec ThresholdSpec::parse(const std::string& text) {
    ThresholdSpec spec;
    if (text == "oracle") {
        spec.kind = Kind::Oracle;
        spec.value = 0.0;
        return spec;
    }
    if (text.rfind("fixed:", 0) == 0) {
        spec.kind = Kind::Fixed;
        spec.value = parse_double(text.substr(6));
        return spec;
    }
    if (!text.empty() && (text[0] == 'q' || text[0] == 'Q')) {
        spec.kind = Kind::TrainPercentile;
        spec.value = parse_double(text.substr(1));
        if (!(spec.value > 0.0 && spec.value <= 100.0)) {
            throw InvalidInput("threshold percentile must be in (0,100], got " + text);
        }
        return spec;
    }
    throw InvalidInput("cannot parse threshold spec '" + text +
                       "' (expected qP, oracle, or fixed:X)");
}

std::string ThresholdSpec::str() const {
    switch (kind) {
    case Kind::Oracle:
        return "oracle";
    case Kind::Fixed:
        return "fixed:" + format_double(value);
    case Kind::TrainPercentile:
    default:
        return "q" + format_double(value);
    }
}

double percentile_threshold(std::vector<double> scores, double p) {
    if (scores.empty()) {
        throw InvalidInput("percentile_threshold: empty score vector");
    }
    if (!(p > 0.0 && p <= 100.0)) {
        throw InvalidInput("percentile_threshold: p must be in (0,100], got " +
                           format_double(p));
    }
    std::sort(scores.begin(), scores.end());
    const double n = static_cast<double>(scores.size());
    // Nearest rank; the tiny slack keeps p*n/100 that lands on an integer
    // from drifting up a rank through rounding.
    double rank = std::ceil(p * n / 100.0 - 1e-9);
    rank = std::clamp(rank, 1.0, n);
    return scores[static_cast<std::size_t>(rank) - 1];
}

std::pair<double, double> oracle_threshold(const std::vector<double>& scores,
                                           const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw InvalidInput("oracle_threshold: scores and labels lengths differ");
    }
    std::size_t positives = 0;
    for (int y : labels) positives += (y == 1);
    if (positives == 0 || positives == labels.size()) {
        throw InvalidInput("oracle_threshold: labels must contain both classes");
    }

    std::vector<std::size_t> order(scores.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    const double inf = std::numeric_limits<double>::infinity();
    auto f1_at = [&](std::size_t tp, std::size_t fp, std::size_t fn) {
        const double denom = static_cast<double>(2 * tp + fp + fn);
        return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
    };

    // Sweep candidates in increasing order so ties resolve to the smallest tau.
    // tau = -inf predicts everything anomalous.
    std::size_t tp = positives;
    std::size_t fp = scores.size() - positives;
    double best_tau = -inf;
    double best_f1 = f1_at(tp, fp, positives - tp);

    std::size_t i = 0;
    while (i < order.size()) {
        const double s = scores[order[i]];
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == s) {
            if (labels[order[j]] == 1) --tp; else --fp;
            ++j;
        }
        const double tau = j < order.size() ? (s + scores[order[j]]) / 2.0 : inf;
        const double f1 = f1_at(tp, fp, positives - tp);
        if (f1 > best_f1) {
            best_f1 = f1;
            best_tau = tau;
        }
        i = j;
    }
    return {best_tau, best_f1};
}

} // namespace tsadapt
