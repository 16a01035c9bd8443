#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tsadapt {

// How the decision threshold tau is chosen. Textual forms: "q99", "q99.9",
// "oracle", "fixed:3.25".
struct ThresholdSpec {
    enum class Kind { TrainPercentile, Oracle, Fixed };

    Kind kind = Kind::TrainPercentile;
    double value = 99.0; // percentile p for TrainPercentile, tau for Fixed

    static ThresholdSpec parse(const std::string& text);
    std::string str() const;

    bool operator==(const ThresholdSpec&) const = default;
};

// Nearest-rank percentile: sort ascending, take element ceil(p/100 * n) - 1.
// p in (0, 100].
double percentile_threshold(std::vector<double> scores, double p);

// Exhaustive F1-maximizing threshold over midpoints between consecutive
// distinct scores plus the +/-infinity endpoints. Ties resolve to the
// smallest tau. Returns (tau, best_f1). Requires both classes present.
std::pair<double, double> oracle_threshold(const std::vector<double>& scores,
                                           const std::vector<int>& labels);

} // namespace tsadapt
