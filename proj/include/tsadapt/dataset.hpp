#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tsadapt/matrix.hpp"

namespace tsadapt {

// A multivariate series of N timesteps by F features, optionally labeled
// per timestep (1 = anomaly).
struct TimeSeriesDataset {
    Matrix values; // N x F
    std::optional<std::vector<int>> labels;
    std::vector<std::string> feature_names;

    std::size_t timesteps() const { return values.rows; }
    std::size_t features() const { return values.cols; }

    bool operator==(const TimeSeriesDataset&) const = default;
};

// Per-feature standardization statistics, fitted on training data only.
struct Scaler {
    static constexpr double kStdFloor = 1e-8;

    std::vector<double> mean;
    std::vector<double> std_dev; // floored at kStdFloor, never zero

    bool operator==(const Scaler&) const = default;
};

// Contiguous slice of w timesteps ending at end_index of the source series.
struct Window {
    Matrix data; // w x F
    std::size_t end_index = 0;

    std::size_t length() const { return data.rows; }
    std::size_t features() const { return data.cols; }

    bool operator==(const Window&) const = default;
};

// Parameters for the sinusoid-with-level-shift generator. The test segment
// repeats the training dynamics, adds shift_magnitude to every timestep at or
// after shift_at, and injects anomaly_count point spikes away from the shift.
struct SyntheticSpec {
    std::size_t length_train = 2000;
    std::size_t length_test = 2000;
    std::size_t period = 50;
    double amplitude = 1.0;
    std::size_t shift_at = 1000; // test-local timestep of the level shift
    double shift_magnitude = 5.0;
    std::size_t anomaly_count = 10;
    double anomaly_magnitude = 3.0;
    double noise_std = 0.05;
    std::uint64_t seed = 0;

    bool operator==(const SyntheticSpec&) const = default;
};

// CSV contract: UTF-8, comma-delimited, mandatory header row, '.' decimal
// point, label cells literally "0"/"1".
TimeSeriesDataset load_csv(const std::string& path,
                           const std::optional<std::string>& label_column = std::nullopt);

// Writes the same format load_csv reads; labels become a trailing "label"
// column when present. Doubles are written round-trip exact.
void write_csv(const TimeSeriesDataset& ds, const std::string& path);

// Population (divide-by-N) moments per feature; std floored at kStdFloor.
Scaler fit_scaler(const TimeSeriesDataset& train);

TimeSeriesDataset apply_scaler(const TimeSeriesDataset& ds, const Scaler& s);
TimeSeriesDataset invert_scaler(const TimeSeriesDataset& ds, const Scaler& s);

// Windows end at t = w-1, w-1+stride, ...; a trailing remainder shorter
// than w is dropped.
std::vector<Window> make_windows(const TimeSeriesDataset& ds, std::size_t w,
                                 std::size_t stride);

// Deterministic given spec.seed; returns (train, test), labels only on test.
std::pair<TimeSeriesDataset, TimeSeriesDataset> generate_synthetic(const SyntheticSpec& spec);

} // namespace tsadapt
