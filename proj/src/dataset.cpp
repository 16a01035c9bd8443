#include "tsadapt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include "tsadapt/errors.hpp"
#include "tsadapt/num_format.hpp"

namespace tsadapt {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        std::size_t comma = line.find(',', start);
        std::string_view cell(line.data() + start,
                              (comma == std::string::npos ? line.size() : comma) - start);
        cells.emplace_back(trim(cell));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return cells;
}

} // namespace

TimeSeriesDataset load_csv(const std::string& path,
                           const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) {
        throw InvalidInput("load_csv: cannot open file: " + path);
    }

    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidInput("load_csv: " + path + ": empty file, header row required");
    }
    const std::vector<std::string> header = split_csv_line(line);

    std::size_t label_idx = header.size(); // sentinel: no label column
    if (label_column) {
        auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end()) {
            throw InvalidInput("load_csv: " + path + ": label column '" + *label_column +
                               "' not found in header");
        }
        label_idx = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<std::string> feature_names;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_idx) feature_names.push_back(header[j]);
    }
    if (feature_names.empty()) {
        throw InvalidInput("load_csv: " + path + ": no feature columns");
    }

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++rows;
        const std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw InvalidInput("load_csv: " + path + ": row " + std::to_string(rows) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j == label_idx) {
                if (cells[j] == "0") {
                    labels.push_back(0);
                } else if (cells[j] == "1") {
                    labels.push_back(1);
                } else {
                    throw InvalidInput("load_csv: " + path + ": row " + std::to_string(rows) +
                                       ", column '" + header[j] + "': label value '" + cells[j] +
                                       "' outside {0,1}");
                }
            } else {
                double v;
                try {
                    v = parse_double(cells[j]);
                } catch (const InvalidInput&) {
                    throw InvalidInput("load_csv: " + path + ": row " + std::to_string(rows) +
                                       ", column '" + header[j] + "': cannot parse '" + cells[j] +
                                       "' as a number");
                }
                if (!std::isfinite(v)) {
                    throw InvalidInput("load_csv: " + path + ": row " + std::to_string(rows) +
                                       ", column '" + header[j] + "': non-finite value");
                }
                values.push_back(v);
            }
        }
    }
    if (rows == 0) {
        throw InvalidInput("load_csv: " + path + ": no data rows");
    }

    TimeSeriesDataset ds;
    ds.values.rows = rows;
    ds.values.cols = feature_names.size();
    ds.values.data = std::move(values);
    ds.feature_names = std::move(feature_names);
    if (label_column) ds.labels = std::move(labels);
    return ds;
}

void write_csv(const TimeSeriesDataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw InvalidInput("write_csv: cannot open file for writing: " + path);
    }
    for (std::size_t j = 0; j < ds.feature_names.size(); ++j) {
        if (j > 0) out << ',';
        out << ds.feature_names[j];
    }
    if (ds.labels) out << ",label";
    out << '\n';
    for (std::size_t i = 0; i < ds.timesteps(); ++i) {
        for (std::size_t j = 0; j < ds.features(); ++j) {
            if (j > 0) out << ',';
            out << format_double(ds.values(i, j));
        }
        if (ds.labels) out << ',' << (*ds.labels)[i];
        out << '\n';
    }
    if (!out) {
        throw InvalidInput("write_csv: write failed: " + path);
    }
}

Scaler fit_scaler(const TimeSeriesDataset& train) {
    const std::size_t n = train.timesteps();
    const std::size_t f = train.features();
    if (n < 2) {
        throw InvalidInput("fit_scaler: need at least 2 timesteps, got " + std::to_string(n));
    }
    Scaler s;
    s.mean.assign(f, 0.0);
    s.std_dev.assign(f, 0.0);
    for (std::size_t j = 0; j < f; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += train.values(i, j);
        s.mean[j] = sum / static_cast<double>(n);
    }
    for (std::size_t j = 0; j < f; ++j) {
        double sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = train.values(i, j) - s.mean[j];
            sq += d * d;
        }
        // Population convention; flat channels get the floor instead of a crash.
        s.std_dev[j] = std::max(std::sqrt(sq / static_cast<double>(n)), Scaler::kStdFloor);
    }
    return s;
}

TimeSeriesDataset apply_scaler(const TimeSeriesDataset& ds, const Scaler& s) {
    if (ds.features() != s.mean.size() || s.mean.size() != s.std_dev.size()) {
        throw InvalidInput("apply_scaler: feature count mismatch: dataset has " +
                           std::to_string(ds.features()) + ", scaler has " +
                           std::to_string(s.mean.size()));
    }
    TimeSeriesDataset out = ds;
    for (std::size_t i = 0; i < ds.timesteps(); ++i) {
        for (std::size_t j = 0; j < ds.features(); ++j) {
            out.values(i, j) = (ds.values(i, j) - s.mean[j]) / s.std_dev[j];
        }
    }
    return out;
}

TimeSeriesDataset invert_scaler(const TimeSeriesDataset& ds, const Scaler& s) {
    if (ds.features() != s.mean.size() || s.mean.size() != s.std_dev.size()) {
        throw InvalidInput("invert_scaler: feature count mismatch: dataset has " +
                           std::to_string(ds.features()) + ", scaler has " +
                           std::to_string(s.mean.size()));
    }
    TimeSeriesDataset out = ds;
    for (std::size_t i = 0; i < ds.timesteps(); ++i) {
        for (std::size_t j = 0; j < ds.features(); ++j) {
            out.values(i, j) = ds.values(i, j) * s.std_dev[j] + s.mean[j];
        }
    }
    return out;
}

std::vector<Window> make_windows(const TimeSeriesDataset& ds, std::size_t w,
                                 std::size_t stride) {
    const std::size_t n = ds.timesteps();
    if (w == 0) throw InvalidInput("make_windows: window size must be >= 1");
    if (stride == 0) throw InvalidInput("make_windows: stride must be >= 1");
    if (w > n) {
        throw InvalidInput("make_windows: window size " + std::to_string(w) +
                           " exceeds series length " + std::to_string(n));
    }
    std::vector<Window> windows;
    windows.reserve((n - w) / stride + 1);
    for (std::size_t end = w - 1; end < n; end += stride) {
        Window win;
        win.end_index = end;
        win.data = Matrix(w, ds.features());
        const std::size_t start = end + 1 - w;
        std::copy(ds.values.data.begin() + static_cast<std::ptrdiff_t>(start * ds.features()),
                  ds.values.data.begin() + static_cast<std::ptrdiff_t>((end + 1) * ds.features()),
                  win.data.data.begin());
        windows.push_back(std::move(win));
    }
    return windows;
}

std::pair<TimeSeriesDataset, TimeSeriesDataset> generate_synthetic(const SyntheticSpec& spec) {
    if (spec.length_train < 2 || spec.length_test < 2) {
        throw InvalidInput("generate_synthetic: segment lengths must be >= 2");
    }
    if (spec.period == 0) {
        throw InvalidInput("generate_synthetic: period must be >= 1");
    }
    if (spec.shift_at == 0 || spec.shift_at >= spec.length_test) {
        throw InvalidInput("generate_synthetic: shift_at must lie strictly inside the test segment");
    }
    if (spec.anomaly_count * 10 >= spec.length_test) {
        throw InvalidInput("generate_synthetic: anomaly_count must be below length_test / 10");
    }
    if (spec.noise_std < 0.0) {
        throw InvalidInput("generate_synthetic: noise_std must be >= 0");
    }

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, spec.noise_std > 0.0 ? spec.noise_std : 1.0);
    const double two_pi = 2.0 * std::numbers::pi_v<double>;

    auto base_value = [&](std::size_t t) {
        return spec.amplitude *
               std::sin(two_pi * static_cast<double>(t) / static_cast<double>(spec.period));
    };

    TimeSeriesDataset train;
    train.feature_names = {"value"};
    train.values = Matrix(spec.length_train, 1);
    for (std::size_t t = 0; t < spec.length_train; ++t) {
        double v = base_value(t);
        if (spec.noise_std > 0.0) v += noise(rng);
        train.values(t, 0) = v;
    }

    TimeSeriesDataset test;
    test.feature_names = {"value"};
    test.values = Matrix(spec.length_test, 1);
    std::vector<int> labels(spec.length_test, 0);
    for (std::size_t t = 0; t < spec.length_test; ++t) {
        double v = base_value(t);
        if (spec.noise_std > 0.0) v += noise(rng);
        if (t >= spec.shift_at) v += spec.shift_magnitude;
        test.values(t, 0) = v;
    }

    // Spike positions: without replacement, keeping one period clear on each
    // side of the shift so spike labels never overlap the transition.
    std::vector<std::size_t> eligible;
    for (std::size_t t = 0; t < spec.length_test; ++t) {
        const std::size_t lo = spec.shift_at > spec.period ? spec.shift_at - spec.period : 0;
        const std::size_t hi = spec.shift_at + spec.period;
        if (t >= lo && t <= hi) continue;
        eligible.push_back(t);
    }
    if (spec.anomaly_count > eligible.size()) {
        throw InvalidInput("generate_synthetic: not enough eligible positions for " +
                           std::to_string(spec.anomaly_count) + " anomalies");
    }
    for (std::size_t k = 0; k < spec.anomaly_count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, eligible.size() - 1);
        std::swap(eligible[k], eligible[pick(rng)]);
        const std::size_t pos = eligible[k];
        test.values(pos, 0) += spec.anomaly_magnitude;
        labels[pos] = 1;
    }
    test.labels = std::move(labels);

    return {std::move(train), std::move(test)};
}

} // namespace tsadapt
