#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsadapt/dataset.hpp"

namespace tsadapt {

// Everything a command needs. Precedence is CLI flag > config file > default;
// the CLI applies overrides on top of a file-loaded config.
struct RunConfig {
    std::string train_path;
    std::string test_path;
    std::string checkpoint_path;
    std::string out_dir = "out";

    // evaluate inputs
    std::string scores_path;
    std::string labels_path;
    std::string train_scores_path;

    std::size_t window = 5;
    std::size_t stride_train = 0; // 0 = window size (non-overlapping)
    std::size_t stride_test = 0;  // 0 = window size (non-overlapping)
    std::size_t hidden = 0;      // 0 = 2 * latent
    std::size_t latent = 2;
    double gamma = 0.9;
    double eta = 0.005;
    std::string threshold = "q99";
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
    bool use_detrend = true;
    bool use_tta = true;
    bool standardize = true;

    // When set, train/detect/ablate read the generator instead of CSVs.
    bool use_synthetic = false;
    SyntheticSpec synth;

    std::size_t effective_stride_train() const { return stride_train == 0 ? window : stride_train; }
    std::size_t effective_stride_test() const { return stride_test == 0 ? window : stride_test; }
    std::size_t effective_hidden() const { return hidden == 0 ? 2 * latent : hidden; }

    static RunConfig from_file(const std::string& path);
    void save(const std::string& path) const;

    bool operator==(const RunConfig&) const = default;
};

} // namespace tsadapt
