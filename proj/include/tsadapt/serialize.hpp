#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsadapt/adaptation.hpp"
#include "tsadapt/dataset.hpp"
#include "tsadapt/model.hpp"

namespace tsadapt {

// Versioned little-endian binary container shared by model checkpoints and
// adaptation-state snapshots. Layout: 4-byte magic, 1-byte format version,
// 1-byte payload kind, then tagged sections. Round-trips are bit-exact.

// Everything cmd_detect needs to resume from training: the trained model,
// the scaler fitted on train data, the initial trend estimate (per-feature
// train mean in scaled space), and the pooled train scores for percentile
// thresholds.
struct Checkpoint {
    MlpAutoencoder model;
    Scaler scaler;
    std::vector<double> trend_init;
    std::vector<double> train_scores;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

std::vector<std::uint8_t> snapshot(const AdaptationState& state);
AdaptationState restore(const std::vector<std::uint8_t>& bytes);

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> read_bytes(const std::string& path);

} // namespace tsadapt
