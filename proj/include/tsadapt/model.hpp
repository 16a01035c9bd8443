#pragma once

#include <cstdint>
#include <vector>

#include "tsadapt/dataset.hpp"
#include "tsadapt/matrix.hpp"

namespace tsadapt {

struct ModelDims {
    std::size_t window = 5;
    std::size_t features = 1;
    std::size_t hidden = 4;
    std::size_t latent = 2;

    std::size_t input_size() const { return window * features; }

    bool operator==(const ModelDims&) const = default;
};

struct Layer {
    Matrix weight; // out x in
    std::vector<double> bias;

    bool operator==(const Layer&) const = default;
};

// One anomaly score per window row (feature-averaged squared residual).
using ScoreVector = std::vector<double>;

// Symmetric four-layer autoencoder over flattened windows:
//   in -> hidden -> latent -> hidden -> in
// ReLU after every layer except the last; linear output.
class MlpAutoencoder {
public:
    MlpAutoencoder(ModelDims dims, std::uint64_t seed, std::vector<Layer> layers);

    // Glorot-uniform weights, zero biases, deterministic per seed.
    static MlpAutoencoder init(const ModelDims& dims, std::uint64_t seed);

    // Flattens row-major, runs the net, reshapes back to w x F.
    Window forward(const Window& x) const;

    std::vector<double> forward_flat(const std::vector<double>& x) const;

    const ModelDims& dims() const { return dims_; }
    std::uint64_t seed() const { return seed_; }
    const std::vector<Layer>& layers() const { return layers_; }
    std::vector<Layer>& layers() { return layers_; }
    std::size_t parameter_count() const;

    bool operator==(const MlpAutoencoder&) const = default;

private:
    ModelDims dims_;
    std::uint64_t seed_ = 0;
    std::vector<Layer> layers_;
};

// score[i] = mean over features of (recon[i,j] - x[i,j])^2.
ScoreVector score(const Window& x, const Window& recon);

struct MaskedLoss {
    double loss = 0.0;
    // Per-row contribution to the total; zero for masked rows.
    std::vector<double> per_row;
};

// Squared reconstruction error over rows with mask == 0 (mask 1 = predicted
// anomaly, excluded), normalized by active_rows * F. All-masked windows have
// zero loss and zero gradient.
MaskedLoss masked_loss(const Window& x, const Window& recon, const std::vector<int>& mask);

using Gradients = std::vector<Layer>; // same shapes as the model layers

// Exact reverse-mode gradient of masked_loss; ReLU subgradient at 0 is 0.
Gradients gradients(const MlpAutoencoder& m, const Window& x, const std::vector<int>& mask);

// Plain SGD: theta <- theta - eta * grad. No momentum, no weight decay.
// Throws NumericFailure on non-finite gradients. eta = 0 is a bitwise no-op.
void sgd_step(MlpAutoencoder& m, const Gradients& grads, double eta);

struct TrainResult {
    // Per-row scores of every training window under the final parameters,
    // concatenated in window order; feeds percentile thresholding.
    std::vector<double> train_scores;
    // Mean batch loss per epoch (empty when epochs = 0).
    std::vector<double> epoch_losses;
};

// Offline training: Adam (beta1=0.9, beta2=0.999, eps=1e-8) on the unmasked
// mean squared reconstruction error, shuffled batches, deterministic per seed.
TrainResult train_offline(MlpAutoencoder& m, const std::vector<Window>& windows,
                          std::size_t epochs, std::size_t batch_size, double lr,
                          std::uint64_t seed);

} // namespace tsadapt
