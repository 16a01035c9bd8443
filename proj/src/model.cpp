#include "tsadapt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "tsadapt/errors.hpp"

namespace tsadapt {

namespace {

// Layer widths of the symmetric autoencoder: in -> h -> d -> h -> in.
std::vector<std::pair<std::size_t, std::size_t>> layer_shapes(const ModelDims& dims) {
    const std::size_t in = dims.input_size();
    return {{dims.hidden, in}, {dims.latent, dims.hidden},
            {dims.hidden, dims.latent}, {in, dims.hidden}};
}

std::vector<double> flatten(const Window& x) {
    return x.data.data; // already row-major
}

void check_window_shape(const MlpAutoencoder& m, const Window& x, const char* who) {
    if (x.length() != m.dims().window || x.features() != m.dims().features) {
        throw InvalidInput(std::string(who) + ": window is " + std::to_string(x.length()) + "x" +
                           std::to_string(x.features()) + ", model expects " +
                           std::to_string(m.dims().window) + "x" +
                           std::to_string(m.dims().features));
    }
}

// Forward pass keeping pre-activations and activations for backprop.
struct ForwardTrace {
    std::vector<std::vector<double>> activations; // a0 = input, a1..a4
    std::vector<std::vector<double>> pre;         // z1..z4
};

ForwardTrace traced_forward(const std::vector<Layer>& layers, const std::vector<double>& input) {
    ForwardTrace trace;
    trace.activations.reserve(layers.size() + 1);
    trace.pre.reserve(layers.size());
    trace.activations.push_back(input);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const Layer& layer = layers[l];
        const std::vector<double>& a = trace.activations.back();
        std::vector<double> z(layer.bias);
        for (std::size_t o = 0; o < layer.weight.rows; ++o) {
            double acc = z[o];
            const double* wrow = &layer.weight.data[o * layer.weight.cols];
            for (std::size_t i = 0; i < layer.weight.cols; ++i) acc += wrow[i] * a[i];
            z[o] = acc;
        }
        std::vector<double> act = z;
        if (l + 1 < layers.size()) {
            for (double& v : act) v = v > 0.0 ? v : 0.0; // ReLU, linear output layer
        }
        trace.pre.push_back(std::move(z));
        trace.activations.push_back(std::move(act));
    }
    return trace;
}

Gradients zero_gradients(const std::vector<Layer>& layers) {
    Gradients grads;
    grads.reserve(layers.size());
    for (const Layer& layer : layers) {
        Layer g;
        g.weight = Matrix(layer.weight.rows, layer.weight.cols);
        g.bias.assign(layer.bias.size(), 0.0);
        grads.push_back(std::move(g));
    }
    return grads;
}

void validate_mask(const std::vector<int>& mask, std::size_t w, const char* who) {
    if (mask.size() != w) {
        throw InvalidInput(std::string(who) + ": mask length " + std::to_string(mask.size()) +
                           " does not match window length " + std::to_string(w));
    }
    for (int v : mask) {
        if (v != 0 && v != 1) {
            throw InvalidInput(std::string(who) + ": mask entries must be 0 or 1");
        }
    }
}

// Loss plus parameter gradients in one backward pass.
std::pair<MaskedLoss, Gradients> backward(const MlpAutoencoder& m, const Window& x,
                                          const std::vector<int>& mask) {
    check_window_shape(m, x, "gradients");
    validate_mask(mask, x.length(), "gradients");

    const std::size_t w = x.length();
    const std::size_t f = x.features();
    std::size_t active = 0;
    for (int v : mask) active += (v == 0);

    const std::vector<double> input = flatten(x);
    const ForwardTrace trace = traced_forward(m.layers(), input);
    const std::vector<double>& output = trace.activations.back();

    MaskedLoss ml;
    ml.per_row.assign(w, 0.0);
    Gradients grads = zero_gradients(m.layers());
    if (active == 0) {
        return {std::move(ml), std::move(grads)}; // all rows excluded: zero loss, zero step
    }

    const double denom = static_cast<double>(active) * static_cast<double>(f);
    std::vector<double> delta(output.size(), 0.0); // dL/dz of the output layer
    for (std::size_t i = 0; i < w; ++i) {
        if (mask[i] == 1) continue;
        double row_sq = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
            const double r = output[i * f + j] - input[i * f + j];
            row_sq += r * r;
            delta[i * f + j] = 2.0 * r / denom;
        }
        ml.per_row[i] = row_sq / denom;
        ml.loss += ml.per_row[i];
    }

    const std::vector<Layer>& layers = m.layers();
    for (std::size_t l = layers.size(); l-- > 0;) {
        const Layer& layer = layers[l];
        const std::vector<double>& a_in = trace.activations[l];
        Layer& g = grads[l];
        for (std::size_t o = 0; o < layer.weight.rows; ++o) {
            const double d = delta[o];
            g.bias[o] = d;
            double* grow = &g.weight.data[o * layer.weight.cols];
            for (std::size_t i = 0; i < layer.weight.cols; ++i) grow[i] = d * a_in[i];
        }
        if (l == 0) break;
        std::vector<double> prev(layer.weight.cols, 0.0);
        for (std::size_t o = 0; o < layer.weight.rows; ++o) {
            const double d = delta[o];
            const double* wrow = &layer.weight.data[o * layer.weight.cols];
            for (std::size_t i = 0; i < layer.weight.cols; ++i) prev[i] += wrow[i] * d;
        }
        // ReLU subgradient: 0 at 0.
        const std::vector<double>& z_prev = trace.pre[l - 1];
        for (std::size_t i = 0; i < prev.size(); ++i) {
            if (!(z_prev[i] > 0.0)) prev[i] = 0.0;
        }
        delta = std::move(prev);
    }
    return {std::move(ml), std::move(grads)};
}

} // namespace

MlpAutoencoder::MlpAutoencoder(ModelDims dims, std::uint64_t seed, std::vector<Layer> layers)
    : dims_(dims), seed_(seed), layers_(std::move(layers)) {
    const auto shapes = layer_shapes(dims_);
    if (layers_.size() != shapes.size()) {
        throw InvalidInput("MlpAutoencoder: expected " + std::to_string(shapes.size()) +
                           " layers, got " + std::to_string(layers_.size()));
    }
    for (std::size_t l = 0; l < shapes.size(); ++l) {
        if (layers_[l].weight.rows != shapes[l].first ||
            layers_[l].weight.cols != shapes[l].second ||
            layers_[l].bias.size() != shapes[l].first) {
            throw InvalidInput("MlpAutoencoder: layer " + std::to_string(l) +
                               " shape does not match dims");
        }
    }
}

MlpAutoencoder MlpAutoencoder::init(const ModelDims& dims, std::uint64_t seed) {
    if (dims.window == 0 || dims.features == 0 || dims.hidden == 0 || dims.latent == 0) {
        throw InvalidInput("MlpAutoencoder::init: all dimensions must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::vector<Layer> layers;
    for (const auto& [out, in] : layer_shapes(dims)) {
        const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> glorot(-limit, limit);
        Layer layer;
        layer.weight = Matrix(out, in);
        for (double& v : layer.weight.data) v = glorot(rng);
        layer.bias.assign(out, 0.0);
        layers.push_back(std::move(layer));
    }
    return MlpAutoencoder(dims, seed, std::move(layers));
}

std::vector<double> MlpAutoencoder::forward_flat(const std::vector<double>& x) const {
    if (x.size() != dims_.input_size()) {
        throw InvalidInput("forward: input length " + std::to_string(x.size()) +
                           " does not match w*F = " + std::to_string(dims_.input_size()));
    }
    return traced_forward(layers_, x).activations.back();
}

Window MlpAutoencoder::forward(const Window& x) const {
    check_window_shape(*this, x, "forward");
    Window recon = x;
    recon.data.data = forward_flat(flatten(x));
    return recon;
}

std::size_t MlpAutoencoder::parameter_count() const {
    std::size_t count = 0;
    for (const Layer& layer : layers_) {
        count += layer.weight.data.size() + layer.bias.size();
    }
    return count;
}

ScoreVector score(const Window& x, const Window& recon) {
    if (!x.data.same_shape(recon.data)) {
        throw InvalidInput("score: window and reconstruction shapes differ");
    }
    const std::size_t w = x.length();
    const std::size_t f = x.features();
    ScoreVector scores(w, 0.0);
    for (std::size_t i = 0; i < w; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
            const double r = recon.data(i, j) - x.data(i, j);
            acc += r * r;
        }
        scores[i] = acc / static_cast<double>(f);
    }
    return scores;
}

MaskedLoss masked_loss(const Window& x, const Window& recon, const std::vector<int>& mask) {
    if (!x.data.same_shape(recon.data)) {
        throw InvalidInput("masked_loss: window and reconstruction shapes differ");
    }
    validate_mask(mask, x.length(), "masked_loss");

    const std::size_t w = x.length();
    const std::size_t f = x.features();
    std::size_t active = 0;
    for (int v : mask) active += (v == 0);

    MaskedLoss ml;
    ml.per_row.assign(w, 0.0);
    if (active == 0) return ml;

    const double denom = static_cast<double>(active) * static_cast<double>(f);
    for (std::size_t i = 0; i < w; ++i) {
        if (mask[i] == 1) continue;
        double row_sq = 0.0;
        for (std::size_t j = 0; j < f; ++j) {
            const double r = recon.data(i, j) - x.data(i, j);
            row_sq += r * r;
        }
        ml.per_row[i] = row_sq / denom;
        ml.loss += ml.per_row[i];
    }
    return ml;
}

Gradients gradients(const MlpAutoencoder& m, const Window& x, const std::vector<int>& mask) {
    return backward(m, x, mask).second;
}

void sgd_step(MlpAutoencoder& m, const Gradients& grads, double eta) {
    if (eta < 0.0) {
        throw InvalidInput("sgd_step: eta must be >= 0");
    }
    if (grads.size() != m.layers().size()) {
        throw InvalidInput("sgd_step: gradient layer count mismatch");
    }
    for (std::size_t l = 0; l < grads.size(); ++l) {
        if (!grads[l].weight.same_shape(m.layers()[l].weight) ||
            grads[l].bias.size() != m.layers()[l].bias.size()) {
            throw InvalidInput("sgd_step: gradient shape mismatch at layer " + std::to_string(l));
        }
        for (double v : grads[l].weight.data) {
            if (!std::isfinite(v)) throw NumericFailure("sgd_step: non-finite weight gradient");
        }
        for (double v : grads[l].bias) {
            if (!std::isfinite(v)) throw NumericFailure("sgd_step: non-finite bias gradient");
        }
    }
    if (eta == 0.0) return; // identity step, bitwise

    for (std::size_t l = 0; l < grads.size(); ++l) {
        Layer& layer = m.layers()[l];
        const Layer& g = grads[l];
        for (std::size_t k = 0; k < layer.weight.data.size(); ++k) {
            layer.weight.data[k] -= eta * g.weight.data[k];
        }
        for (std::size_t k = 0; k < layer.bias.size(); ++k) {
            layer.bias[k] -= eta * g.bias[k];
        }
    }
}

TrainResult train_offline(MlpAutoencoder& m, const std::vector<Window>& windows,
                          std::size_t epochs, std::size_t batch_size, double lr,
                          std::uint64_t seed) {
    if (windows.empty()) {
        throw InvalidInput("train_offline: need at least one window");
    }
    if (batch_size == 0) {
        throw InvalidInput("train_offline: batch size must be >= 1");
    }
    for (const Window& win : windows) check_window_shape(m, win, "train_offline");

    const std::vector<int> no_mask(m.dims().window, 0);
    TrainResult result;

    // Adam state, one slot per parameter, laid out like the layers.
    Gradients adam_m = zero_gradients(m.layers());
    Gradients adam_v = zero_gradients(m.layers());
    constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    std::uint64_t step = 0;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(windows.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
            const std::size_t end = std::min(begin + batch_size, order.size());
            const double inv_b = 1.0 / static_cast<double>(end - begin);

            Gradients batch_grad = zero_gradients(m.layers());
            double batch_loss = 0.0;
            for (std::size_t k = begin; k < end; ++k) {
                auto [ml, g] = backward(m, windows[order[k]], no_mask);
                batch_loss += ml.loss;
                for (std::size_t l = 0; l < g.size(); ++l) {
                    for (std::size_t p = 0; p < g[l].weight.data.size(); ++p) {
                        batch_grad[l].weight.data[p] += g[l].weight.data[p];
                    }
                    for (std::size_t p = 0; p < g[l].bias.size(); ++p) {
                        batch_grad[l].bias[p] += g[l].bias[p];
                    }
                }
            }
            batch_loss *= inv_b;
            if (!std::isfinite(batch_loss)) {
                throw NumericFailure("train_offline: non-finite loss at epoch " +
                                     std::to_string(epoch) + ", batch " +
                                     std::to_string(batches));
            }
            epoch_loss += batch_loss;
            ++batches;

            ++step;
            const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
            const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
            for (std::size_t l = 0; l < batch_grad.size(); ++l) {
                auto update = [&](std::vector<double>& params, std::vector<double>& mbuf,
                                  std::vector<double>& vbuf, const std::vector<double>& gbuf) {
                    for (std::size_t p = 0; p < params.size(); ++p) {
                        const double g = gbuf[p] * inv_b;
                        mbuf[p] = beta1 * mbuf[p] + (1.0 - beta1) * g;
                        vbuf[p] = beta2 * vbuf[p] + (1.0 - beta2) * g * g;
                        const double m_hat = mbuf[p] / bc1;
                        const double v_hat = vbuf[p] / bc2;
                        params[p] -= lr * m_hat / (std::sqrt(v_hat) + adam_eps);
                    }
                };
                update(m.layers()[l].weight.data, adam_m[l].weight.data, adam_v[l].weight.data,
                       batch_grad[l].weight.data);
                update(m.layers()[l].bias, adam_m[l].bias, adam_v[l].bias, batch_grad[l].bias);
            }
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(batches));
    }

    result.train_scores.reserve(windows.size() * m.dims().window);
    for (const Window& win : windows) {
        const ScoreVector s = score(win, m.forward(win));
        result.train_scores.insert(result.train_scores.end(), s.begin(), s.end());
    }
    return result;
}

} // namespace tsadapt
