#pragma once

// Shared test utilities: random instance generators plus the independent
// oracles the expected values are frozen against. Everything here stays off
// the implementation paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "tsadapt/dataset.hpp"
#include "tsadapt/model.hpp"

namespace testutil {

inline tsadapt::Window random_window(std::mt19937_64& rng, std::size_t w, std::size_t f,
                                     double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    tsadapt::Window win;
    win.data = tsadapt::Matrix(w, f);
    for (double& v : win.data.data) v = dist(rng);
    win.end_index = w - 1;
    return win;
}

inline std::vector<int> random_mask(std::mt19937_64& rng, std::size_t w, double p_masked) {
    std::bernoulli_distribution coin(p_masked);
    std::vector<int> mask(w, 0);
    for (int& v : mask) v = coin(rng) ? 1 : 0;
    return mask;
}

// Central finite differences of masked_loss with respect to every parameter,
// evaluated through fresh forward passes on perturbed copies of the model.
inline tsadapt::Gradients finite_difference_gradients(const tsadapt::MlpAutoencoder& model,
                                                      const tsadapt::Window& x,
                                                      const std::vector<int>& mask,
                                                      double eps) {
    auto loss_of = [&](const tsadapt::MlpAutoencoder& m) {
        return tsadapt::masked_loss(x, m.forward(x), mask).loss;
    };
    tsadapt::Gradients fd;
    for (std::size_t l = 0; l < model.layers().size(); ++l) {
        tsadapt::Layer g;
        g.weight = tsadapt::Matrix(model.layers()[l].weight.rows, model.layers()[l].weight.cols);
        g.bias.assign(model.layers()[l].bias.size(), 0.0);
        for (std::size_t k = 0; k < g.weight.data.size(); ++k) {
            tsadapt::MlpAutoencoder plus = model;
            tsadapt::MlpAutoencoder minus = model;
            plus.layers()[l].weight.data[k] += eps;
            minus.layers()[l].weight.data[k] -= eps;
            g.weight.data[k] = (loss_of(plus) - loss_of(minus)) / (2.0 * eps);
        }
        for (std::size_t k = 0; k < g.bias.size(); ++k) {
            tsadapt::MlpAutoencoder plus = model;
            tsadapt::MlpAutoencoder minus = model;
            plus.layers()[l].bias[k] += eps;
            minus.layers()[l].bias[k] -= eps;
            g.bias[k] = (loss_of(plus) - loss_of(minus)) / (2.0 * eps);
        }
        fd.push_back(std::move(g));
    }
    return fd;
}

// Smallest |pre-activation| in the hidden layers. Central differences are
// only a valid derivative estimate when no ReLU kink sits inside the
// perturbation window, so gradient checks demand a margin here.
inline double min_abs_pre_activation(const tsadapt::MlpAutoencoder& m,
                                     const tsadapt::Window& x) {
    std::vector<double> a = x.data.data;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < m.layers().size(); ++l) {
        const tsadapt::Layer& layer = m.layers()[l];
        std::vector<double> z(layer.bias);
        for (std::size_t o = 0; o < layer.weight.rows; ++o) {
            for (std::size_t i = 0; i < layer.weight.cols; ++i) {
                z[o] += layer.weight.data[o * layer.weight.cols + i] * a[i];
            }
        }
        if (l + 1 < m.layers().size()) {
            for (double v : z) best = std::min(best, std::abs(v));
        }
        a = std::move(z);
        if (l + 1 < m.layers().size()) {
            for (double& v : a) v = v > 0.0 ? v : 0.0;
        }
    }
    return best;
}

inline bool gradients_close(const tsadapt::Gradients& a, const tsadapt::Gradients& b,
                            double rel_tol, double abs_floor, double* worst = nullptr) {
    bool ok = true;
    for (std::size_t l = 0; l < a.size(); ++l) {
        auto check = [&](const std::vector<double>& x, const std::vector<double>& y) {
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double diff = std::abs(x[k] - y[k]);
                const double tol = std::max(abs_floor, rel_tol * std::max(std::abs(x[k]),
                                                                          std::abs(y[k])));
                if (worst) *worst = std::max(*worst, tol > 0 ? diff / tol : 0.0);
                if (diff > tol) ok = false;
            }
        };
        check(a[l].weight.data, b[l].weight.data);
        check(a[l].bias, b[l].bias);
    }
    return ok;
}

// Quadratic-time point adjustment: for every timestep inside a labeled
// segment, expand to the segment bounds and look for any firing prediction.
inline std::vector<int> brute_force_point_adjust(const std::vector<int>& preds,
                                                 const std::vector<int>& labels) {
    std::vector<int> adjusted = preds;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 1) continue;
        std::size_t lo = i;
        while (lo > 0 && labels[lo - 1] == 1) --lo;
        std::size_t hi = i;
        while (hi + 1 < labels.size() && labels[hi + 1] == 1) ++hi;
        bool hit = false;
        for (std::size_t k = lo; k <= hi; ++k) hit = hit || preds[k] == 1;
        if (hit) adjusted[i] = 1;
    }
    return adjusted;
}

// Exact pairwise AUROC: integer wins/ties over all pos x neg pairs.
inline double pairwise_auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::uint64_t wins2 = 0; // 2*wins + ties
    std::uint64_t pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t k = 0; k < scores.size(); ++k) {
            if (labels[k] != 0) continue;
            ++pairs;
            if (scores[i] > scores[k]) wins2 += 2;
            else if (scores[i] == scores[k]) wins2 += 1;
        }
    }
    return static_cast<double>(wins2) / (2.0 * static_cast<double>(pairs));
}

inline double f1_of_preds(const std::vector<int>& preds, const std::vector<int>& labels) {
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if (preds[i] == 1 && labels[i] == 1) ++tp;
        else if (preds[i] == 1) ++fp;
        else if (labels[i] == 1) ++fn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

// Exhaustive threshold sweep: F1 at every inter-score gap plus both ends.
inline double sweep_best_f1(const std::vector<double>& scores, const std::vector<int>& labels) {
    std::vector<double> sorted = scores;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        candidates.push_back((sorted[i] + sorted[i + 1]) / 2.0);
    }
    candidates.push_back(std::numeric_limits<double>::infinity());

    double best = 0.0;
    for (double tau : candidates) {
        std::vector<int> preds(scores.size(), 0);
        for (std::size_t i = 0; i < scores.size(); ++i) preds[i] = scores[i] > tau ? 1 : 0;
        best = std::max(best, f1_of_preds(preds, labels));
    }
    return best;
}

inline tsadapt::TimeSeriesDataset dataset_from(const std::vector<std::vector<double>>& rows) {
    tsadapt::TimeSeriesDataset ds;
    ds.values = tsadapt::Matrix(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) ds.values(i, j) = rows[i][j];
    }
    for (std::size_t j = 0; j < ds.values.cols; ++j) {
        ds.feature_names.push_back("f" + std::to_string(j + 1));
    }
    return ds;
}

inline tsadapt::Window window_from(const std::vector<std::vector<double>>& rows) {
    tsadapt::Window win;
    win.data = testutil::dataset_from(rows).values;
    win.end_index = rows.size() - 1;
    return win;
}

} // namespace testutil
