#include "tsadapt/trend.hpp"

#include <string>

#include "tsadapt/errors.hpp"

namespace tsadapt {

TrendEstimator::TrendEstimator(std::vector<double> initial_mu, double gamma)
    : mu_(std::move(initial_mu)), gamma_(gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw InvalidInput("TrendEstimator: gamma must be in [0,1], got " +
                           std::to_string(gamma));
    }
    if (mu_.empty()) {
        throw InvalidInput("TrendEstimator: empty trend vector");
    }
}

TrendEstimator TrendEstimator::from_training(const TimeSeriesDataset& train, double gamma) {
    const std::size_t n = train.timesteps();
    const std::size_t f = train.features();
    if (n == 0 || f == 0) {
        throw InvalidInput("TrendEstimator: empty training dataset");
    }
    std::vector<double> mu(f, 0.0);
    for (std::size_t j = 0; j < f; ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += train.values(i, j);
        mu[j] = sum / static_cast<double>(n);
    }
    return TrendEstimator(std::move(mu), gamma);
}

const std::vector<double>& TrendEstimator::update(const Window& window) {
    if (window.features() != mu_.size()) {
        throw InvalidInput("TrendEstimator::update: window has " +
                           std::to_string(window.features()) + " features, trend has " +
                           std::to_string(mu_.size()));
    }
    const std::size_t w = window.length();
    for (std::size_t j = 0; j < mu_.size(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < w; ++i) sum += window.data(i, j);
        const double window_mean = sum / static_cast<double>(w);
        mu_[j] = gamma_ * mu_[j] + (1.0 - gamma_) * window_mean;
    }
    return mu_;
}

Window detrend(const Window& window, const std::vector<double>& mu) {
    if (window.features() != mu.size()) {
        throw InvalidInput("detrend: window has " + std::to_string(window.features()) +
                           " features, trend has " + std::to_string(mu.size()));
    }
    Window out = window;
    for (std::size_t i = 0; i < window.length(); ++i) {
        for (std::size_t j = 0; j < mu.size(); ++j) {
            out.data(i, j) = window.data(i, j) - mu[j];
        }
    }
    return out;
}

Window retrend(const Window& recon, const std::vector<double>& mu) {
    if (recon.features() != mu.size()) {
        throw InvalidInput("retrend: window has " + std::to_string(recon.features()) +
                           " features, trend has " + std::to_string(mu.size()));
    }
    Window out = recon;
    for (std::size_t i = 0; i < recon.length(); ++i) {
        for (std::size_t j = 0; j < mu.size(); ++j) {
            out.data(i, j) = recon.data(i, j) + mu[j];
        }
    }
    return out;
}

} // namespace tsadapt
