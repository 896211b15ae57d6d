#include "lunet/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "lunet/errors.hpp"
#include "lunet/rng.hpp"

namespace lunet {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
    if (!(lr0 > 0.0)) throw ConfigError("train.lr0 must be > 0");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw ConfigError("train.lr_decay must be in (0, 1]");
    if (decay_every < 1) throw ConfigError("train.decay_every must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must be in [0, 1)");
    if (!(clip_threshold > 0.0)) throw ConfigError("train.clip_threshold must be > 0");
    if (!(gamma > 0.0)) throw ConfigError("train.gamma must be > 0");
    if (threads < 1) throw ConfigError("train.threads must be >= 1");
}

void clip_gradients(GradientSet& grads, ClipKind kind, double threshold) {
    switch (kind) {
        case ClipKind::euclidean: {
            const double norm = grads.l2_norm();
            if (norm > threshold) grads.scale(threshold / norm);
            break;
        }
        case ClipKind::max_abs: {
            const double norm = grads.max_abs();
            if (norm > threshold) grads.scale(threshold / norm);
            break;
        }
        case ClipKind::clamp: {
            for (auto& layer : grads.layers) {
                for (auto* block : {&layer.du, &layer.dl, &layer.db}) {
                    for (auto& g : *block) g = std::clamp(g, -threshold, threshold);
                }
            }
            break;
        }
    }
}

void sgd_momentum_step(LUNet& net, const GradientSet& grads, OptimizerState& state, double lr,
                       double momentum) {
    if (grads.layers.size() != static_cast<std::size_t>(net.depth())) {
        throw DimensionMismatch("sgd_momentum_step: gradient depth does not match net");
    }
    for (int m = 0; m < net.depth(); ++m) {
        LULayer& layer = net.layer(m);
        auto& vel = state.velocity.layers[m];
        const auto& g = grads.layers[m];

        auto u = layer.u.packed();
        for (std::size_t i = 0; i < u.size(); ++i) {
            vel.du[i] = momentum * vel.du[i] + g.du[i];
            u[i] -= lr * vel.du[i];
        }
        auto l = layer.l.packed();
        for (std::size_t i = 0; i < l.size(); ++i) {
            vel.dl[i] = momentum * vel.dl[i] + g.dl[i];
            l[i] -= lr * vel.dl[i];
        }
        for (std::size_t i = 0; i < layer.b.size(); ++i) {
            vel.db[i] = momentum * vel.db[i] + g.db[i];
            layer.b[i] -= lr * vel.db[i];
        }
    }
}

double lr_at(const TrainConfig& config, int epoch) {
    const int steps = epoch / config.decay_every;
    return config.lr0 * std::pow(config.lr_decay, steps);
}

TrainReport fit(LUNet& net, const std::vector<std::vector<double>>& train_data,
                const TrainConfig& config, const MetricSink& sink) {
    config.validate();
    if (train_data.empty()) throw ConfigError("fit: training set is empty");
    if (train_data.front().size() != static_cast<std::size_t>(net.dim())) {
        throw DimensionMismatch("fit: data dimension does not match net");
    }

    const std::size_t n = train_data.size();
    OptimizerState state(net);
    TrainReport report;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        const double lr = lr_at(config, epoch);

        // Fisher-Yates reshuffle with a per-epoch derived seed.
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(epoch)));
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::size_t j = rng.uniform_int(i + 1);
            std::swap(order[i], order[j]);
        }

        double nll_sum = 0.0;
        int batch_index = 0;
        std::vector<std::vector<double>> batch;
        for (std::size_t start = 0; start < n; start += config.batch_size, ++batch_index) {
            const std::size_t end = std::min(n, start + config.batch_size);
            batch.assign(end - start, {});
            for (std::size_t i = start; i < end; ++i) batch[i - start] = train_data[order[i]];

            BackwardResult result;
            try {
                result = backward(net, batch, config.gamma, config.threads);
            } catch (const NonFinite&) {
                throw Diverged(epoch, batch_index);
            } catch (const NearSingularDiagonal&) {
                throw Diverged(epoch, batch_index);
            }
            if (!std::isfinite(result.loss)) throw Diverged(epoch, batch_index);

            // The gamma-weighted loss minus the plain NLL is
            // (gamma-1) * batch_size * sum ln|u_dd|; undo it for reporting.
            double diag_sum = 0.0;
            for (int m = 0; m < net.depth(); ++m) {
                for (int d = 0; d < net.dim(); ++d) {
                    diag_sum += std::log(std::abs(net.layer(m).u.diag(d)));
                }
            }
            nll_sum += result.loss + (config.gamma - 1.0) * static_cast<double>(batch.size()) * diag_sum;

            clip_gradients(result.grads, config.clip_kind, config.clip_threshold);
            sgd_momentum_step(net, result.grads, state, lr, config.momentum);
        }

        const auto t1 = std::chrono::steady_clock::now();
        EpochMetrics metrics;
        metrics.epoch = epoch;
        metrics.lr = lr;
        metrics.train_nll = nll_sum / static_cast<double>(n);
        metrics.seconds = std::chrono::duration<double>(t1 - t0).count();
        report.epochs.push_back(metrics);
        if (sink) sink(metrics);
    }
    return report;
}

NllSummary evaluate_nll(const LUNet& net, const std::vector<std::vector<double>>& data,
                        NllUnit unit, std::span<const double> corrections) {
    if (data.empty()) throw ConfigError("evaluate_nll: dataset is empty");
    if (!corrections.empty() && corrections.size() != data.size()) {
        throw DimensionMismatch("evaluate_nll: corrections size does not match data");
    }

    NllSummary summary;
    summary.per_sample.reserve(data.size());
    const double bits_denom = net.dim() * std::log(2.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        double value = -log_density(net, data[i]);
        if (unit == NllUnit::bits_per_pixel) {
            if (!corrections.empty()) value += corrections[i];
            value /= bits_denom;
        }
        summary.per_sample.push_back(value);
    }

    const double n = static_cast<double>(summary.per_sample.size());
    double mean = 0.0;
    for (double v : summary.per_sample) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : summary.per_sample) var += (v - mean) * (v - mean);
    summary.mean = mean;
    summary.stddev = n > 1 ? std::sqrt(var / (n - 1)) : 0.0;
    return summary;
}

}  // namespace lunet
