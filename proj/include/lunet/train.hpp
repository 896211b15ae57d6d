#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lunet/model.hpp"

namespace lunet {

enum class ClipKind {
    euclidean,  // rescale so the global L2 norm is at most the threshold
    max_abs,    // rescale so the largest |entry| is at most the threshold
    clamp,      // clamp each entry to [-threshold, threshold] independently
};

struct TrainConfig {
    int epochs = 1;
    int batch_size = 128;
    double lr0 = 1.0;
    double lr_decay = 1.0;  // multiplicative, in (0, 1]
    int decay_every = 1;    // epochs between decays
    double momentum = 0.0;  // heavy-ball coefficient in [0, 1)
    ClipKind clip_kind = ClipKind::max_abs;
    double clip_threshold = 1.0;
    double gamma = 1.0;  // weight on the diagonal log term of the loss
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;  // throws ConfigError on out-of-range values
};

// Momentum buffers, one per parameter block, zero initialized.
struct OptimizerState {
    GradientSet velocity;
    explicit OptimizerState(const LUNet& net) : velocity(GradientSet::zeros_like(net)) {}
};

// Global rescale (euclidean / max_abs) preserves the gradient direction;
// clamp is the per-component variant.
void clip_gradients(GradientSet& grads, ClipKind kind, double threshold);

// Classical heavy-ball step: v <- momentum*v + grads; params <- params - lr*v.
void sgd_momentum_step(LUNet& net, const GradientSet& grads, OptimizerState& state, double lr,
                       double momentum);

// lr0 * lr_decay^floor(epoch / decay_every).
double lr_at(const TrainConfig& config, int epoch);

struct EpochMetrics {
    int epoch = 0;
    double lr = 0.0;
    double train_nll = 0.0;  // mean nats/sample over the epoch's batches, gamma=1 reading
    double seconds = 0.0;
};

using MetricSink = std::function<void(const EpochMetrics&)>;

struct TrainReport {
    std::vector<EpochMetrics> epochs;
};

// Shuffles each epoch with a seed derived from (config.seed, epoch), walks
// minibatches, computes the analytic gradient, clips, steps. Throws Diverged
// (with epoch and batch index) if the loss leaves the finite range.
TrainReport fit(LUNet& net, const std::vector<std::vector<double>>& train_data,
                const TrainConfig& config, const MetricSink& sink = {});

enum class NllUnit { nats, bits_per_pixel };

struct NllSummary {
    double mean = 0.0;
    double stddev = 0.0;
    std::vector<double> per_sample;
};

// Mean and standard deviation of -log_density over the dataset. For
// bits_per_pixel the per-sample values are (-log_density + correction) /
// (D ln 2); corrections (one per sample, from the preprocessing pipeline)
// may be empty, meaning zero.
NllSummary evaluate_nll(const LUNet& net, const std::vector<std::vector<double>>& data,
                        NllUnit unit, std::span<const double> corrections = {});

}  // namespace lunet
