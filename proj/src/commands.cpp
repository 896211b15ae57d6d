#include "lunet/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "lunet/checkpoint.hpp"
#include "lunet/diagnostics.hpp"
#include "lunet/errors.hpp"
#include "lunet/pgm.hpp"
#include "lunet/rng.hpp"

namespace lunet {

namespace {

namespace fs = std::filesystem;

// A materialized dataset: model-space vectors plus, for image data, the
// preprocessing corrections and the source images.
struct DatasetBundle {
    std::vector<std::vector<double>> train;
    std::vector<std::vector<double>> test;
    std::vector<double> train_corrections;
    std::vector<double> test_corrections;
    LabeledImages train_images;
    LabeledImages test_images;
    bool is_image = false;
};

DatasetBundle load_dataset(const ExperimentConfig::Data& data) {
    DatasetBundle bundle;
    switch (data.kind) {
        case ExperimentConfig::DataKind::mixture: {
            MixtureData mixture = gaussian_mixture(data.mixture);
            bundle.train = std::move(mixture.train);
            bundle.test = std::move(mixture.test);
            return bundle;
        }
        case ExperimentConfig::DataKind::idx: {
            bundle.is_image = true;
            bundle.train_images = load_idx(data.images, data.labels);
            if (!data.test_images.empty()) {
                bundle.test_images = load_idx(data.test_images, data.test_labels);
            }
            break;
        }
        case ExperimentConfig::DataKind::blobs: {
            bundle.is_image = true;
            const std::uint64_t seed = data.mixture.seed;
            bundle.train_images = synthetic_blobs(data.blob_count, seed);
            if (data.blob_test_count > 0) {
                bundle.test_images = synthetic_blobs(data.blob_test_count, derive_seed(seed, 1));
            }
            break;
        }
    }

    if (data.class_filter >= 0) {
        bundle.train_images = filter_class(bundle.train_images, data.class_filter);
        if (bundle.test_images.count() > 0) {
            bundle.test_images = filter_class(bundle.test_images, data.class_filter);
        }
    }

    Pipeline train_pipeline = data.pipeline;
    PreprocessedImages processed = preprocess(bundle.train_images, train_pipeline);
    bundle.train = std::move(processed.vectors);
    bundle.train_corrections = std::move(processed.logdet_correction);

    if (bundle.test_images.count() > 0) {
        // Independent per-sample noise streams for the test split.
        Pipeline test_pipeline = data.pipeline;
        test_pipeline.noise_seed = derive_seed(data.pipeline.noise_seed, 0x7e57);
        PreprocessedImages test_processed = preprocess(bundle.test_images, test_pipeline);
        bundle.test = std::move(test_processed.vectors);
        bundle.test_corrections = std::move(test_processed.logdet_correction);
    }
    return bundle;
}

ExperimentConfig load_resolved_config(const std::string& config_path,
                                      const CliOverrides& overrides) {
    ExperimentConfig config = parse_config_file(config_path);
    if (overrides.seed) config.train.seed = *overrides.seed;
    if (overrides.out_dir) config.output.dir = *overrides.out_dir;
    if (overrides.threads) config.train.threads = *overrides.threads;
    config.validate();
    return config;
}

std::string frame_name(const char* prefix, int index) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%04d.pgm", prefix, index);
    return buf;
}

int exit_code_for(const std::exception& err) {
    if (dynamic_cast<const ConfigError*>(&err) != nullptr) return kExitConfig;
    if (dynamic_cast<const BadMagic*>(&err) != nullptr ||
        dynamic_cast<const DimMismatch*>(&err) != nullptr ||
        dynamic_cast<const TruncatedFile*>(&err) != nullptr ||
        dynamic_cast<const EmptyClass*>(&err) != nullptr ||
        dynamic_cast<const DimensionMismatch*>(&err) != nullptr) {
        return kExitData;
    }
    if (dynamic_cast<const Diverged*>(&err) != nullptr ||
        dynamic_cast<const NearSingularDiagonal*>(&err) != nullptr ||
        dynamic_cast<const NonFinite*>(&err) != nullptr ||
        dynamic_cast<const NoConvergence*>(&err) != nullptr) {
        return kExitNumeric;
    }
    return kExitIo;
}

int report_error(const char* command, const std::exception& err) {
    const int code = exit_code_for(err);
    std::cerr << "lunet " << command << ": error: " << err.what() << '\n';
    return code;
}

}  // namespace

int cmd_train(const std::string& config_path, const CliOverrides& overrides) {
    try {
        const ExperimentConfig config = load_resolved_config(config_path, overrides);
        const DatasetBundle data = load_dataset(config.data);
        if (data.train.empty()) throw ConfigError("training split is empty");
        if (data.train.front().size() != static_cast<std::size_t>(config.model.dim)) {
            throw DimMismatch("data dimension does not match model.dim");
        }

        fs::create_directories(config.output.dir);
        const fs::path run_dir(config.output.dir);
        write_config_file((run_dir / "config.resolved.ini").string(), config);
        if (config.output.emit_data_csv && !data.is_image) {
            write_points_csv((run_dir / "train.csv").string(), data.train);
            write_points_csv((run_dir / "test.csv").string(), data.test);
        }

        LUNet net = init_net(config.model.layers, config.model.dim, config.model.seed,
                             config.model.init, config.model.alpha);

        std::ofstream metrics;
        if (config.output.emit_metrics) {
            metrics.open((run_dir / "metrics.csv").string(), std::ios::trunc);
            if (!metrics) throw IoError("cannot open metrics.csv in " + config.output.dir);
            metrics << "epoch,lr,train_nll_nats,wallclock_s\n";
            metrics.precision(12);
        }
        const MetricSink sink = [&](const EpochMetrics& m) {
            std::cout << "epoch " << m.epoch << ": lr=" << m.lr << " train_nll=" << m.train_nll
                      << " nats (" << m.seconds << " s)\n";
            if (metrics.is_open()) {
                metrics << m.epoch << ',' << m.lr << ',' << m.train_nll << ',' << m.seconds
                        << '\n';
                metrics.flush();
            }
        };

        fit(net, data.train, config.train, sink);

        if (config.output.emit_checkpoint) {
            CheckpointMeta meta;
            meta.alpha = config.model.alpha;
            meta.gamma = config.train.gamma;
            meta.init_seed = config.model.seed;
            save_checkpoint((run_dir / "checkpoint.lunet").string(), net, meta);
        }

        if (!data.test.empty()) {
            const NllSummary nats = evaluate_nll(net, data.test, NllUnit::nats);
            std::cout << "test NLL: " << nats.mean << " +- " << nats.stddev << " nats\n";
            if (data.is_image) {
                const NllSummary corrected =
                    evaluate_nll(net, data.test, NllUnit::bits_per_pixel, data.test_corrections);
                std::cout << "test NLL (corrected): " << corrected.mean << " +- "
                          << corrected.stddev << " bits/pixel\n";
            }
        }
        return kExitOk;
    } catch (const std::exception& err) {
        return report_error("train", err);
    }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& config_path,
             bool bits_per_pixel, bool use_train_split, const CliOverrides& overrides) {
    try {
        const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
        const ExperimentConfig config = load_resolved_config(config_path, overrides);
        const DatasetBundle data = load_dataset(config.data);

        const auto& split = use_train_split ? data.train : data.test;
        const auto& corrections = use_train_split ? data.train_corrections : data.test_corrections;
        if (split.empty()) throw ConfigError("requested split is empty");
        if (split.front().size() != static_cast<std::size_t>(loaded.net.dim())) {
            throw DimMismatch("checkpoint dimension " + std::to_string(loaded.net.dim()) +
                              " does not match data dimension " +
                              std::to_string(split.front().size()));
        }

        const NllSummary nats = evaluate_nll(loaded.net, split, NllUnit::nats);
        std::cout << "NLL: " << nats.mean << " +- " << nats.stddev << " nats\n";
        if (bits_per_pixel) {
            const NllSummary raw = evaluate_nll(loaded.net, split, NllUnit::bits_per_pixel);
            std::cout << "NLL (raw logit space): " << raw.mean << " +- " << raw.stddev
                      << " bits/pixel\n";
            const NllSummary corrected =
                evaluate_nll(loaded.net, split, NllUnit::bits_per_pixel, corrections);
            std::cout << "NLL (corrected): " << corrected.mean << " +- " << corrected.stddev
                      << " bits/pixel\n";
        }

        const fs::path out_dir(overrides.out_dir.value_or("."));
        fs::create_directories(out_dir);
        std::ofstream csv(out_dir / "log_densities.csv", std::ios::trunc);
        if (!csv) throw IoError("cannot write log_densities.csv");
        csv.precision(17);
        csv << "index,log_density\n";
        for (std::size_t i = 0; i < nats.per_sample.size(); ++i) {
            csv << i << ',' << -nats.per_sample[i] << '\n';
        }
        return kExitOk;
    } catch (const std::exception& err) {
        return report_error("eval", err);
    }
}

int cmd_sample(const std::string& checkpoint_path, int count, std::uint64_t seed, bool image_mode,
               const CliOverrides& overrides) {
    try {
        if (count < 0) throw ConfigError("sample count must be >= 0");
        const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
        const fs::path out_dir(overrides.out_dir.value_or("."));
        fs::create_directories(out_dir);

        const auto samples = sample(loaded.net, count, seed);
        if (image_mode) {
            if (loaded.net.dim() != 28 * 28) {
                throw DimMismatch("image mode requires a 784-dimensional checkpoint, got " +
                                  std::to_string(loaded.net.dim()));
            }
            const LabeledImages images = deprocess(samples);
            for (std::size_t i = 0; i < images.count(); ++i) {
                write_pgm((out_dir / frame_name("sample", static_cast<int>(i))).string(),
                          images.image(i), images.width, images.height);
            }
            std::cout << "wrote " << images.count() << " PGM samples to " << out_dir.string()
                      << '\n';
        } else {
            write_points_csv((out_dir / "samples.csv").string(), samples);
            std::cout << "wrote " << samples.size() << " samples to "
                      << (out_dir / "samples.csv").string() << '\n';
        }
        return kExitOk;
    } catch (const std::exception& err) {
        return report_error("sample", err);
    }
}

int cmd_interpolate(const std::string& checkpoint_path, const std::string& config_path,
                    std::size_t index_a, std::size_t index_b, int steps,
                    const CliOverrides& overrides) {
    try {
        if (steps < 2) throw ConfigError("interpolate needs steps >= 2");
        const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
        const ExperimentConfig config = load_resolved_config(config_path, overrides);
        const DatasetBundle data = load_dataset(config.data);
        if (!data.is_image) throw ConfigError("interpolate requires image data");

        const auto& split = data.test.empty() ? data.train : data.test;
        if (index_a >= split.size() || index_b >= split.size()) {
            throw ConfigError("interpolation index out of range (dataset has " +
                              std::to_string(split.size()) + " images)");
        }

        const auto frames = interpolate(loaded.net, split[index_a], split[index_b], steps);
        const LabeledImages images = deprocess(frames);

        const fs::path out_dir(overrides.out_dir.value_or("."));
        fs::create_directories(out_dir);
        for (std::size_t i = 0; i < images.count(); ++i) {
            write_pgm((out_dir / frame_name("frame", static_cast<int>(i))).string(),
                      images.image(i), images.width, images.height);
        }
        std::cout << "wrote " << images.count() << " interpolation frames to " << out_dir.string()
                  << '\n';
        return kExitOk;
    } catch (const std::exception& err) {
        return report_error("interpolate", err);
    }
}

int cmd_diagnose(const std::string& checkpoint_path, const std::string& config_path,
                 int direction_seed_count, int histogram_bins,
                 const std::string& baseline_checkpoint, const CliOverrides& overrides) {
    try {
        if (direction_seed_count < 1) throw ConfigError("diagnose needs at least one seed");
        const LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
        const ExperimentConfig config = load_resolved_config(config_path, overrides);
        const DatasetBundle data = load_dataset(config.data);
        const auto& split = data.test.empty() ? data.train : data.test;
        if (split.empty()) throw ConfigError("diagnose: dataset is empty");

        const fs::path out_dir(overrides.out_dir.value_or("."));
        fs::create_directories(out_dir);

        const ConditionReport report = condition_report(loaded.net);
        write_condition_csv((out_dir / "condition.csv").string(), report);
        for (int m = 0; m < report.depth; ++m) {
            std::cout << "layer " << (m + 1) << ": kappa(U)=" << report.layers[m].kappa_u
                      << " kappa(L)=" << report.layers[m].kappa_l;
            if (report.layers[m].u_near_singular) std::cout << "  [near-singular diagonal]";
            std::cout << '\n';
        }

        std::optional<LoadedCheckpoint> baseline;
        if (!baseline_checkpoint.empty()) baseline = load_checkpoint(baseline_checkpoint);

        const std::uint64_t base_seed = overrides.seed.value_or(0);
        int smaller_than_baseline = 0;
        for (int s = 0; s < direction_seed_count; ++s) {
            const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(s));
            const ProjectionTest test = projection_normality(loaded.net, split, seed);
            char suffix[32];
            std::snprintf(suffix, sizeof(suffix), "%03d", s);
            write_projection_csv((out_dir / ("projection_" + std::string(suffix) + ".csv")).string(),
                                 test);
            write_histogram_csv((out_dir / ("histogram_" + std::string(suffix) + ".csv")).string(),
                                normality_histogram(test, histogram_bins));
            std::cout << "seed " << s << ": KS=" << test.ks_statistic;
            if (baseline) {
                const ProjectionTest base_test = projection_normality(baseline->net, split, seed);
                std::cout << " baseline KS=" << base_test.ks_statistic
                          << (test.ks_statistic < base_test.ks_statistic ? "  (improved)"
                                                                         : "  (not improved)");
                if (test.ks_statistic < base_test.ks_statistic) ++smaller_than_baseline;
            }
            std::cout << '\n';
        }
        if (baseline) {
            std::cout << "KS improved on " << smaller_than_baseline << " of "
                      << direction_seed_count << " directions\n";
        }
        return kExitOk;
    } catch (const std::exception& err) {
        return report_error("diagnose", err);
    }
}

}  // namespace lunet
