#include <CLI11.hpp>

#include <cstdint>
#include <string>

#include "lunet/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"LU-Net: invertible neural network density estimation"};
    app.require_subcommand(1);

    lunet::CliOverrides overrides;
    std::string config_path;
    std::string checkpoint_path;

    auto add_common = [&](CLI::App* cmd, bool needs_config, bool needs_checkpoint) {
        if (needs_config) {
            cmd->add_option("--config", config_path, "experiment config file")->required();
        }
        if (needs_checkpoint) {
            cmd->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();
        }
        cmd->add_option_function<std::uint64_t>(
            "--seed", [&](std::uint64_t v) { overrides.seed = v; }, "seed override");
        cmd->add_option_function<std::string>(
            "--out", [&](const std::string& v) { overrides.out_dir = v; }, "output directory");
        cmd->add_option_function<int>(
            "--threads", [&](int v) { overrides.threads = v; }, "worker thread count");
    };

    auto* train = app.add_subcommand("train", "train a model from a config file");
    add_common(train, true, false);

    auto* eval = app.add_subcommand("eval", "evaluate NLL of a checkpoint on a dataset");
    add_common(eval, true, true);
    bool bits_per_pixel = false;
    bool use_train_split = false;
    eval->add_flag("--bits-per-pixel", bits_per_pixel, "also report bits/pixel (raw + corrected)");
    eval->add_flag("--train-split", use_train_split, "evaluate the train split instead of test");

    auto* sample_cmd = app.add_subcommand("sample", "draw samples through the inverse net");
    add_common(sample_cmd, false, true);
    int sample_count = 16;
    std::uint64_t sample_seed = 0;
    bool image_mode = false;
    sample_cmd->add_option("-n,--count", sample_count, "number of samples");
    sample_cmd->add_option("--sample-seed", sample_seed, "latent sampling seed");
    sample_cmd->add_flag("--image", image_mode, "deprocess to 28x28 PGM images");

    auto* interp = app.add_subcommand("interpolate", "latent interpolation between two images");
    add_common(interp, true, true);
    std::size_t index_a = 0;
    std::size_t index_b = 1;
    int steps = 10;
    interp->add_option("--index-a", index_a, "first image index")->required();
    interp->add_option("--index-b", index_b, "second image index")->required();
    interp->add_option("--steps", steps, "number of frames");

    auto* diagnose = app.add_subcommand("diagnose", "condition numbers and projection normality");
    add_common(diagnose, true, true);
    int direction_seeds = 1;
    int bins = 40;
    std::string baseline;
    diagnose->add_option("--direction-seeds", direction_seeds, "number of projection directions");
    diagnose->add_option("--bins", bins, "histogram bins");
    diagnose->add_option("--baseline", baseline, "checkpoint to compare KS statistics against");

    CLI11_PARSE(app, argc, argv);

    if (train->parsed()) return lunet::cmd_train(config_path, overrides);
    if (eval->parsed()) {
        return lunet::cmd_eval(checkpoint_path, config_path, bits_per_pixel, use_train_split,
                               overrides);
    }
    if (sample_cmd->parsed()) {
        return lunet::cmd_sample(checkpoint_path, sample_count, sample_seed, image_mode, overrides);
    }
    if (interp->parsed()) {
        return lunet::cmd_interpolate(checkpoint_path, config_path, index_a, index_b, steps,
                                      overrides);
    }
    if (diagnose->parsed()) {
        return lunet::cmd_diagnose(checkpoint_path, config_path, direction_seeds, bins, baseline,
                                   overrides);
    }
    return lunet::kExitConfig;
}
