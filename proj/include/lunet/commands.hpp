#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "lunet/config.hpp"

namespace lunet {

// Process exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;
inline constexpr int kExitIo = 5;

// Command-line values that override the config file; the resolved merge is
// what gets persisted.
struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
};

// Runs fit per the config; writes checkpoint, metrics CSV and the resolved
// config into the run directory. Nothing is written before the config and
// data pass validation.
int cmd_train(const std::string& config_path, const CliOverrides& overrides);

// Prints mean +- std NLL in nats (and bits/pixel, raw and corrected, when
// requested) and writes per-sample log densities.
int cmd_eval(const std::string& checkpoint_path, const std::string& config_path,
             bool bits_per_pixel, bool use_train_split, const CliOverrides& overrides);

// Draws latent samples and maps them through the inverse net: CSV rows, or
// PGM images after deprocessing when image_mode is set.
int cmd_sample(const std::string& checkpoint_path, int count, std::uint64_t seed, bool image_mode,
               const CliOverrides& overrides);

// Latent-space interpolation between two dataset images, emitted as PGM
// frames; the endpoint frames are reconstructions of the sources.
int cmd_interpolate(const std::string& checkpoint_path, const std::string& config_path,
                    std::size_t index_a, std::size_t index_b, int steps,
                    const CliOverrides& overrides);

// Condition-number report plus one projection-normality test per direction
// seed; optionally compares KS statistics against a baseline checkpoint.
int cmd_diagnose(const std::string& checkpoint_path, const std::string& config_path,
                 int direction_seed_count, int histogram_bins,
                 const std::string& baseline_checkpoint, const CliOverrides& overrides);

}  // namespace lunet
