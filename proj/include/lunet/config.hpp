#pragma once

#include <string>

#include "lunet/data.hpp"
#include "lunet/model.hpp"
#include "lunet/train.hpp"

namespace lunet {

// Experiment description: a key/value file with [model], [train], [data] and
// [output] sections. Unknown sections or keys are rejected so that typos
// cannot silently fall back to defaults.
struct ExperimentConfig {
    struct Model {
        int layers = 2;  // total LU layers, hidden plus the identity output layer
        int dim = 2;
        double alpha = 0.1;
        InitScheme init = InitScheme::gaussian;
        std::uint64_t seed = 1;
    };

    enum class DataKind { mixture, idx, blobs };

    struct Data {
        DataKind kind = DataKind::mixture;
        MixtureSpec mixture;
        std::string images;
        std::string labels;
        std::string test_images;
        std::string test_labels;
        int class_filter = -1;  // -1 keeps every class
        Pipeline pipeline;
        int blob_count = 2000;
        int blob_test_count = 300;
    };

    struct Output {
        std::string dir = "run";
        bool emit_metrics = true;
        bool emit_checkpoint = true;
        bool emit_data_csv = false;
    };

    Model model;
    TrainConfig train;
    Data data;
    Output output;

    void validate() const;  // throws ConfigError
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);

// Serializes the fully resolved config (defaults and overrides applied) in
// the same format parse accepts; a run directory copy makes every artifact
// re-derivable.
std::string format_config(const ExperimentConfig& config);
void write_config_file(const std::string& path, const ExperimentConfig& config);

}  // namespace lunet
