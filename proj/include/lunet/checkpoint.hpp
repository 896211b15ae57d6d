#pragma once

#include <cstdint>
#include <string>

#include "lunet/model.hpp"

namespace lunet {

// Training provenance carried in the checkpoint header.
struct CheckpointMeta {
    int format_version = 1;
    double alpha = 0.1;
    double gamma = 1.0;
    std::uint64_t init_seed = 0;
};

// Checkpoint layout, bit-exact:
//   magic bytes "LUNET1\n";
//   one text header line: format_version, M, D, alpha, gamma, init_seed and
//   the per-layer activation kinds (comma separated);
//   per layer in order: packed U (D(D+1)/2), packed strict-lower L
//   (D(D-1)/2), b (D), all 64-bit little-endian floats, no padding.
void save_checkpoint(const std::string& path, const LUNet& net, const CheckpointMeta& meta);

struct LoadedCheckpoint {
    LUNet net;
    CheckpointMeta meta;
};

// Rejects mismatched magic, malformed headers, short reads and trailing bytes.
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace lunet
