#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lunet {

// Binary PGM ("P5"), maxval 255. Lossless for 8-bit grayscale and needs no
// imaging dependency.
void write_pgm(const std::string& path, std::span<const std::uint8_t> pixels, int width,
               int height);

struct PgmImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

PgmImage read_pgm(const std::string& path);

}  // namespace lunet
