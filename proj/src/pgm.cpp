#include "lunet/pgm.hpp"

#include <fstream>

#include "lunet/errors.hpp"

namespace lunet {

void write_pgm(const std::string& path, std::span<const std::uint8_t> pixels, int width,
               int height) {
    if (pixels.size() != static_cast<std::size_t>(width) * height) {
        throw DimMismatch("write_pgm: pixel count does not match " + std::to_string(width) + "x" +
                          std::to_string(height));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "P5\n" << width << ' ' << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out.flush()) throw IoError("write failed: " + path);
}

PgmImage read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::string magic;
    in >> magic;
    if (magic != "P5") throw BadMagic(path + ": not a binary PGM (magic '" + magic + "')");
    PgmImage image;
    int maxval = 0;
    in >> image.width >> image.height >> maxval;
    if (!in || image.width < 1 || image.height < 1) {
        throw TruncatedFile(path + ": malformed PGM header");
    }
    if (maxval != 255) throw DimMismatch(path + ": expected maxval 255, got " + std::to_string(maxval));
    in.get();  // the single whitespace byte after maxval
    image.pixels.resize(static_cast<std::size_t>(image.width) * image.height);
    if (!in.read(reinterpret_cast<char*>(image.pixels.data()),
                 static_cast<std::streamsize>(image.pixels.size()))) {
        throw TruncatedFile(path + ": pixel payload shorter than header promises");
    }
    return image;
}

}  // namespace lunet
