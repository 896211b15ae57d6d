#include "lunet/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "lunet/errors.hpp"
#include "lunet/rng.hpp"

namespace lunet {

void MixtureSpec::validate() const {
    if (centers.empty()) throw ConfigError("mixture: centers must be nonempty");
    if (!(sigma > 0.0)) throw ConfigError("mixture: sigma must be > 0");
    if (n_total < 2) throw ConfigError("mixture: n_total must be >= 2");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("mixture: train_fraction must be in (0, 1)");
    }
}

MixtureData gaussian_mixture(const MixtureSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);

    std::vector<std::vector<double>> points;
    points.reserve(spec.n_total);
    for (int i = 0; i < spec.n_total; ++i) {
        const auto& center = spec.centers[rng.uniform_int(spec.centers.size())];
        points.push_back({center[0] + spec.sigma * rng.normal(),
                          center[1] + spec.sigma * rng.normal()});
    }

    // Seeded random split.
    std::vector<std::size_t> order(points.size());
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.uniform_int(i + 1)]);
    }
    const auto n_train =
        static_cast<std::size_t>(std::llround(spec.train_fraction * spec.n_total));

    MixtureData data;
    data.train.reserve(n_train);
    data.test.reserve(points.size() - n_train);
    for (std::size_t i = 0; i < order.size(); ++i) {
        (i < n_train ? data.train : data.test).push_back(std::move(points[order[i]]));
    }
    return data;
}

namespace {

// Reads through zlib so plain and gzip-compressed files both work.
class IdxReader {
public:
    explicit IdxReader(const std::string& path) : path_(path), file_(gzopen(path.c_str(), "rb")) {
        if (file_ == nullptr) throw IoError("cannot open " + path);
    }
    ~IdxReader() {
        if (file_ != nullptr) gzclose(file_);
    }
    IdxReader(const IdxReader&) = delete;
    IdxReader& operator=(const IdxReader&) = delete;

    std::uint32_t read_u32_be() {
        unsigned char bytes[4];
        read_exact(bytes, 4);
        return (static_cast<std::uint32_t>(bytes[0]) << 24) |
               (static_cast<std::uint32_t>(bytes[1]) << 16) |
               (static_cast<std::uint32_t>(bytes[2]) << 8) | static_cast<std::uint32_t>(bytes[3]);
    }

    void read_exact(void* dst, std::size_t len) {
        const int got = gzread(file_, dst, static_cast<unsigned>(len));
        if (got < 0 || static_cast<std::size_t>(got) != len) {
            throw TruncatedFile(path_ + ": unexpected end of file at offset " +
                                std::to_string(offset_ + std::max(got, 0)));
        }
        offset_ += len;
    }

private:
    std::string path_;
    gzFile file_;
    std::size_t offset_ = 0;
};

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

}  // namespace

LabeledImages load_idx(const std::string& images_path, const std::string& labels_path) {
    LabeledImages out;

    IdxReader images(images_path);
    const std::uint32_t images_magic = images.read_u32_be();
    if (images_magic != kImagesMagic) {
        throw BadMagic(images_path + ": magic " + std::to_string(images_magic) +
                       " at offset 0, expected 2051");
    }
    const std::uint32_t n_images = images.read_u32_be();
    const std::uint32_t rows = images.read_u32_be();
    const std::uint32_t cols = images.read_u32_be();
    if (rows != 28 || cols != 28) {
        throw DimMismatch(images_path + ": image size " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ", expected 28x28");
    }

    IdxReader labels(labels_path);
    const std::uint32_t labels_magic = labels.read_u32_be();
    if (labels_magic != kLabelsMagic) {
        throw BadMagic(labels_path + ": magic " + std::to_string(labels_magic) +
                       " at offset 0, expected 2049");
    }
    const std::uint32_t n_labels = labels.read_u32_be();
    if (n_labels != n_images) {
        throw DimMismatch(labels_path + ": " + std::to_string(n_labels) + " labels for " +
                          std::to_string(n_images) + " images in " + images_path);
    }

    out.pixels.resize(static_cast<std::size_t>(n_images) * 28 * 28);
    images.read_exact(out.pixels.data(), out.pixels.size());

    std::vector<std::uint8_t> raw_labels(n_labels);
    labels.read_exact(raw_labels.data(), raw_labels.size());
    out.labels.assign(raw_labels.begin(), raw_labels.end());
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        if (out.labels[i] > 9) {
            throw DimMismatch(labels_path + ": label " + std::to_string(out.labels[i]) +
                              " out of range at index " + std::to_string(i));
        }
    }
    return out;
}

PreprocessedImages preprocess(const LabeledImages& images, const Pipeline& pipeline) {
    const std::size_t pixel_count = images.pixels_per_image();
    const double scale = pipeline.scale_denominator;
    const double eps = pipeline.clamp_eps;
    const double log_scale = std::log(scale);

    PreprocessedImages out;
    out.vectors.resize(images.count());
    out.logdet_correction.resize(images.count());
    for (std::size_t i = 0; i < images.count(); ++i) {
        Rng noise(derive_seed(pipeline.noise_seed, i));
        const auto image = images.image(i);
        auto& vec = out.vectors[i];
        vec.resize(pixel_count);
        double correction = 0.0;
        for (std::size_t k = 0; k < pixel_count; ++k) {
            const double dequantized = static_cast<double>(image[k]) + noise.uniform01();
            const double p = std::clamp(dequantized / scale, eps, 1.0 - eps);
            vec[k] = std::log(p) - std::log1p(-p);
            correction += std::log(p) + std::log1p(-p) + log_scale;
        }
        out.logdet_correction[i] = correction;
    }
    return out;
}

LabeledImages deprocess(const std::vector<std::vector<double>>& vectors, int width, int height,
                        double scale_denominator) {
    LabeledImages out;
    out.width = width;
    out.height = height;
    const std::size_t pixel_count = static_cast<std::size_t>(width) * height;
    out.pixels.reserve(vectors.size() * pixel_count);
    out.labels.assign(vectors.size(), 0);
    for (const auto& vec : vectors) {
        if (vec.size() != pixel_count) {
            throw DimMismatch("deprocess: vector length " + std::to_string(vec.size()) +
                              " does not match " + std::to_string(width) + "x" +
                              std::to_string(height));
        }
        for (double v : vec) {
            const double sig = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                        : std::exp(v) / (1.0 + std::exp(v));
            const double value = std::floor(sig * scale_denominator);
            out.pixels.push_back(static_cast<std::uint8_t>(std::clamp(value, 0.0, 255.0)));
        }
    }
    return out;
}

LabeledImages filter_class(const LabeledImages& images, int class_id) {
    if (class_id < 0 || class_id > 9) throw ConfigError("filter_class: class_id must be in [0, 9]");
    LabeledImages out;
    out.width = images.width;
    out.height = images.height;
    for (std::size_t i = 0; i < images.count(); ++i) {
        if (images.labels[i] != class_id) continue;
        const auto image = images.image(i);
        out.pixels.insert(out.pixels.end(), image.begin(), image.end());
        out.labels.push_back(class_id);
    }
    if (out.labels.empty()) {
        throw EmptyClass("no images with label " + std::to_string(class_id));
    }
    return out;
}

LabeledImages synthetic_blobs(int count, std::uint64_t seed) {
    LabeledImages out;
    out.pixels.reserve(static_cast<std::size_t>(count) * 28 * 28);
    out.labels.reserve(count);
    for (int i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const int bumps = 1 + static_cast<int>(rng.uniform_int(3));
        double field[28][28] = {};
        for (int k = 0; k < bumps; ++k) {
            const double cx = 6.0 + 16.0 * rng.uniform01();
            const double cy = 6.0 + 16.0 * rng.uniform01();
            const double radius = 2.0 + 3.0 * rng.uniform01();
            const double amplitude = 120.0 + 135.0 * rng.uniform01();
            for (int y = 0; y < 28; ++y) {
                for (int x = 0; x < 28; ++x) {
                    const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                    field[y][x] += amplitude * std::exp(-d2 / (2.0 * radius * radius));
                }
            }
        }
        for (int y = 0; y < 28; ++y) {
            for (int x = 0; x < 28; ++x) {
                out.pixels.push_back(
                    static_cast<std::uint8_t>(std::clamp(field[y][x], 0.0, 255.0)));
            }
        }
        out.labels.push_back(bumps);
    }
    return out;
}

void write_points_csv(const std::string& path, const std::vector<std::vector<double>>& points) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.precision(17);
    for (const auto& point : points) {
        for (std::size_t d = 0; d < point.size(); ++d) {
            if (d > 0) out << ',';
            out << point[d];
        }
        out << '\n';
    }
    if (!out.flush()) throw IoError("write failed: " + path);
}

}  // namespace lunet
