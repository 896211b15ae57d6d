#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lunet {

// Two-dimensional Gaussian mixture toy problem: n_total points drawn with a
// uniformly chosen center plus isotropic N(0, sigma^2) noise, then split by
// a seeded shuffle.
struct MixtureSpec {
    std::vector<std::array<double, 2>> centers = {{-1.0, -1.0}, {-1.0, 1.0}, {1.0, -1.0}, {1.0, 1.0}};
    double sigma = 0.2;
    int n_total = 10000;
    double train_fraction = 0.9;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MixtureData {
    std::vector<std::vector<double>> train;
    std::vector<std::vector<double>> test;
};

MixtureData gaussian_mixture(const MixtureSpec& spec);

// 8-bit grayscale images, 28x28, with class labels in [0, 9].
struct LabeledImages {
    int width = 28;
    int height = 28;
    std::vector<std::uint8_t> pixels;  // count * width * height, row-major per image
    std::vector<int> labels;

    std::size_t count() const { return labels.size(); }
    std::size_t pixels_per_image() const { return static_cast<std::size_t>(width) * height; }
    std::span<const std::uint8_t> image(std::size_t index) const {
        return {pixels.data() + index * pixels_per_image(), pixels_per_image()};
    }
};

// Parses the big-endian IDX pair (images magic 0x00000803 with dims
// (n, 28, 28), labels magic 0x00000801). Accepts gzip-compressed files
// transparently.
LabeledImages load_idx(const std::string& images_path, const std::string& labels_path);

// Invertible image preprocessing: add U(0,1) dequantization noise, divide by
// scale_denominator, clamp away from {0,1}, apply logit. Noise streams are
// derived per sample from (noise_seed, sample_index), so outputs do not
// depend on processing order.
struct Pipeline {
    double scale_denominator = 256.0;
    double clamp_eps = 1e-6;
    std::uint64_t noise_seed = 0;
};

struct PreprocessedImages {
    std::vector<std::vector<double>> vectors;
    // Per-sample additive correction that converts -log_density in logit
    // space into the NLL of the dequantized integer-scale data:
    // sum over pixels of [ ln(p(1-p)) + ln(scale) ].
    std::vector<double> logdet_correction;
};

PreprocessedImages preprocess(const LabeledImages& images, const Pipeline& pipeline);

// Inverse of preprocess up to the dequantization noise: sigmoid, rescale,
// floor. Recovers the original integer pixels exactly.
LabeledImages deprocess(const std::vector<std::vector<double>>& vectors, int width = 28,
                        int height = 28, double scale_denominator = 256.0);

// Subset with matching label, order preserved. Throws EmptyClass when no
// image matches.
LabeledImages filter_class(const LabeledImages& images, int class_id);

// Synthetic 28x28 blob images: each image renders `label` Gaussian bumps
// (labels 1..3) at random positions. Stands in for MNIST-scale data where no
// dataset files are available.
LabeledImages synthetic_blobs(int count, std::uint64_t seed);

// CSV with one "x0,x1" row per point.
void write_points_csv(const std::string& path, const std::vector<std::vector<double>>& points);

}  // namespace lunet
