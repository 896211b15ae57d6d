#include <doctest.h>

#include <zlib.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "lunet/data.hpp"
#include "lunet/errors.hpp"
#include "lunet/rng.hpp"

using namespace lunet;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void put_u32_be(std::string& out, std::uint32_t value) {
    out.push_back(static_cast<char>((value >> 24) & 0xff));
    out.push_back(static_cast<char>((value >> 16) & 0xff));
    out.push_back(static_cast<char>((value >> 8) & 0xff));
    out.push_back(static_cast<char>(value & 0xff));
}

// Hand-built IDX pair: byte layout written directly from the format
// definition, independent of the reader under test.
struct IdxFixture {
    std::string images_bytes;
    std::string labels_bytes;
    std::vector<std::uint8_t> pixels;
    std::vector<int> labels;
};

IdxFixture make_fixture() {
    IdxFixture fx;
    fx.labels = {3, 7};
    fx.pixels.resize(2 * 28 * 28);
    for (std::size_t i = 0; i < fx.pixels.size(); ++i) {
        fx.pixels[i] = static_cast<std::uint8_t>((i * 7 + 13) % 256);
    }

    put_u32_be(fx.images_bytes, 0x00000803);
    put_u32_be(fx.images_bytes, 2);
    put_u32_be(fx.images_bytes, 28);
    put_u32_be(fx.images_bytes, 28);
    fx.images_bytes.append(reinterpret_cast<const char*>(fx.pixels.data()), fx.pixels.size());

    put_u32_be(fx.labels_bytes, 0x00000801);
    put_u32_be(fx.labels_bytes, 2);
    for (int label : fx.labels) fx.labels_bytes.push_back(static_cast<char>(label));
    return fx;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

void write_gz(const std::string& path, const std::string& bytes) {
    gzFile gz = gzopen(path.c_str(), "wb");
    REQUIRE(gz != nullptr);
    REQUIRE(gzwrite(gz, bytes.data(), static_cast<unsigned>(bytes.size())) ==
            static_cast<int>(bytes.size()));
    gzclose(gz);
}

}  // namespace

TEST_CASE("load_idx round-trips a hand-built fixture, plain and gzipped") {
    const auto fx = make_fixture();
    const auto images_path = temp_path("fixture-images-idx3-ubyte");
    const auto labels_path = temp_path("fixture-labels-idx1-ubyte");
    write_file(images_path, fx.images_bytes);
    write_file(labels_path, fx.labels_bytes);

    const auto data = load_idx(images_path, labels_path);
    CHECK(data.count() == 2);
    CHECK(data.labels == fx.labels);
    CHECK(std::equal(fx.pixels.begin(), fx.pixels.end(), data.pixels.begin()));

    const auto gz_images = temp_path("fixture-images-idx3-ubyte.gz");
    const auto gz_labels = temp_path("fixture-labels-idx1-ubyte.gz");
    write_gz(gz_images, fx.images_bytes);
    write_gz(gz_labels, fx.labels_bytes);
    const auto gz_data = load_idx(gz_images, gz_labels);
    CHECK(gz_data.labels == fx.labels);
    CHECK(std::equal(fx.pixels.begin(), fx.pixels.end(), gz_data.pixels.begin()));

    for (const auto& p : {images_path, labels_path, gz_images, gz_labels}) {
        std::filesystem::remove(p);
    }
}

TEST_CASE("load_idx rejects wrong magic, count mismatch and truncation") {
    auto fx = make_fixture();
    const auto images_path = temp_path("bad-images");
    const auto labels_path = temp_path("bad-labels");

    std::string wrong_magic = fx.images_bytes;
    wrong_magic[3] = 0x01;
    write_file(images_path, wrong_magic);
    write_file(labels_path, fx.labels_bytes);
    CHECK_THROWS_AS(load_idx(images_path, labels_path), BadMagic);

    std::string three_labels;
    put_u32_be(three_labels, 0x00000801);
    put_u32_be(three_labels, 3);
    three_labels += "\x01\x02\x03";
    write_file(images_path, fx.images_bytes);
    write_file(labels_path, three_labels);
    CHECK_THROWS_AS(load_idx(images_path, labels_path), DimMismatch);

    write_file(images_path, fx.images_bytes.substr(0, fx.images_bytes.size() - 100));
    write_file(labels_path, fx.labels_bytes);
    CHECK_THROWS_AS(load_idx(images_path, labels_path), TruncatedFile);

    std::filesystem::remove(images_path);
    std::filesystem::remove(labels_path);
}

TEST_CASE("preprocess matches an independent recomputation of its stream") {
    const auto fx = make_fixture();
    LabeledImages images;
    images.pixels = fx.pixels;
    images.labels = fx.labels;

    Pipeline pipeline;
    pipeline.noise_seed = 42;
    const auto processed = preprocess(images, pipeline);
    REQUIRE(processed.vectors.size() == 2);
    REQUIRE(processed.logdet_correction.size() == 2);

    for (std::size_t i = 0; i < 2; ++i) {
        Rng noise(derive_seed(42, i));
        double correction = 0.0;
        for (std::size_t k = 0; k < 784; ++k) {
            const double u = noise.uniform01();
            const double p =
                std::clamp((static_cast<double>(images.image(i)[k]) + u) / 256.0, 1e-6, 1.0 - 1e-6);
            CHECK(processed.vectors[i][k] == doctest::Approx(std::log(p / (1.0 - p))).epsilon(1e-14));
            correction += std::log(p * (1.0 - p)) + std::log(256.0);
        }
        CHECK(processed.logdet_correction[i] == doctest::Approx(correction).epsilon(1e-12));
    }

    // Values stay within the clamp-bounded logit range.
    const double bound = std::log((1.0 - 1e-6) / 1e-6);
    for (const auto& vec : processed.vectors) {
        for (double v : vec) {
            CHECK(std::isfinite(v));
            CHECK(std::abs(v) <= bound + 1e-12);
        }
    }
}

TEST_CASE("the clamp branch engages for out-of-range mass") {
    LabeledImages images;
    images.pixels.assign(784, 0);  // all-black image
    images.labels = {0};
    Pipeline pipeline;
    pipeline.clamp_eps = 0.01;  // (0+u)/256 < 0.0039 < eps always
    pipeline.noise_seed = 7;
    const auto processed = preprocess(images, pipeline);
    const double want = std::log(0.01 / 0.99);
    for (double v : processed.vectors[0]) CHECK(v == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("deprocess inverts preprocess exactly on the integer grid") {
    LabeledImages images;
    images.pixels.resize(784);
    for (int k = 0; k < 784; ++k) images.pixels[k] = static_cast<std::uint8_t>((k * 3) % 256);
    images.labels = {0};

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Pipeline pipeline;
        pipeline.noise_seed = seed;
        const auto processed = preprocess(images, pipeline);
        const auto recovered = deprocess(processed.vectors);
        REQUIRE(recovered.count() == 1);
        for (int k = 0; k < 784; ++k) CHECK(recovered.pixels[k] == images.pixels[k]);
    }
}

TEST_CASE("deprocess anchors") {
    std::vector<std::vector<double>> vectors{std::vector<double>(784, 0.0)};
    vectors[0][0] = std::log((127.5 / 256.0) / (1.0 - 127.5 / 256.0));
    vectors[0][1] = -13.8155;  // the clamp floor
    vectors[0][2] = 40.0;      // sigmoid ~ 1, clamps to 255
    const auto images = deprocess(vectors);
    CHECK(images.pixels[0] == 127);
    CHECK(images.pixels[1] == 0);
    CHECK(images.pixels[2] == 255);
}

TEST_CASE("filter_class keeps order, partitions, rejects empty classes") {
    const auto fx = make_fixture();
    LabeledImages images;
    images.pixels = fx.pixels;
    images.labels = {3, 7};

    const auto threes = filter_class(images, 3);
    CHECK(threes.count() == 1);
    CHECK(std::equal(threes.pixels.begin(), threes.pixels.end(), images.pixels.begin()));
    CHECK_THROWS_AS(filter_class(images, 5), EmptyClass);

    std::size_t total = 0;
    for (int c = 0; c <= 9; ++c) {
        try {
            total += filter_class(images, c).count();
        } catch (const EmptyClass&) {
        }
    }
    CHECK(total == images.count());
}

TEST_CASE("gaussian_mixture: split sizes, degenerate sigma, center means") {
    MixtureSpec spec;  // defaults: 4 centers, sigma 0.2, 10000 points, 0.9 split
    const auto data = gaussian_mixture(spec);
    CHECK(data.train.size() == 9000);
    CHECK(data.test.size() == 1000);

    MixtureSpec tight = spec;
    tight.sigma = 1e-9;
    tight.n_total = 500;
    const auto degenerate = gaussian_mixture(tight);
    for (const auto& p : degenerate.train) {
        double best = 1e9;
        for (const auto& c : tight.centers) {
            best = std::min(best, std::hypot(p[0] - c[0], p[1] - c[1]));
        }
        CHECK(best < 1e-6);
    }

    // Empirical mean near each center within 3 sigma / sqrt(n).
    std::array<std::array<double, 2>, 4> sums{};
    std::array<int, 4> counts{};
    for (const auto& p : data.train) {
        int nearest = 0;
        double best = 1e9;
        for (int c = 0; c < 4; ++c) {
            const double d = std::hypot(p[0] - spec.centers[c][0], p[1] - spec.centers[c][1]);
            if (d < best) {
                best = d;
                nearest = c;
            }
        }
        sums[nearest][0] += p[0];
        sums[nearest][1] += p[1];
        ++counts[nearest];
    }
    for (int c = 0; c < 4; ++c) {
        REQUIRE(counts[c] > 100);
        const double tol = 3.0 * spec.sigma / std::sqrt(static_cast<double>(counts[c]));
        CHECK(std::abs(sums[c][0] / counts[c] - spec.centers[c][0]) < tol);
        CHECK(std::abs(sums[c][1] / counts[c] - spec.centers[c][1]) < tol);
    }

    // Determinism.
    const auto again = gaussian_mixture(spec);
    CHECK(again.train == data.train);
}

TEST_CASE("synthetic blobs are deterministic with labels counting bumps") {
    const auto a = synthetic_blobs(25, 5);
    const auto b = synthetic_blobs(25, 5);
    CHECK(a.pixels == b.pixels);
    CHECK(a.labels == b.labels);
    CHECK(a.count() == 25);
    for (int label : a.labels) {
        CHECK(label >= 1);
        CHECK(label <= 3);
    }
    // Some signal present in every image.
    for (std::size_t i = 0; i < a.count(); ++i) {
        int max_pixel = 0;
        for (auto p : a.image(i)) max_pixel = std::max(max_pixel, static_cast<int>(p));
        CHECK(max_pixel > 60);
    }
}
