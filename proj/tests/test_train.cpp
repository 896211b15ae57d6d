#include <doctest.h>

#include <cmath>

#include "lunet/train.hpp"
#include "oracles.hpp"

using namespace lunet;

TEST_CASE("clip_gradients: zero input, single entry, norm contract") {
    auto net = oracles::random_net(2, 3, 1);
    auto zeros = GradientSet::zeros_like(net);
    clip_gradients(zeros, ClipKind::euclidean, 1.0);
    CHECK(zeros.max_abs() == 0.0);

    auto single = GradientSet::zeros_like(net);
    single.layers[0].db[0] = 4.0;
    clip_gradients(single, ClipKind::euclidean, 1.0);
    CHECK(single.layers[0].db[0] == doctest::Approx(1.0).epsilon(1e-12));

    Rng rng(2);
    for (int rep = 0; rep < 10; ++rep) {
        auto grads = GradientSet::zeros_like(net);
        for (auto& layer : grads.layers) {
            for (auto& g : layer.du) g = 3.0 * rng.normal();
            for (auto& g : layer.dl) g = 3.0 * rng.normal();
            for (auto& g : layer.db) g = 3.0 * rng.normal();
        }
        const double pre_l2 = grads.l2_norm();
        auto euclid = grads;
        clip_gradients(euclid, ClipKind::euclidean, 1.5);
        CHECK(euclid.l2_norm() == doctest::Approx(std::min(pre_l2, 1.5)).epsilon(1e-12));

        const double pre_max = grads.max_abs();
        auto maxabs = grads;
        clip_gradients(maxabs, ClipKind::max_abs, 0.75);
        CHECK(maxabs.max_abs() == doctest::Approx(std::min(pre_max, 0.75)).epsilon(1e-12));

        auto clamped = grads;
        clip_gradients(clamped, ClipKind::clamp, 0.5);
        CHECK(clamped.max_abs() <= 0.5 + 1e-15);
    }
}

TEST_CASE("global rescale preserves gradient direction, clamp does not") {
    auto net = oracles::random_net(2, 2, 3);
    auto grads = GradientSet::zeros_like(net);
    grads.layers[0].db[0] = 4.0;
    grads.layers[0].db[1] = 2.0;
    auto rescaled = grads;
    clip_gradients(rescaled, ClipKind::max_abs, 1.0);
    CHECK(rescaled.layers[0].db[0] == doctest::Approx(1.0));
    CHECK(rescaled.layers[0].db[1] == doctest::Approx(0.5));
    auto clamped = grads;
    clip_gradients(clamped, ClipKind::clamp, 1.0);
    CHECK(clamped.layers[0].db[0] == doctest::Approx(1.0));
    CHECK(clamped.layers[0].db[1] == doctest::Approx(1.0));  // 2:1 became 1:1
}

TEST_CASE("sgd_momentum_step: plain step, no-op, two-step recursion") {
    auto net = oracles::random_net(2, 3, 4);
    const double before = net.layer(0).u.diag(0);

    OptimizerState state(net);
    auto grads = GradientSet::zeros_like(net);
    grads.layers[0].du[0] = 0.25;
    sgd_momentum_step(net, grads, state, 1.0, 0.0);
    CHECK(net.layer(0).u.diag(0) == doctest::Approx(before - 0.25).epsilon(1e-15));

    auto net2 = oracles::random_net(2, 3, 5);
    const double u0 = net2.layer(0).u.diag(0);
    OptimizerState state2(net2);
    auto zero = GradientSet::zeros_like(net2);
    sgd_momentum_step(net2, zero, state2, 0.7, 0.9);
    CHECK(net2.layer(0).u.diag(0) == u0);

    // Constant gradient g for two steps: velocity g then (1+beta) g, so the
    // total displacement is lr*(2+beta)*g.
    auto net3 = oracles::random_net(2, 3, 6);
    const double start = net3.layer(0).u.diag(0);
    OptimizerState state3(net3);
    auto g = GradientSet::zeros_like(net3);
    g.layers[0].du[0] = 0.1;
    const double beta = 0.9;
    const double lr = 0.5;
    sgd_momentum_step(net3, g, state3, lr, beta);
    sgd_momentum_step(net3, g, state3, lr, beta);
    CHECK(net3.layer(0).u.diag(0) ==
          doctest::Approx(start - lr * (2.0 + beta) * 0.1).epsilon(1e-13));
}

TEST_CASE("lr_at follows the staircase schedule") {
    TrainConfig config;
    config.lr0 = 1.0;
    config.lr_decay = 0.9;
    config.decay_every = 1;
    CHECK(lr_at(config, 0) == doctest::Approx(1.0));
    CHECK(lr_at(config, 2) == doctest::Approx(0.81).epsilon(1e-12));

    config.lr0 = 0.6;
    config.lr_decay = 0.5;
    config.decay_every = 3;
    CHECK(lr_at(config, 7) == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("one tiny full-batch step does not increase the loss") {
    Rng seeds(777);
    for (int rep = 0; rep < 5; ++rep) {
        auto net = oracles::random_net(2 + rep % 2, 3, seeds.next_u64());
        Rng rng(rep);
        std::vector<std::vector<double>> batch;
        for (int k = 0; k < 6; ++k) batch.push_back(oracles::random_vector(3, rng));

        const double before = nll_loss(net, batch, 1.0);
        auto result = backward(net, batch, 1.0);
        OptimizerState state(net);
        sgd_momentum_step(net, result.grads, state, 1e-6, 0.0);
        CHECK(nll_loss(net, batch, 1.0) <= before);
    }
}

TEST_CASE("fit: lr=0-like no-op via zero epochs is rejected, determinism holds") {
    auto data = std::vector<std::vector<double>>{{0.1, 0.2}, {0.3, -0.1}, {-0.2, 0.4}, {0.0, 0.1}};

    TrainConfig config;
    config.epochs = 3;
    config.batch_size = 2;
    config.lr0 = 0.05;
    config.momentum = 0.5;
    config.seed = 9;

    auto net_a = init_net(3, 2, 77);
    auto net_b = init_net(3, 2, 77);
    const auto report_a = fit(net_a, data, config);
    const auto report_b = fit(net_b, data, config);
    REQUIRE(report_a.epochs.size() == 3);
    for (int e = 0; e < 3; ++e) {
        CHECK(report_a.epochs[e].train_nll == report_b.epochs[e].train_nll);
    }
    for (int m = 0; m < 3; ++m) {
        for (std::size_t i = 0; i < net_a.layer(m).u.packed().size(); ++i) {
            CHECK(net_a.layer(m).u.packed()[i] == net_b.layer(m).u.packed()[i]);
        }
        for (std::size_t i = 0; i < net_a.layer(m).l.packed().size(); ++i) {
            CHECK(net_a.layer(m).l.packed()[i] == net_b.layer(m).l.packed()[i]);
        }
        for (std::size_t i = 0; i < net_a.layer(m).b.size(); ++i) {
            CHECK(net_a.layer(m).b[i] == net_b.layer(m).b[i]);
        }
    }
}

TEST_CASE("fit with a tiny lr leaves parameters almost unchanged per step") {
    // lr0 must be positive; a vanishing rate is the no-op limit.
    auto data = std::vector<std::vector<double>>{{0.1, 0.2}, {0.3, -0.1}};
    TrainConfig config;
    config.epochs = 1;
    config.batch_size = 2;
    config.lr0 = 1e-300;
    auto net = init_net(2, 2, 5);
    const auto before = net.layer(0).u.packed()[0];
    fit(net, data, config);
    CHECK(net.layer(0).u.packed()[0] == doctest::Approx(before).epsilon(1e-15));
}

TEST_CASE("fit validates its config and reports divergence") {
    auto data = std::vector<std::vector<double>>{{0.1, 0.2}, {0.3, -0.1}};
    TrainConfig bad;
    bad.lr0 = -1.0;
    auto net = init_net(2, 2, 5);
    CHECK_THROWS_AS(fit(net, data, bad), ConfigError);

    // An absurd learning rate with no clipping blows the parameters up.
    TrainConfig wild;
    wild.epochs = 50;
    wild.batch_size = 2;
    wild.lr0 = 1e200;
    wild.clip_threshold = 1e300;
    wild.clip_kind = ClipKind::euclidean;
    CHECK_THROWS_AS(fit(net, data, wild), Diverged);
}

TEST_CASE("evaluate_nll anchors and the loss identity") {
    std::vector<LULayer> layers;
    layers.emplace_back(2, ActivationKind::identity());
    layers.emplace_back(2, ActivationKind::identity());
    const LUNet idnet(std::move(layers));
    const std::vector<std::vector<double>> origin{{0.0, 0.0}};
    const auto nats = evaluate_nll(idnet, origin, NllUnit::nats);
    CHECK(nats.mean == doctest::Approx(1.8378770664093454).epsilon(1e-12));
    CHECK(nats.stddev == 0.0);

    const auto net = oracles::random_net(3, 4, 99);
    Rng rng(9);
    std::vector<std::vector<double>> data;
    for (int k = 0; k < 10; ++k) data.push_back(oracles::random_vector(4, rng));
    const auto summary = evaluate_nll(net, data, NllUnit::nats);
    CHECK(std::abs(summary.mean - nll_loss(net, data, 1.0) / 10.0) < 1e-10);

    // bits/pixel with a per-sample correction.
    std::vector<double> corrections(10, 2.0 * std::log(2.0) * 4.0);
    const auto bpp = evaluate_nll(net, data, NllUnit::bits_per_pixel, corrections);
    const auto raw = evaluate_nll(net, data, NllUnit::bits_per_pixel);
    CHECK(bpp.mean == doctest::Approx(raw.mean + 2.0).epsilon(1e-10));
}
