#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lunet/activation.hpp"
#include "lunet/trilinalg.hpp"

namespace lunet {

// One LU layer: x -> act(L U x + b). The linear part is stored directly in
// its factorized triangular form; the dense product L*U is never built.
struct LULayer {
    UpperTriangular u;
    UnitLowerTriangular l;
    std::vector<double> b;
    ActivationKind act;

    LULayer(int dim, ActivationKind activation)
        : u(dim), l(dim), b(static_cast<std::size_t>(dim), 0.0), act(activation) {}

    int dim() const { return u.dim(); }
};

// The chain f = f^(M) o ... o f^(1), all layers sharing one dimension.
class LUNet {
public:
    explicit LUNet(std::vector<LULayer> layers);

    int depth() const { return static_cast<int>(layers_.size()); }
    int dim() const { return layers_.front().dim(); }

    const LULayer& layer(int m) const { return layers_[m]; }
    LULayer& layer(int m) { return layers_[m]; }

    const std::vector<LULayer>& layers() const { return layers_; }
    std::vector<LULayer>& layers() { return layers_; }

private:
    std::vector<LULayer> layers_;
};

enum class InitScheme {
    gaussian,  // diag(U)=1, off-diagonals ~ N(0, 1/D), b=0
    zeros,     // L=U=I, b=0; the net reduces to M applications of act
    uniform,   // every triangular entry (diagonal included) ~ U(-1/sqrt(D), 1/sqrt(D));
               // an unstructured start whose untrained U factors are badly
               // conditioned, matching common dense-layer defaults
};

// Builds the standard net: layer_count >= 2 layers, leaky softplus on all
// hidden layers and identity on the last. Deterministic in seed.
LUNet init_net(int layer_count, int dim, std::uint64_t seed,
               InitScheme scheme = InitScheme::gaussian, double alpha = 0.1);

// Intermediates of one forward pass, kept for the log-determinant and the
// backward sweep: per layer the input a^(m-1), the product v = U a^(m-1),
// and the pre-activation s = L v + b.
struct ForwardTrace {
    std::vector<std::vector<double>> inputs;
    std::vector<std::vector<double>> u_products;
    std::vector<std::vector<double>> preactivations;
    std::vector<double> output;
};

// f(x). Throws NonFinite (with layer index) if an intermediate overflows.
std::vector<double> forward(const LUNet& net, std::span<const double> x);
ForwardTrace forward_trace(const LUNet& net, std::span<const double> x);

// f^-1(z): per layer, in reverse order, invert the activation, subtract the
// bias and run the two substitution solves. No matrix inverse is formed.
std::vector<double> inverse(const LUNet& net, std::span<const double> z, double act_tol = 1e-12);

// ln|det Jf(x)| = sum_m sum_d [ ln act'(s_d^(m)) + ln|u_dd^(m)| ], O(M*D).
double log_abs_det_jacobian(const LUNet& net, const ForwardTrace& trace);

// ln p(x) under the net with a standard normal prior:
// -D/2 ln(2pi) - 1/2 ||f(x)||^2 + ln|det Jf(x)|.
double log_density(const LUNet& net, std::span<const double> x);

// Per-layer gradients, stored in exactly the parameter packing; entries
// outside the triangular masks have no storage at all.
struct GradientSet {
    struct LayerGrads {
        std::vector<double> du;  // packed upper incl. diagonal
        std::vector<double> dl;  // packed strict lower
        std::vector<double> db;
    };

    std::vector<LayerGrads> layers;

    static GradientSet zeros_like(const LUNet& net);

    void accumulate(const GradientSet& other);
    void scale(double factor);
    double max_abs() const;
    double l2_norm() const;
    std::size_t entry_count() const;
};

// Negative log likelihood of the batch (sum over samples), with the weight
// gamma applied to the diagonal log term only; gamma=1 is the plain NLL.
double nll_loss(const LUNet& net, const std::vector<std::vector<double>>& batch, double gamma);

struct BackwardResult {
    double loss = 0.0;
    GradientSet grads;
};

// Loss and its analytic gradient for every stored parameter entry. The batch
// may fan out to worker threads; per-thread partial sums are reduced in a
// fixed order, so results are deterministic for a given thread count.
BackwardResult backward(const LUNet& net, const std::vector<std::vector<double>>& batch,
                        double gamma, int threads = 1);

// Draws n latent vectors z ~ N(0, I) from seed and maps them through f^-1.
std::vector<std::vector<double>> sample(const LUNet& net, int count, std::uint64_t seed);

// Straight line between f(x_a) and f(x_b) in latent space, mapped back
// through f^-1; endpoints reconstruct x_a and x_b.
std::vector<std::vector<double>> interpolate(const LUNet& net, std::span<const double> x_a,
                                             std::span<const double> x_b, int steps);

}  // namespace lunet
