#include "lunet/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "lunet/errors.hpp"
#include "lunet/rng.hpp"

namespace lunet {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112353;  // ln(2*pi)

void check_input(const LUNet& net, std::span<const double> x, const char* what) {
    if (x.size() != static_cast<std::size_t>(net.dim())) {
        throw DimensionMismatch(std::string(what) + ": expected vector of length " +
                                std::to_string(net.dim()) + ", got " + std::to_string(x.size()));
    }
}

bool all_finite(std::span<const double> v) {
    for (double x : v) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

LUNet::LUNet(std::vector<LULayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw std::invalid_argument("LUNet needs at least one layer");
    const int dim = layers_.front().dim();
    for (const auto& layer : layers_) {
        if (layer.dim() != dim || layer.b.size() != static_cast<std::size_t>(dim)) {
            throw DimensionMismatch("LUNet: all layers must share one dimension");
        }
    }
}

LUNet init_net(int layer_count, int dim, std::uint64_t seed, InitScheme scheme, double alpha) {
    if (layer_count < 2) throw std::invalid_argument("init_net: layer_count must be >= 2");
    if (dim < 1) throw std::invalid_argument("init_net: dim must be >= 1");

    Rng rng(seed);
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));  // sigma_init^2/D with sigma_init=1
    std::vector<LULayer> layers;
    layers.reserve(layer_count);
    for (int m = 0; m < layer_count; ++m) {
        const bool last = (m == layer_count - 1);
        LULayer layer(dim, last ? ActivationKind::identity()
                                : ActivationKind::leaky_softplus(alpha));
        if (scheme == InitScheme::gaussian) {
            // diag(U) stays at 1 so the untrained net is invertible with a
            // finite loss from step zero.
            for (int i = 0; i < dim; ++i) {
                for (int j = i + 1; j < dim; ++j) layer.u.at(i, j) = scale * rng.normal();
            }
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < i; ++j) layer.l.strict_at(i, j) = scale * rng.normal();
            }
        } else if (scheme == InitScheme::uniform) {
            for (auto& v : layer.u.packed()) v = scale * (2.0 * rng.uniform01() - 1.0);
            for (auto& v : layer.l.packed()) v = scale * (2.0 * rng.uniform01() - 1.0);
        }
        layers.push_back(std::move(layer));
    }
    return LUNet(std::move(layers));
}

ForwardTrace forward_trace(const LUNet& net, std::span<const double> x) {
    check_input(net, x, "forward");
    if (!all_finite(x)) throw NonFinite(0);

    const int depth = net.depth();
    ForwardTrace trace;
    trace.inputs.reserve(depth);
    trace.u_products.reserve(depth);
    trace.preactivations.reserve(depth);

    std::vector<double> a(x.begin(), x.end());
    for (int m = 0; m < depth; ++m) {
        const LULayer& layer = net.layer(m);
        const int dim = layer.dim();
        std::vector<double> v(dim), s(dim);
        matvec(layer.u, a, v);
        matvec(layer.l, v, s);
        for (int d = 0; d < dim; ++d) s[d] += layer.b[d];
        std::vector<double> out(dim);
        for (int d = 0; d < dim; ++d) out[d] = act(layer.act, s[d]);
        if (!all_finite(out)) throw NonFinite(m + 1);
        trace.inputs.push_back(std::move(a));
        trace.u_products.push_back(std::move(v));
        trace.preactivations.push_back(std::move(s));
        a = std::move(out);
    }
    trace.output = std::move(a);
    return trace;
}

std::vector<double> forward(const LUNet& net, std::span<const double> x) {
    check_input(net, x, "forward");
    if (!all_finite(x)) throw NonFinite(0);

    const int dim = net.dim();
    std::vector<double> a(x.begin(), x.end());
    std::vector<double> v(dim), s(dim);
    for (int m = 0; m < net.depth(); ++m) {
        const LULayer& layer = net.layer(m);
        matvec(layer.u, a, v);
        matvec(layer.l, v, s);
        for (int d = 0; d < dim; ++d) a[d] = act(layer.act, s[d] + layer.b[d]);
        if (!all_finite(a)) throw NonFinite(m + 1);
    }
    return a;
}

std::vector<double> inverse(const LUNet& net, std::span<const double> z, double act_tol) {
    check_input(net, z, "inverse");

    const int dim = net.dim();
    std::vector<double> w(z.begin(), z.end());
    for (int m = net.depth() - 1; m >= 0; --m) {
        const LULayer& layer = net.layer(m);
        for (int d = 0; d < dim; ++d) w[d] = act_inverse(layer.act, w[d], act_tol) - layer.b[d];
        solve(layer.l, w, w);  // forward substitution, in place
        solve(layer.u, w, w);  // back substitution, in place
    }
    return w;
}

double log_abs_det_jacobian(const LUNet& net, const ForwardTrace& trace) {
    const int depth = net.depth();
    if (static_cast<int>(trace.preactivations.size()) != depth) {
        throw DimensionMismatch("log_abs_det_jacobian: trace depth does not match net");
    }
    double sum = 0.0;
    for (int m = 0; m < depth; ++m) {
        const LULayer& layer = net.layer(m);
        const auto& s = trace.preactivations[m];
        for (int d = 0; d < layer.dim(); ++d) {
            const double u_dd = layer.u.diag(d);
            if (std::abs(u_dd) < kDiagEps) throw NearSingularDiagonal(d, u_dd);
            sum += std::log(act_prime(layer.act, s[d])) + std::log(std::abs(u_dd));
        }
    }
    return sum;
}

double log_density(const LUNet& net, std::span<const double> x) {
    const ForwardTrace trace = forward_trace(net, x);
    double quad = 0.0;
    for (double z : trace.output) quad += z * z;
    return -0.5 * net.dim() * kLog2Pi - 0.5 * quad + log_abs_det_jacobian(net, trace);
}

GradientSet GradientSet::zeros_like(const LUNet& net) {
    GradientSet grads;
    grads.layers.resize(net.depth());
    const int dim = net.dim();
    for (auto& layer : grads.layers) {
        layer.du.assign(UpperTriangular::packed_size(dim), 0.0);
        layer.dl.assign(UnitLowerTriangular::packed_size(dim), 0.0);
        layer.db.assign(static_cast<std::size_t>(dim), 0.0);
    }
    return grads;
}

void GradientSet::accumulate(const GradientSet& other) {
    for (std::size_t m = 0; m < layers.size(); ++m) {
        auto& dst = layers[m];
        const auto& src = other.layers[m];
        for (std::size_t i = 0; i < dst.du.size(); ++i) dst.du[i] += src.du[i];
        for (std::size_t i = 0; i < dst.dl.size(); ++i) dst.dl[i] += src.dl[i];
        for (std::size_t i = 0; i < dst.db.size(); ++i) dst.db[i] += src.db[i];
    }
}

void GradientSet::scale(double factor) {
    for (auto& layer : layers) {
        for (auto& g : layer.du) g *= factor;
        for (auto& g : layer.dl) g *= factor;
        for (auto& g : layer.db) g *= factor;
    }
}

double GradientSet::max_abs() const {
    double result = 0.0;
    for (const auto& layer : layers) {
        for (double g : layer.du) result = std::max(result, std::abs(g));
        for (double g : layer.dl) result = std::max(result, std::abs(g));
        for (double g : layer.db) result = std::max(result, std::abs(g));
    }
    return result;
}

double GradientSet::l2_norm() const {
    double sum = 0.0;
    for (const auto& layer : layers) {
        for (double g : layer.du) sum += g * g;
        for (double g : layer.dl) sum += g * g;
        for (double g : layer.db) sum += g * g;
    }
    return std::sqrt(sum);
}

std::size_t GradientSet::entry_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.du.size() + layer.dl.size() + layer.db.size();
    return n;
}

namespace {

// Diagonal log term sum_m sum_d ln|u_dd|; checked against kDiagEps.
double diag_log_sum(const LUNet& net) {
    double sum = 0.0;
    for (int m = 0; m < net.depth(); ++m) {
        const auto& u = net.layer(m).u;
        for (int d = 0; d < u.dim(); ++d) {
            if (std::abs(u.diag(d)) < kDiagEps) throw NearSingularDiagonal(d, u.diag(d));
            sum += std::log(std::abs(u.diag(d)));
        }
    }
    return sum;
}

// Loss contribution of one sample (without the constant and diagonal terms)
// and, if grads is non-null, its gradient accumulated into *grads.
double backward_one(const LUNet& net, std::span<const double> x, GradientSet* grads) {
    const int dim = net.dim();
    const int depth = net.depth();
    const ForwardTrace trace = forward_trace(net, x);

    double loss = 0.0;
    for (double z : trace.output) loss += 0.5 * z * z;
    for (int m = 0; m < depth; ++m) {
        const LULayer& layer = net.layer(m);
        for (int d = 0; d < dim; ++d) {
            loss -= std::log(act_prime(layer.act, trace.preactivations[m][d]));
        }
    }
    if (grads == nullptr) return loss;

    // Reverse sweep. g_a starts as the adjoint of z from the quadratic term;
    // each layer adds the local -act''/act' term for its log-derivative sum.
    std::vector<double> g_a(trace.output);
    std::vector<double> g_s(dim), g_v(dim);
    for (int m = depth - 1; m >= 0; --m) {
        const LULayer& layer = net.layer(m);
        auto& lg = grads->layers[m];
        const auto& s = trace.preactivations[m];
        const auto& v = trace.u_products[m];
        const auto& a_in = trace.inputs[m];

        for (int d = 0; d < dim; ++d) {
            const double prime = act_prime(layer.act, s[d]);
            g_s[d] = g_a[d] * prime - act_second(layer.act, s[d]) / prime;
        }

        for (int d = 0; d < dim; ++d) lg.db[d] += g_s[d];

        // s = L v + b:  dL_ij += g_s_i v_j (j<i),  g_v = L^T g_s.
        {
            double* dl_row = lg.dl.data();
            for (int i = 0; i < dim; ++i) {
                const double gi = g_s[i];
                for (int j = 0; j < i; ++j) dl_row[j] += gi * v[j];
                dl_row += i;
            }
            for (int j = 0; j < dim; ++j) g_v[j] = g_s[j];
            const double* l_row = layer.l.packed().data();
            for (int i = 0; i < dim; ++i) {
                const double gi = g_s[i];
                for (int j = 0; j < i; ++j) g_v[j] += l_row[j] * gi;
                l_row += i;
            }
        }

        // v = U a:  dU_ij += g_v_i a_j (j>=i),  g_a = U^T g_v.
        {
            double* du_row = lg.du.data();
            const double* u_row = layer.u.packed().data();
            for (int j = 0; j < dim; ++j) g_a[j] = 0.0;
            for (int i = 0; i < dim; ++i) {
                const double gi = g_v[i];
                for (int j = i; j < dim; ++j) {
                    du_row[j - i] += gi * a_in[j];
                    g_a[j] += u_row[j - i] * gi;
                }
                du_row += dim - i;
                u_row += dim - i;
            }
        }
    }
    return loss;
}

}  // namespace

double nll_loss(const LUNet& net, const std::vector<std::vector<double>>& batch, double gamma) {
    if (batch.empty()) throw std::invalid_argument("nll_loss: batch must be nonempty");
    const double n = static_cast<double>(batch.size());
    double loss = 0.5 * n * net.dim() * kLog2Pi - gamma * n * diag_log_sum(net);
    for (const auto& x : batch) loss += backward_one(net, x, nullptr);
    return loss;
}

BackwardResult backward(const LUNet& net, const std::vector<std::vector<double>>& batch,
                        double gamma, int threads) {
    if (batch.empty()) throw std::invalid_argument("backward: batch must be nonempty");
    const std::size_t n = batch.size();

    BackwardResult result;
    result.grads = GradientSet::zeros_like(net);

    threads = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (threads == 1) {
        for (const auto& x : batch) result.loss += backward_one(net, x, &result.grads);
    } else {
        // Contiguous sample ranges per worker; partial sums are reduced in
        // worker-index order so the result is deterministic for a fixed
        // thread count.
        std::vector<GradientSet> partial_grads(threads);
        std::vector<double> partial_loss(threads, 0.0);
        std::vector<std::thread> workers;
        workers.reserve(threads);
        const std::size_t chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            partial_grads[t] = GradientSet::zeros_like(net);
            workers.emplace_back([&, t] {
                const std::size_t begin = t * chunk;
                const std::size_t end = std::min(n, begin + chunk);
                for (std::size_t i = begin; i < end; ++i) {
                    partial_loss[t] += backward_one(net, batch[i], &partial_grads[t]);
                }
            });
        }
        for (auto& w : workers) w.join();
        for (int t = 0; t < threads; ++t) {
            result.loss += partial_loss[t];
            result.grads.accumulate(partial_grads[t]);
        }
    }

    const double count = static_cast<double>(n);
    result.loss += 0.5 * count * net.dim() * kLog2Pi - gamma * count * diag_log_sum(net);

    // d/du_dd of the -gamma*N*sum ln|u_dd| term.
    for (int m = 0; m < net.depth(); ++m) {
        const auto& u = net.layer(m).u;
        auto& du = result.grads.layers[m].du;
        std::size_t row_start = 0;
        for (int d = 0; d < net.dim(); ++d) {
            du[row_start] -= gamma * count / u.diag(d);
            row_start += net.dim() - d;
        }
    }
    return result;
}

std::vector<std::vector<double>> sample(const LUNet& net, int count, std::uint64_t seed) {
    if (count < 0) throw std::invalid_argument("sample: count must be >= 0");
    Rng rng(seed);
    std::vector<std::vector<double>> out;
    out.reserve(count);
    std::vector<double> z(net.dim());
    for (int i = 0; i < count; ++i) {
        for (auto& v : z) v = rng.normal();
        out.push_back(inverse(net, z));
    }
    return out;
}

std::vector<std::vector<double>> interpolate(const LUNet& net, std::span<const double> x_a,
                                             std::span<const double> x_b, int steps) {
    if (steps < 2) throw std::invalid_argument("interpolate: steps must be >= 2");
    const std::vector<double> z_a = forward(net, x_a);
    const std::vector<double> z_b = forward(net, x_b);
    std::vector<std::vector<double>> frames;
    frames.reserve(steps);
    std::vector<double> z(net.dim());
    for (int k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) / (steps - 1);
        for (int d = 0; d < net.dim(); ++d) z[d] = (1.0 - t) * z_a[d] + t * z_b[d];
        frames.push_back(inverse(net, z));
    }
    return frames;
}

}  // namespace lunet
