#include "lunet/activation.hpp"

#include <algorithm>
#include <cmath>

#include "lunet/errors.hpp"

namespace lunet {

namespace {

// ln(1+exp(x)) without overflow; the branch at x=30 keeps full precision in
// both tails.
double softplus(double x) {
    if (x > 30.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

double act(const ActivationKind& kind, double x) {
    if (kind.is_identity()) return x;
    return kind.alpha * x + (1.0 - kind.alpha) * softplus(x);
}

double act_prime(const ActivationKind& kind, double x) {
    if (kind.is_identity()) return 1.0;
    return kind.alpha + (1.0 - kind.alpha) * sigmoid(x);
}

double act_second(const ActivationKind& kind, double x) {
    if (kind.is_identity()) return 0.0;
    const double s = sigmoid(x);
    return (1.0 - kind.alpha) * s * (1.0 - s);
}

double act_inverse(const ActivationKind& kind, double y, double tol) {
    if (kind.is_identity()) return y;
    const double alpha = kind.alpha;
    const double gap = (1.0 - alpha) * std::log(2.0);

    // Bounds from x < softplus(x) < max(x,0) + ln 2:
    //   x >= 0: x < act(x) < x + gap,  x < 0: alpha*x < act(x) < alpha*x + gap.
    double lo = std::min(y - gap, (y - gap) / alpha);
    double hi = std::max(y, y / alpha);

    double x = y >= 0.0 ? y : y / alpha;
    const double target_tol = tol * std::max(1.0, std::abs(y));
    for (int it = 0; it < 100; ++it) {
        const double residual = act(kind, x) - y;
        if (std::abs(residual) <= target_tol) return x;
        if (residual > 0.0) {
            hi = std::min(hi, x);
        } else {
            lo = std::max(lo, x);
        }
        double next = x - residual / act_prime(kind, x);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
        x = next;
    }
    throw NoConvergence("act_inverse: Newton iteration did not reach tolerance for y=" +
                        std::to_string(y));
}

}  // namespace lunet
