#pragma once

#include <stdexcept>

namespace lunet {

// Elementwise activation of an LU layer: leaky softplus
// alpha*x + (1-alpha)*ln(1+exp(x)) on hidden layers, identity on the output
// layer. Leaky softplus is strictly increasing with derivative in (alpha, 1),
// so it is globally invertible and twice differentiable.
struct ActivationKind {
    enum class Tag { leaky_softplus, identity };

    Tag tag = Tag::leaky_softplus;
    double alpha = 0.1;

    static ActivationKind leaky_softplus(double alpha = 0.1) {
        if (!(alpha > 0.0 && alpha < 1.0)) {
            throw std::invalid_argument("leaky softplus alpha must lie strictly in (0, 1)");
        }
        return {Tag::leaky_softplus, alpha};
    }
    static ActivationKind identity() { return {Tag::identity, 0.0}; }

    bool is_identity() const { return tag == Tag::identity; }
};

double act(const ActivationKind& kind, double x);
double act_prime(const ActivationKind& kind, double x);
double act_second(const ActivationKind& kind, double x);

// Inverse of act, by safeguarded Newton iteration (no closed form exists in
// elementary functions). Accepts any finite y; |act(x)-y| <= tol*max(1,|y|).
// Throws NoConvergence if 100 iterations do not suffice.
double act_inverse(const ActivationKind& kind, double y, double tol = 1e-12);

}  // namespace lunet
