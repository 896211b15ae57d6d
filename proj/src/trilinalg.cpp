#include "lunet/trilinalg.hpp"

#include <cmath>
#include <string>

#include "lunet/rng.hpp"

namespace lunet {

namespace {

void check_dim(int dim, std::size_t got, const char* what) {
    if (got != static_cast<std::size_t>(dim)) {
        throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(dim) +
                                ", got " + std::to_string(got));
    }
}

}  // namespace

UnitLowerTriangular::UnitLowerTriangular(int dim) : dim_(dim) {
    if (dim < 1) throw DimensionMismatch("UnitLowerTriangular: dim must be positive");
    strict_.assign(packed_size(dim), 0.0);
}

std::vector<double> UnitLowerTriangular::to_dense() const {
    std::vector<double> dense(static_cast<std::size_t>(dim_) * dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
        dense[static_cast<std::size_t>(i) * dim_ + i] = 1.0;
        for (int j = 0; j < i; ++j) {
            dense[static_cast<std::size_t>(i) * dim_ + j] = strict_at(i, j);
        }
    }
    return dense;
}

UpperTriangular::UpperTriangular(int dim) : dim_(dim) {
    if (dim < 1) throw DimensionMismatch("UpperTriangular: dim must be positive");
    upper_.assign(packed_size(dim), 0.0);
    for (int i = 0; i < dim; ++i) diag(i) = 1.0;
}

std::vector<double> UpperTriangular::to_dense() const {
    std::vector<double> dense(static_cast<std::size_t>(dim_) * dim_, 0.0);
    for (int i = 0; i < dim_; ++i) {
        for (int j = i; j < dim_; ++j) {
            dense[static_cast<std::size_t>(i) * dim_ + j] = at(i, j);
        }
    }
    return dense;
}

void matvec(const UnitLowerTriangular& lower, std::span<const double> x, std::span<double> y) {
    const int dim = lower.dim();
    check_dim(dim, x.size(), "matvec(L, x)");
    check_dim(dim, y.size(), "matvec(L, y)");
    const double* row = lower.packed().data();
    for (int i = 0; i < dim; ++i) {
        double acc = x[i];
        for (int j = 0; j < i; ++j) acc += row[j] * x[j];
        y[i] = acc;
        row += i;
    }
}

void matvec(const UpperTriangular& upper, std::span<const double> x, std::span<double> y) {
    const int dim = upper.dim();
    check_dim(dim, x.size(), "matvec(U, x)");
    check_dim(dim, y.size(), "matvec(U, y)");
    const double* row = upper.packed().data();
    for (int i = 0; i < dim; ++i) {
        double acc = 0.0;
        for (int j = i; j < dim; ++j) acc += row[j - i] * x[j];
        y[i] = acc;
        row += dim - i;
    }
}

void matvec_transposed(const UnitLowerTriangular& lower, std::span<const double> x,
                       std::span<double> y) {
    const int dim = lower.dim();
    check_dim(dim, x.size(), "matvec_transposed(L, x)");
    check_dim(dim, y.size(), "matvec_transposed(L, y)");
    for (int j = 0; j < dim; ++j) y[j] = x[j];
    const double* row = lower.packed().data();
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < i; ++j) y[j] += row[j] * x[i];
        row += i;
    }
}

void matvec_transposed(const UpperTriangular& upper, std::span<const double> x,
                       std::span<double> y) {
    const int dim = upper.dim();
    check_dim(dim, x.size(), "matvec_transposed(U, x)");
    check_dim(dim, y.size(), "matvec_transposed(U, y)");
    for (int j = 0; j < dim; ++j) y[j] = 0.0;
    const double* row = upper.packed().data();
    for (int i = 0; i < dim; ++i) {
        for (int j = i; j < dim; ++j) y[j] += row[j - i] * x[i];
        row += dim - i;
    }
}

void solve(const UnitLowerTriangular& lower, std::span<const double> rhs, std::span<double> out) {
    const int dim = lower.dim();
    check_dim(dim, rhs.size(), "solve(L, rhs)");
    check_dim(dim, out.size(), "solve(L, out)");
    const double* row = lower.packed().data();
    for (int i = 0; i < dim; ++i) {
        double acc = rhs[i];
        for (int j = 0; j < i; ++j) acc -= row[j] * out[j];
        out[i] = acc;
        row += i;
    }
}

void solve(const UpperTriangular& upper, std::span<const double> rhs, std::span<double> out) {
    const int dim = upper.dim();
    check_dim(dim, rhs.size(), "solve(U, rhs)");
    check_dim(dim, out.size(), "solve(U, out)");
    for (int i = 0; i < dim; ++i) {
        if (std::abs(upper.diag(i)) < kDiagEps) throw NearSingularDiagonal(i, upper.diag(i));
    }
    for (int i = dim - 1; i >= 0; --i) {
        double acc = rhs[i];
        for (int j = i + 1; j < dim; ++j) acc -= upper.at(i, j) * out[j];
        out[i] = acc / upper.diag(i);
    }
}

void solve_transposed(const UnitLowerTriangular& lower, std::span<const double> rhs,
                      std::span<double> out) {
    // L^T is unit upper triangular; back substitution, no division needed.
    const int dim = lower.dim();
    check_dim(dim, rhs.size(), "solve_transposed(L, rhs)");
    check_dim(dim, out.size(), "solve_transposed(L, out)");
    for (int i = dim - 1; i >= 0; --i) {
        double acc = rhs[i];
        for (int j = i + 1; j < dim; ++j) acc -= lower.strict_at(j, i) * out[j];
        out[i] = acc;
    }
}

void solve_transposed(const UpperTriangular& upper, std::span<const double> rhs,
                      std::span<double> out) {
    // U^T is lower triangular; forward substitution.
    const int dim = upper.dim();
    check_dim(dim, rhs.size(), "solve_transposed(U, rhs)");
    check_dim(dim, out.size(), "solve_transposed(U, out)");
    for (int i = 0; i < dim; ++i) {
        if (std::abs(upper.diag(i)) < kDiagEps) throw NearSingularDiagonal(i, upper.diag(i));
    }
    for (int i = 0; i < dim; ++i) {
        double acc = rhs[i];
        for (int j = 0; j < i; ++j) acc -= upper.at(j, i) * out[j];
        out[i] = acc / upper.diag(i);
    }
}

std::vector<double> matvec(const UnitLowerTriangular& lower, std::span<const double> x) {
    std::vector<double> y(x.size());
    matvec(lower, x, y);
    return y;
}

std::vector<double> matvec(const UpperTriangular& upper, std::span<const double> x) {
    std::vector<double> y(x.size());
    matvec(upper, x, y);
    return y;
}

std::vector<double> solve(const UnitLowerTriangular& lower, std::span<const double> rhs) {
    std::vector<double> y(rhs.size());
    solve(lower, rhs, y);
    return y;
}

std::vector<double> solve(const UpperTriangular& upper, std::span<const double> rhs) {
    std::vector<double> y(rhs.size());
    solve(upper, rhs, y);
    return y;
}

PowerIterationResult spectral_norm(const LinearOp& apply, const LinearOp& apply_transpose,
                                   int dim, std::uint64_t seed, double tol, int max_iter) {
    Rng rng(seed);
    std::vector<double> q(dim), w(dim), t(dim);
    double norm_sq = 0.0;
    for (auto& v : q) {
        v = rng.normal();
        norm_sq += v * v;
    }
    const double inv_norm = 1.0 / std::sqrt(norm_sq);
    for (auto& v : q) v *= inv_norm;

    PowerIterationResult result;
    double prev_sigma = -1.0;
    for (int it = 1; it <= max_iter; ++it) {
        result.iterations = it;
        apply(q, w);
        apply_transpose(w, t);  // t = A^T A q
        double rayleigh = 0.0;
        for (int i = 0; i < dim; ++i) rayleigh += q[i] * t[i];
        const double sigma = std::sqrt(std::max(rayleigh, 0.0));
        result.value = sigma;
        if (it > 1 && std::abs(sigma - prev_sigma) < tol) {
            result.converged = true;
            return result;
        }
        prev_sigma = sigma;
        double t_norm = 0.0;
        for (int i = 0; i < dim; ++i) t_norm += t[i] * t[i];
        t_norm = std::sqrt(t_norm);
        if (t_norm == 0.0) {
            // q lies in the null space of A^T A; the operator is singular
            // along this direction and the estimate cannot improve.
            result.converged = true;
            return result;
        }
        for (int i = 0; i < dim; ++i) q[i] = t[i] / t_norm;
    }
    return result;
}

double condition_number(const UpperTriangular& upper, std::uint64_t seed) {
    const int dim = upper.dim();
    for (int i = 0; i < dim; ++i) {
        if (std::abs(upper.diag(i)) < kDiagEps) throw NearSingularDiagonal(i, upper.diag(i));
    }
    const auto norm = spectral_norm(
        [&](std::span<const double> x, std::span<double> y) { matvec(upper, x, y); },
        [&](std::span<const double> x, std::span<double> y) { matvec_transposed(upper, x, y); },
        dim, seed);
    const auto inv_norm = spectral_norm(
        [&](std::span<const double> x, std::span<double> y) { solve(upper, x, y); },
        [&](std::span<const double> x, std::span<double> y) { solve_transposed(upper, x, y); },
        dim, derive_seed(seed, 1));
    return norm.value * inv_norm.value;
}

double condition_number(const UnitLowerTriangular& lower, std::uint64_t seed) {
    const int dim = lower.dim();
    const auto norm = spectral_norm(
        [&](std::span<const double> x, std::span<double> y) { matvec(lower, x, y); },
        [&](std::span<const double> x, std::span<double> y) { matvec_transposed(lower, x, y); },
        dim, seed);
    const auto inv_norm = spectral_norm(
        [&](std::span<const double> x, std::span<double> y) { solve(lower, x, y); },
        [&](std::span<const double> x, std::span<double> y) { solve_transposed(lower, x, y); },
        dim, derive_seed(seed, 1));
    return norm.value * inv_norm.value;
}

}  // namespace lunet
