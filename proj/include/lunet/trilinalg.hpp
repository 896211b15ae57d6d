#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "lunet/errors.hpp"

namespace lunet {

// Back substitution refuses diagonal entries below this magnitude.
inline constexpr double kDiagEps = 1e-12;

// Unit-lower-triangular D x D matrix. Only the strict lower triangle is
// stored (row-major, row i holds entries (i,0)..(i,i-1)); the diagonal is
// an implicit 1.
class UnitLowerTriangular {
public:
    explicit UnitLowerTriangular(int dim);

    static std::size_t packed_size(int dim) {
        return static_cast<std::size_t>(dim) * (dim - 1) / 2;
    }

    int dim() const { return dim_; }

    double strict_at(int i, int j) const { return strict_[index(i, j)]; }
    double& strict_at(int i, int j) { return strict_[index(i, j)]; }

    std::span<const double> packed() const { return strict_; }
    std::span<double> packed() { return strict_; }

    // Row-major dense copy including the unit diagonal.
    std::vector<double> to_dense() const;

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * (i - 1) / 2 + j;
    }

    int dim_;
    std::vector<double> strict_;
};

// Upper-triangular D x D matrix stored packed row-major: row i holds
// entries (i,i)..(i,D-1).
class UpperTriangular {
public:
    explicit UpperTriangular(int dim);  // starts as the identity

    static std::size_t packed_size(int dim) {
        return static_cast<std::size_t>(dim) * (dim + 1) / 2;
    }

    int dim() const { return dim_; }

    double at(int i, int j) const { return upper_[index(i, j)]; }
    double& at(int i, int j) { return upper_[index(i, j)]; }

    double diag(int i) const { return upper_[row_start(i)]; }
    double& diag(int i) { return upper_[row_start(i)]; }

    std::span<const double> packed() const { return upper_; }
    std::span<double> packed() { return upper_; }

    std::vector<double> to_dense() const;

private:
    std::size_t row_start(int i) const {
        return static_cast<std::size_t>(i) * dim_ - static_cast<std::size_t>(i) * (i - 1) / 2;
    }
    std::size_t index(int i, int j) const { return row_start(i) + (j - i); }

    int dim_;
    std::vector<double> upper_;
};

// y = L x. Buffers must not alias.
void matvec(const UnitLowerTriangular& lower, std::span<const double> x, std::span<double> y);
// y = U x.
void matvec(const UpperTriangular& upper, std::span<const double> x, std::span<double> y);
// y = L^T x and y = U^T x (needed by the power iteration).
void matvec_transposed(const UnitLowerTriangular& lower, std::span<const double> x,
                       std::span<double> y);
void matvec_transposed(const UpperTriangular& upper, std::span<const double> x,
                       std::span<double> y);

// Forward substitution: solves L y = rhs in O(D^2). In-place (out == rhs) is fine.
void solve(const UnitLowerTriangular& lower, std::span<const double> rhs, std::span<double> out);
// Back substitution: solves U x = rhs. Throws NearSingularDiagonal if any
// |u_dd| < kDiagEps.
void solve(const UpperTriangular& upper, std::span<const double> rhs, std::span<double> out);
// Transposed solves: L^T y = rhs (back substitution), U^T x = rhs (forward).
void solve_transposed(const UnitLowerTriangular& lower, std::span<const double> rhs,
                      std::span<double> out);
void solve_transposed(const UpperTriangular& upper, std::span<const double> rhs,
                      std::span<double> out);

// Allocating convenience wrappers.
std::vector<double> matvec(const UnitLowerTriangular& lower, std::span<const double> x);
std::vector<double> matvec(const UpperTriangular& upper, std::span<const double> x);
std::vector<double> solve(const UnitLowerTriangular& lower, std::span<const double> rhs);
std::vector<double> solve(const UpperTriangular& upper, std::span<const double> rhs);

using LinearOp = std::function<void(std::span<const double>, std::span<double>)>;

struct PowerIterationResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Estimates ||A||_2 by power iteration on A^T A, given only the action of A
// and A^T. Stops when successive Rayleigh-quotient square roots differ by
// less than tol. The start vector is a pseudo-random unit vector drawn from
// seed, so results are reproducible.
PowerIterationResult spectral_norm(const LinearOp& apply, const LinearOp& apply_transpose,
                                   int dim, std::uint64_t seed = 0, double tol = 1e-10,
                                   int max_iter = 10000);

// kappa(A) = ||A||_2 * ||A^-1||_2. The inverse norm runs the power iteration
// on the substitution solver; the inverse matrix is never formed.
double condition_number(const UpperTriangular& upper, std::uint64_t seed = 0);
double condition_number(const UnitLowerTriangular& lower, std::uint64_t seed = 0);

}  // namespace lunet
