#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lunet {

// Thrown when a vector length does not match the matrix or net dimension.
class DimensionMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Back substitution (or anything needing 1/u_dd) found |u_dd| below diag_eps.
class NearSingularDiagonal : public std::runtime_error {
public:
    NearSingularDiagonal(int index, double value)
        : std::runtime_error("near-singular diagonal entry u[" + std::to_string(index) +
                             "][" + std::to_string(index) + "] = " + std::to_string(value)),
          index_(index), value_(value) {}
    int index() const { return index_; }
    double value() const { return value_; }

private:
    int index_;
    double value_;
};

// An iterative routine (activation inverse) failed to reach its tolerance.
class NoConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A forward pass produced a NaN or infinity; layer_index identifies where.
class NonFinite : public std::runtime_error {
public:
    explicit NonFinite(int layer_index)
        : std::runtime_error("non-finite value after layer " + std::to_string(layer_index)),
          layer_index_(layer_index) {}
    int layer_index() const { return layer_index_; }

private:
    int layer_index_;
};

// Training loss became non-finite.
class Diverged : public std::runtime_error {
public:
    Diverged(int epoch, int batch_index)
        : std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batch_index)),
          epoch_(epoch), batch_index_(batch_index) {}
    int epoch() const { return epoch_; }
    int batch_index() const { return batch_index_; }

private:
    int epoch_;
    int batch_index_;
};

// File-format errors (IDX reader, checkpoint reader).
class BadMagic : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimMismatch : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TruncatedFile : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class EmptyClass : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lunet
