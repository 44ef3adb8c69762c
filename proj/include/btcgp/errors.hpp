#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace btcgp {

/// Base class for all btcgp exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input matrix violates the symmetry tolerance.
class AsymmetricInput : public Error {
public:
    using Error::Error;
};

/// Requested bandwidth is negative or exceeds n-1.
class BandwidthOutOfRange : public Error {
public:
    using Error::Error;
};

/// Operand shapes do not agree.
class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// Adjacent input locations coincide (or are unsorted).
class DuplicatePoints : public Error {
public:
    using Error::Error;
};

/// Fewer points than the operation requires.
class TooFewPoints : public Error {
public:
    using Error::Error;
};

/// Hyperparameters or scalar arguments outside their domain.
class InvalidParams : public Error {
public:
    using Error::Error;
};

/// Observations are constant where variability is required.
class ZeroVariance : public Error {
public:
    using Error::Error;
};

/// Metric denominator is zero because the targets are constant.
class ConstantTarget : public Error {
public:
    using Error::Error;
};

/// Observation noise was already added to this distribution.
class AlreadyNoised : public Error {
public:
    using Error::Error;
};

/// Operation requires a distribution with observation noise included.
class MissingNoise : public Error {
public:
    using Error::Error;
};

/// Matrix exceeds the configured limit for dense diagnostics.
class TooLargeForDenseCheck : public Error {
public:
    using Error::Error;
};

/// Optimization could not recover from a positive-definiteness loss.
class PdFailure : public Error {
public:
    using Error::Error;
};

/// Loss evaluated to NaN or infinity.
class NonFiniteLoss : public Error {
public:
    using Error::Error;
};

/// Malformed CSV input.
class CsvError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent configuration / model file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Cholesky pivot was non-positive or non-finite. Carries the index of the
/// failing pivot; this is the runtime positive-definiteness detector.
class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(std::ptrdiff_t pivot_index)
        : Error("matrix not positive definite at pivot " + std::to_string(pivot_index)),
          pivot_index_(pivot_index) {}

    std::ptrdiff_t pivot_index() const noexcept { return pivot_index_; }

private:
    std::ptrdiff_t pivot_index_;
};

}  // namespace btcgp
