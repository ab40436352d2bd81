#pragma once

#include <stdexcept>
#include <string>

namespace cfair {

/// Shape disagreement between an operand and what the operation expects.
/// `layer` is >= 0 when the mismatch can be pinned to a specific MLP layer.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& what, int layer = -1)
        : std::runtime_error(what), layer_(layer) {}
    int layer() const { return layer_; }

private:
    int layer_;
};

/// Input value outside the operation's domain (e.g. a' outside Omega_A).
class DomainError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A variant/mitigation combination the method does not support,
/// e.g. group-MMD constraints with a continuous sensitive attribute
/// (CLI exit code 3).
class UnsupportedVariantError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-finite value encountered during computation (CLI exit code 4).
class NumericError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or missing data (empty sample, missing column, ...).
class DataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested a measurement the inputs cannot support
/// (e.g. RealCF without ground-truth codes).
class CapabilityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cfair
