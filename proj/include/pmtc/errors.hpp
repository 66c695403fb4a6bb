#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmtc {

// Dimension or shape disagreement between arguments.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A membership has a cluster with no members where one is required.
class EmptyClusterError : public std::runtime_error {
public:
    explicit EmptyClusterError(std::size_t cluster)
        : std::runtime_error("EmptyCluster(" + std::to_string(cluster + 1) + ")"), cluster_(cluster) {}
    // 0-based cluster index.
    std::size_t cluster() const { return cluster_; }

private:
    std::size_t cluster_;
};

// Input is well-formed but carries no usable signal (zero spectrum,
// singular Gram matrix, zero denominator, ...).
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace pmtc
