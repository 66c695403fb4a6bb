#pragma once

#include "pmtc/tensor.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace pmtc {

// A (d+1)-order characteristics tensor X (p1 × … × pd × T) and a p1 × T
// outcome panel Y sharing the first mode.  The trailing mode of X is time
// and is never clustered or compressed.
struct CoupledData {
    DenseTensor x;
    Matrix y;

    // Number of clustered modes d.
    std::size_t num_modes() const { return x.order() == 0 ? 0 : x.order() - 1; }
    std::size_t periods() const { return x.order() == 0 ? 0 : x.dims().back(); }
};

// Which blocks feed the mode-1 (coupled) computations.
enum class Source {
    coupled,      // [√ω·mat₁(X…), Y]
    tensor_only,  // mat₁(X…) alone
};

// Throws ShapeError unless X has order ≥ 2 and, for coupled use, Y is p1 × T.
void validate(const CoupledData& data, Source source);

// X ×_j F_jᵀ for every clustered mode j ≠ skip; factors[j] is p_j × r_j.
// Pass skip = factors.size() to project every clustered mode.
DenseTensor project_modes(const DenseTensor& x, std::span<const Matrix> factors, std::size_t skip);

// Mode-1 working matrix: [√ω·mat₁(projected), Y] when coupled, mat₁(projected)
// otherwise.
Matrix coupled_unfolding(const DenseTensor& projected, const Matrix& y, double omega, Source source);

}  // namespace pmtc
