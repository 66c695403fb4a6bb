#pragma once

#include "pmtc/tensor.hpp"

namespace pmtc {

// p × r matrix with orthonormal columns (r ≤ p).
class OrthonormalBasis {
public:
    static constexpr double kTolerance = 1e-10;

    OrthonormalBasis() = default;
    // Throws std::invalid_argument if ‖UᵀU − I‖_max exceeds kTolerance.
    explicit OrthonormalBasis(Matrix columns);

    const Matrix& matrix() const { return u_; }
    Eigen::Index rows() const { return u_.rows(); }
    Eigen::Index cols() const { return u_.cols(); }

    // U Uᵀ
    Matrix projector() const { return u_ * u_.transpose(); }

private:
    Matrix u_;
};

// Top-r left singular vectors of a.  Each column is sign-normalized so that
// its largest-magnitude entry (lowest row index on ties) is positive.
OrthonormalBasis lsvd(const Matrix& a, Eigen::Index r);

// Same as lsvd, also returning the leading r singular values.
struct TruncatedSvd {
    OrthonormalBasis basis;
    Vector singular_values;
};
TruncatedSvd truncated_svd(const Matrix& a, Eigen::Index r);

// ‖ÛÛᵀ − UUᵀ‖₂, the sine of the largest principal angle.
double subspace_distance(const OrthonormalBasis& u, const OrthonormalBasis& v);

}  // namespace pmtc
