#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace pmtc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Dense real tensor of arbitrary order.
//
// Storage is column-major over the index tuple (first index fastest), so the
// mode-1 unfolding is a plain reshape of the buffer.  Modes are 0-based in the
// API: mode 0 is the first (coupled) mode.
//
// The mode-k unfolding orders its columns cyclically over the remaining
// modes, k+1, k+2, ..., K-1, 0, ..., k-1, with the first of these varying
// fastest.  For an order-3 tensor this gives
//   mat_0(A)(i, j + n1*k) = mat_1(A)(j, k + n2*i) = mat_2(A)(k, i + n0*j) = A(i,j,k).
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(std::vector<std::size_t> dims);
    DenseTensor(std::vector<std::size_t> dims, std::vector<double> data);

    std::size_t order() const { return dims_.size(); }
    const std::vector<std::size_t>& dims() const { return dims_; }
    std::size_t dim(std::size_t mode) const { return dims_.at(mode); }
    std::size_t size() const { return data_.size(); }

    std::span<const double> data() const { return data_; }
    std::span<double> data() { return data_; }

    double& operator()(std::span<const std::size_t> index);
    double operator()(std::span<const std::size_t> index) const;
    double& at(std::initializer_list<std::size_t> index);
    double at(std::initializer_list<std::size_t> index) const;

    std::size_t linear_index(std::span<const std::size_t> index) const;

    // Zero-copy view of the mode-0 unfolding.
    Eigen::Map<const Matrix> mode0_view() const;

    double squared_norm() const;

    friend bool operator==(const DenseTensor&, const DenseTensor&) = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<double> data_;
};

std::size_t product(std::span<const std::size_t> dims);

Matrix matricize(const DenseTensor& x, std::size_t mode);

DenseTensor refold(const Matrix& m, std::size_t mode, std::vector<std::size_t> dims);

// x ×_mode u, with u of shape (r × dims[mode]).
DenseTensor mode_product(const DenseTensor& x, std::size_t mode, const Matrix& u);

// x ×_mode u^T for u of shape (dims[mode] × r); avoids materializing the
// transpose in the projection-heavy loops.
DenseTensor mode_product_transposed(const DenseTensor& x, std::size_t mode, const Matrix& u);

}  // namespace pmtc
