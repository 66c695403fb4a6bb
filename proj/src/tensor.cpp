#include "pmtc/tensor.hpp"

#include "pmtc/errors.hpp"

#include <functional>
#include <numeric>
#include <string>

namespace pmtc {

namespace {

void check_mode(const DenseTensor& x, std::size_t mode) {
    if (mode >= x.order()) {
        throw std::out_of_range("mode " + std::to_string(mode) + " out of range for order-" +
                                std::to_string(x.order()) + " tensor");
    }
}

struct ModeSplit {
    std::size_t left;   // product of dims before the mode
    std::size_t size;   // dims[mode]
    std::size_t right;  // product of dims after the mode
};

ModeSplit split_at(const std::vector<std::size_t>& dims, std::size_t mode) {
    ModeSplit s{1, dims[mode], 1};
    for (std::size_t j = 0; j < mode; ++j) s.left *= dims[j];
    for (std::size_t j = mode + 1; j < dims.size(); ++j) s.right *= dims[j];
    return s;
}

}  // namespace

std::size_t product(std::span<const std::size_t> dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    for (auto d : dims_) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
    }
    data_.assign(product(dims_), 0.0);
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<double> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    for (auto d : dims_) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
    }
    if (product(dims_) != data_.size()) {
        throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                         " does not match product of dims " + std::to_string(product(dims_)));
    }
}

std::size_t DenseTensor::linear_index(std::span<const std::size_t> index) const {
    if (index.size() != dims_.size()) throw ShapeError("index arity does not match tensor order");
    std::size_t lin = 0;
    std::size_t stride = 1;
    for (std::size_t j = 0; j < dims_.size(); ++j) {
        if (index[j] >= dims_[j]) throw std::out_of_range("tensor index out of range");
        lin += index[j] * stride;
        stride *= dims_[j];
    }
    return lin;
}

double& DenseTensor::operator()(std::span<const std::size_t> index) { return data_[linear_index(index)]; }
double DenseTensor::operator()(std::span<const std::size_t> index) const { return data_[linear_index(index)]; }

double& DenseTensor::at(std::initializer_list<std::size_t> index) {
    return data_[linear_index(std::span(index.begin(), index.size()))];
}
double DenseTensor::at(std::initializer_list<std::size_t> index) const {
    return data_[linear_index(std::span(index.begin(), index.size()))];
}

Eigen::Map<const Matrix> DenseTensor::mode0_view() const {
    const auto rows = static_cast<Eigen::Index>(dims_.at(0));
    return {data_.data(), rows, static_cast<Eigen::Index>(data_.size()) / rows};
}

double DenseTensor::squared_norm() const {
    return Eigen::Map<const Vector>(data_.data(), static_cast<Eigen::Index>(data_.size())).squaredNorm();
}

// With L = prod(dims[<k]), R = prod(dims[>k]), the buffer offset of
// (l, i_k, r) is l + L*(i_k + n_k*r) and its unfolding column is r + R*l.
Matrix matricize(const DenseTensor& x, std::size_t mode) {
    check_mode(x, mode);
    if (mode == 0) return x.mode0_view();
    const auto s = split_at(x.dims(), mode);
    Matrix out(s.size, s.left * s.right);
    const double* src = x.data().data();
    for (std::size_t r = 0; r < s.right; ++r) {
        for (std::size_t i = 0; i < s.size; ++i) {
            const double* fiber = src + s.left * (i + s.size * r);
            for (std::size_t l = 0; l < s.left; ++l) {
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r + s.right * l)) = fiber[l];
            }
        }
    }
    return out;
}

DenseTensor refold(const Matrix& m, std::size_t mode, std::vector<std::size_t> dims) {
    if (mode >= dims.size()) throw std::out_of_range("refold mode out of range");
    for (auto d : dims) {
        if (d == 0) throw ShapeError("tensor dimensions must be positive");
    }
    const auto s = split_at(dims, mode);
    if (static_cast<std::size_t>(m.rows()) != s.size ||
        static_cast<std::size_t>(m.cols()) != s.left * s.right) {
        throw ShapeError("refold: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", expected " + std::to_string(s.size) + "x" + std::to_string(s.left * s.right));
    }
    DenseTensor out(std::move(dims));
    double* dst = out.data().data();
    for (std::size_t r = 0; r < s.right; ++r) {
        for (std::size_t i = 0; i < s.size; ++i) {
            double* fiber = dst + s.left * (i + s.size * r);
            for (std::size_t l = 0; l < s.left; ++l) {
                fiber[l] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(r + s.right * l));
            }
        }
    }
    return out;
}

namespace {

// Shared kernel: contracts mode `mode` of x with the rows of `factor_t`,
// where factor_t has shape (dims[mode] × r), i.e. computes x ×_mode factor_t^T.
template <typename FactorT>
DenseTensor contract_mode(const DenseTensor& x, std::size_t mode, const FactorT& factor_t) {
    check_mode(x, mode);
    const auto s = split_at(x.dims(), mode);
    if (static_cast<std::size_t>(factor_t.rows()) != s.size) {
        throw ShapeError("mode_product: factor has " + std::to_string(factor_t.rows()) +
                         " columns, tensor mode " + std::to_string(mode) + " has size " + std::to_string(s.size));
    }
    const auto r = static_cast<std::size_t>(factor_t.cols());
    auto dims = x.dims();
    dims[mode] = r;
    DenseTensor out(std::move(dims));
    const double* src = x.data().data();
    double* dst = out.data().data();
    const auto L = static_cast<Eigen::Index>(s.left);
    const auto n = static_cast<Eigen::Index>(s.size);
    const auto rr = static_cast<Eigen::Index>(r);
    if (s.left == 1) {
        Eigen::Map<const Matrix> in(src, n, static_cast<Eigen::Index>(s.right));
        Eigen::Map<Matrix> res(dst, rr, static_cast<Eigen::Index>(s.right));
        res.noalias() = factor_t.transpose() * in;
        return out;
    }
    for (std::size_t slice = 0; slice < s.right; ++slice) {
        Eigen::Map<const Matrix> in(src + slice * s.left * s.size, L, n);
        Eigen::Map<Matrix> res(dst + slice * s.left * r, L, rr);
        res.noalias() = in * factor_t;
    }
    return out;
}

}  // namespace

DenseTensor mode_product(const DenseTensor& x, std::size_t mode, const Matrix& u) {
    return contract_mode(x, mode, u.transpose());
}

DenseTensor mode_product_transposed(const DenseTensor& x, std::size_t mode, const Matrix& u) {
    return contract_mode(x, mode, u);
}

}  // namespace pmtc
