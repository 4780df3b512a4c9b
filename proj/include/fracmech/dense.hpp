#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace fracmech {

// Row-major dense matrix of doubles.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill)
    {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j)
    {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }
    double operator()(std::size_t i, std::size_t j) const
    {
        assert(i < rows_ && j < cols_);
        return data_[i * cols_ + j];
    }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    std::vector<double> operator*(std::span<const double> x) const
    {
        assert(x.size() == cols_);
        std::vector<double> y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double acc = 0.0;
            const double* r = data_.data() + i * cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                acc += r[j] * x[j];
            }
            y[i] = acc;
        }
        return y;
    }

    DenseMatrix operator*(const DenseMatrix& other) const
    {
        assert(cols_ == other.rows_);
        DenseMatrix out(rows_, other.cols_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(i, k);
                if (a == 0.0) {
                    continue;
                }
                for (std::size_t j = 0; j < other.cols_; ++j) {
                    out(i, j) += a * other(k, j);
                }
            }
        }
        return out;
    }

    bool operator==(const DenseMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace fracmech
