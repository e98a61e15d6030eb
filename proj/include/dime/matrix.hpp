#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dime {

// Dense row-major n x d sample matrix: one row per sample.
class DataMatrix {
public:
    // Zero-filled. rows >= 1, cols >= 1.
    DataMatrix(std::size_t rows, std::size_t cols);
    // Takes ownership of `values` (row-major, rows*cols entries, all finite).
    DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

    std::span<const double> row(std::size_t i) const {
        return {v_.data() + i * cols_, cols_};
    }

    const std::vector<double>& values() const { return v_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> v_;
};

class GramMatrix;

namespace detail {
// Internal factory for code paths that guarantee the invariants by
// construction (kernel evaluation, Hadamard, entrywise power, permutation
// gather); skips the O(n^2) re-validation.
GramMatrix make_gram_unchecked(std::size_t n, std::vector<double> values);
}  // namespace detail

// Dense symmetric kernel matrix with unit diagonal and entries in [0, 1].
// Positive semidefiniteness is not checked here (that costs an
// eigendecomposition); spectrum() reports a numerical error if violated.
class GramMatrix {
public:
    // Validates: square data, exact symmetry, diagonal exactly 1, entries
    // in [0, 1], everything finite. Throws ValidationError otherwise.
    static GramMatrix from_values(std::size_t n, std::vector<double> values);
    static GramMatrix identity(std::size_t n);
    static GramMatrix ones(std::size_t n);

    std::size_t size() const { return n_; }

    double operator()(std::size_t i, std::size_t j) const { return v_[i * n_ + j]; }

    const double* data() const { return v_.data(); }
    const std::vector<double>& values() const { return v_; }

private:
    GramMatrix(std::size_t n, std::vector<double> values)
        : n_(n), v_(std::move(values)) {}
    friend GramMatrix detail::make_gram_unchecked(std::size_t, std::vector<double>);

    std::size_t n_;
    std::vector<double> v_;
};

// Cached pairwise distances for one sample set, in the metric the kernel
// family consumes (squared L2 for Gaussian, L1/L2 for the Laplacians).
// Lets bandwidth changes re-exponentiate instead of re-measuring distances.
enum class DistanceMetric { squared_l2, l1, l2 };

struct PairwiseDistances {
    std::size_t n = 0;
    DistanceMetric metric = DistanceMetric::squared_l2;
    std::vector<double> d;  // full symmetric n*n, zero diagonal

    double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

}  // namespace dime
