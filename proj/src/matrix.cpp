#include "dime/matrix.hpp"

#include <cmath>
#include <string>

#include "dime/error.hpp"

namespace dime {

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0)
        throw ValidationError("data matrix must have at least one row and one column");
}

DataMatrix::DataMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), v_(std::move(values)) {
    if (rows == 0 || cols == 0)
        throw ValidationError("data matrix must have at least one row and one column");
    if (v_.size() != rows * cols)
        throw ValidationError("data matrix: got " + std::to_string(v_.size()) +
                              " values for a " + std::to_string(rows) + "x" +
                              std::to_string(cols) + " matrix");
    for (double x : v_)
        if (!std::isfinite(x))
            throw ValidationError("data matrix contains a non-finite value");
}

namespace detail {
GramMatrix make_gram_unchecked(std::size_t n, std::vector<double> values) {
    return GramMatrix(n, std::move(values));
}
}  // namespace detail

GramMatrix GramMatrix::from_values(std::size_t n, std::vector<double> values) {
    if (n == 0) throw ValidationError("Gram matrix must have size >= 1");
    if (values.size() != n * n)
        throw ValidationError("Gram matrix: got " + std::to_string(values.size()) +
                              " values for size " + std::to_string(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (values[i * n + i] != 1.0)
            throw ValidationError("Gram matrix diagonal must be exactly 1");
        for (std::size_t j = 0; j < i; ++j) {
            const double a = values[i * n + j];
            if (!std::isfinite(a) || a < 0.0 || a > 1.0)
                throw ValidationError("Gram matrix entries must lie in [0, 1]");
            if (a != values[j * n + i])
                throw ValidationError("Gram matrix must be exactly symmetric");
        }
    }
    return GramMatrix(n, std::move(values));
}

GramMatrix GramMatrix::identity(std::size_t n) {
    if (n == 0) throw ValidationError("Gram matrix must have size >= 1");
    std::vector<double> v(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;
    return GramMatrix(n, std::move(v));
}

GramMatrix GramMatrix::ones(std::size_t n) {
    if (n == 0) throw ValidationError("Gram matrix must have size >= 1");
    return GramMatrix(n, std::vector<double>(n * n, 1.0));
}

}  // namespace dime
