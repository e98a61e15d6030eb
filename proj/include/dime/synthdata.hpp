#pragma once

#include <cstdint>
#include <utility>

#include "dime/matrix.hpp"

namespace dime {

// Correlated-Gaussian benchmark: per coordinate, (X_ij, Y_ij) are standard
// normals with correlation rho, independent across coordinates, so
// I(X; Y) = -(d/2) ln(1 - rho^2) exactly.
struct GaussianPairConfig {
    std::size_t n = 2;    // samples, >= 2
    std::size_t d = 1;    // coordinates, >= 1
    double rho = 0.0;     // in [0, 1)
    std::uint64_t seed = 0;

    void validate() const;  // throws ValidationError
};

struct DataPair {
    DataMatrix x;
    DataMatrix y;
};

// X_ij = z1, Y_ij = rho*z1 + sqrt(1-rho^2)*z2 with fresh standard normals
// per (i, j); coordinate j uses the stream derived from (seed, j).
DataPair sample_correlated_gaussian(const GaussianPairConfig& cfg);

// -(d/2) ln(1 - rho^2); requires 0 <= rho < 1.
double true_mi(std::size_t d, double rho);

// Inverse: the rho for which true_mi(d, rho) == target (within roundoff).
// Requires target >= 0.
double rho_for_mi(std::size_t d, double target_mi);

}  // namespace dime
