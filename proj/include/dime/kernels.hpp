#pragma once

#include <span>
#include <string>

#include "dime/matrix.hpp"

namespace dime {

// Kernel families. All are normalized (k(x,x) = 1) with values in [0, 1]:
//   gaussian              exp(-||x-y||_2^2 / (2 sigma^2))
//   factorized_laplacian  exp(-||x-y||_1 / (sqrt(2) sigma))
//   elliptical_laplacian  exp(-||x-y||_2 / (sqrt(2) sigma))
enum class KernelFamily { gaussian, factorized_laplacian, elliptical_laplacian };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

struct KernelSpec {
    KernelFamily family = KernelFamily::gaussian;
    double sigma = 1.0;

    // Throws ValidationError if sigma is non-finite or < 1e-300 (the
    // exponent would overflow before sigma underflows).
    KernelSpec(KernelFamily family, double sigma);
};

// k(x, y) for one pair of equal-length finite vectors.
double evaluate_kernel(const KernelSpec& spec, std::span<const double> x,
                       std::span<const double> y);

// Pairwise distances in the metric `family` consumes, computed with the
// naive per-pair accumulation (no ||x||^2 + ||y||^2 - 2<x,y> shortcut, whose
// cancellation error would break exact-symmetry guarantees).
PairwiseDistances compute_distances(const DataMatrix& data, KernelFamily family);

// Map cached distances through the kernel's exponential at spec.sigma.
// Requires dist.metric to match spec.family.
GramMatrix gram_from_distances(const PairwiseDistances& dist, const KernelSpec& spec);

// Full Gram matrix of k(x_i, x_j); diagonal set to exactly 1.
GramMatrix gram_matrix(const DataMatrix& data, const KernelSpec& spec);

// Entrywise power K^(o gamma), gamma > 0. For a Gaussian Gram this equals
// the Gram at bandwidth sigma / sqrt(gamma).
GramMatrix entrywise_power(const GramMatrix& k, double gamma);

// Hadamard (entrywise) product; sizes must match.
GramMatrix hadamard(const GramMatrix& a, const GramMatrix& b);

}  // namespace dime
