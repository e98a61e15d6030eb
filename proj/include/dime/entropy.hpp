#pragma once

#include <vector>

#include "dime/matrix.hpp"

namespace dime {

// Entropy order alpha > 0. Orders within 1e-9 of 1 take the limit branch
// (von Neumann form); EntropyOrder::limit() requests it explicitly.
class EntropyOrder {
public:
    explicit EntropyOrder(double alpha);
    static EntropyOrder limit() { return EntropyOrder(1.0); }

    double value() const { return alpha_; }
    bool is_limit() const;

private:
    double alpha_;
};

// Eigenvalues of K/n: clamped, renormalized to unit sum, sorted descending.
struct Spectrum {
    std::vector<double> values;
};

// Dense symmetric eigendecomposition (eigenvalues only) of K/n.
//   - eigenvalue < -1e-10*n         -> NumericalError (PSD violation)
//   - |eigenvalue| <= 100*n*eps     -> treated as exact 0 (solver noise;
//                                      genuine spectra sit orders above this)
//   - remainder renormalized to sum exactly 1, sorted descending.
Spectrum spectrum(const GramMatrix& k);

// Entropy of an already-computed spectrum at the given order.
double entropy_from_spectrum(const Spectrum& s, EntropyOrder order);

// Matrix-based entropy: (1/(1-alpha)) ln(sum_i lambda_i^alpha) over the
// spectrum of K/n, with 0^alpha := 0; the limit branch returns
// -sum_i lambda_i ln(lambda_i) with 0 ln 0 := 0. Result in [0, ln n].
double matrix_entropy(const GramMatrix& k, EntropyOrder order);

// Entropy of the Hadamard product (joint representation).
double joint_entropy(const GramMatrix& kx, const GramMatrix& ky, EntropyOrder order);

// joint_entropy(kx, ky) - matrix_entropy(ky); tiny negatives above -1e-9
// (floating-point residue of a theoretically nonnegative quantity) clamp to 0.
double conditional_entropy(const GramMatrix& kx, const GramMatrix& ky,
                           EntropyOrder order);

// matrix_entropy(kx) + matrix_entropy(ky) - joint_entropy(kx, ky).
double matrix_mutual_information(const GramMatrix& kx, const GramMatrix& ky,
                                 EntropyOrder order);

}  // namespace dime
