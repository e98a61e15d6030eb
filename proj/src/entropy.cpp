#include "dime/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dime/error.hpp"
#include "dime/kernels.hpp"

// LAPACK symmetric eigensolver (values-only mode runs Householder
// tridiagonalization + the implicit-shift QL/QR variant).
extern "C" void dsyev_(const char* jobz, const char* uplo, const int* n, double* a,
                       const int* lda, double* w, double* work, const int* lwork,
                       int* info);

namespace dime {

EntropyOrder::EntropyOrder(double alpha) : alpha_(alpha) {
    if (!std::isfinite(alpha) || alpha <= 0.0)
        throw ValidationError("entropy order alpha must be finite and > 0");
}

bool EntropyOrder::is_limit() const { return std::fabs(alpha_ - 1.0) < 1e-9; }

namespace {

// Per-thread scratch so repeated solves at one size allocate once; the
// harness calls spectrum() thousands of times from a worker pool.
struct EigScratch {
    std::vector<double> a;     // matrix copy, destroyed by dsyev
    std::vector<double> w;     // eigenvalues, ascending
    std::vector<double> work;  // lapack workspace
    int work_n = -1;
};

thread_local EigScratch scratch;

}  // namespace

Spectrum spectrum(const GramMatrix& k) {
    const std::size_t n = k.size();
    const int ni = static_cast<int>(n);
    const double inv_n = 1.0 / static_cast<double>(n);

    scratch.a.resize(n * n);
    scratch.w.resize(n);
    for (std::size_t i = 0; i < n * n; ++i) scratch.a[i] = k.values()[i] * inv_n;

    if (scratch.work_n != ni) {
        // Workspace query on every size change (not just growth): lwork must
        // be a deterministic function of n, because dsyev's internal blocking
        // - and therefore its last-ulp rounding - can depend on the
        // workspace size, and worker threads see different size histories.
        double wkopt = 0.0;
        int lwork = -1, info = 0;
        dsyev_("N", "L", &ni, scratch.a.data(), &ni, scratch.w.data(), &wkopt, &lwork,
               &info);
        if (info != 0)
            throw NumericalError("eigensolver workspace query failed (info=" +
                                 std::to_string(info) + ")");
        scratch.work.resize(static_cast<std::size_t>(wkopt));
        scratch.work_n = ni;
    }

    int info = 0;
    const int lwork = static_cast<int>(scratch.work.size());
    dsyev_("N", "L", &ni, scratch.a.data(), &ni, scratch.w.data(), scratch.work.data(),
           &lwork, &info);
    if (info != 0)
        throw NumericalError("symmetric eigensolver did not converge (info=" +
                             std::to_string(info) + ")");

    const double psd_tol = 1e-10 * static_cast<double>(n);
    const double zero_floor =
        100.0 * static_cast<double>(n) * std::numeric_limits<double>::epsilon();

    Spectrum s;
    s.values.assign(scratch.w.rbegin(), scratch.w.rend());  // descending
    double sum = 0.0;
    for (double& lambda : s.values) {
        if (lambda < -psd_tol)
            throw NumericalError(
                "Gram matrix is not positive semidefinite within tolerance "
                "(eigenvalue " +
                std::to_string(lambda) + " of K/n, tolerance " +
                std::to_string(-psd_tol) + ")");
        if (lambda <= zero_floor) lambda = 0.0;
        sum += lambda;
    }
    if (!(sum > 0.0))
        throw NumericalError("Gram matrix spectrum collapsed to zero");
    for (double& lambda : s.values) lambda /= sum;
    return s;
}

double entropy_from_spectrum(const Spectrum& s, EntropyOrder order) {
    double result;
    if (order.is_limit()) {
        double acc = 0.0;
        for (double lambda : s.values)
            if (lambda > 0.0) acc -= lambda * std::log(lambda);
        result = acc;
    } else {
        const double alpha = order.value();
        double trace = 0.0;
        for (double lambda : s.values)
            if (lambda > 0.0) trace += std::pow(lambda, alpha);
        result = std::log(trace) / (1.0 - alpha);
    }
    if (!std::isfinite(result))
        throw NumericalError("entropy evaluated to a non-finite value");
    // a fully concentrated spectrum yields ln(1)/(1-alpha) = -0.0; entropy is 0
    return result + 0.0;
}

double matrix_entropy(const GramMatrix& k, EntropyOrder order) {
    return entropy_from_spectrum(spectrum(k), order);
}

double joint_entropy(const GramMatrix& kx, const GramMatrix& ky, EntropyOrder order) {
    return matrix_entropy(hadamard(kx, ky), order);
}

double conditional_entropy(const GramMatrix& kx, const GramMatrix& ky,
                           EntropyOrder order) {
    const double value = joint_entropy(kx, ky, order) - matrix_entropy(ky, order);
    if (value < 0.0 && value > -1e-9) return 0.0;
    return value;
}

double matrix_mutual_information(const GramMatrix& kx, const GramMatrix& ky,
                                 EntropyOrder order) {
    return matrix_entropy(kx, order) + matrix_entropy(ky, order) -
           joint_entropy(kx, ky, order);
}

}  // namespace dime
