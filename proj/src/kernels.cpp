#include "dime/kernels.hpp"

#include <cmath>
#include <utility>

#include "dime/error.hpp"
#include "dime/parallel.hpp"

namespace dime {

namespace {

constexpr double kMinSigma = 1e-300;
const double kSqrt2 = std::sqrt(2.0);

DistanceMetric metric_for(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian: return DistanceMetric::squared_l2;
        case KernelFamily::factorized_laplacian: return DistanceMetric::l1;
        case KernelFamily::elliptical_laplacian: return DistanceMetric::l2;
    }
    throw ValidationError("unknown kernel family");
}

double pair_distance(std::span<const double> x, std::span<const double> y,
                     DistanceMetric metric) {
    double acc = 0.0;
    switch (metric) {
        case DistanceMetric::squared_l2:
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double t = x[k] - y[k];
                acc += t * t;
            }
            return acc;
        case DistanceMetric::l1:
            for (std::size_t k = 0; k < x.size(); ++k) acc += std::fabs(x[k] - y[k]);
            return acc;
        case DistanceMetric::l2:
            for (std::size_t k = 0; k < x.size(); ++k) {
                const double t = x[k] - y[k];
                acc += t * t;
            }
            return std::sqrt(acc);
    }
    throw ValidationError("unknown distance metric");
}

// distance -> kernel value; dist is in the family's own metric.
double kernel_of_distance(const KernelSpec& spec, double dist) {
    switch (spec.family) {
        case KernelFamily::gaussian:
            return std::exp(-dist / (2.0 * spec.sigma * spec.sigma));
        case KernelFamily::factorized_laplacian:
        case KernelFamily::elliptical_laplacian:
            return std::exp(-dist / (kSqrt2 * spec.sigma));
    }
    throw ValidationError("unknown kernel family");
}

}  // namespace

std::string to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::factorized_laplacian: return "factorized-laplacian";
        case KernelFamily::elliptical_laplacian: return "elliptical-laplacian";
    }
    throw ValidationError("unknown kernel family");
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "factorized-laplacian") return KernelFamily::factorized_laplacian;
    if (name == "elliptical-laplacian") return KernelFamily::elliptical_laplacian;
    throw ValidationError("unknown kernel family '" + name +
                          "' (expected gaussian, factorized-laplacian or "
                          "elliptical-laplacian)");
}

KernelSpec::KernelSpec(KernelFamily family_, double sigma_)
    : family(family_), sigma(sigma_) {
    if (!std::isfinite(sigma) || sigma < kMinSigma)
        throw ValidationError("kernel bandwidth sigma must be finite and >= 1e-300");
}

double evaluate_kernel(const KernelSpec& spec, std::span<const double> x,
                       std::span<const double> y) {
    if (x.size() != y.size() || x.empty())
        throw ValidationError("kernel arguments must be non-empty and equal length");
    for (std::size_t k = 0; k < x.size(); ++k)
        if (!std::isfinite(x[k]) || !std::isfinite(y[k]))
            throw ValidationError("kernel arguments must be finite");
    return kernel_of_distance(spec, pair_distance(x, y, metric_for(spec.family)));
}

PairwiseDistances compute_distances(const DataMatrix& data, KernelFamily family) {
    const std::size_t n = data.rows();
    for (double v : data.values())
        if (!std::isfinite(v))
            throw ValidationError("data matrix contains a non-finite value");

    PairwiseDistances out;
    out.n = n;
    out.metric = metric_for(family);
    out.d.assign(n * n, 0.0);
    // Row blocks are independent; distance filling parallelizes cleanly.
    parallel_for(n, [&](std::size_t i) {
        const auto xi = data.row(i);
        for (std::size_t j = 0; j < i; ++j) {
            const double dij = pair_distance(xi, data.row(j), out.metric);
            out.d[i * n + j] = dij;
            out.d[j * n + i] = dij;
        }
    });
    return out;
}

GramMatrix gram_from_distances(const PairwiseDistances& dist, const KernelSpec& spec) {
    if (dist.n == 0) throw ValidationError("empty distance matrix");
    if (dist.metric != metric_for(spec.family))
        throw ValidationError("distance metric does not match kernel family");
    const std::size_t n = dist.n;
    std::vector<double> k(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double v = kernel_of_distance(spec, dist.d[i * n + j]);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
        k[i * n + i] = 1.0;
    }
    return detail::make_gram_unchecked(n, std::move(k));
}

GramMatrix gram_matrix(const DataMatrix& data, const KernelSpec& spec) {
    return gram_from_distances(compute_distances(data, spec.family), spec);
}

GramMatrix entrywise_power(const GramMatrix& k, double gamma) {
    if (!std::isfinite(gamma) || gamma <= 0.0)
        throw ValidationError("entrywise power exponent must be finite and > 0");
    const std::size_t n = k.size();
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double v = std::pow(k(i, j), gamma);
            out[i * n + j] = v;
            out[j * n + i] = v;
        }
        out[i * n + i] = 1.0;
    }
    return detail::make_gram_unchecked(n, std::move(out));
}

GramMatrix hadamard(const GramMatrix& a, const GramMatrix& b) {
    if (a.size() != b.size())
        throw ValidationError("Hadamard product requires equal-size matrices");
    const std::size_t n = a.size();
    std::vector<double> out(n * n);
    for (std::size_t i = 0; i < n * n; ++i) out[i] = a.values()[i] * b.values()[i];
    return detail::make_gram_unchecked(n, std::move(out));
}

}  // namespace dime
