#include <doctest.h>

#include <cmath>
#include <vector>

#include "dime/error.hpp"
#include "dime/kernels.hpp"
#include "dime/matrix.hpp"
#include "dime/rng.hpp"

using namespace dime;

namespace {

DataMatrix gaussian_cloud(std::size_t n, std::size_t d, std::uint64_t seed) {
    DataMatrix m(n, d);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = rng.next_normal();
    return m;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("family names round-trip") {
    for (auto family : {KernelFamily::gaussian, KernelFamily::factorized_laplacian,
                        KernelFamily::elliptical_laplacian})
        CHECK(kernel_family_from_string(to_string(family)) == family);
    CHECK_THROWS_AS((void)kernel_family_from_string("triangular"), ValidationError);
}

TEST_CASE("evaluate_kernel closed-form values") {
    const std::vector<double> x = {0.0, 0.0};
    const std::vector<double> y = {1.0, 1.0};
    const double inv_e = 0.36787944117144233;  // e^-1
    // squared L2 = 2, sigma = 1 -> exp(-2/2)
    CHECK(evaluate_kernel({KernelFamily::gaussian, 1.0}, x, y) ==
          doctest::Approx(inv_e).epsilon(1e-15));
    // L1 = 2, sigma = sqrt(2) -> exp(-2/(sqrt2*sqrt2))
    CHECK(evaluate_kernel({KernelFamily::factorized_laplacian, std::sqrt(2.0)}, x, y) ==
          doctest::Approx(inv_e).epsilon(1e-15));
    // L2 = sqrt(2), sigma = 1 -> exp(-sqrt2/sqrt2)
    CHECK(evaluate_kernel({KernelFamily::elliptical_laplacian, 1.0}, x, y) ==
          doctest::Approx(inv_e).epsilon(1e-15));
    // identical points -> exactly 1 in every family
    for (auto family : {KernelFamily::gaussian, KernelFamily::factorized_laplacian,
                        KernelFamily::elliptical_laplacian})
        CHECK(evaluate_kernel({family, 0.37}, x, x) == 1.0);
}

TEST_CASE("evaluate_kernel input validation") {
    const std::vector<double> x = {0.0, 0.0};
    const std::vector<double> y3 = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS((void)evaluate_kernel({KernelFamily::gaussian, 1.0}, x, y3),
                    ValidationError);
    const std::vector<double> bad = {std::nan(""), 0.0};
    CHECK_THROWS_AS((void)evaluate_kernel({KernelFamily::gaussian, 1.0}, x, bad),
                    ValidationError);
}

TEST_CASE("KernelSpec rejects bad sigma") {
    CHECK_THROWS_AS(KernelSpec(KernelFamily::gaussian, 0.0), ValidationError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::gaussian, -1.0), ValidationError);
    CHECK_THROWS_AS(KernelSpec(KernelFamily::gaussian, std::nan("")), ValidationError);
    CHECK_THROWS_AS(
        KernelSpec(KernelFamily::gaussian, std::numeric_limits<double>::infinity()),
        ValidationError);
}

TEST_CASE("gram matrices satisfy the kernel-matrix invariants") {
    const DataMatrix data = gaussian_cloud(40, 3, 5);
    for (auto family : {KernelFamily::gaussian, KernelFamily::factorized_laplacian,
                        KernelFamily::elliptical_laplacian}) {
        const GramMatrix k = gram_matrix(data, {family, 1.3});
        for (std::size_t i = 0; i < k.size(); ++i) {
            CHECK(k(i, i) == 1.0);
            for (std::size_t j = 0; j < i; ++j) {
                CHECK(k(i, j) == k(j, i));
                CHECK(k(i, j) >= 0.0);
                CHECK(k(i, j) <= 1.0);
            }
        }
    }
}

TEST_CASE("distance cache reproduces the direct gram bit for bit") {
    const DataMatrix data = gaussian_cloud(24, 4, 11);
    for (auto family : {KernelFamily::gaussian, KernelFamily::factorized_laplacian,
                        KernelFamily::elliptical_laplacian}) {
        const PairwiseDistances dist = compute_distances(data, family);
        const GramMatrix direct = gram_matrix(data, {family, 0.8});
        const GramMatrix cached = gram_from_distances(dist, {family, 0.8});
        CHECK(direct.values() == cached.values());
    }
}

TEST_CASE("distance metric must match the kernel family") {
    const DataMatrix data = gaussian_cloud(8, 2, 3);
    const PairwiseDistances dist = compute_distances(data, KernelFamily::gaussian);
    CHECK_THROWS_AS(
        (void)gram_from_distances(dist, {KernelFamily::factorized_laplacian, 1.0}),
        ValidationError);
}

TEST_CASE("entrywise power composes and rescales the gaussian bandwidth") {
    const DataMatrix data = gaussian_cloud(20, 3, 17);
    const GramMatrix k = gram_matrix(data, {KernelFamily::gaussian, 2.0});

    // (K^(o2))^(o3) == K^(o6)
    const GramMatrix twice = entrywise_power(entrywise_power(k, 2.0), 3.0);
    const GramMatrix once = entrywise_power(k, 6.0);
    for (std::size_t i = 0; i < k.values().size(); ++i)
        CHECK(twice.values()[i] == doctest::Approx(once.values()[i]).epsilon(1e-12));

    // Gaussian: K_sigma^(o gamma) == K_{sigma/sqrt(gamma)}
    const GramMatrix powered = entrywise_power(k, 4.0);
    const GramMatrix narrow = gram_matrix(data, {KernelFamily::gaussian, 1.0});
    for (std::size_t i = 0; i < k.values().size(); ++i)
        CHECK(powered.values()[i] ==
              doctest::Approx(narrow.values()[i]).epsilon(1e-12));

    CHECK_THROWS_AS((void)entrywise_power(k, 0.0), ValidationError);
    CHECK_THROWS_AS((void)entrywise_power(k, -2.0), ValidationError);
    CHECK_THROWS_AS((void)entrywise_power(k, std::nan("")), ValidationError);
}

TEST_CASE("hadamard commutes and respects the identity of the family") {
    const DataMatrix data = gaussian_cloud(16, 2, 23);
    const GramMatrix a = gram_matrix(data, {KernelFamily::gaussian, 1.0});
    const GramMatrix b = gram_matrix(data, {KernelFamily::elliptical_laplacian, 2.0});
    const GramMatrix ab = hadamard(a, b);
    const GramMatrix ba = hadamard(b, a);
    CHECK(ab.values() == ba.values());
    // all-ones gram is the Hadamard identity
    const GramMatrix j = GramMatrix::ones(a.size());
    CHECK(hadamard(a, j).values() == a.values());
    // size mismatch
    const GramMatrix small = GramMatrix::identity(4);
    CHECK_THROWS_AS((void)hadamard(a, small), ValidationError);
}

TEST_CASE("GramMatrix::from_values enforces the invariants") {
    CHECK_THROWS_AS((void)GramMatrix::from_values(2, {1.0, 0.5, 0.4, 1.0}),
                    ValidationError);  // asymmetric
    CHECK_THROWS_AS((void)GramMatrix::from_values(2, {0.9, 0.5, 0.5, 1.0}),
                    ValidationError);  // diagonal != 1
    CHECK_THROWS_AS((void)GramMatrix::from_values(2, {1.0, 1.5, 1.5, 1.0}),
                    ValidationError);  // entry > 1
    CHECK_THROWS_AS((void)GramMatrix::from_values(2, {1.0, -0.1, -0.1, 1.0}),
                    ValidationError);  // entry < 0
    CHECK_THROWS_AS((void)GramMatrix::from_values(2, {1.0, 0.5, 0.5}),
                    ValidationError);  // wrong element count
    const GramMatrix ok = GramMatrix::from_values(2, {1.0, 0.5, 0.5, 1.0});
    CHECK(ok.size() == 2);
    CHECK(ok(0, 1) == 0.5);
}

TEST_CASE("DataMatrix rejects non-finite values and bad shapes") {
    CHECK_THROWS_AS(DataMatrix(2, 2, {1.0, 2.0, std::nan(""), 4.0}), ValidationError);
    CHECK_THROWS_AS(DataMatrix(2, 2, {1.0, 2.0, 3.0}), ValidationError);
    CHECK_THROWS_AS(DataMatrix(0, 2), ValidationError);
    CHECK_THROWS_AS(DataMatrix(2, 0), ValidationError);
}

}  // TEST_SUITE
