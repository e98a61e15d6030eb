#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "dime/dime.hpp"
#include "dime/error.hpp"
#include "dime/rng.hpp"
#include "dime/synthdata.hpp"

using namespace dime;

namespace {

DataPair correlated(std::size_t n, std::size_t d, double rho, std::uint64_t seed) {
    return sample_correlated_gaussian({n, d, rho, seed});
}

DataMatrix constant_data(std::size_t n, std::size_t d) {
    DataMatrix m(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) m(i, j) = 0.25;
    return m;
}

bool is_bijection(std::span<const std::uint32_t> perm) {
    std::vector<bool> seen(perm.size(), false);
    for (std::uint32_t v : perm) {
        if (v >= perm.size() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

const EntropyOrder kOrder(1.01);

}  // namespace

TEST_SUITE("dime") {

TEST_CASE("sample_permutations yields deterministic bijections") {
    const PermutationSet a = sample_permutations(50, 4, 7);
    const PermutationSet b = sample_permutations(50, 4, 7);
    const PermutationSet c = sample_permutations(50, 4, 8);
    CHECK(a.rows == b.rows);
    CHECK(a.rows != c.rows);
    CHECK(a.count() == 4);
    CHECK(a.n == 50);
    CHECK(a.seed == 7);
    for (std::size_t k = 0; k < a.count(); ++k) REQUIRE(is_bijection(a.row(k)));
    // distinct rows are (with overwhelming probability at n=50) distinct
    CHECK(std::vector<std::uint32_t>(a.row(0).begin(), a.row(0).end()) !=
          std::vector<std::uint32_t>(a.row(1).begin(), a.row(1).end()));
}

TEST_CASE("sample_permutations accepts n = 2 and rejects degenerate shapes") {
    const PermutationSet tiny = sample_permutations(2, 8, 3);
    for (std::size_t k = 0; k < tiny.count(); ++k) {
        REQUIRE(is_bijection(tiny.row(k)));  // identity or swap
    }
    CHECK_THROWS_AS((void)sample_permutations(1, 3, 0), ValidationError);
    CHECK_THROWS_AS((void)sample_permutations(0, 3, 0), ValidationError);
    CHECK_THROWS_AS((void)sample_permutations(8, 0, 0), ValidationError);
}

TEST_CASE("permutation rows are near-uniform over images") {
    // Row k of every set is an independent draw; spot-check uniformity of
    // the image of index 0 across many single-permutation sets.
    std::vector<int> counts(5, 0);
    for (std::uint64_t seed = 0; seed < 5000; ++seed)
        counts[sample_permutations(5, 1, seed).row(0)[0]]++;
    for (int c : counts) {
        CHECK(c > 850);
        CHECK(c < 1150);
    }
}

TEST_CASE("permuted_joint_entropy with the identity permutation is the joint") {
    const DataPair pair = correlated(30, 3, 0.6, 5);
    const GramMatrix kx = gram_matrix(pair.x, {KernelFamily::gaussian, 1.2});
    const GramMatrix ky = gram_matrix(pair.y, {KernelFamily::gaussian, 1.2});
    std::vector<std::uint32_t> id(30);
    for (std::uint32_t i = 0; i < 30; ++i) id[i] = i;
    CHECK(permuted_joint_entropy(kx, ky, id, kOrder) ==
          joint_entropy(kx, ky, kOrder));
}

TEST_CASE("permuted_joint_entropy validates the permutation") {
    const GramMatrix k = GramMatrix::identity(4);
    std::vector<std::uint32_t> repeat = {0, 1, 1, 3};
    CHECK_THROWS_AS((void)permuted_joint_entropy(k, k, repeat, kOrder),
                    ValidationError);
    std::vector<std::uint32_t> out_of_range = {0, 1, 2, 4};
    CHECK_THROWS_AS((void)permuted_joint_entropy(k, k, out_of_range, kOrder),
                    ValidationError);
    std::vector<std::uint32_t> short_perm = {0, 1, 2};
    CHECK_THROWS_AS((void)permuted_joint_entropy(k, k, short_perm, kOrder),
                    ValidationError);
}

TEST_CASE("dime decomposes exactly into its parts and is reproducible") {
    const DataPair pair = correlated(64, 4, 0.7, 11);
    const KernelSpec spec(KernelFamily::gaussian, 2.0);
    const PermutationSet perms = sample_permutations(64, 5, 21);
    const DimeEstimate est = dime::dime(pair.x, pair.y, spec, spec, kOrder, perms);
    REQUIRE(est.permuted_joints.size() == 5);
    double mean = 0.0;
    for (double v : est.permuted_joints) mean += v;
    mean /= 5.0;
    CHECK(std::abs(est.value - (mean - est.paired_joint)) <= 1e-12);
    CHECK(est.alpha == 1.01);
    CHECK(est.seed == 21);

    const DimeEstimate again = dime::dime(pair.x, pair.y, spec, spec, kOrder, perms);
    CHECK(again.value == est.value);
    CHECK(again.permuted_joints == est.permuted_joints);

    // the gram-level entry point is the same computation
    const GramMatrix kx = gram_matrix(pair.x, spec);
    const GramMatrix ky = gram_matrix(pair.y, spec);
    const DimeEstimate from_grams = dime_from_grams(kx, ky, kOrder, perms);
    CHECK(from_grams.value == est.value);
    CHECK(from_grams.paired_joint == est.paired_joint);
}

TEST_CASE("a constant view yields exactly zero dime") {
    const DataPair pair = correlated(40, 3, 0.5, 31);
    const DataMatrix y = constant_data(40, 3);
    const KernelSpec spec(KernelFamily::gaussian, 1.0);
    const PermutationSet perms = sample_permutations(40, 4, 9);
    const DimeEstimate est = dime::dime(pair.x, y, spec, spec, kOrder, perms);
    CHECK(est.value == 0.0);
    for (double v : est.permuted_joints) CHECK(v == est.paired_joint);
}

TEST_CASE("dime lower-bounds matrix mutual information") {
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        const DataPair pair = correlated(96, 5, 0.8, seed);
        const KernelSpec spec(KernelFamily::gaussian, std::sqrt(5.0 / 2.0));
        const GramMatrix kx = gram_matrix(pair.x, spec);
        const GramMatrix ky = gram_matrix(pair.y, spec);
        const PermutationSet perms = sample_permutations(96, 5, seed + 100);
        const DimeEstimate est = dime_from_grams(kx, ky, kOrder, perms);
        const double mi = matrix_mutual_information(kx, ky, kOrder);
        CHECK(est.value <= mi + 1e-9);
    }
}

TEST_CASE("pair_entropies matches the standalone estimators") {
    const DataPair pair = correlated(48, 4, 0.6, 13);
    const KernelSpec spec(KernelFamily::gaussian, 1.7);
    const GramMatrix kx = gram_matrix(pair.x, spec);
    const GramMatrix ky = gram_matrix(pair.y, spec);
    const PermutationSet perms = sample_permutations(48, 3, 55);
    const PairEntropies pe = pair_entropies(kx, ky, kOrder, perms);
    const DimeEstimate est = dime_from_grams(kx, ky, kOrder, perms);
    CHECK(pe.paired_joint == est.paired_joint);
    CHECK(pe.permuted_joints == est.permuted_joints);
    CHECK(pe.dime_value() == est.value);
    CHECK(pe.entropy_x == matrix_entropy(kx, kOrder));
    CHECK(pe.entropy_y == matrix_entropy(ky, kOrder));
    CHECK(pe.mutual_information() ==
          matrix_mutual_information(kx, ky, kOrder));
}

TEST_CASE("dime rejects mismatched shapes") {
    const DataPair pair = correlated(20, 3, 0.5, 1);
    const DataMatrix shorter(10, 3);
    const KernelSpec spec(KernelFamily::gaussian, 1.0);
    const PermutationSet perms = sample_permutations(20, 2, 0);
    CHECK_THROWS_AS((void)dime::dime(pair.x, shorter, spec, spec, kOrder, perms),
                    ValidationError);
    const PermutationSet wrong_n = sample_permutations(19, 2, 0);
    CHECK_THROWS_AS((void)dime::dime(pair.x, pair.y, spec, spec, kOrder, wrong_n),
                    ValidationError);
}

TEST_CASE("BandwidthParams round-trips through log space") {
    const BandwidthParams p = BandwidthParams::from_sigmas(2.0, 0.5);
    CHECK(p.sigma_x() == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(p.sigma_y() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(p.log_sigma_x() == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK_THROWS_AS((void)BandwidthParams::from_sigmas(0.0, 1.0), ValidationError);
    CHECK_THROWS_AS((void)BandwidthParams::from_sigmas(1.0, -2.0), ValidationError);
}

TEST_CASE("gradient vanishes in the direction of a constant view") {
    const DataPair pair = correlated(32, 3, 0.5, 17);
    const DataMatrix y = constant_data(32, 3);
    const PermutationSet perms = sample_permutations(32, 3, 23);
    const GradientEstimate g =
        dime_gradient(pair.x, y, BandwidthParams::from_sigmas(1.0, 1.0), kOrder, perms);
    CHECK(std::isfinite(g.d_log_sigma_x));
    CHECK(std::abs(g.d_log_sigma_y) <= 1e-8);
}

TEST_CASE("gradient components agree for symmetric inputs") {
    // With identical views, swapping (sigma_x, sigma_y) conjugates the
    // permuted joint by Pi itself, so the objective is exactly symmetric
    // only when every permutation is an involution. Use two: full reversal
    // and adjacent pairwise swaps.
    const std::size_t n = 40;
    const DataPair pair = correlated(n, 3, 0.6, 29);
    PermutationSet perms;
    perms.n = n;
    perms.rows.resize(2 * n);
    for (std::uint32_t i = 0; i < n; ++i) {
        perms.rows[i] = std::uint32_t(n) - 1 - i;
        perms.rows[n + i] = i ^ 1u;
    }
    const GradientEstimate g = dime_gradient(
        pair.x, pair.x, BandwidthParams::from_sigmas(1.5, 1.5), kOrder, perms);
    CHECK(g.d_log_sigma_x == doctest::Approx(g.d_log_sigma_y).epsilon(1e-6));
}

TEST_CASE("finite differences converge at second order") {
    const DataPair pair = correlated(48, 3, 0.7, 41);
    const BandwidthParams params = BandwidthParams::from_sigmas(1.2, 1.2);
    const PermutationSet perms = sample_permutations(48, 2, 43);
    const double h = 0.05;
    const GradientEstimate g1 =
        dime_gradient(pair.x, pair.y, params, kOrder, perms, KernelFamily::gaussian, h);
    const GradientEstimate g2 = dime_gradient(pair.x, pair.y, params, kOrder, perms,
                                              KernelFamily::gaussian, h / 2.0);
    // Richardson extrapolation of a second-order scheme: the error at h is
    // about four times the error at h/2.
    const double star = (4.0 * g2.d_log_sigma_x - g1.d_log_sigma_x) / 3.0;
    const double e1 = std::abs(g1.d_log_sigma_x - star);
    const double e2 = std::abs(g2.d_log_sigma_x - star);
    REQUIRE(e2 > 1e-12);  // h chosen large enough that truncation dominates
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.30));
}

TEST_CASE("distance-cached gradient equals the data-level gradient") {
    const DataPair pair = correlated(36, 3, 0.5, 47);
    const BandwidthParams params = BandwidthParams::from_sigmas(1.1, 0.9);
    const PermutationSet perms = sample_permutations(36, 2, 49);
    const GradientEstimate a = dime_gradient(pair.x, pair.y, params, kOrder, perms);
    const PairwiseDistances dx = compute_distances(pair.x, KernelFamily::gaussian);
    const PairwiseDistances dy = compute_distances(pair.y, KernelFamily::gaussian);
    const GradientEstimate b = dime_gradient(dx, dy, params, kOrder, perms);
    CHECK(a.d_log_sigma_x == b.d_log_sigma_x);
    CHECK(a.d_log_sigma_y == b.d_log_sigma_y);
}

TEST_CASE("optimizer freezes exactly under a zero gradient") {
    // A constant Y makes the objective identically zero, so Adam's update is
    // exactly zero at every step and the parameters must not move.
    const DataPair pair = correlated(24, 2, 0.4, 53);
    const DataMatrix y = constant_data(24, 2);
    const PermutationSet perms = sample_permutations(24, 2, 59);
    OptimizeOptions options;
    options.steps = 3;
    options.learning_rate = 0.5;
    const BandwidthParams init = BandwidthParams::from_sigmas(1.4, 1.4);
    const OptimizeResult result =
        optimize_bandwidth(pair.x, y, init, kOrder, perms, options);
    CHECK(result.params.log_sigma_x() == init.log_sigma_x());
    CHECK(result.params.log_sigma_y() == init.log_sigma_y());
    REQUIRE(result.trace.size() == 3);
    for (double v : result.trace) CHECK(v == 0.0);
}

TEST_CASE("optimizer validates its options") {
    const DataPair pair = correlated(16, 2, 0.4, 61);
    const PermutationSet perms = sample_permutations(16, 2, 67);
    const BandwidthParams init = BandwidthParams::from_sigmas(1.0, 1.0);
    OptimizeOptions options;
    options.steps = 0;
    CHECK_THROWS_AS((void)optimize_bandwidth(pair.x, pair.y, init, kOrder, perms,
                                             options),
                    ValidationError);
    options.steps = 1;
    options.learning_rate = 0.0;
    CHECK_THROWS_AS((void)optimize_bandwidth(pair.x, pair.y, init, kOrder, perms,
                                             options),
                    ValidationError);
    options.learning_rate = 0.01;
    options.fd_step = 0.0;
    CHECK_THROWS_AS((void)optimize_bandwidth(pair.x, pair.y, init, kOrder, perms,
                                             options),
                    ValidationError);
    options.fd_step = 1e-4;
    options.tie = true;
    CHECK_THROWS_AS((void)optimize_bandwidth(pair.x, pair.y,
                                             BandwidthParams::from_sigmas(1.0, 2.0),
                                             kOrder, perms, options),
                    ValidationError);
}

TEST_CASE("optimizer improves dime on correlated data") {
    const DataPair pair = correlated(96, 4, 0.85, 71);
    const PermutationSet perms = sample_permutations(96, 3, 73);
    const BandwidthParams init = BandwidthParams::from_sigmas(2.0, 2.0);
    OptimizeOptions options;
    options.steps = 40;
    options.learning_rate = 0.05;
    const OptimizeResult result =
        optimize_bandwidth(pair.x, pair.y, init, kOrder, perms, options);
    REQUIRE(result.trace.size() == 40);
    // judge initial and final parameters on a common permutation set
    const KernelSpec init_x(KernelFamily::gaussian, init.sigma_x());
    const KernelSpec final_x(KernelFamily::gaussian, result.params.sigma_x());
    const KernelSpec init_y(KernelFamily::gaussian, init.sigma_y());
    const KernelSpec final_y(KernelFamily::gaussian, result.params.sigma_y());
    const double before =
        dime::dime(pair.x, pair.y, init_x, init_y, kOrder, perms).value;
    const double after =
        dime::dime(pair.x, pair.y, final_x, final_y, kOrder, perms).value;
    CHECK(after > before);
}

TEST_CASE("tied optimization keeps the bandwidths identical") {
    const DataPair pair = correlated(48, 3, 0.7, 79);
    const PermutationSet perms = sample_permutations(48, 2, 83);
    OptimizeOptions options;
    options.steps = 5;
    options.learning_rate = 0.1;
    options.tie = true;
    const OptimizeResult result = optimize_bandwidth(
        pair.x, pair.y, BandwidthParams::from_sigmas(1.5, 1.5), kOrder, perms, options);
    CHECK(result.params.log_sigma_x() == result.params.log_sigma_y());
    CHECK(result.params.sigma_x() != 1.5);  // it did move
}

TEST_CASE("positional optimize overload matches the options form") {
    const DataPair pair = correlated(32, 2, 0.6, 89);
    const PermutationSet perms = sample_permutations(32, 2, 97);
    const BandwidthParams init = BandwidthParams::from_sigmas(1.3, 1.3);
    const OptimizeResult a = optimize_bandwidth(pair.x, pair.y, init, kOrder, perms,
                                                std::size_t(4), 0.02);
    OptimizeOptions options;
    options.steps = 4;
    options.learning_rate = 0.02;
    const OptimizeResult b =
        optimize_bandwidth(pair.x, pair.y, init, kOrder, perms, options);
    CHECK(a.params.log_sigma_x() == b.params.log_sigma_x());
    CHECK(a.trace == b.trace);
}

TEST_CASE("independence test is calibrated on its extremes") {
    const KernelSpec spec(KernelFamily::gaussian, 1.5);
    // strongly dependent data: the paired statistic should beat every
    // permutation, giving the smallest attainable p-value
    const DataPair dep = correlated(128, 4, 0.95, 101);
    const double p_dep =
        independence_test(dep.x, dep.y, spec, spec, kOrder, 39, 103);
    CHECK(p_dep == doctest::Approx(1.0 / 40.0).epsilon(1e-12));
    // independent data: p should be comfortably non-significant
    const DataPair ind = correlated(64, 4, 0.0, 107);
    const double p_ind =
        independence_test(ind.x, ind.y, spec, spec, kOrder, 39, 109);
    CHECK(p_ind > 0.05);
    CHECK(p_ind <= 1.0);
}

TEST_CASE("independence test rejects degenerate inputs") {
    const DataPair pair = correlated(16, 2, 0.5, 113);
    const KernelSpec spec(KernelFamily::gaussian, 1.0);
    CHECK_THROWS_AS(
        (void)independence_test(pair.x, pair.y, spec, spec, kOrder, 19, 0),
        ValidationError);
    const DataPair two = correlated(2, 2, 0.5, 127);
    CHECK_THROWS_AS(
        (void)independence_test(two.x, two.y, spec, spec, kOrder, 25, 0),
        ValidationError);
}

}  // TEST_SUITE
