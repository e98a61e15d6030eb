#include "dime/dime.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "dime/error.hpp"
#include "dime/parallel.hpp"
#include "dime/rng.hpp"

namespace dime {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_permutation(std::span<const std::uint32_t> perm, std::size_t n) {
    if (perm.size() != n)
        throw ValidationError("permutation length " + std::to_string(perm.size()) +
                              " does not match matrix size " + std::to_string(n));
    std::vector<bool> seen(n, false);
    for (std::uint32_t v : perm) {
        if (v >= n || seen[v])
            throw ValidationError("index vector is not a permutation of 0.." +
                                  std::to_string(n - 1));
        seen[v] = true;
    }
}

// K_X o (K_Y reindexed by perm); exact unit diagonal survives (1*1).
GramMatrix permuted_product(const GramMatrix& kx, const GramMatrix& ky,
                            std::span<const std::uint32_t> perm) {
    const std::size_t n = kx.size();
    std::vector<double> out(n * n);
    const double* kxv = kx.data();
    const double* kyv = ky.data();
    for (std::size_t i = 0; i < n; ++i) {
        const double* kx_row = kxv + i * n;
        const double* ky_row = kyv + static_cast<std::size_t>(perm[i]) * n;
        double* out_row = out.data() + i * n;
        for (std::size_t j = 0; j < n; ++j)
            out_row[j] = kx_row[j] * ky_row[perm[j]];
    }
    return detail::make_gram_unchecked(n, std::move(out));
}

// Evaluate many entropies as one deterministic parallel batch. Each task
// builds its (possibly large) product matrix inside the worker so peak
// memory stays at one matrix per worker.
std::vector<double> entropy_batch(const std::vector<std::function<GramMatrix()>>& make,
                                  EntropyOrder order) {
    std::vector<double> out(make.size());
    parallel_for(make.size(),
                 [&](std::size_t i) { out[i] = matrix_entropy(make[i](), order); });
    return out;
}

// One DiME evaluation given both grams: entropy task 0 is the paired joint,
// tasks 1..p the permuted joints.
DimeEstimate dime_impl(const GramMatrix& kx, const GramMatrix& ky, EntropyOrder order,
                       const PermutationSet& perms) {
    const std::size_t p = perms.count();
    std::vector<std::function<GramMatrix()>> tasks;
    tasks.reserve(p + 1);
    tasks.emplace_back([&] { return hadamard(kx, ky); });
    for (std::size_t k = 0; k < p; ++k)
        tasks.emplace_back([&, k] { return permuted_product(kx, ky, perms.row(k)); });
    const std::vector<double> ent = entropy_batch(tasks, order);

    DimeEstimate est;
    est.paired_joint = ent[0];
    est.permuted_joints.assign(ent.begin() + 1, ent.end());
    // mean(permuted) - paired, summed as differences: when every permuted
    // joint equals the paired joint (constant view) the result is exactly 0.
    double acc = 0.0;
    for (double v : est.permuted_joints) acc += v - est.paired_joint;
    est.value = acc / static_cast<double>(p);
    est.alpha = order.value();
    est.seed = perms.seed;
    return est;
}

void check_dime_inputs(std::size_t nx, std::size_t ny, const PermutationSet& perms) {
    if (nx != ny)
        throw ValidationError("X and Y must have the same number of samples");
    if (nx < 2) throw ValidationError("need at least 2 samples");
    if (perms.n != nx)
        throw ValidationError("PermutationSet was sampled for n=" +
                              std::to_string(perms.n) + ", data has n=" +
                              std::to_string(nx));
    if (perms.count() == 0) throw ValidationError("PermutationSet is empty");
    for (std::size_t k = 0; k < perms.count(); ++k)
        check_permutation(perms.row(k), perms.n);
}

}  // namespace

PermutationSet sample_permutations(std::size_t n, std::size_t p, std::uint64_t seed) {
    if (n < 2)
        throw ValidationError("sample_permutations: need n >= 2 "
                              "(permuting a single sample is vacuous)");
    if (p < 1) throw ValidationError("sample_permutations: need p >= 1");

    PermutationSet set;
    set.n = n;
    set.seed = seed;
    set.rows.resize(p * n);
    for (std::size_t k = 0; k < p; ++k) {
        std::uint32_t* row = set.rows.data() + k * n;
        for (std::size_t i = 0; i < n; ++i) row[i] = static_cast<std::uint32_t>(i);
        Rng rng(derive_stream(seed, k));  // independent stream per permutation
        for (std::size_t i = n - 1; i > 0; --i) {
            const std::uint32_t j = rng.next_below(static_cast<std::uint32_t>(i + 1));
            std::swap(row[i], row[j]);
        }
    }
    return set;
}

double permuted_joint_entropy(const GramMatrix& kx, const GramMatrix& ky,
                              std::span<const std::uint32_t> perm, EntropyOrder order) {
    if (kx.size() != ky.size())
        throw ValidationError("joint entropy requires equal-size Gram matrices");
    check_permutation(perm, kx.size());
    return matrix_entropy(permuted_product(kx, ky, perm), order);
}

DimeEstimate dime_from_grams(const GramMatrix& kx, const GramMatrix& ky,
                             EntropyOrder order, const PermutationSet& perms) {
    check_dime_inputs(kx.size(), ky.size(), perms);
    return dime_impl(kx, ky, order, perms);
}

double PairEntropies::dime_value() const {
    double acc = 0.0;
    for (double v : permuted_joints) acc += v - paired_joint;
    return acc / static_cast<double>(permuted_joints.size());
}

double PairEntropies::mutual_information() const {
    return entropy_x + entropy_y - paired_joint;
}

PairEntropies pair_entropies(const GramMatrix& kx, const GramMatrix& ky,
                             EntropyOrder order, const PermutationSet& perms) {
    check_dime_inputs(kx.size(), ky.size(), perms);
    const std::size_t p = perms.count();
    std::vector<std::function<GramMatrix()>> tasks;
    tasks.reserve(p + 3);
    tasks.emplace_back([&] { return kx; });
    tasks.emplace_back([&] { return ky; });
    tasks.emplace_back([&] { return hadamard(kx, ky); });
    for (std::size_t k = 0; k < p; ++k)
        tasks.emplace_back([&, k] { return permuted_product(kx, ky, perms.row(k)); });
    const std::vector<double> ent = entropy_batch(tasks, order);

    PairEntropies out;
    out.entropy_x = ent[0];
    out.entropy_y = ent[1];
    out.paired_joint = ent[2];
    out.permuted_joints.assign(ent.begin() + 3, ent.end());
    return out;
}

DimeEstimate dime(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec_x,
                  const KernelSpec& spec_y, EntropyOrder order,
                  const PermutationSet& perms) {
    check_dime_inputs(x.rows(), y.rows(), perms);
    return dime_impl(gram_matrix(x, spec_x), gram_matrix(y, spec_y), order, perms);
}

BandwidthParams BandwidthParams::from_sigmas(double sigma_x, double sigma_y) {
    if (!std::isfinite(sigma_x) || sigma_x <= 0.0 || !std::isfinite(sigma_y) ||
        sigma_y <= 0.0)
        throw ValidationError("bandwidths must be finite and strictly positive");
    return BandwidthParams(std::log(sigma_x), std::log(sigma_y));
}

double BandwidthParams::sigma_x() const { return std::exp(log_sx_); }
double BandwidthParams::sigma_y() const { return std::exp(log_sy_); }

namespace {

// Shared core of the two dime_gradient overloads. All 4(1+p) entropy tasks
// run as one flat batch so the parallel width does not collapse at small p.
GradientEstimate gradient_impl(const PairwiseDistances& dx, const PairwiseDistances& dy,
                               const BandwidthParams& params, EntropyOrder order,
                               const PermutationSet& perms, KernelFamily family,
                               double h) {
    if (!std::isfinite(h) || h <= 0.0 || h > 0.1)
        throw ValidationError("finite-difference step must be in (0, 0.1]");
    if (dx.n != dy.n)
        throw ValidationError("X and Y must have the same number of samples");
    if (perms.n != dx.n || perms.count() == 0)
        throw ValidationError("PermutationSet does not match the data");

    const GramMatrix base_x =
        gram_from_distances(dx, KernelSpec(family, params.sigma_x()));
    const GramMatrix base_y =
        gram_from_distances(dy, KernelSpec(family, params.sigma_y()));
    const GramMatrix x_plus = gram_from_distances(
        dx, KernelSpec(family, std::exp(params.log_sigma_x() + h)));
    const GramMatrix x_minus = gram_from_distances(
        dx, KernelSpec(family, std::exp(params.log_sigma_x() - h)));
    const GramMatrix y_plus = gram_from_distances(
        dy, KernelSpec(family, std::exp(params.log_sigma_y() + h)));
    const GramMatrix y_minus = gram_from_distances(
        dy, KernelSpec(family, std::exp(params.log_sigma_y() - h)));

    const GramMatrix* pairs[4][2] = {{&x_plus, &base_y},
                                     {&x_minus, &base_y},
                                     {&base_x, &y_plus},
                                     {&base_x, &y_minus}};
    const std::size_t p = perms.count();
    std::vector<std::function<GramMatrix()>> tasks;
    tasks.reserve(4 * (p + 1));
    for (auto& pair : pairs) {
        const GramMatrix* a = pair[0];
        const GramMatrix* b = pair[1];
        tasks.emplace_back([a, b] { return hadamard(*a, *b); });
        for (std::size_t k = 0; k < p; ++k)
            tasks.emplace_back(
                [a, b, k, &perms] { return permuted_product(*a, *b, perms.row(k)); });
    }
    const std::vector<double> ent = entropy_batch(tasks, order);

    double value[4];
    for (int e = 0; e < 4; ++e) {
        const std::size_t off = static_cast<std::size_t>(e) * (p + 1);
        double mean = 0.0;
        for (std::size_t k = 0; k < p; ++k) mean += ent[off + 1 + k];
        value[e] = mean / static_cast<double>(p) - ent[off];
    }
    return {(value[0] - value[1]) / (2.0 * h), (value[2] - value[3]) / (2.0 * h)};
}

}  // namespace

GradientEstimate dime_gradient(const PairwiseDistances& dx, const PairwiseDistances& dy,
                               const BandwidthParams& params, EntropyOrder order,
                               const PermutationSet& perms, KernelFamily family,
                               double fd_step) {
    for (std::size_t k = 0; k < perms.count(); ++k)
        check_permutation(perms.row(k), perms.n);
    return gradient_impl(dx, dy, params, order, perms, family, fd_step);
}

GradientEstimate dime_gradient(const DataMatrix& x, const DataMatrix& y,
                               const BandwidthParams& params, EntropyOrder order,
                               const PermutationSet& perms, KernelFamily family,
                               double fd_step) {
    check_dime_inputs(x.rows(), y.rows(), perms);
    return gradient_impl(compute_distances(x, family), compute_distances(y, family),
                         params, order, perms, family, fd_step);
}

OptimizeResult optimize_bandwidth(const DataMatrix& x, const DataMatrix& y,
                                  const BandwidthParams& init, EntropyOrder order,
                                  const PermutationSet& perms,
                                  const OptimizeOptions& options) {
    if (options.steps < 1) throw ValidationError("optimizer needs steps >= 1");
    if (!std::isfinite(options.learning_rate) || options.learning_rate <= 0.0)
        throw ValidationError("learning rate must be finite and > 0");
    if (options.tie && init.log_sigma_x() != init.log_sigma_y())
        throw ValidationError("tied bandwidths require equal initial sigmas");
    check_dime_inputs(x.rows(), y.rows(), perms);

    const PairwiseDistances dx = compute_distances(x, options.family);
    const PairwiseDistances dy = compute_distances(y, options.family);
    const std::size_t p = perms.count();

    double theta[2] = {init.log_sigma_x(), init.log_sigma_y()};
    double m[2] = {0.0, 0.0};
    double v[2] = {0.0, 0.0};

    OptimizeResult result{BandwidthParams::from_logs(theta[0], theta[1]), {}};
    result.trace.reserve(options.steps);

    for (std::size_t step = 0; step < options.steps; ++step) {
        const PermutationSet step_perms = sample_permutations(
            x.rows(), p, derive_stream(perms.seed, "optimize.step", step));
        const BandwidthParams current = BandwidthParams::from_logs(theta[0], theta[1]);
        const GradientEstimate grad = gradient_impl(
            dx, dy, current, order, step_perms, options.family, options.fd_step);

        double g[2] = {grad.d_log_sigma_x, grad.d_log_sigma_y};
        if (options.tie) {
            const double shared = g[0] + g[1];  // d/d(theta) of tied objective
            g[0] = shared;
            g[1] = shared;
        }
        if (!std::isfinite(g[0]) || !std::isfinite(g[1]))
            throw NumericalError("optimizer diverged at step " + std::to_string(step) +
                                 ": non-finite gradient");

        const double t = static_cast<double>(step + 1);
        for (int i = 0; i < 2; ++i) {
            m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
            v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
            const double m_hat = m[i] / (1.0 - std::pow(kAdamBeta1, t));
            const double v_hat = v[i] / (1.0 - std::pow(kAdamBeta2, t));
            theta[i] += options.learning_rate * m_hat / (std::sqrt(v_hat) + kAdamEps);
        }
        if (options.tie) theta[1] = theta[0];
        if (!std::isfinite(theta[0]) || !std::isfinite(theta[1]))
            throw NumericalError("optimizer diverged at step " + std::to_string(step) +
                                 ": non-finite parameters");

        const BandwidthParams updated = BandwidthParams::from_logs(theta[0], theta[1]);
        const GramMatrix kx =
            gram_from_distances(dx, KernelSpec(options.family, updated.sigma_x()));
        const GramMatrix ky =
            gram_from_distances(dy, KernelSpec(options.family, updated.sigma_y()));
        result.trace.push_back(dime_impl(kx, ky, order, step_perms).value);
    }

    result.params = BandwidthParams::from_logs(theta[0], theta[1]);
    return result;
}

OptimizeResult optimize_bandwidth(const DataMatrix& x, const DataMatrix& y,
                                  const BandwidthParams& init, EntropyOrder order,
                                  const PermutationSet& perms, std::size_t steps,
                                  double learning_rate) {
    OptimizeOptions options;
    options.steps = steps;
    options.learning_rate = learning_rate;
    return optimize_bandwidth(x, y, init, order, perms, options);
}

double independence_test(const DataMatrix& x, const DataMatrix& y,
                         const KernelSpec& spec_x, const KernelSpec& spec_y,
                         EntropyOrder order, std::size_t trials, std::uint64_t seed) {
    if (trials < 20) throw ValidationError("independence test needs trials >= 20");
    if (x.rows() != y.rows())
        throw ValidationError("X and Y must have the same number of samples");
    if (x.rows() < 3)
        throw ValidationError("independence test needs n >= 3: with two samples the "
                              "permutation null is degenerate");

    const GramMatrix kx = gram_matrix(x, spec_x);
    const GramMatrix ky = gram_matrix(y, spec_y);
    // Trial t draws its permutation from stream (seed, t).
    const PermutationSet perms = sample_permutations(x.rows(), trials, seed);

    std::vector<std::function<GramMatrix()>> tasks;
    tasks.reserve(trials + 1);
    tasks.emplace_back([&] { return hadamard(kx, ky); });
    for (std::size_t t = 0; t < trials; ++t)
        tasks.emplace_back([&, t] { return permuted_product(kx, ky, perms.row(t)); });
    const std::vector<double> ent = entropy_batch(tasks, order);

    std::size_t not_exceeding = 0;
    for (std::size_t t = 0; t < trials; ++t)
        if (ent[0] >= ent[1 + t]) ++not_exceeding;
    return static_cast<double>(1 + not_exceeding) / static_cast<double>(trials + 1);
}

}  // namespace dime
