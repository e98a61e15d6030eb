#include "dime/harness.hpp"

#include <cmath>
#include <string>

#include "dime/error.hpp"
#include "dime/rng.hpp"

namespace dime {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

// Adam ascent state over (log sigma_x, log sigma_y), shared by the
// staircase and grid loops. Mirrors optimize_bandwidth's update exactly.
struct AdamState {
    double theta[2];
    double m[2] = {0.0, 0.0};
    double v[2] = {0.0, 0.0};
    std::size_t t = 0;

    AdamState(double log_sx, double log_sy) : theta{log_sx, log_sy} {}

    BandwidthParams params() const {
        return BandwidthParams::from_logs(theta[0], theta[1]);
    }

    void step(const GradientEstimate& grad, double lr, bool tie,
              std::uint64_t iteration) {
        double g[2] = {grad.d_log_sigma_x, grad.d_log_sigma_y};
        if (tie) {
            const double shared = g[0] + g[1];
            g[0] = shared;
            g[1] = shared;
        }
        if (!std::isfinite(g[0]) || !std::isfinite(g[1]))
            throw NumericalError("iteration " + std::to_string(iteration) +
                                 ": non-finite bandwidth gradient");
        ++t;
        const double td = static_cast<double>(t);
        for (int i = 0; i < 2; ++i) {
            m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
            v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
            const double m_hat = m[i] / (1.0 - std::pow(kAdamBeta1, td));
            const double v_hat = v[i] / (1.0 - std::pow(kAdamBeta2, td));
            theta[i] += lr * m_hat / (std::sqrt(v_hat) + kAdamEps);
        }
        if (tie) theta[1] = theta[0];
        if (!std::isfinite(theta[0]) || !std::isfinite(theta[1]))
            throw NumericalError("iteration " + std::to_string(iteration) +
                                 ": bandwidth parameters diverged");
    }
};

struct WindowAccumulator {
    std::vector<double> trace;
    std::size_t window;

    explicit WindowAccumulator(std::size_t w) : window(w) {}

    // Push a value, return (mean, population variance) of the trailing window.
    std::pair<double, double> push(double value) {
        trace.push_back(value);
        const std::size_t lo = trace.size() > window ? trace.size() - window : 0;
        const std::size_t count = trace.size() - lo;
        double mean = 0.0;
        for (std::size_t i = lo; i < trace.size(); ++i) mean += trace[i];
        mean /= static_cast<double>(count);
        double var = 0.0;
        for (std::size_t i = lo; i < trace.size(); ++i) {
            const double dv = trace[i] - mean;
            var += dv * dv;
        }
        var /= static_cast<double>(count);
        return {mean, var};
    }
};

void validate_alpha(double alpha) { EntropyOrder check(alpha); }

}  // namespace

double StaircaseConfig::resolved_sigma_init() const {
    return sigma_init ? *sigma_init : std::sqrt(static_cast<double>(d));
}

void StaircaseConfig::validate() const {
    if (d < 1) throw ValidationError("staircase: need d >= 1");
    if (mi_levels.empty()) throw ValidationError("staircase: need at least one MI level");
    for (std::size_t i = 0; i < mi_levels.size(); ++i) {
        if (!std::isfinite(mi_levels[i]) || mi_levels[i] < 0.0)
            throw ValidationError("staircase: MI levels must be finite and >= 0");
        if (i > 0 && mi_levels[i] < mi_levels[i - 1])
            throw ValidationError("staircase: MI levels must be nondecreasing");
    }
    if (iterations_per_level < 1)
        throw ValidationError("staircase: need iterations_per_level >= 1");
    if (batch_size < 2) throw ValidationError("staircase: need batch_size >= 2");
    if (permutations < 1) throw ValidationError("staircase: need permutations >= 1");
    if (window < 1) throw ValidationError("staircase: need window >= 1");
    validate_alpha(alpha);
    const double sigma = resolved_sigma_init();
    if (!std::isfinite(sigma) || sigma <= 0.0)
        throw ValidationError("staircase: sigma_init must be finite and > 0");
    if (optimize && (!std::isfinite(learning_rate) || learning_rate <= 0.0))
        throw ValidationError("staircase: learning rate must be finite and > 0");
}

std::vector<ExperimentRecord> run_staircase(const StaircaseConfig& cfg) {
    cfg.validate();
    const EntropyOrder order(cfg.alpha);
    const double log_s0 = std::log(cfg.resolved_sigma_init());
    AdamState adam(log_s0, log_s0);
    WindowAccumulator window(cfg.window);

    std::vector<ExperimentRecord> records;
    records.reserve(cfg.mi_levels.size() * cfg.iterations_per_level);

    std::uint64_t g = 0;
    for (std::size_t level = 0; level < cfg.mi_levels.size(); ++level) {
        const double rho = rho_for_mi(cfg.d, cfg.mi_levels[level]);
        const double level_mi = true_mi(cfg.d, rho);
        for (std::size_t it = 0; it < cfg.iterations_per_level; ++it, ++g) {
            try {
                const DataPair batch = sample_correlated_gaussian(
                    {cfg.batch_size, cfg.d, rho,
                     derive_stream(cfg.seed, "staircase.batch", g)});
                const PairwiseDistances dist_x = compute_distances(batch.x, cfg.family);
                const PairwiseDistances dist_y = compute_distances(batch.y, cfg.family);
                const PermutationSet perms =
                    sample_permutations(cfg.batch_size, cfg.permutations,
                                        derive_stream(cfg.seed, "staircase.perms", g));

                const BandwidthParams params = adam.params();
                const GramMatrix kx = gram_from_distances(
                    dist_x, KernelSpec(cfg.family, params.sigma_x()));
                const GramMatrix ky = gram_from_distances(
                    dist_y, KernelSpec(cfg.family, params.sigma_y()));

                const PairEntropies ent = pair_entropies(kx, ky, order, perms);
                const double dime_value = ent.dime_value();

                if (cfg.optimize) {
                    const GradientEstimate grad =
                        dime_gradient(dist_x, dist_y, params, order, perms,
                                      cfg.family, cfg.fd_step);
                    adam.step(grad, cfg.learning_rate, cfg.tie, g);
                }

                const auto [w_mean, w_var] = window.push(dime_value);
                records.push_back({g, static_cast<std::uint32_t>(level + 1), rho,
                                   level_mi, dime_value, ent.mutual_information(),
                                   params.sigma_x(), params.sigma_y(), w_mean, w_var});
            } catch (const NumericalError& e) {
                throw NumericalError("staircase iteration " + std::to_string(g) + ": " +
                                     e.what());
            }
        }
    }
    return records;
}

std::vector<double> relative_normalize(std::span<const ExperimentRecord> records,
                                       std::size_t anchor_begin,
                                       std::size_t anchor_end) {
    if (anchor_begin >= anchor_end || anchor_end > records.size())
        throw ValidationError("relative_normalize: anchor window must be non-empty "
                              "and inside the run");
    double anchor = 0.0;
    for (std::size_t i = anchor_begin; i < anchor_end; ++i)
        anchor += records[i].dime_value;
    anchor /= static_cast<double>(anchor_end - anchor_begin);
    if (std::fabs(anchor) <= 1e-12)
        throw NumericalError("relative_normalize: anchor window mean is degenerate "
                             "(|mean| <= 1e-12)");
    std::vector<double> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.dime_value / anchor);
    return out;
}

SlidingStats sliding_stats(std::span<const double> series, std::size_t window) {
    if (series.empty()) throw ValidationError("sliding_stats: empty series");
    if (window < 1) throw ValidationError("sliding_stats: need window >= 1");
    SlidingStats out;
    out.means.reserve(series.size());
    out.variances.reserve(series.size());
    WindowAccumulator acc(window);
    for (double v : series) {
        const auto [mean, var] = acc.push(v);
        out.means.push_back(mean);
        out.variances.push_back(var);
    }
    return out;
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
    if (count < 2) throw ValidationError("log_spaced: need count >= 2");
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo <= 0.0 || hi <= lo)
        throw ValidationError("log_spaced: need 0 < lo < hi");
    std::vector<double> out(count);
    const double ratio = std::log(hi / lo);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = lo * std::exp(ratio * static_cast<double>(i) /
                               static_cast<double>(count - 1));
    out.front() = lo;
    out.back() = hi;
    return out;
}

void SweepConfig::validate() const {
    if (n < 2) throw ValidationError("sweep: need n >= 2");
    if (d < 1) throw ValidationError("sweep: need d >= 1");
    if (!std::isfinite(target_mi) || target_mi < 0.0)
        throw ValidationError("sweep: target MI must be finite and >= 0");
    if (sigmas.size() < 10)
        throw ValidationError("sweep: need at least 10 grid points");
    for (std::size_t i = 0; i < sigmas.size(); ++i) {
        if (!std::isfinite(sigmas[i]) || sigmas[i] <= 0.0)
            throw ValidationError("sweep: sigmas must be finite and > 0");
        if (i > 0 && sigmas[i] <= sigmas[i - 1])
            throw ValidationError("sweep: sigmas must be strictly ascending");
    }
    if (permutations < 1) throw ValidationError("sweep: need permutations >= 1");
    validate_alpha(alpha);
}

std::vector<SweepPoint> run_bandwidth_sweep(const SweepConfig& cfg) {
    cfg.validate();
    const EntropyOrder order(cfg.alpha);
    const double rho = rho_for_mi(cfg.d, cfg.target_mi);
    const DataPair batch = sample_correlated_gaussian(
        {cfg.n, cfg.d, rho, derive_stream(cfg.seed, "sweep.batch", 0)});
    const PairwiseDistances dist_x = compute_distances(batch.x, cfg.family);
    const PairwiseDistances dist_y = compute_distances(batch.y, cfg.family);
    const PermutationSet perms = sample_permutations(
        cfg.n, cfg.permutations, derive_stream(cfg.seed, "sweep.perms", 0));

    std::vector<SweepPoint> table;
    table.reserve(cfg.sigmas.size());
    for (double sigma : cfg.sigmas) {
        const KernelSpec spec(cfg.family, sigma);
        const GramMatrix kx = gram_from_distances(dist_x, spec);
        const GramMatrix ky = gram_from_distances(dist_y, spec);
        const PairEntropies ent = pair_entropies(kx, ky, order, perms);
        table.push_back({sigma, ent.dime_value(), ent.mutual_information()});
    }
    return table;
}

std::string to_string(BandwidthMode mode) {
    return mode == BandwidthMode::fixed ? "fixed" : "learned";
}

void GridConfig::validate() const {
    if (batch_sizes.empty() || dims.empty() || modes.empty())
        throw ValidationError("grid: batch sizes, dims and modes must be nonempty");
    for (std::size_t n : batch_sizes)
        if (n < 2) throw ValidationError("grid: batch sizes must be >= 2");
    for (std::size_t d : dims)
        if (d < 1) throw ValidationError("grid: dims must be >= 1");
    if (!std::isfinite(target_mi) || target_mi < 0.0)
        throw ValidationError("grid: target MI must be finite and >= 0");
    if (measure_iterations < 2)
        throw ValidationError("grid: need measure_iterations >= 2 for a sample std");
    if (permutations < 1) throw ValidationError("grid: need permutations >= 1");
    if (!std::isfinite(learning_rate) || learning_rate <= 0.0)
        throw ValidationError("grid: learning rate must be finite and > 0");
    validate_alpha(alpha);
}

namespace {

GridCell run_grid_cell(const GridConfig& cfg, std::size_t n, std::size_t d,
                       BandwidthMode mode, std::uint64_t cell_seed) {
    const EntropyOrder order(cfg.alpha);
    const double rho = rho_for_mi(d, cfg.target_mi);
    const bool learned = mode == BandwidthMode::learned;
    // Fixed cells use the fixed-bandwidth convention sqrt(d/2); learned
    // cells start from the optimizer convention sqrt(d).
    const double sigma0 = learned ? std::sqrt(static_cast<double>(d))
                                  : std::sqrt(static_cast<double>(d) / 2.0);
    AdamState adam(std::log(sigma0), std::log(sigma0));
    const std::size_t total =
        cfg.measure_iterations + (learned ? cfg.warmup_iterations : 0);

    std::vector<double> measured;
    measured.reserve(cfg.measure_iterations);
    for (std::size_t it = 0; it < total; ++it) {
        const DataPair batch = sample_correlated_gaussian(
            {n, d, rho, derive_stream(cell_seed, "grid.batch", it)});
        const PairwiseDistances dist_x = compute_distances(batch.x, cfg.family);
        const PairwiseDistances dist_y = compute_distances(batch.y, cfg.family);
        const PermutationSet perms = sample_permutations(
            n, cfg.permutations, derive_stream(cell_seed, "grid.perms", it));

        const BandwidthParams params = adam.params();
        const GramMatrix kx =
            gram_from_distances(dist_x, KernelSpec(cfg.family, params.sigma_x()));
        const GramMatrix ky =
            gram_from_distances(dist_y, KernelSpec(cfg.family, params.sigma_y()));
        if (it + cfg.measure_iterations >= total)
            measured.push_back(dime_from_grams(kx, ky, order, perms).value);

        if (learned) {
            const GradientEstimate grad = dime_gradient(
                dist_x, dist_y, params, order, perms, cfg.family, cfg.fd_step);
            adam.step(grad, cfg.learning_rate, /*tie=*/false, it);
        }
    }

    double mean = 0.0;
    for (double v : measured) mean += v;
    mean /= static_cast<double>(measured.size());
    double ss = 0.0;
    for (double v : measured) {
        const double dv = v - mean;
        ss += dv * dv;
    }
    const double sample_std =
        std::sqrt(ss / static_cast<double>(measured.size() - 1));

    const BandwidthParams final_params = adam.params();
    return {n,    d,    mode, mean, sample_std, final_params.sigma_x(),
            final_params.sigma_y()};
}

}  // namespace

std::vector<GridCell> run_grid(const GridConfig& cfg) {
    cfg.validate();
    std::vector<GridCell> cells;
    cells.reserve(cfg.batch_sizes.size() * cfg.dims.size() * cfg.modes.size());
    std::uint64_t cell_index = 0;
    for (std::size_t n : cfg.batch_sizes)
        for (std::size_t d : cfg.dims)
            for (BandwidthMode mode : cfg.modes) {
                cells.push_back(run_grid_cell(
                    cfg, n, d, mode,
                    derive_stream(cfg.seed, "grid.cell", cell_index)));
                ++cell_index;
            }
    return cells;
}

}  // namespace dime
