#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dime/dime.hpp"
#include "dime/kernels.hpp"
#include "dime/synthdata.hpp"

namespace dime {

// The staircase experiment: correlation rises every iterations_per_level
// iterations through the MI levels; each iteration draws a fresh batch and
// measures DiME and matrix MI, optionally taking one Adam step on the
// bandwidths.
struct StaircaseConfig {
    std::size_t d = 20;
    std::vector<double> mi_levels = {2.0, 4.0, 6.0, 8.0, 10.0};  // nondecreasing
    std::size_t iterations_per_level = 500;  // full-scale runs use 4000
    std::size_t batch_size = 1024;
    double alpha = 1.01;
    std::size_t permutations = 5;
    std::optional<double> sigma_init;  // both kernels; defaults to sqrt(d)
    bool optimize = false;
    double learning_rate = 0.01;
    double fd_step = 1e-4;
    bool tie = false;
    KernelFamily family = KernelFamily::gaussian;
    std::size_t window = 200;
    std::uint64_t seed = 0;

    double resolved_sigma_init() const;
    void validate() const;  // throws ValidationError
};

struct ExperimentRecord {
    std::uint64_t iteration = 0;  // global, 0-based
    std::uint32_t level = 0;      // 1-based
    double rho = 0.0;
    double true_mi = 0.0;
    double dime_value = 0.0;
    double matrix_mi = 0.0;
    double sigma_x = 0.0;  // bandwidth used for this iteration's estimate
    double sigma_y = 0.0;
    double window_mean = 0.0;  // trailing-window stats of the DiME trace
    double window_var = 0.0;   // population variance
};

// One record per iteration, levels in order, deterministic per seed.
// Numerical failures carry the global iteration index in the message.
std::vector<ExperimentRecord> run_staircase(const StaircaseConfig& cfg);

// DiME trace divided by its mean over records [anchor_begin, anchor_end).
// The anchor mean must be nonzero (|mean| > 1e-12).
std::vector<double> relative_normalize(std::span<const ExperimentRecord> records,
                                       std::size_t anchor_begin,
                                       std::size_t anchor_end);

struct SlidingStats {
    std::vector<double> means;
    std::vector<double> variances;  // population
};

// Trailing-window statistics: entry i covers max(0, i-window+1)..i.
SlidingStats sliding_stats(std::span<const double> series, std::size_t window);

// count log-spaced values from lo to hi inclusive; count >= 2, 0 < lo < hi.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

// Bandwidth sweep: one fixed dataset and one PermutationSet, both quantities
// evaluated at every sigma (the same sigma drives both kernels).
struct SweepConfig {
    std::size_t n = 1024;
    std::size_t d = 20;
    double target_mi = 10.0;
    std::vector<double> sigmas;  // >= 10 ascending positive values
    double alpha = 1.01;
    std::size_t permutations = 5;
    KernelFamily family = KernelFamily::gaussian;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SweepPoint {
    double sigma = 0.0;
    double dime_value = 0.0;
    double matrix_mi = 0.0;
};

std::vector<SweepPoint> run_bandwidth_sweep(const SweepConfig& cfg);

// Batch-size / dimensionality grid at fixed target MI. Fixed-bandwidth
// cells run `measure_iterations` at sigma = sqrt(d/2); learned cells run
// `warmup_iterations + measure_iterations` starting from sigma = sqrt(d)
// with one Adam step per iteration. Summaries cover the final
// measure_iterations in both modes.
enum class BandwidthMode { fixed, learned };

std::string to_string(BandwidthMode mode);

struct GridConfig {
    std::vector<std::size_t> batch_sizes = {64, 1024};
    std::vector<std::size_t> dims = {5, 128};
    double target_mi = 10.0;
    std::vector<BandwidthMode> modes = {BandwidthMode::fixed, BandwidthMode::learned};
    std::size_t measure_iterations = 8;  // >= 2 (sample std needs two points)
    std::size_t warmup_iterations = 16;
    double alpha = 1.01;
    std::size_t permutations = 1;
    double learning_rate = 0.01;
    double fd_step = 1e-4;
    KernelFamily family = KernelFamily::gaussian;
    std::uint64_t seed = 0;

    void validate() const;
};

struct GridCell {
    std::size_t batch_size = 0;
    std::size_t dim = 0;
    BandwidthMode mode = BandwidthMode::fixed;
    double dime_mean = 0.0;  // over the measured iterations
    double dime_std = 0.0;   // sample standard deviation
    double sigma_x = 0.0;    // final bandwidths
    double sigma_y = 0.0;
};

// Cells ordered batch_size-major, then dim, then mode; each cell's
// randomness comes from a stream derived from (seed, cell index).
std::vector<GridCell> run_grid(const GridConfig& cfg);

}  // namespace dime
