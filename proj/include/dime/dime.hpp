#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dime/entropy.hpp"
#include "dime/kernels.hpp"
#include "dime/matrix.hpp"

namespace dime {

// p uniform random permutations of {0..n-1}. Row k is drawn by Fisher-Yates
// from the stream derived from (seed, k), so the set is reproducible and
// rows are mutually independent.
struct PermutationSet {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::vector<std::uint32_t> rows;  // count x n, row-major
    std::size_t count() const { return n == 0 ? 0 : rows.size() / n; }
    std::span<const std::uint32_t> row(std::size_t k) const {
        return {rows.data() + k * n, n};
    }
};

// n >= 2 (permuting fewer samples is vacuous), p >= 1.
PermutationSet sample_permutations(std::size_t n, std::size_t p, std::uint64_t seed);

// Joint entropy of K_X with K_Y conjugated by the permutation: the (i,j)
// entry of the permuted factor is K_Y(perm[i], perm[j]) — an index gather,
// the permutation matrix is never materialized. perm must be a bijection.
double permuted_joint_entropy(const GramMatrix& kx, const GramMatrix& ky,
                              std::span<const std::uint32_t> perm, EntropyOrder order);

struct DimeEstimate {
    double value = 0.0;         // mean(permuted_joints) - paired_joint
    double paired_joint = 0.0;  // S_alpha(K_X o K_Y)
    std::vector<double> permuted_joints;
    double alpha = 1.0;
    std::uint64_t seed = 0;  // seed of the PermutationSet used
};

// The dependence estimate: how much joint entropy the real pairing loses
// relative to random pairings. Lower-bounds matrix mutual information.
DimeEstimate dime(const DataMatrix& x, const DataMatrix& y, const KernelSpec& spec_x,
                  const KernelSpec& spec_y, EntropyOrder order,
                  const PermutationSet& perms);

// Same estimate when the Gram matrices are already built.
DimeEstimate dime_from_grams(const GramMatrix& kx, const GramMatrix& ky,
                             EntropyOrder order, const PermutationSet& perms);

// Every entropy the experiments need from one (K_X, K_Y, perms) triple,
// evaluated as a single parallel batch of eigendecompositions.
struct PairEntropies {
    double entropy_x = 0.0;
    double entropy_y = 0.0;
    double paired_joint = 0.0;
    std::vector<double> permuted_joints;

    double dime_value() const;          // mean(permuted_joints) - paired_joint
    double mutual_information() const;  // entropy_x + entropy_y - paired_joint
};
PairEntropies pair_entropies(const GramMatrix& kx, const GramMatrix& ky,
                             EntropyOrder order, const PermutationSet& perms);

// Kernel bandwidths for the two views, stored in log space so optimization
// is unconstrained while sigma stays strictly positive.
class BandwidthParams {
public:
    static BandwidthParams from_sigmas(double sigma_x, double sigma_y);
    static BandwidthParams from_logs(double log_sigma_x, double log_sigma_y) {
        return BandwidthParams(log_sigma_x, log_sigma_y);
    }

    double sigma_x() const;
    double sigma_y() const;
    double log_sigma_x() const { return log_sx_; }
    double log_sigma_y() const { return log_sy_; }

private:
    BandwidthParams(double lx, double ly) : log_sx_(lx), log_sy_(ly) {}
    double log_sx_, log_sy_;
};

struct GradientEstimate {
    double d_log_sigma_x = 0.0;
    double d_log_sigma_y = 0.0;
};

// Central finite-difference gradient of dime(...).value with respect to
// (log sigma_x, log sigma_y), step h in log space, all four evaluations on
// the SAME PermutationSet (common random numbers).
GradientEstimate dime_gradient(const DataMatrix& x, const DataMatrix& y,
                               const BandwidthParams& params, EntropyOrder order,
                               const PermutationSet& perms,
                               KernelFamily family = KernelFamily::gaussian,
                               double fd_step = 1e-4);

// Distance-cached variant: bandwidth moves only re-exponentiate.
GradientEstimate dime_gradient(const PairwiseDistances& dx, const PairwiseDistances& dy,
                               const BandwidthParams& params, EntropyOrder order,
                               const PermutationSet& perms,
                               KernelFamily family = KernelFamily::gaussian,
                               double fd_step = 1e-4);

struct OptimizeOptions {
    std::size_t steps = 1;
    double learning_rate = 0.01;
    double fd_step = 1e-4;
    bool tie = false;  // share one bandwidth between the two kernels
    KernelFamily family = KernelFamily::gaussian;
};

struct OptimizeResult {
    BandwidthParams params;     // final bandwidths
    std::vector<double> trace;  // DiME after each step (that step's permutations)
};

// Adam ascent (beta1=0.9, beta2=0.999, eps=1e-8) on (log sigma_x, log
// sigma_y). Step t resamples a fresh PermutationSet from stream
// (perms.seed, "optimize.step", t) with perms.count() permutations; within a
// step the gradient and the trace value share that set.
OptimizeResult optimize_bandwidth(const DataMatrix& x, const DataMatrix& y,
                                  const BandwidthParams& init, EntropyOrder order,
                                  const PermutationSet& perms,
                                  const OptimizeOptions& options);

// Convenience overload: steps/lr positional, other options default.
OptimizeResult optimize_bandwidth(const DataMatrix& x, const DataMatrix& y,
                                  const BandwidthParams& init, EntropyOrder order,
                                  const PermutationSet& perms, std::size_t steps,
                                  double learning_rate);

// Permutation test of independence. Statistic per trial: paired joint
// entropy vs the joint entropy under a fresh permutation; returns
// p = (1 + #{paired >= permuted}) / (trials + 1)  (add-one smoothing).
// Requires trials >= 20 and n >= 3 (a two-sample permutation null is
// degenerate even though sample_permutations accepts n = 2).
double independence_test(const DataMatrix& x, const DataMatrix& y,
                         const KernelSpec& spec_x, const KernelSpec& spec_y,
                         EntropyOrder order, std::size_t trials, std::uint64_t seed);

}  // namespace dime
