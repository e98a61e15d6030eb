#include "dime/synthdata.hpp"

#include <cmath>

#include "dime/error.hpp"
#include "dime/parallel.hpp"
#include "dime/rng.hpp"

namespace dime {

void GaussianPairConfig::validate() const {
    if (n < 2) throw ValidationError("Gaussian pair config: need n >= 2 samples");
    if (d < 1) throw ValidationError("Gaussian pair config: need d >= 1 coordinates");
    if (!std::isfinite(rho) || rho < 0.0 || rho >= 1.0)
        throw ValidationError("Gaussian pair config: rho must lie in [0, 1)");
}

DataPair sample_correlated_gaussian(const GaussianPairConfig& cfg) {
    cfg.validate();
    DataPair out{DataMatrix(cfg.n, cfg.d), DataMatrix(cfg.n, cfg.d)};
    const double mix = std::sqrt(1.0 - cfg.rho * cfg.rho);
    // Column streams: deterministic and independent, so coordinates can be
    // filled concurrently without changing a single byte of the output.
    parallel_for(cfg.d, [&](std::size_t j) {
        Rng rng(derive_stream(cfg.seed, "gaussian.column", j));
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const double z1 = rng.next_normal();
            const double z2 = rng.next_normal();
            out.x(i, j) = z1;
            out.y(i, j) = cfg.rho * z1 + mix * z2;
        }
    });
    return out;
}

double true_mi(std::size_t d, double rho) {
    if (d < 1) throw ValidationError("true_mi: need d >= 1");
    if (!std::isfinite(rho) || rho < 0.0 || rho >= 1.0)
        throw ValidationError("true_mi: rho must lie in [0, 1)");
    // fma forms 1 - rho^2 with a single rounding; for rho near 1 that factor
    // is tiny and naive evaluation would lose several digits of MI.
    return -(static_cast<double>(d) / 2.0) * std::log(std::fma(-rho, rho, 1.0));
}

double rho_for_mi(std::size_t d, double target_mi) {
    if (d < 1) throw ValidationError("rho_for_mi: need d >= 1");
    if (!std::isfinite(target_mi) || target_mi < 0.0)
        throw ValidationError("rho_for_mi: target MI must be finite and >= 0");
    const double e = std::exp(-2.0 * target_mi / static_cast<double>(d));
    return std::sqrt(1.0 - e);
}

}  // namespace dime
