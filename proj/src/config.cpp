#include "hj/config.hpp"

#include <cmath>

#include "hj/errors.hpp"

namespace hj {

namespace {

void require_positive(const char* key, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key, "must be a positive finite number");
}

}  // namespace

void SolverConfig::validate() const {
    if (resolution < 2) throw ConfigError("resolution", "must be >= 2");
    if (curve_nodes < 0) throw ConfigError("curve_nodes", "must be >= 0");
    if (substeps < 1) throw ConfigError("substeps", "must be >= 1");
    require_positive("grad_tol", grad_tol);
    if (max_iterations < 1) throw ConfigError("max_iterations", "must be >= 1");
    require_positive("min_horizon", min_horizon);
    if (max_winding < 0 || max_winding > 4) throw ConfigError("max_winding", "must be in [0, 4]");
    if (random_starts < 0) throw ConfigError("random_starts", "must be >= 0");
    if (!(random_amplitude >= 0.0) || !std::isfinite(random_amplitude)) {
        throw ConfigError("random_amplitude", "must be a non-negative finite number");
    }
    require_positive("stationary_step", stationary_step);
    if (stationary_step < min_horizon) throw ConfigError("stationary_step", "must be >= min_horizon");
    require_positive("fp_tol", fp_tol);
    if (fp_max_iter < 1) throw ConfigError("fp_max_iter", "must be >= 1");
    require_positive("tail_tol", tail_tol);
    require_positive("max_tail_horizon", max_tail_horizon);
    if (threads < 0) throw ConfigError("threads", "must be >= 0");
}

}  // namespace hj
