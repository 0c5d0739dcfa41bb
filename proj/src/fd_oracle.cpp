#include "hj/fd_oracle.hpp"

#include <algorithm>
#include <cmath>

#include "hj/errors.hpp"

namespace hj {

void FDConfig::validate() const {
    if (resolution < 3) throw ConfigError("fd.resolution", "must be >= 3");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("fd.cfl", "must lie in (0, 1]");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("fd.t_end", "must be positive");
    if (!(steady_tol > 0.0)) throw ConfigError("fd.steady_tol", "must be positive");
    if (max_steps < 1) throw ConfigError("fd.max_steps", "must be >= 1");
    for (double nu : artificial_viscosity) {
        if (!std::isfinite(nu)) throw ConfigError("fd.artificial_viscosity", "must be finite");
    }
}

namespace {

class Stepper {
public:
    Stepper(const HamiltonianModel& h, const FDConfig& cfg, GridFunction u)
        : h_(h), cfg_(cfg), u_(std::move(u)), next_(u_), dim_(u_.domain.dimension) {
        for (int a = 0; a < dim_; ++a) dx_[a] = u_.spacing(a);
        p_.resize(u_.size());
    }

    /// Advances one step from time t, returning dt (at most dt_max).
    double step(double t, FDResult& diag, double dt_max = std::numeric_limits<double>::infinity()) {
        const std::size_t n = u_.size();
        Coord nu{0.0, 0.0};
        // Central differences and the largest |H_p| over one-sided and central slopes.
        for (std::size_t k = 0; k < n; ++k) {
            const Coord x = u_.node(k);
            Coord pc{0.0, 0.0}, pm{0.0, 0.0}, pp{0.0, 0.0};
            for (int a = 0; a < dim_; ++a) {
                const double up = u_[neighbour(k, a, +1)];
                const double um = u_[neighbour(k, a, -1)];
                pc[a] = (up - um) / (2.0 * dx_[a]);
                pp[a] = (up - u_[k]) / dx_[a];
                pm[a] = (u_[k] - um) / dx_[a];
            }
            p_[k] = pc;
            for (const Coord& p : {pc, pm, pp}) {
                const Coord hp = h_.jet(t, x, p, u_[k]).dp;
                for (int a = 0; a < dim_; ++a) nu[a] = std::max(nu[a], std::abs(hp[a]));
            }
        }
        for (int a = 0; a < dim_; ++a) {
            diag.max_hp = std::max(diag.max_hp, nu[a]);
            if (cfg_.artificial_viscosity[a] > 0.0) {
                if (cfg_.artificial_viscosity[a] < nu[a]) diag.viscosity_below_hp = true;
                nu[a] = cfg_.artificial_viscosity[a];
            } else {
                nu[a] = std::max(1.1 * nu[a], 1e-3);
            }
        }
        double rate = h_.K();
        double dx_min = dx_[0];
        for (int a = 0; a < dim_; ++a) {
            rate += nu[a] / dx_[a];
            dx_min = std::min(dx_min, dx_[a]);
        }
        // The second cap keeps dt = O(dx) when H_p is small, so the time error
        // stays first order in dx.
        const double dt = std::min({cfg_.cfl / rate, cfg_.cfl * dx_min, dt_max});
        for (std::size_t k = 0; k < n; ++k) {
            const double hv = h_.value(t, u_.node(k), p_[k], u_[k]);
            double diffusion = 0.0;
            for (int a = 0; a < dim_; ++a) {
                const double second = u_[neighbour(k, a, +1)] - 2.0 * u_[k] + u_[neighbour(k, a, -1)];
                diffusion += nu[a] * second / (2.0 * dx_[a]);
            }
            next_[k] = u_[k] - dt * (hv - diffusion);
        }
        std::swap(u_.values, next_.values);
        return dt;
    }

    [[nodiscard]] const GridFunction& u() const { return u_; }
    [[nodiscard]] const GridFunction& previous() const { return next_; }

    /// sup_x |H(t, x, 0, 0)|.
    double source_bound(double t) const {
        double c = 0.0;
        for (std::size_t k = 0; k < u_.size(); ++k) {
            c = std::max(c, std::abs(h_.value(t, u_.node(k), Coord{0.0, 0.0}, 0.0)));
        }
        return c;
    }

private:
    std::size_t neighbour(std::size_t k, int axis, int dir) const {
        const int n = u_.resolution;
        if (dim_ == 1) return u_.index(static_cast<int>(k) + dir);
        const int i = static_cast<int>(k % n), j = static_cast<int>(k / n);
        return axis == 0 ? u_.index(i + dir, j) : u_.index(i, j + dir);
    }

    const HamiltonianModel& h_;
    const FDConfig& cfg_;
    GridFunction u_;
    GridFunction next_;
    int dim_;
    Coord dx_{1.0, 1.0};
    std::vector<Coord> p_;
};

}  // namespace

FDResult fd_evolve(const HamiltonianModel& hmodel, const GridFunction& phi, const FDConfig& cfg) {
    cfg.validate();
    phi.validate();
    if (!(phi.domain == hmodel.domain())) throw PreconditionError("grid and Hamiltonian domains differ");
    FDResult res;
    Stepper stepper(hmodel, cfg, phi);
    const double phi_norm = phi.sup_norm();
    double c = stepper.source_bound(0.0);
    double t = 0.0;
    while (t < cfg.t_end) {
        if (res.steps >= cfg.max_steps) throw ConvergenceError("fd_evolve exceeded max_steps", t);
        // A shorter final step keeps the scheme monotone.
        const double remaining = cfg.t_end - t;
        const double dt = stepper.step(t, res, remaining);
        t = dt == remaining ? cfg.t_end : t + dt;
        ++res.steps;
        if (hmodel.time_dependent()) c = std::max(c, stepper.source_bound(t));
        const double envelope = std::exp(hmodel.K() * t) * (phi_norm + c * t);
        if (stepper.u().sup_norm() > envelope * (1.0 + 1e-9) + 1e-12) {
            throw Error("fd_evolve unstable: ||u|| = " + std::to_string(stepper.u().sup_norm()) +
                        " exceeds envelope " + std::to_string(envelope) + " at t = " + std::to_string(t));
        }
    }
    res.u = stepper.u();
    res.time = t;
    return res;
}

FDResult fd_stationary(const HamiltonianModel& hmodel, const FDConfig& cfg) {
    cfg.validate();
    if (hmodel.time_dependent()) throw PreconditionError("fd_stationary needs a time-independent Hamiltonian");
    const GridFunction zero(hmodel.domain(), cfg.resolution);
    for (std::size_t k = 0; k < zero.size(); ++k) {
        if (!(hmodel.jet(0.0, zero.node(k), Coord{0.0, 0.0}, 0.0).du > 0.0)) {
            throw PreconditionError("fd_stationary needs H_u > 0");
        }
    }
    FDResult res;
    Stepper stepper(hmodel, cfg, zero);
    double t = 0.0;
    double rate = std::numeric_limits<double>::infinity();
    while (res.steps < cfg.max_steps) {
        const double dt = stepper.step(t, res);
        t += dt;
        ++res.steps;
        rate = sup_distance(stepper.u(), stepper.previous()) / dt;
        if (rate < cfg.steady_tol) {
            res.u = stepper.u();
            res.time = t;
            return res;
        }
    }
    throw ConvergenceError("fd_stationary did not settle within max_steps", rate);
}

}  // namespace hj
