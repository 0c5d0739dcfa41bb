#include "hj/lax_oleinik.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hj/errors.hpp"
#include "hj/parallel.hpp"

namespace hj {

WarmStartCache::WarmStartCache(std::size_t nodes) : nodes_(nodes), pairs_(nodes * nodes) {}

const std::vector<Curve>& WarmStartCache::get(std::size_t x, std::size_t y) const { return pairs_[x * nodes_ + y]; }

void WarmStartCache::put(std::size_t x, std::size_t y, std::vector<Curve> curves) {
    pairs_[x * nodes_ + y] = std::move(curves);
}

namespace {

std::string pair_label(const GridFunction& g, const Coord& px, std::size_t y) {
    std::ostringstream os;
    const Coord py = g.node(y);
    os << "x=(" << px[0];
    if (g.domain.dimension == 2) os << ", " << px[1];
    os << ") y=(" << py[0];
    if (g.domain.dimension == 2) os << ", " << py[1];
    os << ")";
    return os.str();
}

}  // namespace

PointSolve solve_at_point(const LagrangianModel& model, const GridFunction& phi, double t1, double t2,
                          const Coord& x, const SolverConfig& cfg, bool keep_candidates, WarmStartCache* cache,
                          std::size_t cache_row) {
    const std::size_t n = phi.size();
    const double duration = t2 - t1;
    // Candidates ordered by their lower bound (rigorous under (L2)/(L3)).
    std::vector<double> bound(n);
    for (std::size_t yi = 0; yi < n; ++yi) {
        bound[yi] = action_lower_bound(model, phi[yi], duration, phi.domain.distance(phi.node(yi), x));
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (cfg.prune) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bound[a] < bound[b]; });
    }
    PointSolve out;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_y = n;
    for (std::size_t yi : order) {
        const double tol = 1e-9 * (1.0 + std::abs(best));
        if (cfg.prune && std::isfinite(best) && bound[yi] > best + tol) {
            ++out.pruned;
            continue;
        }
        HerglotzOptions opts;
        opts.stream = static_cast<std::uint64_t>(cache_row * n + yi);
        if (cfg.prune) opts.ceiling = best;
        if (cache) opts.warm_starts = cache->get(cache_row, yi);
        HerglotzResult r;
        try {
            r = fundamental_solution(model, t1, t2, phi.node(yi), x, phi[yi], cfg, opts);
        } catch (const ConvergenceError& e) {
            throw ConvergenceError("Lax-Oleinik inner solve failed at " + pair_label(phi, x, yi) + ": " + e.what(),
                                   e.residual(), e.diagnostics());
        } catch (const Error& e) {
            throw Error("Lax-Oleinik inner solve failed at " + pair_label(phi, x, yi) + ": " + e.what());
        }
        ++out.solves;
        if (cache && !r.dominated) {
            std::vector<Curve> keep;
            for (const auto& lm : r.local_minima) keep.push_back(lm.curve);
            cache->put(cache_row, yi, std::move(keep));
        }
        if (r.dominated) continue;
        const double v = r.end_value();
        const double tie = 1e-12 * (1.0 + std::abs(best));
        if (v < best - tie || (std::abs(v - best) <= tie && yi < best_y)) {
            best = v;
            best_y = yi;
            out.curve = r.minimizer;
        }
        if (keep_candidates) out.candidates.push_back({static_cast<int>(yi), std::move(r)});
    }
    out.value = best;
    out.argmin = static_cast<int>(best_y);
    if (keep_candidates) {
        std::sort(out.candidates.begin(), out.candidates.end(),
                  [](const GridCandidate& a, const GridCandidate& b) { return a.y < b.y; });
    }
    return out;
}

LaxOleinikStep apply_T(const LagrangianModel& model, const GridFunction& phi, double t1, double t2,
                       const SolverConfig& cfg, WarmStartCache* cache) {
    phi.validate();
    if (!(phi.domain == model.domain())) throw PreconditionError("grid and model domains differ");
    if (!(t2 - t1 >= cfg.min_horizon)) throw PreconditionError("t2 - t1 below min_horizon");
    const std::size_t n = phi.size();
    if (cache && cache->nodes() != n) throw PreconditionError("warm-start cache has the wrong size");

    LaxOleinikStep out;
    out.u = GridFunction(phi.domain, phi.resolution);
    out.argmin.assign(n, -1);
    out.curves.resize(n);
    std::vector<long> solves(n, 0), pruned(n, 0);
    parallel_for(n, resolve_threads(cfg.threads), [&](std::size_t xi) {
        PointSolve ps = solve_at_point(model, phi, t1, t2, phi.node(xi), cfg, false, cache, xi);
        out.u[xi] = ps.value;
        out.argmin[xi] = ps.argmin;
        out.curves[xi] = std::move(ps.curve);
        solves[xi] = ps.solves;
        pruned[xi] = ps.pruned;
    });
    out.solves = std::accumulate(solves.begin(), solves.end(), 0L);
    out.pruned_pairs = std::accumulate(pruned.begin(), pruned.end(), 0L);
    return out;
}

EvolutionResult evolve(const LagrangianModel& model, const GridFunction& phi, double final_time, int steps,
                       const SolverConfig& cfg) {
    if (!(final_time > 0.0)) throw PreconditionError("final time must be positive");
    if (steps < 1) throw PreconditionError("steps must be >= 1");
    EvolutionResult res;
    res.times.push_back(0.0);
    res.frames.push_back(phi);
    WarmStartCache cache(phi.size());
    for (int k = 1; k <= steps; ++k) {
        const double t1 = final_time * (k - 1) / steps;
        const double t2 = final_time * k / steps;
        LaxOleinikStep step = apply_T(model, res.frames.back(), t1, t2, cfg, &cache);
        res.times.push_back(t2);
        res.frames.push_back(std::move(step.u));
        res.argmin.push_back(std::move(step.argmin));
        res.curves.push_back(std::move(step.curves));
    }
    return res;
}

StationaryResult stationary_fixed_point(const LagrangianModel& model, const SolverConfig& cfg,
                                        const GridFunction* initial) {
    if (model.time_dependent()) throw PreconditionError("stationary problem needs a time-independent model");
    if (!model.declares(Condition::L6)) throw PreconditionError("stationary problem needs (L6)");
    StationaryResult res;
    res.u = initial ? *initial : GridFunction(model.domain(), cfg.resolution);
    WarmStartCache cache(res.u.size());
    for (int k = 0; k < cfg.fp_max_iter; ++k) {
        LaxOleinikStep step = apply_T(model, res.u, 0.0, cfg.stationary_step, cfg, &cache);
        const double update = sup_distance(step.u, res.u);
        res.history.push_back(update);
        res.iterations = k + 1;
        if (update < cfg.fp_tol) {
            res.residual = update;
            res.step = std::move(step);
            return res;
        }
        res.u = std::move(step.u);
    }
    throw ConvergenceError("stationary fixed point did not converge in " + std::to_string(cfg.fp_max_iter) +
                               " iterations",
                           res.history.back());
}

}  // namespace hj
