#include "hj/herglotz.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hj/detail/rk4.hpp"
#include "hj/errors.hpp"
#include "hj/optimize.hpp"
#include "hj/random.hpp"

namespace hj {

namespace {

/// J(curve) = terminal value of a scalar ODE along the curve, with exact
/// discrete gradient; the optimizer only sees interior nodes.
class PathObjective {
public:
    virtual ~PathObjective() = default;
    virtual double value(const Curve& c) const = 0;
    virtual void gradient(const Curve& c, detail::EndGradient& out) const = 0;
    virtual CaratheodoryTrajectory trajectory(const Curve& c) const = 0;
    virtual double residual(const Curve& c, const CaratheodoryTrajectory& traj) const = 0;
};

/// Weak-form residual at interior node i: the discrete first variation along the
/// hat function of node i, divided by h and by the adjoint weight at the node.
template <typename Rhs>
double residual_for(const Rhs& rhs, const Curve& c, const CaratheodoryTrajectory& traj) {
    detail::EndGradient eg;
    detail::integrate_with_gradient(rhs, c, traj.u0, traj.substeps(), eg);
    const double h = c.dt();
    double worst = 0.0;
    for (int j = 1; j < c.segments(); ++j) {
        worst = std::max(worst, sup_norm(eg.d_points[j]) / (h * eg.node_adjoint[j]));
    }
    return worst;
}

class HerglotzObjective final : public PathObjective {
public:
    HerglotzObjective(const LagrangianModel& model, double u0, int substeps)
        : model_(model), u0_(u0), substeps_(substeps) {}

    double value(const Curve& c) const override {
        return detail::integrate_end(detail::HerglotzRhs{&model_}, c, u0_, substeps_);
    }
    void gradient(const Curve& c, detail::EndGradient& out) const override {
        detail::integrate_with_gradient(detail::HerglotzRhs{&model_}, c, u0_, substeps_, out);
    }
    CaratheodoryTrajectory trajectory(const Curve& c) const override {
        return solve_caratheodory(model_, c, u0_, substeps_);
    }
    double residual(const Curve& c, const CaratheodoryTrajectory& traj) const override {
        return residual_for(detail::HerglotzRhs{&model_}, c, traj);
    }

private:
    const LagrangianModel& model_;
    double u0_;
    int substeps_;
};

class LinearizedObjective final : public PathObjective {
public:
    LinearizedObjective(const LagrangianModel& model, const CaratheodoryTrajectory& frozen, double u0, int substeps)
        : model_(model), frozen_(frozen), u0_(u0), substeps_(substeps) {}

    double value(const Curve& c) const override {
        return detail::integrate_end(detail::LinearizedRhs{&model_, &frozen_}, c, u0_, substeps_);
    }
    void gradient(const Curve& c, detail::EndGradient& out) const override {
        detail::integrate_with_gradient(detail::LinearizedRhs{&model_, &frozen_}, c, u0_, substeps_, out);
    }
    CaratheodoryTrajectory trajectory(const Curve& c) const override {
        return solve_linearized(model_, c, frozen_, u0_, substeps_);
    }
    double residual(const Curve& c, const CaratheodoryTrajectory& traj) const override {
        return residual_for(detail::LinearizedRhs{&model_, &frozen_}, c, traj);
    }

private:
    const LagrangianModel& model_;
    const CaratheodoryTrajectory& frozen_;
    double u0_;
    int substeps_;
};

/// Packs/unpacks the interior nodes of a template curve into a flat vector.
class NodeMap {
public:
    explicit NodeMap(const Curve& tmpl) : curve_(tmpl), dim_(tmpl.dimension), interior_(tmpl.segments() - 1) {}

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(interior_) * dim_; }

    Eigen::VectorXd pack(const Curve& c) const {
        Eigen::VectorXd z(size());
        for (int i = 0; i < interior_; ++i)
            for (int a = 0; a < dim_; ++a) z[i * dim_ + a] = c.points[i + 1][a];
        return z;
    }
    const Curve& unpack(const Eigen::VectorXd& z) {
        for (int i = 0; i < interior_; ++i)
            for (int a = 0; a < dim_; ++a) curve_.points[i + 1][a] = z[i * dim_ + a];
        return curve_;
    }
    void scatter_gradient(const std::vector<Coord>& d_points, Eigen::VectorXd& g) const {
        g.resize(size());
        for (int i = 0; i < interior_; ++i)
            for (int a = 0; a < dim_; ++a) g[i * dim_ + a] = d_points[i + 1][a];
    }
    [[nodiscard]] int dim() const { return dim_; }
    [[nodiscard]] int interior() const { return interior_; }

private:
    Curve curve_;
    int dim_;
    int interior_;
};

/// Block-tridiagonal part of the Hessian from 3*dim gradient differences,
/// perturbing every third node along one axis at a time.
Eigen::MatrixXd banded_hessian(const ValueAndGradient& f, const Eigen::VectorXd& z, const Eigen::VectorXd& g0,
                               int dim, int interior) {
    const Eigen::Index n = z.size();
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd g(n);
    for (int color = 0; color < 3; ++color) {
        for (int a = 0; a < dim; ++a) {
            Eigen::VectorXd zp = z;
            bool any = false;
            double step = 0.0;
            for (int i = color; i < interior; i += 3) {
                step = 1e-6 * (1.0 + std::abs(z[i * dim + a]));
                zp[i * dim + a] += step;
                any = true;
            }
            if (!any) continue;
            f(zp, &g);
            for (int i = color; i < interior; i += 3) {
                const double hstep = zp[i * dim + a] - z[i * dim + a];
                for (int nb = std::max(0, i - 1); nb <= std::min(interior - 1, i + 1); ++nb) {
                    for (int b = 0; b < dim; ++b) {
                        hess(nb * dim + b, i * dim + a) = (g[nb * dim + b] - g0[nb * dim + b]) / hstep;
                    }
                }
            }
        }
    }
    return 0.5 * (hess + hess.transpose());
}

struct RunOutcome {
    Curve curve;
    double end_value = 0.0;
    bool converged = false;
    int iterations = 0;
    double grad_norm = 0.0;
};

RunOutcome run_start(const PathObjective& obj, const Curve& start, const SolverConfig& cfg) {
    NodeMap map(start);
    detail::EndGradient eg;
    ValueAndGradient f = [&](const Eigen::VectorXd& z, Eigen::VectorXd* grad) {
        const Curve& c = map.unpack(z);
        if (grad == nullptr) return obj.value(c);
        obj.gradient(c, eg);
        map.scatter_gradient(eg.d_points, *grad);
        return eg.value;
    };
    RunOutcome out;
    Eigen::VectorXd z0 = map.pack(start);
    BfgsOptions opts{cfg.grad_tol, cfg.max_iterations};
    Eigen::MatrixXd hinv;
    if (z0.size() > 0) {
        Eigen::VectorXd g0(z0.size());
        f(z0, &g0);
        if (g0.cwiseAbs().maxCoeff() >= cfg.grad_tol) {
            hinv = regularized_inverse(banded_hessian(f, z0, g0, map.dim(), map.interior()));
        }
    }
    const BfgsResult r = minimize_bfgs(f, z0, opts, hinv);
    out.curve = map.unpack(r.x);
    out.end_value = r.value;
    out.converged = r.converged;
    out.iterations = r.iterations;
    out.grad_norm = r.grad_norm;
    return out;
}

/// Re-times a warm-start curve onto [t1, t2] with `segments` segments and moves
/// it rigidly onto the lift of x. Returns false when its endpoints do not
/// project onto (x, y).
bool adapt_warm_start(const DomainDescriptor& domain, const Curve& warm, double t1, double t2, const Coord& x,
                      const Coord& y, int segments, Curve& out) {
    if (warm.points.size() < 2 || warm.dimension != domain.dimension) return false;
    const Coord start = domain.wrap(x);
    const Coord shift = start - warm.points.front();
    const Coord end = warm.points.back() + shift;
    if (domain.distance(end, y) > 1e-9 * (1.0 + sup_norm(domain.period))) return false;
    for (int a = 0; a < domain.dimension; ++a) {
        const double k = shift[a] / domain.period[a];
        if (std::abs(k - std::round(k)) > 1e-9) return false;
    }
    out.t_start = t1;
    out.t_end = t2;
    out.dimension = domain.dimension;
    out.points.resize(segments + 1);
    for (int i = 0; i <= segments; ++i) {
        const double frac = static_cast<double>(i) / segments;
        const double s = warm.t_start + frac * (warm.t_end - warm.t_start);
        out.points[i] = warm.position(s) + shift;
    }
    out.points.front() = start;
    out.points.back() = warm.points.back() + shift;
    return true;
}

bool lexicographically_less(const Curve& a, const Curve& b) {
    for (std::size_t i = 0; i < a.points.size() && i < b.points.size(); ++i) {
        for (std::size_t d = 0; d < kMaxDim; ++d) {
            if (a.points[i][d] != b.points[i][d]) return a.points[i][d] < b.points[i][d];
        }
    }
    return a.points.size() < b.points.size();
}

std::string diagnostics_json(const std::vector<StartDiagnostics>& starts) {
    std::ostringstream js;
    js.precision(12);
    js << "{\"starts\": [";
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const auto& s = starts[i];
        if (i) js << ", ";
        js << "{\"kind\": \"" << s.kind << "\", \"winding\": [" << s.winding[0] << ", " << s.winding[1]
           << "], \"pruned\": " << (s.pruned ? "true" : "false");
        if (!s.pruned) {
            js << ", \"value\": " << s.value << ", \"converged\": " << (s.converged ? "true" : "false")
               << ", \"iterations\": " << s.iterations << ", \"grad_norm\": " << s.grad_norm;
        }
        js << "}";
    }
    js << "]}";
    return js.str();
}

HerglotzResult optimize_paths(const LagrangianModel& model, const PathObjective& obj, double t1, double t2,
                              const Coord& x, const Coord& y, double u0, const SolverConfig& cfg,
                              const HerglotzOptions& options) {
    if (!(t2 > t1) || t2 - t1 < cfg.min_horizon) {
        throw PreconditionError("horizon t2 - t1 below min_horizon");
    }
    if (!std::isfinite(u0)) throw PreconditionError("u0 must be finite");
    const DomainDescriptor& domain = model.domain();
    const int segments = cfg.curve_nodes + 1;
    const double duration = t2 - t1;
    const double margin = 1e-9;

    HerglotzResult res;
    res.u0 = u0;
    bool have_best = false;
    RunOutcome best;

    auto consider = [&](const Curve& start, StartDiagnostics diag) {
        RunOutcome r = run_start(obj, start, cfg);
        ++res.starts_tried;
        diag.value = r.end_value - u0;
        diag.converged = r.converged;
        diag.iterations = r.iterations;
        diag.grad_norm = r.grad_norm;
        res.starts.push_back(diag);
        if (!std::isfinite(r.end_value)) return;
        // Converged candidates always beat non-converged ones.
        bool better = false;
        if (!have_best) {
            better = true;
        } else if (r.converged != best.converged) {
            better = r.converged;
        } else {
            const double tol = 1e-9 * (1.0 + std::abs(best.end_value));
            if (r.end_value < best.end_value - tol) {
                better = true;
            } else if (std::abs(r.end_value - best.end_value) <= tol) {
                better = lexicographically_less(r.curve, best.curve);
            }
        }
        if (r.converged) {
            bool distinct = true;
            for (const auto& lm : res.local_minima) {
                double gap = 0.0;
                for (std::size_t i = 0; i < lm.curve.points.size(); ++i) {
                    gap = std::max(gap, sup_norm(lm.curve.points[i] - r.curve.points[i]));
                }
                if (gap < 1e-5 * (1.0 + sup_norm(domain.period))) {
                    distinct = false;
                    break;
                }
            }
            if (distinct) res.local_minima.push_back({r.end_value - u0, r.curve});
        }
        if (better) {
            best = std::move(r);
            have_best = true;
        }
    };
    auto ceiling = [&]() {
        double c = options.ceiling;
        if (have_best && best.converged) c = std::min(c, best.end_value);
        return c;
    };

    std::vector<Coord> covered;
    for (const Curve& warm : options.warm_starts) {
        Curve adapted;
        if (adapt_warm_start(domain, warm, t1, t2, x, y, segments, adapted)) {
            consider(adapted, StartDiagnostics{"warm"});
            if (res.starts.back().converged) covered.push_back(adapted.displacement());
        }
    }

    // Winding classes ordered by displacement length.
    struct ClassStart {
        std::array<int, kMaxDim> k;
        Curve curve;
        double length;
    };
    std::vector<ClassStart> classes;
    const int w = std::max(0, cfg.max_winding);
    const int w1 = domain.dimension == 2 ? w : 0;
    for (int k0 = -w; k0 <= w; ++k0) {
        for (int k1 = -w1; k1 <= w1; ++k1) {
            Curve c = Curve::straight(domain, t1, t2, x, y, segments, {k0, k1});
            const double len = norm(c.displacement());
            classes.push_back({{k0, k1}, std::move(c), len});
        }
    }
    std::stable_sort(classes.begin(), classes.end(),
                     [](const ClassStart& a, const ClassStart& b) { return a.length < b.length; });
    bool any_pruned = false;
    for (const auto& cls : classes) {
        if (options.warm_covers_class) {
            const Coord disp = cls.curve.displacement();
            const bool hit = std::any_of(covered.begin(), covered.end(), [&](const Coord& d) {
                return sup_norm(d - disp) < 1e-9 * (1.0 + sup_norm(domain.period));
            });
            if (hit) continue;
        }
        StartDiagnostics diag{"winding", cls.k};
        if (cfg.prune) {
            const double lb = action_lower_bound(model, u0, duration, cls.length);
            const double cap = ceiling();
            if (std::isfinite(cap) && lb > cap + margin * (1.0 + std::abs(cap))) {
                diag.pruned = true;
                any_pruned = true;
                diag.value = std::numeric_limits<double>::quiet_NaN();
                res.starts.push_back(diag);
                continue;
            }
        }
        consider(cls.curve, diag);
    }

    // Random starts stay in the nearest class, so its lower bound covers them.
    const bool nearest_pruned = std::any_of(res.starts.begin(), res.starts.end(), [&](const StartDiagnostics& d) {
                                    return d.pruned && d.winding == classes.front().k;
                                });
    if (cfg.random_starts > 0 && !nearest_pruned) {
        Rng rng(cfg.seed, options.stream);
        const Curve& base = classes.front().curve;
        for (int r = 0; r < cfg.random_starts; ++r) {
            Curve c = base;
            for (int i = 1; i < c.segments(); ++i) {
                for (int a = 0; a < domain.dimension; ++a) {
                    c.points[i][a] += cfg.random_amplitude * domain.period[a] * rng.uniform(-1.0, 1.0);
                }
            }
            consider(c, StartDiagnostics{"random"});
        }
    }

    if (!have_best && any_pruned && std::isfinite(options.ceiling)) {
        res.dominated = true;
        res.value = std::numeric_limits<double>::quiet_NaN();
        return res;
    }
    if (!have_best) {
        throw ConvergenceError("fundamental solution: every start was pruned or diverged",
                               std::numeric_limits<double>::infinity(), diagnostics_json(res.starts));
    }
    if (!best.converged) {
        throw ConvergenceError("fundamental solution: no start converged (best value " +
                                   std::to_string(best.end_value - u0) + ")",
                               best.grad_norm, diagnostics_json(res.starts));
    }
    std::sort(res.local_minima.begin(), res.local_minima.end(),
              [](const LocalMinimum& a, const LocalMinimum& b) { return a.value < b.value; });
    res.converged = true;
    res.minimizer = best.curve;
    res.trajectory = obj.trajectory(best.curve);
    res.value = res.trajectory.end_value() - u0;
    res.grad_norm = best.grad_norm;
    res.stationarity_residual = obj.residual(best.curve, res.trajectory);
    return res;
}

void check_model_point(const LagrangianModel& model, const Coord& x, const Coord& y) {
    for (int a = 0; a < model.dimension(); ++a) {
        if (!std::isfinite(x[a]) || !std::isfinite(y[a])) throw PreconditionError("endpoints must be finite");
    }
}

}  // namespace

HerglotzResult fundamental_solution(const LagrangianModel& model, double t1, double t2, const Coord& x,
                                    const Coord& y, double u0, const SolverConfig& cfg,
                                    const HerglotzOptions& options) {
    check_model_point(model, x, y);
    HerglotzObjective obj(model, u0, cfg.substeps);
    return optimize_paths(model, obj, t1, t2, x, y, u0, cfg, options);
}

HerglotzResult linearized_fundamental_solution(const LagrangianModel& model, double t1, double t2, const Coord& x,
                                               const Coord& y, double u0, const CaratheodoryTrajectory& frozen,
                                               const SolverConfig& cfg, const HerglotzOptions& options) {
    check_model_point(model, x, y);
    const double slack = 1e-9 * (1.0 + std::abs(t1) + std::abs(t2));
    if (frozen.times.empty() || frozen.times.front() > t1 + slack || frozen.times.back() < t2 - slack) {
        throw PreconditionError("frozen trajectory does not cover [t1, t2]");
    }
    LinearizedObjective obj(model, frozen, u0, cfg.substeps);
    // The lower bound uses (L2)/(L3) of L, which also bound the linearized integrand
    // only when L is affine in u; pruning stays off otherwise.
    SolverConfig local = cfg;
    if (!model.discount_rate()) local.prune = false;
    return optimize_paths(model, obj, t1, t2, x, y, u0, local, options);
}

std::vector<Coord> adjoint_gradient(const LagrangianModel& model, const Curve& curve,
                                    const CaratheodoryTrajectory& traj) {
    detail::EndGradient eg;
    detail::integrate_with_gradient(detail::HerglotzRhs{&model}, curve, traj.u0, traj.substeps(), eg);
    return {eg.d_points.begin() + 1, eg.d_points.end() - 1};
}

std::vector<Coord> linearized_adjoint_gradient(const LagrangianModel& model, const Curve& eta,
                                               const CaratheodoryTrajectory& frozen,
                                               const CaratheodoryTrajectory& traj) {
    detail::EndGradient eg;
    detail::integrate_with_gradient(detail::LinearizedRhs{&model, &frozen}, eta, traj.u0, traj.substeps(), eg);
    return {eg.d_points.begin() + 1, eg.d_points.end() - 1};
}

double herglotz_residual(const LagrangianModel& model, const Curve& curve, const CaratheodoryTrajectory& traj) {
    return residual_for(detail::HerglotzRhs{&model}, curve, traj);
}

double action_lower_bound(const LagrangianModel& model, double u0, double duration, double distance) {
    if (!model.declares(Condition::L2) || !model.declares(Condition::L3)) {
        return -std::numeric_limits<double>::infinity();
    }
    const ModelConstants& c = model.constants();
    const double K = c.K;
    // Upper bound of the integral mean of L_u: 0 under (L6), K otherwise.
    const double up = model.declares(Condition::L6) ? 0.0 : K;
    const double term_u0 = u0 >= 0.0 ? u0 * std::exp(-K * duration) : u0 * std::exp(up * duration);
    const double kinetic =
        c.theta_a * std::exp(-K * duration) * std::pow(distance, c.theta_q) * std::pow(duration, 1.0 - c.theta_q);
    const double weight_mass = up > 0.0 ? std::expm1(up * duration) / up : duration;
    return term_u0 + kinetic - c.c0 * weight_mass;
}

}  // namespace hj
