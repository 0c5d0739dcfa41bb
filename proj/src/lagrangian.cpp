#include "hj/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hj/errors.hpp"
#include "hj/random.hpp"

namespace hj {

std::string condition_name(Condition c) { return "L" + std::to_string(static_cast<int>(c) + 1); }

double ModelConstants::theta0(double r) const { return theta_a * std::pow(r, theta_q); }

// ---------------------------------------------------------------------------
// Trigonometric potentials and Tonelli part

namespace {

double phase(const DomainDescriptor& domain, const TrigTerm& term, const Coord& x) {
    double arg = 0.0;
    for (int a = 0; a < domain.dimension; ++a) arg += term.k[a] * x[a] / domain.period[a];
    return 2.0 * std::numbers::pi * arg;
}

}  // namespace

double TrigPolynomial::value(const DomainDescriptor& domain, const Coord& x) const {
    double v = constant;
    for (const auto& term : terms) {
        const double th = phase(domain, term, x);
        v += term.cos_coef * std::cos(th) + term.sin_coef * std::sin(th);
    }
    return v;
}

Coord TrigPolynomial::gradient(const DomainDescriptor& domain, const Coord& x) const {
    Coord g{0.0, 0.0};
    for (const auto& term : terms) {
        const double th = phase(domain, term, x);
        const double dth = -term.cos_coef * std::sin(th) + term.sin_coef * std::cos(th);
        for (int a = 0; a < domain.dimension; ++a) {
            g[a] += dth * 2.0 * std::numbers::pi * term.k[a] / domain.period[a];
        }
    }
    return g;
}

double TrigPolynomial::oscillation_bound() const {
    double b = 0.0;
    for (const auto& term : terms) b += std::hypot(term.cos_coef, term.sin_coef);
    return b;
}

void TonelliSpec::validate() const {
    domain.validate();
    for (double a : kinetic) {
        if (!std::isfinite(a)) throw PreconditionError("kinetic matrix entries must be finite");
    }
    if (!(kinetic_min_eigenvalue() > 0.0)) {
        throw PreconditionError("kinetic matrix must be positive definite");
    }
    if (!std::isfinite(potential.constant)) throw PreconditionError("potential must be finite");
    for (const auto& t : potential.terms) {
        if (!std::isfinite(t.cos_coef) || !std::isfinite(t.sin_coef)) {
            throw PreconditionError("potential coefficients must be finite");
        }
    }
}

double TonelliSpec::kinetic_energy(const Coord& v) const {
    if (domain.dimension == 1) return 0.5 * kinetic[0] * v[0] * v[0];
    return 0.5 * (kinetic[0] * v[0] * v[0] + 2.0 * kinetic[1] * v[0] * v[1] + kinetic[2] * v[1] * v[1]);
}

Coord TonelliSpec::kinetic_gradient(const Coord& v) const {
    if (domain.dimension == 1) return {kinetic[0] * v[0], 0.0};
    return {kinetic[0] * v[0] + kinetic[1] * v[1], kinetic[1] * v[0] + kinetic[2] * v[1]};
}

double TonelliSpec::kinetic_min_eigenvalue() const {
    if (domain.dimension == 1) return kinetic[0];
    const double tr = kinetic[0] + kinetic[2];
    const double det = kinetic[0] * kinetic[2] - kinetic[1] * kinetic[1];
    const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
    return tr / 2.0 - disc;
}

double TonelliSpec::value(const Coord& x, const Coord& v) const {
    return kinetic_energy(v) - potential.value(domain, x);
}

// ---------------------------------------------------------------------------
// Model bundle

LagrangianModel::LagrangianModel(DomainDescriptor domain, JetFn jet, ConditionSet declared,
                                 ModelConstants constants, std::string family, bool time_dependent,
                                 bool exact_mixed_partials)
    : domain_(domain),
      jet_(std::move(jet)),
      declared_(declared),
      constants_(constants),
      family_(std::move(family)),
      time_dependent_(time_dependent),
      exact_mixed_(exact_mixed_partials) {
    domain_.validate();
    if (!jet_) throw PreconditionError("Lagrangian model needs an evaluation function");
}

LagrangianJet LagrangianModel::jet(double s, const Coord& x, const Coord& v, double u) const {
    LagrangianJet j = jet_(s, x, v, u);
    if (!exact_mixed_) {
        for (int a = 0; a < domain_.dimension; ++a) {
            Coord e{0.0, 0.0};
            const double hx = 1e-6 * (1.0 + std::abs(x[a]));
            e[a] = hx;
            j.dux[a] = (jet_(s, x + e, v, u).du - jet_(s, x - e, v, u).du) / (2.0 * hx);
            const double hv = 1e-6 * (1.0 + std::abs(v[a]));
            e[a] = hv;
            j.duv[a] = (jet_(s, x, v + e, u).du - jet_(s, x, v - e, u).du) / (2.0 * hv);
        }
    }
    return j;
}

namespace {

ModelConstants tonelli_constants(const TonelliSpec& l0) {
    ModelConstants c;
    c.theta_a = 0.5 * l0.kinetic_min_eigenvalue();
    c.theta_q = 2.0;
    c.c0 = std::max(0.0, l0.potential.constant + l0.potential.oscillation_bound());
    return c;
}

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw PreconditionError(std::string(what) + " must be finite");
}

}  // namespace

LagrangianModel make_discounted(const TonelliSpec& l0, double lambda) {
    l0.validate();
    require_finite(lambda, "lambda");
    ModelConstants c = tonelli_constants(l0);
    c.K = std::abs(lambda);
    ConditionSet declared{Condition::L1, Condition::L2, Condition::L3, Condition::L4, Condition::L5};
    declared.set(Condition::L6, lambda > 0.0);
    auto jet = [l0, lambda](double, const Coord& x, const Coord& v, double u) {
        LagrangianJet j;
        j.value = l0.kinetic_energy(v) - l0.potential.value(l0.domain, x) - lambda * u;
        j.du = -lambda;
        j.dx = -1.0 * l0.potential.gradient(l0.domain, x);
        j.dv = l0.kinetic_gradient(v);
        return j;
    };
    LagrangianModel m(l0.domain, jet, declared, c, "discounted", false);
    m.discount_ = lambda;
    m.lambda_ = lambda;
    m.tonelli_ = l0;
    return m;
}

LagrangianModel make_nonlinear_concave(const TonelliSpec& l0, double lambda, double eps) {
    l0.validate();
    require_finite(lambda, "lambda");
    require_finite(eps, "eps");
    if (eps < 0.0) throw PreconditionError("eps must be non-negative");
    if (!(lambda > eps)) throw PreconditionError("nonlinear concave model requires lambda > eps (L6)");
    ModelConstants c = tonelli_constants(l0);
    c.c0 += eps;
    c.K = lambda + eps;
    ConditionSet declared{Condition::L1, Condition::L2, Condition::L3,
                          Condition::L4, Condition::L5, Condition::L6};
    auto jet = [l0, lambda, eps](double, const Coord& x, const Coord& v, double u) {
        const double root = std::sqrt(1.0 + u * u);
        LagrangianJet j;
        j.value = l0.kinetic_energy(v) - l0.potential.value(l0.domain, x) - lambda * u - eps * root;
        j.du = -lambda - eps * u / root;
        j.dx = -1.0 * l0.potential.gradient(l0.domain, x);
        j.dv = l0.kinetic_gradient(v);
        return j;
    };
    LagrangianModel m(l0.domain, jet, declared, c, "nonlinear_concave", false);
    m.tonelli_ = l0;
    m.lambda_ = lambda;
    m.eps_ = eps;
    return m;
}

LagrangianModel make_time_rescaled(const TonelliSpec& l0, double lambda, double horizon) {
    l0.validate();
    require_finite(lambda, "lambda");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw PreconditionError("horizon must be positive");
    const ModelConstants base = tonelli_constants(l0);
    const double grow = std::exp(std::abs(lambda) * horizon);
    ModelConstants c = base;
    c.K = 0.0;
    c.theta_a = base.theta_a / grow;
    c.c0 = base.c0 * grow;
    c.C2 = std::abs(lambda);
    c.C1 = 2.0 * std::abs(lambda) * grow * base.c0;
    ConditionSet declared{Condition::L1, Condition::L2, Condition::L3, Condition::L4, Condition::L5};
    auto jet = [l0, lambda](double s, const Coord& x, const Coord& v, double) {
        const double w = std::exp(lambda * s);
        const double l0v = l0.value(x, v);
        LagrangianJet j;
        j.value = w * l0v;
        j.dt = lambda * w * l0v;
        j.dx = -w * l0.potential.gradient(l0.domain, x);
        j.dv = w * l0.kinetic_gradient(v);
        return j;
    };
    LagrangianModel m(l0.domain, jet, declared, c, "time_rescaled", true);
    m.tonelli_ = l0;
    m.lambda_ = lambda;
    return m;
}

// ---------------------------------------------------------------------------
// Legendre transforms

std::optional<HamiltonianModel> closed_form_hamiltonian(const LagrangianModel& model) {
    if (!model.tonelli_) return std::nullopt;
    const TonelliSpec l0 = *model.tonelli_;
    const double lambda = model.lambda_;
    const double eps = model.eps_;
    // A^{-1} for the kinetic form.
    std::array<double, 3> inv{1.0 / l0.kinetic[0], 0.0, 0.0};
    if (l0.domain.dimension == 2) {
        const double det = l0.kinetic[0] * l0.kinetic[2] - l0.kinetic[1] * l0.kinetic[1];
        inv = {l0.kinetic[2] / det, -l0.kinetic[1] / det, l0.kinetic[0] / det};
    }
    const TonelliSpec dual{l0.domain, inv, {}};
    const double K = model.constants().K;
    if (model.family() == "discounted" || model.family() == "nonlinear_concave") {
        return HamiltonianModel(
            l0.domain,
            [l0, dual, lambda, eps](double, const Coord& x, const Coord& p, double u) {
                const double root = std::sqrt(1.0 + u * u);
                HamiltonianJet j;
                j.value = dual.kinetic_energy(p) + l0.potential.value(l0.domain, x) + lambda * u + eps * root;
                j.du = lambda + eps * u / root;
                j.dx = l0.potential.gradient(l0.domain, x);
                j.dp = dual.kinetic_gradient(p);
                return j;
            },
            false, K);
    }
    if (model.family() == "time_rescaled") {
        return HamiltonianModel(
            l0.domain,
            [l0, dual, lambda](double s, const Coord& x, const Coord& p, double) {
                const double w = std::exp(lambda * s);
                const double kin = dual.kinetic_energy(p);
                const double pot = l0.potential.value(l0.domain, x);
                HamiltonianJet j;
                j.value = kin / w + w * pot;
                j.dt = -lambda * kin / w + lambda * w * pot;
                j.dx = w * l0.potential.gradient(l0.domain, x);
                j.dp = (1.0 / w) * dual.kinetic_gradient(p);
                return j;
            },
            true, K);
    }
    return std::nullopt;
}

namespace {

struct ConvexEval {
    double value;
    Coord grad;
};

struct ConjugateResult {
    Coord argmax{0.0, 0.0};
    double value = 0.0;
    ConvexEval at{};
    double residual = 0.0;
};

/// sup_w { z.w - f(w) } for f strictly convex, by damped Newton with a
/// finite-difference Hessian of the analytic gradient.
template <typename F>
ConjugateResult conjugate(int dim, const Coord& z, F&& f) {
    constexpr int kMaxIter = 80;
    Coord w{0.0, 0.0};
    ConvexEval cur = f(w);
    const double tol = 1e-11 * (1.0 + sup_norm(z));
    double residual = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
        const Coord g = z - cur.grad;
        residual = sup_norm(g);
        if (residual <= tol) {
            return {w, dot(z, w) - cur.value, cur, residual};
        }
        double hess[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
        for (int b = 0; b < dim; ++b) {
            Coord e{0.0, 0.0};
            const double h = 1e-5 * (1.0 + std::abs(w[b]));
            e[b] = h;
            const Coord gp = f(w + e).grad;
            const Coord gm = f(w - e).grad;
            for (int a = 0; a < dim; ++a) hess[a][b] = (gp[a] - gm[a]) / (2.0 * h);
        }
        Coord step{0.0, 0.0};
        if (dim == 1) {
            step[0] = hess[0][0] > 0.0 ? g[0] / hess[0][0] : g[0];
        } else {
            const double off = 0.5 * (hess[0][1] + hess[1][0]);
            const double det = hess[0][0] * hess[1][1] - off * off;
            if (hess[0][0] > 0.0 && det > 0.0) {
                step = {(hess[1][1] * g[0] - off * g[1]) / det, (hess[0][0] * g[1] - off * g[0]) / det};
            } else {
                step = g;
            }
        }
        const double psi = dot(z, w) - cur.value;
        double alpha = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Coord trial = w + alpha * step;
            const ConvexEval next = f(trial);
            if (std::isfinite(next.value) && dot(z, trial) - next.value >= psi - 1e-14 * (1.0 + std::abs(psi))) {
                w = trial;
                cur = next;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;
    }
    residual = sup_norm(z - cur.grad);
    if (residual <= 1e3 * tol) return {w, dot(z, w) - cur.value, cur, residual};
    throw ConvergenceError("Legendre transform: Newton did not converge", residual,
                           "{\"worst_residual\": " + std::to_string(residual) + "}");
}

}  // namespace

HamiltonianModel legendre_to_hamiltonian(const LagrangianModel& model) {
    if (!model.declares(Condition::L1) || !model.declares(Condition::L2)) {
        throw PreconditionError("Legendre transform requires (L1) and (L2)");
    }
    const int dim = model.dimension();
    auto jet = [model, dim](double s, const Coord& x, const Coord& p, double u) {
        LagrangianJet last;
        auto f = [&](const Coord& v) {
            last = model.jet(s, x, v, u);
            return ConvexEval{last.value, last.dv};
        };
        const ConjugateResult r = conjugate(dim, p, f);
        const LagrangianJet at = model.jet(s, x, r.argmax, u);
        HamiltonianJet h;
        h.value = r.value;
        h.dp = r.argmax;
        h.dx = -1.0 * at.dx;
        h.du = -at.du;
        h.dt = -at.dt;
        return h;
    };
    return HamiltonianModel(model.domain(), jet, model.time_dependent(), model.constants().K);
}

LagrangianModel legendre_to_lagrangian(const HamiltonianModel& hamiltonian) {
    const int dim = hamiltonian.domain().dimension;
    auto jet = [hamiltonian, dim](double s, const Coord& x, const Coord& v, double u) {
        auto f = [&](const Coord& p) {
            const HamiltonianJet h = hamiltonian.jet(s, x, p, u);
            return ConvexEval{h.value, h.dp};
        };
        const ConjugateResult r = conjugate(dim, v, f);
        const HamiltonianJet at = hamiltonian.jet(s, x, r.argmax, u);
        LagrangianJet l;
        l.value = r.value;
        l.dv = r.argmax;
        l.dx = -1.0 * at.dx;
        l.du = -at.du;
        l.dt = -at.dt;
        return l;
    };
    return LagrangianModel(hamiltonian.domain(), jet, ConditionSet{}, ModelConstants{}, "legendre_dual",
                           hamiltonian.time_dependent(), false);
}

// ---------------------------------------------------------------------------
// Condition and partial-derivative checks

void SampleBox::validate() const {
    for (double b : {s_min, s_max, v_max, u_min, u_max}) {
        if (!std::isfinite(b)) throw PreconditionError("sample box bounds must be finite");
    }
    if (s_max < s_min || u_max < u_min || v_max < 0.0) {
        throw PreconditionError("sample box bounds are inverted");
    }
}

bool ConditionReport::declared_pass() const {
    return std::all_of(results.begin(), results.end(),
                       [](const ConditionResult& r) { return !r.declared || r.passed; });
}

namespace {

struct Sample {
    double s;
    Coord x;
    Coord v;
    double u;
};

Sample draw(Rng& rng, const DomainDescriptor& d, const SampleBox& box) {
    Sample p{rng.uniform(box.s_min, box.s_max), {0.0, 0.0}, {0.0, 0.0}, rng.uniform(box.u_min, box.u_max)};
    for (int a = 0; a < d.dimension; ++a) {
        p.x[a] = rng.uniform(0.0, d.period[a]);
        p.v[a] = rng.uniform(-box.v_max, box.v_max);
    }
    return p;
}

}  // namespace

ConditionReport check_conditions(const LagrangianModel& model, int samples, const SampleBox& box,
                                 std::uint64_t seed) {
    if (samples < 1) throw PreconditionError("check_conditions needs at least one sample");
    box.validate();
    ConditionReport report;
    for (int i = 0; i < kConditionCount; ++i) {
        auto c = static_cast<Condition>(i);
        report.results[i].condition = c;
        report.results[i].declared = model.declares(c);
        report.results[i].worst_margin = std::numeric_limits<double>::infinity();
    }
    const ModelConstants& k = model.constants();
    Rng rng(seed);
    const DomainDescriptor& d = model.domain();

    auto record = [&](Condition c, double margin, double tol, const Sample& p) {
        auto& r = report.results[static_cast<int>(c)];
        if (margin < r.worst_margin) {
            r.worst_margin = margin;
            r.worst_s = p.s;
            r.worst_x = p.x;
            r.worst_v = p.v;
            r.worst_u = p.u;
        }
        if (!(margin > tol)) r.passed = false;
    };

    for (int i = 0; i < samples; ++i) {
        const Sample p = draw(rng, d, box);
        const Sample q = draw(rng, d, box);
        const LagrangianJet j = model.jet(p.s, p.x, p.v, p.u);
        const double scale = 1.0 + std::abs(j.value);

        // (L1) strict midpoint convexity in v.
        {
            const double l1 = model.value(p.s, p.x, p.v, p.u);
            const double l2 = model.value(p.s, p.x, q.v, p.u);
            const double lm = model.value(p.s, p.x, 0.5 * (p.v + q.v), p.u);
            record(Condition::L1, 0.5 * (l1 + l2) - lm, 0.0, p);
        }
        // (L2) superlinear lower bound at u = 0.
        {
            const double l0 = model.value(p.s, p.x, p.v, 0.0);
            const double bound = k.theta0(norm(p.v)) - k.c0;
            record(Condition::L2, l0 - bound, -1e-10 * (1.0 + std::abs(l0)), p);
        }
        // (L3) |L_u| <= K.
        record(Condition::L3, k.K - std::abs(j.du), -1e-12 * (1.0 + k.K), p);
        // (L4) |L_t| <= C1 + C2 L.
        record(Condition::L4, k.C1 + k.C2 * j.value - std::abs(j.dt), -1e-10 * scale * (1.0 + k.C2), p);
        // (L5) midpoint concavity in u.
        {
            const double a = model.value(p.s, p.x, p.v, p.u);
            const double b = model.value(p.s, p.x, p.v, q.u);
            const double m = model.value(p.s, p.x, p.v, 0.5 * (p.u + q.u));
            const double tol = -1e-12 * (1.0 + std::abs(a) + std::abs(b));
            record(Condition::L5, m - 0.5 * (a + b), tol, p);
        }
        // (L6) L_u < 0.
        record(Condition::L6, -j.du, 0.0, p);
    }
    return report;
}

double PartialsReport::worst() const { return std::max({du, dt, dx, dv, dux, duv}); }

PartialsReport check_partials(const LagrangianModel& model, int samples, const SampleBox& box, double h,
                              std::uint64_t seed) {
    if (samples < 1) throw PreconditionError("check_partials needs at least one sample");
    box.validate();
    PartialsReport rep;
    Rng rng(seed);
    const DomainDescriptor& d = model.domain();
    auto rel = [](double fd, double an) { return std::abs(fd - an) / std::max(1.0, std::abs(an)); };
    for (int i = 0; i < samples; ++i) {
        const Sample p = draw(rng, d, box);
        const LagrangianJet j = model.jet(p.s, p.x, p.v, p.u);
        const double fdu = (model.value(p.s, p.x, p.v, p.u + h) - model.value(p.s, p.x, p.v, p.u - h)) / (2 * h);
        rep.du = std::max(rep.du, rel(fdu, j.du));
        const double fdt = (model.value(p.s + h, p.x, p.v, p.u) - model.value(p.s - h, p.x, p.v, p.u)) / (2 * h);
        rep.dt = std::max(rep.dt, rel(fdt, j.dt));
        for (int a = 0; a < d.dimension; ++a) {
            Coord e{0.0, 0.0};
            e[a] = h;
            const double fdx = (model.value(p.s, p.x + e, p.v, p.u) - model.value(p.s, p.x - e, p.v, p.u)) / (2 * h);
            const double fdv = (model.value(p.s, p.x, p.v + e, p.u) - model.value(p.s, p.x, p.v - e, p.u)) / (2 * h);
            const double fdux = (model.du(p.s, p.x + e, p.v, p.u) - model.du(p.s, p.x - e, p.v, p.u)) / (2 * h);
            const double fduv = (model.du(p.s, p.x, p.v + e, p.u) - model.du(p.s, p.x, p.v - e, p.u)) / (2 * h);
            rep.dx = std::max(rep.dx, rel(fdx, j.dx[a]));
            rep.dv = std::max(rep.dv, rel(fdv, j.dv[a]));
            rep.dux = std::max(rep.dux, rel(fdux, j.dux[a]));
            rep.duv = std::max(rep.duv, rel(fduv, j.duv[a]));
        }
    }
    return rep;
}

}  // namespace hj
