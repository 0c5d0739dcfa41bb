#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hj/geometry.hpp"

namespace hj {

/// Value and first partials of L(s, x, v, u), plus the mixed partials of L_u
/// with respect to x and v (needed by the linearized Caratheodory problem).
struct LagrangianJet {
    double value = 0.0;
    double du = 0.0;
    double dt = 0.0;
    Coord dx{0.0, 0.0};
    Coord dv{0.0, 0.0};
    Coord dux{0.0, 0.0};
    Coord duv{0.0, 0.0};
};

/// Value and first partials of H(s, x, p, u).
struct HamiltonianJet {
    double value = 0.0;
    double du = 0.0;
    double dt = 0.0;
    Coord dx{0.0, 0.0};
    Coord dp{0.0, 0.0};
};

/// Structural conditions on L. Indices 0..5 stand for (L1)..(L6):
/// strict convexity in v, superlinear lower bound, bounded L_u, bounded L_t,
/// concavity in u, strictly negative L_u.
enum class Condition : int { L1 = 0, L2, L3, L4, L5, L6 };
inline constexpr int kConditionCount = 6;

class ConditionSet {
public:
    ConditionSet() = default;
    ConditionSet(std::initializer_list<Condition> list) {
        for (auto c : list) set(c);
    }
    void set(Condition c, bool on = true) { bits_[static_cast<int>(c)] = on; }
    [[nodiscard]] bool has(Condition c) const { return bits_[static_cast<int>(c)]; }

private:
    std::array<bool, kConditionCount> bits_{};
};

[[nodiscard]] std::string condition_name(Condition c);

/// Constants attached to the declared conditions.
///   (L2): L(s,x,v,0) >= theta_a * |v|^theta_q - c0
///   (L3): |L_u| <= K
///   (L4): |L_t| <= C1 + C2 * L
struct ModelConstants {
    double K = 0.0;
    double theta_a = 0.5;
    double theta_q = 2.0;
    double c0 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;

    [[nodiscard]] double theta0(double r) const;
};

/// Finite trigonometric polynomial on the torus,
///   V(x) = constant + sum_j cos_j cos(2 pi k_j . x / P) + sin_j sin(2 pi k_j . x / P)
/// where k_j . x / P = sum_a k_j[a] x[a] / period[a].
struct TrigTerm {
    std::array<int, kMaxDim> k{0, 0};
    double cos_coef = 0.0;
    double sin_coef = 0.0;
};

struct TrigPolynomial {
    double constant = 0.0;
    std::vector<TrigTerm> terms;

    [[nodiscard]] double value(const DomainDescriptor& domain, const Coord& x) const;
    [[nodiscard]] Coord gradient(const DomainDescriptor& domain, const Coord& x) const;
    /// Upper bound of |V - constant|.
    [[nodiscard]] double oscillation_bound() const;
    [[nodiscard]] bool empty() const { return terms.empty() && constant == 0.0; }
};

/// Tonelli Lagrangian L0(x, v) = 1/2 v^T A v - V(x) with A symmetric positive
/// definite, stored as {a11, a12, a22} (only a11 is used in dimension 1).
struct TonelliSpec {
    DomainDescriptor domain;
    std::array<double, 3> kinetic{1.0, 0.0, 1.0};
    TrigPolynomial potential;

    void validate() const;
    [[nodiscard]] double kinetic_energy(const Coord& v) const;
    [[nodiscard]] Coord kinetic_gradient(const Coord& v) const;
    /// Smallest eigenvalue of A.
    [[nodiscard]] double kinetic_min_eigenvalue() const;
    [[nodiscard]] double value(const Coord& x, const Coord& v) const;
};

class HamiltonianModel;

/// Immutable Lagrangian bundle L(s, x, v, u) on a flat torus.
///
/// Built-in families are produced by the make_* factories; user-defined models
/// enter through the public constructor. When `exact_mixed_partials` is false the
/// jet's dux/duv entries are filled by central differences of L_u.
class LagrangianModel {
public:
    using JetFn = std::function<LagrangianJet(double s, const Coord& x, const Coord& v, double u)>;

    LagrangianModel(DomainDescriptor domain, JetFn jet, ConditionSet declared,
                    ModelConstants constants, std::string family, bool time_dependent,
                    bool exact_mixed_partials = true);

    [[nodiscard]] LagrangianJet jet(double s, const Coord& x, const Coord& v, double u) const;
    [[nodiscard]] double value(double s, const Coord& x, const Coord& v, double u) const {
        return jet_(s, x, v, u).value;
    }
    [[nodiscard]] double du(double s, const Coord& x, const Coord& v, double u) const {
        return jet_(s, x, v, u).du;
    }
    [[nodiscard]] Coord dv(double s, const Coord& x, const Coord& v, double u) const {
        return jet_(s, x, v, u).dv;
    }
    [[nodiscard]] Coord dx(double s, const Coord& x, const Coord& v, double u) const {
        return jet_(s, x, v, u).dx;
    }
    [[nodiscard]] double dt(double s, const Coord& x, const Coord& v, double u) const {
        return jet_(s, x, v, u).dt;
    }

    [[nodiscard]] const DomainDescriptor& domain() const { return domain_; }
    [[nodiscard]] int dimension() const { return domain_.dimension; }
    [[nodiscard]] bool declares(Condition c) const { return declared_.has(c); }
    [[nodiscard]] const ConditionSet& declared() const { return declared_; }
    [[nodiscard]] const ModelConstants& constants() const { return constants_; }
    [[nodiscard]] const std::string& family() const { return family_; }
    [[nodiscard]] bool time_dependent() const { return time_dependent_; }

    /// Set for models of the form L0(x, v) - lambda * u.
    [[nodiscard]] std::optional<double> discount_rate() const { return discount_; }
    [[nodiscard]] const std::optional<TonelliSpec>& tonelli() const { return tonelli_; }

private:
    friend LagrangianModel make_discounted(const TonelliSpec&, double);
    friend LagrangianModel make_nonlinear_concave(const TonelliSpec&, double, double);
    friend LagrangianModel make_time_rescaled(const TonelliSpec&, double, double);
    friend std::optional<HamiltonianModel> closed_form_hamiltonian(const LagrangianModel&);

    DomainDescriptor domain_;
    JetFn jet_;
    ConditionSet declared_;
    ModelConstants constants_;
    std::string family_;
    bool time_dependent_;
    bool exact_mixed_;
    std::optional<double> discount_;
    std::optional<TonelliSpec> tonelli_;
    /// lambda and eps of the built-in families.
    double lambda_ = 0.0;
    double eps_ = 0.0;
};

/// L(x, v, u) = L0(x, v) - lambda * u.
[[nodiscard]] LagrangianModel make_discounted(const TonelliSpec& l0, double lambda);

/// L(x, v, u) = L0(x, v) - lambda * u - eps * sqrt(1 + u^2); strictly concave in u
/// with L_u in [-lambda - eps, -lambda + eps]. Requires lambda > eps >= 0.
[[nodiscard]] LagrangianModel make_nonlinear_concave(const TonelliSpec& l0, double lambda, double eps);

/// Time-dependent, u-independent L(s, x, v) = exp(lambda s) L0(x, v). Constants for
/// (L2) and (L4) are valid for |s| <= horizon.
[[nodiscard]] LagrangianModel make_time_rescaled(const TonelliSpec& l0, double lambda,
                                                 double horizon = 10.0);

/// Immutable Hamiltonian bundle H(s, x, p, u).
class HamiltonianModel {
public:
    using JetFn = std::function<HamiltonianJet(double s, const Coord& x, const Coord& p, double u)>;

    HamiltonianModel(DomainDescriptor domain, JetFn jet, bool time_dependent, double K)
        : domain_(domain), jet_(std::move(jet)), time_dependent_(time_dependent), K_(K) {}

    [[nodiscard]] HamiltonianJet jet(double s, const Coord& x, const Coord& p, double u) const {
        return jet_(s, x, p, u);
    }
    [[nodiscard]] double value(double s, const Coord& x, const Coord& p, double u) const {
        return jet_(s, x, p, u).value;
    }
    [[nodiscard]] const DomainDescriptor& domain() const { return domain_; }
    [[nodiscard]] bool time_dependent() const { return time_dependent_; }
    /// Bound on |H_u| inherited from (L3).
    [[nodiscard]] double K() const { return K_; }

private:
    DomainDescriptor domain_;
    JetFn jet_;
    bool time_dependent_;
    double K_;
};

/// H(s,x,p,u) = sup_v {p.v - L(s,x,v,u)} by damped Newton on the concave inner
/// problem. H_p is the maximizing v; the remaining partials follow from the
/// envelope theorem. Requires (L1) and (L2) to be declared.
[[nodiscard]] HamiltonianModel legendre_to_hamiltonian(const LagrangianModel& model);

/// Closed-form Hamiltonian of a built-in family:
///   discounted          H = 1/2 p A^{-1} p + V(x) + lambda u
///   nonlinear_concave   H = 1/2 p A^{-1} p + V(x) + lambda u + eps sqrt(1 + u^2)
///   time_rescaled       H = e^{-lambda s} 1/2 p A^{-1} p + e^{lambda s} V(x)
/// Empty for user-defined models.
[[nodiscard]] std::optional<HamiltonianModel> closed_form_hamiltonian(const LagrangianModel& model);

/// Inverse transform L(s,x,v,u) = sup_p {p.v - H(s,x,p,u)}. The result declares no
/// conditions and carries no constants; it exists to verify the involution.
[[nodiscard]] LagrangianModel legendre_to_lagrangian(const HamiltonianModel& hamiltonian);

/// Sampling box for the numerical condition checkers. Positions are drawn
/// uniformly over one period cell.
struct SampleBox {
    double s_min = 0.0;
    double s_max = 1.0;
    double v_max = 10.0;
    double u_min = -10.0;
    double u_max = 10.0;

    void validate() const;
};

struct ConditionResult {
    Condition condition = Condition::L1;
    bool declared = false;
    bool passed = true;
    /// Smallest slack observed (negative means violated).
    double worst_margin = 0.0;
    double worst_s = 0.0;
    Coord worst_x{0.0, 0.0};
    Coord worst_v{0.0, 0.0};
    double worst_u = 0.0;
};

struct ConditionReport {
    std::array<ConditionResult, kConditionCount> results;

    [[nodiscard]] const ConditionResult& operator[](Condition c) const {
        return results[static_cast<int>(c)];
    }
    /// True when every declared condition passed.
    [[nodiscard]] bool declared_pass() const;
};

/// Falsification test of (L1)..(L6) on `samples` random points of `box`. All six
/// conditions are evaluated; `declared` records what the model claims.
[[nodiscard]] ConditionReport check_conditions(const LagrangianModel& model, int samples,
                                               const SampleBox& box, std::uint64_t seed = 1);

/// Largest relative disagreement of each analytic partial with central
/// differences of `value` (step `h`). Relative errors use max(1, |partial|).
struct PartialsReport {
    double du = 0.0;
    double dt = 0.0;
    double dx = 0.0;
    double dv = 0.0;
    double dux = 0.0;
    double duv = 0.0;

    [[nodiscard]] double worst() const;
};

[[nodiscard]] PartialsReport check_partials(const LagrangianModel& model, int samples,
                                            const SampleBox& box, double h = 1e-5,
                                            std::uint64_t seed = 2);

}  // namespace hj
