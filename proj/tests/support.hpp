#pragma once

#include <cmath>
#include <numbers>

#include "hj/lagrangian.hpp"

namespace hjtest {

inline hj::DomainDescriptor unit_line() { return hj::DomainDescriptor{1, {1.0, 1.0}}; }
inline hj::DomainDescriptor unit_square() { return hj::DomainDescriptor{2, {1.0, 1.0}}; }

/// L0 = |v|^2/2 - cos_coef * cos(2 pi x) on the given torus.
inline hj::TonelliSpec mechanical(const hj::DomainDescriptor& domain, double cos_coef = 0.0) {
    hj::TonelliSpec spec;
    spec.domain = domain;
    if (cos_coef != 0.0) spec.potential.terms.push_back({{1, 0}, cos_coef, 0.0});
    return spec;
}

inline hj::LagrangianModel free_particle(double lambda = 0.0) {
    return hj::make_discounted(mechanical(unit_line()), lambda);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace hjtest
