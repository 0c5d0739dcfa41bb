#include "hj/geometry.hpp"

#include "hj/errors.hpp"

namespace hj {

void DomainDescriptor::validate() const {
    if (dimension != 1 && dimension != 2) {
        throw PreconditionError("domain dimension must be 1 or 2, got " + std::to_string(dimension));
    }
    for (int a = 0; a < dimension; ++a) {
        if (!(period[a] > 0.0) || !std::isfinite(period[a])) {
            throw PreconditionError("domain period must be positive and finite");
        }
    }
}

Coord DomainDescriptor::wrap(const Coord& x) const {
    Coord out{0.0, 0.0};
    for (int a = 0; a < dimension; ++a) {
        double r = std::fmod(x[a], period[a]);
        if (r < 0.0) r += period[a];
        if (r >= period[a]) r -= period[a];
        out[a] = r;
    }
    return out;
}

Coord DomainDescriptor::nearest_displacement(const Coord& x, const Coord& y) const {
    Coord d{0.0, 0.0};
    for (int a = 0; a < dimension; ++a) {
        const double raw = y[a] - x[a];
        d[a] = raw - period[a] * std::round(raw / period[a]);
    }
    return d;
}

double DomainDescriptor::distance(const Coord& x, const Coord& y) const {
    return norm(nearest_displacement(x, y));
}

std::array<long, kMaxDim> DomainDescriptor::image_index(const Coord& lifted) const {
    std::array<long, kMaxDim> k{0, 0};
    for (int a = 0; a < dimension; ++a) {
        k[a] = static_cast<long>(std::floor(lifted[a] / period[a]));
    }
    return k;
}

}  // namespace hj
