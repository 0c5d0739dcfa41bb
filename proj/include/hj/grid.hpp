#pragma once

#include <functional>
#include <vector>

#include "hj/geometry.hpp"

namespace hj {

/// Values on the uniform periodic grid x_i = i * period / resolution per axis.
/// In dimension 2 the flat index is i + resolution * j.
struct GridFunction {
    DomainDescriptor domain;
    int resolution = 0;
    std::vector<double> values;

    GridFunction() = default;
    GridFunction(const DomainDescriptor& domain, int resolution, double fill = 0.0);

    static GridFunction sample(const DomainDescriptor& domain, int resolution,
                               const std::function<double(const Coord&)>& fn);

    [[nodiscard]] std::size_t size() const { return values.size(); }
    [[nodiscard]] double spacing(int axis = 0) const { return domain.period[axis] / resolution; }
    [[nodiscard]] Coord node(std::size_t k) const;
    [[nodiscard]] std::size_t index(int i, int j = 0) const;
    [[nodiscard]] double& operator[](std::size_t k) { return values[k]; }
    [[nodiscard]] double operator[](std::size_t k) const { return values[k]; }

    /// Multilinear interpolation with periodic wrap.
    [[nodiscard]] double interpolate(const Coord& x) const;
    [[nodiscard]] double sup_norm() const;
    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;

    /// Throws PreconditionError on resolution < 2, size mismatch or non-finite values.
    void validate() const;
};

/// Sup-norm of a - b; the grids must match.
[[nodiscard]] double sup_distance(const GridFunction& a, const GridFunction& b);

}  // namespace hj
