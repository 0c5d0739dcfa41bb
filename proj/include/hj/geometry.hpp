#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace hj {

inline constexpr std::size_t kMaxDim = 2;

/// Point, velocity or covector on a torus of dimension 1 or 2. Components at
/// index >= dimension are kept at zero.
using Coord = std::array<double, kMaxDim>;

inline Coord operator+(const Coord& a, const Coord& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Coord operator-(const Coord& a, const Coord& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Coord operator*(double s, const Coord& a) { return {s * a[0], s * a[1]}; }
inline Coord& operator+=(Coord& a, const Coord& b) {
    a[0] += b[0];
    a[1] += b[1];
    return a;
}
inline double dot(const Coord& a, const Coord& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Coord& a) { return std::sqrt(dot(a, a)); }
inline double sup_norm(const Coord& a) { return std::max(std::abs(a[0]), std::abs(a[1])); }

/// Flat torus R^d / (period_1 Z x ... x period_d Z).
struct DomainDescriptor {
    int dimension = 1;
    Coord period{1.0, 1.0};

    /// Throws PreconditionError unless dimension is 1 or 2 and periods are positive.
    void validate() const;

    /// Representative of x in [0, period) per axis; unused axes are zeroed.
    [[nodiscard]] Coord wrap(const Coord& x) const;

    /// Displacement y - x reduced to the nearest periodic image, per axis in
    /// [-period/2, period/2].
    [[nodiscard]] Coord nearest_displacement(const Coord& x, const Coord& y) const;

    /// Euclidean length of the nearest-image displacement.
    [[nodiscard]] double distance(const Coord& x, const Coord& y) const;

    /// Integer image index of a lifted coordinate (floor(x / period) per axis).
    [[nodiscard]] std::array<long, kMaxDim> image_index(const Coord& lifted) const;

    bool operator==(const DomainDescriptor&) const = default;
};

}  // namespace hj
