#pragma once

/**
 * @file scalar_field.hpp
 * @brief One scalar per node of a 2D structured grid, with its metadata.
 */

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace klshell {

struct GridGeometry2D {
    std::size_t nx = 0;
    std::size_t ny = 0;
    double dx = 0.0;
    double dy = 0.0;
    std::array<double, 2> origin{};

    double x(std::size_t i) const { return origin[0] + static_cast<double>(i) * dx; }
    double y(std::size_t j) const { return origin[1] + static_cast<double>(j) * dy; }
    double x_max() const { return x(nx - 1); }
    double y_max() const { return y(ny - 1); }

    bool same_shape(const GridGeometry2D& o) const { return nx == o.nx && ny == o.ny; }
};

struct ScalarField2D {
    GridGeometry2D geometry;
    std::vector<double> values; ///< row-major, x fastest
    std::string component;
    double time = 0.0;

    ScalarField2D() = default;

    explicit ScalarField2D(const GridGeometry2D& g, std::string name = {}, double t = 0.0)
        : geometry(g), values(g.nx * g.ny, 0.0), component(std::move(name)), time(t) {}

    std::size_t nx() const { return geometry.nx; }
    std::size_t ny() const { return geometry.ny; }

    double& operator()(std::size_t i, std::size_t j) { return values[j * geometry.nx + i]; }
    double operator()(std::size_t i, std::size_t j) const { return values[j * geometry.nx + i]; }

    bool all_finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

} // namespace klshell
