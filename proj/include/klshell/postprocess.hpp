#pragma once

/**
 * @file postprocess.hpp
 * @brief Moment extraction from 3D stress fields, resampling, profiles,
 *        leading-edge detection and the NRMSE comparison metric.
 */

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "elastic3d.hpp"
#include "scalar_field.hpp"

namespace klshell::post {

enum class MomentComponent { xx, yy, xy };

inline MomentComponent moment_from_string(const std::string& s) {
    if (s == "xx" || s == "M_xx" || s == "M_x") return MomentComponent::xx;
    if (s == "yy" || s == "M_yy" || s == "M_y") return MomentComponent::yy;
    if (s == "xy" || s == "M_xy") return MomentComponent::xy;
    throw ValidationError("component", "unknown moment component '" + s + "'");
}

inline std::string to_string(MomentComponent c) {
    switch (c) {
    case MomentComponent::xx: return "M_xx";
    case MomentComponent::yy: return "M_yy";
    case MomentComponent::xy: return "M_xy";
    }
    return "?";
}

namespace detail {

inline std::size_t stress_of(MomentComponent c) {
    using namespace elastic3d;
    switch (c) {
    case MomentComponent::xx: return s_11;
    case MomentComponent::yy: return s_22;
    case MomentComponent::xy: return s_12;
    }
    return s_11;
}

/// M_xy integrates -tau_xy z; the normal moments integrate +sigma z.
inline double sign_of(MomentComponent c) { return c == MomentComponent::xy ? -1.0 : 1.0; }

inline ScalarField2D empty_plane(const elastic3d::ElasticField3D& f, MomentComponent c) {
    if (f.n[2] < 2) throw ValidationError("field.nz", "moment extraction needs at least 2 layers");
    return ScalarField2D({f.n[0], f.n[1], f.spacing[0], f.spacing[1], {f.origin[0], f.origin[1]}}, to_string(c), f.time);
}

} // namespace detail

/**
 * Moment per unit length from the top and bottom layers under a linear
 * through-thickness stress fit: M = (s_up - s_down) h^2 / 12.
 */
inline ScalarField2D extract_moments(const elastic3d::ElasticField3D& f, MomentComponent c) {
    ScalarField2D out = detail::empty_plane(f, c);
    const std::size_t comp = detail::stress_of(c);
    const double h = elastic3d::thickness(f);
    const double factor = detail::sign_of(c) * h * h / 12.0;
    const std::size_t top = f.n[2] - 1;
    for (std::size_t j = 0; j < f.n[1]; ++j)
        for (std::size_t i = 0; i < f.n[0]; ++i)
            out(i, j) = (f.at({i, j, top})[comp] - f.at({i, j, 0})[comp]) * factor;
    return out;
}

/// Exact integral of (piecewise-linear interpolant of sigma) * z over the layer nodes.
inline double integrate_first_moment(std::span<const double> z, std::span<const double> sigma) {
    double m = 0.0;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        const double z0 = z[k], z1 = z[k + 1];
        m += (z1 - z0) / 6.0 * (sigma[k] * (2.0 * z0 + z1) + sigma[k + 1] * (z0 + 2.0 * z1));
    }
    return m;
}

/// Moment from all layers (no linear-fit assumption).
inline ScalarField2D extract_moments_quadrature(const elastic3d::ElasticField3D& f, MomentComponent c) {
    ScalarField2D out = detail::empty_plane(f, c);
    const std::size_t comp = detail::stress_of(c);
    const std::size_t nz = f.n[2];
    std::vector<double> z(nz), s(nz);
    for (std::size_t k = 0; k < nz; ++k) z[k] = f.coord(2, k);
    for (std::size_t j = 0; j < f.n[1]; ++j)
        for (std::size_t i = 0; i < f.n[0]; ++i) {
            for (std::size_t k = 0; k < nz; ++k) s[k] = f.at({i, j, k})[comp];
            out(i, j) = detail::sign_of(c) * integrate_first_moment(z, s);
        }
    return out;
}

/// RMSE(a - b) normalised by the value range of the reference b.
inline double nrmse(const ScalarField2D& a, const ScalarField2D& reference) {
    const ScalarField2D& b = reference;
    if (!a.geometry.same_shape(b.geometry) || a.values.size() != b.values.size())
        throw ValidationError("nrmse", "fields differ in shape; resample first");
    if (b.values.empty()) throw ValidationError("nrmse", "empty fields");
    double sq = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        const double d = a.values[k] - b.values[k];
        sq += d * d;
        lo = std::min(lo, b.values[k]);
        hi = std::max(hi, b.values[k]);
    }
    if (!(hi > lo)) throw NumericalError("nrmse: reference field is constant, normalisation undefined");
    const double rmse = std::sqrt(sq / static_cast<double>(a.values.size()));
    return rmse / (hi - lo);
}

/// Bilinear interpolation of `src` at the nodes of `target`, which must lie inside src.
inline ScalarField2D resample_to(const ScalarField2D& src, const GridGeometry2D& target) {
    const auto& g = src.geometry;
    if (g.nx < 2 || g.ny < 2) throw ValidationError("resample_to", "source needs at least 2x2 nodes");
    const double tolx = 1e-9 * std::max(g.dx, std::abs(g.x_max() - g.origin[0]));
    const double toly = 1e-9 * std::max(g.dy, std::abs(g.y_max() - g.origin[1]));
    if (target.origin[0] < g.origin[0] - tolx || target.x_max() > g.x_max() + tolx ||
        target.origin[1] < g.origin[1] - toly || target.y_max() > g.y_max() + toly)
        throw ValidationError("resample_to", "target grid extends outside the source bounds");

    if (g.nx == target.nx && g.ny == target.ny && g.dx == target.dx && g.dy == target.dy && g.origin == target.origin)
        return src;

    ScalarField2D out(target, src.component, src.time);
    auto locate = [](double coord, double origin, double d, std::size_t n, std::size_t& cell, double& frac) {
        double s = (coord - origin) / d;
        s = std::clamp(s, 0.0, static_cast<double>(n - 1));
        cell = std::min(static_cast<std::size_t>(s), n - 2);
        frac = s - static_cast<double>(cell);
    };
    for (std::size_t j = 0; j < target.ny; ++j) {
        std::size_t cj;
        double fy;
        locate(target.y(j), g.origin[1], g.dy, g.ny, cj, fy);
        for (std::size_t i = 0; i < target.nx; ++i) {
            std::size_t ci;
            double fx;
            locate(target.x(i), g.origin[0], g.dx, g.nx, ci, fx);
            const double v00 = src(ci, cj), v10 = src(ci + 1, cj);
            const double v01 = src(ci, cj + 1), v11 = src(ci + 1, cj + 1);
            out(i, j) = (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
        }
    }
    return out;
}

struct Profile {
    std::vector<double> station;
    std::vector<double> value;
};

/**
 * Line profile along `axis` through `line_coordinate` (the transverse position),
 * each station averaging all nodes within band_width/2 of the line.
 */
inline Profile extract_profile(const ScalarField2D& f, Axis axis, double band_width, double line_coordinate) {
    if (axis == Axis::z) throw ValidationError("profile.axis", "profiles run along x or y");
    if (!(band_width >= 0.0)) throw ValidationError("profile.band_width", "must be non-negative");
    const auto& g = f.geometry;
    const bool along_x = axis == Axis::x;
    const std::size_t n_along = along_x ? g.nx : g.ny;
    const std::size_t n_across = along_x ? g.ny : g.nx;
    const double d_across = along_x ? g.dy : g.dx;
    auto across = [&](std::size_t k) { return along_x ? g.y(k) : g.x(k); };
    const double lo = line_coordinate - 0.5 * band_width - 1e-9 * d_across;
    const double hi = line_coordinate + 0.5 * band_width + 1e-9 * d_across;
    if (lo < across(0) - d_across * 1e-6 || hi > across(n_across - 1) + d_across * 1e-6)
        throw ValidationError("profile.band_width", "band extends outside the domain");

    std::vector<std::size_t> band;
    for (std::size_t k = 0; k < n_across; ++k)
        if (across(k) >= lo && across(k) <= hi) band.push_back(k);
    if (band.empty()) throw ValidationError("profile.band_width", "band contains no grid lines");

    Profile p;
    p.station.resize(n_along);
    p.value.resize(n_along);
    for (std::size_t s = 0; s < n_along; ++s) {
        double sum = 0.0;
        for (std::size_t k : band) sum += along_x ? f(s, k) : f(k, s);
        p.station[s] = along_x ? g.x(s) : g.y(s);
        p.value[s] = sum / static_cast<double>(band.size());
    }
    return p;
}

inline Profile extract_profile(const ScalarField2D& f, Axis axis, double band_width = 1.0) {
    const auto& g = f.geometry;
    const double mid = axis == Axis::x ? 0.5 * (g.origin[1] + g.y_max()) : 0.5 * (g.origin[0] + g.x_max());
    return extract_profile(f, axis, band_width, mid);
}

/**
 * Distance from `source` to the outermost node on the ray in +axis direction
 * whose |value| exceeds `fraction` of the ray's peak |value|.
 */
inline double leading_edge_radius(const ScalarField2D& f, Axis axis, std::array<double, 2> source, double fraction = 0.01) {
    const auto& g = f.geometry;
    const std::size_t i0 = static_cast<std::size_t>(std::lround((source[0] - g.origin[0]) / g.dx));
    const std::size_t j0 = static_cast<std::size_t>(std::lround((source[1] - g.origin[1]) / g.dy));
    if (i0 >= g.nx || j0 >= g.ny) throw ValidationError("source", "outside the field");
    const bool along_x = axis == Axis::x;
    const std::size_t n = along_x ? g.nx - i0 : g.ny - j0;
    auto at = [&](std::size_t s) { return std::abs(along_x ? f(i0 + s, j0) : f(i0, j0 + s)); };
    double peak = 0.0;
    for (std::size_t s = 0; s < n; ++s) peak = std::max(peak, at(s));
    if (peak == 0.0) return 0.0;
    std::size_t edge = 0;
    for (std::size_t s = 0; s < n; ++s)
        if (at(s) > fraction * peak) edge = s;
    return static_cast<double>(edge) * (along_x ? g.dx : g.dy);
}

/// Least-squares slope of y against x.
inline double regression_slope(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2 || x.size() != y.size()) throw ValidationError("regression", "need at least two paired samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace klshell::post
