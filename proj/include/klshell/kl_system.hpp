#pragma once

/**
 * @file kl_system.hpp
 * @brief First-order hyperbolic form of Kirchhoff-Love plate dynamics.
 *
 * State ordering (fixed across the project):
 *   0 v_x, 1 v_y       velocities            [m/s]
 *   2 w_x, 3 w_y       angular velocities    [rad/s]
 *   4 sigma_x, 5 sigma_y, 6 sigma_xy          membrane stresses [Pa]
 *   7 M_x, 8 M_y, 9 M_xy                      moments per unit length [N]
 *
 * The system reads dU/dt + A_x dU/dx + A_y dU/dy = 0, the minus sign of the
 * printed matrices is folded into the entries.
 */

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "material.hpp"
#include "spectral.hpp"

namespace klshell::shell {

inline constexpr std::size_t kComponents = 10;
using ShellState = State<kComponents>;

enum Component : std::size_t {
    v_x = 0,
    v_y = 1,
    w_x = 2,
    w_y = 3,
    sigma_x = 4,
    sigma_y = 5,
    sigma_xy = 6,
    M_x = 7,
    M_y = 8,
    M_xy = 9,
};

inline constexpr std::array<std::string_view, kComponents> kComponentNames = {
    "v_x", "v_y", "w_x", "w_y", "sigma_x", "sigma_y", "sigma_xy", "M_x", "M_y", "M_xy"};

inline constexpr std::array<std::string_view, kComponents> kComponentUnits = {
    "m/s", "m/s", "rad/s", "rad/s", "Pa", "Pa", "Pa", "N", "N", "N"};

inline constexpr std::array<std::size_t, 5> kInPlane = {v_x, v_y, sigma_x, sigma_y, sigma_xy};
inline constexpr std::array<std::size_t, 5> kOutOfPlane = {w_x, w_y, M_x, M_y, M_xy};
inline constexpr std::array<std::size_t, 4> kVelocityLike = {v_x, v_y, w_x, w_y};

inline constexpr bool is_in_plane(std::size_t c) {
    for (auto i : kInPlane)
        if (i == c) return true;
    return false;
}

inline std::optional<std::size_t> component_index(std::string_view name) {
    for (std::size_t i = 0; i < kComponents; ++i)
        if (kComponentNames[i] == name) return i;
    return std::nullopt;
}

struct SystemMatrix {
    SquareMatrix<kComponents> a;
    Axis dir = Axis::x;
};

inline SystemMatrix build_matrix(const Material& m, Axis dir, ShearConvention conv = ShearConvention::engineering) {
    if (dir == Axis::z) throw ValidationError("dir", "the shell system is two-dimensional");
    const DerivedConstants c = derive_constants(m);
    const double membrane = m.E / (1.0 - m.nu * m.nu);
    const double shear = shear_rate_coefficient(m, conv);
    const double twist = 0.5 * c.D * (1.0 - m.nu);

    SystemMatrix s;
    s.dir = dir;
    auto& a = s.a;
    if (dir == Axis::x) {
        a(v_x, sigma_x) = -1.0 / m.rho;
        a(v_y, sigma_xy) = -1.0 / m.rho;
        a(w_x, M_x) = -1.0 / c.I;
        a(w_y, M_xy) = -1.0 / c.I;
        a(sigma_x, v_x) = -membrane;
        a(sigma_y, v_x) = -membrane * m.nu;
        a(sigma_xy, v_y) = -shear;
        a(M_x, w_x) = -c.D;
        a(M_y, w_x) = -c.D * m.nu;
        a(M_xy, w_y) = -twist;
    } else {
        a(v_x, sigma_xy) = -1.0 / m.rho;
        a(v_y, sigma_y) = -1.0 / m.rho;
        a(w_x, M_xy) = -1.0 / c.I;
        a(w_y, M_y) = -1.0 / c.I;
        a(sigma_x, v_y) = -membrane * m.nu;
        a(sigma_y, v_y) = -membrane;
        a(sigma_xy, v_x) = -shear;
        a(M_x, w_y) = -c.D * m.nu;
        a(M_y, w_y) = -c.D;
        a(M_xy, w_x) = -twist;
    }
    return s;
}

/// Closed-form eigenpairs of a matrix produced by build_matrix.
inline SpectralDecomposition<kComponents> decompose(const SystemMatrix& s, const Material& m) {
    validate(m);
    return decompose_velocity_stress<kComponents>(s.a, {kVelocityLike.begin(), kVelocityLike.end()});
}

/// Index permutation exchanging the roles of x and y.
inline constexpr std::array<std::size_t, kComponents> kSwapXY = {v_y, v_x, w_y, w_x, sigma_y, sigma_x, sigma_xy, M_y, M_x, M_xy};

inline ShellState swap_xy(const ShellState& u) {
    ShellState out{};
    for (std::size_t i = 0; i < kComponents; ++i) out[kSwapXY[i]] = u[i];
    return out;
}

} // namespace klshell::shell
