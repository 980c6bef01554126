#pragma once

/**
 * @file material.hpp
 * @brief Isotropic elastic material with plate thickness, and every constant
 *        derived from it (Lame parameters, flexural rigidity, wave speeds).
 */

#include <cmath>
#include <string>

#include "errors.hpp"

namespace klshell {

/// Coefficient used for the shear-stress rate in the shell matrices.
enum class ShearConvention {
    engineering, ///< E / (2(1+nu)), the shear modulus G
    tensor       ///< E / (4(1+nu)), half of G
};

inline std::string to_string(ShearConvention c) {
    return c == ShearConvention::engineering ? "engineering" : "tensor";
}

inline ShearConvention shear_convention_from_string(const std::string& s) {
    if (s == "engineering") return ShearConvention::engineering;
    if (s == "tensor") return ShearConvention::tensor;
    throw ValidationError("numerics.shear_convention", "expected 'engineering' or 'tensor', got '" + s + "'");
}

/// SI units: E [Pa], rho [kg/m^3], h [m].
struct Material {
    double E = 0.0;
    double nu = 0.0;
    double rho = 0.0;
    double h = 0.0;

    /// Steel plate used throughout the experiments (thickness is scenario dependent).
    static constexpr Material steel(double thickness = 0.02) { return {210e9, 0.30, 7800.0, thickness}; }
};

struct DerivedConstants {
    double lambda = 0.0;   ///< first Lame parameter [Pa]
    double mu = 0.0;       ///< shear modulus G [Pa]
    double D = 0.0;        ///< flexural rigidity [N m]
    double I = 0.0;        ///< areal moment of inertia [kg m]
    double cp_shell = 0.0; ///< plane-stress longitudinal speed [m/s]
    double cs_shell = 0.0; ///< shell shear / twist speed [m/s]
    double cp_3d = 0.0;    ///< bulk P speed [m/s]
    double cs_3d = 0.0;    ///< bulk S speed [m/s]
};

/// Throws ValidationError naming `prefix.<field>` for the first violated bound.
inline void validate(const Material& m, const std::string& prefix = "material") {
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw ValidationError(prefix + "." + name, "must be a positive finite number, got " + std::to_string(v));
    };
    positive(m.E, "E");
    positive(m.rho, "rho");
    positive(m.h, "h");
    if (!(m.nu > -1.0 && m.nu < 0.5))
        throw ValidationError(prefix + ".nu", "Poisson ratio must lie in (-1, 0.5), got " + std::to_string(m.nu));
}

inline DerivedConstants derive_constants(const Material& m) {
    validate(m);
    DerivedConstants c;
    c.lambda = m.E * m.nu / ((1.0 + m.nu) * (1.0 - 2.0 * m.nu));
    c.mu = m.E / (2.0 * (1.0 + m.nu));
    const double h3 = m.h * m.h * m.h;
    c.D = m.E * h3 / (12.0 * (1.0 - m.nu * m.nu));
    c.I = m.rho * h3 / 12.0;
    c.cp_shell = std::sqrt(m.E / (m.rho * (1.0 - m.nu * m.nu)));
    c.cs_shell = std::sqrt(m.E / (2.0 * m.rho * (1.0 + m.nu)));
    c.cp_3d = std::sqrt((c.lambda + 2.0 * c.mu) / m.rho);
    c.cs_3d = std::sqrt(c.mu / m.rho);
    return c;
}

/// Coefficient multiplying the in-plane shear strain rate in the sigma_xy row.
inline double shear_rate_coefficient(const Material& m, ShearConvention conv) {
    const double g = m.E / (2.0 * (1.0 + m.nu));
    return conv == ShearConvention::engineering ? g : 0.5 * g;
}

} // namespace klshell
