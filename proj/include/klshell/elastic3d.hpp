#pragma once

/**
 * @file elastic3d.hpp
 * @brief Reference 3D linear-elasticity solver in velocity-stress form on a
 *        structured cuboid grid.
 *
 * State ordering: v_1, v_2, v_3, sigma_11, sigma_12, sigma_13, sigma_22, sigma_23, sigma_33.
 * The plate occupies [0, extent_x] x [0, extent_y] x [-h/2, h/2].
 */

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gcm.hpp"
#include "material.hpp"
#include "scalar_field.hpp"
#include "spectral.hpp"

namespace klshell::elastic3d {

inline constexpr std::size_t kComponents = 9;
using ElasticState = State<kComponents>;
using ElasticField3D = gcm::StructuredField<kComponents, 3>;

enum Component : std::size_t {
    v_1 = 0,
    v_2 = 1,
    v_3 = 2,
    s_11 = 3,
    s_12 = 4,
    s_13 = 5,
    s_22 = 6,
    s_23 = 7,
    s_33 = 8,
};

inline constexpr std::array<std::string_view, kComponents> kComponentNames = {
    "v_1", "v_2", "v_3", "sigma_11", "sigma_12", "sigma_13", "sigma_22", "sigma_23", "sigma_33"};

inline std::optional<std::size_t> component_index(std::string_view name) {
    for (std::size_t i = 0; i < kComponents; ++i)
        if (kComponentNames[i] == name) return i;
    return std::nullopt;
}

/// Stress index for the symmetric pair (i, j), zero-based.
constexpr std::size_t stress_index(std::size_t i, std::size_t j) {
    if (i > j) std::swap(i, j);
    constexpr std::size_t table[3][3] = {{s_11, s_12, s_13}, {s_12, s_22, s_23}, {s_13, s_23, s_33}};
    return table[i][j];
}

struct SystemMatrix3D {
    std::array<SquareMatrix<kComponents>, 3> a;
};

/**
 * Directional matrices of rho dv_i/dt = d_j sigma_ij and
 * dsigma_ij/dt = lambda delta_ij div v + mu (d_j v_i + d_i v_j),
 * written as du/dt + A_x du/dx + A_y du/dy + A_z du/dz = 0.
 */
inline SystemMatrix3D build_matrices_3d(const Material& m) {
    const DerivedConstants c = derive_constants(m);
    SystemMatrix3D s;
    for (std::size_t k = 0; k < 3; ++k) {
        auto& a = s.a[k];
        for (std::size_t i = 0; i < 3; ++i) a(i, stress_index(i, k)) = -1.0 / m.rho;
        // sigma_ij rows: lambda delta_ij d_k v_k + mu (delta_jk d_k v_i + delta_ik d_k v_j)
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = i; j < 3; ++j) {
                const std::size_t row = stress_index(i, j);
                if (i == j) a(row, k) -= c.lambda;
                if (j == k) a(row, i) -= c.mu;
                if (i == k) a(row, j) -= c.mu;
            }
    }
    return s;
}

inline std::array<SpectralDecomposition<kComponents>, 3> decompose_3d(const SystemMatrix3D& s) {
    std::array<SpectralDecomposition<kComponents>, 3> d;
    for (std::size_t k = 0; k < 3; ++k) d[k] = decompose_velocity_stress<kComponents>(s.a[k], {v_1, v_2, v_3});
    return d;
}

struct Geometry {
    double extent_x = 10.0;
    double extent_y = 10.0;
    double thickness = 0.4;
    std::size_t nx = 101;
    std::size_t ny = 101;
    std::size_t nz = 5;
};

enum class FaceKind { free_surface, zero_gradient };

struct Numerics {
    int order = 5;
    double courant = 0.9;
    gcm::Limiter limiter = gcm::Limiter::none;
    unsigned threads = 1;
    FaceKind top_bottom = FaceKind::free_surface;
};

struct ZeroIC {};

/// Impulse at the node nearest (center, z); z = 0 is the mid-plane.
struct PointVelocity {
    std::size_t component = v_1;
    double magnitude = 0.0;
    std::array<double, 2> center{};
    double z = 0.0;
};

/// component = magnitude * 2z/h on the node column nearest `center`.
struct GradientColumn {
    std::size_t component = v_1;
    double magnitude = 0.0;
    std::array<double, 2> center{};
};

using InitialCondition = std::variant<ZeroIC, PointVelocity, GradientColumn>;

inline ElasticField3D make_field(const Geometry& g) {
    if (g.nx < 2) throw ValidationError("geometry.nx", "need at least 2 nodes");
    if (g.ny < 2) throw ValidationError("geometry.ny", "need at least 2 nodes");
    if (g.nz < 2) throw ValidationError("geometry.nz", "need at least 2 nodes through the thickness");
    if (!(g.extent_x > 0.0 && g.extent_y > 0.0)) throw ValidationError("geometry.extent", "must be positive");
    if (!(g.thickness > 0.0)) throw ValidationError("geometry.thickness", "must be positive");
    return ElasticField3D({g.nx, g.ny, g.nz},
                          {g.extent_x / static_cast<double>(g.nx - 1), g.extent_y / static_cast<double>(g.ny - 1),
                           g.thickness / static_cast<double>(g.nz - 1)},
                          {0.0, 0.0, -0.5 * g.thickness});
}

inline double thickness(const ElasticField3D& f) { return f.extent(2); }

inline std::size_t nearest(const ElasticField3D& f, std::size_t axis, double coord, const std::string& field) {
    const double s = (coord - f.origin[axis]) / f.spacing[axis];
    if (s < -1e-9 || s > static_cast<double>(f.n[axis] - 1) + 1e-9)
        throw ValidationError(field, "position lies outside the plate");
    return static_cast<std::size_t>(std::clamp(std::round(s), 0.0, static_cast<double>(f.n[axis] - 1)));
}

inline void apply_initial_condition(ElasticField3D& f, const InitialCondition& ic) {
    for (auto& s : f.data) s.fill(0.0);
    if (const auto* p = std::get_if<PointVelocity>(&ic)) {
        if (p->component >= kComponents) throw ValidationError("ic.component", "unknown component index");
        const std::size_t i = nearest(f, 0, p->center[0], "ic.center");
        const std::size_t j = nearest(f, 1, p->center[1], "ic.center");
        const std::size_t k = nearest(f, 2, p->z, "ic.z");
        f.at({i, j, k})[p->component] = p->magnitude;
    } else if (const auto* g = std::get_if<GradientColumn>(&ic)) {
        if (g->component >= kComponents) throw ValidationError("ic.component", "unknown component index");
        const std::size_t i = nearest(f, 0, g->center[0], "ic.center");
        const std::size_t j = nearest(f, 1, g->center[1], "ic.center");
        const std::size_t nz = f.n[2];
        for (std::size_t k = 0; k < nz; ++k) {
            // symmetric node positions so that layer pairs are exact negatives
            const double zeta = (2.0 * static_cast<double>(k) - static_cast<double>(nz - 1)) / static_cast<double>(nz - 1);
            f.at({i, j, k})[g->component] = g->magnitude * zeta;
        }
    }
}

inline ElasticField3D init_3d(const Geometry& g, const InitialCondition& ic) {
    ElasticField3D f = make_field(g);
    apply_initial_condition(f, ic);
    return f;
}

/// Mirror signs for a traction-free face normal to `axis`: tractions sigma_{i,axis} are odd.
inline ElasticState traction_mirror(std::size_t axis) {
    ElasticState s;
    s.fill(1.0);
    for (std::size_t i = 0; i < 3; ++i) s[stress_index(i, axis)] = -1.0;
    return s;
}

inline gcm::Stepper<kComponents, 3> make_stepper(const Material& m, FaceKind top_bottom) {
    using FC = gcm::FaceCondition<kComponents>;
    gcm::FaceSet<kComponents, 3> faces{};
    faces[0] = {FC::zero_gradient(), FC::zero_gradient()};
    faces[1] = {FC::zero_gradient(), FC::zero_gradient()};
    if (top_bottom == FaceKind::free_surface)
        faces[2] = {FC::free_surface(traction_mirror(2)), FC::free_surface(traction_mirror(2))};
    else
        faces[2] = {FC::zero_gradient(), FC::zero_gradient()};
    return gcm::Stepper<kComponents, 3>(decompose_3d(build_matrices_3d(m)), faces);
}

struct Quantity {
    std::string name;
    std::function<double(const ElasticState&)> eval;
};

inline Quantity quantity(const std::string& name) {
    if (name == "v_mag")
        return {name, [](const ElasticState& u) { return std::sqrt(u[v_1] * u[v_1] + u[v_2] * u[v_2] + u[v_3] * u[v_3]); }};
    if (auto idx = component_index(name)) {
        const std::size_t c = *idx;
        return {name, [c](const ElasticState& u) { return u[c]; }};
    }
    throw ValidationError("component", "unknown 3D quantity '" + name + "'");
}

enum class SliceKind { xz, yz, xy_mid, xy_top };

inline SliceKind slice_from_string(const std::string& s) {
    if (s == "xz") return SliceKind::xz;
    if (s == "yz") return SliceKind::yz;
    if (s == "xy_mid") return SliceKind::xy_mid;
    if (s == "xy_top") return SliceKind::xy_top;
    throw ValidationError("outputs.slices", "unknown slice '" + s + "' (expected xz, yz, xy_mid, xy_top)");
}

inline std::string to_string(SliceKind s) {
    switch (s) {
    case SliceKind::xz: return "xz";
    case SliceKind::yz: return "yz";
    case SliceKind::xy_mid: return "xy_mid";
    case SliceKind::xy_top: return "xy_top";
    }
    return "?";
}

/// XY layer k.
inline ScalarField2D slice_xy(const ElasticField3D& f, std::size_t k, const Quantity& q) {
    ScalarField2D s({f.n[0], f.n[1], f.spacing[0], f.spacing[1], {f.origin[0], f.origin[1]}}, q.name, f.time);
    for (std::size_t j = 0; j < f.n[1]; ++j)
        for (std::size_t i = 0; i < f.n[0]; ++i) s(i, j) = q.eval(f.at({i, j, k}));
    return s;
}

/// Mid-plane values; the average of the two central layers when nz is even.
inline ScalarField2D slice_mid(const ElasticField3D& f, const Quantity& q) {
    const std::size_t nz = f.n[2];
    if (nz % 2 == 1) return slice_xy(f, nz / 2, q);
    ScalarField2D a = slice_xy(f, nz / 2 - 1, q);
    const ScalarField2D b = slice_xy(f, nz / 2, q);
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] = 0.5 * (a.values[i] + b.values[i]);
    return a;
}

/// Plane y = y_j; the second coordinate of the result is z.
inline ScalarField2D slice_xz(const ElasticField3D& f, std::size_t j, const Quantity& q) {
    ScalarField2D s({f.n[0], f.n[2], f.spacing[0], f.spacing[2], {f.origin[0], f.origin[2]}}, q.name, f.time);
    for (std::size_t k = 0; k < f.n[2]; ++k)
        for (std::size_t i = 0; i < f.n[0]; ++i) s(i, k) = q.eval(f.at({i, j, k}));
    return s;
}

/// Plane x = x_i; coordinates of the result are (y, z).
inline ScalarField2D slice_yz(const ElasticField3D& f, std::size_t i, const Quantity& q) {
    ScalarField2D s({f.n[1], f.n[2], f.spacing[1], f.spacing[2], {f.origin[1], f.origin[2]}}, q.name, f.time);
    for (std::size_t k = 0; k < f.n[2]; ++k)
        for (std::size_t j = 0; j < f.n[1]; ++j) s(j, k) = q.eval(f.at({i, j, k}));
    return s;
}

struct SliceRequest {
    SliceKind kind = SliceKind::xy_mid;
    std::string component = "v_1";
};

struct Outputs {
    std::vector<double> snapshot_times;
    std::vector<SliceRequest> slices;
    std::array<double, 2> source{5.0, 5.0}; ///< XZ/YZ slices pass through this point
};

struct Snapshot {
    SliceKind kind;
    ScalarField2D field;
};

struct RunResult {
    ElasticField3D final_field;
    std::vector<Snapshot> snapshots;
    std::vector<ElasticField3D> states; ///< full fields at snapshot times, when requested
    std::size_t steps = 0;
    double tau = 0.0;
};

inline ScalarField2D make_slice(const ElasticField3D& f, const SliceRequest& r, std::array<double, 2> source) {
    const Quantity q = quantity(r.component);
    switch (r.kind) {
    case SliceKind::xz: return slice_xz(f, nearest(f, 1, source[1], "outputs.source"), q);
    case SliceKind::yz: return slice_yz(f, nearest(f, 0, source[0], "outputs.source"), q);
    case SliceKind::xy_mid: return slice_mid(f, q);
    case SliceKind::xy_top: return slice_xy(f, f.n[2] - 1, q);
    }
    throw InternalError("unhandled slice kind");
}

/**
 * Time loop with x/y/z splitting. Lateral faces are zero-gradient; top and bottom
 * faces are traction-free unless the numerics say otherwise.
 */
inline RunResult run_3d(ElasticField3D field, const Material& m, double t_end, const Outputs& out, const Numerics& num,
                        const std::function<void(const ElasticField3D&, std::size_t)>& observer = {},
                        bool keep_states = false) {
    validate(m);
    gcm::validate_order(num.order);
    for (const auto& r : out.slices) quantity(r.component);
    auto stepper = make_stepper(m, num.top_bottom);

    RunResult res;
    res.tau = gcm::compute_time_step({field.spacing[0], field.spacing[1], field.spacing[2]}, stepper.max_speed(), num.courant);

    std::vector<double> times = out.snapshot_times;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    for (double t : times)
        if (t < 0.0 || t > t_end * (1.0 + 1e-12))
            throw ValidationError("outputs.snapshot_times", "snapshot time " + std::to_string(t) + " outside [0, t_end]");

    gcm::LoopOptions lo;
    lo.t_end = t_end;
    lo.tau = res.tau;
    lo.order = num.order;
    lo.limiter = num.limiter;
    lo.threads = num.threads;
    lo.output_times = times;

    res.steps = gcm::run_until<kComponents, 3>(
        field, stepper, lo,
        [&](const ElasticField3D& f, std::size_t step) {
            if (observer) observer(f, step);
        },
        [&](const ElasticField3D& f, std::size_t) {
            for (const auto& r : out.slices) res.snapshots.push_back({r.kind, make_slice(f, r, out.source)});
            if (keep_states) res.states.push_back(f);
        });
    res.final_field = std::move(field);
    return res;
}

} // namespace klshell::elastic3d
