#pragma once

/**
 * @file shell_solver.hpp
 * @brief Kirchhoff-Love plate solver: field, initial conditions, sensors and the time loop.
 */

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "gcm.hpp"
#include "kl_system.hpp"
#include "scalar_field.hpp"

namespace klshell::shell {

using ShellField = gcm::StructuredField<kComponents, 2>;

struct Geometry {
    double extent_x = 10.0;
    double extent_y = 10.0;
    std::size_t nx = 201;
    std::size_t ny = 201;
};

struct Numerics {
    int order = 5;
    double courant = 0.9;
    gcm::Limiter limiter = gcm::Limiter::none;
    ShearConvention shear = ShearConvention::engineering;
    unsigned threads = 1;
    bool start_reversed = false; ///< begin with a y sweep instead of x
};

struct ZeroIC {};

/// Top-hat impulse; radius 0 sets the single node nearest `center`.
struct PointVelocity {
    std::size_t component = v_x;
    double magnitude = 0.0;
    std::array<double, 2> center{};
    double radius = 0.0;
};

enum class WaveProfile { gaussian, sine };

/// Profile times the right eigenvector `family` (index into the sorted eigenpairs of `direction`).
struct PlaneWave {
    Axis direction = Axis::x;
    std::size_t family = 0;
    WaveProfile profile = WaveProfile::gaussian;
    double center = 0.0;
    double width = 1.0; ///< gaussian half-width or sine wavelength [m]
    double amplitude = 1.0;
};

using InitialCondition = std::variant<ZeroIC, PointVelocity, PlaneWave>;

inline ShellField make_field(const Geometry& g) {
    if (g.nx < 2) throw ValidationError("geometry.nx", "need at least 2 nodes");
    if (g.ny < 2) throw ValidationError("geometry.ny", "need at least 2 nodes");
    if (!(g.extent_x > 0.0)) throw ValidationError("geometry.extent_x", "must be positive");
    if (!(g.extent_y > 0.0)) throw ValidationError("geometry.extent_y", "must be positive");
    return ShellField({g.nx, g.ny}, {g.extent_x / static_cast<double>(g.nx - 1), g.extent_y / static_cast<double>(g.ny - 1)});
}

inline GridGeometry2D geometry_of(const ShellField& f) {
    return {f.n[0], f.n[1], f.spacing[0], f.spacing[1], {f.origin[0], f.origin[1]}};
}

inline std::size_t nearest_node(double coord, double origin, double spacing, std::size_t n) {
    const double s = std::round((coord - origin) / spacing);
    return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(n - 1)));
}

inline bool inside(const ShellField& f, std::array<double, 2> p) {
    const double tol = 1e-9 * std::max(f.extent(0), f.extent(1));
    return p[0] >= f.origin[0] - tol && p[0] <= f.origin[0] + f.extent(0) + tol && p[1] >= f.origin[1] - tol &&
           p[1] <= f.origin[1] + f.extent(1) + tol;
}

inline std::array<SpectralDecomposition<kComponents>, 2> decompositions(const Material& m, ShearConvention conv) {
    return {decompose(build_matrix(m, Axis::x, conv), m), decompose(build_matrix(m, Axis::y, conv), m)};
}

inline void apply_initial_condition(ShellField& f, const InitialCondition& ic, const Material& m, ShearConvention conv) {
    for (auto& s : f.data) s.fill(0.0);
    if (const auto* p = std::get_if<PointVelocity>(&ic)) {
        if (p->component >= kComponents) throw ValidationError("ic.component", "unknown component index");
        if (!inside(f, p->center)) throw ValidationError("ic.center", "point source lies outside the plate");
        if (!(p->radius >= 0.0)) throw ValidationError("ic.radius", "must be non-negative");
        if (p->radius == 0.0) {
            const std::size_t i = nearest_node(p->center[0], f.origin[0], f.spacing[0], f.n[0]);
            const std::size_t j = nearest_node(p->center[1], f.origin[1], f.spacing[1], f.n[1]);
            f.at({i, j})[p->component] = p->magnitude;
            return;
        }
        const double r2 = p->radius * p->radius * (1.0 + 1e-12);
        for (std::size_t j = 0; j < f.n[1]; ++j)
            for (std::size_t i = 0; i < f.n[0]; ++i) {
                const double dx = f.coord(0, i) - p->center[0];
                const double dy = f.coord(1, j) - p->center[1];
                if (dx * dx + dy * dy <= r2) f.at({i, j})[p->component] = p->magnitude;
            }
    } else if (const auto* w = std::get_if<PlaneWave>(&ic)) {
        if (w->direction == Axis::z) throw ValidationError("ic.direction", "plane waves travel along x or y");
        if (w->family >= kComponents) throw ValidationError("ic.family", "eigen-family index must be < 10");
        if (!(w->width > 0.0)) throw ValidationError("ic.width", "must be positive");
        const auto d = decompose(build_matrix(m, w->direction, conv), m);
        const ShellState r = d.right_vector(w->family);
        const std::size_t axis = static_cast<std::size_t>(w->direction);
        for (std::size_t j = 0; j < f.n[1]; ++j)
            for (std::size_t i = 0; i < f.n[0]; ++i) {
                const double s = f.coord(axis, axis == 0 ? i : j) - w->center;
                const double shape = w->profile == WaveProfile::gaussian
                                         ? std::exp(-(s * s) / (w->width * w->width))
                                         : std::sin(2.0 * std::numbers::pi * s / w->width);
                auto& u = f.at({i, j});
                for (std::size_t c = 0; c < kComponents; ++c) u[c] = w->amplitude * shape * r[c];
            }
    }
}

inline ShellField init(const Geometry& g, const InitialCondition& ic, const Material& m,
                       ShearConvention conv = ShearConvention::engineering) {
    validate(m);
    ShellField f = make_field(g);
    apply_initial_condition(f, ic, m, conv);
    return f;
}

/// Scalar derived from the state: a raw component or the in-plane speed sqrt(v_x^2 + v_y^2).
struct Quantity {
    std::string name;
    std::function<double(const ShellState&)> eval;
};

inline Quantity quantity(const std::string& name) {
    if (name == "v_mag") return {name, [](const ShellState& u) { return std::hypot(u[v_x], u[v_y]); }};
    if (name == "w_mag") return {name, [](const ShellState& u) { return std::hypot(u[w_x], u[w_y]); }};
    if (auto idx = component_index(name)) {
        const std::size_t c = *idx;
        return {name, [c](const ShellState& u) { return u[c]; }};
    }
    throw ValidationError("component", "unknown shell quantity '" + name + "'");
}

inline ScalarField2D snapshot(const ShellField& f, const Quantity& q) {
    ScalarField2D s(geometry_of(f), q.name, f.time);
    for (std::size_t idx = 0; idx < f.size(); ++idx) s.values[idx] = q.eval(f.data[idx]);
    return s;
}

/// Rectangle placed relative to the plate centre, averaged every step.
struct SensorSpec {
    std::string name;
    std::array<double, 2> offset{}; ///< from the plate centre [m]
    std::array<double, 2> size{1.0, 1.0};
    std::string component = "v_x";
};

struct SensorTrace {
    std::string name;
    std::vector<double> t;
    std::vector<double> value;
};

/// Arithmetic mean of the quantity over the grid nodes inside an axis-aligned rectangle.
inline double rectangle_mean(const GridGeometry2D& g, const std::function<double(std::size_t, std::size_t)>& value,
                             std::array<double, 2> center, std::array<double, 2> size, const std::string& name) {
    const double x0 = center[0] - 0.5 * size[0], x1 = center[0] + 0.5 * size[0];
    const double y0 = center[1] - 0.5 * size[1], y1 = center[1] + 0.5 * size[1];
    const double tol = 1e-9 * std::max(g.dx, g.dy);
    if (!(size[0] >= 0.0 && size[1] >= 0.0)) throw ValidationError("sensor " + name, "negative size");
    if (x0 < g.origin[0] - tol || x1 > g.x_max() + tol || y0 < g.origin[1] - tol || y1 > g.y_max() + tol)
        throw ValidationError("sensor " + name, "rectangle extends outside the domain");
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < g.ny; ++j) {
        const double y = g.y(j);
        if (y < y0 - tol || y > y1 + tol) continue;
        for (std::size_t i = 0; i < g.nx; ++i) {
            const double x = g.x(i);
            if (x < x0 - tol || x > x1 + tol) continue;
            sum += value(i, j);
            ++count;
        }
    }
    if (count == 0) throw ValidationError("sensor " + name, "rectangle contains no grid nodes");
    return sum / static_cast<double>(count);
}

inline std::array<double, 2> plate_center(const GridGeometry2D& g) {
    return {g.origin[0] + 0.5 * (g.x_max() - g.origin[0]), g.origin[1] + 0.5 * (g.y_max() - g.origin[1])};
}

inline double record_sensor(const ShellField& f, const SensorSpec& spec) {
    const auto q = quantity(spec.component);
    const auto g = geometry_of(f);
    const auto c = plate_center(g);
    return rectangle_mean(g, [&](std::size_t i, std::size_t j) { return q.eval(f.at({i, j})); },
                          {c[0] + spec.offset[0], c[1] + spec.offset[1]}, spec.size, spec.name);
}

struct Outputs {
    std::vector<double> snapshot_times;
    std::vector<std::string> components;
    std::vector<SensorSpec> sensors;
};

struct RunResult {
    ShellField final_field;
    std::vector<ScalarField2D> snapshots; ///< ordered by time, then by component
    std::vector<SensorTrace> traces;
    std::size_t steps = 0;
    double tau = 0.0;
};

inline gcm::Stepper<kComponents, 2> make_stepper(const Material& m, ShearConvention conv) {
    using FC = gcm::FaceCondition<kComponents>;
    gcm::FaceSet<kComponents, 2> faces{};
    for (auto& axis : faces) axis = {FC::zero_gradient(), FC::zero_gradient()};
    return gcm::Stepper<kComponents, 2>(decompositions(m, conv), faces);
}

inline std::vector<double> sorted_times(std::vector<double> times, double t_end) {
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    for (double t : times)
        if (t < 0.0 || t > t_end * (1.0 + 1e-12))
            throw ValidationError("outputs.snapshot_times", "snapshot time " + std::to_string(t) + " outside [0, t_end]");
    return times;
}

/**
 * Time loop. Zero-gradient conditions on all four edges; the observer (if any)
 * sees the field after initialisation and after every step.
 */
inline RunResult run(ShellField field, const Material& m, double t_end, const Outputs& out, const Numerics& num,
                     const std::function<void(const ShellField&, std::size_t)>& observer = {}) {
    validate(m);
    gcm::validate_order(num.order);
    auto stepper = make_stepper(m, num.shear);

    RunResult res;
    res.tau = gcm::compute_time_step({field.spacing[0], field.spacing[1]}, stepper.max_speed(), num.courant);

    std::vector<Quantity> quantities;
    for (const auto& c : out.components) quantities.push_back(quantity(c));
    for (const auto& s : out.sensors) {
        quantity(s.component);
        res.traces.push_back({s.name, {}, {}});
    }

    gcm::LoopOptions lo;
    lo.t_end = t_end;
    lo.tau = res.tau;
    lo.order = num.order;
    lo.limiter = num.limiter;
    lo.threads = num.threads;
    lo.start_reversed = num.start_reversed;
    lo.output_times = sorted_times(out.snapshot_times, t_end);

    res.steps = gcm::run_until<kComponents, 2>(
        field, stepper, lo,
        [&](const ShellField& f, std::size_t step) {
            for (std::size_t k = 0; k < out.sensors.size(); ++k) {
                res.traces[k].t.push_back(f.time);
                res.traces[k].value.push_back(record_sensor(f, out.sensors[k]));
            }
            if (observer) observer(f, step);
        },
        [&](const ShellField& f, std::size_t) {
            for (const auto& q : quantities) res.snapshots.push_back(snapshot(f, q));
        });
    res.final_field = std::move(field);
    return res;
}

/**
 * Discrete quadratic energy: kinetic and rotational terms plus the
 * complementary strain energy of membrane stresses and moments, times cell area.
 */
inline double energy(const ShellField& f, const Material& m, ShearConvention conv = ShearConvention::engineering) {
    const DerivedConstants c = derive_constants(m);
    const double shear = shear_rate_coefficient(m, conv);
    const double twist = 0.5 * c.D * (1.0 - m.nu);
    const double bend = c.D * (1.0 - m.nu * m.nu); // plays the role of E for moments
    double total = 0.0;
    for (const auto& u : f.data) {
        double e = 0.5 * m.rho * (u[v_x] * u[v_x] + u[v_y] * u[v_y]);
        e += 0.5 * c.I * (u[w_x] * u[w_x] + u[w_y] * u[w_y]);
        e += (u[sigma_x] * u[sigma_x] + u[sigma_y] * u[sigma_y] - 2.0 * m.nu * u[sigma_x] * u[sigma_y]) / (2.0 * m.E);
        e += u[sigma_xy] * u[sigma_xy] / (2.0 * shear);
        e += (u[M_x] * u[M_x] + u[M_y] * u[M_y] - 2.0 * m.nu * u[M_x] * u[M_y]) / (2.0 * bend);
        e += u[M_xy] * u[M_xy] / (2.0 * twist);
        total += e;
    }
    return total * f.spacing[0] * f.spacing[1];
}

} // namespace klshell::shell
