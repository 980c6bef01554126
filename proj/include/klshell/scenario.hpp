#pragma once

/**
 * @file scenario.hpp
 * @brief Declarative experiment description read from a TOML scenario file.
 *
 * Defaults: numerics.order = 5, numerics.courant = 0.9, numerics.limiter = "none",
 * numerics.shear_convention = "engineering", bc.lateral = "zero_gradient",
 * bc.faces = "free", geometry extents 10 m x 10 m, empty or missing [ic] = zero field.
 */

#include <array>
#include <fstream>
#include <sstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "elastic3d.hpp"
#include "errors.hpp"
#include "gcm.hpp"
#include "kl_system.hpp"
#include "material.hpp"
#include "toml_lite.hpp"

namespace klshell {

enum class SolverKind { shell, elastic3d, compare };

inline std::string to_string(SolverKind s) {
    switch (s) {
    case SolverKind::shell: return "shell";
    case SolverKind::elastic3d: return "elastic3d";
    case SolverKind::compare: return "compare";
    }
    return "?";
}

struct IcSpec {
    /// zero | point_velocity | through_thickness_gradient | plane_wave
    std::string kind = "zero";
    std::string component = "v_x";
    double magnitude = 0.0;
    std::array<double, 2> center{};
    bool center_given = false;
    double radius = 0.0;
    double z = 0.0;
    // plane_wave
    std::string direction = "x";
    int family = 0;
    std::string profile = "gaussian";
    double width = 1.0;
    double position = 0.0;
};

struct BcSpec {
    std::string lateral = "zero_gradient";
    std::string faces = "free"; ///< top/bottom of the 3D plate: free | zero_gradient
};

struct NumericsSpec {
    int order = 5;
    double courant = 0.9;
    std::string limiter = "none";
    std::string shear_convention = "engineering";
};

struct GeometrySpec {
    double extent_x = 10.0;
    double extent_y = 10.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    double thickness = 0.0; ///< 3D only; defaults to material.h
    std::size_t nz = 0;
};

struct SensorOut {
    std::string name;
    std::array<double, 2> offset{};
    std::array<double, 2> size{1.0, 1.0};
    std::string component = "v_x";
};

struct ProfileOut {
    std::string name;
    Axis axis = Axis::x;
    double band_width = 1.0;
    std::string component = "v_x";
};

struct SliceOut {
    std::string slice = "xy_mid";
    std::string component = "v_1";
};

struct OutputsSpec {
    std::vector<double> snapshot_times;
    std::vector<std::string> components;
    std::vector<SliceOut> slices;
    std::vector<std::string> moments;
    std::vector<SensorOut> sensors;
    std::vector<ProfileOut> profiles;
    bool heatmaps = false;
};

struct CompareSpec {
    std::vector<double> thicknesses;
    std::vector<std::size_t> nz;
    std::string component = "v_x";
};

struct Scenario {
    std::string name = "scenario";
    SolverKind solver = SolverKind::shell;
    double t_end = 0.0;
    Material material;
    GeometrySpec geometry;
    IcSpec ic;
    BcSpec bc;
    NumericsSpec numerics;
    OutputsSpec outputs;
    CompareSpec compare;
    std::string source_text; ///< raw file contents, hashed into the run manifest
};

namespace detail {

using nlohmann::json;

class Binder {
public:
    explicit Binder(const toml::Document& doc) : m_doc(doc) {}

    [[noreturn]] void fail(const std::string& path, const std::string& what) const {
        const int line = m_doc.line_of(path);
        throw ValidationError(path, (line > 0 ? "line " + std::to_string(line) + ": " : std::string{}) + what);
    }

    void allow_only(const json& table, const std::string& path, std::initializer_list<const char*> keys) const {
        const std::set<std::string> allowed(keys.begin(), keys.end());
        for (auto it = table.begin(); it != table.end(); ++it)
            if (!allowed.count(it.key())) {
                const std::string full = path.empty() ? it.key() : path + "." + it.key();
                const int line = m_doc.line_of(full);
                throw ParseError(line, "unknown key '" + full + "'");
            }
    }

    double number(const json& v, const std::string& path) const {
        if (!v.is_number()) fail(path, "expected a number");
        return v.get<double>();
    }

    std::size_t count(const json& v, const std::string& path) const {
        if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a non-negative integer");
        return static_cast<std::size_t>(v.get<long long>());
    }

    std::string string(const json& v, const std::string& path) const {
        if (!v.is_string()) fail(path, "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const json& v, const std::string& path) const {
        if (!v.is_boolean()) fail(path, "expected true or false");
        return v.get<bool>();
    }

    std::array<double, 2> pair(const json& v, const std::string& path) const {
        if (!v.is_array() || v.size() != 2) fail(path, "expected an array of two numbers");
        return {number(v[0], path + "[0]"), number(v[1], path + "[1]")};
    }

    std::vector<double> numbers(const json& v, const std::string& path) const {
        if (!v.is_array()) fail(path, "expected an array of numbers");
        std::vector<double> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    std::vector<std::string> strings(const json& v, const std::string& path) const {
        if (!v.is_array()) fail(path, "expected an array of strings");
        std::vector<std::string> out;
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(string(v[i], path + "[" + std::to_string(i) + "]"));
        return out;
    }

    const json& table(const json& parent, const char* key, const std::string& path) const {
        static const json empty = json::object();
        if (!parent.contains(key)) return empty;
        const json& t = parent.at(key);
        if (!t.is_object()) fail(path, "expected a table");
        return t;
    }

    const json& require(const json& t, const char* key, const std::string& path) const {
        if (!t.contains(key)) {
            const auto dot = path.rfind('.');
            const std::string parent = dot == std::string::npos ? std::string{} : path.substr(0, dot);
            const int line = m_doc.line_of(parent);
            throw ValidationError(path, (line > 0 ? "table at line " + std::to_string(line) + ": " : std::string{}) +
                                            "missing required key");
        }
        return t.at(key);
    }

    int line_of(const std::string& path) const { return m_doc.line_of(path); }

private:
    const toml::Document& m_doc;
};

inline Axis axis_from_string(const std::string& s, const std::string& path) {
    if (s == "x") return Axis::x;
    if (s == "y") return Axis::y;
    throw ValidationError(path, "expected 'x' or 'y', got '" + s + "'");
}

inline bool valid_shell_quantity(const std::string& n) {
    return n == "v_mag" || n == "w_mag" || shell::component_index(n).has_value();
}

inline bool valid_3d_quantity(const std::string& n) { return n == "v_mag" || elastic3d::component_index(n).has_value(); }

} // namespace detail

/// Checks cross-field invariants; throws ValidationError naming the field.
inline void validate(const Scenario& s) {
    validate(s.material);
    if (!(s.t_end > 0.0)) throw ValidationError("t_end", "must be positive");
    gcm::validate_order(s.numerics.order);
    if (!(s.numerics.courant > 0.0 && s.numerics.courant <= 1.0))
        throw ValidationError("numerics.courant", "must lie in (0, 1]");
    gcm::limiter_from_string(s.numerics.limiter);
    shear_convention_from_string(s.numerics.shear_convention);
    if (s.bc.lateral != "zero_gradient") throw ValidationError("bc.lateral", "only 'zero_gradient' is supported");
    if (s.bc.faces != "free" && s.bc.faces != "zero_gradient")
        throw ValidationError("bc.faces", "expected 'free' or 'zero_gradient'");
    if (s.geometry.nx < 2) throw ValidationError("geometry.nx", "need at least 2 nodes");
    if (s.geometry.ny < 2) throw ValidationError("geometry.ny", "need at least 2 nodes");
    if (!(s.geometry.extent_x > 0.0)) throw ValidationError("geometry.extent_x", "must be positive");
    if (!(s.geometry.extent_y > 0.0)) throw ValidationError("geometry.extent_y", "must be positive");
    for (double t : s.outputs.snapshot_times)
        if (t < 0.0 || t > s.t_end * (1.0 + 1e-12))
            throw ValidationError("outputs.snapshot_times", "time " + std::to_string(t) + " is outside [0, t_end]");

    const bool uses_shell = s.solver != SolverKind::elastic3d;
    const bool uses_3d = s.solver != SolverKind::shell;
    if (uses_3d && s.solver == SolverKind::elastic3d) {
        if (s.geometry.nz < 2) throw ValidationError("geometry.nz", "need at least 2 nodes through the thickness");
        if (!(s.geometry.thickness > 0.0)) throw ValidationError("geometry.thickness", "must be positive");
    }
    for (const auto& c : s.outputs.components)
        if (!(uses_shell ? detail::valid_shell_quantity(c) : detail::valid_3d_quantity(c)))
            throw ValidationError("outputs.components", "unknown component '" + c + "' for solver " + to_string(s.solver));
    for (const auto& sl : s.outputs.slices) {
        elastic3d::slice_from_string(sl.slice);
        if (!detail::valid_3d_quantity(sl.component))
            throw ValidationError("outputs.slices", "unknown 3D component '" + sl.component + "'");
    }
    for (const auto& m : s.outputs.moments)
        if (m != "xx" && m != "yy" && m != "xy") throw ValidationError("outputs.moments", "expected xx, yy or xy");
    auto check_quantity = [&](const std::string& c, const std::string& field) {
        const bool ok = s.solver == SolverKind::elastic3d ? detail::valid_3d_quantity(c) : detail::valid_shell_quantity(c);
        if (!ok) throw ValidationError(field, "unknown component '" + c + "'");
    };
    for (const auto& se : s.outputs.sensors) check_quantity(se.component, "outputs.sensors." + se.name + ".component");
    for (const auto& p : s.outputs.profiles) {
        check_quantity(p.component, "outputs.profiles." + p.name + ".component");
        if (!(p.band_width >= 0.0)) throw ValidationError("outputs.profiles." + p.name + ".band_width", "must be >= 0");
    }

    const auto& ic = s.ic;
    static const std::set<std::string> kinds = {"zero", "point_velocity", "through_thickness_gradient", "plane_wave"};
    if (!kinds.count(ic.kind)) throw ValidationError("ic.kind", "unknown initial condition '" + ic.kind + "'");
    if (ic.kind != "zero") {
        if (ic.kind == "plane_wave") {
            if (s.solver != SolverKind::shell) throw ValidationError("ic.kind", "plane_wave is only available for the shell solver");
            detail::axis_from_string(ic.direction, "ic.direction");
            if (ic.family < 0 || ic.family >= static_cast<int>(shell::kComponents))
                throw ValidationError("ic.family", "eigen-family index must be in [0, 9]");
            if (ic.profile != "gaussian" && ic.profile != "sine") throw ValidationError("ic.profile", "expected gaussian or sine");
            if (!(ic.width > 0.0)) throw ValidationError("ic.width", "must be positive");
        } else {
            const bool in_x = ic.center[0] >= 0.0 && ic.center[0] <= s.geometry.extent_x;
            const bool in_y = ic.center[1] >= 0.0 && ic.center[1] <= s.geometry.extent_y;
            if (!in_x || !in_y) throw ValidationError("ic.center", "lies outside the plate");
            if (!(ic.radius >= 0.0)) throw ValidationError("ic.radius", "must be non-negative");
            const bool ok = s.solver == SolverKind::elastic3d ? elastic3d::component_index(ic.component).has_value()
                                                              : shell::component_index(ic.component).has_value();
            if (!ok) throw ValidationError("ic.component", "unknown component '" + ic.component + "'");
            if (s.solver == SolverKind::compare && ic.component != "v_x" && ic.component != "v_y")
                throw ValidationError("ic.component", "compare runs accept v_x or v_y sources");
            if (ic.kind == "through_thickness_gradient" && s.solver == SolverKind::shell &&
                ic.component != "v_x" && ic.component != "v_y")
                throw ValidationError("ic.component", "a through-thickness gradient needs v_x or v_y");
        }
    }

    if (s.solver == SolverKind::compare) {
        if (s.compare.thicknesses.empty()) throw ValidationError("compare.thicknesses", "at least one thickness is required");
        if (s.compare.nz.size() != s.compare.thicknesses.size())
            throw ValidationError("compare.nz", "needs one node count per thickness");
        for (double h : s.compare.thicknesses)
            if (!(h > 0.0)) throw ValidationError("compare.thicknesses", "thickness must be positive");
        for (std::size_t n : s.compare.nz)
            if (n < 2) throw ValidationError("compare.nz", "need at least 2 nodes through the thickness");
        static const std::set<std::string> cmp = {"v_x", "v_y", "M_x", "M_y", "M_xy"};
        if (!cmp.count(s.compare.component))
            throw ValidationError("compare.component", "expected one of v_x, v_y, M_x, M_y, M_xy");
    }
}

inline Scenario scenario_from_document(const toml::Document& doc, std::string source_text = {}) {
    using detail::Binder;
    const Binder b(doc);
    const auto& root = doc.root;
    b.allow_only(root, "", {"name", "solver", "t_end", "material", "geometry", "ic", "bc", "numerics", "outputs", "compare"});

    Scenario s;
    s.source_text = std::move(source_text);
    if (root.contains("name")) s.name = b.string(root["name"], "name");
    const std::string solver = b.string(b.require(root, "solver", "solver"), "solver");
    if (solver == "shell") s.solver = SolverKind::shell;
    else if (solver == "elastic3d") s.solver = SolverKind::elastic3d;
    else if (solver == "compare") s.solver = SolverKind::compare;
    else b.fail("solver", "expected shell, elastic3d or compare, got '" + solver + "'");
    s.t_end = b.number(b.require(root, "t_end", "t_end"), "t_end");

    const auto& mat = b.table(root, "material", "material");
    b.allow_only(mat, "material", {"E", "nu", "rho", "h"});
    s.material.E = b.number(b.require(mat, "E", "material.E"), "material.E");
    s.material.nu = b.number(b.require(mat, "nu", "material.nu"), "material.nu");
    s.material.rho = b.number(b.require(mat, "rho", "material.rho"), "material.rho");
    s.material.h = b.number(b.require(mat, "h", "material.h"), "material.h");
    try {
        validate(s.material);
    } catch (const ValidationError& e) {
        b.fail(e.field(), e.message());
    }

    const auto& geo = b.table(root, "geometry", "geometry");
    b.allow_only(geo, "geometry", {"extent_x", "extent_y", "nx", "ny", "thickness", "nz"});
    if (geo.contains("extent_x")) s.geometry.extent_x = b.number(geo["extent_x"], "geometry.extent_x");
    if (geo.contains("extent_y")) s.geometry.extent_y = b.number(geo["extent_y"], "geometry.extent_y");
    s.geometry.nx = b.count(b.require(geo, "nx", "geometry.nx"), "geometry.nx");
    s.geometry.ny = b.count(b.require(geo, "ny", "geometry.ny"), "geometry.ny");
    s.geometry.thickness = geo.contains("thickness") ? b.number(geo["thickness"], "geometry.thickness") : s.material.h;
    if (geo.contains("nz")) s.geometry.nz = b.count(geo["nz"], "geometry.nz");
    else if (s.solver == SolverKind::elastic3d) b.require(geo, "nz", "geometry.nz");

    const auto& ic = b.table(root, "ic", "ic");
    b.allow_only(ic, "ic", {"kind", "component", "magnitude", "center", "radius", "z", "direction", "family", "profile",
                            "width", "position"});
    if (!ic.empty()) {
        s.ic.kind = ic.contains("kind") ? b.string(ic["kind"], "ic.kind") : std::string("point_velocity");
        if (ic.contains("component")) s.ic.component = b.string(ic["component"], "ic.component");
        else if (s.solver == SolverKind::elastic3d) s.ic.component = "v_1";
        if (ic.contains("magnitude")) s.ic.magnitude = b.number(ic["magnitude"], "ic.magnitude");
        if (ic.contains("center")) {
            s.ic.center = b.pair(ic["center"], "ic.center");
            s.ic.center_given = true;
        }
        if (ic.contains("radius")) s.ic.radius = b.number(ic["radius"], "ic.radius");
        if (ic.contains("z")) s.ic.z = b.number(ic["z"], "ic.z");
        if (ic.contains("direction")) s.ic.direction = b.string(ic["direction"], "ic.direction");
        if (ic.contains("family")) s.ic.family = static_cast<int>(b.count(ic["family"], "ic.family"));
        if (ic.contains("profile")) s.ic.profile = b.string(ic["profile"], "ic.profile");
        if (ic.contains("width")) s.ic.width = b.number(ic["width"], "ic.width");
        if (ic.contains("position")) s.ic.position = b.number(ic["position"], "ic.position");
    }
    if (!s.ic.center_given) s.ic.center = {0.5 * s.geometry.extent_x, 0.5 * s.geometry.extent_y};

    const auto& bc = b.table(root, "bc", "bc");
    b.allow_only(bc, "bc", {"lateral", "faces"});
    if (bc.contains("lateral")) s.bc.lateral = b.string(bc["lateral"], "bc.lateral");
    if (bc.contains("faces")) s.bc.faces = b.string(bc["faces"], "bc.faces");

    const auto& num = b.table(root, "numerics", "numerics");
    b.allow_only(num, "numerics", {"order", "courant", "limiter", "shear_convention"});
    if (num.contains("order")) s.numerics.order = static_cast<int>(b.count(num["order"], "numerics.order"));
    if (num.contains("courant")) s.numerics.courant = b.number(num["courant"], "numerics.courant");
    if (num.contains("limiter")) s.numerics.limiter = b.string(num["limiter"], "numerics.limiter");
    if (num.contains("shear_convention"))
        s.numerics.shear_convention = b.string(num["shear_convention"], "numerics.shear_convention");

    const auto& out = b.table(root, "outputs", "outputs");
    b.allow_only(out, "outputs", {"snapshot_times", "components", "slices", "moments", "sensors", "profiles", "heatmaps"});
    if (out.contains("snapshot_times")) s.outputs.snapshot_times = b.numbers(out["snapshot_times"], "outputs.snapshot_times");
    if (out.contains("components")) s.outputs.components = b.strings(out["components"], "outputs.components");
    if (out.contains("moments")) s.outputs.moments = b.strings(out["moments"], "outputs.moments");
    if (out.contains("heatmaps")) s.outputs.heatmaps = b.boolean(out["heatmaps"], "outputs.heatmaps");
    auto each = [&](const char* key, auto&& fn) {
        if (!out.contains(key)) return;
        const std::string base = std::string("outputs.") + key;
        if (!out[key].is_array()) b.fail(base, "expected an array of tables");
        for (std::size_t i = 0; i < out[key].size(); ++i) {
            const std::string path = base + "[" + std::to_string(i) + "]";
            if (!out[key][i].is_object()) b.fail(path, "expected a table");
            fn(out[key][i], path, i);
        }
    };
    each("slices", [&](const nlohmann::json& t, const std::string& p, std::size_t) {
        b.allow_only(t, p, {"slice", "component"});
        SliceOut so;
        so.slice = b.string(b.require(t, "slice", p + ".slice"), p + ".slice");
        so.component = b.string(b.require(t, "component", p + ".component"), p + ".component");
        s.outputs.slices.push_back(so);
    });
    each("sensors", [&](const nlohmann::json& t, const std::string& p, std::size_t i) {
        b.allow_only(t, p, {"name", "offset", "size", "component"});
        SensorOut so;
        so.name = t.contains("name") ? b.string(t["name"], p + ".name") : "sensor" + std::to_string(i);
        if (t.contains("offset")) so.offset = b.pair(t["offset"], p + ".offset");
        if (t.contains("size")) so.size = b.pair(t["size"], p + ".size");
        if (t.contains("component")) so.component = b.string(t["component"], p + ".component");
        s.outputs.sensors.push_back(so);
    });
    each("profiles", [&](const nlohmann::json& t, const std::string& p, std::size_t i) {
        b.allow_only(t, p, {"name", "axis", "band_width", "component"});
        ProfileOut po;
        po.name = t.contains("name") ? b.string(t["name"], p + ".name") : "profile" + std::to_string(i);
        if (t.contains("axis")) po.axis = detail::axis_from_string(b.string(t["axis"], p + ".axis"), p + ".axis");
        if (t.contains("band_width")) po.band_width = b.number(t["band_width"], p + ".band_width");
        if (t.contains("component")) po.component = b.string(t["component"], p + ".component");
        s.outputs.profiles.push_back(po);
    });

    const auto& cmp = b.table(root, "compare", "compare");
    b.allow_only(cmp, "compare", {"thicknesses", "nz", "component"});
    if (cmp.contains("thicknesses")) s.compare.thicknesses = b.numbers(cmp["thicknesses"], "compare.thicknesses");
    if (cmp.contains("nz")) {
        const auto& arr = cmp["nz"];
        if (!arr.is_array()) b.fail("compare.nz", "expected an array of integers");
        for (std::size_t i = 0; i < arr.size(); ++i)
            s.compare.nz.push_back(b.count(arr[i], "compare.nz[" + std::to_string(i) + "]"));
    }
    if (cmp.contains("component")) s.compare.component = b.string(cmp["component"], "compare.component");

    try {
        validate(s);
    } catch (const ValidationError& e) {
        const int line = b.line_of(e.field());
        if (line > 0) throw ValidationError(e.field(), "line " + std::to_string(line) + ": " + (e.message()));
        throw;
    }
    return s;
}

inline Scenario parse_scenario_text(const std::string& text) { return scenario_from_document(toml::parse_string(text), text); }

inline Scenario parse_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open scenario file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Scenario s = parse_scenario_text(ss.str());
    return s;
}

} // namespace klshell
