#pragma once

/**
 * @file runner.hpp
 * @brief Executes a Scenario and writes its artifacts plus a JSON run manifest.
 *
 * File naming inside the output directory (k is the snapshot index):
 *   shell:     `<component>_t<k>.csv`, `sensor_<name>.csv`, `profile_<name>_t<k>.csv`
 *   elastic3d: `<slice>_<component>_t<k>.csv`, `M_<xx|yy|xy>_t<k>.csv`, sensors and
 *              profiles taken on the mid-plane
 *   compare:   `h<i>_shell_<component>_t<k>.csv`, `h<i>_e3d_<component>_t<k>.csv`,
 *              `nrmse_h<i>.csv` (t,value) and `nrmse_summary.csv`
 * Heatmaps add `<csv stem>.pgm` and `<csv stem>.pgm.txt` next to each snapshot.
 */

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "elastic3d.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "postprocess.hpp"
#include "scenario.hpp"
#include "shell_solver.hpp"

namespace klshell {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
    std::string out_dir = "out";
    unsigned threads = 1;
    std::optional<int> order;      ///< overrides numerics.order
    std::optional<double> courant; ///< overrides numerics.courant
};

struct RunManifest {
    std::string scenario_name;
    std::string scenario_hash; ///< FNV-1a 64-bit of the scenario text, hex
    std::string code_version = kVersion;
    double wall_clock_seconds = 0.0;
    std::vector<std::string> files; ///< relative to the output directory, includes manifest.json
    std::string status = "complete"; ///< complete | partial
    std::string error;
    std::size_t steps = 0;
    double tau = 0.0;

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["scenario"] = scenario_name;
        j["scenario_hash"] = scenario_hash;
        j["code_version"] = code_version;
        j["wall_clock_seconds"] = wall_clock_seconds;
        j["status"] = status;
        if (!error.empty()) j["error"] = error;
        j["steps"] = steps;
        j["tau"] = tau;
        j["files"] = files;
        return j;
    }
};

inline std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

class ArtifactWriter {
public:
    ArtifactWriter(std::filesystem::path dir, bool heatmaps) : m_dir(std::move(dir)), m_heatmaps(heatmaps) {}

    void snapshot(const std::string& stem, const ScalarField2D& f) {
        io::write_snapshot(path(stem + ".csv"), f);
        if (m_heatmaps) {
            io::write_heatmap(path(stem + ".pgm"), f);
            m_files.push_back(stem + ".pgm.txt");
        }
    }

    void series(const std::string& stem, const std::string& header, const std::vector<double>& a, const std::vector<double>& b) {
        io::write_series(path(stem + ".csv"), header, a, b);
    }

    std::string path(const std::string& name) {
        m_files.push_back(name);
        return (m_dir / name).string();
    }

    std::vector<std::string>& files() { return m_files; }

private:
    std::filesystem::path m_dir;
    bool m_heatmaps;
    std::vector<std::string> m_files;
};

inline std::string index_tag(std::size_t k) { return "_t" + std::to_string(k); }

inline shell::InitialCondition shell_ic(const Scenario& s, double h) {
    const IcSpec& ic = s.ic;
    if (ic.kind == "zero") return shell::ZeroIC{};
    if (ic.kind == "plane_wave") {
        shell::PlaneWave w;
        w.direction = ic.direction == "y" ? Axis::y : Axis::x;
        w.family = static_cast<std::size_t>(ic.family);
        w.profile = ic.profile == "sine" ? shell::WaveProfile::sine : shell::WaveProfile::gaussian;
        w.center = ic.position;
        w.width = ic.width;
        w.amplitude = ic.magnitude;
        return w;
    }
    shell::PointVelocity p;
    p.center = ic.center;
    p.radius = ic.radius;
    p.magnitude = ic.magnitude;
    p.component = *shell::component_index(ic.component);
    if (ic.kind == "through_thickness_gradient") {
        // v(z) = magnitude * 2z/h is a rotation rate of 2*magnitude/h in the plate model
        p.component = ic.component == "v_y" ? shell::w_y : shell::w_x;
        p.magnitude = 2.0 * ic.magnitude / h;
    }
    return p;
}

inline std::size_t component_3d(const std::string& name) {
    if (name == "v_x") return elastic3d::v_1;
    if (name == "v_y") return elastic3d::v_2;
    return *elastic3d::component_index(name);
}

inline elastic3d::InitialCondition elastic_ic(const Scenario& s) {
    const IcSpec& ic = s.ic;
    if (ic.kind == "zero") return elastic3d::ZeroIC{};
    if (ic.kind == "through_thickness_gradient")
        return elastic3d::GradientColumn{component_3d(ic.component), ic.magnitude, ic.center};
    return elastic3d::PointVelocity{component_3d(ic.component), ic.magnitude, ic.center, ic.z};
}

inline shell::Numerics shell_numerics(const Scenario& s, unsigned threads) {
    shell::Numerics n;
    n.order = s.numerics.order;
    n.courant = s.numerics.courant;
    n.limiter = gcm::limiter_from_string(s.numerics.limiter);
    n.shear = shear_convention_from_string(s.numerics.shear_convention);
    n.threads = threads;
    return n;
}

inline elastic3d::Numerics elastic_numerics(const Scenario& s, unsigned threads) {
    elastic3d::Numerics n;
    n.order = s.numerics.order;
    n.courant = s.numerics.courant;
    n.limiter = gcm::limiter_from_string(s.numerics.limiter);
    n.threads = threads;
    n.top_bottom = s.bc.faces == "free" ? elastic3d::FaceKind::free_surface : elastic3d::FaceKind::zero_gradient;
    return n;
}

inline std::vector<double> snapshot_times(const Scenario& s) {
    auto t = s.outputs.snapshot_times;
    if (t.empty()) t.push_back(s.t_end);
    return shell::sorted_times(t, s.t_end);
}

inline double transverse_coordinate(const Scenario& s, Axis axis) { return axis == Axis::x ? s.ic.center[1] : s.ic.center[0]; }

inline void write_profiles(ArtifactWriter& w, const Scenario& s, std::size_t k,
                           const std::function<ScalarField2D(const std::string&)>& field_of) {
    for (const auto& p : s.outputs.profiles) {
        const auto prof = post::extract_profile(field_of(p.component), p.axis, p.band_width, transverse_coordinate(s, p.axis));
        w.series("profile_" + p.name + index_tag(k), "station,value", prof.station, prof.value);
    }
}

inline void run_shell(const Scenario& s, const RunOptions& opt, ArtifactWriter& w, RunManifest& man) {
    const auto times = snapshot_times(s);
    shell::Geometry g{s.geometry.extent_x, s.geometry.extent_y, s.geometry.nx, s.geometry.ny};
    const auto num = shell_numerics(s, opt.threads);
    auto field = shell::init(g, shell_ic(s, s.material.h), s.material, num.shear);

    shell::Outputs out;
    out.snapshot_times = times;
    out.components = s.outputs.components;
    for (const auto& se : s.outputs.sensors) out.sensors.push_back({se.name, se.offset, se.size, se.component});

    std::size_t next = 0;
    auto res = shell::run(std::move(field), s.material, s.t_end, out, num, [&](const shell::ShellField& f, std::size_t) {
        while (next < times.size() && times[next] <= f.time + 1e-12 * s.t_end) {
            write_profiles(w, s, next, [&](const std::string& c) { return shell::snapshot(f, shell::quantity(c)); });
            ++next;
        }
    });
    man.steps = res.steps;
    man.tau = res.tau;

    const std::size_t nc = s.outputs.components.size();
    for (std::size_t k = 0; k < res.snapshots.size(); ++k)
        w.snapshot(s.outputs.components[k % nc] + index_tag(k / nc), res.snapshots[k]);
    for (const auto& tr : res.traces) w.series("sensor_" + tr.name, "t,value", tr.t, tr.value);
}

inline double midplane_value(const elastic3d::ElasticField3D& f, const elastic3d::Quantity& q, std::size_t i, std::size_t j) {
    const std::size_t nz = f.n[2];
    if (nz % 2 == 1) return q.eval(f.at({i, j, nz / 2}));
    return 0.5 * (q.eval(f.at({i, j, nz / 2 - 1})) + q.eval(f.at({i, j, nz / 2})));
}

inline void run_elastic(const Scenario& s, const RunOptions& opt, ArtifactWriter& w, RunManifest& man) {
    const auto times = snapshot_times(s);
    elastic3d::Geometry g{s.geometry.extent_x, s.geometry.extent_y, s.geometry.thickness,
                          s.geometry.nx,       s.geometry.ny,       s.geometry.nz};
    const auto num = elastic_numerics(s, opt.threads);
    auto field = elastic3d::init_3d(g, elastic_ic(s));

    elastic3d::Outputs out;
    out.snapshot_times = times;
    out.source = s.ic.center;
    for (const auto& sl : s.outputs.slices) out.slices.push_back({elastic3d::slice_from_string(sl.slice), sl.component});
    for (const auto& c : s.outputs.components) out.slices.push_back({elastic3d::SliceKind::xy_mid, c});

    std::vector<shell::SensorTrace> traces;
    std::vector<elastic3d::Quantity> sensor_q;
    for (const auto& se : s.outputs.sensors) {
        traces.push_back({se.name, {}, {}});
        sensor_q.push_back(elastic3d::quantity(se.component));
    }

    std::size_t next = 0;
    auto res = elastic3d::run_3d(std::move(field), s.material, s.t_end, out, num, [&](const elastic3d::ElasticField3D& f, std::size_t) {
        const GridGeometry2D plane{f.n[0], f.n[1], f.spacing[0], f.spacing[1], {f.origin[0], f.origin[1]}};
        const auto c = shell::plate_center(plane);
        for (std::size_t k = 0; k < traces.size(); ++k) {
            const auto& se = s.outputs.sensors[k];
            traces[k].t.push_back(f.time);
            traces[k].value.push_back(shell::rectangle_mean(
                plane, [&](std::size_t i, std::size_t j) { return midplane_value(f, sensor_q[k], i, j); },
                {c[0] + se.offset[0], c[1] + se.offset[1]}, se.size, se.name));
        }
        while (next < times.size() && times[next] <= f.time + 1e-12 * s.t_end) {
            write_profiles(w, s, next, [&](const std::string& q) { return elastic3d::slice_mid(f, elastic3d::quantity(q)); });
            for (const auto& m : s.outputs.moments) {
                auto mf = post::extract_moments(f, post::moment_from_string(m));
                w.snapshot("M_" + m + index_tag(next), mf);
            }
            ++next;
        }
    });
    man.steps = res.steps;
    man.tau = res.tau;

    const std::size_t ns = out.slices.size();
    for (std::size_t k = 0; k < res.snapshots.size(); ++k) {
        const auto& req = out.slices[k % ns];
        w.snapshot(elastic3d::to_string(req.kind) + "_" + req.component + index_tag(k / ns), res.snapshots[k].field);
    }
    for (const auto& tr : traces) w.series("sensor_" + tr.name, "t,value", tr.t, tr.value);
}

/// Mid-plane field of the 3D run that corresponds to a shell quantity.
inline ScalarField2D elastic_counterpart(const elastic3d::ElasticField3D& f, const std::string& component) {
    if (component == "v_x") return elastic3d::slice_mid(f, elastic3d::quantity("v_1"));
    if (component == "v_y") return elastic3d::slice_mid(f, elastic3d::quantity("v_2"));
    if (component == "M_x") return post::extract_moments(f, post::MomentComponent::xx);
    if (component == "M_y") return post::extract_moments(f, post::MomentComponent::yy);
    if (component == "M_xy") return post::extract_moments(f, post::MomentComponent::xy);
    throw ValidationError("compare.component", "no 3D counterpart for '" + component + "'");
}

inline bool has_range(const ScalarField2D& f) {
    const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
    return *hi > *lo;
}

inline void run_compare(const Scenario& s, const RunOptions& opt, ArtifactWriter& w, RunManifest& man) {
    const auto times = snapshot_times(s);
    const std::string& comp = s.compare.component;
    std::vector<double> sum_h, sum_nz, sum_final, sum_max;
    for (std::size_t hi = 0; hi < s.compare.thicknesses.size(); ++hi) {
        const double h = s.compare.thicknesses[hi];
        const std::size_t nz = s.compare.nz[hi];
        const std::string tag = "h" + std::to_string(hi) + "_";

        Material mat = s.material;
        mat.h = h;
        shell::Geometry sg{s.geometry.extent_x, s.geometry.extent_y, s.geometry.nx, s.geometry.ny};
        const auto snum = shell_numerics(s, opt.threads);
        shell::Outputs sout;
        sout.snapshot_times = times;
        sout.components = {comp};
        auto sres = shell::run(shell::init(sg, shell_ic(s, h), mat, snum.shear), mat, s.t_end, sout, snum);

        elastic3d::Geometry eg{s.geometry.extent_x, s.geometry.extent_y, h, s.geometry.nx, s.geometry.ny, nz};
        elastic3d::Outputs eout;
        eout.snapshot_times = times;
        eout.source = s.ic.center;
        auto eres = elastic3d::run_3d(elastic3d::init_3d(eg, elastic_ic(s)), mat, s.t_end, eout, elastic_numerics(s, opt.threads),
                                      {}, true);
        man.steps += sres.steps + eres.steps;

        std::vector<double> t_col, v_col;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const ScalarField2D& a = sres.snapshots.at(k);
            ScalarField2D b = elastic_counterpart(eres.states.at(k), comp);
            b.component = comp;
            if (!a.geometry.same_shape(b.geometry)) b = post::resample_to(b, a.geometry);
            w.snapshot(tag + "shell_" + comp + index_tag(k), a);
            w.snapshot(tag + "e3d_" + comp + index_tag(k), b);
            if (!has_range(b)) continue; // NRMSE is undefined for a constant reference
            t_col.push_back(times[k]);
            v_col.push_back(post::nrmse(a, b));
        }
        w.series("nrmse_h" + std::to_string(hi), "t,value", t_col, v_col);
        sum_h.push_back(h);
        sum_nz.push_back(static_cast<double>(nz));
        sum_final.push_back(v_col.empty() ? std::numeric_limits<double>::quiet_NaN() : v_col.back());
        sum_max.push_back(v_col.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(v_col.begin(), v_col.end()));
    }
    auto out = io::open_out(w.path("nrmse_summary.csv"));
    out << "h,nz,final_nrmse,max_nrmse\n";
    for (std::size_t k = 0; k < sum_h.size(); ++k)
        out << io::format_number(sum_h[k]) << ',' << io::format_number(sum_nz[k]) << ',' << io::format_number(sum_final[k])
            << ',' << io::format_number(sum_max[k]) << '\n';
}

/// Removes the files listed by a manifest left in `dir` by an earlier run.
inline void remove_previous_outputs(const std::filesystem::path& dir) {
    const auto manifest = dir / "manifest.json";
    if (!std::filesystem::exists(manifest)) return;
    std::ifstream in(manifest);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_object() && j.contains("files") && j["files"].is_array())
        for (const auto& name : j["files"])
            if (name.is_string()) {
                const std::filesystem::path p = dir / name.get<std::string>();
                if (p.parent_path() == dir) std::filesystem::remove(p);
            }
    std::filesystem::remove(manifest);
}

} // namespace detail

/**
 * Runs the scenario, writing artifacts into opt.out_dir. On solver failure the
 * manifest is still written with status "partial" and the error is rethrown
 * with the scenario name prefixed.
 */
inline RunManifest run_scenario(Scenario s, const RunOptions& opt) {
    if (opt.order) s.numerics.order = *opt.order;
    if (opt.courant) s.numerics.courant = *opt.courant;
    if (opt.threads == 0) throw ValidationError("threads", "must be at least 1");
    validate(s);

    const std::filesystem::path dir(opt.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + opt.out_dir + "': " + ec.message());
    detail::remove_previous_outputs(dir);

    RunManifest man;
    man.scenario_name = s.name;
    man.scenario_hash = fnv1a_hex(s.source_text);
    detail::ArtifactWriter w(dir, s.outputs.heatmaps);
    const auto start = std::chrono::steady_clock::now();

    auto finish = [&] {
        man.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        man.files = w.files();
        man.files.push_back("manifest.json");
        auto out = io::open_out((dir / "manifest.json").string());
        out << man.to_json().dump(2) << '\n';
    };

    try {
        switch (s.solver) {
        case SolverKind::shell: detail::run_shell(s, opt, w, man); break;
        case SolverKind::elastic3d: detail::run_elastic(s, opt, w, man); break;
        case SolverKind::compare: detail::run_compare(s, opt, w, man); break;
        }
    } catch (const Error& e) {
        man.status = "partial";
        man.error = e.category() + ": " + e.what();
        finish();
        const std::string ctx = "scenario '" + s.name + "': ";
        if (e.category() == "numerical") throw NumericalError(ctx + e.what());
        if (e.category() == "step") throw StepSizeError(ctx + e.what());
        if (e.category() == "io") throw IoError(ctx + e.what());
        if (e.category() == "validation") throw;
        throw InternalError(ctx + e.what());
    }
    finish();
    return man;
}

} // namespace klshell
