#pragma once

/**
 * @file io.hpp
 * @brief Snapshot, trace and profile CSV files and PGM heatmaps.
 *
 * Snapshot layout:
 *   # component=<name> time=<s> nx=<n> ny=<n> dx=<m> dy=<m> origin=<x0,y0>
 *   x,y,value          (one row per node, x fastest)
 * Numbers use the shortest round-trip representation, so output is byte-stable.
 */

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "scalar_field.hpp"

namespace klshell::io {

inline std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw InternalError("number formatting failed");
    return std::string(buf, ptr);
}

inline double parse_number(const std::string& s, const std::string& what) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t' || e[-1] == '\r')) --e;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc{} || ptr != e) throw IoError("cannot parse number '" + s + "' in " + what);
    return v;
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    return out;
}

inline void write_snapshot(const std::string& path, const ScalarField2D& f) {
    auto out = open_out(path);
    const auto& g = f.geometry;
    out << "# component=" << f.component << " time=" << format_number(f.time) << " nx=" << g.nx << " ny=" << g.ny
        << " dx=" << format_number(g.dx) << " dy=" << format_number(g.dy) << " origin=" << format_number(g.origin[0]) << ','
        << format_number(g.origin[1]) << '\n';
    for (std::size_t j = 0; j < g.ny; ++j)
        for (std::size_t i = 0; i < g.nx; ++i)
            out << format_number(g.x(i)) << ',' << format_number(g.y(j)) << ',' << format_number(f(i, j)) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

inline ScalarField2D read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    if (header.rfind("# ", 0) != 0) throw IoError(path + ": missing snapshot header");

    std::map<std::string, std::string> kv;
    std::istringstream hs(header.substr(2));
    std::string token;
    while (hs >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) throw IoError(path + ": malformed header token '" + token + "'");
        kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
    for (const char* key : {"component", "time", "nx", "ny", "dx", "dy", "origin"})
        if (!kv.count(key)) throw IoError(path + ": header lacks '" + std::string(key) + "'");

    GridGeometry2D g;
    g.nx = static_cast<std::size_t>(parse_number(kv["nx"], path));
    g.ny = static_cast<std::size_t>(parse_number(kv["ny"], path));
    g.dx = parse_number(kv["dx"], path);
    g.dy = parse_number(kv["dy"], path);
    const auto comma = kv["origin"].find(',');
    if (comma == std::string::npos) throw IoError(path + ": origin must be 'x0,y0'");
    g.origin = {parse_number(kv["origin"].substr(0, comma), path), parse_number(kv["origin"].substr(comma + 1), path)};

    ScalarField2D f(g, kv["component"], parse_number(kv["time"], path));
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (row >= f.values.size()) throw IoError(path + ": more rows than nx*ny");
        const auto last = line.rfind(',');
        if (last == std::string::npos) throw IoError(path + ": malformed row " + std::to_string(row + 2));
        f.values[row++] = parse_number(line.substr(last + 1), path);
    }
    if (row != f.values.size())
        throw IoError(path + ": expected " + std::to_string(f.values.size()) + " rows, found " + std::to_string(row));
    return f;
}

/// Two-column CSV with a header line, e.g. `t,value` or `station,value`.
inline void write_series(const std::string& path, const std::string& header, const std::vector<double>& a,
                         const std::vector<double>& b) {
    if (a.size() != b.size()) throw InternalError("series columns differ in length");
    auto out = open_out(path);
    out << header << '\n';
    for (std::size_t k = 0; k < a.size(); ++k) out << format_number(a[k]) << ',' << format_number(b[k]) << '\n';
    if (!out) throw IoError("write failed for '" + path + "'");
}

/**
 * 8-bit binary PGM with linear min-max scaling (row 0 is the largest y), and a
 * sidecar `<path>.txt` recording the scaling.
 */
inline void write_heatmap(const std::string& path, const ScalarField2D& f) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : f.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    auto out = open_out(path);
    out << "P5\n" << f.nx() << ' ' << f.ny() << "\n255\n";
    for (std::size_t jj = f.ny(); jj-- > 0;)
        for (std::size_t i = 0; i < f.nx(); ++i) {
            const double s = (f(i, jj) - lo) / span;
            out.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(s, 0.0, 1.0) * 255.0))));
        }
    if (!out) throw IoError("write failed for '" + path + "'");

    auto side = open_out(path + ".txt");
    side << "component=" << f.component << "\ntime=" << format_number(f.time) << "\nmin=" << format_number(lo)
         << "\nmax=" << format_number(hi) << "\nscale=linear\n";
}

} // namespace klshell::io
