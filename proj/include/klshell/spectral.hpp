#pragma once

/**
 * @file spectral.hpp
 * @brief Small fixed-size dense algebra and the closed-form eigendecomposition
 *        of velocity/stress hyperbolic systems.
 *
 * Both the shell system (10 variables) and the 3D elasticity system (9 variables)
 * have the same directional structure: each velocity-type row couples to exactly
 * one stress-type column (its partner), and each stress-type row depends on
 * velocity columns only. Under that structure the eigenpairs are available in
 * closed form, which is what `decompose_velocity_stress` builds.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "errors.hpp"

namespace klshell {

enum class Axis { x = 0, y = 1, z = 2 };

inline const char* to_string(Axis a) {
    switch (a) {
    case Axis::x: return "x";
    case Axis::y: return "y";
    case Axis::z: return "z";
    }
    return "?";
}

template <std::size_t N>
using State = std::array<double, N>;

/// Row-major N x N matrix.
template <std::size_t N>
struct SquareMatrix {
    std::array<double, N * N> data{};

    double& operator()(std::size_t r, std::size_t c) { return data[r * N + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * N + c]; }

    static SquareMatrix identity() {
        SquareMatrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    State<N> apply(const State<N>& u) const {
        State<N> out{};
        for (std::size_t r = 0; r < N; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < N; ++c) s += (*this)(r, c) * u[c];
            out[r] = s;
        }
        return out;
    }

    friend SquareMatrix operator*(const SquareMatrix& a, const SquareMatrix& b) {
        SquareMatrix out;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) {
                double s = 0.0;
                for (std::size_t k = 0; k < N; ++k) s += a(r, k) * b(k, c);
                out(r, c) = s;
            }
        return out;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double v : data) s += v * v;
        return std::sqrt(s);
    }
};

/// Row-compressed copy of a SquareMatrix used in the sweep kernels.
template <std::size_t N>
class SparseRows {
public:
    SparseRows() = default;

    explicit SparseRows(const SquareMatrix<N>& m) {
        for (std::size_t r = 0; r < N; ++r) {
            m_rowStart[r] = m_count;
            for (std::size_t c = 0; c < N; ++c)
                if (m(r, c) != 0.0) {
                    m_cols[m_count] = c;
                    m_vals[m_count] = m(r, c);
                    ++m_count;
                }
        }
        m_rowStart[N] = m_count;
    }

    State<N> apply(const State<N>& u) const {
        State<N> out{};
        for (std::size_t r = 0; r < N; ++r) {
            double s = 0.0;
            for (std::size_t k = m_rowStart[r]; k < m_rowStart[r + 1]; ++k) s += m_vals[k] * u[m_cols[k]];
            out[r] = s;
        }
        return out;
    }

private:
    std::array<std::size_t, N * N> m_cols{};
    std::array<double, N * N> m_vals{};
    std::array<std::size_t, N + 1> m_rowStart{};
    std::size_t m_count = 0;
};

/**
 * Eigenvalues (descending), right eigenvectors stored as the columns of `right`,
 * and left eigenvectors stored as the rows of `left`, with left = right^-1.
 */
template <std::size_t N>
struct SpectralDecomposition {
    State<N> eigenvalues{};
    SquareMatrix<N> right;
    SquareMatrix<N> left;
    SparseRows<N> right_sparse;
    SparseRows<N> left_sparse;

    double max_speed() const {
        double m = 0.0;
        for (double l : eigenvalues) m = std::max(m, std::abs(l));
        return m;
    }

    State<N> right_vector(std::size_t j) const {
        State<N> v{};
        for (std::size_t i = 0; i < N; ++i) v[i] = right(i, j);
        return v;
    }

    SquareMatrix<N> reconstruct() const {
        SquareMatrix<N> scaled = right;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) scaled(r, c) *= eigenvalues[c];
        return scaled * left;
    }
};

/// Riemann invariants r = L u.
template <std::size_t N>
State<N> to_invariants(const State<N>& u, const SpectralDecomposition<N>& d) {
    return d.left_sparse.apply(u);
}

/// Exact inverse of to_invariants: u = R r.
template <std::size_t N>
State<N> from_invariants(const State<N>& r, const SpectralDecomposition<N>& d) {
    return d.right_sparse.apply(r);
}

/**
 * Closed-form eigendecomposition of a directional velocity/stress matrix.
 *
 * For a velocity index a with partner stress b the pair of eigenvalues is
 * +-sqrt(A(a,b) A(b,a)); the right eigenvector has 1 in the velocity slot and
 * A(k,a)/lambda in every stress slot k driven by that velocity. Stress
 * components that are nobody's partner carry zero-speed invariants.
 *
 * Eigenvectors are normalized so the velocity entry (or the free stress entry
 * for zero-speed modes) equals 1. Pairs are sorted by descending eigenvalue;
 * within a cluster of equal eigenvalues, by the lowest nonzero component index.
 */
template <std::size_t N>
SpectralDecomposition<N> decompose_velocity_stress(const SquareMatrix<N>& a, const std::vector<std::size_t>& velocity) {
    std::array<bool, N> is_velocity{};
    for (std::size_t v : velocity) {
        if (v >= N) throw InternalError("velocity index out of range");
        is_velocity[v] = true;
    }

    std::array<int, N> partner_of{}; // stress -> owning velocity, -1 if free
    partner_of.fill(-1);
    std::array<int, N> partner{};    // velocity -> partner stress, -1 if decoupled
    partner.fill(-1);

    for (std::size_t r = 0; r < N; ++r) {
        for (std::size_t c = 0; c < N; ++c) {
            if (a(r, c) == 0.0) continue;
            if (is_velocity[r] == is_velocity[c])
                throw InternalError("matrix couples two velocity-type or two stress-type components");
            if (is_velocity[r]) {
                if (partner[r] != -1) throw InternalError("velocity row couples to more than one stress");
                partner[r] = static_cast<int>(c);
            }
        }
    }
    for (std::size_t v : velocity) {
        if (partner[v] < 0) continue;
        const auto b = static_cast<std::size_t>(partner[v]);
        if (partner_of[b] != -1) throw InternalError("stress component is the partner of two velocities");
        partner_of[b] = static_cast<int>(v);
        for (std::size_t c = 0; c < N; ++c)
            if (c != v && a(b, c) != 0.0) throw InternalError("partner stress row depends on a second velocity");
    }

    struct Pair {
        double lambda;
        State<N> r;
        State<N> l;
        std::size_t first_nonzero;
    };
    std::vector<Pair> pairs;
    pairs.reserve(N);

    auto first_nonzero = [](const State<N>& v) {
        for (std::size_t i = 0; i < N; ++i)
            if (v[i] != 0.0) return i;
        return N;
    };

    for (std::size_t v : velocity) {
        if (partner[v] < 0) {
            for (std::size_t k = 0; k < N; ++k)
                if (a(k, v) != 0.0) throw InternalError("decoupled velocity drives a stress: matrix is defective");
            Pair p{0.0, {}, {}, v};
            p.r[v] = 1.0;
            p.l[v] = 1.0;
            pairs.push_back(p);
            continue;
        }
        const auto b = static_cast<std::size_t>(partner[v]);
        const double prod = a(v, b) * a(b, v);
        if (!(prod > 0.0)) throw InternalError("velocity/stress pair is not hyperbolic");
        const double lam = std::sqrt(prod);
        for (double sign : {1.0, -1.0}) {
            Pair p{sign * lam, {}, {}, 0};
            p.r[v] = 1.0;
            for (std::size_t k = 0; k < N; ++k)
                if (k != v && a(k, v) != 0.0) p.r[k] = a(k, v) / (sign * lam);
            p.l[v] = 0.5;
            p.l[b] = 0.5 * sign * lam / a(b, v);
            p.first_nonzero = first_nonzero(p.r);
            pairs.push_back(p);
        }
    }
    for (std::size_t s = 0; s < N; ++s) {
        if (is_velocity[s] || partner_of[s] != -1) continue;
        Pair p{0.0, {}, {}, s};
        p.r[s] = 1.0;
        p.l[s] = 1.0;
        for (std::size_t v : velocity) {
            if (a(s, v) == 0.0) continue;
            const auto b = static_cast<std::size_t>(partner[v]);
            p.l[b] -= a(s, v) / a(b, v);
        }
        pairs.push_back(p);
    }
    if (pairs.size() != N) throw InternalError("eigenvector count does not match system size");

    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.lambda > y.lambda; });
    // Re-order clusters of numerically equal eigenvalues by first nonzero index.
    for (std::size_t i = 0; i < N;) {
        std::size_t j = i + 1;
        const double scale = std::max(1.0, std::abs(pairs[i].lambda));
        while (j < N && std::abs(pairs[j].lambda - pairs[i].lambda) <= 1e-12 * scale) ++j;
        std::stable_sort(pairs.begin() + static_cast<std::ptrdiff_t>(i), pairs.begin() + static_cast<std::ptrdiff_t>(j),
                         [](const Pair& x, const Pair& y) { return x.first_nonzero < y.first_nonzero; });
        i = j;
    }

    SpectralDecomposition<N> d;
    for (std::size_t j = 0; j < N; ++j) {
        d.eigenvalues[j] = pairs[j].lambda;
        for (std::size_t i = 0; i < N; ++i) {
            d.right(i, j) = pairs[j].r[i];
            d.left(j, i) = pairs[j].l[i];
        }
    }
    d.right_sparse = SparseRows<N>(d.right);
    d.left_sparse = SparseRows<N>(d.left);
    return d;
}

} // namespace klshell
