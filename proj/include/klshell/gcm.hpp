#pragma once

/**
 * @file gcm.hpp
 * @brief Dimension-split grid-characteristic time stepping on structured grids.
 *
 * One sweep along an axis transforms every node into Riemann invariants of that
 * axis, moves each invariant along its characteristic by interpolating a Newton
 * polynomial at the foot point x - lambda*tau on an upwind-biased stencil, and
 * transforms back. A full step applies one sweep per axis, alternating the axis
 * order between consecutive steps.
 */

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "spectral.hpp"

namespace klshell::gcm {

inline constexpr int kMaxOrder = 5;

enum class Limiter {
    none,
    clamp ///< clamp the interpolant to the stencil min/max
};

inline Limiter limiter_from_string(const std::string& s) {
    if (s == "none") return Limiter::none;
    if (s == "clamp") return Limiter::clamp;
    throw ValidationError("numerics.limiter", "expected 'none' or 'clamp', got '" + s + "'");
}

inline std::string to_string(Limiter l) { return l == Limiter::none ? "none" : "clamp"; }

struct SweepPlan {
    Axis axis = Axis::x;
    double spacing = 0.0; ///< node spacing along the sweep axis [m]
    double tau = 0.0;     ///< time step [s]
    int order = 5;
    Limiter limiter = Limiter::none;
};

/// Number of nodes the order-k stencil reaches on its upwind side.
constexpr int upwind_reach(int order) { return (order + 2) / 2; }

/// Ghost nodes needed on each side of a line for an order-k sweep.
constexpr int ghost_count(int order) { return upwind_reach(order); }

/// Ghost policy at one end of a grid line.
template <std::size_t N>
struct FaceCondition {
    enum class Kind {
        zero_gradient, ///< ghosts copy the boundary node
        free_surface   ///< ghosts mirror the interior; components with sign -1 are odd
    };
    Kind kind = Kind::zero_gradient;
    State<N> mirror_signs{};

    static FaceCondition zero_gradient() { return {}; }

    static FaceCondition free_surface(const State<N>& signs) { return {Kind::free_surface, signs}; }

    bool is_free() const { return kind == Kind::free_surface; }
};

inline void validate_order(int order) {
    if (order < 1 || order > kMaxOrder)
        throw ValidationError("numerics.order", "interpolation order must be in [1, 5], got " + std::to_string(order));
}

/**
 * Newton forward-difference interpolation on k+1 unit-spaced nodes.
 *
 * `f` holds the values at nodes 0..order in upwind order and is overwritten by
 * the difference table. `t` is the evaluation point in node units.
 */
inline double newton_interpolate(std::span<double> f, int order, double t) {
    for (int q = 1; q <= order; ++q)
        for (int p = order; p >= q; --p) f[p] -= f[p - 1];
    double result = f[order];
    for (int q = order - 1; q >= 0; --q) result = f[q] + (t - q) / (q + 1) * result;
    return result;
}

inline double compute_time_step(std::span<const double> spacings, double max_speed, double courant) {
    if (spacings.empty()) throw ValidationError("spacing", "at least one axis is required");
    double dmin = std::numeric_limits<double>::infinity();
    for (double d : spacings) {
        if (!(d > 0.0)) throw ValidationError("spacing", "grid spacing must be positive");
        dmin = std::min(dmin, d);
    }
    if (!(max_speed > 0.0)) throw ValidationError("max_speed", "characteristic speed must be positive");
    if (!(courant > 0.0 && courant <= 1.0))
        throw ValidationError("numerics.courant", "Courant factor must lie in (0, 1], got " + std::to_string(courant));
    return courant * dmin / max_speed;
}

inline double compute_time_step(std::initializer_list<double> spacings, double max_speed, double courant) {
    return compute_time_step(std::span<const double>(spacings.begin(), spacings.size()), max_speed, courant);
}

/// Reusable scratch for sweeping lines of one system size.
template <std::size_t N>
class LineSweeper {
public:
    /**
     * Sweep one grid line. `line` and `out` must not alias.
     *
     * Throws StepSizeError when the Courant number exceeds 1 and InternalError
     * when the line is too short for the ghost region.
     */
    void sweep(std::span<const State<N>> line, const FaceCondition<N>& low, const FaceCondition<N>& high,
               const SpectralDecomposition<N>& d, const SweepPlan& plan, std::span<State<N>> out) {
        validate_order(plan.order);
        if (!(plan.spacing > 0.0) || !(plan.tau >= 0.0)) throw ValidationError("plan", "spacing and tau must be positive");
        const double courant = d.max_speed() * plan.tau / plan.spacing;
        if (courant > 1.0 + 1e-12)
            throw StepSizeError("Courant number " + std::to_string(courant) + " exceeds 1 along axis " + to_string(plan.axis));

        const int g = ghost_count(plan.order);
        const auto n = static_cast<int>(line.size());
        if (n < g + 1 || out.size() != line.size())
            throw InternalError("grid line of " + std::to_string(n) + " nodes is too short for order " +
                                std::to_string(plan.order) + " (needs " + std::to_string(g + 1) + ")");

        m_ext.resize(static_cast<std::size_t>(n + 2 * g));
        for (int i = 0; i < n; ++i) m_ext[g + i] = to_invariants(line[i], d);
        for (int m = 1; m <= g; ++m) {
            m_ext[g - m] = to_invariants(ghost(line, low, m, 0, +1), d);
            m_ext[g + n - 1 + m] = to_invariants(ghost(line, high, m, n - 1, -1), d);
        }

        const int order = plan.order;
        const int reach = upwind_reach(order);
        std::array<double, kMaxOrder + 1> f{};
        for (int i = 0; i < n; ++i) {
            State<N> r{};
            for (std::size_t j = 0; j < N; ++j) {
                const double lam = d.eigenvalues[j];
                const int centre = g + i;
                if (lam == 0.0) {
                    r[j] = m_ext[centre][j];
                    continue;
                }
                const int upwind = lam > 0.0 ? -1 : 1;
                const double gamma = std::abs(lam) * plan.tau / plan.spacing;
                double lo = std::numeric_limits<double>::infinity();
                double hi = -lo;
                for (int p = 0; p <= order; ++p) {
                    const double v = m_ext[centre + upwind * (reach - p)][j];
                    f[p] = v;
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
                double value = newton_interpolate(std::span<double>(f.data(), order + 1), order, reach - gamma);
                if (plan.limiter == Limiter::clamp) value = std::clamp(value, lo, hi);
                r[j] = value;
            }
            out[i] = from_invariants(r, d);
        }
    }

private:
    static State<N> ghost(std::span<const State<N>> line, const FaceCondition<N>& fc, int m, int edge, int inward) {
        if (fc.kind == FaceCondition<N>::Kind::zero_gradient) return line[edge];
        const State<N>& src = line[edge + inward * m];
        State<N> out{};
        for (std::size_t c = 0; c < N; ++c) out[c] = fc.mirror_signs[c] * src[c];
        return out;
    }

    std::vector<State<N>> m_ext;
};

/// Convenience wrapper returning the swept line.
template <std::size_t N>
std::vector<State<N>> characteristic_sweep(std::span<const State<N>> line, const FaceCondition<N>& low,
                                           const FaceCondition<N>& high, const SpectralDecomposition<N>& d,
                                           const SweepPlan& plan) {
    std::vector<State<N>> out(line.size());
    LineSweeper<N> sweeper;
    sweeper.sweep(line, low, high, d, plan, std::span<State<N>>(out));
    return out;
}

/// Runs body(begin, end) over [0, count) split into contiguous blocks, one per thread.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t, std::size_t, unsigned)>& body) {
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (threads == 1) {
        body(0, count, 0);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const std::size_t block = (count + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
        const std::size_t b = t * block;
        const std::size_t e = std::min(count, b + block);
        if (b >= e) break;
        pool.emplace_back([&body, b, e, t] { body(b, e, t); });
    }
}

/// Node data of an N-component system on a Dim-dimensional Cartesian grid; x varies fastest.
template <std::size_t N, std::size_t Dim>
struct StructuredField {
    std::array<std::size_t, Dim> n{};
    std::array<double, Dim> spacing{};
    std::array<double, Dim> origin{};
    double time = 0.0;
    std::vector<State<N>> data;

    StructuredField() = default;

    StructuredField(std::array<std::size_t, Dim> counts, std::array<double, Dim> d, std::array<double, Dim> o = {})
        : n(counts), spacing(d), origin(o) {
        std::size_t total = 1;
        for (auto c : counts) total *= c;
        data.assign(total, State<N>{});
    }

    std::size_t size() const { return data.size(); }

    std::size_t stride(std::size_t axis) const {
        std::size_t s = 1;
        for (std::size_t a = 0; a < axis; ++a) s *= n[a];
        return s;
    }

    std::size_t index(const std::array<std::size_t, Dim>& ijk) const {
        std::size_t idx = 0;
        for (std::size_t a = Dim; a-- > 0;) idx = idx * n[a] + ijk[a];
        return idx;
    }

    std::array<std::size_t, Dim> unravel(std::size_t idx) const {
        std::array<std::size_t, Dim> ijk{};
        for (std::size_t a = 0; a < Dim; ++a) {
            ijk[a] = idx % n[a];
            idx /= n[a];
        }
        return ijk;
    }

    State<N>& at(const std::array<std::size_t, Dim>& ijk) { return data[index(ijk)]; }
    const State<N>& at(const std::array<std::size_t, Dim>& ijk) const { return data[index(ijk)]; }

    double coord(std::size_t axis, std::size_t i) const { return origin[axis] + static_cast<double>(i) * spacing[axis]; }

    double extent(std::size_t axis) const { return static_cast<double>(n[axis] - 1) * spacing[axis]; }
};

/// Boundary conditions on the low and high faces of every axis.
template <std::size_t N, std::size_t Dim>
using FaceSet = std::array<std::array<FaceCondition<N>, 2>, Dim>;

struct StepOptions {
    double tau = 0.0;
    int order = 5;
    Limiter limiter = Limiter::none;
    unsigned threads = 1;
    bool reversed = false; ///< sweep axes from last to first
};

/**
 * Double-buffered full-step driver. Grid lines are independent within a sweep,
 * so results are bit-identical for any thread count.
 */
template <std::size_t N, std::size_t Dim>
class Stepper {
public:
    Stepper(std::array<SpectralDecomposition<N>, Dim> decompositions, FaceSet<N, Dim> faces)
        : m_decomp(std::move(decompositions)), m_faces(faces) {}

    const SpectralDecomposition<N>& decomposition(std::size_t axis) const { return m_decomp[axis]; }
    const FaceSet<N, Dim>& faces() const { return m_faces; }

    double max_speed() const {
        double s = 0.0;
        for (const auto& d : m_decomp) s = std::max(s, d.max_speed());
        return s;
    }

    void full_step(StructuredField<N, Dim>& field, const StepOptions& opt) {
        for (std::size_t k = 0; k < Dim; ++k) {
            const std::size_t axis = opt.reversed ? Dim - 1 - k : k;
            sweep_axis(field, axis, opt);
        }
        field.time += opt.tau;
    }

    void sweep_axis(StructuredField<N, Dim>& field, std::size_t axis, const StepOptions& opt) {
        SweepPlan plan{static_cast<Axis>(axis), field.spacing[axis], opt.tau, opt.order, opt.limiter};
        const std::size_t len = field.n[axis];
        const std::size_t stride = field.stride(axis);
        const std::size_t lines = field.size() / len;
        m_next.resize(field.size());

        const unsigned threads = std::max(1u, opt.threads);
        if (m_sweepers.size() < threads) m_sweepers.resize(threads);
        std::vector<std::vector<State<N>>> in(threads), out(threads);

        const auto& src = field.data;
        auto& dst = m_next;
        parallel_for(lines, threads, [&](std::size_t b, std::size_t e, unsigned t) {
            auto& li = in[t];
            auto& lo = out[t];
            li.resize(len);
            lo.resize(len);
            for (std::size_t l = b; l < e; ++l) {
                const std::size_t base = (l / stride) * stride * len + (l % stride);
                for (std::size_t i = 0; i < len; ++i) li[i] = src[base + i * stride];
                m_sweepers[t].sweep(li, m_faces[axis][0], m_faces[axis][1], m_decomp[axis], plan, lo);
                for (std::size_t i = 0; i < len; ++i) dst[base + i * stride] = lo[i];
            }
        });
        field.data.swap(m_next);
        enforce_free_faces(field);
    }

    /// Zeroes the odd (traction) components on every free-surface face.
    void enforce_free_faces(StructuredField<N, Dim>& field) const {
        for (std::size_t axis = 0; axis < Dim; ++axis) {
            for (int side = 0; side < 2; ++side) {
                const auto& fc = m_faces[axis][side];
                if (!fc.is_free()) continue;
                const std::size_t fixed = side == 0 ? 0 : field.n[axis] - 1;
                for (std::size_t idx = 0; idx < field.size(); ++idx) {
                    if ((idx / field.stride(axis)) % field.n[axis] != fixed) continue;
                    for (std::size_t c = 0; c < N; ++c)
                        if (fc.mirror_signs[c] < 0.0) field.data[idx][c] = 0.0;
                }
            }
        }
    }

private:
    std::array<SpectralDecomposition<N>, Dim> m_decomp;
    FaceSet<N, Dim> m_faces;
    std::vector<State<N>> m_next;
    std::vector<LineSweeper<N>> m_sweepers;
};

/// Throws NumericalError naming the first non-finite node.
template <std::size_t N, std::size_t Dim>
void check_finite(const StructuredField<N, Dim>& f, std::size_t step) {
    for (std::size_t idx = 0; idx < f.size(); ++idx)
        for (std::size_t c = 0; c < N; ++c)
            if (!std::isfinite(f.data[idx][c])) {
                const auto ijk = f.unravel(idx);
                std::string where;
                for (std::size_t a = 0; a < Dim; ++a) where += (a ? "," : "") + std::to_string(ijk[a]);
                throw NumericalError("non-finite state at step " + std::to_string(step) + ", node (" + where +
                                     "), component " + std::to_string(c));
            }
}


struct LoopOptions {
    double t_end = 0.0;
    double tau = 0.0; ///< nominal step; shortened to land exactly on output times
    int order = 5;
    Limiter limiter = Limiter::none;
    unsigned threads = 1;
    bool start_reversed = false;
    std::vector<double> output_times; ///< sorted, each within [0, t_end]
};

/**
 * Advances `field` from its current time to t_end.
 *
 * `on_step(field, step)` fires after initialisation (step 0) and after every
 * step; `on_output(field, k)` fires when the field time reaches output_times[k].
 * Returns the number of steps taken.
 */
template <std::size_t N, std::size_t Dim>
std::size_t run_until(StructuredField<N, Dim>& field, Stepper<N, Dim>& stepper, const LoopOptions& opt,
                      const std::function<void(const StructuredField<N, Dim>&, std::size_t)>& on_step,
                      const std::function<void(const StructuredField<N, Dim>&, std::size_t)>& on_output) {
    if (!(opt.t_end > 0.0)) throw ValidationError("t_end", "must be positive");
    if (!(opt.tau > 0.0)) throw ValidationError("tau", "must be positive");
    const double eps = 1e-9 * opt.tau;
    std::size_t next_output = 0;
    auto emit_due = [&] {
        while (next_output < opt.output_times.size() && opt.output_times[next_output] <= field.time + eps) {
            if (on_output) on_output(field, next_output);
            ++next_output;
        }
    };

    std::size_t step = 0;
    check_finite(field, step);
    if (on_step) on_step(field, step);
    emit_due();
    while (field.time < opt.t_end - eps) {
        double target = opt.t_end;
        if (next_output < opt.output_times.size()) target = std::min(target, opt.output_times[next_output]);
        StepOptions so;
        so.tau = std::min(opt.tau, target - field.time);
        so.order = opt.order;
        so.limiter = opt.limiter;
        so.threads = opt.threads;
        so.reversed = ((step % 2) == 1) != opt.start_reversed;
        stepper.full_step(field, so);
        if (std::abs(field.time - target) <= eps) field.time = target;
        ++step;
        check_finite(field, step);
        if (on_step) on_step(field, step);
        emit_due();
    }
    return step;
}

} // namespace klshell::gcm
