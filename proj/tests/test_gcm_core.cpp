/**
 * @file test_gcm_core.cpp
 * @brief Characteristic sweep kernel: interpolation exactness, convergence order,
 *        Courant checks, limiter bounds, boundary ghosts and thread determinism.
 */

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "klshell/gcm.hpp"
#include "klshell/shell_solver.hpp"

using namespace klshell;
using namespace klshell::gcm;

namespace {

/// Acoustic pair v_t = sigma_x, sigma_t = c^2 v_x, written with the solver's sign convention.
SpectralDecomposition<2> acoustic(double c) {
    SquareMatrix<2> a;
    a(0, 1) = -1.0;
    a(1, 0) = -c * c;
    return decompose_velocity_stress<2>(a, {0});
}

/// Lagrange form on nodes 0..k, evaluated at t.
double lagrange(const std::vector<double>& f, double t) {
    const int k = static_cast<int>(f.size()) - 1;
    double s = 0.0;
    for (int i = 0; i <= k; ++i) {
        double w = 1.0;
        for (int j = 0; j <= k; ++j)
            if (j != i) w *= (t - j) / static_cast<double>(i - j);
        s += w * f[static_cast<std::size_t>(i)];
    }
    return s;
}

std::vector<State<2>> line_from_invariants(const SpectralDecomposition<2>& d, std::size_t n,
                                           const std::function<std::array<double, 2>(double)>& r, double dx) {
    std::vector<State<2>> line(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto inv = r(static_cast<double>(i) * dx);
        line[i] = from_invariants(State<2>{inv[0], inv[1]}, d);
    }
    return line;
}

} // namespace

TEST(GcmCore, NewtonMatchesLagrange) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int order = 1; order <= kMaxOrder; ++order)
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> f(static_cast<std::size_t>(order + 1));
            for (auto& v : f) v = u(rng);
            const double t = 3.0 * u(rng) + 1.0;
            std::vector<double> scratch = f;
            EXPECT_NEAR(newton_interpolate(scratch, order, t), lagrange(f, t), 1e-12) << "order " << order;
        }
}

TEST(GcmCore, NewtonReproducesNodes) {
    for (int order = 1; order <= kMaxOrder; ++order)
        for (int node = 0; node <= order; ++node) {
            std::vector<double> f(static_cast<std::size_t>(order + 1));
            for (int i = 0; i <= order; ++i) f[static_cast<std::size_t>(i)] = std::sin(1.0 + i);
            const double expected = f[static_cast<std::size_t>(node)];
            EXPECT_NEAR(newton_interpolate(f, order, node), expected, 1e-14);
        }
}

TEST(GcmCore, SweepIsExactForPolynomialsOfTheOrder) {
    const double c = 2.0, dx = 0.1;
    const auto d = acoustic(c);
    for (int order = 1; order <= kMaxOrder; ++order) {
        auto poly = [order](double x) {
            double p = 0.0;
            for (int q = 0; q <= order; ++q) p += std::pow(x, q) / (q + 1.0);
            return p;
        };
        const double tau = 0.37 * dx / c;
        auto inv = [&](double x) { return std::array<double, 2>{poly(x), -2.0 * poly(x) + 1.0}; };
        const auto line = line_from_invariants(d, 30, inv, dx);
        const auto out = characteristic_sweep<2>(line, FaceCondition<2>::zero_gradient(), FaceCondition<2>::zero_gradient(), d,
                                                 SweepPlan{Axis::x, dx, tau, order, Limiter::none});
        for (std::size_t i = 6; i + 6 < line.size(); ++i) {
            const double x = static_cast<double>(i) * dx;
            const auto r = to_invariants(out[i], d);
            const auto e0 = inv(x - d.eigenvalues[0] * tau);
            const auto e1 = inv(x - d.eigenvalues[1] * tau);
            EXPECT_NEAR(r[0], e0[0], 1e-11 * std::max(1.0, std::abs(e0[0]))) << "order " << order << " node " << i;
            EXPECT_NEAR(r[1], e1[1], 1e-11 * std::max(1.0, std::abs(e1[1]))) << "order " << order << " node " << i;
        }
    }
}

TEST(GcmCore, CourantOneShiftsByOneNode) {
    const double c = 3.0, dx = 0.05;
    const auto d = acoustic(c);
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    std::vector<State<2>> line(40);
    for (auto& s : line) s = {g(rng), g(rng)};
    for (int order = 1; order <= kMaxOrder; ++order) {
        const auto out = characteristic_sweep<2>(line, FaceCondition<2>::zero_gradient(), FaceCondition<2>::zero_gradient(), d,
                                                 SweepPlan{Axis::x, dx, dx / c, order, Limiter::none});
        for (std::size_t i = 1; i + 1 < line.size(); ++i) {
            const auto r = to_invariants(out[i], d);
            EXPECT_NEAR(r[0], to_invariants(line[i - 1], d)[0], 1e-12) << order;
            EXPECT_NEAR(r[1], to_invariants(line[i + 1], d)[1], 1e-12) << order;
        }
    }
}

TEST(GcmCore, ConvergenceOrderOnSmoothPulse) {
    const double c = 1.0;
    const auto d = acoustic(c);
    auto pulse = [](double x) { return std::exp(-std::pow((x - 0.4) / 0.08, 2)); };
    auto error_for = [&](int order, std::size_t n) {
        const double dx = 1.0 / static_cast<double>(n - 1);
        const double tau = 0.5 * dx / c;
        const int steps = static_cast<int>(std::lround(0.2 / tau));
        auto line = line_from_invariants(d, n, [&](double x) { return std::array<double, 2>{pulse(x), 0.0}; }, dx);
        std::vector<State<2>> out(n);
        LineSweeper<2> sw;
        for (int s = 0; s < steps; ++s) {
            sw.sweep(line, FaceCondition<2>::zero_gradient(), FaceCondition<2>::zero_gradient(), d,
                     SweepPlan{Axis::x, dx, tau, order, Limiter::none}, out);
            line.swap(out);
        }
        const double shift = c * tau * steps;
        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            err = std::max(err, std::abs(to_invariants(line[i], d)[0] - pulse(static_cast<double>(i) * dx - shift)));
        return err;
    };
    for (int order = 1; order <= kMaxOrder; ++order) {
        const double e1 = error_for(order, 201), e2 = error_for(order, 401);
        const double observed = std::log2(e1 / e2);
        EXPECT_GT(observed, order - 0.5) << "order " << order << " errors " << e1 << " " << e2;
    }
}

TEST(GcmCore, CourantAboveOneThrows) {
    const auto d = acoustic(1.0);
    std::vector<State<2>> line(20);
    EXPECT_THROW(characteristic_sweep<2>(line, {}, {}, d, SweepPlan{Axis::x, 0.1, 0.1 * 1.001, 3, Limiter::none}),
                 StepSizeError);
    EXPECT_NO_THROW(characteristic_sweep<2>(line, {}, {}, d, SweepPlan{Axis::x, 0.1, 0.1, 3, Limiter::none}));
}

TEST(GcmCore, ShortLineRaisesInternalError) {
    const auto d = acoustic(1.0);
    for (int order = 1; order <= kMaxOrder; ++order) {
        const std::size_t needed = static_cast<std::size_t>(ghost_count(order) + 1);
        std::vector<State<2>> shortline(needed - 1), okline(needed);
        const SweepPlan plan{Axis::x, 0.1, 0.05, order, Limiter::none};
        EXPECT_THROW(characteristic_sweep<2>(shortline, {}, {}, d, plan), InternalError) << order;
        EXPECT_NO_THROW(characteristic_sweep<2>(okline, {}, {}, d, plan)) << order;
    }
}

TEST(GcmCore, OrderOutsideRangeRejected) {
    EXPECT_THROW(validate_order(0), ValidationError);
    EXPECT_THROW(validate_order(6), ValidationError);
    EXPECT_NO_THROW(validate_order(5));
}

TEST(GcmCore, ClampLimiterPreventsOvershoot) {
    const auto d = acoustic(1.0);
    const double dx = 0.1;
    auto line = line_from_invariants(d, 60, [](double x) { return std::array<double, 2>{x < 3.0 ? 1.0 : 0.0, 0.0}; }, dx);
    for (Limiter lim : {Limiter::none, Limiter::clamp}) {
        auto cur = line;
        std::vector<State<2>> out(cur.size());
        LineSweeper<2> sw;
        double lo = 0.0, hi = 1.0;
        for (int s = 0; s < 20; ++s) {
            sw.sweep(cur, {}, {}, d, SweepPlan{Axis::x, dx, 0.43 * dx, 5, lim}, out);
            cur.swap(out);
        }
        for (const auto& u : cur) {
            const double r = to_invariants(u, d)[0];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        if (lim == Limiter::clamp) {
            EXPECT_GE(lo, -1e-12);
            EXPECT_LE(hi, 1.0 + 1e-12);
        } else {
            EXPECT_TRUE(lo < -1e-3 || hi > 1.0 + 1e-3) << "unlimited order 5 should oscillate at a jump";
        }
    }
}

TEST(GcmCore, ConstantStatePreservedWithZeroGradient) {
    const Material m = Material::steel(0.2);
    auto stepper = shell::make_stepper(m, ShearConvention::engineering);
    shell::ShellField f({12, 9}, {0.1, 0.1});
    const auto dc = derive_constants(m);
    shell::ShellState u;
    for (std::size_t c = 0; c < u.size(); ++c) u[c] = 1.0 + static_cast<double>(c);
    for (std::size_t c : {shell::sigma_x, shell::sigma_y, shell::sigma_xy}) u[c] *= m.rho * dc.cp_shell;
    for (std::size_t c : {shell::M_x, shell::M_y, shell::M_xy}) u[c] *= dc.I * dc.cp_shell / m.h;
    for (auto& s : f.data) s = u;
    const double tau = compute_time_step({0.1, 0.1}, stepper.max_speed(), 0.9);
    for (int s = 0; s < 5; ++s) stepper.full_step(f, {tau, 5, Limiter::none, 1, s % 2 == 1});
    for (const auto& s : f.data)
        for (std::size_t c = 0; c < u.size(); ++c) EXPECT_NEAR(s[c], u[c], 1e-12 * u[c]);
}

TEST(GcmCore, FreeSurfaceGhostMirrorsWithSigns) {
    const auto d = acoustic(1.0);
    State<2> signs{1.0, -1.0};
    std::vector<State<2>> line(10);
    for (std::size_t i = 0; i < line.size(); ++i) line[i] = {1.0, 0.3 * static_cast<double>(i)};
    const auto fc = FaceCondition<2>::free_surface(signs);
    // with an odd sigma the low boundary keeps sigma(0) = 0 under a sweep
    const auto out = characteristic_sweep<2>(line, fc, fc, d, SweepPlan{Axis::x, 0.1, 0.05, 3, Limiter::none});
    EXPECT_NEAR(out[0][1], 0.0, 1e-12);
}

TEST(GcmCore, ThreadCountDoesNotChangeBits) {
    const Material m = Material::steel(0.3);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    shell::ShellField f({37, 23}, {0.1, 0.1});
    for (auto& s : f.data)
        for (auto& v : s) v = g(rng);
    auto a = f, b = f;
    auto sa = shell::make_stepper(m, ShearConvention::engineering);
    auto sb = shell::make_stepper(m, ShearConvention::engineering);
    const double tau = compute_time_step({0.1, 0.1}, sa.max_speed(), 0.9);
    for (int s = 0; s < 6; ++s) {
        sa.full_step(a, {tau, 5, Limiter::none, 1, s % 2 == 1});
        sb.full_step(b, {tau, 5, Limiter::none, 4, s % 2 == 1});
    }
    ASSERT_EQ(a.data.size(), b.data.size());
    EXPECT_EQ(std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(a.data[0])), 0);
}

TEST(GcmCore, TimeLoopLandsOnOutputTimes) {
    const Material m = Material::steel(0.3);
    auto stepper = shell::make_stepper(m, ShearConvention::engineering);
    shell::ShellField f({20, 20}, {0.1, 0.1});
    LoopOptions lo;
    lo.t_end = 1e-4;
    lo.tau = compute_time_step({0.1, 0.1}, stepper.max_speed(), 0.9);
    lo.output_times = {0.0, 1.234e-5, 5e-5, 1e-4};
    std::vector<double> seen;
    std::size_t calls = 0;
    const auto steps = run_until<10, 2>(
        f, stepper, lo, [&](const auto&, std::size_t) { ++calls; },
        [&](const auto& fld, std::size_t) { seen.push_back(fld.time); });
    ASSERT_EQ(seen.size(), lo.output_times.size());
    for (std::size_t k = 0; k < seen.size(); ++k) EXPECT_EQ(seen[k], lo.output_times[k]);
    EXPECT_EQ(calls, steps + 1);
    EXPECT_EQ(f.time, lo.t_end);
}

TEST(GcmCore, TimeStepValidation) {
    EXPECT_DOUBLE_EQ(compute_time_step({0.2, 0.1}, 10.0, 0.5), 0.005);
    EXPECT_THROW(compute_time_step({0.1}, 10.0, 1.5), ValidationError);
    EXPECT_THROW(compute_time_step({0.0}, 10.0, 0.5), ValidationError);
    EXPECT_THROW(compute_time_step({0.1}, 0.0, 0.5), ValidationError);
}

TEST(GcmCore, NonFiniteStateReported) {
    shell::ShellField f({4, 4}, {1.0, 1.0});
    f.at({2, 1})[3] = std::nan("");
    try {
        check_finite(f, 7);
        FAIL();
    } catch (const NumericalError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("step 7"), std::string::npos);
        EXPECT_NE(msg.find("(2,1)"), std::string::npos);
        EXPECT_NE(msg.find("component 3"), std::string::npos);
    }
}
