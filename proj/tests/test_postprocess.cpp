/**
 * @file test_postprocess.cpp
 * @brief Moment extraction, NRMSE, resampling, profiles and front detection
 *        against analytic values and brute-force loops.
 */

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "klshell/postprocess.hpp"

using namespace klshell;
using namespace klshell::post;

namespace {

elastic3d::ElasticField3D plate(std::size_t nz, double h) { return elastic3d::make_field({1.0, 1.0, h, 4, 3, nz}); }

ScalarField2D random_field(std::size_t nx, std::size_t ny, std::mt19937_64& rng, double shift = 0.0) {
    std::normal_distribution<double> g;
    ScalarField2D f({nx, ny, 0.1, 0.1, {0.0, 0.0}});
    for (auto& v : f.values) v = g(rng) + shift;
    return f;
}

double composite_trapezoid(const std::function<double(double)>& f, double a, double b, std::size_t intervals) {
    const double d = (b - a) / static_cast<double>(intervals);
    double s = 0.5 * (f(a) + f(b));
    for (std::size_t k = 1; k < intervals; ++k) s += f(a + d * static_cast<double>(k));
    return s * d;
}

} // namespace

TEST(Postprocess, LinearStressGivesAnalyticMoment) {
    for (std::size_t nz : {2u, 5u, 9u, 13u}) {
        const double h = 0.7, a = 3.5e6;
        auto f = plate(nz, h);
        for (std::size_t k = 0; k < nz; ++k)
            for (std::size_t j = 0; j < 3; ++j)
                for (std::size_t i = 0; i < 4; ++i) f.at({i, j, k})[elastic3d::s_11] = a * f.coord(2, k);
        const double exact = a * h * h * h / 12.0;
        const auto two = extract_moments(f, MomentComponent::xx);
        const auto quad = extract_moments_quadrature(f, MomentComponent::xx);
        for (std::size_t i = 0; i < two.values.size(); ++i) {
            EXPECT_NEAR(two.values[i], exact, 1e-12 * exact);
            EXPECT_NEAR(quad.values[i], exact, 1e-12 * exact);
        }
    }
}

TEST(Postprocess, TwistMomentCarriesMinusSign) {
    auto f = plate(5, 0.4);
    for (std::size_t k = 0; k < 5; ++k) f.at({1, 1, k})[elastic3d::s_12] = 10.0 * f.coord(2, k);
    EXPECT_NEAR(extract_moments(f, MomentComponent::xy)(1, 1), -10.0 * 0.064 / 12.0, 1e-15);
    EXPECT_NEAR(extract_moments_quadrature(f, MomentComponent::xy)(1, 1), -10.0 * 0.064 / 12.0, 1e-15);
}

TEST(Postprocess, TrapezoidRichardsonOracleAgreesWithTwoLayerFormula) {
    // sigma z = a z^2: the trapezoid error is exactly c * dz^2, so one Richardson step is exact
    const double h = 1.0, a = 2.0;
    auto integrand = [&](double z) { return a * z * z; };
    const double t8 = composite_trapezoid(integrand, -h / 2, h / 2, 8);
    const double t16 = composite_trapezoid(integrand, -h / 2, h / 2, 16);
    const double oracle = (4.0 * t16 - t8) / 3.0;
    auto f = plate(9, h);
    for (std::size_t k = 0; k < 9; ++k) f.at({0, 0, k})[elastic3d::s_11] = a * f.coord(2, k);
    EXPECT_NEAR(extract_moments(f, MomentComponent::xx)(0, 0), oracle, 1e-12 * oracle);
    EXPECT_GT(std::abs(t8 - oracle), 1e-3 * oracle); // plain trapezoid alone is visibly off
}

TEST(Postprocess, QuadratureConvergesOnNonlinearProfile) {
    // sigma = sin(3z): exact first moment over [-h/2, h/2]
    const double h = 1.0;
    auto exact = [&] {
        auto F = [](double z) { return std::sin(3.0 * z) / 9.0 - z * std::cos(3.0 * z) / 3.0; };
        return F(h / 2) - F(-h / 2);
    }();
    double prev_err = 0.0;
    for (std::size_t nz : {9u, 17u, 33u}) {
        auto f = plate(nz, h);
        for (std::size_t k = 0; k < nz; ++k) f.at({0, 0, k})[elastic3d::s_22] = std::sin(3.0 * f.coord(2, k));
        const double err = std::abs(extract_moments_quadrature(f, MomentComponent::yy)(0, 0) - exact);
        if (prev_err > 0.0) {
            EXPECT_NEAR(prev_err / err, 4.0, 0.2);
        }
        prev_err = err;
    }
}

TEST(Postprocess, MomentsAreLinearInStress) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    auto s1 = plate(7, 0.5), s2 = plate(7, 0.5), mix = plate(7, 0.5);
    const double alpha = 1.7, beta = -0.3;
    for (std::size_t n = 0; n < s1.data.size(); ++n)
        for (std::size_t c = 0; c < elastic3d::kComponents; ++c) {
            s1.data[n][c] = g(rng);
            s2.data[n][c] = g(rng);
            mix.data[n][c] = alpha * s1.data[n][c] + beta * s2.data[n][c];
        }
    for (auto comp : {MomentComponent::xx, MomentComponent::yy, MomentComponent::xy})
        for (auto fn : {&extract_moments, &extract_moments_quadrature}) {
            const auto a = fn(s1, comp), b = fn(s2, comp), m = fn(mix, comp);
            for (std::size_t i = 0; i < m.values.size(); ++i)
                EXPECT_NEAR(m.values[i], alpha * a.values[i] + beta * b.values[i], 1e-12 * (std::abs(m.values[i]) + 1.0));
        }
}

TEST(Postprocess, NrmseMatchesBruteForce) {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = random_field(100, 100, rng), b = random_field(100, 100, rng, 2.0);
        long double mse = 0.0L, lo = b(0, 0), hi = b(0, 0);
        for (std::size_t i = 0; i < 100; ++i)
            for (std::size_t j = 0; j < 100; ++j) {
                const long double d = static_cast<long double>(a(i, j)) - b(i, j);
                mse += d * d;
                lo = std::min<long double>(lo, b(i, j));
                hi = std::max<long double>(hi, b(i, j));
            }
        mse /= 10000.0L;
        const double oracle = static_cast<double>(std::sqrt(mse) / (hi - lo));
        EXPECT_NEAR(nrmse(a, b), oracle, 1e-14 * oracle);
    }
}

TEST(Postprocess, NrmseProperties) {
    std::mt19937_64 rng(19);
    const auto a = random_field(30, 20, rng), b = random_field(30, 20, rng);
    EXPECT_EQ(nrmse(b, b), 0.0);
    auto a2 = a, b2 = b;
    for (auto& v : a2.values) v = 3.0 * v + 7.0;
    for (auto& v : b2.values) v = 3.0 * v + 7.0;
    EXPECT_NEAR(nrmse(a2, b2), nrmse(a, b), 1e-12);
    ScalarField2D flat({30, 20, 0.1, 0.1, {0, 0}});
    EXPECT_THROW(nrmse(a, flat), NumericalError);
    ScalarField2D other({20, 30, 0.1, 0.1, {0, 0}});
    EXPECT_THROW(nrmse(a, other), ValidationError);
}

TEST(Postprocess, ResampleIdentityAndLinearExactness) {
    std::mt19937_64 rng(23);
    const auto a = random_field(12, 9, rng);
    EXPECT_EQ(resample_to(a, a.geometry).values, a.values);

    ScalarField2D lin({11, 11, 0.1, 0.1, {0.0, 0.0}});
    for (std::size_t j = 0; j < 11; ++j)
        for (std::size_t i = 0; i < 11; ++i) lin(i, j) = 2.0 + 3.0 * lin.geometry.x(i) - 1.5 * lin.geometry.y(j);
    const GridGeometry2D target{17, 13, 0.05, 0.07, {0.1, 0.08}};
    const auto r = resample_to(lin, target);
    for (std::size_t j = 0; j < target.ny; ++j)
        for (std::size_t i = 0; i < target.nx; ++i)
            EXPECT_NEAR(r(i, j), 2.0 + 3.0 * target.x(i) - 1.5 * target.y(j), 1e-13);
    EXPECT_THROW(resample_to(lin, GridGeometry2D{5, 5, 0.5, 0.5, {0.0, 0.0}}), ValidationError);
}

TEST(Postprocess, ResampleErrorIsSecondOrder) {
    auto fn = [](double x, double y) { return std::sin(2.0 * x) * std::cos(3.0 * y); };
    const GridGeometry2D target{37, 37, 1.0 / 36.0, 1.0 / 36.0, {0.0, 0.0}};
    auto err_for = [&](std::size_t n) {
        const double d = 1.0 / static_cast<double>(n - 1);
        ScalarField2D src({n, n, d, d, {0.0, 0.0}});
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) src(i, j) = fn(src.geometry.x(i), src.geometry.y(j));
        const auto r = resample_to(src, target);
        double e = 0.0;
        for (std::size_t j = 0; j < target.ny; ++j)
            for (std::size_t i = 0; i < target.nx; ++i) e = std::max(e, std::abs(r(i, j) - fn(target.x(i), target.y(j))));
        return e;
    };
    const double ratio = err_for(11) / err_for(21);
    EXPECT_NEAR(ratio, 4.0, 0.6);
}

TEST(Postprocess, ProfileMatchesBruteForceBandMean) {
    std::mt19937_64 rng(29);
    const auto f = random_field(41, 31, rng);
    const double line = 1.5, band = 1.0;
    const auto p = extract_profile(f, Axis::x, band, line);
    ASSERT_EQ(p.value.size(), 41u);
    for (std::size_t i = 0; i < 41; ++i) {
        double sum = 0.0;
        int count = 0;
        for (std::size_t j = 0; j < 31; ++j) {
            const double y = 0.1 * static_cast<double>(j);
            if (y >= 1.0 - 1e-9 && y <= 2.0 + 1e-9) {
                sum += f(i, j);
                ++count;
            }
        }
        EXPECT_EQ(count, 11);
        EXPECT_NEAR(p.value[i], sum / count, 1e-14);
        EXPECT_NEAR(p.station[i], 0.1 * static_cast<double>(i), 1e-14);
    }
    const auto py = extract_profile(f, Axis::y, 0.0, 2.0);
    for (std::size_t j = 0; j < 31; ++j) EXPECT_EQ(py.value[j], f(20, j));
}

TEST(Postprocess, ProfileOfUniformAndTransverselyConstantFields) {
    ScalarField2D f({21, 21, 0.5, 0.5, {0.0, 0.0}});
    for (std::size_t j = 0; j < 21; ++j)
        for (std::size_t i = 0; i < 21; ++i) f(i, j) = std::cos(0.4 * static_cast<double>(i));
    const auto p = extract_profile(f, Axis::x);
    for (std::size_t i = 0; i < 21; ++i) EXPECT_NEAR(p.value[i], f(i, 10), 1e-15);
    EXPECT_THROW(extract_profile(f, Axis::x, 30.0), ValidationError);
}

TEST(Postprocess, LeadingEdgeAndRegression) {
    ScalarField2D f({101, 11, 0.1, 0.1, {0.0, 0.0}});
    for (std::size_t i = 0; i <= 73; ++i) f(i, 5) = 1.0 - 0.005 * static_cast<double>(i);
    EXPECT_NEAR(leading_edge_radius(f, Axis::x, {2.0, 0.5}), 5.3, 1e-12);
    const std::vector<double> t = {0.0, 1.0, 2.0, 3.0}, r = {1.0, 3.5, 6.0, 8.5};
    EXPECT_NEAR(regression_slope(t, r), 2.5, 1e-14);
}
