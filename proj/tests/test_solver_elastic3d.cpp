/**
 * @file test_solver_elastic3d.cpp
 * @brief 3D elasticity reference solver: spectra, traction-free faces and
 *        through-thickness parity.
 */

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "klshell/elastic3d.hpp"
#include "test_support.hpp"

using namespace klshell;
using namespace klshell::elastic3d;

namespace {

Eigen::MatrixXd to_eigen(const SquareMatrix<kComponents>& a) {
    Eigen::MatrixXd m(kComponents, kComponents);
    for (std::size_t r = 0; r < kComponents; ++r)
        for (std::size_t c = 0; c < kComponents; ++c) m(r, c) = a(r, c);
    return m;
}

double max_stress(const ElasticField3D& f) {
    double m = 0.0;
    for (const auto& u : f.data)
        for (std::size_t c = s_11; c < kComponents; ++c) m = std::max(m, std::abs(u[c]));
    return m;
}

} // namespace

TEST(Elastic3D, EigenvaluesAreBulkSpeeds) {
    const Material m = Material::steel(0.4);
    const auto c = derive_constants(m);
    const auto d = decompose_3d(build_matrices_3d(m));
    for (const auto& dk : d) {
        const std::array<double, 9> expected = {c.cp_3d, c.cs_3d, c.cs_3d, 0, 0, 0, -c.cs_3d, -c.cs_3d, -c.cp_3d};
        for (std::size_t i = 0; i < kComponents; ++i) EXPECT_NEAR(dk.eigenvalues[i], expected[i], 1e-9 * c.cp_3d);
    }
}

TEST(Elastic3D, SpectraAgreeWithGeneralSolver) {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 50; ++k) {
        const Material m = test_support::random_material(rng);
        const auto s = build_matrices_3d(m);
        const auto d = decompose_3d(s);
        const double cp = derive_constants(m).cp_3d;
        for (std::size_t axis = 0; axis < 3; ++axis) {
            Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(s.a[axis]), false);
            std::vector<double> ref;
            for (int i = 0; i < 9; ++i) {
                EXPECT_LT(std::abs(es.eigenvalues()[i].imag()), 1e-9 * cp);
                ref.push_back(es.eigenvalues()[i].real());
            }
            std::sort(ref.rbegin(), ref.rend());
            for (std::size_t i = 0; i < 9; ++i) EXPECT_NEAR(d[axis].eigenvalues[i], ref[i], 1e-9 * cp);
            const Eigen::MatrixXd diff = to_eigen(d[axis].reconstruct()) - to_eigen(s.a[axis]);
            EXPECT_LT(diff.norm(), 1e-12 * to_eigen(s.a[axis]).norm());
        }
    }
}

TEST(Elastic3D, MatricesFollowFromHookesLaw) {
    const Material m{3.0, 0.2, 2.0, 1.0};
    const auto c = derive_constants(m);
    const auto s = build_matrices_3d(m);
    // d sigma_11/dt = (lambda + 2 mu) dv1/dx + lambda (dv2/dy + dv3/dz)
    EXPECT_DOUBLE_EQ(s.a[0](s_11, v_1), -(c.lambda + 2.0 * c.mu));
    EXPECT_DOUBLE_EQ(s.a[1](s_11, v_2), -c.lambda);
    EXPECT_DOUBLE_EQ(s.a[2](s_13, v_1), -c.mu);
    EXPECT_DOUBLE_EQ(s.a[0](s_13, v_3), -c.mu);
    EXPECT_DOUBLE_EQ(s.a[2](v_3, s_33), -0.5);
    EXPECT_DOUBLE_EQ(s.a[1](v_1, s_12), -0.5);
    EXPECT_EQ(s.a[0](s_23, v_2), 0.0);
}

TEST(Elastic3D, FreeFacesStayTractionFree) {
    const Material m = Material::steel(0.4);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    auto f = make_field({2.0, 2.0, 0.4, 11, 11, 5});
    for (auto& u : f.data)
        for (auto& v : u) v = g(rng);
    double worst = 0.0;
    Numerics n;
    run_3d(f, m, 5e-5, {}, n, [&](const ElasticField3D& s, std::size_t step) {
        if (step == 0) return;
        const double scale = max_stress(s);
        for (std::size_t k : {std::size_t{0}, s.n[2] - 1})
            for (std::size_t j = 0; j < s.n[1]; ++j)
                for (std::size_t i = 0; i < s.n[0]; ++i)
                    for (std::size_t c : {s_13, s_23, s_33}) worst = std::max(worst, std::abs(s.at({i, j, k})[c]) / scale);
    });
    EXPECT_LE(worst, 1e-10);
}

TEST(Elastic3D, GradientImpulseIsOddThroughThickness) {
    const Material m = Material::steel(0.4);
    auto f = init_3d({4.0, 4.0, 0.4, 41, 41, 5}, GradientColumn{v_1, 100.0, {2.0, 2.0}});
    auto res = run_3d(f, m, 2e-4, {}, Numerics{});
    const auto& r = res.final_field;
    const std::size_t nz = r.n[2];
    double scale1 = 0.0, scale3 = 0.0;
    for (const auto& u : r.data) {
        scale1 = std::max(scale1, std::abs(u[v_1]));
        scale3 = std::max(scale3, std::abs(u[v_3]));
    }
    ASSERT_GT(scale1, 0.0);
    ASSERT_GT(scale3, 0.0);
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < r.n[1]; ++j)
            for (std::size_t i = 0; i < r.n[0]; ++i) {
                const auto& a = r.at({i, j, k});
                const auto& b = r.at({i, j, nz - 1 - k});
                EXPECT_NEAR(a[v_1], -b[v_1], 1e-9 * scale1);
                EXPECT_NEAR(a[v_3], b[v_3], 1e-9 * scale3); // transverse velocity is even for bending
            }
}

TEST(Elastic3D, MidplaneImpulseIsEvenThroughThickness) {
    const Material m = Material::steel(0.4);
    auto f = init_3d({4.0, 4.0, 0.4, 41, 41, 5}, PointVelocity{v_1, 100.0, {2.0, 2.0}, 0.0});
    auto res = run_3d(f, m, 2e-4, {}, Numerics{});
    const auto& r = res.final_field;
    const std::size_t nz = r.n[2];
    double scale = 0.0;
    for (const auto& u : r.data) scale = std::max(scale, std::abs(u[v_1]));
    for (std::size_t k = 0; k < nz; ++k)
        for (std::size_t j = 0; j < r.n[1]; ++j)
            for (std::size_t i = 0; i < r.n[0]; ++i) {
                EXPECT_NEAR(r.at({i, j, k})[v_1], r.at({i, j, nz - 1 - k})[v_1], 1e-9 * scale);
                EXPECT_NEAR(r.at({i, j, k})[v_3], -r.at({i, j, nz - 1 - k})[v_3], 1e-9 * scale);
            }
}

TEST(Elastic3D, ZeroInitialConditionStaysZero) {
    auto res = run_3d(init_3d({2.0, 2.0, 0.4, 11, 11, 5}, ZeroIC{}), Material::steel(0.4), 1e-4, {}, Numerics{});
    for (const auto& u : res.final_field.data)
        for (double v : u) EXPECT_EQ(v, 0.0);
}

TEST(Elastic3D, SlicesHaveExpectedGeometry) {
    auto f = make_field({2.0, 3.0, 0.4, 11, 16, 6});
    for (std::size_t k = 0; k < 6; ++k)
        for (std::size_t j = 0; j < 16; ++j)
            for (std::size_t i = 0; i < 11; ++i) f.at({i, j, k})[v_1] = static_cast<double>(k);
    const auto q = quantity("v_1");
    const auto mid = slice_mid(f, q);
    EXPECT_EQ(mid.nx(), 11u);
    EXPECT_EQ(mid.ny(), 16u);
    EXPECT_DOUBLE_EQ(mid(3, 4), 2.5);
    const auto xz = slice_xz(f, 2, q);
    EXPECT_EQ(xz.ny(), 6u);
    EXPECT_DOUBLE_EQ(xz.geometry.origin[1], -0.2);
    EXPECT_DOUBLE_EQ(xz(0, 5), 5.0);
    EXPECT_THROW(slice_from_string("diagonal"), ValidationError);
}

TEST(Elastic3D, ThreadCountDoesNotChangeBits) {
    const Material m = Material::steel(0.4);
    auto f = init_3d({2.0, 2.0, 0.4, 21, 17, 5}, PointVelocity{v_1, 100.0, {1.0, 1.0}, 0.1});
    Numerics a, b;
    b.threads = 4;
    auto ra = run_3d(f, m, 5e-5, {}, a);
    auto rb = run_3d(f, m, 5e-5, {}, b);
    EXPECT_EQ(ra.final_field.data, rb.final_field.data);
}
