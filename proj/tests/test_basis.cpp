#include "tumorsim/basis.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

namespace tumorsim {
namespace {

using std::numbers::pi;

CosineBasis make_1d(int m = 32, int n = 96) { return CosineBasis(BasisSpec{1, m, n}); }

GridField sample(const CosineBasis& b, auto&& f)
{
    GridField g = b.zero_grid();
    for (std::size_t i = 0; i < b.node_count(); ++i) {
        const auto [x, y] = b.node_coords(i);
        g.values[i] = f(x, y);
    }
    return g;
}

TEST(BasisSpec, DealiasingRule)
{
    EXPECT_EQ(BasisSpec::min_grid(32), 50);
    EXPECT_EQ(BasisSpec::min_grid(1), 3);
    EXPECT_NO_THROW((BasisSpec{1, 32, 96}.validate()));
    EXPECT_THROW((BasisSpec{1, 32, 49}.validate()), std::invalid_argument);
    EXPECT_THROW((BasisSpec{3, 4, 16}.validate()), std::invalid_argument);
    EXPECT_THROW((BasisSpec{1, 0, 16}.validate()), std::invalid_argument);
}

TEST(Forward, ConstantField)
{
    const auto b = make_1d();
    const ModalField a = b.forward(b.constant_grid(1.0));
    EXPECT_NEAR(a.coeffs[0], 1.0, 1e-14);
    for (std::size_t k = 1; k < a.coeffs.size(); ++k) {
        EXPECT_NEAR(a.coeffs[k], 0.0, 1e-14);
    }
}

TEST(Forward, CosineModeAgainstDenseQuadrature)
{
    // <cos(pi x), sqrt(2) cos(pi x)> on 1e4 midpoint nodes.
    const double ref = oracle::midpoint_integral(
        [](double x) { return std::cos(pi * x) * std::sqrt(2.0) * std::cos(pi * x); }, 10000);
    EXPECT_NEAR(ref, 1.0 / std::sqrt(2.0), 1e-10);

    const auto b = make_1d();
    const ModalField a = b.forward(sample(b, [](double x, double) { return std::cos(pi * x); }));
    EXPECT_NEAR(a.coeffs[1], ref, 1e-10);
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
        if (k != 1) {
            EXPECT_NEAR(a.coeffs[k], 0.0, 1e-13);
        }
    }
}

TEST(Forward, SizeMismatchThrows)
{
    const auto b = make_1d(4, 8);
    EXPECT_THROW(b.forward(GridField{std::vector<double>(7, 0.0)}), std::invalid_argument);
    EXPECT_THROW(b.inverse(ModalField{std::vector<double>(4, 0.0)}), std::invalid_argument);
}

TEST(Orthonormality, GramMatrixIsIdentity)
{
    for (int m : {1, 8, 32}) {
        const int n = m + 1;  // the weakest admissible grid
        const CosineBasis b(BasisSpec{1, m, n});
        for (int k = 0; k <= m; ++k) {
            for (int l = 0; l <= m; ++l) {
                double s = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double x = b.node(j);
                    s += CosineBasis::basis_value(k, x) * CosineBasis::basis_value(l, x) / n;
                }
                EXPECT_NEAR(s, k == l ? 1.0 : 0.0, 1e-12) << "k=" << k << " l=" << l << " m=" << m;
            }
        }
    }
}

TEST(RoundTrip, RandomCoefficients1DAnd2D)
{
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (const BasisSpec spec : {BasisSpec{1, 32, 96}, BasisSpec{2, 8, 14}}) {
        const CosineBasis b(spec);
        ModalField a = b.zero_modal();
        for (auto& c : a.coeffs) {
            c = nd(rng);
        }
        const GridField g = b.inverse(a);
        const ModalField back = b.forward(g);
        for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
            EXPECT_NEAR(back.coeffs[k], a.coeffs[k], 1e-12);
        }
        // Parseval on the span and mean extraction.
        double quad = 0.0;
        for (double v : g.values) {
            quad += v * v * b.weight();
        }
        EXPECT_NEAR(quad, CosineBasis::l2_norm_sq(a), 1e-10 * quad);
        EXPECT_NEAR(b.mean(g), CosineBasis::mean(a), 1e-12);
        // inverse(forward(g)) reproduces g in the span.
        const GridField g2 = b.inverse(back);
        for (std::size_t i = 0; i < g.values.size(); ++i) {
            EXPECT_NEAR(g2.values[i], g.values[i], 1e-12);
        }
    }
}

TEST(Laplacian, Eigenvalues)
{
    const auto b = make_1d();
    ModalField a = b.zero_modal();
    a.coeffs[0] = 1.0;
    a.coeffs[1] = 1.0;
    a.coeffs[2] = 1.0;
    const ModalField l = b.laplacian(a);
    EXPECT_EQ(l.coeffs[0], 0.0);
    EXPECT_NEAR(l.coeffs[1], -pi * pi, 1e-12);
    EXPECT_NEAR(l.coeffs[2], -4.0 * pi * pi, 1e-12);

    const CosineBasis b2(BasisSpec{2, 3, 6});
    // mode (kx=1, ky=2)
    EXPECT_NEAR(b2.eigenvalue(2 * 4 + 1), 5.0 * pi * pi, 1e-12);
}

TEST(BoundaryTrace, OneDimensionalExamples)
{
    const auto b = make_1d(8, 16);
    const auto c = b.boundary_trace(b.constant_modal(2.5));
    EXPECT_NEAR(c.values[0], 2.5, 1e-14);
    EXPECT_NEAR(c.values[1], 2.5, 1e-14);

    // cos(pi x) = e_1 / sqrt(2)
    ModalField a = b.zero_modal();
    a.coeffs[1] = 1.0 / std::sqrt(2.0);
    auto t = b.boundary_trace(a);
    EXPECT_NEAR(t.values[0], 1.0, 1e-14);
    EXPECT_NEAR(t.values[1], -1.0, 1e-14);

    a = b.zero_modal();
    a.coeffs[2] = 1.0 / std::sqrt(2.0);
    t = b.boundary_trace(a);
    EXPECT_NEAR(t.values[0], 1.0, 1e-14);
    EXPECT_NEAR(t.values[1], 1.0, 1e-14);
}

TEST(BoundaryLoad, OneDimensionalExamples)
{
    const auto b = make_1d(8, 16);
    EXPECT_NEAR(b.boundary_load(BoundaryField{{1.0, 1.0}}).coeffs[0], 2.0, 1e-14);
    // Endpoint arithmetic: 1 * e_1(0) + (-1) * e_1(1) = sqrt2 + sqrt2.
    const double expected = 1.0 * std::sqrt(2.0) + (-1.0) * (-std::sqrt(2.0));
    EXPECT_NEAR(b.boundary_load(BoundaryField{{1.0, -1.0}}).coeffs[1], expected, 1e-14);
    EXPECT_NEAR(expected, 2.0 * std::sqrt(2.0), 1e-15);
    for (double v : b.boundary_load(BoundaryField{{0.0, 0.0}}).coeffs) {
        EXPECT_EQ(v, 0.0);
    }
}

TEST(Boundary, TwoDimensionalTraceAndLoad)
{
    const CosineBasis b(BasisSpec{2, 4, 8});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> nd;
    ModalField a = b.zero_modal();
    for (auto& c : a.coeffs) {
        c = nd(rng);
    }
    const BoundaryField t = b.boundary_trace(a);
    ASSERT_EQ(t.values.size(), 32u);
    const int n = 8;
    for (int j = 0; j < n; ++j) {
        const double s = b.node(j);
        EXPECT_NEAR(t.values[0 * n + j], b.evaluate(a, s, 0.0), 1e-12);
        EXPECT_NEAR(t.values[1 * n + j], b.evaluate(a, s, 1.0), 1e-12);
        EXPECT_NEAR(t.values[2 * n + j], b.evaluate(a, 0.0, s), 1e-12);
        EXPECT_NEAR(t.values[3 * n + j], b.evaluate(a, 1.0, s), 1e-12);
    }
    // Load is the adjoint of trace under the edge quadrature: <trace(a), v> = <a, load(v)>.
    BoundaryField v{std::vector<double>(32)};
    for (auto& x : v.values) {
        x = nd(rng);
    }
    double lhs = 0.0;
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        lhs += t.values[i] * v.values[i] * b.boundary_weight();
    }
    const ModalField l = b.boundary_load(v);
    double rhs = 0.0;
    for (std::size_t k = 0; k < a.coeffs.size(); ++k) {
        rhs += a.coeffs[k] * l.coeffs[k];
    }
    EXPECT_NEAR(lhs, rhs, 1e-12);
    // Constant unit field: perimeter 4.
    EXPECT_NEAR(b.boundary_load(BoundaryField{std::vector<double>(32, 1.0)}).coeffs[0], 4.0, 1e-12);
}

TEST(GradientNorm, MatchesSpectralDefinition)
{
    const auto b = make_1d(8, 16);
    ModalField a = b.zero_modal();
    a.coeffs[3] = 0.5;
    // u = 0.5 sqrt2 cos(3 pi x): int |u'|^2 = 0.25 * 9 pi^2
    EXPECT_NEAR(b.gradient_norm_sq(a), 0.25 * 9.0 * pi * pi, 1e-12);
}

}  // namespace
}  // namespace tumorsim
