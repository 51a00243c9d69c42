#include "fredholm/grid.hpp"
#include "fredholm/kernels.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace fredholm;

namespace {

double quad(const Grid& g, const Function1& f) { return integrate(g, g.sample(f)); }

}  // namespace

TEST(BuildGrid, TrapezoidThreeNodes) {
    const Grid g = build_grid(0.0, 1.0, QuadRule::trapezoid, 3);
    EXPECT_EQ(g.size(), 3u);
    EXPECT_DOUBLE_EQ(g.node(0), 0.0);
    EXPECT_DOUBLE_EQ(g.node(1), 0.5);
    EXPECT_DOUBLE_EQ(g.node(2), 1.0);
    EXPECT_DOUBLE_EQ(g.weight(0), 0.25);
    EXPECT_DOUBLE_EQ(g.weight(1), 0.5);
    EXPECT_DOUBLE_EQ(g.weight(2), 0.25);
}

TEST(BuildGrid, SimpsonThreeNodes) {
    const Grid g = build_grid(0.0, 1.0, QuadRule::simpson, 3);
    EXPECT_NEAR(g.weight(0), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(g.weight(1), 4.0 / 6.0, 1e-15);
    EXPECT_NEAR(g.weight(2), 1.0 / 6.0, 1e-15);
}

TEST(BuildGrid, NegativeInterval) {
    const Grid g = build_grid(-1.0, 0.0, QuadRule::trapezoid, 3);
    EXPECT_DOUBLE_EQ(g.node(0), -1.0);
    EXPECT_DOUBLE_EQ(g.node(1), -0.5);
    EXPECT_DOUBLE_EQ(g.node(2), 0.0);
    EXPECT_NEAR(g.weight_vector().sum(), 1.0, 1e-15);
}

TEST(BuildGrid, RejectsBadInput) {
    EXPECT_THROW(build_grid(1.0, 0.0, QuadRule::trapezoid, 5), InvalidArgument);
    EXPECT_THROW(build_grid(0.0, 0.0, QuadRule::trapezoid, 5), InvalidArgument);
    EXPECT_THROW(build_grid(0.0, 1.0, QuadRule::simpson, 4), InvalidArgument);
    EXPECT_THROW(build_grid(0.0, 1.0, QuadRule::trapezoid, 1), InvalidArgument);
    EXPECT_THROW(parse_quad_rule("midpoint"), InvalidArgument);
}

TEST(BuildGrid, InvariantsForAllRules) {
    for (QuadRule rule : {QuadRule::trapezoid, QuadRule::simpson, QuadRule::gauss_legendre})
        for (std::size_t n : {3u, 5u, 17u, 65u, 129u}) {
            for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{-1.0, 1.0}, std::pair{0.0, 2.0}, std::pair{-1.0, 0.0}}) {
                const Grid g = build_grid(a, b, rule, n);
                ASSERT_EQ(g.size(), n);
                EXPECT_NEAR(g.weight_vector().sum(), b - a, 1e-12 * (b - a));
                EXPECT_LE(a, g.node(0));
                EXPECT_LE(g.node(n - 1), b);
                for (std::size_t i = 0; i < n; ++i) {
                    EXPECT_GT(g.weight(i), 0.0);
                    if (i > 0) EXPECT_LT(g.node(i - 1), g.node(i));
                }
            }
            EXPECT_EQ(parse_quad_rule(to_string(rule)), rule);
        }
}

TEST(Integrate, LinearIsExactForEveryRule) {
    for (QuadRule rule : {QuadRule::trapezoid, QuadRule::simpson, QuadRule::gauss_legendre})
        EXPECT_NEAR(quad(build_grid(0, 1, rule, 9), [](double x) { return x; }), 0.5, 1e-14);
}

TEST(Integrate, SimpsonExactForCubics) {
    for (std::size_t n : {3u, 5u, 11u})
        EXPECT_NEAR(quad(build_grid(0, 1, QuadRule::simpson, n), [](double x) { return x * x * x; }), 0.25, 1e-15);
}

TEST(Integrate, GaussLegendreFiveNodesSine) {
    const double v = quad(build_grid(0, 1, QuadRule::gauss_legendre, 5), [](double x) { return std::sin(oracle::pi * x); });
    // five nodes are exact to degree nine; the remainder for sin(pi x) is about 4e-8
    EXPECT_NEAR(v, 2.0 / oracle::pi, 1e-7);
    const double v8 = quad(build_grid(0, 1, QuadRule::gauss_legendre, 8), [](double x) { return std::sin(oracle::pi * x); });
    EXPECT_NEAR(v8, 2.0 / oracle::pi, 1e-9);
}

TEST(Integrate, LengthMismatchThrows) {
    const Grid g = build_grid(0, 1, QuadRule::trapezoid, 5);
    EXPECT_THROW(integrate(g, Vector::Ones(4)), InvalidArgument);
    EXPECT_THROW(inner(g, Vector::Ones(5), Vector::Ones(4)), InvalidArgument);
}

TEST(Integrate, ConvergenceOrderByHalving) {
    const double exact = std::exp(1.0) - 1.0;
    auto err = [&](QuadRule rule, std::size_t n) { return std::abs(quad(build_grid(0, 1, rule, n), [](double x) { return std::exp(x); }) - exact); };
    const double trap_ratio = err(QuadRule::trapezoid, 33) / err(QuadRule::trapezoid, 65);
    const double simp_ratio = err(QuadRule::simpson, 17) / err(QuadRule::simpson, 33);
    EXPECT_NEAR(trap_ratio, 4.0, 0.05);
    EXPECT_NEAR(simp_ratio, 16.0, 0.5);
}

TEST(CumulativeWeights, ReproducesRunningIntegral) {
    for (QuadRule rule : {QuadRule::trapezoid, QuadRule::simpson}) {
        const Grid g = build_grid(0, 1, rule, 65);
        const Matrix c = cumulative_weights(g);
        const Vector v = c * g.sample([](double x) { return std::cos(x); });
        for (std::size_t i = 0; i < g.size(); ++i) {
            // a single-panel first row is a trapezoid step even on Simpson grids
            const double tol = rule == QuadRule::trapezoid || i == 1 ? 1e-4 : 1e-9;
            EXPECT_NEAR(v[static_cast<Eigen::Index>(i)], std::sin(g.node(i)), tol);
        }
        EXPECT_TRUE(c.row(0).isZero());
        EXPECT_NEAR((c.row(64).transpose() - g.weight_vector()).norm(), 0.0, 1e-15);
    }
    EXPECT_THROW(cumulative_weights(build_grid(0, 1, QuadRule::gauss_legendre, 8)), InvalidArgument);
}

TEST(DiscretizeKernel, ConstantKernelRows) {
    const Grid g = build_grid(0, 1, QuadRule::trapezoid, 3);
    const DiscreteOperator op = discretize_kernel([](double, double) { return 1.0; }, g, g);
    for (int i = 0; i < 3; ++i) {
        EXPECT_DOUBLE_EQ(op.matrix(i, 0), 0.25);
        EXPECT_DOUBLE_EQ(op.matrix(i, 1), 0.5);
        EXPECT_DOUBLE_EQ(op.matrix(i, 2), 0.25);
    }
}

TEST(DiscretizeKernel, ProductKernelOnOnes) {
    const Grid g = build_grid(0, 1, QuadRule::simpson, 17);
    const DiscreteOperator op = discretize_kernel([](double x, double xi) { return x * xi; }, g, g);
    const Vector v = op.apply(Vector::Ones(17));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(v[static_cast<Eigen::Index>(i)], g.node(i) / 2.0, 1e-14);
}

TEST(DiscretizeKernel, TriangularEigenfunction) {
    const Grid g = build_grid(0, 1, QuadRule::simpson, 257);
    const DiscreteOperator op = discretize_kernel(triangular_kernel, g, g);
    const Vector phi = g.sample([](double x) { return std::sqrt(2.0) * std::sin(oracle::pi * x); });
    const Vector img = op.apply(phi);
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(img[static_cast<Eigen::Index>(i)], std::sqrt(2.0) * oracle::triangular_image_sin(1, g.node(i)), 1e-5);
}

TEST(DiscretizeKernel, NonFiniteValueThrows) {
    const Grid g = build_grid(0, 1, QuadRule::trapezoid, 5);
    EXPECT_THROW(discretize_kernel([](double x, double xi) { return 1.0 / (x - xi); }, g, g), InvalidArgument);
}

TEST(DiscretizeKernel, RectangularGridsAndKernelValues) {
    const Grid rows = build_grid(0, 1, QuadRule::trapezoid, 4);
    const Grid cols = build_grid(-1, 1, QuadRule::gauss_legendre, 6);
    const auto k = [](double x, double xi) { return std::exp(x * xi); };
    const DiscreteOperator op = discretize_kernel(k, rows, cols);
    ASSERT_EQ(op.matrix.rows(), 4);
    ASSERT_EQ(op.matrix.cols(), 6);
    const Matrix kv = op.kernel_values();
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 6; ++j) EXPECT_NEAR(kv(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), k(rows.node(i), cols.node(j)), 1e-14);
    EXPECT_THROW(op.apply(Vector::Ones(4)), InvalidArgument);
}

TEST(DiscretizeKernel, LinearityProperty) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    const Grid g = build_grid(0, 1, QuadRule::simpson, 33);
    const DiscreteOperator op = discretize_kernel([](double x, double xi) { return std::cos(x - 2 * xi); }, g, g);
    for (int trial = 0; trial < 20; ++trial) {
        Vector u(33), v(33);
        for (int i = 0; i < 33; ++i) {
            u[i] = nd(rng);
            v[i] = nd(rng);
        }
        const double a = nd(rng), b = nd(rng);
        const Vector lhs = op.apply(a * u + b * v);
        const Vector rhs = a * op.apply(u) + b * op.apply(v);
        EXPECT_LE((lhs - rhs).cwiseAbs().maxCoeff(), 1e-13 * (1.0 + rhs.cwiseAbs().maxCoeff()));
    }
}

TEST(DiscretizeSplitKernel, VolterraPlusFredholm) {
    const Grid g = build_grid(0, 1, QuadRule::simpson, 129);
    // ∫_0^x 1 dxi + ∫_0^1 xi dxi = x + 1/2 applied to ones
    const DiscreteOperator op = discretize_split_kernel([](double, double) { return 1.0; }, [](double, double xi) { return xi; }, g);
    const Vector v = op.apply(Vector::Ones(129));
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(v[static_cast<Eigen::Index>(i)], g.node(i) + 0.5, 1e-12);
    // ∫_0^x (x - xi) sin(xi) dxi = x - sin(x)
    const DiscreteOperator vo = discretize_split_kernel([](double x, double xi) { return x - xi; }, nullptr, g);
    const Vector w = vo.apply(g.sample([](double x) { return std::sin(x); }));
    for (std::size_t i = 0; i < g.size(); ++i)
        EXPECT_NEAR(w[static_cast<Eigen::Index>(i)], g.node(i) - std::sin(g.node(i)), i == 1 ? 1e-7 : 1e-9);
}
