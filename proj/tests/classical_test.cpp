#include "fredholm/classical.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace fredholm;

namespace {

const double pi = std::numbers::pi;

struct EigenSetup {
    Grid g;
    DiscreteOperator a;
    SpectralBasis basis;
    explicit EigenSetup(std::size_t n = 257)
        : g(build_grid(0, 1, QuadRule::simpson, n)),
          a(discretize_kernel(triangular_kernel, g, g)),
          basis(canonical_spectrum(SpectrumKind::triangular_unit, 32)) {}
    Vector mode(int m) const { return g.sample([m](double x) { return std::sqrt(2.0) * std::sin(m * pi * x); }); }
    Vector image(int m) const { return g.sample([m](double x) { return oracle::triangular_image_sin(m, x); }); }
};

double rel(const Grid& g, const Vector& v, const Vector& ref) { return l2_norm(g, v - ref) / l2_norm(g, ref); }

IterationParams params(IterationScheme s, double step, int max_iters = 1000) {
    IterationParams p;
    p.scheme = s;
    p.step = step;
    p.max_iters = max_iters;
    return p;
}

}  // namespace

TEST(Lavrentiev, ClosedFormCoefficient) {
    const EigenSetup s;
    for (double alpha : {1e-2, 1e-3, 1e-4}) {
        const MethodResult r = lavrentiev_solve(s.a, s.image(1), RegularizationParams{alpha, {}, RegularizationVariant::lavrentiev});
        const double c = inner(s.g, r.solution, s.mode(1)) * std::sqrt(2.0);
        EXPECT_NEAR(c * (1 + alpha * pi * pi), 1.0, 1e-3) << alpha;
        EXPECT_TRUE(r.converged);
        EXPECT_EQ(r.residual_history.size(), 1u);
    }
    const MethodResult r = lavrentiev_solve(s.a, s.image(1), RegularizationParams{1e-3, {}, RegularizationVariant::lavrentiev});
    // the O(h^2) kink error of the discrete kernel is amplified by 1/alpha at single nodes
    EXPECT_NEAR(r.solution[64], 0.99023 * std::sin(pi * 0.25), 2e-3);
}

TEST(Lavrentiev, PerModeFilterFactors) {
    const EigenSetup s;
    const double alpha = 1e-3;
    const Vector f = s.image(1) + s.image(2) - 0.5 * s.image(3);
    const MethodResult r = lavrentiev_solve(s.a, f, RegularizationParams{alpha, {}, RegularizationVariant::lavrentiev});
    const double exact[] = {1.0, 1.0, -0.5};
    for (int m = 1; m <= 3; ++m) {
        const double lam = m * m * pi * pi;
        const double filter = (1.0 / lam) / (alpha + 1.0 / lam);
        EXPECT_NEAR(inner(s.g, r.solution, s.mode(m)) * std::sqrt(2.0), filter * exact[m - 1], 2e-3 * std::abs(exact[m - 1]));
    }
}

TEST(Lavrentiev, ZeroDataAndLargeAlpha) {
    const EigenSetup s(65);
    const RegularizationParams p{1e-3, {}, RegularizationVariant::lavrentiev};
    EXPECT_EQ(lavrentiev_solve(s.a, Vector::Zero(65), p).solution, Vector::Zero(65));
    const Vector f = s.g.sample([](double x) { return 1.0 + x; });
    const MethodResult big = lavrentiev_solve(s.a, f, RegularizationParams{1e6, {}, RegularizationVariant::lavrentiev});
    EXPECT_LE(l2_norm(s.g, big.solution), l2_norm(s.g, f) / 1e6 * (1 + 1e-9));
    EXPECT_THROW(lavrentiev_solve(s.a, f, RegularizationParams{0.0, {}, RegularizationVariant::lavrentiev}), InvalidArgument);
}

TEST(Lavrentiev, SingularShiftThrows) {
    const Grid g = build_grid(0, 1, QuadRule::simpson, 33);
    // A = -I exactly (kernel concentrated on the diagonal), so alpha = 1 makes alpha I + A singular
    DiscreteOperator a{-Matrix::Identity(33, 33), g, g};
    EXPECT_THROW(lavrentiev_solve(a, Vector::Ones(33), RegularizationParams{1.0, {}, RegularizationVariant::lavrentiev}),
                 SingularSystemError);
}

TEST(Lavrentiev, StabilizedVariant) {
    const EigenSetup s(129);
    const Vector f = s.image(1);
    // p0 = 1 reproduces plain Lavrentiev
    const MethodResult plain = lavrentiev_solve(s.a, f, RegularizationParams{1e-3, {}, RegularizationVariant::lavrentiev});
    const MethodResult one =
        lavrentiev_solve(s.a, f, RegularizationParams{1e-3, [](double) { return 1.0; }, RegularizationVariant::stabilized_p0});
    EXPECT_LE((plain.solution - one.solution).cwiseAbs().maxCoeff(), 1e-13);
    // variable p0: the discrete equation holds
    const auto p0 = [](double x) { return 1.0 + x; };
    const MethodResult var = lavrentiev_solve(s.a, f, RegularizationParams{1e-3, p0, RegularizationVariant::stabilized_p0});
    const Vector lhs = 1e-3 * s.g.sample(p0).cwiseProduct(var.solution) + s.a.matrix * var.solution;
    EXPECT_LE((lhs - f).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_THROW(lavrentiev_solve(s.a, f, RegularizationParams{1e-3, {}, RegularizationVariant::stabilized_p0}), InvalidArgument);
}

TEST(Quasisolution, InactiveConstraint) {
    const EigenSetup s(129);
    const double beta = 0.6;
    const QuasiSolution q = quasisolution_solve(s.basis, [&](double x) { return beta * std::sqrt(2.0) * oracle::triangular_image_sin(1, x); },
                                                1.0, 10, s.g);
    EXPECT_EQ(q.lagrange, 0.0);
    EXPECT_LE((q.result.solution - beta * s.mode(1)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Quasisolution, ActiveConstraint) {
    const EigenSetup s(129);
    const double beta = 2.0, R = 0.75;
    const QuasiSolution q = quasisolution_solve(s.basis, [&](double x) { return beta * std::sqrt(2.0) * oracle::triangular_image_sin(1, x); },
                                                R, 10, s.g);
    EXPECT_GT(q.lagrange, 0.0);
    double norm = 0.0;
    for (double c : q.coefficients) norm += c * c;
    EXPECT_NEAR(std::sqrt(norm), R, 1e-10);
    EXPECT_NEAR(l2_norm(s.g, q.result.solution), R, 1e-8);
    EXPECT_THROW(quasisolution_solve(s.basis, [](double) { return 1.0; }, 0.0, 10, s.g), InvalidArgument);
}

TEST(Quasisolution, LargeRadiusMatchesPicard) {
    const EigenSetup s(129);
    const auto f = [](double x) { return oracle::triangular_image_sin(1, x) + 0.3 * oracle::triangular_image_sin(2, x); };
    const QuasiSolution q = quasisolution_solve(s.basis, f, 1e9, 12, s.g);
    const Vector ps = picard_solve(s.basis, f, 12).samples(s.g);
    EXPECT_LE((q.result.solution - ps).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Quasisolution, NormNeverExceedsRadius) {
    const EigenSetup s(65);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1), ur(0.01, 3);
    for (int trial = 0; trial < 25; ++trial) {
        const double a = u(rng), b = u(rng), c = u(rng), R = ur(rng);
        const auto f = [=](double x) { return a * x + b * x * x + c * std::cos(5 * x); };
        const QuasiSolution q = quasisolution_solve(s.basis, f, R, 16, s.g);
        double norm = 0.0;
        for (double v : q.coefficients) norm += v * v;
        EXPECT_LE(std::sqrt(norm), R + 1e-8);
    }
}

TEST(Fridman, OneStepAnnihilation) {
    const EigenSetup s;
    IterationParams p = params(IterationScheme::fridman, pi * pi, 1);
    const MethodResult r = fridman_iterate(s.a, s.image(1), p, Vector::Zero(257));
    const Vector exact = s.g.sample([](double x) { return std::sin(pi * x); });
    EXPECT_LE(rel(s.g, r.solution, exact), 1e-6);
    EXPECT_EQ(r.iterations_used, 1);
    EXPECT_EQ(r.residual_history.size(), 2u);
}

TEST(Fridman, ZeroDataAnnihilatesMode) {
    const EigenSetup s;
    const MethodResult r = fridman_iterate(s.a, Vector::Zero(257), params(IterationScheme::fridman, pi * pi, 1), s.mode(1));
    EXPECT_LE(l2_norm(s.g, r.solution), 1e-4);
}

TEST(Fridman, StepValidation) {
    const EigenSetup s(65);
    IterationParams p = params(IterationScheme::fridman, 3 * pi * pi);
    p.lambda1 = pi * pi;
    EXPECT_THROW(fridman_iterate(s.a, s.image(1), p, Vector::Zero(65)), InvalidArgument);
    p.step = 1.9 * pi * pi;
    EXPECT_NO_THROW(fridman_iterate(s.a, s.image(1), p, Vector::Zero(65)));
    // without a known lambda1 the estimate only warns
    IterationParams q = params(IterationScheme::fridman, 3 * pi * pi, 3);
    const MethodResult r = fridman_iterate(s.a, s.image(1), q, Vector::Zero(65));
    EXPECT_FALSE(r.warnings.empty());
    EXPECT_THROW(fridman_iterate(s.a, s.image(1), params(IterationScheme::fridman, -1.0), Vector::Zero(65)), InvalidArgument);
}

TEST(Fridman, ModeErrorsNonIncreasing) {
    const EigenSetup s(129);
    const Vector f = s.image(1) + s.image(2) + s.image(3);
    IterationParams p = params(IterationScheme::fridman, 1.5 * pi * pi, 30);
    p.record_history = true;
    p.stop.fallback_tol = 0.0;
    const MethodResult r = fridman_iterate(s.a, f, p, Vector::Zero(129));
    const ModeDiagnostic d = mode_diagnostic(s.basis, r.history, s.g, 3);
    for (Eigen::Index m = 0; m < 3; ++m) {
        const double exact = inner(s.g, s.g.sample([m](double x) { return std::sin((m + 1) * pi * x); }), s.mode(static_cast<int>(m + 1)));
        for (Eigen::Index i = 1; i < d.coefficients.rows(); ++i)
            EXPECT_LE(std::abs(d.coefficients(i, m) - exact), std::abs(d.coefficients(i - 1, m) - exact) + 1e-4);
    }
}

TEST(Landweber, ModeContraction) {
    const EigenSetup s(129);
    const double nu = 1.0 / normal_operator_norm(s.a);
    IterationParams p = params(IterationScheme::landweber, nu, 6);
    p.record_history = true;
    p.stop.fallback_tol = 0.0;
    const Vector f = s.image(2);
    const MethodResult r = landweber_iterate(s.a, f, p, Vector::Zero(129));
    const ModeDiagnostic d = mode_diagnostic(s.basis, r.history, s.g, 2);
    const double lam2 = 4 * pi * pi;
    EXPECT_NEAR(d.ratios[1], 1.0 - nu / (lam2 * lam2), 1e-3);
}

TEST(Landweber, ZeroStaysZero) {
    const EigenSetup s(65);
    const MethodResult r = landweber_iterate(s.a, Vector::Zero(65), params(IterationScheme::landweber, 1.0 / normal_operator_norm(s.a), 5),
                                             Vector::Zero(65));
    EXPECT_EQ(r.solution, Vector::Zero(65));
}

TEST(Landweber, NonsymmetricKernel) {
    const Grid g = build_grid(0, 1, QuadRule::simpson, 129);
    const DiscreteOperator a = discretize_kernel([](double x, double xi) { return x * xi * xi; }, g, g);
    // psi* = xi^2 spans the range of A*, so it is the minimum-norm solution Landweber converges to
    const Vector exact = g.sample([](double x) { return x * x; });
    const Vector f = a.apply(exact);
    IterationParams p = params(IterationScheme::landweber, 1.0 / normal_operator_norm(a), 10000);
    p.stop.fallback_tol = 1e-13;
    const MethodResult r = landweber_iterate(a, f, p, Vector::Zero(129));
    EXPECT_LE(r.iterations_used, 10000);
    EXPECT_LE((r.solution - exact).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_THROW(landweber_iterate(a, f, params(IterationScheme::landweber, 3.0 / normal_operator_norm(a)), Vector::Zero(129)),
                 InvalidArgument);
}

TEST(Averaged, ZeroData) {
    const EigenSetup s(65);
    const MethodResult r = averaged_iterate(s.a, Vector::Zero(65), params(IterationScheme::averaged, 1.0, 10), Vector::Zero(65));
    EXPECT_EQ(r.solution, Vector::Zero(65));
}

TEST(Averaged, ErrorBoundedByWindowMax) {
    const EigenSetup s(129);
    const Vector f = s.image(1);
    const Vector exact = s.g.sample([](double x) { return std::sin(pi * x); });
    IterationParams pf = params(IterationScheme::fridman, 1.0, 40);
    pf.record_history = true;
    pf.stop.fallback_tol = 0.0;
    IterationParams pa = params(IterationScheme::averaged, 1.0, 40);
    pa.record_history = true;
    pa.stop.fallback_tol = 0.0;
    const MethodResult fr = fridman_iterate(s.a, f, pf, Vector::Zero(129));
    const MethodResult av = averaged_iterate(s.a, f, pa, Vector::Zero(129));
    ASSERT_EQ(fr.history.size(), av.history.size());
    double window_max = 0.0;
    for (std::size_t m = 0; m < av.history.size(); ++m) {
        window_max = std::max(window_max, l2_norm(s.g, fr.history[m] - exact));
        EXPECT_LE(l2_norm(s.g, av.history[m] - exact), window_max + 1e-12);
    }
    for (std::size_t m = 11; m < av.residual_history.size(); ++m)
        EXPECT_LE(av.residual_history[m], av.residual_history[m - 1] + 1e-15);
}

TEST(Implicit, ModeRatio) {
    const EigenSetup s(129);
    const double alpha = 0.05;
    IterationParams p = params(IterationScheme::implicit, alpha, 8);
    p.record_history = true;
    p.stop.fallback_tol = 0.0;
    const MethodResult r = implicit_iterate(s.a, s.image(1), p, Vector::Zero(129));
    const ModeDiagnostic d = mode_diagnostic(s.basis, r.history, s.g, 1);
    const double l1 = pi * pi;
    EXPECT_NEAR(d.ratios[0], alpha * l1 / (alpha * l1 + 1), 1e-3);
}

TEST(Implicit, FixedPointAndAlphaComparison) {
    const EigenSetup s(129);
    const Vector f = s.a.apply(s.mode(1) + 0.5 * s.mode(2));
    IterationParams p = params(IterationScheme::implicit, 1e-2, 20000);
    p.stop.fallback_tol = 1e-13;
    const MethodResult r10 = implicit_iterate(s.a, f, p, Vector::Zero(129));
    EXPECT_TRUE(r10.converged);
    EXPECT_LE(residual_norm(s.a, f, r10.solution), 1e-10);
    p.step = 100.0;
    p.max_iters = 50;
    p.stop.fallback_tol = 0.0;
    IterationParams p10 = p;
    p10.step = 10.0;
    const MethodResult a10 = implicit_iterate(s.a, f, p10, Vector::Zero(129));
    const MethodResult a100 = implicit_iterate(s.a, f, p, Vector::Zero(129));
    EXPECT_LT(a10.residual_history.back(), a100.residual_history.back());
    EXPECT_THROW(implicit_iterate(s.a, f, params(IterationScheme::implicit, 0.0), Vector::Zero(129)), InvalidArgument);
}

TEST(SteepestDescent, SingleModeErrorInOneStep) {
    const EigenSetup s(129);
    const Vector exact = s.mode(1);
    const Vector f = s.a.apply(exact);
    // an exact eigenvector of the discrete operator: W^{-1/2} u for u an eigenvector of W^{1/2} K W^{1/2}
    const Vector sw = s.g.weight_vector().cwiseSqrt();
    Matrix sym = sw.asDiagonal() * s.a.kernel_values() * sw.asDiagonal();
    sym = 0.5 * (sym + sym.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    const Vector v = sw.cwiseInverse().asDiagonal() * es.eigenvectors().col(127);
    const MethodResult r = steepest_descent_iterate(s.a, f, params(IterationScheme::steepest_descent, 0, 1), exact + 0.3 * v);
    EXPECT_LE(l2_norm(s.g, r.solution - exact), 1e-6);
}

TEST(SteepestDescent, ExactStartTerminates) {
    const EigenSetup s(129);
    const Vector exact = s.mode(1);
    const MethodResult r = steepest_descent_iterate(s.a, s.a.apply(exact), params(IterationScheme::steepest_descent, 0), exact);
    EXPECT_EQ(r.iterations_used, 0);
    EXPECT_TRUE(r.converged);
}

TEST(SteepestDescent, MonotoneWithNoise) {
    const EigenSetup s(129);
    const Vector f0 = s.image(1);
    const Vector f = inject_noise(f0, NoiseSpec{0.01 * l2_norm(s.g, f0), 3}, s.g);
    IterationParams p = params(IterationScheme::steepest_descent, 0, 300);
    p.stop.fallback_tol = 0.0;
    const MethodResult r = steepest_descent_iterate(s.a, f, p, Vector::Zero(129));
    for (std::size_t i = 1; i < r.residual_history.size(); ++i) EXPECT_LE(r.residual_history[i], r.residual_history[i - 1] * (1 + 1e-12));
}

TEST(Stopping, DiscrepancyRuleOnNoisyEigenProblem) {
    const EigenSetup s(129);
    const Vector f0 = s.image(1);
    const double delta = 0.01 * l2_norm(s.g, f0);
    const Vector f = inject_noise(f0, NoiseSpec{delta, 42}, s.g);
    const std::pair<IterationScheme, double> schemes[] = {{IterationScheme::fridman, 1.0 / largest_eigenvalue(s.a)},
                                                         {IterationScheme::landweber, 1.0 / normal_operator_norm(s.a)},
                                                         {IterationScheme::averaged, 1.0},
                                                         {IterationScheme::implicit, 1e-2},
                                                         {IterationScheme::steepest_descent, 0.0}};
    for (auto [scheme, step] : schemes) {
        IterationParams p = params(scheme, step, 20000);
        p.stop.delta = delta;
        p.stop.measure = StopMeasure::discrepancy;
        const MethodResult r = iterate(s.a, f, p, Vector::Zero(129));
        EXPECT_TRUE(r.converged) << to_string(scheme);
        EXPECT_LE(r.residual_history.back(), 2.0 * delta) << to_string(scheme);
    }
}

TEST(Stopping, ThresholdAndDistanceRule) {
    StoppingRule rule;
    EXPECT_EQ(rule.threshold(), 1e-10);
    rule.delta = 0.1;
    rule.gamma = 0.5;
    rule.c2 = 2.0;
    EXPECT_DOUBLE_EQ(rule.threshold(), 1.1);
    rule.c1 = -20.0;
    EXPECT_THROW((void)rule.threshold(), InvalidArgument);

    const EigenSetup s(65);
    IterationParams p = params(IterationScheme::landweber, 1.0 / normal_operator_norm(s.a), 100000);
    p.stop.delta = 1e-4;
    p.record_history = true;
    const MethodResult r = landweber_iterate(s.a, s.image(1) + s.image(2), p, Vector::Zero(65));
    ASSERT_TRUE(r.converged);
    const std::size_t k = r.history.size();
    EXPECT_LE(l2_norm(s.g, r.history[k - 1] - r.history[k - 2]), 1e-4);
    for (std::size_t i = 1; i + 1 < k; ++i) EXPECT_GT(l2_norm(s.g, r.history[i] - r.history[i - 1]), 1e-4);
}

TEST(Iterations, NullSpaceComponentUntouched) {
    // the triangular kernel vanishes at xi = 0, so the first unit vector is in the discrete null space
    const EigenSetup s(65);
    const Vector exact = s.mode(1);
    const Vector f = s.a.apply(exact);
    Vector z = Vector::Zero(65);
    z[0] = 0.7;
    const std::pair<IterationScheme, double> schemes[] = {{IterationScheme::fridman, pi * pi},
                                                         {IterationScheme::landweber, 1.0 / normal_operator_norm(s.a)},
                                                         {IterationScheme::averaged, 1.0},
                                                         {IterationScheme::implicit, 1e-2},
                                                         {IterationScheme::steepest_descent, 0.0}};
    for (auto [scheme, step] : schemes) {
        IterationParams p = params(scheme, step, 15);
        p.stop.fallback_tol = 0.0;
        const MethodResult from_zero = iterate(s.a, f, p, Vector::Zero(65));
        const MethodResult shifted = iterate(s.a, f, p, z);
        EXPECT_LE((shifted.solution - from_zero.solution - z).cwiseAbs().maxCoeff(), 1e-12) << to_string(scheme);
    }
}

TEST(ModeDiagnostic, FridmanRatios) {
    const EigenSetup s(257);
    const Vector f = s.image(1) + s.image(2);
    IterationParams p = params(IterationScheme::fridman, pi * pi, 12);
    p.record_history = true;
    p.stop.fallback_tol = 0.0;
    const MethodResult r = fridman_iterate(s.a, f, p, Vector::Zero(257));
    const ModeDiagnostic d = mode_diagnostic(s.basis, r.history, s.g, 2);
    EXPECT_NEAR(d.ratios[0], 0.0, 1e-3);
    EXPECT_NEAR(d.ratios[1], 0.75, 1e-3);
}

TEST(ModeDiagnostic, ConstantHistory) {
    const EigenSetup s(65);
    const std::vector<Vector> h(5, s.mode(1));
    const ModeDiagnostic d = mode_diagnostic(s.basis, h, s.g, 3);
    for (double r : d.ratios) EXPECT_EQ(r, 1.0);
    EXPECT_THROW(mode_diagnostic(s.basis, h, s.g, 99), InvalidArgument);
}

TEST(Perlin, ProjectorAlgebra) {
    const EigenSetup s(129);
    const Vector e = s.mode(1);
    EXPECT_LE(perlin_deflate(e, e, s.g).cwiseAbs().maxCoeff(), 1e-12);
    const Vector g = s.mode(2);
    EXPECT_LE((perlin_deflate(g, e, s.g) - g).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((perlin_deflate(e + g, e, s.g) - g).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(perlin_deflate(g, Vector::Zero(129), s.g), InvalidArgument);
}
