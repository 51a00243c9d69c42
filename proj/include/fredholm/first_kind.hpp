#pragma once

/// First-kind problems ∫_a^b k(x, xi) psi(xi) dxi = f(x), the Picard series,
/// symmetrization, residuals and synthetic noise.

#include "fredholm/errors.hpp"
#include "fredholm/grid.hpp"
#include "fredholm/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace fredholm {

struct FirstKindProblem {
    Kernel2 kernel;
    Function1 f;
    double a = 0.0;
    double b = 1.0;
    std::optional<Function1> exact_solution;
};

/// Truncated Picard series psi = sum alpha_n lambda_n phi_n, evaluated on demand.
struct PicardSeries {
    SpectralBasis basis;
    std::vector<double> coefficients;  ///< alpha_n = (f, phi_n)

    double operator()(double x) const {
        double s = 0.0;
        for (std::size_t n = 0; n < coefficients.size(); ++n)
            s += coefficients[n] * basis.char_numbers[n] * basis.eigenfunctions[n](x);
        return s;
    }

    [[nodiscard]] Vector samples(const Grid& g) const { return g.sample([this](double x) { return (*this)(x); }); }
};

namespace detail {

// Coefficients are taken with a high-order rule on the basis interval so that
// the lambda_n amplification does not magnify quadrature error.
inline std::vector<double> spectral_coefficients(const SpectralBasis& basis, const Function1& f, std::size_t n_terms,
                                                 std::size_t quad_nodes) {
    if (n_terms > basis.size()) throw InvalidArgument("requested more spectral terms than the basis holds");
    const Grid q = build_grid(basis.a, basis.b, QuadRule::gauss_legendre, quad_nodes);
    const Vector fv = q.sample(f);
    std::vector<double> c(n_terms);
    for (std::size_t n = 0; n < n_terms; ++n) c[n] = inner(q, fv, q.sample(basis.eigenfunctions[n]));
    return c;
}

}  // namespace detail

inline PicardSeries picard_solve(const SpectralBasis& basis, const Function1& f, std::size_t n_terms,
                                 std::size_t quad_nodes = 256) {
    return {basis, detail::spectral_coefficients(basis, f, n_terms, quad_nodes)};
}

struct PicardDiagnostic {
    std::vector<double> partial_sums;  ///< running sum of alpha_n^2 lambda_n^2
    std::vector<double> coefficients;
    /// Share of the final partial sum gained over the last tenth of the terms.
    /// Near 0 for a convergent-looking series, clearly positive when it keeps growing.
    double tail_growth_ratio = 0.0;
};

inline PicardDiagnostic picard_condition_from_coefficients(const SpectralBasis& basis, std::vector<double> coefficients) {
    if (coefficients.size() > basis.size()) throw InvalidArgument("more coefficients than basis terms");
    PicardDiagnostic d;
    d.coefficients = std::move(coefficients);
    double s = 0.0;
    for (std::size_t n = 0; n < d.coefficients.size(); ++n) {
        const double t = d.coefficients[n] * basis.char_numbers[n];
        s += t * t;
        d.partial_sums.push_back(s);
    }
    const std::size_t m = d.partial_sums.size();
    if (m >= 2 && d.partial_sums.back() > 0.0) {
        const std::size_t k = std::max<std::size_t>(1, m / 10);
        d.tail_growth_ratio = (d.partial_sums.back() - d.partial_sums[m - 1 - k]) / d.partial_sums.back();
    }
    return d;
}

inline PicardDiagnostic picard_condition(const SpectralBasis& basis, const Function1& f, std::size_t n_terms,
                                         std::size_t quad_nodes = 256) {
    return picard_condition_from_coefficients(basis, detail::spectral_coefficients(basis, f, n_terms, quad_nodes));
}

/// Normal-equation form: k'(x,xi) = ∫ k(z,x) k(z,xi) dz, f'(x) = ∫ k(z,x) f(z) dz,
/// with the z-integrals taken on `grid`.
inline FirstKindProblem symmetrize(const FirstKindProblem& p, const Grid& grid) {
    auto g = std::make_shared<const Grid>(grid);
    auto k = p.kernel;
    auto f = p.f;
    FirstKindProblem out;
    out.a = p.a;
    out.b = p.b;
    out.kernel = [g, k](double x, double xi) {
        double s = 0.0;
        for (std::size_t z = 0; z < g->size(); ++z) s += g->weight(z) * k(g->node(z), x) * k(g->node(z), xi);
        return s;
    };
    out.f = [g, k, f](double x) {
        double s = 0.0;
        for (std::size_t z = 0; z < g->size(); ++z) s += g->weight(z) * k(g->node(z), x) * f(g->node(z));
        return s;
    };
    return out;
}

inline double residual_norm(const DiscreteOperator& a, const Vector& f, const Vector& psi) {
    if (psi.size() != a.matrix.cols() || f.size() != a.matrix.rows()) throw InvalidArgument("residual_norm: length mismatch");
    return l2_norm(a.row_grid, a.matrix * psi - f);
}

/// ||A psi - f|| in L2(a, b) under the grid's quadrature.
inline double residual_norm(const FirstKindProblem& p, const Vector& psi, const Grid& grid) {
    if (static_cast<std::size_t>(psi.size()) != grid.size()) throw InvalidArgument("residual_norm: length mismatch");
    return residual_norm(discretize_kernel(p.kernel, grid, grid), grid.sample(p.f), psi);
}

enum class NoiseShape { white_fourier, single_mode };

struct NoiseSpec {
    double target_l2_norm = 0.0;
    std::uint64_t seed = 0;
    NoiseShape shape = NoiseShape::white_fourier;
    int modes = 16;  ///< mode count for white_fourier, mode index for single_mode
};

/// Adds a perturbation built from sin(k pi (x - a)/(b - a)) modes, rescaled so
/// its discrete L2 norm equals the target.
inline Vector inject_noise(const Vector& f, const NoiseSpec& spec, const Grid& grid) {
    if (f.size() == 0) throw InvalidArgument("inject_noise: empty input");
    if (static_cast<std::size_t>(f.size()) != grid.size()) throw InvalidArgument("inject_noise: length mismatch");
    if (!(spec.target_l2_norm >= 0.0)) throw InvalidArgument("inject_noise: target norm must be non-negative");
    if (spec.modes < 1) throw InvalidArgument("inject_noise: mode parameter must be positive");
    if (spec.target_l2_norm == 0.0) return f;

    const double pi = std::numbers::pi;
    const double a = grid.a(), len = grid.length();
    Vector e = Vector::Zero(f.size());
    auto add_mode = [&](int k, double c) {
        for (Eigen::Index i = 0; i < e.size(); ++i)
            e[i] += c * std::sin(k * pi * (grid.node(static_cast<std::size_t>(i)) - a) / len);
    };
    if (spec.shape == NoiseShape::single_mode) {
        add_mode(spec.modes, 1.0);
    } else {
        std::mt19937_64 gen(spec.seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        for (int k = 1; k <= spec.modes; ++k) add_mode(k, normal(gen));
    }
    const double norm = l2_norm(grid, e);
    if (!(norm > 0.0)) throw InvalidArgument("inject_noise: perturbation vanishes on this grid");
    return f + e * (spec.target_l2_norm / norm);
}

/// psi(x) + ∫_a^x g(x, xi) psi(xi) dxi = rhs(x), discretized with cumulative
/// weights and solved by forward substitution.
struct VolterraSecondKind {
    Grid grid;
    Matrix weighted;  ///< lower-triangular g(x_i, x_j) * C_ij
    Vector rhs;

    [[nodiscard]] Vector solve() const {
        const auto n = rhs.size();
        Vector psi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double s = rhs[i];
            for (Eigen::Index j = 0; j < i; ++j) s -= weighted(i, j) * psi[j];
            const double diag = 1.0 + weighted(i, i);
            if (std::abs(diag) < 1e-14) throw SingularSystemError("Volterra forward substitution hit a zero pivot", 0.0);
            psi[i] = s / diag;
        }
        return psi;
    }
};

/// Differentiates ∫_a^x k(x,xi) psi(xi) dxi = f(x) into a second-kind Volterra
/// equation, dividing through by k(x, x). Without dk_dx a central difference is used.
inline VolterraSecondKind volterra_differentiate(const Kernel2& k, const std::optional<Kernel2>& dk_dx,
                                                 const Function1& f_prime, const Grid& grid) {
    Kernel2 dk = dk_dx ? *dk_dx : Kernel2([k](double x, double xi) {
        const double step = 1e-5 * std::max(1.0, std::abs(x));
        return (k(x + step, xi) - k(x - step, xi)) / (2.0 * step);
    });
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Matrix c = cumulative_weights(grid);
    Matrix wmat = Matrix::Zero(n, n);
    Vector rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = grid.node(static_cast<std::size_t>(i));
        const double diag = k(x, x);
        if (!(std::abs(diag) > 1e-12))
            throw InvalidArgument("volterra_differentiate: k(x, x) vanishes at x = " + std::to_string(x));
        rhs[i] = f_prime(x) / diag;
        for (Eigen::Index j = 0; j <= i; ++j)
            if (c(i, j) != 0.0) wmat(i, j) = dk(x, grid.node(static_cast<std::size_t>(j))) / diag * c(i, j);
    }
    return {grid, std::move(wmat), std::move(rhs)};
}

}  // namespace fredholm
