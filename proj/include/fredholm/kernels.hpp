#pragma once

/// Poisson kernel, its truncated resolvent series, and analytic spectra of
/// the canonical kernels.
///
/// The resolvent uses the unnormalized periodic family on [0, 1]:
/// psi_0 = 1/sqrt(2), psi_n in {cos(2 pi n x), sin(2 pi n x)}, each with
/// squared norm 1/2; the overall factor 2 in front of the series compensates.
/// SpectralBasis, by contrast, always stores orthonormal eigenfunctions.

#include "fredholm/errors.hpp"
#include "fredholm/grid.hpp"

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace fredholm {

struct PoissonKernelSpec {
    double r;

    explicit PoissonKernelSpec(double r_) : r(r_) {
        if (!(std::abs(r) > 0.0 && std::abs(r) < 1.0))
            throw InvalidArgument("Poisson kernel parameter must satisfy 0 < |r| < 1, got " + std::to_string(r));
    }
};

/// h(x, xi) = (1 - r^2) / (1 - 2 r cos(2 pi (x - xi)) + r^2)
inline double poisson_h(double x, double xi, const PoissonKernelSpec& spec) {
    const double r = spec.r;
    return (1.0 - r * r) / (1.0 - 2.0 * r * std::cos(2.0 * std::numbers::pi * (x - xi)) + r * r);
}

/// Parameters of the truncated resolvent: terms n = 0 .. n_terms-1.
struct ResolventSpec {
    double r;
    double lambda;
    int n_terms;

    static constexpr double singular_tol = 1e-9;

    ResolventSpec(double r_, double lambda_, int n_terms_) : r(r_), lambda(lambda_), n_terms(n_terms_) {
        PoissonKernelSpec check(r);
        (void)check;
        if (n_terms < 1) throw InvalidArgument("resolvent needs at least one series term");
        double rn = 1.0;
        for (int n = 0; n < n_terms; ++n) {
            if (std::abs(1.0 - 2.0 * lambda * rn) < singular_tol)
                throw InvalidArgument("resolvent term " + std::to_string(n) + " is singular: 1 - 2*lambda*r^n = 0 at lambda = " +
                                      std::to_string(lambda));
            rn *= r;
        }
    }
};

/// H(x, xi, lambda) = 2 sum_n r^n / (1 - 2 lambda r^n) psi_n(x) psi_n(xi)
inline double resolvent_H(double x, double xi, const ResolventSpec& spec) {
    // cos*cos + sin*sin collapses to cos of the difference; |x - xi| keeps the
    // floating-point result exactly symmetric.
    const double d = std::abs(x - xi);
    double s = 1.0 / (1.0 - 2.0 * spec.lambda);
    double rn = 1.0;
    for (int n = 1; n < spec.n_terms; ++n) {
        rn *= spec.r;
        s += 2.0 * rn / (1.0 - 2.0 * spec.lambda * rn) * std::cos(2.0 * std::numbers::pi * n * d);
    }
    return s;
}

/// Term-wise derivative of resolvent_H with respect to lambda.
inline double resolvent_dH_dlambda(double x, double xi, const ResolventSpec& spec) {
    const double d = std::abs(x - xi);
    const double q0 = 1.0 - 2.0 * spec.lambda;
    double s = 2.0 / (q0 * q0);
    double rn = 1.0;
    for (int n = 1; n < spec.n_terms; ++n) {
        rn *= spec.r;
        const double q = 1.0 - 2.0 * spec.lambda * rn;
        s += 4.0 * rn * rn / (q * q) * std::cos(2.0 * std::numbers::pi * n * d);
    }
    return s;
}

/// Max over node pairs (x, xi) of |lambda ∫_{-1}^{1} h(x,z) H(z,xi) dz - (H(x,xi) - h(x,xi))|.
inline double resolvent_identity_residual(const ResolventSpec& spec, const Grid& grid) {
    const PoissonKernelSpec ps(spec.r);
    const std::size_t n = grid.size();
    std::vector<double> hv(n * n), Hv(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            hv[i * n + j] = poisson_h(grid.node(i), grid.node(j), ps);
            Hv[i * n + j] = resolvent_H(grid.node(i), grid.node(j), spec);
        }
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double integral = 0.0;
            for (std::size_t z = 0; z < n; ++z) integral += grid.weight(z) * hv[i * n + z] * Hv[z * n + j];
            const double defect = spec.lambda * integral - (Hv[i * n + j] - hv[i * n + j]);
            worst = std::max(worst, std::abs(defect));
        }
    return worst;
}

/// Symmetric kernel (1 - x) xi for xi <= x, x (1 - xi) otherwise, on [0, 1]^2.
inline double triangular_kernel(double x, double xi) {
    if (x < 0.0 || x > 1.0 || xi < 0.0 || xi > 1.0)
        throw InvalidArgument("triangular_kernel: arguments must lie in [0, 1]");
    return xi <= x ? (1.0 - x) * xi : x * (1.0 - xi);
}

/// Characteristic numbers with orthonormal eigenfunctions on [a, b].
/// A mode of multiplicity two (cos and sin) is listed twice.
struct SpectralBasis {
    std::vector<double> char_numbers;
    std::vector<Function1> eigenfunctions;
    double a = 0.0;
    double b = 1.0;

    [[nodiscard]] std::size_t size() const noexcept { return char_numbers.size(); }

    [[nodiscard]] std::vector<double> distinct_characteristic_numbers() const {
        std::vector<double> out;
        for (double c : char_numbers)
            if (out.empty() || std::abs(out.back() - c) > 1e-12 * std::abs(c)) out.push_back(c);
        return out;
    }
};

enum class SpectrumKind { triangular_unit, poisson_r, poisson_operator_433 };

/// Closed-form spectra. `count` eigenpairs are produced.
/// triangular_unit: (n pi)^2 with sqrt(2) sin(n pi x) on [0, 1].
/// poisson_r: r^{-n} on [-pi, pi] for the kernel h(zeta/2pi, theta/2pi) / (2 pi).
/// poisson_operator_433: 0.5 r^{-n} with the doubled-frequency family on [-pi, pi].
inline SpectralBasis canonical_spectrum(SpectrumKind which, std::size_t count, double r = 0.5) {
    SpectralBasis basis;
    const double pi = std::numbers::pi;
    if (which == SpectrumKind::triangular_unit) {
        basis.a = 0.0;
        basis.b = 1.0;
        for (std::size_t n = 1; n <= count; ++n) {
            const double k = static_cast<double>(n) * pi;
            basis.char_numbers.push_back(k * k);
            basis.eigenfunctions.emplace_back([k](double x) { return std::numbers::sqrt2 * std::sin(k * x); });
        }
        return basis;
    }
    PoissonKernelSpec check(r);
    (void)check;
    basis.a = -pi;
    basis.b = pi;
    const double scale = which == SpectrumKind::poisson_r ? 1.0 : 0.5;
    const double freq = which == SpectrumKind::poisson_r ? 1.0 : 2.0;
    basis.char_numbers.push_back(scale);
    basis.eigenfunctions.emplace_back([](double) { return 1.0 / std::sqrt(2.0 * std::numbers::pi); });
    for (int n = 1; basis.size() < count; ++n) {
        const double lam = scale * std::pow(r, -n);
        const double w = freq * n;
        basis.char_numbers.push_back(lam);
        basis.eigenfunctions.emplace_back([w](double z) { return std::cos(w * z) / std::sqrt(std::numbers::pi); });
        if (basis.size() == count) break;
        basis.char_numbers.push_back(lam);
        basis.eigenfunctions.emplace_back([w](double z) { return std::sin(w * z) / std::sqrt(std::numbers::pi); });
    }
    return basis;
}

/// Partial Mercer sum over the first n_terms eigenpairs.
inline double mercer_reconstruct(const SpectralBasis& basis, std::size_t n_terms, double x, double xi) {
    if (n_terms > basis.size()) throw InvalidArgument("mercer_reconstruct: basis has fewer terms than requested");
    double s = 0.0;
    for (std::size_t i = 0; i < n_terms; ++i)
        s += basis.eigenfunctions[i](x) * basis.eigenfunctions[i](xi) / basis.char_numbers[i];
    return s;
}

/// Gram matrix of the basis functions under the grid's quadrature.
inline Matrix gram_matrix(const SpectralBasis& basis, const Grid& grid) {
    const auto m = static_cast<Eigen::Index>(basis.size());
    Matrix samples(static_cast<Eigen::Index>(grid.size()), m);
    for (Eigen::Index j = 0; j < m; ++j) samples.col(j) = grid.sample(basis.eigenfunctions[static_cast<std::size_t>(j)]);
    return samples.transpose() * grid.weight_vector().asDiagonal() * samples;
}

}  // namespace fredholm
