#pragma once

/// Quadrature grids and Nyström discretization of integral operators.
///
/// Every discrete operator carries its quadrature weights inside the matrix:
/// entry (i, j) is kernel(x_i, xi_j) * w_j, so applying it to a vector of
/// samples approximates the integral at the row nodes.

#include "fredholm/errors.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fredholm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using Function1 = std::function<double(double)>;
using Kernel2 = std::function<double(double, double)>;

enum class QuadRule { trapezoid, simpson, gauss_legendre };

inline std::string_view to_string(QuadRule rule) {
    switch (rule) {
        case QuadRule::trapezoid: return "trapezoid";
        case QuadRule::simpson: return "simpson";
        case QuadRule::gauss_legendre: return "gauss_legendre";
    }
    return "unknown";
}

inline QuadRule parse_quad_rule(std::string_view name) {
    if (name == "trapezoid") return QuadRule::trapezoid;
    if (name == "simpson") return QuadRule::simpson;
    if (name == "gauss_legendre") return QuadRule::gauss_legendre;
    throw InvalidArgument("unknown quadrature rule '" + std::string(name) + "'");
}

/// Nodes and positive weights on [a, b]. Immutable after construction.
class Grid {
public:
    Grid(double a, double b, QuadRule rule, std::vector<double> nodes, std::vector<double> weights)
        : a_(a), b_(b), rule_(rule), nodes_(std::move(nodes)), weights_(std::move(weights)) {
        if (nodes_.size() != weights_.size() || nodes_.size() < 2)
            throw InvalidArgument("grid needs at least two nodes with matching weights");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            if (!(nodes_[i] > nodes_[i - 1])) throw InvalidArgument("grid nodes must increase strictly");
        for (double w : weights_)
            if (!(w > 0.0)) throw InvalidArgument("grid weights must be positive");
    }

    [[nodiscard]] double a() const noexcept { return a_; }
    [[nodiscard]] double b() const noexcept { return b_; }
    [[nodiscard]] double length() const noexcept { return b_ - a_; }
    [[nodiscard]] QuadRule rule() const noexcept { return rule_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] std::span<const double> nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::span<const double> weights() const noexcept { return weights_; }
    [[nodiscard]] double node(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] double weight(std::size_t i) const { return weights_[i]; }

    /// True when both endpoints are nodes (trapezoid and Simpson grids).
    [[nodiscard]] bool endpoint_inclusive() const noexcept { return rule_ != QuadRule::gauss_legendre; }

    [[nodiscard]] Vector node_vector() const { return Eigen::Map<const Vector>(nodes_.data(), static_cast<Eigen::Index>(nodes_.size())); }
    [[nodiscard]] Vector weight_vector() const { return Eigen::Map<const Vector>(weights_.data(), static_cast<Eigen::Index>(weights_.size())); }

    /// Samples g at every node.
    [[nodiscard]] Vector sample(const Function1& g) const {
        Vector v(static_cast<Eigen::Index>(size()));
        for (std::size_t i = 0; i < size(); ++i) v[static_cast<Eigen::Index>(i)] = g(nodes_[i]);
        return v;
    }

private:
    double a_;
    double b_;
    QuadRule rule_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
inline void gauss_legendre_reference(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double pk = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) { p1 = z; p0 = 1.0; }
            dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute derivative at the converged root
        double p0 = 1.0, p1 = z;
        for (std::size_t k = 2; k <= n; ++k) {
            const double pk = ((2.0 * static_cast<double>(k) - 1.0) * z * p1 - (static_cast<double>(k) - 1.0) * p0) / static_cast<double>(k);
            p0 = p1;
            p1 = pk;
        }
        dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

}  // namespace detail

/// Builds a grid of n nodes on [a, b]. Simpson needs an odd n >= 3.
inline Grid build_grid(double a, double b, QuadRule rule, std::size_t n) {
    if (!(b > a)) throw InvalidArgument("build_grid: need b > a");
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("build_grid: interval must be finite");
    std::vector<double> nodes(n), weights(n);
    switch (rule) {
        case QuadRule::trapezoid: {
            if (n < 2) throw InvalidArgument("build_grid: trapezoid needs n >= 2");
            const double h = (b - a) / static_cast<double>(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                nodes[i] = a + h * static_cast<double>(i);
                weights[i] = h;
            }
            nodes[n - 1] = b;
            weights[0] = weights[n - 1] = 0.5 * h;
            break;
        }
        case QuadRule::simpson: {
            if (n < 3 || n % 2 == 0) throw InvalidArgument("build_grid: simpson needs an odd n >= 3");
            const double h = (b - a) / static_cast<double>(n - 1);
            for (std::size_t i = 0; i < n; ++i) {
                nodes[i] = a + h * static_cast<double>(i);
                weights[i] = (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
            }
            nodes[n - 1] = b;
            weights[0] = weights[n - 1] = h / 3.0;
            break;
        }
        case QuadRule::gauss_legendre: {
            if (n < 2) throw InvalidArgument("build_grid: gauss_legendre needs n >= 2");
            std::vector<double> rx, rw;
            detail::gauss_legendre_reference(n, rx, rw);
            const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            for (std::size_t i = 0; i < n; ++i) {
                nodes[i] = mid + half * rx[i];
                weights[i] = half * rw[i];
            }
            break;
        }
    }
    return Grid(a, b, rule, std::move(nodes), std::move(weights));
}

/// Sum of w_i * values_i.
inline double integrate(const Grid& g, std::span<const double> values) {
    if (values.size() != g.size()) throw InvalidArgument("integrate: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) s += g.weight(i) * values[i];
    return s;
}

inline double integrate(const Grid& g, const Vector& values) {
    return integrate(g, std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

inline double inner(const Grid& g, const Vector& u, const Vector& v) {
    if (u.size() != v.size() || static_cast<std::size_t>(u.size()) != g.size())
        throw InvalidArgument("inner: length mismatch");
    return (g.weight_vector().array() * u.array() * v.array()).sum();
}

/// Discrete L2(a, b) norm under the grid's quadrature.
inline double l2_norm(const Grid& g, const Vector& v) { return std::sqrt(inner(g, v, v)); }

/// Lower-triangular weights C with (C v)_i ≈ ∫_a^{x_i} v. Row 0 is zero and
/// the last row equals the full-interval weights. Simpson grids use Simpson
/// panels with a closing 3/8 rule on odd panel counts; row 1 has only one
/// panel and falls back to the trapezoid rule (local error O(h^3)), which keeps
/// C lower-triangular for forward substitution.
inline Matrix cumulative_weights(const Grid& g) {
    if (!g.endpoint_inclusive())
        throw InvalidArgument("cumulative_weights: needs an endpoint-inclusive grid (trapezoid or simpson)");
    const auto n = static_cast<Eigen::Index>(g.size());
    Matrix c = Matrix::Zero(n, n);
    const double h = g.length() / static_cast<double>(n - 1);
    for (Eigen::Index i = 1; i < n; ++i) {
        if (g.rule() == QuadRule::trapezoid || i == 1) {
            for (Eigen::Index j = 0; j <= i; ++j) c(i, j) = (j == 0 || j == i) ? 0.5 * h : h;
            continue;
        }
        const Eigen::Index panels = i;
        const Eigen::Index simpson_panels = (panels % 2 == 0) ? panels : panels - 3;
        for (Eigen::Index j = 0; j < simpson_panels; j += 2) {
            c(i, j) += h / 3.0;
            c(i, j + 1) += 4.0 * h / 3.0;
            c(i, j + 2) += h / 3.0;
        }
        if (simpson_panels != panels) {
            const Eigen::Index s = simpson_panels;
            c(i, s) += 3.0 * h / 8.0;
            c(i, s + 1) += 9.0 * h / 8.0;
            c(i, s + 2) += 9.0 * h / 8.0;
            c(i, s + 3) += 3.0 * h / 8.0;
        }
    }
    return c;
}

/// Nyström matrix of an integral operator between two grids.
struct DiscreteOperator {
    Matrix matrix;  ///< kernel(x_i, xi_j) * w_j, or a quadrature-equivalent weighting
    Grid row_grid;
    Grid col_grid;

    [[nodiscard]] Vector apply(const Vector& v) const {
        if (v.size() != matrix.cols()) throw InvalidArgument("DiscreteOperator::apply: length mismatch");
        return matrix * v;
    }

    /// Kernel values with the column weights divided back out.
    [[nodiscard]] Matrix kernel_values() const {
        return matrix * col_grid.weight_vector().cwiseInverse().asDiagonal();
    }
};

/// Samples k on row_grid x col_grid and attaches column weights.
inline DiscreteOperator discretize_kernel(const Kernel2& k, const Grid& row_grid, const Grid& col_grid) {
    const auto m = static_cast<Eigen::Index>(row_grid.size());
    const auto n = static_cast<Eigen::Index>(col_grid.size());
    Matrix a(m, n);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = k(row_grid.node(static_cast<std::size_t>(i)), col_grid.node(static_cast<std::size_t>(j)));
            if (!std::isfinite(v))
                throw InvalidArgument("discretize_kernel: non-finite kernel value at node pair (" +
                                      std::to_string(i) + ", " + std::to_string(j) + ")");
            a(i, j) = v * col_grid.weight(static_cast<std::size_t>(j));
        }
    return {std::move(a), row_grid, col_grid};
}

/// Discretizes ∫_a^x v(x, ξ) ψ(ξ) dξ + ∫_a^b u(x, ξ) ψ(ξ) dξ on one grid.
/// The Volterra part uses cumulative weights so the kink at ξ = x sits on a node.
inline DiscreteOperator discretize_split_kernel(const Kernel2& volterra, const Kernel2& fredholm, const Grid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    Matrix a = Matrix::Zero(n, n);
    if (volterra) {
        const Matrix c = cumulative_weights(grid);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j <= i; ++j)
                if (c(i, j) != 0.0) a(i, j) += volterra(grid.node(static_cast<std::size_t>(i)), grid.node(static_cast<std::size_t>(j))) * c(i, j);
    }
    if (fredholm) a += discretize_kernel(fredholm, grid, grid).matrix;
    if (!a.allFinite()) throw InvalidArgument("discretize_split_kernel: non-finite kernel value");
    return {std::move(a), grid, grid};
}

}  // namespace fredholm
