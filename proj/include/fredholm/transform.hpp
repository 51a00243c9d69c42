#pragma once

/// Correctness transform: a first-kind equation A psi = f on [0, 1] is
/// replaced by a 2x2 block second-kind system in (chi1, chi2) built from the
/// Poisson kernel h and its truncated resolvent H(., ., mu), after which
/// psi1 = chi1 + mu ∫ H chi1 is the recovered solution.
///
/// chi2 plays the role of the extension phi_0 of the solution to [-1, 0),
/// shifted onto [0, 1] by periodicity. The resolvent parameter lambda is the
/// same number as mu throughout.

#include "fredholm/errors.hpp"
#include "fredholm/first_kind.hpp"
#include "fredholm/grid.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/second_kind.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace fredholm {

struct TransformConfig {
    double r = 0.5;
    double mu = 0.3;
    int n_resolvent_terms = 60;
    Grid grid = build_grid(0.0, 1.0, QuadRule::simpson, 129);
    double admissibility_tol = 1e-9;

    [[nodiscard]] ResolventSpec resolvent() const { return {r, mu, n_resolvent_terms}; }
};

struct Admissibility {
    bool admissible = false;
    double nearest_forbidden = 0.0;
};

/// mu must stay away from 0.5 r^{-n} and r^{-n}, n = 0..N.
inline Admissibility check_mu_admissible(const TransformConfig& c) {
    PoissonKernelSpec check(c.r);
    (void)check;
    Admissibility a;
    double best = std::numeric_limits<double>::infinity();
    double rn = 1.0;  // r^{-n}
    for (int n = 0; n <= c.n_resolvent_terms; ++n) {
        for (double v : {0.5 * rn, rn}) {
            const double d = std::abs(c.mu - v);
            if (d < best) {
                best = d;
                a.nearest_forbidden = v;
            }
        }
        rn /= c.r;
        if (!std::isfinite(rn)) break;
    }
    a.admissible = best > c.admissibility_tol;
    return a;
}

namespace detail {

inline void require_unit_grid(const Grid& g) {
    if (std::abs(g.a()) > 1e-14 || std::abs(g.b() - 1.0) > 1e-14)
        throw InvalidArgument("transform grid must cover [0, 1]");
}

inline void require_admissible(const TransformConfig& c) {
    require_unit_grid(c.grid);
    const Admissibility a = check_mu_admissible(c);
    if (!a.admissible)
        throw InvalidArgument("mu = " + std::to_string(c.mu) + " is not admissible (forbidden value " +
                              std::to_string(a.nearest_forbidden) + ")");
}

inline Matrix sample_kernel(const Grid& g, const auto& fn) {
    const auto n = static_cast<Eigen::Index>(g.size());
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) m(i, j) = fn(g.node(static_cast<std::size_t>(i)), g.node(static_cast<std::size_t>(j)));
    return m;
}

inline void require_operator_on(const DiscreteOperator& a, const Vector& f, const Grid& g) {
    if (a.matrix.rows() != static_cast<Eigen::Index>(g.size()) || a.matrix.cols() != static_cast<Eigen::Index>(g.size()))
        throw InvalidArgument("operator is not discretized on the transform grid");
    if (f.size() != a.matrix.rows()) throw InvalidArgument("right-hand side length mismatch");
}

}  // namespace detail

inline Matrix sample_poisson(const TransformConfig& c) {
    const PoissonKernelSpec ps(c.r);
    return detail::sample_kernel(c.grid, [&](double x, double xi) { return poisson_h(x, xi, ps); });
}

inline Matrix sample_resolvent(const TransformConfig& c) {
    const ResolventSpec rs = c.resolvent();
    return detail::sample_kernel(c.grid, [&](double x, double xi) { return resolvent_H(x, xi, rs); });
}

inline Matrix sample_resolvent_derivative(const TransformConfig& c) {
    const ResolventSpec rs = c.resolvent();
    return detail::sample_kernel(c.grid, [&](double x, double xi) { return resolvent_dH_dlambda(x, xi, rs); });
}

/// Kernel values (no weights) of the four blocks, plus the pieces they came from.
struct AssembledSystem {
    Matrix K11, K12, K21, K22;
    Vector F1;
    Grid grid;
    Matrix h, H;
    double mu = 0.0;

    /// Weighted block problem chi = mu K chi + F.
    [[nodiscard]] SecondKindProblem problem() const {
        const Vector w = grid.weight_vector();
        SecondKindProblem p;
        p.grids = {grid, grid};
        p.blocks = {{K11 * w.asDiagonal(), K12 * w.asDiagonal()}, {K21 * w.asDiagonal(), K22 * w.asDiagonal()}};
        p.mu = mu;
        p.rhs = {F1, Vector::Zero(F1.size())};
        return p;
    }
};

/// K11 = -[H + k + mu ∫k H], K12 = -(mu/2)[h + H], K21 = H, K22 = mu ∫H k, F1 = mu f.
inline AssembledSystem build_kernels(const DiscreteOperator& a, const Vector& f, const TransformConfig& c) {
    detail::require_admissible(c);
    detail::require_operator_on(a, f, c.grid);
    AssembledSystem s{.K11 = {}, .K12 = {}, .K21 = {}, .K22 = {}, .F1 = c.mu * f, .grid = c.grid,
                      .h = sample_poisson(c), .H = sample_resolvent(c), .mu = c.mu};
    const Matrix k = a.kernel_values();
    const Vector w = c.grid.weight_vector();
    const Matrix kH = a.matrix * s.H;                 // ∫ k(x,z) H(z,xi) dz
    const Matrix Hk = s.H * w.asDiagonal() * k;       // ∫ H(x,z) k(z,xi) dz
    s.K11 = -(s.H + k + c.mu * kH);
    s.K12 = -(0.5 * c.mu) * (s.h + s.H);
    s.K21 = s.H;
    s.K22 = c.mu * Hk;
    return s;
}

inline AssembledSystem build_kernels(const FirstKindProblem& p, const TransformConfig& c) {
    detail::require_unit_grid(c.grid);
    return build_kernels(discretize_kernel(p.kernel, c.grid, c.grid), c.grid.sample(p.f), c);
}

/// psi1 = chi1 + mu ∫_0^1 H(x, xi, mu) chi1(xi) dxi
inline Vector recover_psi(const Vector& chi1, const TransformConfig& c) {
    detail::require_unit_grid(c.grid);
    if (static_cast<std::size_t>(chi1.size()) != c.grid.size()) throw InvalidArgument("recover_psi: length mismatch");
    return chi1 + c.mu * (sample_resolvent(c) * c.grid.weight_vector().asDiagonal() * chi1);
}

enum class TransformMethod { direct, iterate };

struct TransformResult {
    Vector chi1, chi2, psi1;
    double residual = 0.0;           ///< ||A psi1 - f||
    double relative_residual = 0.0;  ///< residual / ||f|| (0 when f = 0)
    double system_residual = 0.0;    ///< relative residual of the discrete second-kind system
    ContractionReport report;
    int iterations = 0;
};

namespace detail {

inline double stacked_relative_residual(const StackedSystem& s, double mu, const Vector& x) {
    const Vector r = x - mu * (s.kernel * x) - s.rhs;
    const double scale = s.rhs.norm();
    return scale > 0.0 ? r.norm() / scale : r.norm();
}

inline void finish_result(TransformResult& out, const DiscreteOperator& a, const Vector& f, const TransformConfig& c) {
    out.psi1 = recover_psi(out.chi1, c);
    out.residual = residual_norm(a, f, out.psi1);
    const double fn = l2_norm(c.grid, f);
    out.relative_residual = fn > 0.0 ? out.residual / fn : out.residual;
}

}  // namespace detail

inline TransformResult solve_transform(const DiscreteOperator& a, const Vector& f, const TransformConfig& c,
                                       TransformMethod method = TransformMethod::direct) {
    const AssembledSystem sys = build_kernels(a, f, c);
    const SecondKindProblem prob = sys.problem();
    const StackedSystem stacked = assemble_blocks(prob);
    TransformResult out;
    out.report = norm_M(prob);
    if (method == TransformMethod::direct) {
        const SecondKindSolution sol = solve_stacked(stacked, c.mu);
        out.chi1 = sol.blocks[0];
        out.chi2 = sol.blocks[1];
    } else {
        const Vector zero = Vector::Zero(f.size());
        const IterationOutcome it = simple_iteration(prob, {zero, zero}, 1e-13, 20000);
        if (!it.converged) throw DivergenceError("transform simple iteration did not converge within 20000 steps");
        out.chi1 = it.blocks[0];
        out.chi2 = it.blocks[1];
        out.iterations = it.iterations;
    }
    Vector x(2 * f.size());
    x << out.chi1, out.chi2;
    out.system_residual = detail::stacked_relative_residual(stacked, c.mu, x);
    detail::finish_result(out, a, f, c);
    return out;
}

inline TransformResult solve_transform(const FirstKindProblem& p, const TransformConfig& c,
                                       TransformMethod method = TransformMethod::direct) {
    detail::require_unit_grid(c.grid);
    return solve_transform(discretize_kernel(p.kernel, c.grid, c.grid), c.grid.sample(p.f), c, method);
}

/// Right-hand side mu [f - mu A psi1] of the homogeneous-limit equation.
inline Vector homogeneity_rhs(const DiscreteOperator& a, const Vector& f, const Vector& psi1, double mu) {
    return mu * (f - mu * (a.matrix * psi1));
}

/// l(x, xi) = ∫_0^1 H(x, z, mu) k(z, xi) dz, kernel values.
inline Matrix build_l_kernel(const DiscreteOperator& a, const TransformConfig& c) {
    detail::require_admissible(c);
    detail::require_operator_on(a, Vector::Zero(a.matrix.rows()), c.grid);
    return sample_resolvent(c) * c.grid.weight_vector().asDiagonal() * a.kernel_values();
}

enum class AlternativeVariant {
    body,         ///< chi = mu ∫ (Q + k) chi - mu f
    conclusions,  ///< chi = mu ∫ (Q - k') chi + mu f, k' = k + mu ∫ k H
};

/// Q = -H - (mu/2) ∫ (h + H)(x, z) [H(z, xi) + ∫ L(z, t) H(t, xi) dt] dz,
/// where L is the resolvent of l at parameter mu. Kernel values.
inline Matrix build_q_kernel(const DiscreteOperator& a, const TransformConfig& c) {
    const Vector w = c.grid.weight_vector();
    const Matrix H = sample_resolvent(c);
    const Matrix h = sample_poisson(c);
    const Matrix lw = build_l_kernel(a, c) * w.asDiagonal();
    Matrix sys = -c.mu * lw;
    sys.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Matrix> lu(sys);
    const double rc = lu.rcond();
    if (!(rc >= 1e-12)) throw SingularSystemError("mu is a characteristic number of the composed kernel l", rc);
    const Matrix Lw = lu.solve(lw);  // weighted resolvent of l
    return -H - (0.5 * c.mu) * (h + H) * w.asDiagonal() * (H + Lw * H);
}

inline TransformResult solve_alternative_467(const DiscreteOperator& a, const Vector& f, const TransformConfig& c,
                                             AlternativeVariant variant = AlternativeVariant::body) {
    detail::require_admissible(c);
    detail::require_operator_on(a, f, c.grid);
    const Vector w = c.grid.weight_vector();
    const Matrix q = build_q_kernel(a, c);
    const Matrix k = a.kernel_values();
    Matrix kern;
    Vector rhs;
    if (variant == AlternativeVariant::body) {
        kern = q + k;
        rhs = -c.mu * f;
    } else {
        kern = q - (k + c.mu * (a.matrix * sample_resolvent(c)));
        rhs = c.mu * f;
    }
    const SecondKindProblem prob = SecondKindProblem::single(DiscreteOperator{kern * w.asDiagonal(), c.grid, c.grid}, c.mu, rhs);
    const SecondKindSolution sol = nystrom_solve(prob);
    TransformResult out;
    out.report = norm_M(prob);
    out.chi1 = sol.blocks[0];
    out.chi2 = Vector::Zero(f.size());
    out.system_residual = sol.residual;
    detail::finish_result(out, a, f, c);
    return out;
}

inline TransformResult solve_alternative_467(const FirstKindProblem& p, const TransformConfig& c,
                                             AlternativeVariant variant = AlternativeVariant::body) {
    detail::require_unit_grid(c.grid);
    return solve_alternative_467(discretize_kernel(p.kernel, c.grid, c.grid), c.grid.sample(p.f), c, variant);
}

/// t(x, xi) = (mu^2/4) [h - H - d_lambda H], kernel values.
inline Matrix correction_t_kernel(const TransformConfig& c) {
    return (0.25 * c.mu * c.mu) * (sample_poisson(c) - sample_resolvent(c) - sample_resolvent_derivative(c));
}

struct ErrorCorrection {
    Vector delta_phi0, delta_kappa, delta_psi;
};

/// Corrections induced by a data error delta_f.
inline ErrorCorrection error_correction_terms(const Vector& delta_f, const TransformConfig& c) {
    detail::require_admissible(c);
    if (static_cast<std::size_t>(delta_f.size()) != c.grid.size()) throw InvalidArgument("error_correction_terms: length mismatch");
    const Vector wf = c.grid.weight_vector().cwiseProduct(delta_f);
    const Matrix H = sample_resolvent(c);
    ErrorCorrection e;
    e.delta_phi0 = c.mu * (H * wf);
    e.delta_kappa = (-0.5 * c.mu * c.mu) * ((sample_poisson(c) + H) * wf);
    e.delta_psi = c.mu * (correction_t_kernel(c) * wf);
    return e;
}

/// Values on an nx-by-ny tensor grid, index j*nx + i for (x_i, y_j).
struct TensorGrid {
    Grid gx;
    Grid gy;

    [[nodiscard]] Eigen::Index size() const { return static_cast<Eigen::Index>(gx.size() * gy.size()); }
    [[nodiscard]] Eigen::Index index(std::size_t i, std::size_t j) const { return static_cast<Eigen::Index>(j * gx.size() + i); }
    [[nodiscard]] Vector weights() const {
        Vector w(size());
        for (std::size_t j = 0; j < gy.size(); ++j)
            for (std::size_t i = 0; i < gx.size(); ++i) w[index(i, j)] = gx.weight(i) * gy.weight(j);
        return w;
    }
    [[nodiscard]] Vector sample(const std::function<double(double, double)>& g) const {
        Vector v(size());
        for (std::size_t j = 0; j < gy.size(); ++j)
            for (std::size_t i = 0; i < gx.size(); ++i) v[index(i, j)] = g(gx.node(i), gy.node(j));
        return v;
    }
    [[nodiscard]] double l2_norm(const Vector& v) const { return std::sqrt(weights().dot(v.cwiseProduct(v))); }
};

/// Applies a weighted x-kernel matrix (nx by nx) along x on every y-line.
inline Vector apply_along_x(const Matrix& kx, const Vector& v, std::size_t nx, std::size_t ny) {
    Vector out(v.size());
    for (std::size_t j = 0; j < ny; ++j) {
        const auto off = static_cast<Eigen::Index>(j * nx);
        out.segment(off, static_cast<Eigen::Index>(nx)) = kx * v.segment(off, static_cast<Eigen::Index>(nx));
    }
    return out;
}

/// Dense matrix of the same action (block diagonal over y-lines).
inline Matrix along_x_matrix(const Matrix& kx, std::size_t ny) {
    const auto nx = kx.rows();
    Matrix m = Matrix::Zero(nx * static_cast<Eigen::Index>(ny), nx * static_cast<Eigen::Index>(ny));
    for (std::size_t j = 0; j < ny; ++j) m.block(static_cast<Eigen::Index>(j) * nx, static_cast<Eigen::Index>(j) * nx, nx, nx) = kx;
    return m;
}

namespace detail {

// Stacked 2D transform kernel for an operator matrix a; affine in a.
// The mu factors match the one-dimensional blocks, so an operator acting only
// along x gives the one-dimensional system on every y-line.
inline Matrix transform_2d_kernel(const Matrix& a, const TensorGrid& tg, const TransformConfig& c) {
    const Eigen::Index n = tg.size();
    const Vector wx = c.grid.weight_vector();
    const Matrix Hw = sample_resolvent(c) * wx.asDiagonal();
    const Matrix hw = sample_poisson(c) * wx.asDiagonal();
    const Matrix Hx = along_x_matrix(Hw, tg.gy.size());
    const Matrix Px = along_x_matrix((0.5 * c.mu) * (hw + Hw), tg.gy.size());
    Matrix big(2 * n, 2 * n);
    big.topLeftCorner(n, n) = -Hx - a - c.mu * (a * Hx);
    big.topRightCorner(n, n) = -Px;
    big.bottomLeftCorner(n, n) = Hx;
    big.bottomRightCorner(n, n) = c.mu * (Hx * a);
    return big;
}

}  // namespace detail

struct TransformResult2D {
    Vector chi1, chi2, psi;
    double residual = 0.0;
    double relative_residual = 0.0;
    double system_residual = 0.0;
    ContractionReport report;
};

/// Two-dimensional variant for an operator A given as a weighted dense matrix
/// on the tensor grid (x grid = config grid):
///   chi1 = mu [-Hx - A - mu A Hx] chi1 + mu [-(mu/2)(h + H)x] chi2 + mu f
///   chi2 = mu Hx chi1 + mu^2 Hx A chi2
/// with psi = chi1 + mu Hx chi1, Hx acting along x.
inline TransformResult2D solve_transform_2d(const Matrix& a, const Vector& f, const TensorGrid& tg, const TransformConfig& c) {
    detail::require_admissible(c);
    if (tg.gx.size() != c.grid.size()) throw InvalidArgument("solve_transform_2d: x grid differs from the transform grid");
    const Eigen::Index n = tg.size();
    if (a.rows() != n || a.cols() != n || f.size() != n) throw InvalidArgument("solve_transform_2d: dimension mismatch");
    const Matrix Hx = along_x_matrix(sample_resolvent(c) * c.grid.weight_vector().asDiagonal(), tg.gy.size());
    Matrix big = detail::transform_2d_kernel(a, tg, c);
    StackedSystem s;
    s.kernel = std::move(big);
    s.rhs = Vector::Zero(2 * n);
    s.rhs.head(n) = c.mu * f;
    const Vector tw = tg.weights();
    s.weights.resize(2 * n);
    s.weights << tw, tw;
    s.offsets = {0, n, 2 * n};

    TransformResult2D out;
    // M from the stacked kernel: sum w_i K_ij^2 / w_j
    double m2 = 0.0, row_bound = 0.0;
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < 2 * n; ++j) row += s.kernel(i, j) * s.kernel(i, j) / s.weights[j];
        m2 += s.weights[i] * row;
        row_bound = std::max(row_bound, row);
    }
    out.report.M = std::sqrt(m2);
    out.report.mu_times_M = std::abs(c.mu) * out.report.M;
    out.report.contractive = out.report.mu_times_M < 1.0;
    out.report.row_bound = row_bound;
    out.report.regular = out.report.contractive && std::isfinite(row_bound);

    const SecondKindSolution sol = solve_stacked(s, c.mu);
    out.chi1 = sol.blocks[0];
    out.chi2 = sol.blocks[1];
    Vector x(2 * n);
    x << out.chi1, out.chi2;
    out.system_residual = detail::stacked_relative_residual(s, c.mu, x);
    out.psi = out.chi1 + c.mu * (Hx * out.chi1);
    out.residual = tg.l2_norm(a * out.psi - f);
    const double fn = tg.l2_norm(f);
    out.relative_residual = fn > 0.0 ? out.residual / fn : out.residual;
    return out;
}

}  // namespace fredholm
