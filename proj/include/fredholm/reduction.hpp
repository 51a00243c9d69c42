#pragma once

/// Reduction of boundary-value and initial-boundary-value problems to integral
/// equations with respect to the highest derivative.
///
/// One-dimensional problems become second-kind equations; two-dimensional ones
/// become first-kind equations of the split form
///   ∫ tau1(x, xi) psi(xi, y) dxi + ∫ tau2(y, eta) psi(x, eta) deta
///     + c ∫_0^x ∫_0^y psi = f(x, y).
/// Every reconstruction formula satisfies its own boundary conditions
/// identically, whatever psi is.

#include "fredholm/errors.hpp"
#include "fredholm/first_kind.hpp"
#include "fredholm/grid.hpp"
#include "fredholm/second_kind.hpp"
#include "fredholm/transform.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace fredholm {

using Function2 = std::function<double(double, double)>;

// ---------------------------------------------------------------- ODE -----

/// alpha0 u(0) + beta0 u'(0) = gamma0, alpha1 u(1) + beta1 u'(1) = gamma1.
struct TwoPointBC {
    double alpha0 = 0.0, beta0 = 1.0, gamma0 = 0.0;
    double alpha1 = 1.0, beta1 = 0.0, gamma1 = 0.0;

    /// u'(0) = 0, u(1) = 0
    static TwoPointBC neumann_dirichlet() { return {}; }
    static TwoPointBC dirichlet(double u0 = 0.0, double u1 = 0.0) { return {1.0, 0.0, u0, 1.0, 0.0, u1}; }
};

/// u'' - a(x) u = f(x) on [0, 1]. With shift = 1 the unknown is psi = u'' + u
/// instead of u'', which keeps both integration constants alive for
/// derivative-only boundary conditions.
struct OdeBvp {
    Function1 a;
    Function1 f;
    TwoPointBC bc;
    int shift = 0;
};

struct OdeSolution {
    Vector psi, u, du;
    double c0 = 0.0, c1 = 0.0;
};

/// u = ∫_0^x G(x - xi) psi + c0 phi0 + c1 phi1 with the constants tied to psi
/// through the boundary conditions.
class OdeReduction {
public:
    OdeReduction(OdeBvp p, const Grid& grid) : p_(std::move(p)), grid_(grid) {
        if (p_.shift != 0 && p_.shift != 1) throw InvalidArgument("ode_bvp_reduce: shift must be 0 or 1");
        if (std::abs(grid_.a()) > 1e-14 || std::abs(grid_.b() - 1.0) > 1e-14) throw InvalidArgument("ode_bvp_reduce: grid must cover [0, 1]");
        if (!p_.a || !p_.f) throw InvalidArgument("ode_bvp_reduce: coefficient and right-hand side are required");
        c_ = cumulative_weights(grid_);
        const auto& bc = p_.bc;
        m_ << bc.alpha0, bc.beta0, bc.alpha1 * phi0(1.0) + bc.beta1 * dphi0(1.0), bc.alpha1 * phi1(1.0) + bc.beta1 * dphi1(1.0);
        if (std::abs(m_.determinant()) < 1e-12) throw InvalidArgument("ode_bvp_reduce: unsupported boundary conditions for this shift");
        const Eigen::Vector2d d = m_.lu().solve(Eigen::Vector2d(bc.gamma0, bc.gamma1));
        const Eigen::Vector2d q = m_.lu().solve(Eigen::Vector2d(0.0, 1.0));
        d0_ = d[0];
        d1_ = d[1];
        p0_ = q[0];
        p1_ = q[1];
        const auto n = static_cast<Eigen::Index>(grid_.size());
        // functional ell(psi) = alpha1 ∫G(1-xi)psi + beta1 ∫G'(1-xi)psi, with the last cumulative row
        ell_.resize(n);
        for (Eigen::Index j = 0; j < n; ++j) {
            const double s = 1.0 - x(j);
            ell_[j] = c_(n - 1, j) * (bc.alpha1 * G(s) + bc.beta1 * dG(s));
        }
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }

    /// psi = (a + s) [V psi - phi_p(x) ell(psi)] + (a + s)(d0 phi0 + d1 phi1) + f, as a single-block problem.
    [[nodiscard]] SecondKindProblem fredholm_problem() const {
        const auto n = static_cast<Eigen::Index>(grid_.size());
        Matrix k = Matrix::Zero(n, n);
        Vector rhs(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double coef = p_.a(x(i)) + p_.shift;
            const double php = p0_ * phi0(x(i)) + p1_ * phi1(x(i));
            for (Eigen::Index j = 0; j < n; ++j) {
                double v = -php * ell_[j];
                if (j <= i) v += c_(i, j) * G(x(i) - x(j));
                k(i, j) = coef * v;
            }
            rhs[i] = coef * (d0_ * phi0(x(i)) + d1_ * phi1(x(i))) + p_.f(x(i));
        }
        SecondKindProblem prob;
        prob.grids = {grid_};
        prob.blocks = {{std::move(k)}};
        prob.mu = 1.0;
        prob.rhs = {std::move(rhs)};
        return prob;
    }

    /// Route through the Fredholm equation: one dense solve.
    [[nodiscard]] OdeSolution solve_fredholm() const {
        const SecondKindSolution sol = nystrom_solve(fredholm_problem());
        return reconstruct(sol.blocks[0]);
    }

    /// Route through three Volterra solves and a 2x2 system for the constants.
    [[nodiscard]] OdeSolution solve_volterra() const {
        const auto n = static_cast<Eigen::Index>(grid_.size());
        VolterraSecondKind v{grid_, Matrix::Zero(n, n), Vector::Zero(n)};
        for (Eigen::Index i = 0; i < n; ++i) {
            const double coef = p_.a(x(i)) + p_.shift;
            for (Eigen::Index j = 0; j <= i; ++j) v.weighted(i, j) = -coef * c_(i, j) * G(x(i) - x(j));
        }
        auto solve_with = [&](const Function1& rhs) {
            for (Eigen::Index i = 0; i < n; ++i) v.rhs[i] = rhs(x(i));
            return v.solve();
        };
        const Vector pf = solve_with(p_.f);
        const Vector p0 = solve_with([&](double t) { return (p_.a(t) + p_.shift) * phi0(t); });
        const Vector p1 = solve_with([&](double t) { return (p_.a(t) + p_.shift) * phi1(t); });
        Eigen::Matrix2d sys = m_;
        sys(1, 0) += ell_.dot(p0);
        sys(1, 1) += ell_.dot(p1);
        const double det = sys.determinant();
        if (std::abs(det) < 1e-14) throw SingularSystemError("ode_bvp_reduce: constants system is singular", 0.0);
        const Eigen::Vector2d c = sys.lu().solve(Eigen::Vector2d(p_.bc.gamma0, p_.bc.gamma1 - ell_.dot(pf)));
        OdeSolution out = reconstruct(pf + c[0] * p0 + c[1] * p1);
        return out;
    }

    /// u and u' on the grid from psi samples; constants follow from psi.
    [[nodiscard]] OdeSolution reconstruct(const Vector& psi) const {
        const auto n = static_cast<Eigen::Index>(grid_.size());
        if (psi.size() != n) throw InvalidArgument("ode reconstruct: length mismatch");
        OdeSolution s;
        s.psi = psi;
        const double l = ell_.dot(psi);
        s.c0 = d0_ - p0_ * l;
        s.c1 = d1_ - p1_ * l;
        s.u.resize(n);
        s.du.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            double u = s.c0 * phi0(x(i)) + s.c1 * phi1(x(i));
            double du = s.c0 * dphi0(x(i)) + s.c1 * dphi1(x(i));
            for (Eigen::Index j = 0; j <= i; ++j) {
                if (c_(i, j) == 0.0) continue;
                u += c_(i, j) * G(x(i) - x(j)) * psi[j];
                du += c_(i, j) * dG(x(i) - x(j)) * psi[j];
            }
            s.u[i] = u;
            s.du[i] = du;
        }
        return s;
    }

    /// Left-hand sides of the two boundary conditions minus their targets.
    [[nodiscard]] std::pair<double, double> bc_defects(const OdeSolution& s) const {
        const auto last = s.u.size() - 1;
        const auto& bc = p_.bc;
        return {bc.alpha0 * s.u[0] + bc.beta0 * s.du[0] - bc.gamma0, bc.alpha1 * s.u[last] + bc.beta1 * s.du[last] - bc.gamma1};
    }

private:
    [[nodiscard]] double x(Eigen::Index i) const { return grid_.node(static_cast<std::size_t>(i)); }
    [[nodiscard]] double G(double s) const { return p_.shift == 0 ? s : std::sin(s); }
    [[nodiscard]] double dG(double s) const { return p_.shift == 0 ? 1.0 : std::cos(s); }
    [[nodiscard]] double phi0(double t) const { return p_.shift == 0 ? 1.0 : std::cos(t); }
    [[nodiscard]] double phi1(double t) const { return p_.shift == 0 ? t : std::sin(t); }
    [[nodiscard]] double dphi0(double t) const { return p_.shift == 0 ? 0.0 : -std::sin(t); }
    [[nodiscard]] double dphi1(double t) const { return p_.shift == 0 ? 1.0 : std::cos(t); }

    OdeBvp p_;
    Grid grid_;
    Matrix c_;
    Eigen::Matrix2d m_;
    Vector ell_;
    double d0_ = 0.0, d1_ = 0.0, p0_ = 0.0, p1_ = 0.0;
};

inline OdeReduction ode_bvp_reduce(OdeBvp p, const Grid& grid) { return {std::move(p), grid}; }

// ----------------------------------------------------------- 2D forms -----

/// ∫_lo^s volterra(s, sigma) phi(sigma) dsigma + ∫_lo^hi fredholm(s, sigma) phi(sigma) dsigma
struct SplitKernel {
    Kernel2 volterra;
    Kernel2 fredholm;

    [[nodiscard]] bool empty() const { return !volterra && !fredholm; }

    [[nodiscard]] Matrix discretize(const Grid& g) const {
        if (empty()) return Matrix::Zero(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
        return discretize_split_kernel(volterra, fredholm, g).matrix;
    }

    /// Off-grid application to a callable, by Gauss-Legendre on each piece.
    [[nodiscard]] double apply(const Function1& phi, double s, double lo, double hi, std::size_t nodes = 64) const {
        double out = 0.0;
        if (volterra && s > lo) {
            const Grid q = build_grid(lo, s, QuadRule::gauss_legendre, nodes);
            for (std::size_t k = 0; k < q.size(); ++k) out += q.weight(k) * volterra(s, q.node(k)) * phi(q.node(k));
        }
        if (fredholm) {
            const Grid q = build_grid(lo, hi, QuadRule::gauss_legendre, nodes);
            for (std::size_t k = 0; k < q.size(); ++k) out += q.weight(k) * fredholm(s, q.node(k)) * phi(q.node(k));
        }
        return out;
    }
};

struct ReducedFirstKind2D {
    SplitKernel tau1;              ///< acts along x
    SplitKernel tau2;              ///< acts along y
    double double_volterra = 0.0;  ///< coefficient of ∫_0^x ∫_0^y
    Function2 f;
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

    [[nodiscard]] TensorGrid grid(QuadRule rule, std::size_t nx, std::size_t ny) const {
        return {build_grid(x0, x1, rule, nx), build_grid(y0, y1, rule, ny)};
    }
};

/// Block-diagonal copies of a 1D x-matrix plus y-matrix couplings: kron(I, Mx) + kron(My, I).
inline Matrix tensor_operator(const Matrix& mx, const Matrix& my) {
    const Eigen::Index nx = mx.rows(), ny = my.rows();
    Matrix a = Matrix::Zero(nx * ny, nx * ny);
    for (Eigen::Index j = 0; j < ny; ++j) {
        a.block(j * nx, j * nx, nx, nx) += mx;
        for (Eigen::Index jj = 0; jj < ny; ++jj)
            if (my(j, jj) != 0.0) a.block(j * nx, jj * nx, nx, nx).diagonal().array() += my(j, jj);
    }
    return a;
}

inline Matrix kronecker(const Matrix& outer, const Matrix& inner) {
    Matrix k(outer.rows() * inner.rows(), outer.cols() * inner.cols());
    for (Eigen::Index i = 0; i < outer.rows(); ++i)
        for (Eigen::Index j = 0; j < outer.cols(); ++j) k.block(i * inner.rows(), j * inner.cols(), inner.rows(), inner.cols()) = outer(i, j) * inner;
    return k;
}

/// Weighted dense matrix of the 2D operator on the tensor grid.
inline Matrix assemble_operator(const ReducedFirstKind2D& p, const TensorGrid& tg) {
    Matrix a = tensor_operator(p.tau1.discretize(tg.gx), p.tau2.discretize(tg.gy));
    if (p.double_volterra != 0.0) a += p.double_volterra * kronecker(cumulative_weights(tg.gy), cumulative_weights(tg.gx));
    return a;
}

inline double residual_2d(const ReducedFirstKind2D& p, const TensorGrid& tg, const Vector& psi) {
    return tg.l2_norm(assemble_operator(p, tg) * psi - tg.sample(p.f));
}

namespace detail {

// [∫_lo^s (s - sigma) - ((s - lo)/(hi - lo)) ∫_lo^hi (hi - sigma)] · weight(sigma)
inline SplitKernel dirichlet_double_integral(double lo, double hi, Function1 weight = {}) {
    const double len = hi - lo;
    auto wt = [weight](double sg) { return weight ? weight(sg) : 1.0; };
    return {[wt](double s, double sg) { return (s - sg) * wt(sg); },
            [lo, hi, len, wt](double s, double sg) { return -((s - lo) / len) * (hi - sg) * wt(sg); }};
}

inline SplitKernel scaled(SplitKernel k, double c) {
    if (k.volterra) k.volterra = [v = k.volterra, c](double s, double sg) { return c * v(s, sg); };
    if (k.fredholm) k.fredholm = [v = k.fredholm, c](double s, double sg) { return c * v(s, sg); };
    return k;
}

}  // namespace detail

/// Dirichlet Poisson problem -Δu = load on the unit square, reduced with
/// psi = ∂x² u. Reconstructions u1 = Bx psi and u2 = -By (psi + load).
struct Poisson2DReduction {
    ReducedFirstKind2D problem;
    Function2 load;
    SplitKernel bx, by;

    [[nodiscard]] Vector u1(const TensorGrid& tg, const Vector& psi) const {
        return apply_along_x(bx.discretize(tg.gx), psi, tg.gx.size(), tg.gy.size());
    }
    [[nodiscard]] Vector u2(const TensorGrid& tg, const Vector& psi) const {
        const Matrix my = by.discretize(tg.gy);
        return -(tensor_operator(Matrix::Zero(static_cast<Eigen::Index>(tg.gx.size()), static_cast<Eigen::Index>(tg.gx.size())), my) *
                 (psi + tg.sample(load)));
    }
};

inline Poisson2DReduction poisson2d_reduce(Function2 load = {}) {
    if (!load) load = [](double, double) { return 1.0; };
    Poisson2DReduction r;
    r.load = load;
    r.bx = detail::dirichlet_double_integral(0.0, 1.0);
    r.by = detail::dirichlet_double_integral(0.0, 1.0);
    r.problem.tau1 = r.bx;
    r.problem.tau2 = r.by;
    const SplitKernel by = r.by;
    r.problem.f = [by, load](double x, double y) { return -by.apply([&](double eta) { return load(x, eta); }, y, 0.0, 1.0); };
    return r;
}

struct ClosureEstimate {
    double delta = 0.0;
    Vector u1, u2;  ///< boundary-corrected fields U1, U2
};

/// U1 = u1 - (1 - y) u1(x, y0) - y u1(x, y1), U2 = u2 - (1 - x) u2(x0, y) - x u2(x1, y)
/// (coordinates normalized to the grid's interval); delta = 2||U1 - U2|| / ||U1 + U2||.
inline ClosureEstimate boundary_symmetrize(const Vector& u1, const Vector& u2, const TensorGrid& tg) {
    const std::size_t nx = tg.gx.size(), ny = tg.gy.size();
    if (u1.size() != tg.size() || u2.size() != tg.size()) throw InvalidArgument("boundary_symmetrize: grid mismatch");
    ClosureEstimate c;
    c.u1 = u1;
    c.u2 = u2;
    for (std::size_t j = 0; j < ny; ++j) {
        const double ty = (tg.gy.node(j) - tg.gy.a()) / tg.gy.length();
        for (std::size_t i = 0; i < nx; ++i) {
            const double tx = (tg.gx.node(i) - tg.gx.a()) / tg.gx.length();
            c.u1[tg.index(i, j)] = u1[tg.index(i, j)] - (1.0 - ty) * u1[tg.index(i, 0)] - ty * u1[tg.index(i, ny - 1)];
            c.u2[tg.index(i, j)] = u2[tg.index(i, j)] - (1.0 - tx) * u2[tg.index(0, j)] - tx * u2[tg.index(nx - 1, j)];
        }
    }
    const double den = tg.l2_norm(c.u1 + c.u2);
    const double num = tg.l2_norm(c.u1 - c.u2);
    c.delta = den > 0.0 ? 2.0 * num / den : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return c;
}

/// u_t = u_xx on [0,1] x [0,T], u(x,0) = u0, u(0,t) = u(1,t) = 0, reduced with psi = u_xx:
/// Bx psi - ∫_0^t psi = u0.
struct HeatReduction {
    ReducedFirstKind2D problem;
    Function1 u0;
    SplitKernel bx;

    /// u from the spatial representation.
    [[nodiscard]] Vector u_space(const TensorGrid& tg, const Vector& psi) const {
        return apply_along_x(bx.discretize(tg.gx), psi, tg.gx.size(), tg.gy.size());
    }
    /// u from the time representation, u = ∫_0^t psi + u0.
    [[nodiscard]] Vector u_time(const TensorGrid& tg, const Vector& psi) const {
        const auto nx = static_cast<Eigen::Index>(tg.gx.size());
        return tensor_operator(Matrix::Zero(nx, nx), cumulative_weights(tg.gy)) * psi + tg.sample([this](double x, double) { return u0(x); });
    }
};

inline HeatReduction heat_reduce(Function1 u0, double T = 1.0) {
    if (!u0) throw InvalidArgument("heat_reduce: initial data required");
    if (!(T > 0.0)) throw InvalidArgument("heat_reduce: final time must be positive");
    if (std::abs(u0(0.0)) > 1e-12 || std::abs(u0(1.0)) > 1e-12)
        throw InvalidArgument("heat_reduce: initial data must vanish at x = 0 and x = 1");
    HeatReduction h;
    h.u0 = u0;
    h.bx = detail::dirichlet_double_integral(0.0, 1.0);
    h.problem.tau1 = h.bx;
    h.problem.tau2 = {[](double, double) { return -1.0; }, {}};
    h.problem.f = [u0](double x, double) { return u0(x); };
    h.problem.y1 = T;
    return h;
}

/// u_t = eps u_xx + beta u_x with u(0,x) = 0, u(t,0) = 0, u(t,1) = u1(t),
/// reduced with psi = u_xx into (eps A1 + A2) psi = u1(t),
/// A1 = ∫_0^t, A2 = beta ∫_0^x ∫_0^t - [∫_0^x (x - xi) - ∫_0^1 (1 - xi)].
struct ConvectionDiffusionReduction {
    double epsilon = 0.0;
    double beta = 1.0;
    ReducedFirstKind2D a1;    ///< epsilon factored out
    ReducedFirstKind2D a2;
    ReducedFirstKind2D full;  ///< eps A1 + A2 with the right-hand side

    /// Transform kernels split by linearity: K(eps A1 + A2) = eps R1 + R2.
    struct Split {
        Matrix R1, R2;
        Vector F;
    };

    [[nodiscard]] Split transform_split(const TensorGrid& tg, const TransformConfig& c) const;
};

inline ConvectionDiffusionReduction convection_diffusion_reduce(double epsilon, double beta, Function1 u1, double T = 1.0) {
    if (!(beta > 0.0)) throw InvalidArgument("convection_diffusion_reduce: beta must be positive");
    if (!(epsilon >= 0.0)) throw InvalidArgument("convection_diffusion_reduce: epsilon must be non-negative");
    if (!u1) throw InvalidArgument("convection_diffusion_reduce: boundary data required");
    ConvectionDiffusionReduction r;
    r.epsilon = epsilon;
    r.beta = beta;
    const Function2 f = [u1](double, double t) { return u1(t); };
    r.a1.tau2 = {[](double, double) { return 1.0; }, {}};
    r.a1.f = f;
    r.a1.y1 = T;
    r.a2.tau1 = {[](double x, double xi) { return -(x - xi); }, [](double, double xi) { return 1.0 - xi; }};
    r.a2.double_volterra = beta;
    r.a2.f = f;
    r.a2.y1 = T;
    r.full = r.a2;
    r.full.tau2 = detail::scaled(r.a1.tau2, epsilon);
    return r;
}

inline ConvectionDiffusionReduction::Split ConvectionDiffusionReduction::transform_split(const TensorGrid& tg,
                                                                                         const TransformConfig& c) const {
    detail::require_admissible(c);
    const Matrix m1 = assemble_operator(a1, tg);
    const Matrix m2 = assemble_operator(a2, tg);
    const Matrix zero = Matrix::Zero(tg.size(), tg.size());
    Split s;
    s.R2 = detail::transform_2d_kernel(m2, tg, c);
    s.R1 = detail::transform_2d_kernel(m1, tg, c) - detail::transform_2d_kernel(zero, tg, c);
    s.F = Vector::Zero(2 * tg.size());
    s.F.head(tg.size()) = c.mu * tg.sample(full.f);
    return s;
}

struct EpsilonExpansion {
    std::vector<Vector> chi;  ///< chi_0 .. chi_M
    Vector partial_sum;       ///< sum eps^m chi_m
    double telescoping_residual = 0.0;  ///< defect of the full equation after accounting for the truncation term
    double truncation_norm = 0.0;       ///< ||eps^{M+1} mu R1 chi_M||
};

/// chi_0 = mu R2 chi_0 + F, chi_{m+1} = mu R2 chi_{m+1} + mu R1 chi_m, m < M.
/// The truncated sum S satisfies S = mu (eps R1 + R2) S + F - eps^{M+1} mu R1 chi_M exactly.
inline EpsilonExpansion epsilon_expansion(const ConvectionDiffusionReduction::Split& s, double epsilon, double mu, int terms) {
    if (terms < 1) throw InvalidArgument("epsilon_expansion: need at least one term");
    Matrix sys = -mu * s.R2;
    sys.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Matrix> lu(sys);
    const double rc = lu.rcond();
    if (!(rc >= 1e-12)) throw SingularSystemError("epsilon_expansion: I - mu R2 is singular", rc);
    EpsilonExpansion e;
    e.chi.push_back(lu.solve(s.F));
    for (int m = 1; m < terms; ++m) e.chi.push_back(lu.solve(mu * (s.R1 * e.chi.back())));
    e.partial_sum = Vector::Zero(s.F.size());
    double em = 1.0;
    for (const auto& c : e.chi) {
        e.partial_sum += em * c;
        em *= epsilon;
    }
    // em now equals eps^{M+1}
    const Vector trunc = em * mu * (s.R1 * e.chi.back());
    const Vector lhs = e.partial_sum - mu * (epsilon * (s.R1 * e.partial_sum) + s.R2 * e.partial_sum) - s.F;
    const double scale = std::max(1.0, s.F.norm());
    e.telescoping_residual = (lhs + trunc).norm() / scale;
    e.truncation_norm = trunc.norm();
    return e;
}

/// Tricomi problem y u_xx + u_yy = 0 on [0,1] x [-1,1] with u = 0 on x = 0, x = 1, y = -1
/// and u(x, 1) = nu(x), reduced with psi = u_xx.
struct TricomiReduction {
    ReducedFirstKind2D problem;
    Function1 nu;
    SplitKernel bx;
    SplitKernel ty;  ///< the eta-weighted y kernel

    /// u from the x-representation, off-grid, for a callable psi.
    [[nodiscard]] double u_from_x(const Function2& psi, double x, double y) const {
        return bx.apply([&](double xi) { return psi(xi, y); }, x, 0.0, 1.0);
    }
    /// u from the y-representation: -Ty psi + (1 + y) nu / 2.
    [[nodiscard]] double u_from_y(const Function2& psi, double x, double y) const {
        return -ty.apply([&](double eta) { return psi(x, eta); }, y, -1.0, 1.0) + 0.5 * (1.0 + y) * nu(x);
    }
    /// ∂y of the y-representation: -[∫_{-1}^y eta psi - (1/2)∫_{-1}^1 (1 - eta) eta psi] + nu / 2.
    [[nodiscard]] double dudy_from_y(const Function2& psi, double x, double y) const {
        const SplitKernel d{[](double, double eta) { return eta; }, [](double, double eta) { return -0.5 * (1.0 - eta) * eta; }};
        return -d.apply([&](double eta) { return psi(x, eta); }, y, -1.0, 1.0) + 0.5 * nu(x);
    }
};

inline TricomiReduction tricomi_reduce(Function1 nu) {
    if (!nu) throw InvalidArgument("tricomi_reduce: boundary data required");
    if (std::abs(nu(0.0)) > 1e-12 || std::abs(nu(1.0)) > 1e-12)
        throw InvalidArgument("tricomi_reduce: nu must vanish at x = 0 and x = 1");
    TricomiReduction t;
    t.nu = nu;
    t.bx = detail::dirichlet_double_integral(0.0, 1.0);
    t.ty = {[](double y, double eta) { return (y - eta) * eta; }, [](double y, double eta) { return -0.5 * (1.0 + y) * (1.0 - eta) * eta; }};
    t.problem.tau1 = t.bx;
    t.problem.tau2 = t.ty;
    t.problem.f = [nu](double x, double y) { return 0.5 * (1.0 + y) * nu(x); };
    t.problem.y0 = -1.0;
    t.problem.y1 = 1.0;
    return t;
}

}  // namespace fredholm
