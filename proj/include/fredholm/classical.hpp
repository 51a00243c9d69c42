#pragma once

/// Classical baselines for first-kind equations: Lavrentiev regularization,
/// the norm-ball quasisolution, and the explicit/implicit iteration family.
///
/// All iterations work on the Nyström matrix A (weights folded in) and measure
/// distances in the grid-weighted L2 norm. Adjoints are taken with respect to
/// that inner product, A* = W^{-1} A^T W.

#include "fredholm/errors.hpp"
#include "fredholm/first_kind.hpp"
#include "fredholm/grid.hpp"
#include "fredholm/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <locale>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fredholm {

enum class RegularizationVariant { lavrentiev, stabilized_p0 };

struct RegularizationParams {
    double alpha = 1e-3;
    Function1 p0;  ///< stabilizer weight, used by stabilized_p0 only
    RegularizationVariant variant = RegularizationVariant::lavrentiev;
};

enum class StopMeasure {
    successive_distance,  ///< ||psi_{n+1} - psi_n||
    discrepancy,          ///< ||A psi_n - f||
};

/// Stop once the chosen measure is <= c1*delta + c2*gamma. Without any error
/// level the fallback tolerance is used on the same measure.
struct StoppingRule {
    StopMeasure measure = StopMeasure::successive_distance;
    double c1 = 1.0;
    double c2 = 0.0;
    std::optional<double> delta;
    std::optional<double> gamma;
    double fallback_tol = 1e-10;

    [[nodiscard]] double threshold() const {
        if (!delta && !gamma) return fallback_tol;
        const double t = c1 * delta.value_or(0.0) + c2 * gamma.value_or(0.0);
        if (t < 0.0) throw InvalidArgument("stopping threshold must be non-negative");
        return t;
    }
};

enum class IterationScheme { fridman, landweber, averaged, implicit, steepest_descent };

inline std::string_view to_string(IterationScheme s) {
    switch (s) {
        case IterationScheme::fridman: return "fridman";
        case IterationScheme::landweber: return "landweber";
        case IterationScheme::averaged: return "averaged";
        case IterationScheme::implicit: return "implicit";
        case IterationScheme::steepest_descent: return "steepest_descent";
    }
    return "unknown";
}

struct IterationParams {
    IterationScheme scheme = IterationScheme::fridman;
    double step = 1.0;  ///< lambda (fridman, averaged), nu (landweber), alpha (implicit); unused by steepest descent
    int max_iters = 1000;
    StoppingRule stop;
    std::optional<double> lambda1;  ///< smallest characteristic number, if known
    bool record_history = false;
};

struct MethodResult {
    Vector solution;
    std::vector<double> residual_history;  ///< ||A psi_n - f||, initial iterate included
    int iterations_used = 0;
    bool converged = false;
    std::string params_summary;  ///< ';'-separated key=value pairs
    std::vector<Vector> history;  ///< iterates, when requested
    std::vector<std::string> warnings;
};

namespace detail {

inline std::string fmt_double(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    os.precision(6);
    os << v;
    return os.str();
}

// W^{1/2} A W^{-1/2}: similar to A, orthogonal-invariant in the weighted norm.
inline Matrix weight_symmetrized(const DiscreteOperator& a) {
    const Vector sw = a.row_grid.weight_vector().cwiseSqrt();
    const Vector isw = a.col_grid.weight_vector().cwiseSqrt().cwiseInverse();
    return sw.asDiagonal() * a.matrix * isw.asDiagonal();
}

inline Matrix weighted_adjoint(const DiscreteOperator& a) {
    return a.col_grid.weight_vector().cwiseInverse().asDiagonal() * a.matrix.transpose() *
           a.row_grid.weight_vector().asDiagonal();
}

inline void check_square(const DiscreteOperator& a, const Vector& f, const Vector& psi0) {
    if (a.matrix.rows() != a.matrix.cols()) throw InvalidArgument("operator must be square on one grid");
    if (f.size() != a.matrix.rows() || psi0.size() != a.matrix.cols()) throw InvalidArgument("length mismatch");
}

}  // namespace detail

/// Largest eigenvalue of the weight-symmetrized operator, i.e. 1/lambda_1 for a
/// symmetric positive kernel.
inline double largest_eigenvalue(const DiscreteOperator& a) {
    Matrix s = detail::weight_symmetrized(a);
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

/// ||A* A|| in the weighted norm.
inline double normal_operator_norm(const DiscreteOperator& a) {
    Eigen::JacobiSVD<Matrix> svd(detail::weight_symmetrized(a));
    const double s = svd.singularValues()(0);
    return s * s;
}

/// Solves alpha p0 psi + A psi = f (p0 = 1 for plain Lavrentiev).
inline MethodResult lavrentiev_solve(const DiscreteOperator& a, const Vector& f, const RegularizationParams& params) {
    if (!(params.alpha > 0.0)) throw InvalidArgument("lavrentiev_solve: alpha must be positive");
    if (a.matrix.rows() != a.matrix.cols() || f.size() != a.matrix.rows()) throw InvalidArgument("lavrentiev_solve: shape mismatch");
    Matrix m = a.matrix;
    if (params.variant == RegularizationVariant::stabilized_p0) {
        if (!params.p0) throw InvalidArgument("lavrentiev_solve: stabilized_p0 needs a p0 function");
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double p = params.p0(a.row_grid.node(static_cast<std::size_t>(i)));
            if (!(p >= 0.0)) throw InvalidArgument("lavrentiev_solve: p0 must be non-negative");
            m(i, i) += params.alpha * p;
        }
    } else {
        m.diagonal().array() += params.alpha;
    }
    Eigen::PartialPivLU<Matrix> lu(m);
    const double rc = lu.rcond();
    if (!(rc > 1e-12)) throw SingularSystemError("lavrentiev_solve: regularized system is singular", rc);
    MethodResult out;
    out.solution = lu.solve(f);
    out.residual_history.push_back(residual_norm(a, f, out.solution));
    out.converged = true;
    out.params_summary = std::string("alpha=") + detail::fmt_double(params.alpha) +
                         (params.variant == RegularizationVariant::stabilized_p0 ? ";variant=stabilized_p0" : ";variant=lavrentiev");
    return out;
}

inline MethodResult lavrentiev_solve(const FirstKindProblem& p, const Grid& grid, const RegularizationParams& params) {
    return lavrentiev_solve(discretize_kernel(p.kernel, grid, grid), grid.sample(p.f), params);
}

struct QuasiSolution {
    MethodResult result;
    std::vector<double> coefficients;  ///< solution coefficients on the basis
    double lagrange = 0.0;             ///< 0 when the constraint is inactive
};

/// Minimizes ||A psi - f|| over ||psi|| <= R within the span of the first
/// n_terms basis functions. Coefficients of f come from high-order quadrature;
/// the result is sampled on `grid`.
inline QuasiSolution quasisolution_solve(const SpectralBasis& basis, const Function1& f, double R, std::size_t n_terms,
                                         const Grid& grid) {
    if (!(R > 0.0)) throw InvalidArgument("quasisolution_solve: R must be positive");
    const std::vector<double> c = detail::spectral_coefficients(basis, f, n_terms, 256);
    const auto& lam = basis.char_numbers;
    auto norm_at = [&](double tau) {
        double s = 0.0;
        for (std::size_t n = 0; n < n_terms; ++n) {
            const double an = c[n] * lam[n] / (1.0 + tau * lam[n] * lam[n]);
            s += an * an;
        }
        return std::sqrt(s);
    };
    QuasiSolution q;
    double tau = 0.0;
    if (norm_at(0.0) > R) {
        double hi = 1.0;
        int doublings = 0;
        while (norm_at(hi) > R) {
            hi *= 2.0;
            if (++doublings > 2000) throw Error("quasisolution_solve: failed to bracket the Lagrange parameter");
        }
        double lo = 0.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            (norm_at(mid) > R ? lo : hi) = mid;
        }
        tau = 0.5 * (lo + hi);
    }
    q.lagrange = tau;
    double resid2 = 0.0;
    for (std::size_t n = 0; n < n_terms; ++n) {
        const double an = c[n] * lam[n] / (1.0 + tau * lam[n] * lam[n]);
        q.coefficients.push_back(an);
        const double d = c[n] - an / lam[n];
        resid2 += d * d;
    }
    q.result.solution = Vector::Zero(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t n = 0; n < n_terms; ++n) q.result.solution += q.coefficients[n] * grid.sample(basis.eigenfunctions[n]);
    q.result.residual_history.push_back(std::sqrt(resid2));
    q.result.converged = true;
    q.result.params_summary = "R=" + detail::fmt_double(R) + ";terms=" + std::to_string(n_terms) + ";lagrange=" + detail::fmt_double(tau);
    return q;
}

namespace detail {

struct IterationLoop {
    const DiscreteOperator& a;
    const Vector& f;
    const IterationParams& params;
    MethodResult out;
    double threshold;

    IterationLoop(const DiscreteOperator& a_, const Vector& f_, const IterationParams& p)
        : a(a_), f(f_), params(p), threshold(p.stop.threshold()) {
        if (p.max_iters < 1) throw InvalidArgument("max_iters must be positive");
    }

    // False when the initial iterate already meets a discrepancy rule.
    bool start(const Vector& psi0) {
        out.solution = psi0;
        out.residual_history.push_back(residual_norm(a, f, psi0));
        if (params.record_history) out.history.push_back(psi0);
        if (params.stop.measure == StopMeasure::discrepancy && out.residual_history.back() <= threshold) {
            out.converged = true;
            return false;
        }
        return true;
    }

    // Accepts the next iterate; true when the stopping rule fires.
    bool accept(Vector next) {
        const double dist = l2_norm(a.col_grid, next - out.solution);
        out.solution = std::move(next);
        ++out.iterations_used;
        out.residual_history.push_back(residual_norm(a, f, out.solution));
        if (params.record_history) out.history.push_back(out.solution);
        if (!std::isfinite(dist)) throw DivergenceError("iteration produced non-finite values");
        const double measure = params.stop.measure == StopMeasure::discrepancy ? out.residual_history.back() : dist;
        if (measure <= threshold) {
            out.converged = true;
            return true;
        }
        return false;
    }
};

inline void check_fridman_step(const DiscreteOperator& a, const IterationParams& params, double step, MethodResult& out) {
    if (!(step > 0.0)) throw InvalidArgument("fridman step must be positive");
    if (params.lambda1) {
        if (!(step < 2.0 * *params.lambda1))
            throw InvalidArgument("fridman step " + fmt_double(step) + " violates 0 < step < 2*lambda1 = " +
                                  fmt_double(2.0 * *params.lambda1));
        return;
    }
    const double top = largest_eigenvalue(a);
    if (top > 0.0 && !(step < 2.0 / top))
        out.warnings.push_back("step exceeds 2*lambda1 estimated from the discrete operator (" + fmt_double(2.0 / top) + ")");
}

}  // namespace detail

/// psi_{n+1} = psi_n + lambda (f - A psi_n)
inline MethodResult fridman_iterate(const DiscreteOperator& a, const Vector& f, const IterationParams& params, const Vector& psi0) {
    detail::check_square(a, f, psi0);
    detail::IterationLoop loop(a, f, params);
    detail::check_fridman_step(a, params, params.step, loop.out);
    const bool run = loop.start(psi0);
    for (int it = 0; run && it < params.max_iters; ++it) {
        Vector next = loop.out.solution + params.step * (f - a.matrix * loop.out.solution);
        if (loop.accept(std::move(next))) break;
    }
    loop.out.params_summary = "scheme=fridman;step=" + detail::fmt_double(params.step);
    return loop.out;
}

/// psi_{n+1} = (I - nu A*A) psi_n + nu A* f
inline MethodResult landweber_iterate(const DiscreteOperator& a, const Vector& f, const IterationParams& params, const Vector& psi0) {
    detail::check_square(a, f, psi0);
    detail::IterationLoop loop(a, f, params);
    const double n1 = normal_operator_norm(a);
    if (!(params.step > 0.0) || (n1 > 0.0 && !(params.step < 2.0 / n1)))
        throw InvalidArgument("landweber step must lie in (0, 2/||A*A||) = (0, " + detail::fmt_double(2.0 / n1) + ")");
    const Matrix adj = detail::weighted_adjoint(a);
    const bool run = loop.start(psi0);
    for (int it = 0; run && it < params.max_iters; ++it) {
        Vector next = loop.out.solution + params.step * (adj * (f - a.matrix * loop.out.solution));
        if (loop.accept(std::move(next))) break;
    }
    loop.out.params_summary = "scheme=landweber;step=" + detail::fmt_double(params.step);
    return loop.out;
}

/// Running mean of the Fridman sequence with unit step.
inline MethodResult averaged_iterate(const DiscreteOperator& a, const Vector& f, const IterationParams& params, const Vector& phi0) {
    detail::check_square(a, f, phi0);
    detail::IterationLoop loop(a, f, params);
    detail::check_fridman_step(a, params, 1.0, loop.out);
    const bool run = loop.start(phi0);
    Vector phi = phi0;
    Vector sum = phi0;
    for (int it = 0; run && it < params.max_iters; ++it) {
        phi += f - a.matrix * phi;
        sum += phi;
        if (loop.accept(sum / static_cast<double>(it + 2))) break;
    }
    loop.out.params_summary = "scheme=averaged;step=1";
    return loop.out;
}

/// alpha psi_{n+1} + A psi_{n+1} = alpha psi_n + f, one factorization reused.
inline MethodResult implicit_iterate(const DiscreteOperator& a, const Vector& f, const IterationParams& params, const Vector& psi0) {
    detail::check_square(a, f, psi0);
    if (!(params.step > 0.0)) throw InvalidArgument("implicit iteration needs alpha > 0");
    detail::IterationLoop loop(a, f, params);
    Matrix m = a.matrix;
    m.diagonal().array() += params.step;
    Eigen::PartialPivLU<Matrix> lu(m);
    const double rc = lu.rcond();
    if (!(rc > 1e-12)) throw SingularSystemError("implicit_iterate: shifted system is singular", rc);
    const bool run = loop.start(psi0);
    for (int it = 0; run && it < params.max_iters; ++it) {
        Vector next = lu.solve(params.step * loop.out.solution + f);
        if (loop.accept(std::move(next))) break;
    }
    loop.out.params_summary = "scheme=implicit;alpha=" + detail::fmt_double(params.step);
    return loop.out;
}

/// Exact line search along the residual gradient g = A*(A psi - f).
inline MethodResult steepest_descent_iterate(const DiscreteOperator& a, const Vector& f, const IterationParams& params,
                                             const Vector& psi0) {
    detail::check_square(a, f, psi0);
    detail::IterationLoop loop(a, f, params);
    const Matrix adj = detail::weighted_adjoint(a);
    const bool run = loop.start(psi0);
    for (int it = 0; run && it < params.max_iters; ++it) {
        const Vector g = adj * (a.matrix * loop.out.solution - f);
        const double gn = l2_norm(a.col_grid, g);
        if (gn < params.stop.fallback_tol) {
            loop.out.converged = true;
            break;
        }
        const Vector ag = a.matrix * g;
        const double agn = l2_norm(a.row_grid, ag);
        if (!(agn > 0.0)) {
            loop.out.converged = true;
            break;
        }
        const double beta = gn * gn / (agn * agn);
        if (loop.accept(loop.out.solution - beta * g)) break;
    }
    loop.out.params_summary = "scheme=steepest_descent";
    return loop.out;
}

inline MethodResult iterate(const DiscreteOperator& a, const Vector& f, const IterationParams& params, const Vector& psi0) {
    switch (params.scheme) {
        case IterationScheme::fridman: return fridman_iterate(a, f, params, psi0);
        case IterationScheme::landweber: return landweber_iterate(a, f, params, psi0);
        case IterationScheme::averaged: return averaged_iterate(a, f, params, psi0);
        case IterationScheme::implicit: return implicit_iterate(a, f, params, psi0);
        case IterationScheme::steepest_descent: return steepest_descent_iterate(a, f, params, psi0);
    }
    throw InvalidArgument("unknown iteration scheme");
}

inline MethodResult iterate(const FirstKindProblem& p, const Grid& grid, const IterationParams& params, const Vector& psi0) {
    return iterate(discretize_kernel(p.kernel, grid, grid), grid.sample(p.f), params, psi0);
}

struct ModeDiagnostic {
    Matrix coefficients;         ///< row = iterate, column = mode
    std::vector<double> ratios;  ///< fitted per-mode contraction ratio
};

/// Projects each iterate on the first n_modes basis functions and fits
/// c_{n+1} - c_n = rho (c_n - c_{n-1}) by least squares.
inline ModeDiagnostic mode_diagnostic(const SpectralBasis& basis, const std::vector<Vector>& history, const Grid& grid,
                                      std::size_t n_modes) {
    if (n_modes > basis.size()) throw InvalidArgument("mode_diagnostic: basis too short");
    ModeDiagnostic d;
    const auto rows = static_cast<Eigen::Index>(history.size());
    d.coefficients = Matrix::Zero(rows, static_cast<Eigen::Index>(n_modes));
    for (std::size_t m = 0; m < n_modes; ++m) {
        const Vector phi = grid.sample(basis.eigenfunctions[m]);
        for (Eigen::Index i = 0; i < rows; ++i)
            d.coefficients(i, static_cast<Eigen::Index>(m)) = inner(grid, history[static_cast<std::size_t>(i)], phi);
    }
    for (std::size_t m = 0; m < n_modes; ++m) {
        const auto col = d.coefficients.col(static_cast<Eigen::Index>(m));
        double num = 0.0, den = 0.0;
        for (Eigen::Index i = 0; i + 2 < rows; ++i) {
            const double d0 = col[i + 1] - col[i];
            const double d1 = col[i + 2] - col[i + 1];
            num += d1 * d0;
            den += d0 * d0;
        }
        d.ratios.push_back(den > 0.0 ? num / den : 1.0);
    }
    return d;
}

/// Removes the component of f along eigfun.
inline Vector perlin_deflate(const Vector& f, const Vector& eigfun, const Grid& grid) {
    const double nn = inner(grid, eigfun, eigfun);
    if (!(nn > 1e-28)) throw InvalidArgument("perlin_deflate: eigenfunction has (near) zero norm");
    return f - eigfun * (inner(grid, f, eigfun) / nn);
}

}  // namespace fredholm
