#pragma once

/// Fredholm equations of the second kind, chi = mu K chi + F, possibly as a
/// block system over several grids.

#include "fredholm/errors.hpp"
#include "fredholm/grid.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace fredholm {

/// blocks[i][j] is a Nyström matrix from grid j to grid i (column weights of grid j folded in).
struct SecondKindProblem {
    std::vector<Grid> grids;
    std::vector<std::vector<Matrix>> blocks;
    double mu = 0.0;
    std::vector<Vector> rhs;

    [[nodiscard]] std::size_t block_count() const noexcept { return grids.size(); }

    void validate() const {
        const std::size_t b = grids.size();
        if (b == 0) throw InvalidArgument("second-kind problem needs at least one block");
        if (blocks.size() != b || rhs.size() != b) throw InvalidArgument("block count mismatch");
        for (std::size_t i = 0; i < b; ++i) {
            if (blocks[i].size() != b) throw InvalidArgument("block row has the wrong number of blocks");
            if (static_cast<std::size_t>(rhs[i].size()) != grids[i].size()) throw InvalidArgument("rhs block has the wrong length");
            for (std::size_t j = 0; j < b; ++j)
                if (static_cast<std::size_t>(blocks[i][j].rows()) != grids[i].size() ||
                    static_cast<std::size_t>(blocks[i][j].cols()) != grids[j].size())
                    throw InvalidArgument("block (" + std::to_string(i) + "," + std::to_string(j) + ") has inconsistent dimensions");
        }
    }

    /// Single-block problem from one operator.
    static SecondKindProblem single(const DiscreteOperator& k, double mu, Vector f) {
        SecondKindProblem p;
        p.grids = {k.row_grid};
        p.blocks = {{k.matrix}};
        p.mu = mu;
        p.rhs = {std::move(f)};
        p.validate();
        return p;
    }
};

/// The block system written as one equation on the concatenated node set.
struct StackedSystem {
    Matrix kernel;
    Vector rhs;
    Vector weights;
    std::vector<Eigen::Index> offsets;  ///< start of each block, plus the total size at the end
};

/// Assembles the stacked matrix by whole-block copies.
inline StackedSystem assemble_blocks(const SecondKindProblem& p) {
    p.validate();
    StackedSystem s;
    s.offsets.push_back(0);
    for (const auto& g : p.grids) s.offsets.push_back(s.offsets.back() + static_cast<Eigen::Index>(g.size()));
    const Eigen::Index n = s.offsets.back();
    s.kernel = Matrix::Zero(n, n);
    s.rhs = Vector::Zero(n);
    s.weights = Vector::Zero(n);
    for (std::size_t i = 0; i < p.block_count(); ++i) {
        const auto ni = static_cast<Eigen::Index>(p.grids[i].size());
        s.rhs.segment(s.offsets[i], ni) = p.rhs[i];
        s.weights.segment(s.offsets[i], ni) = p.grids[i].weight_vector();
        for (std::size_t j = 0; j < p.block_count(); ++j)
            s.kernel.block(s.offsets[i], s.offsets[j], ni, static_cast<Eigen::Index>(p.grids[j].size())) = p.blocks[i][j];
    }
    return s;
}

/// Same system built entry by entry through the global-to-block index map:
/// a stacked index k belongs to the block b with offsets[b] <= k < offsets[b+1]
/// and refers to local node k - offsets[b] (the shift x -> x - b on [b, b+1]).
inline StackedSystem stack_by_index(const SecondKindProblem& p) {
    p.validate();
    StackedSystem s;
    s.offsets.push_back(0);
    for (const auto& g : p.grids) s.offsets.push_back(s.offsets.back() + static_cast<Eigen::Index>(g.size()));
    const Eigen::Index n = s.offsets.back();
    auto locate = [&](Eigen::Index k) {
        const auto it = std::upper_bound(s.offsets.begin(), s.offsets.end(), k);
        const auto b = static_cast<std::size_t>(it - s.offsets.begin() - 1);
        return std::pair<std::size_t, Eigen::Index>(b, k - s.offsets[b]);
    };
    s.kernel.resize(n, n);
    s.rhs.resize(n);
    s.weights.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto [bi, li] = locate(r);
        s.rhs[r] = p.rhs[bi][li];
        s.weights[r] = p.grids[bi].weight(static_cast<std::size_t>(li));
        for (Eigen::Index c = 0; c < n; ++c) {
            const auto [bj, lj] = locate(c);
            s.kernel(r, c) = p.blocks[bi][bj](li, lj);
        }
    }
    return s;
}

inline std::vector<Vector> split_blocks(const StackedSystem& s, const Vector& x) {
    std::vector<Vector> out;
    for (std::size_t b = 0; b + 1 < s.offsets.size(); ++b) out.emplace_back(x.segment(s.offsets[b], s.offsets[b + 1] - s.offsets[b]));
    return out;
}

struct ContractionReport {
    double M = 0.0;          ///< sqrt of the summed squared L2 norms of all kernel blocks
    double mu_times_M = 0.0;
    bool contractive = false;
    bool regular = false;    ///< contractive and every block has bounded row integrals of |K|^2
    double row_bound = 0.0;  ///< max over rows of ∫|K(x, xi)|^2 dxi, over all blocks
};

inline ContractionReport norm_M(const SecondKindProblem& p) {
    p.validate();
    double m2 = 0.0;
    double row_bound = 0.0;
    for (std::size_t i = 0; i < p.block_count(); ++i) {
        const Vector wi = p.grids[i].weight_vector();
        for (std::size_t j = 0; j < p.block_count(); ++j) {
            const Vector inv_wj = p.grids[j].weight_vector().cwiseInverse();
            const Matrix& a = p.blocks[i][j];
            // |K|^2 = (A_ij / w_j)^2, integrated with w_i w_j
            const Vector rows = a.array().square().matrix() * inv_wj;
            m2 += wi.dot(rows);
            row_bound = std::max(row_bound, rows.maxCoeff());
        }
    }
    ContractionReport r;
    r.M = std::sqrt(m2);
    r.mu_times_M = std::abs(p.mu) * r.M;
    r.contractive = r.mu_times_M < 1.0;
    r.row_bound = row_bound;
    r.regular = r.contractive && std::isfinite(row_bound);
    return r;
}

struct SecondKindSolution {
    std::vector<Vector> blocks;
    double rcond = 0.0;
    double residual = 0.0;  ///< relative residual of the discrete system
};

inline SecondKindSolution solve_stacked(const StackedSystem& s, double mu) {
    Matrix sys = -mu * s.kernel;
    sys.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Matrix> lu(sys);
    const double rc = lu.rcond();
    if (!(rc >= 1e-12)) throw SingularSystemError("second-kind system I - mu K is singular at mu = " + std::to_string(mu), rc);
    const Vector x = lu.solve(s.rhs);
    const double scale = std::max(s.rhs.norm(), std::numeric_limits<double>::min());
    const double res = (sys * x - s.rhs).norm() / scale;
    if (s.rhs.norm() > 0.0 && !(res <= 1e-10))
        throw SingularSystemError("second-kind solve residual " + std::to_string(res) + " exceeds 1e-10", rc);
    SecondKindSolution out;
    out.blocks = split_blocks(s, x);
    out.rcond = rc;
    out.residual = s.rhs.norm() > 0.0 ? res : (sys * x).norm();
    return out;
}

/// Dense direct solve of the stacked system.
inline SecondKindSolution nystrom_solve(const SecondKindProblem& p) { return solve_stacked(assemble_blocks(p), p.mu); }

struct IterationOutcome {
    std::vector<Vector> blocks;
    std::vector<double> distances;  ///< weighted L2 distance between successive iterates
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> warnings;
};

/// chi_{n+1} = mu K chi_n + F until successive iterates are within tol.
/// Twenty consecutive growing steps are treated as divergence.
inline IterationOutcome simple_iteration(const SecondKindProblem& p, const std::vector<Vector>& chi0, double tol, int max_iters) {
    const StackedSystem s = assemble_blocks(p);
    if (chi0.size() != p.block_count()) throw InvalidArgument("simple_iteration: initial guess has the wrong block count");
    Vector chi(s.offsets.back());
    for (std::size_t b = 0; b < chi0.size(); ++b) {
        if (chi0[b].size() != s.offsets[b + 1] - s.offsets[b]) throw InvalidArgument("simple_iteration: initial block length mismatch");
        chi.segment(s.offsets[b], chi0[b].size()) = chi0[b];
    }
    IterationOutcome out;
    const ContractionReport rep = norm_M(p);
    if (!rep.contractive)
        out.warnings.push_back("|mu| M = " + std::to_string(rep.mu_times_M) + " >= 1, convergence not guaranteed");
    int growing = 0;
    for (int it = 0; it < max_iters; ++it) {
        Vector next = p.mu * (s.kernel * chi) + s.rhs;
        const Vector diff = next - chi;
        const double dist = std::sqrt(s.weights.dot(diff.cwiseProduct(diff)));
        chi = std::move(next);
        out.iterations = it + 1;
        if (!out.distances.empty() && dist > out.distances.back()) {
            if (++growing >= 20) {
                out.distances.push_back(dist);
                throw DivergenceError("simple iteration diverged: successive distances grew for 20 steps");
            }
        } else {
            growing = 0;
        }
        out.distances.push_back(dist);
        if (!std::isfinite(dist)) throw DivergenceError("simple iteration produced non-finite values");
        if (dist <= tol) {
            out.converged = true;
            break;
        }
    }
    out.blocks = split_blocks(s, chi);
    return out;
}

/// Truncated resolvent sum_{n=1}^{N} mu^{n-1} K^n; the solution is F + mu Gamma F.
inline Matrix neumann_resolvent(const DiscreteOperator& k, double mu, int n_terms) {
    if (n_terms < 1) throw InvalidArgument("neumann_resolvent: need at least one term");
    if (k.matrix.rows() != k.matrix.cols()) throw InvalidArgument("neumann_resolvent: kernel must be square");
    Matrix power = k.matrix;
    Matrix gamma = k.matrix;
    double scale = 1.0;
    for (int n = 2; n <= n_terms; ++n) {
        power = power * k.matrix;
        scale *= mu;
        gamma += scale * power;
        if (!gamma.allFinite()) throw DivergenceError("neumann_resolvent: series diverged");
    }
    return gamma;
}

/// Characteristic numbers (reciprocal eigenvalues) of a symmetric kernel,
/// ordered by increasing magnitude. Eigenvalues below `floor` in magnitude are dropped.
inline std::vector<double> characteristic_numbers(const DiscreteOperator& k, double floor = 1e-12) {
    const Vector sw = k.row_grid.weight_vector().cwiseSqrt();
    const Vector isw = k.col_grid.weight_vector().cwiseSqrt().cwiseInverse();
    Matrix s = sw.asDiagonal() * k.matrix * isw.asDiagonal();
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        if (std::abs(es.eigenvalues()[i]) > floor) out.push_back(1.0 / es.eigenvalues()[i]);
    std::sort(out.begin(), out.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });
    return out;
}

}  // namespace fredholm
