#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "shapeopt/core.hpp"
#include "shapeopt/sparse.hpp"

namespace shapeopt::admm {

// Isotropic soft shrinkage: keeps direction, shortens the norm by t (to zero
// if ||g|| <= t).
Vec3 shrink(const Vec3& g, double t);

// A virtual row-stack [scale_0*A_0; scale_1*A_1; ...] over matrices that all
// share the same column count. Blocks are referenced, not copied, so the big
// least-squares operator is applied without materializing it.
struct StackedBlock {
    const SparseMatrix* A = nullptr;
    double scale = 1.0;
};

struct StackedSystem {
    int cols = 0;
    std::vector<StackedBlock> blocks;

    int total_rows() const;
    void validate() const;
    void apply(std::span<const double> x, std::span<double> y) const;
    void apply_transpose(std::span<const double> y, std::span<double> x) const;
};

struct CglsResult {
    int iters = 0;
    double relres = 0.0;  // ||M^T(Mx - b)|| / ||M^T b||
    bool converged = false;
    std::vector<double> resnorms;  // ||Mx_k - b|| per iteration, index 0 = start
};

// Conjugate gradient on the normal equations in least-squares form (CGLS):
// minimizes ||M x - b||_2 starting from the x passed in (warm start), without
// ever forming M^T M. Stops when the normal-equation residual drops below
// tol relative to ||M^T b||, or after max_iters. Throws SolverBreakdownError
// if non-finite values appear.
CglsResult cgls_solve(const StackedSystem& M, std::span<const double> b, std::span<double> x,
                      int max_iters, double tol);

struct SubproblemOpts {
    double lambda = 1.0;  // regularization weight
    double mu = 10.0;     // ADMM penalty scale
    int admm_iters = 30;
    int cg_iters = 10;  // CGLS iterations per ADMM inner solve
    double cg_tol = 1e-6;
    std::ostream* trace = nullptr;  // CSV sink: iter,objective,primal_residual,dual_change

    void validate() const;
};

struct SubproblemResult {
    std::vector<double> v;
    int total_cg_iters = 0;
    double final_relres = 0.0;
    std::vector<double> objective;        // composite objective per outer iteration
    std::vector<double> primal_residual;  // ||grad v - d||_2 per outer iteration
};

// min_v 1/2 ||A v - y||^2 + lambda * sum_T |T| * ||(grad v)_T||
// via split Bregman / ADMM: the auxiliary per-face vector d tracks grad v,
// the v-update solves the stacked least-squares system
//   [A; sqrt(lambda*mu) W grad] v = [y; sqrt(lambda*mu) W (d_k - b_k)]
// with W = diag(sqrt(|T|)) per gradient row, the d-update is
// shrink((grad v)_T + b_T, 1/mu) per face, and b accumulates the split
// residual b += grad v - d. All of v, d, b start at zero (or v at v0) and
// each inner CGLS is warm-started at the current v.
SubproblemResult solve_subproblem_tv(const StackedSystem& data, std::span<const double> y,
                                     const SparseMatrix& grad, std::span<const double> face_area,
                                     const SubproblemOpts& opts, std::span<const double> v0 = {});

// min_v 1/2 ||A v - y||^2 + lambda/2 * sum_T |T| * ||(grad v)_T||^2
// solved by one CGLS run on [A; sqrt(lambda) W grad] v = [y; 0].
SubproblemResult solve_subproblem_dirichlet(const StackedSystem& data, std::span<const double> y,
                                            const SparseMatrix& grad,
                                            std::span<const double> face_area, double lambda,
                                            int max_cg_iters, double cg_tol,
                                            std::span<const double> v0 = {});

}  // namespace shapeopt::admm
