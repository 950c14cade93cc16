#include "shapeopt/admm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace shapeopt::admm {

Vec3 shrink(const Vec3& g, double t) {
    if (t < 0.0) throw DomainError("shrink: negative threshold");
    if (t == 0.0) return g;
    const double n = g.norm();
    if (n <= t) return {0.0, 0.0, 0.0};
    return g * (1.0 - t / n);
}

int StackedSystem::total_rows() const {
    int r = 0;
    for (const auto& b : blocks) r += b.A->rows();
    return r;
}

void StackedSystem::validate() const {
    if (cols <= 0) throw DomainError("stacked system: no columns");
    if (blocks.empty()) throw DomainError("stacked system: no blocks");
    for (const auto& b : blocks) {
        if (b.A == nullptr) throw DomainError("stacked system: null block");
        if (b.A->cols() != cols) throw DomainError("stacked system: block column mismatch");
    }
}

void StackedSystem::apply(std::span<const double> x, std::span<double> y) const {
    int off = 0;
    for (const auto& b : blocks) {
        auto seg = y.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(b.A->rows()));
        b.A->apply(x, seg);
        if (b.scale != 1.0) scal(b.scale, seg);
        off += b.A->rows();
    }
}

void StackedSystem::apply_transpose(std::span<const double> y, std::span<double> x) const {
    std::vector<double> tmp(static_cast<std::size_t>(cols));
    bool first = true;
    int off = 0;
    for (const auto& b : blocks) {
        auto seg = y.subspan(static_cast<std::size_t>(off), static_cast<std::size_t>(b.A->rows()));
        if (first) {
            b.A->apply_transpose(seg, x);
            if (b.scale != 1.0) scal(b.scale, x);
            first = false;
        } else {
            b.A->apply_transpose(seg, tmp);
            axpy(b.scale, tmp, x);
        }
        off += b.A->rows();
    }
}

CglsResult cgls_solve(const StackedSystem& M, std::span<const double> b, std::span<double> x,
                      int max_iters, double tol) {
    M.validate();
    const int n = M.cols;
    const int rows = M.total_rows();
    if (static_cast<int>(b.size()) != rows || static_cast<int>(x.size()) != n)
        throw DomainError("cgls: size mismatch");

    std::vector<double> r(static_cast<std::size_t>(rows));
    std::vector<double> q(static_cast<std::size_t>(rows));
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(n));

    M.apply_transpose(b, s);
    const double ref = norm(s);

    M.apply(x, q);
    std::copy(b.begin(), b.end(), r.begin());
    axpy(-1.0, q, r);  // r = b - Mx
    M.apply_transpose(r, s);
    double gamma = norm2(s);
    if (!std::isfinite(gamma)) throw SolverBreakdownError("cgls: non-finite initial gradient");

    CglsResult res;
    res.resnorms.push_back(norm(r));
    const double stop = tol * (ref > 0.0 ? ref : 1.0);
    auto relres = [&](double g2) { return ref > 0.0 ? std::sqrt(g2) / ref : std::sqrt(g2); };
    if (std::sqrt(gamma) <= stop) {
        res.converged = true;
        res.relres = relres(gamma);
        return res;
    }

    std::copy(s.begin(), s.end(), p.begin());
    for (int k = 0; k < max_iters; ++k) {
        M.apply(p, q);
        const double q2 = norm2(q);
        if (!std::isfinite(q2)) throw SolverBreakdownError("cgls: non-finite direction");
        if (q2 == 0.0) break;  // direction in the null space, nothing to gain
        const double alpha = gamma / q2;
        axpy(alpha, p, x);
        axpy(-alpha, q, r);
        M.apply_transpose(r, s);
        const double gamma_new = norm2(s);
        if (!std::isfinite(gamma_new)) throw SolverBreakdownError("cgls: non-finite gradient");
        res.iters = k + 1;
        res.resnorms.push_back(norm(r));
        if (std::sqrt(gamma_new) <= stop) {
            gamma = gamma_new;
            res.converged = true;
            break;
        }
        const double beta = gamma_new / gamma;
        gamma = gamma_new;
        aypx(beta, s, p);  // p = s + beta p
    }
    res.relres = relres(gamma);
    return res;
}

void SubproblemOpts::validate() const {
    if (lambda < 0.0) throw DomainError("subproblem: lambda must be >= 0");
    if (mu <= 0.0) throw DomainError("subproblem: mu must be > 0");
    if (admm_iters <= 0 || cg_iters <= 0) throw DomainError("subproblem: iteration counts must be positive");
    if (!(cg_tol > 0.0 && cg_tol < 1.0)) throw DomainError("subproblem: cg_tol must be in (0,1)");
}

namespace {

std::vector<double> sqrt_area_rows(const SparseMatrix& grad, std::span<const double> face_area) {
    const int m3 = grad.rows();
    if (m3 % 3 != 0 || static_cast<int>(face_area.size()) * 3 != m3)
        throw DomainError("subproblem: gradient rows and face areas disagree");
    std::vector<double> w(static_cast<std::size_t>(m3));
    for (std::size_t f = 0; f < face_area.size(); ++f) {
        if (!(face_area[f] > 0.0)) throw DomainError("subproblem: non-positive face area");
        const double s = std::sqrt(face_area[f]);
        w[3 * f] = w[3 * f + 1] = w[3 * f + 2] = s;
    }
    return w;
}

void init_v(std::vector<double>& v, int n, std::span<const double> v0) {
    v.assign(static_cast<std::size_t>(n), 0.0);
    if (!v0.empty()) {
        if (static_cast<int>(v0.size()) != n) throw DomainError("subproblem: v0 size mismatch");
        std::copy(v0.begin(), v0.end(), v.begin());
    }
}

// 1/2 ||A v - y||^2
double data_energy(const StackedSystem& data, std::span<const double> v,
                   std::span<const double> y, std::vector<double>& work) {
    work.resize(y.size());
    data.apply(v, work);
    axpy(-1.0, y, work);
    return 0.5 * norm2(work);
}

}  // namespace

SubproblemResult solve_subproblem_tv(const StackedSystem& data, std::span<const double> y,
                                     const SparseMatrix& grad, std::span<const double> face_area,
                                     const SubproblemOpts& opts, std::span<const double> v0) {
    data.validate();
    opts.validate();
    const int n = grad.cols();
    if (data.cols != n) throw DomainError("tv subproblem: data/gradient column mismatch");
    const int data_rows = data.total_rows();
    if (static_cast<int>(y.size()) != data_rows) throw DomainError("tv subproblem: rhs size");

    const std::vector<double> wrow = sqrt_area_rows(grad, face_area);
    const SparseMatrix wgrad = grad.row_scaled(wrow);
    const double slm = std::sqrt(opts.lambda * opts.mu);
    const int m3 = grad.rows();
    const int m = m3 / 3;

    StackedSystem M;
    M.cols = n;
    M.blocks = data.blocks;
    M.blocks.push_back({&wgrad, slm});

    std::vector<double> rhs(static_cast<std::size_t>(data_rows + m3), 0.0);
    std::copy(y.begin(), y.end(), rhs.begin());
    auto reg_rhs = std::span<double>(rhs).subspan(static_cast<std::size_t>(data_rows));

    SubproblemResult out;
    init_v(out.v, n, v0);

    std::vector<double> d(static_cast<std::size_t>(m3), 0.0);
    std::vector<double> bb(static_cast<std::size_t>(m3), 0.0);
    std::vector<double> g(static_cast<std::size_t>(m3));
    std::vector<double> work;
    const double thresh = 1.0 / opts.mu;

    if (opts.trace) *opts.trace << "iter,objective,primal_residual,dual_change\n";

    char line[160];
    for (int it = 0; it < opts.admm_iters; ++it) {
        for (int i = 0; i < m3; ++i) reg_rhs[i] = slm * wrow[i] * (d[i] - bb[i]);
        const CglsResult cr = cgls_solve(M, rhs, out.v, opts.cg_iters, opts.cg_tol);
        out.total_cg_iters += cr.iters;
        out.final_relres = cr.relres;

        grad.apply(out.v, g);
        double tv = 0.0;
        double primal2 = 0.0;
        double dual2 = 0.0;
        for (int f = 0; f < m; ++f) {
            const Vec3 gv{g[3 * f], g[3 * f + 1], g[3 * f + 2]};
            tv += face_area[f] * gv.norm();
            const Vec3 qv{gv.x + bb[3 * f], gv.y + bb[3 * f + 1], gv.z + bb[3 * f + 2]};
            const Vec3 dv = shrink(qv, thresh);
            dual2 += sqr(dv.x - d[3 * f]) + sqr(dv.y - d[3 * f + 1]) + sqr(dv.z - d[3 * f + 2]);
            primal2 += sqr(gv.x - dv.x) + sqr(gv.y - dv.y) + sqr(gv.z - dv.z);
            d[3 * f] = dv.x;
            d[3 * f + 1] = dv.y;
            d[3 * f + 2] = dv.z;
            bb[3 * f] = qv.x - dv.x;
            bb[3 * f + 1] = qv.y - dv.y;
            bb[3 * f + 2] = qv.z - dv.z;
        }
        const double obj = data_energy(data, out.v, y, work) + opts.lambda * tv;
        out.objective.push_back(obj);
        out.primal_residual.push_back(std::sqrt(primal2));
        if (opts.trace) {
            std::snprintf(line, sizeof line, "%d,%.17g,%.17g,%.17g\n", it, obj,
                          std::sqrt(primal2), std::sqrt(dual2));
            *opts.trace << line;
        }
    }
    return out;
}

SubproblemResult solve_subproblem_dirichlet(const StackedSystem& data, std::span<const double> y,
                                            const SparseMatrix& grad,
                                            std::span<const double> face_area, double lambda,
                                            int max_cg_iters, double cg_tol,
                                            std::span<const double> v0) {
    data.validate();
    const int n = grad.cols();
    if (data.cols != n) throw DomainError("dirichlet subproblem: data/gradient column mismatch");
    const int data_rows = data.total_rows();
    if (static_cast<int>(y.size()) != data_rows) throw DomainError("dirichlet subproblem: rhs size");
    if (lambda < 0.0) throw DomainError("dirichlet subproblem: bad lambda");
    if (max_cg_iters <= 0 || !(cg_tol > 0.0 && cg_tol < 1.0))
        throw DomainError("dirichlet subproblem: bad solver settings");

    const std::vector<double> wrow = sqrt_area_rows(grad, face_area);
    const SparseMatrix wgrad = grad.row_scaled(wrow);
    const int m3 = grad.rows();
    const int m = m3 / 3;

    StackedSystem M;
    M.cols = n;
    M.blocks = data.blocks;
    M.blocks.push_back({&wgrad, std::sqrt(lambda)});

    std::vector<double> rhs(static_cast<std::size_t>(data_rows + m3), 0.0);
    std::copy(y.begin(), y.end(), rhs.begin());

    SubproblemResult out;
    init_v(out.v, n, v0);
    const CglsResult cr = cgls_solve(M, rhs, out.v, max_cg_iters, cg_tol);
    out.total_cg_iters = cr.iters;
    out.final_relres = cr.relres;

    std::vector<double> g(static_cast<std::size_t>(m3));
    grad.apply(out.v, g);
    double dir = 0.0;
    for (int f = 0; f < m; ++f) {
        dir += face_area[f] *
               (sqr(g[3 * f]) + sqr(g[3 * f + 1]) + sqr(g[3 * f + 2]));
    }
    std::vector<double> work;
    out.objective.push_back(data_energy(data, out.v, y, work) + 0.5 * lambda * dir);
    return out;
}

}  // namespace shapeopt::admm
