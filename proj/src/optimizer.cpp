#include "shapeopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "shapeopt/meshio.hpp"

namespace shapeopt::optimizer {

namespace {

double comp(const Vec3& v, int c) { return c == 0 ? v.x : c == 1 ? v.y : v.z; }

void set_comp(Vec3& v, int c, double val) {
    if (c == 0)
        v.x = val;
    else if (c == 1)
        v.y = val;
    else
        v.z = val;
}

// mass-weighted average of per-face costs onto vertices, clamped at zero
std::vector<double> face_cost_to_vertices(const TriMesh& m, const FemOperators& ops,
                                          std::span<const double> face_cost) {
    const int n = m.n_vertices();
    std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
    for (int f = 0; f < m.n_faces(); ++f) {
        const double c = ops.w_face[static_cast<std::size_t>(f)] / 3.0 *
                         std::max(face_cost[static_cast<std::size_t>(f)], 0.0);
        for (int k = 0; k < 3; ++k) phi[static_cast<std::size_t>(m.faces()[static_cast<std::size_t>(f)][k])] += c;
    }
    for (int i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] /= ops.w_vertex[static_cast<std::size_t>(i)];
    return phi;
}

}  // namespace

GdTerms EnergyAssembler::gd_terms(const TriMesh&, const FemOperators&) const {
    throw DomainError("this energy provides no descent-baseline terms");
}

NormalEnergy::NormalEnergy(std::vector<Vec3> target, double weight)
    : fixed_target_(std::move(target)), weight_(weight) {
    if (!(weight_ > 0.0)) throw DomainError("normal energy weight must be positive");
}

NormalEnergy::NormalEnergy(std::function<Vec3(const Vec3&)> target_at, double weight)
    : target_fn_(std::move(target_at)), weight_(weight) {
    if (!target_fn_) throw DomainError("empty target function");
    if (!(weight_ > 0.0)) throw DomainError("normal energy weight must be positive");
}

std::vector<Vec3> NormalEnergy::target_at_faces(const TriMesh& m, const FemOperators&) const {
    if (!target_fn_) return fixed_target_;
    std::vector<Vec3> t(static_cast<std::size_t>(m.n_faces()));
    for (int f = 0; f < m.n_faces(); ++f) {
        const auto& fc = m.faces()[static_cast<std::size_t>(f)];
        const Vec3 centroid = (m.vertices()[static_cast<std::size_t>(fc[0])] +
                               m.vertices()[static_cast<std::size_t>(fc[1])] +
                               m.vertices()[static_cast<std::size_t>(fc[2])]) /
                              3.0;
        t[static_cast<std::size_t>(f)] = target_fn_(centroid).normalized();
    }
    return t;
}

ResidualSystem NormalEnergy::assemble(const TriMesh& m, const FemOperators& ops) const {
    return energies::assemble_normal_residual(m, ops, target_at_faces(m, ops), weight_);
}

GdTerms NormalEnergy::gd_terms(const TriMesh& m, const FemOperators& ops) const {
    const auto target = target_at_faces(m, ops);
    const int nf = m.n_faces();
    if (static_cast<int>(target.size()) != nf)
        throw ShapeMismatchError("one target normal per face required");

    GdTerms terms;
    terms.normal_grad.assign(static_cast<std::size_t>(m.n_vertices()), 0.0);
    terms.sphere_grad.resize(static_cast<std::size_t>(3 * nf));
    std::vector<double> face_cost(static_cast<std::size_t>(nf));
    for (int f = 0; f < nf; ++f) {
        const Vec3 r = ops.face_normal[static_cast<std::size_t>(f)] - target[static_cast<std::size_t>(f)];
        face_cost[static_cast<std::size_t>(f)] = 0.5 * weight_ * r.norm2();
        terms.sphere_grad[static_cast<std::size_t>(3 * f + 0)] = weight_ * r.x;
        terms.sphere_grad[static_cast<std::size_t>(3 * f + 1)] = weight_ * r.y;
        terms.sphere_grad[static_cast<std::size_t>(3 * f + 2)] = weight_ * r.z;
    }
    terms.phi = face_cost_to_vertices(m, ops, face_cost);
    return terms;
}

PointEnergy::PointEnergy(std::shared_ptr<const PointCloud> cloud, double normal_weight)
    : cloud_(std::move(cloud)), normal_weight_(normal_weight) {
    if (!cloud_) throw DomainError("point energy needs a cloud");
    if (normal_weight_ < 0.0) throw DomainError("normal weight must be nonnegative");
}

ResidualSystem PointEnergy::assemble(const TriMesh& m, const FemOperators& ops) const {
    return energies::assemble_point_residual(m, ops, *cloud_, normal_weight_);
}

GdTerms PointEnergy::gd_terms(const TriMesh& m, const FemOperators& ops) const {
    const int n = m.n_vertices();
    const int nf = m.n_faces();
    const auto vn = mesh::vertex_normals(m);

    GdTerms terms;
    terms.phi.assign(static_cast<std::size_t>(n), 0.0);
    terms.normal_grad.assign(static_cast<std::size_t>(n), 0.0);
    terms.sphere_grad.assign(static_cast<std::size_t>(3 * nf), 0.0);
    for (int i = 0; i < n; ++i) {
        const Vec3& x = m.vertices()[static_cast<std::size_t>(i)];
        const Vec3 r = x - cloud_->points()[static_cast<std::size_t>(cloud_->nearest(x))];
        terms.phi[static_cast<std::size_t>(i)] = 0.5 * r.norm2();
        terms.normal_grad[static_cast<std::size_t>(i)] = r.dot(vn[static_cast<std::size_t>(i)]);
    }
    if (normal_weight_ > 0.0) {
        if (!cloud_->oriented())
            throw UnorientedCloudError("screened term needs an oriented cloud");
        std::vector<double> face_cost(static_cast<std::size_t>(nf));
        for (int f = 0; f < nf; ++f) {
            const auto& fc = m.faces()[static_cast<std::size_t>(f)];
            const Vec3 centroid = (m.vertices()[static_cast<std::size_t>(fc[0])] +
                                   m.vertices()[static_cast<std::size_t>(fc[1])] +
                                   m.vertices()[static_cast<std::size_t>(fc[2])]) /
                                  3.0;
            const int j = cloud_->nearest(centroid);
            const Vec3 r = ops.face_normal[static_cast<std::size_t>(f)] -
                           cloud_->normals()[static_cast<std::size_t>(j)];
            face_cost[static_cast<std::size_t>(f)] = 0.5 * normal_weight_ * r.norm2();
            terms.sphere_grad[static_cast<std::size_t>(3 * f + 0)] = normal_weight_ * r.x;
            terms.sphere_grad[static_cast<std::size_t>(3 * f + 1)] = normal_weight_ * r.y;
            terms.sphere_grad[static_cast<std::size_t>(3 * f + 2)] = normal_weight_ * r.z;
        }
        const auto screened_phi = face_cost_to_vertices(m, ops, face_cost);
        for (int i = 0; i < n; ++i)
            terms.phi[static_cast<std::size_t>(i)] += screened_phi[static_cast<std::size_t>(i)];
    }
    return terms;
}

ResidualSystem WillmoreEnergy::assemble(const TriMesh& m, const FemOperators& ops) const {
    return energies::assemble_curvature_residual(m, ops);
}

double evaluate_energy(const TriMesh& m, const EnergyAssembler& assembler) {
    const auto ops = fem::build_operators(m);
    return assembler.assemble(m, ops).energy();
}

void LmConfig::validate() const {
    if (p != 1 && p != 2) throw DomainError("p must be 1 or 2");
    if (!(lambda0 > 0.0)) throw DomainError("lambda0 must be positive");
    if (!(lambda_up > 1.0) || !(lambda_down > 1.0))
        throw DomainError("lambda adaptation factors must exceed 1");
    if (max_outer_iters < 0) throw DomainError("max_outer_iters must be nonnegative");
    if (!(energy_rel_tol > 0.0)) throw DomainError("energy_rel_tol must be positive");
    if (!(step_tol > 0.0)) throw DomainError("step_tol must be positive");
    if (dirichlet_cg_iters <= 0) throw DomainError("dirichlet_cg_iters must be positive");
    solver.validate();
}

LmStepResult lm_step(const TriMesh& m, const LmConfig& cfg, double lambda,
                     const EnergyAssembler& assembler) {
    cfg.validate();
    if (!(lambda > 0.0)) throw DomainError("lambda must be positive");

    const auto ops = fem::build_operators(m);
    const auto rs = assembler.assemble(m, ops);
    const double e0 = rs.energy();

    admm::SubproblemResult sub;
    if (cfg.p == 1) {
        auto opts = cfg.solver;
        opts.lambda = lambda;
        opts.trace = nullptr;
        sub = admm::solve_subproblem_tv(rs.stacked(), rs.rhs, ops.grad, ops.w_face, opts);
    } else {
        sub = admm::solve_subproblem_dirichlet(rs.stacked(), rs.rhs, ops.grad, ops.w_face,
                                               lambda, cfg.dirichlet_cg_iters, cfg.solver.cg_tol);
    }
    const double step_norm = std::sqrt(fem::l2_norm_sq_vertex(sub.v, ops));

    if (step_norm <= cfg.step_tol)
        return {m,  std::move(sub.v), true, true, lambda, e0, e0, step_norm,
                sub.total_cg_iters};

    const auto vn = mesh::vertex_normals(m);
    bool accepted = false;
    double e1 = e0;
    std::optional<TriMesh> candidate;
    try {
        TriMesh cand = mesh::displace_along_normals(m, sub.v, vn);
        const auto cand_ops = fem::build_operators(cand);
        const double ec = assembler.assemble(cand, cand_ops).energy();
        if (ec < e0) {
            accepted = true;
            e1 = ec;
            candidate.emplace(std::move(cand));
        }
    } catch (const DegenerateFaceError&) {
        // squashed a face: treat as a rejected trial step
    }

    if (accepted)
        return {std::move(*candidate), std::move(sub.v), true,      false,
                lambda / cfg.lambda_down, e0,             e1,        step_norm,
                sub.total_cg_iters};
    return {m,  std::move(sub.v), false, false, lambda * cfg.lambda_up, e0, e0, step_norm,
            sub.total_cg_iters};
}

OptimRun lm_run(const TriMesh& m0, const LmConfig& cfg, const EnergyAssembler& assembler,
                const RunHooks& hooks) {
    cfg.validate();
    TriMesh cur = m0;
    double lambda = cfg.lambda0;
    double cur_energy = evaluate_energy(cur, assembler);

    OptimRun run{cur, {}, cur_energy, cur_energy, 0, StopReason::MaxIters};
    if (hooks.trace_csv) write_trace_header(*hooks.trace_csv);

    std::vector<double> accepted_energies{cur_energy};
    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
        auto step = lm_step(cur, cfg, lambda, assembler);
        if (step.accepted && !step.noop) {
            cur = std::move(step.mesh);
            cur_energy = step.energy_after;
            ++run.accepted_steps;
            accepted_energies.push_back(cur_energy);
        }

        IterRecord rec;
        rec.iter = it;
        rec.energy = cur_energy;
        rec.step_norm = step.step_norm;
        rec.lambda = lambda;
        rec.accepted = step.accepted;
        rec.min_angle = mesh::mesh_quality(cur, false).min_angle;
        rec.cg_iters = step.cg_iters;
        run.history.push_back(rec);
        if (hooks.trace_csv) write_trace_row(*hooks.trace_csv, rec);
        if (hooks.snapshot_every > 0 && it % hooks.snapshot_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%04d.ply", it);
            mesh::save_mesh(cur, hooks.snapshot_prefix + name);
        }

        lambda = step.lambda_next;
        if (step.noop) {
            run.stop = StopReason::StepTol;
            break;
        }
        if (step.accepted && accepted_energies.size() >= 4) {
            const double e_old = accepted_energies[accepted_energies.size() - 4];
            const double e_new = accepted_energies.back();
            if (e_old - e_new <= cfg.energy_rel_tol * std::max(e_old, 1e-300)) {
                run.stop = StopReason::EnergyTol;
                break;
            }
        }
    }
    run.final_energy = cur_energy;
    run.mesh = std::move(cur);
    return run;
}

void GdConfig::validate() const {
    if (lambda < 0.0) throw DomainError("lambda must be nonnegative");
    if (max_iters < 0) throw DomainError("max_iters must be nonnegative");
    if (!(cg_tol > 0.0) || !(cg_tol < 1.0)) throw DomainError("cg_tol must be in (0, 1)");
    if (cg_max_iters <= 0) throw DomainError("cg_max_iters must be positive");
}

GdStepResult gd_step(const TriMesh& m, const FemOperators& ops, const GdConfig& cfg,
                     const EnergyAssembler& assembler) {
    cfg.validate();
    if (ops.snapshot != m.snapshot())
        throw ShapeMismatchError("operators built on a different snapshot");

    const int n = m.n_vertices();
    const int nf = m.n_faces();
    const auto terms = assembler.gd_terms(m, ops);
    if (static_cast<int>(terms.phi.size()) != n || static_cast<int>(terms.normal_grad.size()) != n ||
        static_cast<int>(terms.sphere_grad.size()) != 3 * nf)
        throw ShapeMismatchError("descent terms sized for a different mesh");

    // (lambda + mean phi over corners) per face, times area, goes into the
    // stiffness weight of the implicit step
    std::vector<double> face_weight(static_cast<std::size_t>(nf));
    for (int f = 0; f < nf; ++f) {
        const auto& fc = m.faces()[static_cast<std::size_t>(f)];
        const double phi_avg = (std::max(terms.phi[static_cast<std::size_t>(fc[0])], 0.0) +
                                std::max(terms.phi[static_cast<std::size_t>(fc[1])], 0.0) +
                                std::max(terms.phi[static_cast<std::size_t>(fc[2])], 0.0)) /
                               3.0;
        face_weight[static_cast<std::size_t>(f)] =
            (cfg.lambda + phi_avg) * ops.w_face[static_cast<std::size_t>(f)];
    }
    const auto A = add(SparseMatrix::diagonal(ops.w_vertex), fem::weighted_stiffness(ops, face_weight));

    // divergence of the sphere-gradient piece, mass-normalized per vertex
    std::vector<double> weighted(static_cast<std::size_t>(3 * nf));
    for (int f = 0; f < nf; ++f)
        for (int c = 0; c < 3; ++c)
            weighted[static_cast<std::size_t>(3 * f + c)] =
                ops.w_face[static_cast<std::size_t>(f)] *
                terms.sphere_grad[static_cast<std::size_t>(3 * f + c)];
    std::vector<double> divergence(static_cast<std::size_t>(n));
    ops.grad.apply_transpose(weighted, divergence);

    const auto vn = mesh::vertex_normals(m);
    std::vector<double> speed(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        speed[static_cast<std::size_t>(i)] =
            terms.normal_grad[static_cast<std::size_t>(i)] -
            divergence[static_cast<std::size_t>(i)] / ops.w_vertex[static_cast<std::size_t>(i)];

    std::vector<Vec3> next(static_cast<std::size_t>(n));
    std::vector<double> rhs(static_cast<std::size_t>(n));
    std::vector<double> sol(static_cast<std::size_t>(n));
    int total_cg = 0;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i) {
            const std::size_t si = static_cast<std::size_t>(i);
            const double xc = comp(m.vertices()[si], c);
            rhs[si] = ops.w_vertex[si] * (xc - speed[si] * comp(vn[si], c));
            sol[si] = xc;
        }
        total_cg += cg_solve(A, rhs, sol, cfg.cg_max_iters, cfg.cg_tol);
        for (int i = 0; i < n; ++i) set_comp(next[static_cast<std::size_t>(i)], c, sol[static_cast<std::size_t>(i)]);
    }

    std::vector<Vec3> disp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        disp[static_cast<std::size_t>(i)] =
            next[static_cast<std::size_t>(i)] - m.vertices()[static_cast<std::size_t>(i)];
    const double step_norm = std::sqrt(fem::l2_norm_sq_vertex(disp, ops));

    return {TriMesh(std::move(next), m.faces()), step_norm, total_cg};
}

OptimRun gd_run(const TriMesh& m0, const GdConfig& cfg, const EnergyAssembler& assembler,
                const RunHooks& hooks) {
    cfg.validate();
    TriMesh cur = m0;
    auto ops = fem::build_operators(cur);
    double cur_energy = assembler.assemble(cur, ops).energy();

    OptimRun run{cur, {}, cur_energy, cur_energy, 0, StopReason::MaxIters};
    if (hooks.trace_csv) write_trace_header(*hooks.trace_csv);

    for (int it = 1; it <= cfg.max_iters; ++it) {
        double step_norm = 0.0;
        int cg = 0;
        try {
            auto step = gd_step(cur, ops, cfg, assembler);
            step_norm = step.step_norm;
            cg = step.cg_iters;
            ops = fem::build_operators(step.mesh);
            cur = std::move(step.mesh);
        } catch (const DegenerateFaceError&) {
            run.stop = StopReason::Degenerate;
            break;
        } catch (const SolverBreakdownError&) {
            run.stop = StopReason::Degenerate;
            break;
        }
        cur_energy = assembler.assemble(cur, ops).energy();
        ++run.accepted_steps;

        IterRecord rec;
        rec.iter = it;
        rec.energy = cur_energy;
        rec.step_norm = step_norm;
        rec.lambda = cfg.lambda;
        rec.accepted = true;
        rec.min_angle = mesh::mesh_quality(cur, false).min_angle;
        rec.cg_iters = cg;
        run.history.push_back(rec);
        if (hooks.trace_csv) write_trace_row(*hooks.trace_csv, rec);
        if (hooks.snapshot_every > 0 && it % hooks.snapshot_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshot_%04d.ply", it);
            mesh::save_mesh(cur, hooks.snapshot_prefix + name);
        }
    }
    run.final_energy = cur_energy;
    run.mesh = std::move(cur);
    return run;
}

int cg_solve(const SparseMatrix& A, std::span<const double> b, std::vector<double>& x,
             int max_iters, double tol) {
    const int n = A.rows();
    if (A.cols() != n || static_cast<int>(b.size()) != n)
        throw ShapeMismatchError("cg needs a square system matching the rhs");
    if (static_cast<int>(x.size()) != n) x.assign(static_cast<std::size_t>(n), 0.0);

    const double bnorm = norm(b);
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return 0;
    }

    std::vector<double> r(static_cast<std::size_t>(n));
    std::vector<double> p(static_cast<std::size_t>(n));
    std::vector<double> Ap(static_cast<std::size_t>(n));
    A.apply(x, r);
    for (int i = 0; i < n; ++i) r[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - r[static_cast<std::size_t>(i)];
    double rr = dot(r, r);
    if (!std::isfinite(rr)) throw SolverBreakdownError("non-finite residual entering cg");
    if (std::sqrt(rr) <= tol * bnorm) return 0;
    p = r;

    int it = 0;
    while (it < max_iters) {
        A.apply(p, Ap);
        const double pAp = dot(p, Ap);
        if (!std::isfinite(pAp) || pAp <= 0.0)
            throw SolverBreakdownError("cg system is not positive definite");
        const double alpha = rr / pAp;
        axpy(alpha, p, x);
        axpy(-alpha, Ap, r);
        ++it;
        const double rr_next = dot(r, r);
        if (!std::isfinite(rr_next)) throw SolverBreakdownError("non-finite residual in cg");
        if (std::sqrt(rr_next) <= tol * bnorm) break;
        aypx(rr_next / rr, r, p);
        rr = rr_next;
    }
    return it;
}

void write_trace_header(std::ostream& os) {
    os << "iter,energy,step_norm,lambda,accepted,min_angle,cg_iters\n";
}

void write_trace_row(std::ostream& os, const IterRecord& rec) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%d,%.17g,%d\n", rec.iter, rec.energy,
                  rec.step_norm, rec.lambda, rec.accepted ? 1 : 0, rec.min_angle, rec.cg_iters);
    os << buf;
}

}  // namespace shapeopt::optimizer
