#include "shapeopt/cli.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <utility>
#include <vector>

#include "shapeopt/energies.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/meshio.hpp"
#include "shapeopt/optimizer.hpp"
#include "shapeopt/synth.hpp"

namespace shapeopt::cli {

namespace {

using energies::PointCloud;
using mesh::TriMesh;
using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string fmt_g(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

std::string fmt_i(long long v) { return std::to_string(v); }

bool has_ext(const std::string& path, const std::string& ext) {
    if (path.size() < ext.size()) return false;
    for (std::size_t i = 0; i < ext.size(); ++i) {
        const char c = path[path.size() - ext.size() + i];
        if (std::tolower(static_cast<unsigned char>(c)) != ext[i]) return false;
    }
    return true;
}

void echo_comments(std::ostream& os, const std::string& command, const KeyValues& kv) {
    os << "# command=" << command << "\n";
    for (const auto& [k, v] : kv) os << "# " << k << "=" << v << "\n";
}

std::vector<std::string> comment_lines(const std::string& command, const KeyValues& kv) {
    std::vector<std::string> out;
    out.push_back("command=" + command);
    for (const auto& [k, v] : kv) out.push_back(k + "=" + v);
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << content;
    if (!os) throw IoError("write failed: " + path);
}

void validate_method(const MethodOpts& m) {
    if (m.method != "gd" && m.method != "lmd" && m.method != "lmtv")
        throw DomainError("method must be one of gd, lmd, lmtv");
    if (m.method == "gd") {
        if (m.lambda < 0.0) throw DomainError("gd lambda must be nonnegative");
    } else if (!(m.lambda > 0.0)) {
        throw DomainError("lambda must be positive");
    }
    if (!(m.mu > 0.0)) throw DomainError("mu must be positive");
    if (m.admm_iters < 1) throw DomainError("admm_iters must be positive");
    if (m.cg_iters < 1) throw DomainError("cg_iters must be positive");
    if (!(m.cg_tol > 0.0) || !(m.cg_tol < 1.0)) throw DomainError("cg_tol must be in (0, 1)");
    if (m.max_iters < 0) throw DomainError("max_iters must be nonnegative");
    if (!(m.energy_tol > 0.0)) throw DomainError("energy_tol must be positive");
    if (!(m.step_tol > 0.0)) throw DomainError("step_tol must be positive");
    if (!(m.lambda_up > 1.0) || !(m.lambda_down > 1.0))
        throw DomainError("lambda adaptation factors must exceed 1");
}

KeyValues method_kv(const MethodOpts& m) {
    return {{"method", m.method},
            {"lambda", fmt_g(m.lambda)},
            {"mu", fmt_g(m.mu)},
            {"admm_iters", fmt_i(m.admm_iters)},
            {"cg_iters", fmt_i(m.cg_iters)},
            {"cg_tol", fmt_g(m.cg_tol)},
            {"max_iters", fmt_i(m.max_iters)},
            {"energy_tol", fmt_g(m.energy_tol)},
            {"step_tol", fmt_g(m.step_tol)},
            {"lambda_up", fmt_g(m.lambda_up)},
            {"lambda_down", fmt_g(m.lambda_down)}};
}

optimizer::LmConfig lm_config(const MethodOpts& m) {
    optimizer::LmConfig c;
    c.p = m.method == "lmtv" ? 1 : 2;
    c.lambda0 = m.lambda;
    c.lambda_up = m.lambda_up;
    c.lambda_down = m.lambda_down;
    c.max_outer_iters = m.max_iters;
    c.energy_rel_tol = m.energy_tol;
    c.step_tol = m.step_tol;
    c.solver.mu = m.mu;
    c.solver.admm_iters = m.admm_iters;
    c.solver.cg_iters = m.cg_iters;
    c.solver.cg_tol = m.cg_tol;
    c.dirichlet_cg_iters = m.admm_iters * m.cg_iters;
    return c;
}

optimizer::GdConfig gd_config(const MethodOpts& m) {
    optimizer::GdConfig c;
    c.lambda = m.lambda;
    c.max_iters = m.max_iters;
    return c;
}

optimizer::OptimRun run_method(const TriMesh& m0, const MethodOpts& m,
                               const optimizer::EnergyAssembler& assembler,
                               const optimizer::RunHooks& hooks) {
    if (m.method == "gd") return optimizer::gd_run(m0, gd_config(m), assembler, hooks);
    return optimizer::lm_run(m0, lm_config(m), assembler, hooks);
}

const char* stop_name(optimizer::StopReason s) {
    switch (s) {
        case optimizer::StopReason::MaxIters: return "max_iters";
        case optimizer::StopReason::EnergyTol: return "energy_tol";
        case optimizer::StopReason::StepTol: return "step_tol";
        case optimizer::StopReason::Degenerate: return "degenerate";
    }
    return "unknown";
}

void print_run_summary(const optimizer::OptimRun& run) {
    std::cout << "initial_energy=" << fmt_g(run.initial_energy) << "\n";
    std::cout << "final_energy=" << fmt_g(run.final_energy) << "\n";
    std::cout << "accepted_steps=" << run.accepted_steps << "\n";
    std::cout << "stop=" << stop_name(run.stop) << "\n";
}

// per-vertex rms of the per-face normal residual, mass-averaged
std::vector<double> vertex_residual_from_faces(const TriMesh& m,
                                               std::span<const Vec3> face_residual) {
    const auto geom = mesh::face_geometry(m);
    const int n = m.n_vertices();
    std::vector<double> wsum(static_cast<std::size_t>(n), 0.0);
    std::vector<double> q(static_cast<std::size_t>(n), 0.0);
    for (int f = 0; f < m.n_faces(); ++f) {
        const double a3 = geom.area[static_cast<std::size_t>(f)] / 3.0;
        for (int k = 0; k < 3; ++k) {
            const auto i = static_cast<std::size_t>(m.faces()[static_cast<std::size_t>(f)][k]);
            wsum[i] += a3;
            q[i] += a3 * face_residual[static_cast<std::size_t>(f)].norm2();
        }
    }
    for (int i = 0; i < n; ++i) {
        const auto si = static_cast<std::size_t>(i);
        q[si] = std::sqrt(q[si] / wsum[si]);
    }
    return q;
}

struct TargetField {
    std::unique_ptr<optimizer::EnergyAssembler> assembler;
    // evaluates the per-face residual n(S) - n_d on any snapshot
    std::function<std::vector<Vec3>(const TriMesh&)> face_residual;
};

TargetField make_normal_target(const TriMesh& m, const std::string& kind, const Vec3& center,
                               std::vector<Vec3> from_file) {
    if (kind == "file") {
        if (from_file.empty())
            throw DomainError("target=file needs per-face normals in the input ply");
        if (static_cast<int>(from_file.size()) != m.n_faces())
            throw ShapeMismatchError("per-face target count does not match mesh");
        auto shared = std::make_shared<std::vector<Vec3>>(std::move(from_file));
        TargetField t;
        t.assembler = std::make_unique<optimizer::NormalEnergy>(*shared);
        t.face_residual = [shared](const TriMesh& cur) {
            const auto geom = mesh::face_geometry(cur);
            std::vector<Vec3> r(geom.normal.size());
            for (std::size_t f = 0; f < r.size(); ++f) r[f] = geom.normal[f] - (*shared)[f];
            return r;
        };
        return t;
    }

    std::function<Vec3(const Vec3&)> fn;
    if (kind == "sphere" || kind == "offset-sphere") {
        fn = [center](const Vec3& x) { return (x - center).normalized(); };
    } else if (kind == "cube") {
        fn = [center](const Vec3& x) {
            const Vec3 d = x - center;
            const double ax = std::abs(d.x), ay = std::abs(d.y), az = std::abs(d.z);
            if (ax >= ay && ax >= az) return Vec3{d.x >= 0 ? 1.0 : -1.0, 0.0, 0.0};
            if (ay >= az) return Vec3{0.0, d.y >= 0 ? 1.0 : -1.0, 0.0};
            return Vec3{0.0, 0.0, d.z >= 0 ? 1.0 : -1.0};
        };
    } else {
        throw DomainError("target must be one of file, sphere, offset-sphere, cube");
    }
    TargetField t;
    t.assembler = std::make_unique<optimizer::NormalEnergy>(fn);
    t.face_residual = [fn](const TriMesh& cur) {
        const auto geom = mesh::face_geometry(cur);
        std::vector<Vec3> r(geom.normal.size());
        for (std::size_t f = 0; f < r.size(); ++f)
            r[f] = geom.normal[f] - fn(geom.centroid[f]).normalized();
        return r;
    };
    return t;
}

void require_ply_out(const std::string& out, const char* what) {
    if (out.empty()) throw DomainError(std::string(what) + " output path required (--out)");
    if (!has_ext(out, ".ply"))
        throw DomainError(std::string(what) + " output carries fields, use a .ply path");
}

admm::SubproblemOpts denoise_opts(const MethodOpts& m, double lambda) {
    admm::SubproblemOpts o;
    o.lambda = lambda;
    o.mu = m.mu;
    o.admm_iters = m.admm_iters;
    o.cg_iters = m.cg_iters;
    o.cg_tol = m.cg_tol;
    return o;
}

}  // namespace

int run_integrate(const IntegrateOpts& o) {
    validate_method(o.solve);
    if (o.target_denoise != "none" && o.target_denoise != "ml" && o.target_denoise != "rof")
        throw DomainError("target-denoise must be one of none, ml, rof");
    if (o.target_denoise != "none" && o.target_denoise_lambda < 0.0)
        throw DomainError("target-denoise-lambda must be nonnegative");
    if (o.target_denoise != "none" && o.target != "file")
        throw DomainError("target-denoise applies to target=file only");
    if (o.snapshot_every < 0) throw DomainError("snapshot-every must be nonnegative");
    require_ply_out(o.out, "integrate");
    if (o.mesh.empty()) throw DomainError("input mesh required (--mesh)");

    const auto md = mesh::load_mesh_data(o.mesh);
    const TriMesh m0 = md.build();

    std::vector<Vec3> file_target = md.face_normal;
    for (auto& nrm : file_target) nrm = nrm.normalized();
    if (o.target == "file" && o.target_denoise != "none") {
        const auto ops = fem::build_operators(m0);
        const auto mode = o.target_denoise == "ml" ? energies::DenoiseMode::ml
                                                   : energies::DenoiseMode::rof;
        file_target = energies::denoise_normal_field(m0, ops, file_target, mode,
                                                     o.target_denoise_lambda,
                                                     denoise_opts(o.solve, o.target_denoise_lambda));
    }

    const Vec3 center{o.target_cx, o.target_cy, o.target_cz};
    const TargetField target = make_normal_target(m0, o.target, center, std::move(file_target));

    KeyValues kv = {{"mesh", o.mesh},
                    {"target", o.target},
                    {"target_cx", fmt_g(o.target_cx)},
                    {"target_cy", fmt_g(o.target_cy)},
                    {"target_cz", fmt_g(o.target_cz)},
                    {"target_denoise", o.target_denoise},
                    {"target_denoise_lambda", fmt_g(o.target_denoise_lambda)},
                    {"out", o.out},
                    {"snapshot_every", fmt_i(o.snapshot_every)}};
    for (auto& p : method_kv(o.solve)) kv.push_back(std::move(p));

    std::ostringstream trace;
    echo_comments(trace, "integrate", kv);
    optimizer::RunHooks hooks;
    hooks.trace_csv = &trace;
    hooks.snapshot_every = o.snapshot_every;
    hooks.snapshot_prefix = o.snapshot_prefix;

    const auto run = run_method(m0, o.solve, *target.assembler, hooks);

    const auto residual = vertex_residual_from_faces(run.mesh, target.face_residual(run.mesh));
    const auto comments = comment_lines("integrate", kv);
    mesh::MeshFields fields;
    fields.vertex_quality = residual;
    fields.comments = comments;
    mesh::save_mesh(run.mesh, o.out, fields);
    if (!o.trace.empty()) write_text_file(o.trace, trace.str());
    print_run_summary(run);
    return 0;
}

int run_denoise_normals(const DenoiseOpts& o) {
    validate_method(o.solve);
    if (o.mode != "ml" && o.mode != "rof") throw DomainError("mode must be ml or rof");
    if (o.lambda < 0.0) throw DomainError("lambda must be nonnegative");
    if (o.solve.method == "gd" ? o.integrate_lambda < 0.0 : !(o.integrate_lambda > 0.0))
        throw DomainError("integrate-lambda out of range for the chosen method");
    require_ply_out(o.out, "denoise-normals");
    const std::string normals_out = o.normals_out.empty() ? o.out + ".normals.ply" : o.normals_out;
    if (!has_ext(normals_out, ".ply"))
        throw DomainError("normals output carries fields, use a .ply path");
    if (o.mesh.empty()) throw DomainError("input mesh required (--mesh)");

    const TriMesh m0 = mesh::load_mesh(o.mesh);
    const auto ops = fem::build_operators(m0);
    const auto geom = mesh::face_geometry(m0);

    const auto mode = o.mode == "ml" ? energies::DenoiseMode::ml : energies::DenoiseMode::rof;
    const auto denoised = energies::denoise_normal_field(m0, ops, geom.normal, mode, o.lambda,
                                                         denoise_opts(o.solve, o.lambda));

    KeyValues kv = {{"mesh", o.mesh},
                    {"mode", o.mode},
                    {"denoise_lambda", fmt_g(o.lambda)},
                    {"integrate_lambda", fmt_g(o.integrate_lambda)},
                    {"normals_out", normals_out},
                    {"out", o.out}};
    for (auto& p : method_kv(o.solve)) kv.push_back(std::move(p));

    MethodOpts stage2 = o.solve;
    stage2.lambda = o.integrate_lambda;

    std::ostringstream trace;
    echo_comments(trace, "denoise-normals", kv);
    optimizer::RunHooks hooks;
    hooks.trace_csv = &trace;

    optimizer::NormalEnergy energy(denoised);
    const auto run = run_method(m0, stage2, energy, hooks);

    const auto comments = comment_lines("denoise-normals", kv);

    mesh::MeshFields nf;
    nf.face_normal = denoised;
    nf.comments = comments;
    mesh::save_mesh(m0, normals_out, nf);

    std::vector<Vec3> final_residual(static_cast<std::size_t>(run.mesh.n_faces()));
    const auto final_geom = mesh::face_geometry(run.mesh);
    for (std::size_t f = 0; f < final_residual.size(); ++f)
        final_residual[f] = final_geom.normal[f] - denoised[f];
    mesh::MeshFields fields;
    const auto residual = vertex_residual_from_faces(run.mesh, final_residual);
    fields.vertex_quality = residual;
    fields.comments = comments;
    mesh::save_mesh(run.mesh, o.out, fields);

    if (!o.trace.empty()) write_text_file(o.trace, trace.str());
    print_run_summary(run);
    return 0;
}

int run_fit_points(const FitOpts& o) {
    validate_method(o.solve);
    if (o.normal_weight < 0.0) throw DomainError("normal-weight must be nonnegative");
    require_ply_out(o.out, "fit-points");
    if (o.mesh.empty()) throw DomainError("input mesh required (--mesh)");
    if (o.cloud.empty()) throw DomainError("input cloud required (--cloud)");

    const TriMesh m0 = mesh::load_mesh(o.mesh);
    const auto cd = mesh::load_cloud(o.cloud);
    auto cloud = std::make_shared<const PointCloud>(cd.points, cd.normals);
    if (o.normal_weight > 0.0 && !cloud->oriented())
        throw UnorientedCloudError("normal-weight > 0 needs an oriented cloud");

    KeyValues kv = {{"mesh", o.mesh},
                    {"cloud", o.cloud},
                    {"normal_weight", fmt_g(o.normal_weight)},
                    {"out", o.out}};
    for (auto& p : method_kv(o.solve)) kv.push_back(std::move(p));

    std::ostringstream trace;
    echo_comments(trace, "fit-points", kv);
    optimizer::RunHooks hooks;
    hooks.trace_csv = &trace;

    const double initial_min_angle = mesh::mesh_quality(m0, false).min_angle;
    optimizer::PointEnergy energy(cloud, o.normal_weight);
    const auto run = run_method(m0, o.solve, energy, hooks);

    std::vector<double> residual(static_cast<std::size_t>(run.mesh.n_vertices()));
    for (int i = 0; i < run.mesh.n_vertices(); ++i) {
        const Vec3& x = run.mesh.vertices()[static_cast<std::size_t>(i)];
        residual[static_cast<std::size_t>(i)] =
            (x - cloud->points()[static_cast<std::size_t>(cloud->nearest(x))]).norm();
    }
    const auto comments = comment_lines("fit-points", kv);
    mesh::MeshFields fields;
    fields.vertex_quality = residual;
    fields.comments = comments;
    mesh::save_mesh(run.mesh, o.out, fields);
    if (!o.trace.empty()) write_text_file(o.trace, trace.str());

    print_run_summary(run);
    const auto q = mesh::mesh_quality(run.mesh, true);
    const bool degraded = q.self_intersection_count > 0 ||
                          q.min_angle < 0.25 * initial_min_angle ||
                          run.stop == optimizer::StopReason::Degenerate;
    std::cout << "initial_min_angle=" << fmt_g(initial_min_angle) << "\n";
    std::cout << "min_angle=" << fmt_g(q.min_angle) << "\n";
    std::cout << "max_aspect=" << fmt_g(q.max_aspect) << "\n";
    std::cout << "self_intersections=" << q.self_intersection_count << "\n";
    std::cout << "degraded=" << (degraded ? 1 : 0) << "\n";
    return 0;
}

int run_texture_rof(const TextureRofOpts& o) {
    if (o.lambda < 0.0) throw DomainError("lambda must be nonnegative");
    if (!(o.mu > 0.0)) throw DomainError("mu must be positive");
    if (o.admm_iters < 1) throw DomainError("admm_iters must be positive");
    if (o.cg_iters < 1) throw DomainError("cg_iters must be positive");
    if (!(o.cg_tol > 0.0) || !(o.cg_tol < 1.0)) throw DomainError("cg_tol must be in (0, 1)");
    require_ply_out(o.out, "texture-rof");
    if (o.mesh.empty()) throw DomainError("input mesh required (--mesh)");

    const auto md = mesh::load_mesh_data(o.mesh);
    const TriMesh m = md.build();

    std::vector<double> observed = md.vertex_quality;
    if (!o.field.empty()) {
        std::ifstream is(o.field);
        if (!is) throw IoError("cannot open field file: " + o.field);
        observed.clear();
        double v = 0.0;
        while (is >> v) observed.push_back(v);
    }
    if (observed.empty())
        throw DomainError("no per-vertex field: embed a quality property or pass --field");
    if (static_cast<int>(observed.size()) != m.n_vertices())
        throw ShapeMismatchError("field length does not match vertex count");

    KeyValues kv = {{"mesh", o.mesh},
                    {"field", o.field},
                    {"lambda", fmt_g(o.lambda)},
                    {"mu", fmt_g(o.mu)},
                    {"admm_iters", fmt_i(o.admm_iters)},
                    {"cg_iters", fmt_i(o.cg_iters)},
                    {"cg_tol", fmt_g(o.cg_tol)},
                    {"out", o.out}};

    const auto ops = fem::build_operators(m);
    auto tv_of = [&](std::span<const double> u) {
        std::vector<double> g(static_cast<std::size_t>(ops.grad.rows()));
        ops.grad.apply(u, g);
        double tv = 0.0;
        for (std::size_t f = 0; f < ops.w_face.size(); ++f)
            tv += ops.w_face[f] * std::sqrt(sqr(g[3 * f]) + sqr(g[3 * f + 1]) + sqr(g[3 * f + 2]));
        return tv;
    };

    std::ostringstream trace;
    echo_comments(trace, "texture-rof", kv);

    std::vector<double> denoised;
    if (o.lambda == 0.0) {
        denoised = observed;
    } else {
        const auto rs = energies::assemble_scalar_rof(m, ops, observed);
        admm::SubproblemOpts opts;
        opts.lambda = o.lambda;
        opts.mu = o.mu;
        opts.admm_iters = o.admm_iters;
        opts.cg_iters = o.cg_iters;
        opts.cg_tol = o.cg_tol;
        opts.trace = &trace;
        denoised =
            admm::solve_subproblem_tv(rs.stacked(), rs.rhs, ops.grad, ops.w_face, opts, observed)
                .v;
    }

    const auto comments = comment_lines("texture-rof", kv);
    mesh::MeshFields fields;
    fields.vertex_quality = denoised;
    fields.comments = comments;
    mesh::save_mesh(m, o.out, fields);
    if (!o.trace.empty()) write_text_file(o.trace, trace.str());

    std::cout << "initial_tv=" << fmt_g(tv_of(observed)) << "\n";
    std::cout << "final_tv=" << fmt_g(tv_of(denoised)) << "\n";
    return 0;
}

int run_synth(const SynthOpts& o) {
    if (o.out.empty()) throw DomainError("output path required (--out)");

    KeyValues kv = {{"shape", o.shape}, {"seed", std::to_string(o.seed)}, {"out", o.out}};
    auto kd = [&](const char* k, double v) { kv.push_back({k, fmt_g(v)}); };
    auto ki = [&](const char* k, long long v) { kv.push_back({k, fmt_i(v)}); };

    if (o.shape == "icosphere") {
        ki("subdiv", o.subdiv);
        kd("radius", o.radius);
        mesh::MeshFields fields;
        const auto comments = comment_lines("synth", kv);
        fields.comments = comments;
        mesh::save_mesh(synth::icosphere(o.subdiv, o.radius), o.out, fields);
    } else if (o.shape == "cube") {
        ki("res", o.res);
        kd("side", o.side);
        mesh::MeshFields fields;
        const auto comments = comment_lines("synth", kv);
        fields.comments = comments;
        mesh::save_mesh(synth::cube(o.res, o.side), o.out, fields);
    } else if (o.shape == "noisy-cube") {
        ki("res", o.res);
        kd("side", o.side);
        kd("sigma", o.sigma);
        kd("vertex_sigma", o.vertex_sigma);
        const auto nc = synth::noisy_cube(o.res, o.side, o.sigma, o.vertex_sigma, o.seed);
        mesh::MeshFields fields;
        fields.face_normal = nc.target_normal;
        const auto comments = comment_lines("synth", kv);
        fields.comments = comments;
        mesh::save_mesh(nc.mesh, o.out, fields);
    } else if (o.shape == "cutbox-cloud") {
        ki("n", o.n);
        kd("side", o.side);
        const auto comments = comment_lines("synth", kv);
        mesh::save_cloud(synth::cutbox_cloud(o.n, o.side, o.seed), o.out, comments);
    } else if (o.shape == "sphere-cloud") {
        ki("n", o.n);
        kd("radius", o.radius);
        const auto comments = comment_lines("synth", kv);
        mesh::save_cloud(synth::sphere_cloud(o.n, o.radius, {}, o.seed), o.out, comments);
    } else if (o.shape == "strip") {
        const double sx = o.sx > 0.0 ? o.sx : o.nx;
        const double sy = o.sy > 0.0 ? o.sy : o.ny;
        const double split_x = o.split_x >= 0.0 ? o.split_x : sx / 2.0;
        ki("nx", o.nx);
        ki("ny", o.ny);
        kd("sx", sx);
        kd("sy", sy);
        kv.push_back({"step", o.step ? "1" : "0"});
        kd("split_x", split_x);
        kd("sigma", o.sigma);
        const auto m = synth::strip(o.nx, o.ny, sx, sy);
        mesh::MeshFields fields;
        std::vector<double> field;
        if (o.step) {
            field = synth::strip_step_field(m, split_x);
            if (o.sigma > 0.0) field = synth::add_field_noise(field, o.sigma, o.seed);
            fields.vertex_quality = field;
        }
        const auto comments = comment_lines("synth", kv);
        fields.comments = comments;
        mesh::save_mesh(m, o.out, fields);
    } else if (o.shape == "torus") {
        ki("nu", o.nu);
        ki("nv", o.nv);
        kd("big_radius", o.big_radius);
        kd("small_radius", o.small_radius);
        mesh::MeshFields fields;
        const auto comments = comment_lines("synth", kv);
        fields.comments = comments;
        mesh::save_mesh(synth::torus(o.nu, o.nv, o.big_radius, o.small_radius), o.out, fields);
    } else {
        throw DomainError("unknown shape: " + o.shape);
    }
    std::cout << "wrote " << o.out << "\n";
    return 0;
}

}  // namespace shapeopt::cli
