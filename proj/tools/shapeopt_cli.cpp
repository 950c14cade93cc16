#include <iostream>

#include <CLI11.hpp>

#include "shapeopt/cli.hpp"
#include "shapeopt/core.hpp"

namespace {

void add_method_opts(CLI::App* s, shapeopt::cli::MethodOpts& m, bool with_lambda = true) {
    s->add_option("--method", m.method, "gd | lmd | lmtv");
    if (with_lambda) s->add_option("--lambda", m.lambda, "regularization weight");
    s->add_option("--mu", m.mu, "ADMM penalty scale");
    s->add_option("--admm-iters", m.admm_iters, "ADMM outer iterations per step");
    s->add_option("--cg-iters", m.cg_iters, "CGLS iterations per inner solve");
    s->add_option("--cg-tol", m.cg_tol, "CGLS relative tolerance");
    s->add_option("--max-iters", m.max_iters, "outer iteration budget");
    s->add_option("--energy-tol", m.energy_tol, "relative energy decrease stop");
    s->add_option("--step-tol", m.step_tol, "step norm stop");
    s->add_option("--lambda-up", m.lambda_up, "lambda factor on reject");
    s->add_option("--lambda-down", m.lambda_down, "lambda factor on accept");
}

void add_config(CLI::App* s, std::string& path) {
    s->add_option("--config", path, "key=value config file, flags override");
}

// CLI11 only reads config files attached to the top-level app, so per-subcommand
// configs are applied by hand: known keys fill options the command line left unset,
// unknown keys are an error.
void apply_config(CLI::App* s, const std::string& path) {
    if (path.empty()) return;
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
        if (!item.parents.empty() || item.name == "config")
            throw CLI::ConfigError::Extras(item.fullname());
        auto* op = s->get_option_no_throw("--" + item.name);
        if (op == nullptr) throw CLI::ConfigError::Extras(item.fullname());
        if (op->count() > 0) continue;
        if (item.inputs.empty()) {
            op->add_result("true");
        } else {
            for (const auto& in : item.inputs) op->add_result(in);
        }
        op->run_callback();
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variation-regularized shape optimization on triangle meshes"};
    app.require_subcommand(1);

    shapeopt::cli::IntegrateOpts io;
    auto* si = app.add_subcommand("integrate", "evolve a mesh to match a target normal field");
    si->add_option("--mesh", io.mesh, "input mesh (.obj/.ply)")->required();
    si->add_option("--target", io.target, "file | sphere | offset-sphere | cube");
    si->add_option("--target-cx", io.target_cx, "analytic target center x");
    si->add_option("--target-cy", io.target_cy, "analytic target center y");
    si->add_option("--target-cz", io.target_cz, "analytic target center z");
    si->add_option("--target-denoise", io.target_denoise, "none | ml | rof");
    si->add_option("--target-denoise-lambda", io.target_denoise_lambda,
                   "smoothing weight for the target field");
    add_method_opts(si, io.solve);
    si->add_option("--out", io.out, "output mesh (.ply)")->required();
    si->add_option("--trace", io.trace, "convergence CSV path");
    si->add_option("--snapshot-every", io.snapshot_every, "write a mesh every k iterations");
    si->add_option("--snapshot-prefix", io.snapshot_prefix, "snapshot path prefix");
    std::string cfg_i;
    add_config(si, cfg_i);

    shapeopt::cli::DenoiseOpts dn;
    auto* sd = app.add_subcommand("denoise-normals",
                                  "smooth the normal field, then integrate it");
    sd->add_option("--mesh", dn.mesh, "noisy input mesh")->required();
    sd->add_option("--mode", dn.mode, "ml | rof");
    sd->add_option("--lambda", dn.lambda, "normal-field smoothing weight");
    sd->add_option("--integrate-lambda", dn.integrate_lambda, "stage-2 regularization weight");
    add_method_opts(sd, dn.solve, false);
    sd->add_option("--normals-out", dn.normals_out, "denoised field mesh (.ply)");
    sd->add_option("--out", dn.out, "output mesh (.ply)")->required();
    sd->add_option("--trace", dn.trace, "convergence CSV path");
    std::string cfg_d;
    add_config(sd, cfg_d);

    shapeopt::cli::FitOpts fp;
    auto* sf = app.add_subcommand("fit-points", "fit a mesh to an oriented point cloud");
    sf->add_option("--mesh", fp.mesh, "initial mesh")->required();
    sf->add_option("--cloud", fp.cloud, "point cloud (.ply/.xyz)")->required();
    sf->add_option("--normal-weight", fp.normal_weight, "screened normal term weight");
    add_method_opts(sf, fp.solve);
    sf->add_option("--out", fp.out, "output mesh (.ply)")->required();
    sf->add_option("--trace", fp.trace, "convergence CSV path");
    std::string cfg_f;
    add_config(sf, cfg_f);

    shapeopt::cli::TextureRofOpts tr;
    auto* st = app.add_subcommand("texture-rof", "ROF-denoise a scalar field on a static mesh");
    st->add_option("--mesh", tr.mesh, "mesh with a per-vertex quality field")->required();
    st->add_option("--field", tr.field, "plain-text field override, one value per line");
    st->add_option("--lambda", tr.lambda, "total-variation weight");
    st->add_option("--mu", tr.mu, "ADMM penalty scale");
    st->add_option("--admm-iters", tr.admm_iters, "ADMM iterations");
    st->add_option("--cg-iters", tr.cg_iters, "CGLS iterations per inner solve");
    st->add_option("--cg-tol", tr.cg_tol, "CGLS relative tolerance");
    st->add_option("--out", tr.out, "output mesh with denoised field (.ply)")->required();
    st->add_option("--trace", tr.trace, "ADMM trace CSV path");
    std::string cfg_t;
    add_config(st, cfg_t);

    shapeopt::cli::SynthOpts sy;
    auto* ss = app.add_subcommand("synth", "generate synthetic meshes, clouds and fields");
    ss->add_option("shape", sy.shape,
                   "icosphere | cube | noisy-cube | cutbox-cloud | sphere-cloud | strip | torus")
        ->required();
    ss->add_option("--subdiv", sy.subdiv, "icosphere subdivisions");
    ss->add_option("--radius", sy.radius, "sphere radius");
    ss->add_option("--res", sy.res, "cube segments per edge");
    ss->add_option("--side", sy.side, "cube side length");
    ss->add_option("--sigma", sy.sigma, "field / normal noise level");
    ss->add_option("--vertex-sigma", sy.vertex_sigma, "geometry noise level");
    ss->add_option("--n", sy.n, "cloud sample count");
    ss->add_option("--seed", sy.seed, "rng seed");
    ss->add_option("--nx", sy.nx, "strip cells in x");
    ss->add_option("--ny", sy.ny, "strip cells in y");
    ss->add_option("--sx", sy.sx, "strip extent in x");
    ss->add_option("--sy", sy.sy, "strip extent in y");
    ss->add_flag("--step", sy.step, "attach a piecewise-constant step field");
    ss->add_option("--split-x", sy.split_x, "step field split position");
    ss->add_option("--nu", sy.nu, "torus segments around the big loop");
    ss->add_option("--nv", sy.nv, "torus segments around the tube");
    ss->add_option("--big-radius", sy.big_radius, "torus big radius");
    ss->add_option("--small-radius", sy.small_radius, "torus tube radius");
    ss->add_option("--out", sy.out, "output file")->required();
    std::string cfg_s;
    add_config(ss, cfg_s);

    int rc = 0;
    si->callback([&] { apply_config(si, cfg_i); rc = shapeopt::cli::run_integrate(io); });
    sd->callback([&] { apply_config(sd, cfg_d); rc = shapeopt::cli::run_denoise_normals(dn); });
    sf->callback([&] { apply_config(sf, cfg_f); rc = shapeopt::cli::run_fit_points(fp); });
    st->callback([&] { apply_config(st, cfg_t); rc = shapeopt::cli::run_texture_rof(tr); });
    ss->callback([&] { apply_config(ss, cfg_s); rc = shapeopt::cli::run_synth(sy); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const shapeopt::SolverBreakdownError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const shapeopt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return rc;
}
