#pragma once

#include <cstdint>
#include <string>

namespace shapeopt::cli {

// Solver knobs shared by the shape-evolution commands. lambda is the outer
// regularization weight (lambda0 for the lm methods, the MCM weight for gd).
struct MethodOpts {
    std::string method = "lmd";  // gd | lmd | lmtv
    double lambda = 1.0;
    double mu = 10.0;
    int admm_iters = 30;
    int cg_iters = 10;
    double cg_tol = 1e-6;
    int max_iters = 50;
    double energy_tol = 1e-6;
    double step_tol = 1e-10;
    double lambda_up = 10.0;
    double lambda_down = 2.0;
};

struct IntegrateOpts {
    std::string mesh;
    std::string target = "file";  // file | sphere | offset-sphere | cube
    double target_cx = 0.0, target_cy = 0.0, target_cz = 0.0;
    std::string target_denoise = "none";  // none | ml | rof
    double target_denoise_lambda = 0.0;
    MethodOpts solve;
    std::string out;
    std::string trace;
    int snapshot_every = 0;
    std::string snapshot_prefix;
};

struct DenoiseOpts {
    std::string mesh;
    std::string mode = "rof";  // ml | rof
    double lambda = 1.0;       // smoothing weight for the normal field
    double integrate_lambda = 1.0;
    MethodOpts solve;
    std::string normals_out;  // defaults to <out>.normals.ply
    std::string out;
    std::string trace;
};

struct FitOpts {
    std::string mesh;
    std::string cloud;
    double normal_weight = 0.0;
    MethodOpts solve;
    std::string out;
    std::string trace;
};

struct TextureRofOpts {
    std::string mesh;
    std::string field;  // optional plain-text override, one value per line
    double lambda = 1.0;
    double mu = 10.0;
    int admm_iters = 100;
    int cg_iters = 30;
    double cg_tol = 1e-8;
    std::string out;
    std::string trace;
};

struct SynthOpts {
    std::string shape;
    int subdiv = 3;
    double radius = 1.0;
    int res = 10;
    double side = 2.0;
    double sigma = 0.0;         // field / normal noise
    double vertex_sigma = 0.0;  // geometry noise
    int n = 1000;
    std::uint64_t seed = 0;
    int nx = 63, ny = 31;
    double sx = 0.0, sy = 0.0;  // 0 = pixel scale (extent = cell count)
    bool step = false;
    double split_x = -1.0;  // negative = middle of the strip
    int nu = 48, nv = 24;
    double big_radius = 1.0, small_radius = 0.35;
    std::string out;
};

int run_integrate(const IntegrateOpts& o);
int run_denoise_normals(const DenoiseOpts& o);
int run_fit_points(const FitOpts& o);
int run_texture_rof(const TextureRofOpts& o);
int run_synth(const SynthOpts& o);

}  // namespace shapeopt::cli
