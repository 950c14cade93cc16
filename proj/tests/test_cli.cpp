#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shapeopt/meshio.hpp"
#include "shapeopt/synth.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using shapeopt::mesh::load_cloud;
using shapeopt::mesh::load_mesh;
using shapeopt::mesh::load_mesh_data;

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
};

CmdResult run(const std::string& args) {
    const std::string cmd = std::string(SHAPEOPT_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult r;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof(buf), pipe)) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

const fs::path& workdir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("shapeopt_cli_" + std::to_string(getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// value of the first "key=value" stdout line for key
double kv(const std::string& out, const std::string& key) {
    const std::string tag = key + "=";
    std::istringstream ss(out);
    for (std::string line; std::getline(ss, line);)
        if (line.rfind(tag, 0) == 0) return std::strtod(line.c_str() + tag.size(), nullptr);
    FAIL("missing stdout line ", key);
    return 0.0;
}

std::string kv_str(const std::string& out, const std::string& key) {
    const std::string tag = key + "=";
    std::istringstream ss(out);
    for (std::string line; std::getline(ss, line);)
        if (line.rfind(tag, 0) == 0) return line.substr(tag.size());
    FAIL("missing stdout line ", key);
    return {};
}

double rmse(std::span<const double> a, std::span<const double> b) {
    REQUIRE(a.size() == b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST_CASE("synth writes the documented icosphere") {
    const auto r = run("synth icosphere --subdiv 3 --out " + at("ico3.ply"));
    CHECK(r.code == 0);
    CHECK(r.out.find("wrote ") != std::string::npos);
    const auto m = load_mesh(at("ico3.ply"));
    CHECK(m.n_vertices() == 642);
    CHECK(m.n_faces() == 1280);
}

TEST_CASE("same seed and arguments reproduce byte-identical files") {
    const std::string cloud = at("det_cloud.ply");
    REQUIRE(run("synth cutbox-cloud --n 20000 --side 2 --seed 7 --out " + cloud).code == 0);
    const std::string first = slurp(cloud);
    REQUIRE(run("synth cutbox-cloud --n 20000 --side 2 --seed 7 --out " + cloud).code == 0);
    CHECK(first == slurp(cloud));

    const std::string mesh = at("det_cube.ply");
    REQUIRE(run("synth noisy-cube --res 6 --sigma 0.1 --vertex-sigma 0.01 --seed 3 --out " + mesh)
                .code == 0);
    const std::string cmd = "integrate --mesh " + mesh +
                            " --target file --method lmtv --lambda 0.01 --max-iters 4 --out " +
                            at("det_out.ply") + " --trace " + at("det_trace.csv");
    REQUIRE(run(cmd).code == 0);
    const std::string out1 = slurp(at("det_out.ply"));
    const std::string trace1 = slurp(at("det_trace.csv"));
    REQUIRE(run(cmd).code == 0);
    CHECK(out1 == slurp(at("det_out.ply")));
    CHECK(trace1 == slurp(at("det_trace.csv")));
}

TEST_CASE("bad inputs fail with exit 1 and leave no output") {
    CHECK(run("synth klein-bottle --out " + at("no1.ply")).code == 1);
    CHECK_FALSE(fs::exists(at("no1.ply")));

    CHECK(run("integrate --mesh " + at("absent.ply") + " --target sphere --out " + at("no2.ply"))
              .code == 1);
    CHECK_FALSE(fs::exists(at("no2.ply")));

    REQUIRE(run("synth icosphere --subdiv 1 --out " + at("ico1.ply")).code == 0);
    CHECK(run("fit-points --mesh " + at("ico1.ply") + " --cloud " + at("absent.xyz") +
              " --out " + at("no3.ply"))
              .code == 1);
    CHECK_FALSE(fs::exists(at("no3.ply")));
}

TEST_CASE("option validation rejects out-of-range solver settings") {
    REQUIRE(run("synth icosphere --subdiv 1 --out " + at("val_ico.ply")).code == 0);
    const std::string mesh = " --mesh " + at("val_ico.ply");

    CHECK(run("integrate" + mesh + " --target sphere --lambda -2 --out " + at("no4.ply")).code ==
          1);
    CHECK_FALSE(fs::exists(at("no4.ply")));
    CHECK(run("integrate" + mesh + " --target sphere --method newton --out " + at("no5.ply"))
              .code == 1);
    CHECK(run("denoise-normals" + mesh + " --mode rof --lambda -1 --out " + at("no6.ply")).code ==
          1);
    CHECK(run("denoise-normals" + mesh + " --mode blur --out " + at("no7.ply")).code == 1);
    CHECK(run("texture-rof" + mesh + " --mu 0 --out " + at("no8.ply")).code == 1);
    CHECK(run("fit-points" + mesh + " --cloud x.xyz --normal-weight -1 --out " + at("no9.ply"))
              .code == 1);
    CHECK(run("integrate" + mesh + " --target sphere --out " + at("no10.obj")).code == 1);
}

TEST_CASE("usage errors exit 1 and help exits 0") {
    CHECK(run("").code == 1);
    CHECK(run("--help").code == 0);
    CHECK(run("integrate --no-such-flag").code == 1);
    CHECK(run("synth icosphere").code == 1);
}

TEST_CASE("integrating a mesh against its own normals is an exact no-op") {
    const std::string mesh = at("own_cube.ply");
    REQUIRE(run("synth noisy-cube --res 6 --sigma 0 --vertex-sigma 0 --out " + mesh).code == 0);
    const auto r = run("integrate --mesh " + mesh +
                       " --target file --method lmd --lambda 0.001 --out " + at("own_out.ply") +
                       " --trace " + at("own_trace.csv"));
    REQUIRE(r.code == 0);
    CHECK(kv(r.out, "initial_energy") == 0.0);
    CHECK(kv(r.out, "final_energy") == 0.0);
    CHECK(kv(r.out, "accepted_steps") == 0.0);
    CHECK(kv_str(r.out, "stop") == "step_tol");

    const auto in = load_mesh_data(mesh);
    const auto out = load_mesh_data(at("own_out.ply"));
    REQUIRE(in.vertices.size() == out.vertices.size());
    for (std::size_t i = 0; i < in.vertices.size(); ++i) {
        CHECK(in.vertices[i].x == out.vertices[i].x);
        CHECK(in.vertices[i].y == out.vertices[i].y);
        CHECK(in.vertices[i].z == out.vertices[i].z);
    }
    REQUIRE(out.vertex_quality.size() == out.vertices.size());
    for (double q : out.vertex_quality) CHECK(q == 0.0);

    const std::string trace = slurp(at("own_trace.csv"));
    CHECK(trace.rfind("# command=integrate", 0) == 0);
    CHECK(trace.find("# step_tol=") != std::string::npos);
    CHECK(trace.find("iter,energy,step_norm,lambda,accepted,min_angle,cg_iters\n") !=
          std::string::npos);
    CHECK(trace.find("\n1,0,0,") != std::string::npos);
}

TEST_CASE("denoising a noisy cube moves it back toward the clean surface") {
    const std::string noisy = at("dn_noisy.ply");
    REQUIRE(run("synth noisy-cube --res 16 --side 2 --vertex-sigma 0.02 --seed 3 --out " + noisy)
                .code == 0);
    const auto r = run("denoise-normals --mesh " + noisy +
                       " --mode rof --lambda 0.1 --mu 1 --admm-iters 60 --cg-iters 20"
                       " --method lmd --integrate-lambda 0.001 --max-iters 20 --out " +
                       at("dn_out.ply") + " --trace " + at("dn_trace.csv"));
    REQUIRE(r.code == 0);
    CHECK(kv(r.out, "final_energy") < 0.1 * kv(r.out, "initial_energy"));

    const auto clean = shapeopt::synth::noisy_cube(16, 2.0, 0.0, 0.0, 3).mesh;
    const auto mean_dist = [&](const shapeopt::mesh::TriMesh& a) {
        double s = 0.0;
        for (const auto& p : a.vertices()) s += oracle::dist_to_mesh(p, clean);
        return s / a.n_vertices();
    };
    const auto m_noisy = load_mesh(noisy);
    const auto m_out = load_mesh(at("dn_out.ply"));
    CHECK(mean_dist(m_out) < 0.75 * mean_dist(m_noisy));
    CHECK(oracle::hausdorff_verts_to_mesh(m_out, clean) <
          0.85 * oracle::hausdorff_verts_to_mesh(m_noisy, clean));

    const auto field = load_mesh_data(at("dn_out.ply.normals.ply"));
    REQUIRE(field.face_normal.size() == field.faces.size());
    for (const auto& n : field.face_normal) CHECK(n.norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fitting a sphere to a denser sampling of itself stops at the floor") {
    REQUIRE(run("synth sphere-cloud --n 8000 --radius 1 --seed 4 --out " + at("sc.ply")).code ==
            0);
    REQUIRE(run("synth icosphere --subdiv 2 --out " + at("fit_ico.ply")).code == 0);
    const auto r = run("fit-points --mesh " + at("fit_ico.ply") + " --cloud " + at("sc.ply") +
                       " --method lmd --lambda 0.01 --max-iters 10 --out " + at("fit_out.ply"));
    REQUIRE(r.code == 0);
    CHECK(kv_str(r.out, "stop") == "energy_tol");
    CHECK(kv(r.out, "accepted_steps") <= 8.0);
    CHECK(kv(r.out, "final_energy") <= kv(r.out, "initial_energy"));
    CHECK(kv(r.out, "final_energy") < 5e-3);
    CHECK(kv(r.out, "degraded") == 0.0);
}

TEST_CASE("cut box fit stays clean where the descent baseline degrades") {
    REQUIRE(run("synth cutbox-cloud --n 20000 --side 2 --seed 7 --out " + at("cb.ply")).code == 0);
    REQUIRE(run("synth icosphere --subdiv 2 --out " + at("cb_ico.ply")).code == 0);
    const std::string tail = " --mesh " + at("cb_ico.ply") + " --cloud " + at("cb.ply") +
                             " --max-iters 50 --out ";

    const auto lm = run("fit-points --method lmtv --lambda 0.01" + tail + at("cb_lm.ply"));
    REQUIRE(lm.code == 0);
    CHECK(kv(lm.out, "self_intersections") == 0.0);
    CHECK(kv(lm.out, "degraded") == 0.0);
    CHECK(kv(lm.out, "min_angle") > 0.25 * kv(lm.out, "initial_min_angle"));
    CHECK(kv(lm.out, "final_energy") < 0.1 * kv(lm.out, "initial_energy"));

    const auto gd = run("fit-points --method gd --lambda 0.5" + tail + at("cb_gd.ply"));
    REQUIRE(gd.code == 0);
    CHECK(kv(gd.out, "degraded") == 1.0);
}

TEST_CASE("texture smoothing at zero weight copies the field verbatim") {
    REQUIRE(run("synth strip --nx 7 --ny 3 --out " + at("tiny.ply")).code == 0);
    const auto base = load_mesh(at("tiny.ply"));
    std::vector<double> field(static_cast<std::size_t>(base.n_vertices()));
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = 0.25 * static_cast<double>(i + 1);
    {
        std::ofstream f(at("field.txt"));
        for (double v : field) f << v << "\n";
    }
    const auto r = run("texture-rof --mesh " + at("tiny.ply") + " --field " + at("field.txt") +
                       " --lambda 0 --out " + at("tv0.ply"));
    REQUIRE(r.code == 0);
    CHECK(kv(r.out, "initial_tv") == kv(r.out, "final_tv"));
    const auto out = load_mesh_data(at("tv0.ply"));
    REQUIRE(out.vertex_quality.size() == field.size());
    for (std::size_t i = 0; i < field.size(); ++i) CHECK(out.vertex_quality[i] == field[i]);
}

TEST_CASE("stronger texture weight smooths more and both reduce the noise") {
    const std::string opts = " --nx 63 --ny 31 --step";
    REQUIRE(run("synth strip" + opts + " --sigma 20 --seed 1 --out " + at("tex_noisy.ply")).code ==
            0);
    REQUIRE(run("synth strip" + opts + " --sigma 0 --out " + at("tex_clean.ply")).code == 0);
    const auto clean = load_mesh_data(at("tex_clean.ply")).vertex_quality;
    const auto noisy = load_mesh_data(at("tex_noisy.ply")).vertex_quality;

    const auto r7 = run("texture-rof --mesh " + at("tex_noisy.ply") + " --lambda 7 --out " +
                        at("tex7.ply"));
    const auto r10 = run("texture-rof --mesh " + at("tex_noisy.ply") + " --lambda 10 --out " +
                         at("tex10.ply"));
    REQUIRE(r7.code == 0);
    REQUIRE(r10.code == 0);
    CHECK(kv(r10.out, "final_tv") < kv(r7.out, "final_tv"));
    CHECK(kv(r7.out, "final_tv") < kv(r7.out, "initial_tv"));

    const auto u7 = load_mesh_data(at("tex7.ply")).vertex_quality;
    const auto u10 = load_mesh_data(at("tex10.ply")).vertex_quality;
    const double base = rmse(noisy, clean);
    CHECK(rmse(u7, clean) < 0.7 * base);
    CHECK(rmse(u10, clean) < 0.7 * base);
}

TEST_CASE("field length mismatches are rejected") {
    REQUIRE(run("synth strip --nx 7 --ny 3 --out " + at("fl.ply")).code == 0);
    {
        std::ofstream f(at("short.txt"));
        f << "1 2 3 4 5\n";
    }
    CHECK(run("texture-rof --mesh " + at("fl.ply") + " --field " + at("short.txt") + " --out " +
              at("no_fl.ply"))
              .code == 1);
    CHECK_FALSE(fs::exists(at("no_fl.ply")));
}

TEST_CASE("config files fill unset options and command flags win") {
    REQUIRE(run("synth icosphere --subdiv 1 --out " + at("cfg_ico.ply")).code == 0);
    {
        std::ofstream f(at("ok.cfg"));
        f << "lambda=0.5\nmethod=lmd\nmax-iters=2\n";
    }
    const std::string base = "integrate --mesh " + at("cfg_ico.ply") +
                             " --target sphere --config " + at("ok.cfg");

    REQUIRE(run(base + " --out " + at("cfg1.ply") + " --trace " + at("cfg1.csv")).code == 0);
    const std::string t1 = slurp(at("cfg1.csv"));
    CHECK(t1.find("# lambda=0.5\n") != std::string::npos);
    CHECK(t1.find("# method=lmd\n") != std::string::npos);
    CHECK(t1.find("# max_iters=2\n") != std::string::npos);

    REQUIRE(run(base + " --lambda 0.125 --out " + at("cfg2.ply") + " --trace " + at("cfg2.csv"))
                .code == 0);
    CHECK(slurp(at("cfg2.csv")).find("# lambda=0.125\n") != std::string::npos);

    {
        std::ofstream f(at("bad.cfg"));
        f << "lambda=0.5\nbogus_key=3\n";
    }
    CHECK(run("integrate --mesh " + at("cfg_ico.ply") + " --target sphere --config " +
              at("bad.cfg") + " --out " + at("cfg3.ply"))
              .code == 1);
    CHECK_FALSE(fs::exists(at("cfg3.ply")));

    CHECK(run("integrate --mesh " + at("cfg_ico.ply") + " --target sphere --config " +
              at("absent.cfg") + " --out " + at("cfg4.ply"))
              .code == 1);
    CHECK_FALSE(fs::exists(at("cfg4.ply")));

    {
        std::ofstream f(at("flag.cfg"));
        f << "step=true\nnx=5\nny=4\n";
    }
    REQUIRE(run("synth strip --config " + at("flag.cfg") + " --out " + at("cfg5.ply")).code == 0);
    const auto m = load_mesh_data(at("cfg5.ply"));
    CHECK(m.vertices.size() == 6 * 5);
    CHECK(m.vertex_quality.size() == m.vertices.size());
}
