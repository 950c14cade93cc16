#include <chrono>
#include <cstdio>
#include <vector>

#include "shapeopt/core.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/sparse.hpp"
#include "shapeopt/synth.hpp"

// Times the parallel sparse/vector kernels against their serial references
// on an icosphere stiffness matrix and checks that the results agree bitwise.

using namespace shapeopt;

namespace {

template <typename F>
double time_ms(F&& body, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    const auto m = synth::icosphere(6);
    const auto ops = fem::build_operators(m);
    const auto K = fem::stiffness(ops);
    const int n = K.cols();
    std::printf("mesh: %d vertices, %d faces, stiffness nnz %zu\n", m.n_vertices(), m.n_faces(),
                K.values().size());

    Rng rng(7);
    std::vector<double> x(static_cast<std::size_t>(n));
    for (auto& v : x) v = rng.normal();
    std::vector<double> y_par(x.size());
    std::vector<double> y_ser(x.size());

    const int reps = 50;
    const double t_apply_par = time_ms([&] { K.apply(x, y_par); }, reps);
    const double t_apply_ser = time_ms([&] { serial::apply(K, x, y_ser); }, reps);
    bool same = y_par == y_ser;
    std::printf("apply:            parallel %8.3f ms   serial %8.3f ms   speedup %5.2fx   %s\n",
                t_apply_par, t_apply_ser, t_apply_ser / t_apply_par,
                same ? "bitwise equal" : "MISMATCH");

    const double t_applyt_par = time_ms([&] { K.apply_transpose(x, y_par); }, reps);
    const double t_applyt_ser = time_ms([&] { serial::apply_transpose(K, x, y_ser); }, reps);
    same = y_par == y_ser;
    std::printf("apply_transpose:  parallel %8.3f ms   serial %8.3f ms   speedup %5.2fx   %s\n",
                t_applyt_par, t_applyt_ser, t_applyt_ser / t_applyt_par,
                same ? "bitwise equal" : "MISMATCH");

    std::vector<double> z(x.size());
    for (auto& v : z) v = rng.normal();
    double d_par = 0.0, d_ser = 0.0;
    const double t_dot_par = time_ms([&] { d_par = dot(x, z); }, reps * 10);
    const double t_dot_ser = time_ms([&] { d_ser = serial::dot(x, z); }, reps * 10);
    std::printf("dot:              parallel %8.3f ms   serial %8.3f ms   speedup %5.2fx   %s\n",
                t_dot_par, t_dot_ser, t_dot_ser / t_dot_par,
                d_par == d_ser ? "bitwise equal" : "MISMATCH");

    return 0;
}
