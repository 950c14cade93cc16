#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <utility>
#include <vector>

#include "shapeopt/admm.hpp"
#include "shapeopt/core.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/sparse.hpp"

namespace oracle {

using shapeopt::SparseMatrix;
using shapeopt::Vec3;

inline Eigen::MatrixXd to_dense(const SparseMatrix& A) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(A.rows(), A.cols());
    auto rp = A.row_ptr();
    auto ci = A.col_ind();
    auto va = A.values();
    for (int r = 0; r < A.rows(); ++r)
        for (int k = rp[r]; k < rp[r + 1]; ++k) D(r, ci[k]) += va[k];
    return D;
}

inline Eigen::MatrixXd to_dense(const shapeopt::admm::StackedSystem& M) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(M.total_rows(), M.cols);
    int r0 = 0;
    for (const auto& blk : M.blocks) {
        D.block(r0, 0, blk.A->rows(), blk.A->cols()) = blk.scale * to_dense(*blk.A);
        r0 += blk.A->rows();
    }
    return D;
}

// Minimum-norm least-squares solution via complete orthogonal decomposition.
inline Eigen::VectorXd lstsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    return A.completeOrthogonalDecomposition().solve(b);
}

// Independent cotangent assembly of grad^T diag(face_weight x3) grad:
// off-diagonal (a,b) gets -(fw/|T|) cot(angle at c)/2 per incident face,
// diagonals the negated row sums per face.
inline Eigen::MatrixXd cot_stiffness(const shapeopt::mesh::TriMesh& m,
                                     std::span<const double> face_weight = {}) {
    const auto& X = m.vertices();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(m.n_vertices(), m.n_vertices());
    for (int f = 0; f < m.n_faces(); ++f) {
        const auto& F = m.faces()[static_cast<std::size_t>(f)];
        Vec3 e01 = X[static_cast<std::size_t>(F[1])] - X[static_cast<std::size_t>(F[0])];
        Vec3 e02 = X[static_cast<std::size_t>(F[2])] - X[static_cast<std::size_t>(F[0])];
        const double area = 0.5 * e01.cross(e02).norm();
        const double w = (face_weight.empty() ? area : face_weight[static_cast<std::size_t>(f)]) / area;
        for (int c = 0; c < 3; ++c) {
            const int ic = F[c], ia = F[(c + 1) % 3], ib = F[(c + 2) % 3];
            Vec3 u = X[static_cast<std::size_t>(ia)] - X[static_cast<std::size_t>(ic)];
            Vec3 v = X[static_cast<std::size_t>(ib)] - X[static_cast<std::size_t>(ic)];
            const double cot = u.dot(v) / u.cross(v).norm();
            K(ia, ib) -= 0.5 * w * cot;
            K(ib, ia) -= 0.5 * w * cot;
            K(ia, ia) += 0.5 * w * cot;
            K(ib, ib) += 0.5 * w * cot;
        }
    }
    return K;
}

// Vertex jitter bounded by a fraction of the shortest edge, so faces never
// get near degeneracy.
inline shapeopt::mesh::TriMesh jitter(const shapeopt::mesh::TriMesh& m, double rel_amp,
                                      std::uint64_t seed) {
    const auto& X = m.vertices();
    double min_edge = std::numeric_limits<double>::max();
    for (const auto& F : m.faces())
        for (int c = 0; c < 3; ++c)
            min_edge = std::min(min_edge, (X[static_cast<std::size_t>(F[c])] -
                                           X[static_cast<std::size_t>(F[(c + 1) % 3])])
                                              .norm());
    shapeopt::Rng rng(seed);
    std::vector<Vec3> out = X;
    for (auto& x : out) {
        Vec3 d = rng.normal3();
        const double n = d.norm();
        if (n > 1.0) d = d / n;
        x += rel_amp * min_edge * d;
    }
    return {std::move(out), m.faces()};
}

inline int brute_nearest(std::span<const Vec3> pts, const Vec3& q) {
    int best = 0;
    double bd = (pts[0] - q).norm2();
    for (int i = 1; i < static_cast<int>(pts.size()); ++i) {
        const double d = (pts[static_cast<std::size_t>(i)] - q).norm2();
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    return best;
}

inline double point_tri_dist(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
    const Vec3 ab = b - a, ac = c - a, ap = p - a;
    const double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) return ap.norm();
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) return bp.norm();
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) return cp.norm();
    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return (ap - ab * (d1 / (d1 - d3))).norm();
    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return (ap - ac * (d2 / (d2 - d6))).norm();
    const double va = d3 * d6 - d5 * d4;
    if (va <= 0 && d4 - d3 >= 0 && d5 - d6 >= 0)
        return (bp - (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)))).norm();
    const double denom = 1.0 / (va + vb + vc);
    const Vec3 q = a + ab * (vb * denom) + ac * (vc * denom);
    return (p - q).norm();
}

inline double dist_to_mesh(const Vec3& p, const shapeopt::mesh::TriMesh& m) {
    const auto& X = m.vertices();
    double best = std::numeric_limits<double>::max();
    for (const auto& F : m.faces())
        best = std::min(best, point_tri_dist(p, X[static_cast<std::size_t>(F[0])],
                                             X[static_cast<std::size_t>(F[1])],
                                             X[static_cast<std::size_t>(F[2])]));
    return best;
}

// One-sided Hausdorff from the vertices of a to the surface of b.
inline double hausdorff_verts_to_mesh(const shapeopt::mesh::TriMesh& a,
                                      const shapeopt::mesh::TriMesh& b) {
    double worst = 0.0;
    for (const auto& p : a.vertices()) worst = std::max(worst, dist_to_mesh(p, b));
    return worst;
}

struct RofSolution {
    std::vector<double> v;
    double objective = 0.0;
    int iters = 0;
};

inline double rof_objective(const SparseMatrix& G, std::span<const double> face_area,
                            std::span<const double> w_vertex, std::span<const double> u_obs,
                            double lambda, std::span<const double> v) {
    const int n = static_cast<int>(v.size());
    double fit = 0.0;
    for (int i = 0; i < n; ++i) fit += 0.5 * w_vertex[i] * shapeopt::sqr(v[i] - u_obs[i]);
    std::vector<double> g(static_cast<std::size_t>(G.rows()));
    G.apply(v, g);
    double tv = 0.0;
    for (std::size_t f = 0; f < face_area.size(); ++f)
        tv += face_area[f] *
              std::sqrt(shapeopt::sqr(g[3 * f]) + shapeopt::sqr(g[3 * f + 1]) + shapeopt::sqr(g[3 * f + 2]));
    return fit + lambda * tv;
}

// First-order ROF solver: FISTA on the dual of
//   min_v 1/2 ||v - u||^2_W + lambda sum_f a_f ||(G v)_f||,
// with v(p) = u - W^{-1} G^T p and per-face projection ||p_f|| <= lambda a_f.
// Independent of the ADMM path; shares only the gradient operator.
inline RofSolution rof_dual_fista(const SparseMatrix& G, std::span<const double> face_area,
                                  std::span<const double> w_vertex, std::span<const double> u_obs,
                                  double lambda, int max_iters, double tol) {
    const int n = G.cols();
    const int mrows = G.rows();
    const int nf = static_cast<int>(face_area.size());

    std::vector<double> winv(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) winv[static_cast<std::size_t>(i)] = 1.0 / w_vertex[i];

    // Lipschitz constant of the dual gradient via power iteration on G W^-1 G^T.
    std::vector<double> q(static_cast<std::size_t>(mrows), 1.0), tmp_n(static_cast<std::size_t>(n)),
        tmp_m(static_cast<std::size_t>(mrows));
    double L = 1.0;
    for (int it = 0; it < 200; ++it) {
        G.apply_transpose(q, tmp_n);
        for (int i = 0; i < n; ++i) tmp_n[static_cast<std::size_t>(i)] *= winv[static_cast<std::size_t>(i)];
        G.apply(tmp_n, tmp_m);
        L = shapeopt::norm(tmp_m);
        if (L == 0.0) break;
        for (int i = 0; i < mrows; ++i) q[static_cast<std::size_t>(i)] = tmp_m[static_cast<std::size_t>(i)] / L;
    }
    const double tau = (L > 0.0) ? 0.99 / L : 1.0;

    std::vector<double> p(static_cast<std::size_t>(mrows), 0.0), y = p, p_prev = p;
    std::vector<double> v(u_obs.begin(), u_obs.end()), v_prev = v;
    double t = 1.0;
    int done = max_iters;
    for (int it = 1; it <= max_iters; ++it) {
        // v(y) and ascent step on the dual
        G.apply_transpose(y, tmp_n);
        for (int i = 0; i < n; ++i)
            v[static_cast<std::size_t>(i)] =
                u_obs[i] - winv[static_cast<std::size_t>(i)] * tmp_n[static_cast<std::size_t>(i)];
        G.apply(v, tmp_m);
        p_prev.swap(p);
        for (int f = 0; f < nf; ++f) {
            double px = y[static_cast<std::size_t>(3 * f)] + tau * tmp_m[static_cast<std::size_t>(3 * f)];
            double py = y[static_cast<std::size_t>(3 * f + 1)] + tau * tmp_m[static_cast<std::size_t>(3 * f + 1)];
            double pz = y[static_cast<std::size_t>(3 * f + 2)] + tau * tmp_m[static_cast<std::size_t>(3 * f + 2)];
            const double cap = lambda * face_area[static_cast<std::size_t>(f)];
            const double pn = std::sqrt(px * px + py * py + pz * pz);
            if (pn > cap) {
                const double s = cap / pn;
                px *= s;
                py *= s;
                pz *= s;
            }
            p[static_cast<std::size_t>(3 * f)] = px;
            p[static_cast<std::size_t>(3 * f + 1)] = py;
            p[static_cast<std::size_t>(3 * f + 2)] = pz;
        }
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        for (int i = 0; i < mrows; ++i)
            y[static_cast<std::size_t>(i)] =
                p[static_cast<std::size_t>(i)] +
                beta * (p[static_cast<std::size_t>(i)] - p_prev[static_cast<std::size_t>(i)]);
        t = t_next;

        if (it % 50 == 0) {
            G.apply_transpose(p, tmp_n);
            for (int i = 0; i < n; ++i)
                v[static_cast<std::size_t>(i)] =
                    u_obs[i] - winv[static_cast<std::size_t>(i)] * tmp_n[static_cast<std::size_t>(i)];
            double dw = 0.0;
            for (int i = 0; i < n; ++i)
                dw += w_vertex[i] * shapeopt::sqr(v[static_cast<std::size_t>(i)] - v_prev[static_cast<std::size_t>(i)]);
            v_prev = v;
            if (std::sqrt(dw) < tol) {
                done = it;
                break;
            }
        }
    }
    G.apply_transpose(p, tmp_n);
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            u_obs[i] - winv[static_cast<std::size_t>(i)] * tmp_n[static_cast<std::size_t>(i)];
    return {v, rof_objective(G, face_area, w_vertex, u_obs, lambda, v), done};
}

inline double wx_norm(std::span<const double> a, std::span<const double> b,
                      std::span<const double> w) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * shapeopt::sqr(a[i] - b[i]);
    return std::sqrt(s);
}

inline double fit_loglog_slope(std::span<const double> x, std::span<const double> y) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        const double lx = std::log(x[static_cast<std::size_t>(i)]);
        const double ly = std::log(y[static_cast<std::size_t>(i)]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path fresh_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() / ("shapeopt_" + tag + "_" +
                                                         std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace oracle
