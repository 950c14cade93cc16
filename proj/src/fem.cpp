#include "shapeopt/fem.hpp"

#include <cmath>

namespace shapeopt::fem {

SparseMatrix build_gradient(const mesh::TriMesh& m) {
    const mesh::FaceGeometry geom = mesh::face_geometry(m);
    const int nf = m.n_faces();
    const int n = m.n_vertices();
    const auto& X = m.vertices();
    const auto& F = m.faces();

    std::vector<Triplet> ts;
    ts.reserve(static_cast<std::size_t>(9 * nf));
    for (int f = 0; f < nf; ++f) {
        const double inv2a = 1.0 / (2.0 * geom.area[f]);
        const Vec3& nrm = geom.normal[f];
        Vec3 g[3];
        for (int k = 0; k < 2; ++k) {
            // hat-function gradient: normal x (edge opposite corner k), CCW
            const Vec3 e = X[F[f][(k + 2) % 3]] - X[F[f][(k + 1) % 3]];
            g[k] = nrm.cross(e) * inv2a;
        }
        // closes each row exactly so constants have a bitwise-zero gradient
        g[2] = -(g[0] + g[1]);
        for (int k = 0; k < 3; ++k) {
            const int col = F[f][k];
            ts.push_back({3 * f + 0, col, g[k].x});
            ts.push_back({3 * f + 1, col, g[k].y});
            ts.push_back({3 * f + 2, col, g[k].z});
        }
    }
    return SparseMatrix::from_triplets(3 * nf, n, std::move(ts));
}

std::pair<std::vector<double>, std::vector<double>> build_mass(const mesh::TriMesh& m) {
    const mesh::FaceGeometry geom = mesh::face_geometry(m);
    const int n = m.n_vertices();
    std::vector<double> wv(static_cast<std::size_t>(n), 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int f : m.vertex_faces(i)) s += geom.area[f];
        wv[i] = s / 3.0;
    }
    return {std::move(wv), geom.area};
}

FemOperators build_operators(const mesh::TriMesh& m) {
    FemOperators ops;
    ops.snapshot = m.snapshot();
    const mesh::FaceGeometry geom = mesh::face_geometry(m);
    ops.grad = build_gradient(m);
    auto [wv, wf] = build_mass(m);
    ops.w_vertex = std::move(wv);
    ops.w_face = std::move(wf);
    ops.face_normal = geom.normal;
    ops.total_area = geom.total_area;
    return ops;
}

double l2_norm_sq_vertex(std::span<const double> field, const FemOperators& ops) {
    if (field.size() != ops.w_vertex.size()) throw ShapeMismatchError("vertex field size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) s += ops.w_vertex[i] * sqr(field[i]);
    return s;
}

double l2_norm_sq_vertex(std::span<const Vec3> field, const FemOperators& ops) {
    if (field.size() != ops.w_vertex.size()) throw ShapeMismatchError("vertex field size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) s += ops.w_vertex[i] * field[i].norm2();
    return s;
}

double l2_norm_sq_face(std::span<const Vec3> field, const FemOperators& ops) {
    if (field.size() != ops.w_face.size()) throw ShapeMismatchError("face field size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i) s += ops.w_face[i] * field[i].norm2();
    return s;
}

double l2_norm_sq_face(std::span<const double> interleaved, const FemOperators& ops) {
    if (interleaved.size() != 3 * ops.w_face.size())
        throw ShapeMismatchError("face field size mismatch");
    double s = 0.0;
    for (std::size_t f = 0; f < ops.w_face.size(); ++f)
        s += ops.w_face[f] *
             (sqr(interleaved[3 * f]) + sqr(interleaved[3 * f + 1]) + sqr(interleaved[3 * f + 2]));
    return s;
}

SparseMatrix weighted_stiffness(const FemOperators& ops, std::span<const double> face_weight) {
    const int nf = static_cast<int>(ops.w_face.size());
    if (static_cast<int>(face_weight.size()) != nf)
        throw ShapeMismatchError("face weight size mismatch");
    const int n = ops.grad.cols();
    const auto rp = ops.grad.row_ptr();
    const auto ci = ops.grad.col_ind();
    const auto va = ops.grad.values();

    std::vector<Triplet> ts;
    ts.reserve(static_cast<std::size_t>(9 * nf));
    for (int f = 0; f < nf; ++f) {
        // gather the per-face gradient rows back into (column, Vec3) form
        int cols[3] = {-1, -1, -1};
        Vec3 g[3];
        int cnt = 0;
        for (int c = 0; c < 3; ++c) {
            const int r = 3 * f + c;
            for (int k = rp[r]; k < rp[r + 1]; ++k) {
                int slot = -1;
                for (int j = 0; j < cnt; ++j)
                    if (cols[j] == ci[k]) slot = j;
                if (slot < 0) {
                    slot = cnt++;
                    cols[slot] = ci[k];
                }
                if (c == 0) g[slot].x = va[k];
                if (c == 1) g[slot].y = va[k];
                if (c == 2) g[slot].z = va[k];
            }
        }
        for (int a = 0; a < cnt; ++a)
            for (int b = 0; b < cnt; ++b)
                ts.push_back({cols[a], cols[b], face_weight[f] * g[a].dot(g[b])});
    }
    return SparseMatrix::from_triplets(n, n, std::move(ts));
}

SparseMatrix stiffness(const FemOperators& ops, bool face_weighted) {
    if (face_weighted) return weighted_stiffness(ops, ops.w_face);
    const std::vector<double> ones(ops.w_face.size(), 1.0);
    return weighted_stiffness(ops, ones);
}

std::vector<Vec3> mean_curvature_vector(const mesh::TriMesh& m, const FemOperators& ops,
                                        const SparseMatrix& K) {
    if (ops.snapshot != m.snapshot())
        throw ShapeMismatchError("operators belong to a different mesh snapshot");
    const int n = m.n_vertices();
    std::vector<double> coord(static_cast<std::size_t>(n));
    std::vector<double> lap(static_cast<std::size_t>(n));
    std::vector<Vec3> H(static_cast<std::size_t>(n));
    const auto& X = m.vertices();
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i) coord[i] = c == 0 ? X[i].x : (c == 1 ? X[i].y : X[i].z);
        K.apply(coord, lap);
        for (int i = 0; i < n; ++i) {
            const double v = lap[i] / ops.w_vertex[i];
            if (c == 0) H[i].x = v;
            if (c == 1) H[i].y = v;
            if (c == 2) H[i].z = v;
        }
    }
    return H;
}

std::vector<Vec3> mean_curvature_vector(const mesh::TriMesh& m, const FemOperators& ops) {
    return mean_curvature_vector(m, ops, stiffness(ops));
}

std::vector<double> scalar_curvature(std::span<const Vec3> H,
                                     std::span<const Vec3> vertex_normals) {
    if (H.size() != vertex_normals.size()) throw ShapeMismatchError("curvature field size mismatch");
    std::vector<double> k(H.size());
    for (std::size_t i = 0; i < H.size(); ++i)
        k[i] = H[i].dot(vertex_normals[i]) >= 0.0 ? H[i].norm() : -H[i].norm();
    return k;
}

}  // namespace shapeopt::fem
