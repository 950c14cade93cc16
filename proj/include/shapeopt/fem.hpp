#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "shapeopt/mesh.hpp"
#include "shapeopt/sparse.hpp"

namespace shapeopt::fem {

// Discrete operators of the piecewise-linear FEM space on one mesh snapshot.
// grad maps vertex scalars to per-face constant 3-vectors, stored with rows
// interleaved as (3f, 3f+1, 3f+2) = (x, y, z) of face f. w_vertex are the
// lumped vertex quadrature weights, w_face the face areas.
struct FemOperators {
    std::uint64_t snapshot = 0;
    SparseMatrix grad;  // 3F x n
    std::vector<double> w_vertex;
    std::vector<double> w_face;
    std::vector<Vec3> face_normal;
    double total_area = 0.0;
};

SparseMatrix build_gradient(const mesh::TriMesh& mesh);
std::pair<std::vector<double>, std::vector<double>> build_mass(const mesh::TriMesh& mesh);
FemOperators build_operators(const mesh::TriMesh& mesh);

// Quadrature norms, squared: sum_i w_i v_i^2 resp. sum_T |T| ||g_T||^2.
double l2_norm_sq_vertex(std::span<const double> field, const FemOperators& ops);
double l2_norm_sq_vertex(std::span<const Vec3> field, const FemOperators& ops);
double l2_norm_sq_face(std::span<const Vec3> field, const FemOperators& ops);
double l2_norm_sq_face(std::span<const double> interleaved, const FemOperators& ops);

// K = grad^T diag(w_face x3) grad (face_weighted=true, the default used
// everywhere) or the unweighted grad^T grad for A/B comparison. Symmetric
// positive semidefinite with constants in the kernel either way.
SparseMatrix stiffness(const FemOperators& ops, bool face_weighted = true);

// grad^T diag(face_weight x3) grad for arbitrary nonnegative per-face
// weights (used by the weighted mean-curvature flow).
SparseMatrix weighted_stiffness(const FemOperators& ops, std::span<const double> face_weight);

// H_i = (K X)_i / w_i. Positive scalar curvature = convex with outward
// normals (sphere of radius r gives kappa = 2/r).
std::vector<Vec3> mean_curvature_vector(const mesh::TriMesh& mesh, const FemOperators& ops,
                                        const SparseMatrix& K);
std::vector<Vec3> mean_curvature_vector(const mesh::TriMesh& mesh, const FemOperators& ops);
std::vector<double> scalar_curvature(std::span<const Vec3> H, std::span<const Vec3> vertex_normals);

}  // namespace shapeopt::fem
