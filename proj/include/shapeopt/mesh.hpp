#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "shapeopt/core.hpp"

namespace shapeopt::mesh {

struct Face {
    std::array<int, 3> v{};
    int operator[](int k) const { return v[static_cast<std::size_t>(k)]; }
};

// Immutable oriented-manifold triangle mesh. The constructor validates
// indices, rejects combinatorially degenerate faces, non-manifold edges and
// inconsistent orientation, and builds the vertex-to-face adjacency. Every
// constructed mesh gets a unique snapshot id; fields and operators derived
// from a mesh carry that id so cross-snapshot mixups fail loudly instead of
// silently reading stale geometry.
class TriMesh {
  public:
    TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

    int n_vertices() const { return static_cast<int>(verts_.size()); }
    int n_faces() const { return static_cast<int>(faces_.size()); }
    const std::vector<Vec3>& vertices() const { return verts_; }
    const std::vector<Face>& faces() const { return faces_; }
    std::uint64_t snapshot() const { return snapshot_; }
    bool has_boundary() const { return has_boundary_; }

    // faces incident to vertex i, ascending face index
    std::span<const int> vertex_faces(int i) const;

    double bbox_diag() const { return bbox_diag_; }

  private:
    std::vector<Vec3> verts_;
    std::vector<Face> faces_;
    std::vector<int> vf_ptr_;
    std::vector<int> vf_ind_;
    bool has_boundary_ = false;
    double bbox_diag_ = 0.0;
    std::uint64_t snapshot_ = 0;
};

struct FaceGeometry {
    std::uint64_t snapshot = 0;
    std::vector<double> area;    // per face
    std::vector<Vec3> normal;    // per face, unit
    std::vector<Vec3> centroid;  // per face
    double total_area = 0.0;
};

// Throws DegenerateFaceError when any face area falls below
// 1e-12 * bbox_diag^2.
FaceGeometry face_geometry(const TriMesh& mesh);

// Area-weighted average of incident face normals, normalized.
std::vector<Vec3> vertex_normals(const TriMesh& mesh, const FaceGeometry& geom);
std::vector<Vec3> vertex_normals(const TriMesh& mesh);

// x_i' = x_i + v_i * n_i with explicitly supplied normals.
TriMesh displace_along_normals(const TriMesh& mesh, std::span<const double> v,
                               std::span<const Vec3> normals);

// Sum of angle defects 2*pi - sum(incident corner angles); equals 2*pi*chi
// for closed meshes. Throws BoundaryError on meshes with boundary.
double angle_defect_total(const TriMesh& mesh);

// Signed volume enclosed by a closed oriented mesh (divergence theorem).
double enclosed_volume(const TriMesh& mesh);

struct QualityReport {
    double min_angle = 0.0;   // radians, min over all face corners
    double max_aspect = 0.0;  // longest edge / shortest altitude over faces
    int self_intersection_count = 0;
};

// check_intersections=false skips the triangle-triangle overlap pass (the
// expensive part) and reports 0.
QualityReport mesh_quality(const TriMesh& mesh, bool check_intersections = true);

// Overlap test between non-adjacent face pairs, uniform-grid broad phase.
int count_self_intersections(const TriMesh& mesh);
bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                         const Vec3& b1, const Vec3& b2, double eps = 1e-10);

}  // namespace shapeopt::mesh
