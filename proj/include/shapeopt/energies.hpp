#pragma once

#include <span>
#include <vector>

#include "shapeopt/admm.hpp"
#include "shapeopt/fem.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/sparse.hpp"

namespace shapeopt::energies {

// Mass-weighted linearization of the residual energy around one mesh
// snapshot: E(v) = 1/2 ||A v - rhs||^2 where A is the stack of the blocks
// below. The convention is rhs = -(stacked weighted residuals), so the
// energy of the unmoved shape is 1/2 ||rhs||^2.
struct ResidualSystem {
    std::uint64_t snapshot = 0;
    int n = 0;
    std::vector<SparseMatrix> blocks;
    std::vector<double> rhs;

    double energy() const { return 0.5 * norm2(rhs); }
    admm::StackedSystem stacked() const;
    void append(ResidualSystem other);  // concatenates blocks of the same snapshot
};

// Point set with an optional oriented normal per point and a kd-tree for
// nearest-neighbor lookups. Ties in distance resolve to the smaller index so
// queries are independent of tree layout.
class PointCloud {
  public:
    explicit PointCloud(std::vector<Vec3> points, std::vector<Vec3> normals = {});

    int size() const { return static_cast<int>(pts_.size()); }
    const std::vector<Vec3>& points() const { return pts_; }
    bool oriented() const { return !normals_.empty(); }
    const std::vector<Vec3>& normals() const { return normals_; }

    int nearest(const Vec3& q) const;

  private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1;
        int right = -1;
    };
    int build(std::vector<int>& idx, int lo, int hi);

    std::vector<Vec3> pts_;
    std::vector<Vec3> normals_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

// r_n = n(T) - target(T) per face; block action on v is -W_n grad v. The
// optional weight scales the whole block by sqrt(weight) (used by the
// screened point energy).
ResidualSystem assemble_normal_residual(const mesh::TriMesh& mesh, const fem::FemOperators& ops,
                                        std::span<const Vec3> target, double weight = 1.0);

// r_x,i = x_i - nearest cloud point; the frozen-correspondence Jacobian acts
// as v_i * n_i. normal_weight > 0 adds the screened normal block with the
// target sampled at the cloud point nearest each face centroid.
ResidualSystem assemble_point_residual(const mesh::TriMesh& mesh, const fem::FemOperators& ops,
                                       const PointCloud& cloud, double normal_weight = 0.0);

// Willmore term: r_c = kappa per vertex, block action -(1/w) K v per vertex,
// all mass-weighted.
ResidualSystem assemble_curvature_residual(const mesh::TriMesh& mesh,
                                           const fem::FemOperators& ops);

// Identity data term for on-surface ROF on a static mesh: the subproblem
// minimizes 1/2 ||u - observed||^2_{L2} + lambda ||grad u||_{L1}.
ResidualSystem assemble_scalar_rof(const mesh::TriMesh& mesh, const fem::FemOperators& ops,
                                   std::span<const double> observed);

enum class DenoiseMode { ml, rof };

// Smooths a unit face-normal field componentwise in the vertex FEM space
// (face values move to vertices by area-weighted averaging, back by
// barycentric averaging), then re-normalizes per face. lambda = 0 returns
// the input unchanged.
std::vector<Vec3> denoise_normal_field(const mesh::TriMesh& mesh, const fem::FemOperators& ops,
                                       std::span<const Vec3> noisy, DenoiseMode mode,
                                       double lambda,
                                       const admm::SubproblemOpts& solver = {});

// h_sigma(s) = 1 - exp(-tan^2(pi/4 (s-1)) / sigma^2), monotone decreasing
// from 1 at s = -1 to 0 at s = 1.
double hernandez_weight(double s, double sigma);

// Normalized cross-correlation = cosine similarity.
double ncc(std::span<const double> a, std::span<const double> b);

}  // namespace shapeopt::energies
