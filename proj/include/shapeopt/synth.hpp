#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shapeopt/core.hpp"
#include "shapeopt/mesh.hpp"
#include "shapeopt/meshio.hpp"

namespace shapeopt::synth {

// 10*4^subdiv + 2 vertices, outward orientation
mesh::TriMesh icosphere(int subdiv, double radius = 1.0, const Vec3& center = {});

// axis-aligned cube surface, res segments per edge, 6*res^2 + 2 vertices
mesh::TriMesh cube(int res, double side = 2.0, const Vec3& center = {});

// cube with the (+,+,+) corner cut off through the adjacent edge midpoints
mesh::TriMesh cutbox(double side = 2.0, const Vec3& center = {});

// flat z=0 grid, (nx+1)*(ny+1) vertices, normals +z
mesh::TriMesh strip(int nx, int ny, double sx, double sy);

mesh::TriMesh torus(int nu, int nv, double big_radius, double small_radius);

// lo where x < split_x, hi elsewhere
std::vector<double> strip_step_field(const mesh::TriMesh& m, double split_x, double lo = 0.0,
                                     double hi = 255.0);

// cube geometry with optional Gaussian vertex displacement (vertex_sigma)
// and a per-face target normal field: the clean cube normals, optionally
// perturbed by normal_sigma and re-normalized.
struct NoisyCube {
    mesh::TriMesh mesh;
    std::vector<Vec3> target_normal;
};
NoisyCube noisy_cube(int res, double side, double normal_sigma, double vertex_sigma,
                     std::uint64_t seed);

// area-uniform samples with the face normal attached to each point
mesh::CloudData sample_surface(const mesh::TriMesh& m, int n, std::uint64_t seed);

mesh::CloudData cutbox_cloud(int n, double side, std::uint64_t seed);
mesh::CloudData sphere_cloud(int n, double radius, const Vec3& center, std::uint64_t seed);

std::vector<double> add_field_noise(std::span<const double> field, double sigma,
                                    std::uint64_t seed);
std::vector<Vec3> add_normal_noise(std::span<const Vec3> normals, double sigma,
                                   std::uint64_t seed);

}  // namespace shapeopt::synth
