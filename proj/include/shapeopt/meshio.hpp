#pragma once

#include <span>
#include <string>
#include <vector>

#include "shapeopt/mesh.hpp"

namespace shapeopt::mesh {

// Parsed file contents before topology validation. Optional fields are empty
// when the file does not carry them.
struct MeshData {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;
    std::vector<double> vertex_quality;
    std::vector<Vec3> vertex_normal;
    std::vector<Vec3> face_normal;

    TriMesh build() const { return TriMesh(vertices, faces); }
};

// Format chosen by extension: .obj or .ply (ascii or binary_little_endian).
MeshData load_mesh_data(const std::string& path);
TriMesh load_mesh(const std::string& path);

struct MeshFields {
    std::span<const double> vertex_quality = {};
    std::span<const Vec3> vertex_normal = {};
    std::span<const Vec3> face_normal = {};
    std::span<const std::string> comments = {};
};

// .obj gets geometry only (fields rejected); .ply is written as ascii with
// full precision so round trips are lossless and byte-deterministic.
void save_mesh(const TriMesh& mesh, const std::string& path, const MeshFields& fields = {});

struct CloudData {
    std::vector<Vec3> points;
    std::vector<Vec3> normals;  // empty when unoriented

    bool oriented() const { return !normals.empty(); }
};

// .ply (vertex element only) or whitespace .xyz with 3 or 6 columns.
CloudData load_cloud(const std::string& path);
void save_cloud(const CloudData& cloud, const std::string& path,
                std::span<const std::string> comments = {});

}  // namespace shapeopt::mesh
