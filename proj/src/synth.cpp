#include "shapeopt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

namespace shapeopt::synth {

using mesh::CloudData;
using mesh::Face;
using mesh::TriMesh;

TriMesh icosphere(int subdiv, double radius, const Vec3& center) {
    if (subdiv < 0) throw DomainError("subdiv must be nonnegative");
    if (subdiv > 8) throw DomainError("subdiv capped at 8");
    if (!(radius > 0.0)) throw DomainError("radius must be positive");

    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> vs = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                            {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                            {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
    std::vector<Face> fs = {{{0, 11, 5}}, {{0, 5, 1}},  {{0, 1, 7}},   {{0, 7, 10}}, {{0, 10, 11}},
                            {{1, 5, 9}},  {{5, 11, 4}}, {{11, 10, 2}}, {{10, 7, 6}}, {{7, 1, 8}},
                            {{3, 9, 4}},  {{3, 4, 2}},  {{3, 2, 6}},   {{3, 6, 8}},  {{3, 8, 9}},
                            {{4, 9, 5}},  {{2, 4, 11}}, {{6, 2, 10}},  {{8, 6, 7}},  {{9, 8, 1}}};
    for (auto& v : vs) v = v.normalized();

    for (int s = 0; s < subdiv; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(vs.size());
            vs.push_back(((vs[static_cast<std::size_t>(a)] + vs[static_cast<std::size_t>(b)]) / 2.0)
                             .normalized());
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<Face> next;
        next.reserve(4 * fs.size());
        for (const auto& f : fs) {
            const int m01 = mid(f[0], f[1]);
            const int m12 = mid(f[1], f[2]);
            const int m02 = mid(f[0], f[2]);
            next.push_back({{f[0], m01, m02}});
            next.push_back({{f[1], m12, m01}});
            next.push_back({{f[2], m02, m12}});
            next.push_back({{m01, m12, m02}});
        }
        fs = std::move(next);
    }

    for (auto& v : vs) v = center + v * radius;
    return TriMesh(std::move(vs), std::move(fs));
}

TriMesh cube(int res, double side, const Vec3& center) {
    if (res < 1) throw DomainError("res must be at least 1");
    if (!(side > 0.0)) throw DomainError("side must be positive");

    const int np = res + 1;
    std::map<int, int> weld;  // packed lattice point -> vertex index
    std::vector<Vec3> vs;
    std::vector<Face> fs;
    const double half = side / 2.0;

    auto vertex_at = [&](int p[3]) {
        const int key = (p[0] * np + p[1]) * np + p[2];
        auto it = weld.find(key);
        if (it != weld.end()) return it->second;
        const int idx = static_cast<int>(vs.size());
        vs.push_back({center.x - half + side * p[0] / res, center.y - half + side * p[1] / res,
                      center.z - half + side * p[2] / res});
        weld.emplace(key, idx);
        return idx;
    };

    for (int axis = 0; axis < 3; ++axis)
        for (int sign = 0; sign < 2; ++sign) {
            const int u = (axis + 1) % 3;
            const int w = (axis + 2) % 3;
            for (int i = 0; i < res; ++i)
                for (int j = 0; j < res; ++j) {
                    int q[4][3];
                    const int di[4] = {0, 1, 1, 0};
                    const int dj[4] = {0, 0, 1, 1};
                    for (int k = 0; k < 4; ++k) {
                        q[k][axis] = sign ? res : 0;
                        q[k][u] = i + di[k];
                        q[k][w] = j + dj[k];
                    }
                    // (q0,q1,q2,q3) winds with normal +axis; flip for the low face
                    int a = vertex_at(q[0]), b = vertex_at(q[1]), c = vertex_at(q[2]),
                        d = vertex_at(q[3]);
                    if (!sign) std::swap(b, d);
                    fs.push_back({{a, b, c}});
                    fs.push_back({{a, c, d}});
                }
        }
    return TriMesh(std::move(vs), std::move(fs));
}

TriMesh cutbox(double side, const Vec3& center) {
    if (!(side > 0.0)) throw DomainError("side must be positive");
    const double h = side / 2.0;
    std::vector<Vec3> vs = {{-h, -h, -h}, {h, -h, -h}, {h, h, -h}, {-h, h, -h}, {-h, -h, h},
                            {h, -h, h},   {-h, h, h},  {0, h, h},  {h, 0, h},   {h, h, 0}};
    for (auto& v : vs) v += center;
    std::vector<Face> fs = {
        {{0, 3, 2}}, {{0, 2, 1}},                // bottom
        {{4, 5, 8}}, {{4, 8, 7}}, {{4, 7, 6}},   // top pentagon
        {{0, 1, 5}}, {{0, 5, 4}},                // y = -h
        {{0, 4, 6}}, {{0, 6, 3}},                // x = -h
        {{3, 6, 7}}, {{3, 7, 9}}, {{3, 9, 2}},   // y = +h pentagon
        {{1, 2, 9}}, {{1, 9, 8}}, {{1, 8, 5}},   // x = +h pentagon
        {{7, 8, 9}},                             // cut corner
    };
    return TriMesh(std::move(vs), std::move(fs));
}

TriMesh strip(int nx, int ny, double sx, double sy) {
    if (nx < 1 || ny < 1) throw DomainError("grid must have at least one cell per side");
    if (!(sx > 0.0) || !(sy > 0.0)) throw DomainError("extent must be positive");
    std::vector<Vec3> vs;
    vs.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int i = 0; i <= nx; ++i)
        for (int j = 0; j <= ny; ++j) vs.push_back({sx * i / nx, sy * j / ny, 0.0});
    auto at = [&](int i, int j) { return i * (ny + 1) + j; };
    std::vector<Face> fs;
    fs.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j) {
            fs.push_back({{at(i, j), at(i + 1, j), at(i + 1, j + 1)}});
            fs.push_back({{at(i, j), at(i + 1, j + 1), at(i, j + 1)}});
        }
    return TriMesh(std::move(vs), std::move(fs));
}

TriMesh torus(int nu, int nv, double big_radius, double small_radius) {
    if (nu < 3 || nv < 3) throw DomainError("torus needs at least 3 segments per loop");
    if (!(big_radius > small_radius) || !(small_radius > 0.0))
        throw DomainError("torus radii must satisfy R > r > 0");
    std::vector<Vec3> vs;
    vs.reserve(static_cast<std::size_t>(nu * nv));
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            const double th = 2.0 * kPi * i / nu;
            const double ps = 2.0 * kPi * j / nv;
            const double ring = big_radius + small_radius * std::cos(ps);
            vs.push_back({ring * std::cos(th), ring * std::sin(th), small_radius * std::sin(ps)});
        }
    auto at = [&](int i, int j) { return (i % nu) * nv + (j % nv); };
    std::vector<Face> fs;
    fs.reserve(static_cast<std::size_t>(2 * nu * nv));
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            fs.push_back({{at(i, j), at(i + 1, j), at(i + 1, j + 1)}});
            fs.push_back({{at(i, j), at(i + 1, j + 1), at(i, j + 1)}});
        }
    return TriMesh(std::move(vs), std::move(fs));
}

std::vector<double> strip_step_field(const TriMesh& m, double split_x, double lo, double hi) {
    std::vector<double> u(static_cast<std::size_t>(m.n_vertices()));
    for (int i = 0; i < m.n_vertices(); ++i)
        u[static_cast<std::size_t>(i)] = m.vertices()[static_cast<std::size_t>(i)].x < split_x ? lo : hi;
    return u;
}

NoisyCube noisy_cube(int res, double side, double normal_sigma, double vertex_sigma,
                     std::uint64_t seed) {
    if (normal_sigma < 0.0 || vertex_sigma < 0.0) throw DomainError("sigma must be nonnegative");
    TriMesh clean = cube(res, side);
    const auto geom = mesh::face_geometry(clean);

    Rng rng(seed);
    std::vector<Vec3> target = geom.normal;
    if (normal_sigma > 0.0)
        for (auto& nrm : target) nrm = (nrm + rng.normal3() * normal_sigma).normalized();

    if (vertex_sigma > 0.0) {
        // displacement acts along the clean vertex normal; tangential noise
        // would create sliver faces and offsets unreachable by normal motion
        const auto vn = mesh::vertex_normals(clean);
        std::vector<Vec3> vs = clean.vertices();
        for (std::size_t i = 0; i < vs.size(); ++i) vs[i] += vn[i] * (rng.normal() * vertex_sigma);
        return {TriMesh(std::move(vs), clean.faces()), std::move(target)};
    }
    return {std::move(clean), std::move(target)};
}

CloudData sample_surface(const TriMesh& m, int n, std::uint64_t seed) {
    if (n < 1) throw DomainError("need at least one sample");
    const auto geom = mesh::face_geometry(m);

    std::vector<double> cdf(geom.area.size());
    double acc = 0.0;
    for (std::size_t f = 0; f < geom.area.size(); ++f) {
        acc += geom.area[f];
        cdf[f] = acc;
    }

    Rng rng(seed);
    CloudData cloud;
    cloud.points.reserve(static_cast<std::size_t>(n));
    cloud.normals.reserve(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        const double pick = rng.uniform() * acc;
        const std::size_t f = static_cast<std::size_t>(
            std::upper_bound(cdf.begin(), cdf.end(), pick) - cdf.begin());
        const auto& fc = m.faces()[std::min(f, cdf.size() - 1)];
        const Vec3& a = m.vertices()[static_cast<std::size_t>(fc[0])];
        const Vec3& b = m.vertices()[static_cast<std::size_t>(fc[1])];
        const Vec3& c = m.vertices()[static_cast<std::size_t>(fc[2])];
        double r1 = rng.uniform();
        double r2 = rng.uniform();
        if (r1 + r2 > 1.0) {
            r1 = 1.0 - r1;
            r2 = 1.0 - r2;
        }
        cloud.points.push_back(a + (b - a) * r1 + (c - a) * r2);
        cloud.normals.push_back(geom.normal[std::min(f, cdf.size() - 1)]);
    }
    return cloud;
}

CloudData cutbox_cloud(int n, double side, std::uint64_t seed) {
    return sample_surface(cutbox(side), n, seed);
}

CloudData sphere_cloud(int n, double radius, const Vec3& center, std::uint64_t seed) {
    if (n < 1) throw DomainError("need at least one sample");
    if (!(radius > 0.0)) throw DomainError("radius must be positive");
    Rng rng(seed);
    CloudData cloud;
    cloud.points.reserve(static_cast<std::size_t>(n));
    cloud.normals.reserve(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
        Vec3 dir = rng.normal3();
        while (dir.norm() < 1e-12) dir = rng.normal3();
        dir = dir.normalized();
        cloud.points.push_back(center + dir * radius);
        cloud.normals.push_back(dir);
    }
    return cloud;
}

std::vector<double> add_field_noise(std::span<const double> field, double sigma,
                                    std::uint64_t seed) {
    if (sigma < 0.0) throw DomainError("sigma must be nonnegative");
    Rng rng(seed);
    std::vector<double> out(field.begin(), field.end());
    for (auto& v : out) v += sigma * rng.normal();
    return out;
}

std::vector<Vec3> add_normal_noise(std::span<const Vec3> normals, double sigma,
                                   std::uint64_t seed) {
    if (sigma < 0.0) throw DomainError("sigma must be nonnegative");
    Rng rng(seed);
    std::vector<Vec3> out(normals.begin(), normals.end());
    for (auto& nrm : out) nrm = (nrm + rng.normal3() * sigma).normalized();
    return out;
}

}  // namespace shapeopt::synth
