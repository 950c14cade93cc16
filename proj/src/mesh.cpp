#include "shapeopt/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <utility>

namespace shapeopt::mesh {

namespace {
std::atomic<std::uint64_t> g_snapshot_counter{1};
}

TriMesh::TriMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : verts_(std::move(vertices)), faces_(std::move(faces)) {
    const int n = n_vertices();
    const int m = n_faces();
    if (n == 0) throw TopologyError("mesh has no vertices");
    if (m == 0) throw TopologyError("mesh has no faces");

    Vec3 lo{verts_[0]}, hi{verts_[0]};
    for (const Vec3& p : verts_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw DomainError("non-finite vertex position");
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y), std::min(lo.z, p.z)};
        hi = {std::max(hi.x, p.x), std::max(hi.y, p.y), std::max(hi.z, p.z)};
    }
    bbox_diag_ = (hi - lo).norm();

    for (const Face& f : faces_) {
        for (int k = 0; k < 3; ++k)
            if (f[k] < 0 || f[k] >= n) throw TopologyError("face index out of range");
        if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2])
            throw TopologyError("degenerate face: repeated vertex index");
    }

    // Directed edges: a repeat means either a non-manifold fan or two faces
    // traversing an edge the same way (orientation flip).
    std::vector<std::int64_t> directed;
    directed.reserve(static_cast<std::size_t>(3 * m));
    for (const Face& f : faces_)
        for (int k = 0; k < 3; ++k)
            directed.push_back(static_cast<std::int64_t>(f[k]) * n + f[(k + 1) % 3]);
    std::sort(directed.begin(), directed.end());
    for (std::size_t i = 1; i < directed.size(); ++i)
        if (directed[i] == directed[i - 1])
            throw TopologyError("edge traversed twice in the same direction "
                                "(non-manifold or inconsistently oriented)");

    std::vector<std::int64_t> undirected;
    undirected.reserve(directed.size());
    for (const Face& f : faces_)
        for (int k = 0; k < 3; ++k) {
            const std::int64_t a = std::min(f[k], f[(k + 1) % 3]);
            const std::int64_t b = std::max(f[k], f[(k + 1) % 3]);
            undirected.push_back(a * n + b);
        }
    std::sort(undirected.begin(), undirected.end());
    for (std::size_t i = 0; i < undirected.size();) {
        std::size_t j = i;
        while (j < undirected.size() && undirected[j] == undirected[i]) ++j;
        if (j - i > 2) throw TopologyError("non-manifold edge (more than two incident faces)");
        if (j - i == 1) has_boundary_ = true;
        i = j;
    }

    vf_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (const Face& f : faces_)
        for (int k = 0; k < 3; ++k) vf_ptr_[static_cast<std::size_t>(f[k]) + 1]++;
    for (int i = 0; i < n; ++i) vf_ptr_[i + 1] += vf_ptr_[i];
    vf_ind_.assign(static_cast<std::size_t>(3 * m), 0);
    std::vector<int> next(vf_ptr_.begin(), vf_ptr_.end() - 1);
    for (int fidx = 0; fidx < m; ++fidx)
        for (int k = 0; k < 3; ++k) vf_ind_[next[faces_[fidx][k]]++] = fidx;

    for (int i = 0; i < n; ++i)
        if (vf_ptr_[i] == vf_ptr_[i + 1])
            throw TopologyError("isolated vertex (no incident face)");

    snapshot_ = g_snapshot_counter.fetch_add(1);
}

std::span<const int> TriMesh::vertex_faces(int i) const {
    return std::span<const int>(vf_ind_).subspan(static_cast<std::size_t>(vf_ptr_[i]),
                                                 static_cast<std::size_t>(vf_ptr_[i + 1] - vf_ptr_[i]));
}

FaceGeometry face_geometry(const TriMesh& mesh) {
    const int m = mesh.n_faces();
    const auto& X = mesh.vertices();
    const auto& F = mesh.faces();
    FaceGeometry g;
    g.snapshot = mesh.snapshot();
    g.area.resize(static_cast<std::size_t>(m));
    g.normal.resize(static_cast<std::size_t>(m));
    g.centroid.resize(static_cast<std::size_t>(m));
    const double eps = 1e-12 * sqr(mesh.bbox_diag());

#pragma omp parallel for schedule(static)
    for (int f = 0; f < m; ++f) {
        const Vec3& a = X[F[f][0]];
        const Vec3& b = X[F[f][1]];
        const Vec3& c = X[F[f][2]];
        const Vec3 cr = (b - a).cross(c - a);
        const double two_area = cr.norm();
        g.area[f] = 0.5 * two_area;
        g.centroid[f] = (a + b + c) / 3.0;
        g.normal[f] = two_area > 0.0 ? cr / two_area : Vec3{0.0, 0.0, 0.0};
    }
    double total = 0.0;
    for (int f = 0; f < m; ++f) {
        if (!(g.area[f] > eps))
            throw DegenerateFaceError("face " + std::to_string(f) + " area below epsilon");
        total += g.area[f];
    }
    g.total_area = total;
    return g;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh, const FaceGeometry& geom) {
    if (geom.snapshot != mesh.snapshot())
        throw ShapeMismatchError("face geometry belongs to a different mesh snapshot");
    const int n = mesh.n_vertices();
    std::vector<Vec3> nrm(static_cast<std::size_t>(n));
    std::vector<signed char> bad(static_cast<std::size_t>(n), 0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        Vec3 s{};
        for (int f : mesh.vertex_faces(i)) s += geom.area[f] * geom.normal[f];
        const double len = s.norm();
        if (len > 0.0)
            nrm[i] = s / len;
        else
            bad[i] = 1;
    }
    for (int i = 0; i < n; ++i)
        if (bad[i])
            throw ZeroVectorError("vertex " + std::to_string(i) +
                                  ": incident face normals cancel, vertex normal undefined");
    return nrm;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
    return vertex_normals(mesh, face_geometry(mesh));
}

TriMesh displace_along_normals(const TriMesh& mesh, std::span<const double> v,
                               std::span<const Vec3> normals) {
    const int n = mesh.n_vertices();
    if (static_cast<int>(v.size()) != n || static_cast<int>(normals.size()) != n)
        throw ShapeMismatchError("displacement field size does not match mesh");
    std::vector<Vec3> out(static_cast<std::size_t>(n));
    const auto& X = mesh.vertices();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) out[i] = X[i] + v[i] * normals[i];
    return TriMesh(std::move(out), mesh.faces());
}

double angle_defect_total(const TriMesh& mesh) {
    if (mesh.has_boundary()) throw BoundaryError("angle defect needs a closed mesh");
    const int n = mesh.n_vertices();
    const auto& X = mesh.vertices();
    const auto& F = mesh.faces();
    std::vector<double> defect(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        double angles = 0.0;
        for (int f : mesh.vertex_faces(i)) {
            int k = 0;
            while (F[f][k] != i) ++k;
            const Vec3 u = X[F[f][(k + 1) % 3]] - X[i];
            const Vec3 w = X[F[f][(k + 2) % 3]] - X[i];
            angles += std::atan2(u.cross(w).norm(), u.dot(w));
        }
        defect[i] = 2.0 * kPi - angles;
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += defect[i];
    return total;
}

double enclosed_volume(const TriMesh& mesh) {
    if (mesh.has_boundary()) throw BoundaryError("enclosed volume needs a closed mesh");
    const int m = mesh.n_faces();
    const auto& X = mesh.vertices();
    const auto& F = mesh.faces();
    std::vector<double> vol(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
    for (int f = 0; f < m; ++f)
        vol[f] = X[F[f][0]].dot(X[F[f][1]].cross(X[F[f][2]])) / 6.0;
    double total = 0.0;
    for (int f = 0; f < m; ++f) total += vol[f];
    return total;
}

// ---------------------------------------------------------------------------
// Quality
// ---------------------------------------------------------------------------

QualityReport mesh_quality(const TriMesh& mesh, bool check_intersections) {
    const int m = mesh.n_faces();
    const auto& X = mesh.vertices();
    const auto& F = mesh.faces();
    std::vector<double> face_min_angle(static_cast<std::size_t>(m));
    std::vector<double> face_aspect(static_cast<std::size_t>(m));
#pragma omp parallel for schedule(static)
    for (int f = 0; f < m; ++f) {
        const Vec3& a = X[F[f][0]];
        const Vec3& b = X[F[f][1]];
        const Vec3& c = X[F[f][2]];
        double min_angle = std::numeric_limits<double>::infinity();
        for (int k = 0; k < 3; ++k) {
            const Vec3& p = k == 0 ? a : (k == 1 ? b : c);
            const Vec3& q = k == 0 ? b : (k == 1 ? c : a);
            const Vec3& r = k == 0 ? c : (k == 1 ? a : b);
            const Vec3 u = q - p, w = r - p;
            min_angle = std::min(min_angle, std::atan2(u.cross(w).norm(), u.dot(w)));
        }
        face_min_angle[f] = min_angle;
        const double e0 = (b - a).norm(), e1 = (c - b).norm(), e2 = (a - c).norm();
        const double longest = std::max({e0, e1, e2});
        const double two_area = (b - a).cross(c - a).norm();
        // shortest altitude = 2*area / longest edge
        face_aspect[f] = two_area > 0.0 ? longest * longest / two_area
                                        : std::numeric_limits<double>::infinity();
    }
    QualityReport rep;
    rep.min_angle = std::numeric_limits<double>::infinity();
    rep.max_aspect = 0.0;
    for (int f = 0; f < m; ++f) {
        rep.min_angle = std::min(rep.min_angle, face_min_angle[f]);
        rep.max_aspect = std::max(rep.max_aspect, face_aspect[f]);
    }
    rep.self_intersection_count = check_intersections ? count_self_intersections(mesh) : 0;
    return rep;
}

namespace {

// signed distances to a unit-normal plane, clamped to 0 within eps
int sign_of(double d, double eps) { return d > eps ? 1 : (d < -eps ? -1 : 0); }

// Collect the parameter interval (along a projection axis) of a triangle's
// intersection with the plane of the other triangle.
bool plane_interval(const double p[3], const double d[3], const int s[3], double& t0, double& t1) {
    double ts[4];
    int cnt = 0;
    for (int k = 0; k < 3; ++k)
        if (s[k] == 0) ts[cnt++] = p[k];
    for (int k = 0; k < 3; ++k) {
        const int j = (k + 1) % 3;
        if (s[k] * s[j] < 0) ts[cnt++] = p[k] + (p[j] - p[k]) * d[k] / (d[k] - d[j]);
    }
    if (cnt == 0) return false;
    t0 = *std::min_element(ts, ts + cnt);
    t1 = *std::max_element(ts, ts + cnt);
    return true;
}

double orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

bool segments_cross(const double* a, const double* b, const double* c, const double* d,
                    double eps) {
    const double d1 = orient2d(c[0], c[1], d[0], d[1], a[0], a[1]);
    const double d2 = orient2d(c[0], c[1], d[0], d[1], b[0], b[1]);
    const double d3 = orient2d(a[0], a[1], b[0], b[1], c[0], c[1]);
    const double d4 = orient2d(a[0], a[1], b[0], b[1], d[0], d[1]);
    return ((d1 > eps && d2 < -eps) || (d1 < -eps && d2 > eps)) &&
           ((d3 > eps && d4 < -eps) || (d3 < -eps && d4 > eps));
}

bool point_strictly_inside(const double* p, const double t[3][2], double eps) {
    const double d0 = orient2d(t[0][0], t[0][1], t[1][0], t[1][1], p[0], p[1]);
    const double d1 = orient2d(t[1][0], t[1][1], t[2][0], t[2][1], p[0], p[1]);
    const double d2 = orient2d(t[2][0], t[2][1], t[0][0], t[0][1], p[0], p[1]);
    return (d0 > eps && d1 > eps && d2 > eps) || (d0 < -eps && d1 < -eps && d2 < -eps);
}

bool coplanar_overlap(const Vec3 A[3], const Vec3 B[3], const Vec3& n, double eps) {
    // drop the dominant normal axis
    const double ax = std::fabs(n.x), ay = std::fabs(n.y), az = std::fabs(n.z);
    int i0 = 0, i1 = 1;
    if (ax >= ay && ax >= az) {
        i0 = 1;
        i1 = 2;
    } else if (ay >= az) {
        i0 = 0;
        i1 = 2;
    }
    auto comp = [](const Vec3& v, int i) { return i == 0 ? v.x : (i == 1 ? v.y : v.z); };
    double a2[3][2], b2[3][2];
    for (int k = 0; k < 3; ++k) {
        a2[k][0] = comp(A[k], i0);
        a2[k][1] = comp(A[k], i1);
        b2[k][0] = comp(B[k], i0);
        b2[k][1] = comp(B[k], i1);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (segments_cross(a2[i], a2[(i + 1) % 3], b2[j], b2[(j + 1) % 3], eps)) return true;
    for (int k = 0; k < 3; ++k) {
        if (point_strictly_inside(a2[k], b2, eps)) return true;
        if (point_strictly_inside(b2[k], a2, eps)) return true;
    }
    return false;
}

}  // namespace

bool triangles_intersect(const Vec3& a0, const Vec3& a1, const Vec3& a2, const Vec3& b0,
                         const Vec3& b1, const Vec3& b2, double eps) {
    const Vec3 A[3] = {a0, a1, a2};
    const Vec3 B[3] = {b0, b1, b2};

    Vec3 nb = (b1 - b0).cross(b2 - b0);
    double lb = nb.norm();
    if (lb == 0.0) return false;
    nb = nb / lb;
    const double da[3] = {nb.dot(a0 - b0), nb.dot(a1 - b0), nb.dot(a2 - b0)};
    const int sa[3] = {sign_of(da[0], eps), sign_of(da[1], eps), sign_of(da[2], eps)};
    if (sa[0] > 0 && sa[1] > 0 && sa[2] > 0) return false;
    if (sa[0] < 0 && sa[1] < 0 && sa[2] < 0) return false;

    Vec3 na = (a1 - a0).cross(a2 - a0);
    double la = na.norm();
    if (la == 0.0) return false;
    na = na / la;
    const double db[3] = {na.dot(b0 - a0), na.dot(b1 - a0), na.dot(b2 - a0)};
    const int sb[3] = {sign_of(db[0], eps), sign_of(db[1], eps), sign_of(db[2], eps)};
    if (sb[0] > 0 && sb[1] > 0 && sb[2] > 0) return false;
    if (sb[0] < 0 && sb[1] < 0 && sb[2] < 0) return false;

    if (sa[0] == 0 && sa[1] == 0 && sa[2] == 0) return coplanar_overlap(A, B, nb, eps);

    const Vec3 dir = na.cross(nb);
    const double dx = std::fabs(dir.x), dy = std::fabs(dir.y), dz = std::fabs(dir.z);
    int axis = 0;
    if (dy >= dx && dy >= dz)
        axis = 1;
    else if (dz >= dx && dz >= dy)
        axis = 2;
    auto comp = [axis](const Vec3& v) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); };
    const double pa[3] = {comp(a0), comp(a1), comp(a2)};
    const double pb[3] = {comp(b0), comp(b1), comp(b2)};

    double t0a, t1a, t0b, t1b;
    if (!plane_interval(pa, da, sa, t0a, t1a)) return false;
    if (!plane_interval(pb, db, sb, t0b, t1b)) return false;
    return std::min(t1a, t1b) - std::max(t0a, t0b) > eps;
}

int count_self_intersections(const TriMesh& mesh) {
    const int m = mesh.n_faces();
    const auto& X = mesh.vertices();
    const auto& F = mesh.faces();

    std::vector<Vec3> lo(static_cast<std::size_t>(m)), hi(static_cast<std::size_t>(m));
    double mean_extent = 0.0;
    Vec3 glo = X[F[0][0]], ghi = glo;
    for (int f = 0; f < m; ++f) {
        const Vec3& a = X[F[f][0]];
        const Vec3& b = X[F[f][1]];
        const Vec3& c = X[F[f][2]];
        lo[f] = {std::min({a.x, b.x, c.x}), std::min({a.y, b.y, c.y}), std::min({a.z, b.z, c.z})};
        hi[f] = {std::max({a.x, b.x, c.x}), std::max({a.y, b.y, c.y}), std::max({a.z, b.z, c.z})};
        mean_extent += std::max({hi[f].x - lo[f].x, hi[f].y - lo[f].y, hi[f].z - lo[f].z});
        glo = {std::min(glo.x, lo[f].x), std::min(glo.y, lo[f].y), std::min(glo.z, lo[f].z)};
        ghi = {std::max(ghi.x, hi[f].x), std::max(ghi.y, hi[f].y), std::max(ghi.z, hi[f].z)};
    }
    mean_extent /= m;
    double h = mean_extent > 0.0 ? 2.0 * mean_extent : 1.0;
    const Vec3 span = ghi - glo;
    auto dims = [&](double cell) {
        const int nx = std::max(1, std::min(256, static_cast<int>(span.x / cell) + 1));
        const int ny = std::max(1, std::min(256, static_cast<int>(span.y / cell) + 1));
        const int nz = std::max(1, std::min(256, static_cast<int>(span.z / cell) + 1));
        return std::array<int, 3>{nx, ny, nz};
    };
    auto d3 = dims(h);
    while (static_cast<long long>(d3[0]) * d3[1] * d3[2] > (1 << 22)) {
        h *= 2.0;
        d3 = dims(h);
    }
    const int nx = d3[0], ny = d3[1], nz = d3[2];
    const int ncells = nx * ny * nz;
    auto cell_of = [&](double v, double lo_, int nd) {
        int c = static_cast<int>((v - lo_) / h);
        return std::clamp(c, 0, nd - 1);
    };

    // bucket faces into all cells their AABB touches
    std::vector<int> count(static_cast<std::size_t>(ncells) + 1, 0);
    auto cell_range = [&](int f, int r[6]) {
        r[0] = cell_of(lo[f].x, glo.x, nx);
        r[1] = cell_of(hi[f].x, glo.x, nx);
        r[2] = cell_of(lo[f].y, glo.y, ny);
        r[3] = cell_of(hi[f].y, glo.y, ny);
        r[4] = cell_of(lo[f].z, glo.z, nz);
        r[5] = cell_of(hi[f].z, glo.z, nz);
    };
    for (int f = 0; f < m; ++f) {
        int r[6];
        cell_range(f, r);
        for (int iz = r[4]; iz <= r[5]; ++iz)
            for (int iy = r[2]; iy <= r[3]; ++iy)
                for (int ix = r[0]; ix <= r[1]; ++ix)
                    count[(static_cast<std::size_t>(iz) * ny + iy) * nx + ix + 1]++;
    }
    for (int c = 0; c < ncells; ++c) count[c + 1] += count[c];
    std::vector<int> bucket(static_cast<std::size_t>(count[ncells]));
    std::vector<int> next(count.begin(), count.end() - 1);
    for (int f = 0; f < m; ++f) {
        int r[6];
        cell_range(f, r);
        for (int iz = r[4]; iz <= r[5]; ++iz)
            for (int iy = r[2]; iy <= r[3]; ++iy)
                for (int ix = r[0]; ix <= r[1]; ++ix)
                    bucket[next[(static_cast<std::size_t>(iz) * ny + iy) * nx + ix]++] = f;
    }

    auto share_vertex = [&](int fa, int fb) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (F[fa][i] == F[fb][j]) return true;
        return false;
    };

    std::vector<std::int64_t> pairs;
    for (int c = 0; c < ncells; ++c) {
        for (int i = count[c]; i < count[c + 1]; ++i)
            for (int j = i + 1; j < count[c + 1]; ++j) {
                const int fa = std::min(bucket[i], bucket[j]);
                const int fb = std::max(bucket[i], bucket[j]);
                if (share_vertex(fa, fb)) continue;
                // AABB precheck before recording the candidate
                if (lo[fa].x > hi[fb].x || lo[fb].x > hi[fa].x || lo[fa].y > hi[fb].y ||
                    lo[fb].y > hi[fa].y || lo[fa].z > hi[fb].z || lo[fb].z > hi[fa].z)
                    continue;
                pairs.push_back(static_cast<std::int64_t>(fa) * m + fb);
            }
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    const int np = static_cast<int>(pairs.size());
    std::vector<signed char> isect(static_cast<std::size_t>(np), 0);
#pragma omp parallel for schedule(static)
    for (int k = 0; k < np; ++k) {
        const int fa = static_cast<int>(pairs[k] / m);
        const int fb = static_cast<int>(pairs[k] % m);
        isect[k] = triangles_intersect(X[F[fa][0]], X[F[fa][1]], X[F[fa][2]], X[F[fb][0]],
                                       X[F[fb][1]], X[F[fb][2]])
                       ? 1
                       : 0;
    }
    int total = 0;
    for (int k = 0; k < np; ++k) total += isect[k];
    return total;
}

}  // namespace shapeopt::mesh
