#include "shapeopt/energies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace shapeopt::energies {

admm::StackedSystem ResidualSystem::stacked() const {
    admm::StackedSystem s;
    s.cols = n;
    for (const SparseMatrix& b : blocks) s.blocks.push_back({&b, 1.0});
    return s;
}

void ResidualSystem::append(ResidualSystem other) {
    if (other.snapshot != snapshot || other.n != n)
        throw ShapeMismatchError("cannot append residual system from a different snapshot");
    for (SparseMatrix& b : other.blocks) blocks.push_back(std::move(b));
    rhs.insert(rhs.end(), other.rhs.begin(), other.rhs.end());
}

// ---------------------------------------------------------------------------
// PointCloud
// ---------------------------------------------------------------------------

namespace {
double comp(const Vec3& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }
}  // namespace

PointCloud::PointCloud(std::vector<Vec3> points, std::vector<Vec3> normals)
    : pts_(std::move(points)), normals_(std::move(normals)) {
    if (pts_.empty()) throw EmptyCloudError("point cloud has no points");
    if (!normals_.empty()) {
        if (normals_.size() != pts_.size())
            throw ShapeMismatchError("cloud normal count does not match point count");
        for (const Vec3& nv : normals_)
            if (std::fabs(nv.norm() - 1.0) > 1e-6)
                throw DomainError("cloud normals must be unit length");
    }
    for (const Vec3& p : pts_)
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw DomainError("non-finite cloud point");
    std::vector<int> idx(pts_.size());
    std::iota(idx.begin(), idx.end(), 0);
    nodes_.reserve(pts_.size());
    root_ = build(idx, 0, static_cast<int>(pts_.size()));
}

int PointCloud::build(std::vector<int>& idx, int lo, int hi) {
    if (lo >= hi) return -1;
    Vec3 mn = pts_[idx[lo]], mx = mn;
    for (int i = lo; i < hi; ++i) {
        const Vec3& p = pts_[idx[i]];
        mn = {std::min(mn.x, p.x), std::min(mn.y, p.y), std::min(mn.z, p.z)};
        mx = {std::max(mx.x, p.x), std::max(mx.y, p.y), std::max(mx.z, p.z)};
    }
    const Vec3 ext = mx - mn;
    int axis = 0;
    if (ext.y >= ext.x && ext.y >= ext.z)
        axis = 1;
    else if (ext.z >= ext.x && ext.z >= ext.y)
        axis = 2;
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + lo, idx.begin() + mid, idx.begin() + hi, [&](int a, int b) {
        const double va = comp(pts_[a], axis), vb = comp(pts_[b], axis);
        if (va != vb) return va < vb;
        return a < b;
    });
    Node nd;
    nd.point = idx[mid];
    nd.axis = axis;
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(nd);
    const int l = build(idx, lo, mid);
    const int r = build(idx, mid + 1, hi);
    nodes_[self].left = l;
    nodes_[self].right = r;
    return self;
}

namespace {
struct NnState {
    int best = -1;
    double bd = std::numeric_limits<double>::infinity();
};
}  // namespace

int PointCloud::nearest(const Vec3& q) const {
    NnState st;
    // explicit stack; tree depth is O(log n) but allow slack
    int stack[128];
    int top = 0;
    stack[top++] = root_;
    // depth-first with pruning; ties go to the smaller point index
    while (top > 0) {
        const int ni = stack[--top];
        if (ni < 0) continue;
        const Node& nd = nodes_[static_cast<std::size_t>(ni)];
        const double d2 = (pts_[nd.point] - q).norm2();
        if (d2 < st.bd || (d2 == st.bd && nd.point < st.best)) {
            st.bd = d2;
            st.best = nd.point;
        }
        const double delta = comp(q, nd.axis) - comp(pts_[nd.point], nd.axis);
        const int near = delta < 0.0 ? nd.left : nd.right;
        const int far = delta < 0.0 ? nd.right : nd.left;
        if (far >= 0 && delta * delta <= st.bd && top < 127) stack[top++] = far;
        if (near >= 0 && top < 127) stack[top++] = near;
    }
    return st.best;
}

// ---------------------------------------------------------------------------
// Assemblers
// ---------------------------------------------------------------------------

namespace {

void check_snapshot(const mesh::TriMesh& m, const fem::FemOperators& ops) {
    if (ops.snapshot != m.snapshot())
        throw ShapeMismatchError("operators belong to a different mesh snapshot");
}

void check_unit(std::span<const Vec3> field, const char* what) {
    for (const Vec3& v : field)
        if (std::fabs(v.norm() - 1.0) > 1e-6) throw DomainError(std::string(what) + " must be unit length");
}

}  // namespace

ResidualSystem assemble_normal_residual(const mesh::TriMesh& m, const fem::FemOperators& ops,
                                        std::span<const Vec3> target, double weight) {
    check_snapshot(m, ops);
    if (static_cast<int>(target.size()) != m.n_faces())
        throw ShapeMismatchError("target normal field size does not match face count");
    if (weight <= 0.0) throw DomainError("normal residual weight must be > 0");
    check_unit(target, "target normals");

    const int nf = m.n_faces();
    const double sw = std::sqrt(weight);

    ResidualSystem sys;
    sys.snapshot = m.snapshot();
    sys.n = m.n_vertices();

    std::vector<double> rowscale(static_cast<std::size_t>(3 * nf));
    sys.rhs.resize(static_cast<std::size_t>(3 * nf));
    for (int f = 0; f < nf; ++f) {
        const double s = sw * std::sqrt(ops.w_face[f]);
        rowscale[3 * f] = rowscale[3 * f + 1] = rowscale[3 * f + 2] = -s;
        const Vec3 r = ops.face_normal[f] - target[f];
        sys.rhs[3 * f] = -s * r.x;
        sys.rhs[3 * f + 1] = -s * r.y;
        sys.rhs[3 * f + 2] = -s * r.z;
    }
    sys.blocks.push_back(ops.grad.row_scaled(rowscale));
    return sys;
}

ResidualSystem assemble_point_residual(const mesh::TriMesh& m, const fem::FemOperators& ops,
                                       const PointCloud& cloud, double normal_weight) {
    check_snapshot(m, ops);
    if (normal_weight < 0.0) throw DomainError("normal_weight must be >= 0");
    if (normal_weight > 0.0 && !cloud.oriented())
        throw UnorientedCloudError("screened point energy needs cloud normals");

    const int n = m.n_vertices();
    const auto& X = m.vertices();
    const std::vector<Vec3> vn = mesh::vertex_normals(m);

    ResidualSystem sys;
    sys.snapshot = m.snapshot();
    sys.n = n;
    sys.rhs.resize(static_cast<std::size_t>(3 * n));

    std::vector<Triplet> ts(static_cast<std::size_t>(3 * n));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        const Vec3 xhat = cloud.points()[cloud.nearest(X[i])];
        const Vec3 r = X[i] - xhat;
        const double s = std::sqrt(ops.w_vertex[i]);
        ts[3 * i] = {3 * i, i, s * vn[i].x};
        ts[3 * i + 1] = {3 * i + 1, i, s * vn[i].y};
        ts[3 * i + 2] = {3 * i + 2, i, s * vn[i].z};
        sys.rhs[3 * i] = -s * r.x;
        sys.rhs[3 * i + 1] = -s * r.y;
        sys.rhs[3 * i + 2] = -s * r.z;
    }
    sys.blocks.push_back(SparseMatrix::from_triplets(3 * n, n, std::move(ts)));

    if (normal_weight > 0.0) {
        const int nf = m.n_faces();
        const auto& F = m.faces();
        std::vector<Vec3> target(static_cast<std::size_t>(nf));
#pragma omp parallel for schedule(static)
        for (int f = 0; f < nf; ++f) {
            const Vec3 c = (X[F[f][0]] + X[F[f][1]] + X[F[f][2]]) / 3.0;
            target[f] = cloud.normals()[cloud.nearest(c)];
        }
        sys.append(assemble_normal_residual(m, ops, target, normal_weight));
    }
    return sys;
}

ResidualSystem assemble_curvature_residual(const mesh::TriMesh& m,
                                           const fem::FemOperators& ops) {
    check_snapshot(m, ops);
    if (m.has_boundary()) throw BoundaryError("curvature residual needs a closed mesh");

    const int n = m.n_vertices();
    const SparseMatrix K = fem::stiffness(ops);
    const std::vector<Vec3> H = fem::mean_curvature_vector(m, ops, K);
    const std::vector<Vec3> vn = mesh::vertex_normals(m);
    const std::vector<double> kappa = fem::scalar_curvature(H, vn);

    ResidualSystem sys;
    sys.snapshot = m.snapshot();
    sys.n = n;
    sys.rhs.resize(static_cast<std::size_t>(n));
    std::vector<double> rowscale(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double sw = std::sqrt(ops.w_vertex[i]);
        rowscale[i] = -1.0 / sw;
        sys.rhs[i] = -sw * kappa[i];
    }
    sys.blocks.push_back(K.row_scaled(rowscale));
    return sys;
}

ResidualSystem assemble_scalar_rof(const mesh::TriMesh& m, const fem::FemOperators& ops,
                                   std::span<const double> observed) {
    check_snapshot(m, ops);
    const int n = m.n_vertices();
    if (static_cast<int>(observed.size()) != n)
        throw ShapeMismatchError("observed field size does not match vertex count");

    ResidualSystem sys;
    sys.snapshot = m.snapshot();
    sys.n = n;
    sys.rhs.resize(static_cast<std::size_t>(n));
    std::vector<double> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        d[i] = std::sqrt(ops.w_vertex[i]);
        sys.rhs[i] = d[i] * observed[i];
    }
    sys.blocks.push_back(SparseMatrix::diagonal(d));
    return sys;
}

std::vector<Vec3> denoise_normal_field(const mesh::TriMesh& m, const fem::FemOperators& ops,
                                       std::span<const Vec3> noisy, DenoiseMode mode,
                                       double lambda, const admm::SubproblemOpts& solver) {
    check_snapshot(m, ops);
    const int nf = m.n_faces();
    const int n = m.n_vertices();
    if (static_cast<int>(noisy.size()) != nf)
        throw ShapeMismatchError("normal field size does not match face count");
    if (lambda < 0.0) throw DomainError("lambda must be >= 0");
    check_unit(noisy, "noisy normals");
    if (lambda == 0.0) return std::vector<Vec3>(noisy.begin(), noisy.end());

    // face -> vertex transport, area weighted
    std::vector<Vec3> uv(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        Vec3 s{};
        double wsum = 0.0;
        for (int f : m.vertex_faces(i)) {
            s += ops.w_face[f] * noisy[f];
            wsum += ops.w_face[f];
        }
        uv[i] = s / wsum;
    }

    std::vector<double> d(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) d[i] = std::sqrt(ops.w_vertex[i]);
    const SparseMatrix W = SparseMatrix::diagonal(d);
    admm::StackedSystem data;
    data.cols = n;
    data.blocks.push_back({&W, 1.0});

    admm::SubproblemOpts opts = solver;
    opts.lambda = lambda;

    std::vector<double> comp_in(static_cast<std::size_t>(n));
    std::vector<double> y(static_cast<std::size_t>(n));
    std::vector<std::vector<double>> smoothed(3);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < n; ++i) {
            const double v = c == 0 ? uv[i].x : (c == 1 ? uv[i].y : uv[i].z);
            comp_in[i] = v;
            y[i] = d[i] * v;
        }
        if (mode == DenoiseMode::rof) {
            smoothed[c] = admm::solve_subproblem_tv(data, y, ops.grad, ops.w_face, opts, comp_in).v;
        } else {
            smoothed[c] = admm::solve_subproblem_dirichlet(data, y, ops.grad, ops.w_face, lambda,
                                                           opts.admm_iters * opts.cg_iters,
                                                           opts.cg_tol, comp_in)
                              .v;
        }
    }

    // vertex -> face transport, then renormalize
    const auto& F = m.faces();
    std::vector<Vec3> out(static_cast<std::size_t>(nf));
    std::vector<signed char> bad(static_cast<std::size_t>(nf), 0);
#pragma omp parallel for schedule(static)
    for (int f = 0; f < nf; ++f) {
        Vec3 s{};
        for (int k = 0; k < 3; ++k) {
            const int i = F[f][k];
            s += Vec3{smoothed[0][i], smoothed[1][i], smoothed[2][i]};
        }
        const double len = s.norm();
        if (len < 1e-12)
            bad[f] = 1;
        else
            out[f] = s / len;
    }
    for (int f = 0; f < nf; ++f)
        if (bad[f])
            throw ZeroVectorError("denoised normal vanished on face " + std::to_string(f));
    return out;
}

double hernandez_weight(double s, double sigma) {
    if (!(s >= -1.0 && s <= 1.0)) throw DomainError("correlation value outside [-1, 1]");
    if (!(sigma > 0.0)) throw DomainError("sigma must be > 0");
    const double t = std::tan(0.25 * kPi * (s - 1.0));
    const double h = 1.0 - std::exp(-(t * t) / (sigma * sigma));
    return std::clamp(h, 0.0, 1.0);
}

double ncc(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DomainError("ncc: length mismatch");
    if (a.empty()) throw DomainError("ncc: empty input");
    const double na = norm(a), nb = norm(b);
    if (na == 0.0 || nb == 0.0) throw ZeroVectorError("ncc: zero vector");
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

}  // namespace shapeopt::energies
