#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace shapeopt {

inline constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Error taxonomy. Everything user-visible derives from Error so the CLI can
// map "bad input" (exit 1) vs "numerical failure" (exit 2) by type.
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct TopologyError : Error { using Error::Error; };
struct BoundaryError : Error { using Error::Error; };
struct ShapeMismatchError : Error { using Error::Error; };
struct EmptyCloudError : Error { using Error::Error; };
struct UnorientedCloudError : Error { using Error::Error; };
struct ZeroVectorError : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };

struct DegenerateFaceError : Error { using Error::Error; };
struct SolverBreakdownError : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Vec3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    constexpr Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm2() const { return dot(*this); }
    double norm() const { return std::sqrt(norm2()); }

    Vec3 normalized() const {
        const double n = norm();
        if (!(n > 0.0) || !std::isfinite(n))
            throw ZeroVectorError("cannot normalize zero or non-finite vector");
        return *this / n;
    }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double sqr(double v) { return v * v; }

// ---------------------------------------------------------------------------
// Deterministic vector kernels. Parallel versions chunk the range, reduce
// each chunk serially inside its owning thread, then combine the per-chunk
// partials in index order; the result is identical for any thread count.
// The serial namespace keeps plain-loop references for testing and the
// kernel benchmark.
// ---------------------------------------------------------------------------

namespace serial {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline void aypx(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + alpha * y[i];
}

inline void scal(double alpha, std::span<double> x) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= alpha;
}

}  // namespace serial

namespace detail {
inline constexpr std::ptrdiff_t kChunk = 4096;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(a.size());
    if (n <= detail::kChunk) return serial::dot(a, b);
    const std::ptrdiff_t nchunks = (n + detail::kChunk - 1) / detail::kChunk;
    std::vector<double> partial(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t c = 0; c < nchunks; ++c) {
        const std::ptrdiff_t lo = c * detail::kChunk;
        const std::ptrdiff_t hi = std::min(n, lo + detail::kChunk);
        double s = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i) s += a[i] * b[i];
        partial[static_cast<std::size_t>(c)] = s;
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }
inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// y = x + alpha*y
inline void aypx(double alpha, std::span<const double> x, std::span<double> y) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) y[i] = x[i] + alpha * y[i];
}

inline void scal(double alpha, std::span<double> x) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) x[i] *= alpha;
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Seedable RNG with a fully specified normal sampler, so identical seeds give
// identical streams on every platform.
// ---------------------------------------------------------------------------

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // in [0, 1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // standard normal via Box-Muller, spare cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * kPi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    Vec3 normal3() {
        const double a = normal(), b = normal(), c = normal();
        return {a, b, c};
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(gen_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace shapeopt
