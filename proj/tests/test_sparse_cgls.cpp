#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "shapeopt/admm.hpp"
#include "shapeopt/core.hpp"
#include "shapeopt/sparse.hpp"
#include "support/oracles.hpp"

using namespace shapeopt;

namespace {

SparseMatrix random_sparse(int rows, int cols, double fill, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Triplet> ts;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            if (rng.uniform() < fill) ts.push_back({r, c, rng.normal()});
    if (ts.empty()) ts.push_back({0, 0, 1.0});
    return SparseMatrix::from_triplets(rows, cols, std::move(ts));
}

std::vector<double> random_vec(int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = rng.normal();
    return v;
}

}  // namespace

TEST_CASE("triplet assembly sums duplicates and drops exact zeros") {
    auto A = SparseMatrix::from_triplets(
        2, 3, {{0, 1, 2.0}, {0, 1, 3.0}, {1, 2, 1.0}, {1, 2, -1.0}, {1, 0, 4.0}});
    CHECK(A.nnz() == 2);
    CHECK(A.coeff(0, 1) == 5.0);
    CHECK(A.coeff(1, 0) == 4.0);
    CHECK(A.coeff(1, 2) == 0.0);
    CHECK(A.coeff(0, 0) == 0.0);
}

TEST_CASE("identity and diagonal factories") {
    auto I = SparseMatrix::identity(4);
    std::vector<double> x{1, 2, 3, 4}, y(4);
    I.apply(x, y);
    for (int i = 0; i < 4; ++i) CHECK(y[static_cast<std::size_t>(i)] == x[static_cast<std::size_t>(i)]);

    std::vector<double> d{2, 0.5, -1};
    auto D = SparseMatrix::diagonal(d);
    std::vector<double> z{1, 2, 3}, w(3);
    D.apply(z, w);
    CHECK(w[0] == 2.0);
    CHECK(w[1] == 1.0);
    CHECK(w[2] == -3.0);
}

TEST_CASE("apply and apply_transpose match the dense oracle") {
    auto A = random_sparse(17, 11, 0.3, 42);
    auto D = oracle::to_dense(A);
    auto x = random_vec(11, 1);
    auto y = random_vec(17, 2);

    std::vector<double> ax(17), aty(11);
    A.apply(x, ax);
    A.apply_transpose(y, aty);

    Eigen::Map<const Eigen::VectorXd> ex(x.data(), 11), ey(y.data(), 17);
    Eigen::VectorXd dax = D * ex, daty = D.transpose() * ey;
    for (int i = 0; i < 17; ++i) CHECK(ax[static_cast<std::size_t>(i)] == doctest::Approx(dax(i)).epsilon(1e-14));
    for (int i = 0; i < 11; ++i) CHECK(aty[static_cast<std::size_t>(i)] == doctest::Approx(daty(i)).epsilon(1e-14));
}

TEST_CASE("parallel kernels are bitwise equal to the serial reference") {
    auto A = random_sparse(500, 400, 0.02, 7);
    auto x = random_vec(400, 3);
    auto y = random_vec(500, 4);

    std::vector<double> p1(500), s1(500), p2(400), s2(400);
    A.apply(x, p1);
    serial::apply(A, x, s1);
    A.apply_transpose(y, p2);
    serial::apply_transpose(A, y, s2);
    CHECK(p1 == s1);
    CHECK(p2 == s2);

    auto small_a = random_vec(4096, 5);
    auto small_b = random_vec(4096, 6);
    CHECK(dot(small_a, small_b) == serial::dot(small_a, small_b));

    auto a = random_vec(20000, 5);
    auto b = random_vec(20000, 6);
    // above the chunk threshold the reduction order differs from the plain
    // loop but stays deterministic
    CHECK(dot(a, b) == dot(a, b));
    CHECK(dot(a, b) == doctest::Approx(serial::dot(a, b)).epsilon(1e-13));

    auto c = a;
    auto d = a;
    axpy(0.37, b, c);
    serial::axpy(0.37, b, d);
    CHECK(c == d);
    aypx(-1.4, b, c);
    serial::aypx(-1.4, b, d);
    CHECK(c == d);
}

TEST_CASE("transpose, add, scaled, row_scaled match dense algebra") {
    auto A = random_sparse(9, 6, 0.4, 11);
    auto B = random_sparse(9, 6, 0.4, 12);
    auto DA = oracle::to_dense(A);
    auto DB = oracle::to_dense(B);

    CHECK((oracle::to_dense(A.transpose()) - DA.transpose()).norm() == 0.0);
    CHECK((oracle::to_dense(add(A, B)) - (DA + DB)).norm() < 1e-14);
    CHECK((oracle::to_dense(A.scaled(-2.5)) + 2.5 * DA).norm() == 0.0);

    std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9};
    Eigen::VectorXd es = Eigen::Map<Eigen::VectorXd>(s.data(), 9);
    CHECK((oracle::to_dense(A.row_scaled(s)) - es.asDiagonal() * DA).norm() == 0.0);
}

TEST_CASE("matrix market dump has coordinate header and nnz entries") {
    auto A = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.5}, {1, 0, -2.0}});
    std::ostringstream os;
    write_matrix_market(A, os);
    auto text = os.str();
    CHECK(text.rfind("%%MatrixMarket matrix coordinate real general", 0) == 0);
    CHECK(text.find("2 2 2") != std::string::npos);
    CHECK(text.find("1 1 1.5") != std::string::npos);
}

TEST_CASE("stacked system validates shapes and applies block rows") {
    auto A = random_sparse(5, 4, 0.5, 21);
    auto B = random_sparse(3, 4, 0.5, 22);
    admm::StackedSystem M{4, {{&A, 1.0}, {&B, -0.5}}};
    M.validate();
    CHECK(M.total_rows() == 8);

    auto x = random_vec(4, 23);
    std::vector<double> y(8);
    M.apply(x, y);
    auto D = oracle::to_dense(M);
    Eigen::VectorXd dy = D * Eigen::Map<Eigen::VectorXd>(x.data(), 4);
    for (int i = 0; i < 8; ++i) CHECK(y[static_cast<std::size_t>(i)] == doctest::Approx(dy(i)).epsilon(1e-14));

    auto yy = random_vec(8, 24);
    std::vector<double> xt(4);
    M.apply_transpose(yy, xt);
    Eigen::VectorXd dxt = D.transpose() * Eigen::Map<Eigen::VectorXd>(yy.data(), 8);
    for (int i = 0; i < 4; ++i) CHECK(xt[static_cast<std::size_t>(i)] == doctest::Approx(dxt(i)).epsilon(1e-14));

    auto C = random_sparse(2, 3, 0.9, 25);
    admm::StackedSystem bad{4, {{&A, 1.0}, {&C, 1.0}}};
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("cgls solves the identity in one iteration") {
    auto I = SparseMatrix::identity(6);
    admm::StackedSystem M{6, {{&I, 1.0}}};
    auto b = random_vec(6, 31);
    std::vector<double> x(6, 0.0);
    auto res = admm::cgls_solve(M, b, x, 10, 1e-12);
    CHECK(res.iters == 1);
    for (int i = 0; i < 6; ++i) CHECK(x[static_cast<std::size_t>(i)] == doctest::Approx(b[static_cast<std::size_t>(i)]).epsilon(1e-12));
}

TEST_CASE("cgls with zero rhs stays at zero") {
    auto A = random_sparse(8, 5, 0.6, 32);
    admm::StackedSystem M{5, {{&A, 1.0}}};
    std::vector<double> b(8, 0.0), x(5, 0.0);
    auto res = admm::cgls_solve(M, b, x, 20, 1e-12);
    CHECK(res.converged);
    for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("cgls matches the dense QR oracle on random least squares") {
    for (auto [rows, cols, seed] : {std::tuple{20, 10, 101ull}, std::tuple{200, 50, 102ull}}) {
        auto A = random_sparse(rows, cols, 0.8, seed);
        admm::StackedSystem M{cols, {{&A, 1.0}}};
        auto b = random_vec(rows, seed + 1);

        std::vector<double> x(static_cast<std::size_t>(cols), 0.0);
        admm::cgls_solve(M, b, x, 4 * cols, 1e-14);

        Eigen::VectorXd ref = oracle::lstsq(oracle::to_dense(A), Eigen::Map<Eigen::VectorXd>(b.data(), rows));
        double num = 0, den = 0;
        for (int i = 0; i < cols; ++i) {
            num += sqr(x[static_cast<std::size_t>(i)] - ref(i));
            den += sqr(ref(i));
        }
        CHECK(std::sqrt(num / den) <= 1e-8);
    }
}

TEST_CASE("cgls residual norms never increase") {
    auto A = random_sparse(60, 25, 0.3, 55);
    admm::StackedSystem M{25, {{&A, 1.0}}};
    auto b = random_vec(60, 56);
    std::vector<double> x(25, 0.0);
    auto res = admm::cgls_solve(M, b, x, 100, 1e-13);
    REQUIRE(res.resnorms.size() > 2);
    for (std::size_t k = 1; k < res.resnorms.size(); ++k)
        CHECK(res.resnorms[k] <= res.resnorms[k - 1] * (1.0 + 1e-12));
}

TEST_CASE("cgls warm start converges to the same solution") {
    auto A = random_sparse(30, 12, 0.5, 61);
    admm::StackedSystem M{12, {{&A, 1.0}}};
    auto b = random_vec(30, 62);

    std::vector<double> cold(12, 0.0);
    admm::cgls_solve(M, b, cold, 100, 1e-13);
    auto warm = random_vec(12, 63);
    admm::cgls_solve(M, b, warm, 100, 1e-13);
    for (int i = 0; i < 12; ++i)
        CHECK(warm[static_cast<std::size_t>(i)] == doctest::Approx(cold[static_cast<std::size_t>(i)]).epsilon(1e-7));
}

TEST_CASE("cgls throws on non-finite input") {
    auto A = random_sparse(10, 4, 0.6, 71);
    admm::StackedSystem M{4, {{&A, 1.0}}};
    auto b = random_vec(10, 72);
    b[3] = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> x(4, 0.0);
    CHECK_THROWS_AS(admm::cgls_solve(M, b, x, 50, 1e-10), SolverBreakdownError);
}

TEST_CASE("seeded rng reproduces its stream") {
    Rng a(999), b(999);
    for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    Rng c(1000);
    bool same = true;
    Rng d(999);
    for (int i = 0; i < 10; ++i) same = same && (c.uniform() == d.uniform());
    CHECK_FALSE(same);
}
