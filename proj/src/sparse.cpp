#include "shapeopt/sparse.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <ostream>

namespace shapeopt {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, std::vector<Triplet> ts) {
    if (rows < 0 || cols < 0) throw DomainError("sparse: negative dimension");
    for (const auto& t : ts) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
            throw DomainError("sparse: triplet index out of range");
    }

    std::vector<std::size_t> order(ts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Triplet &ta = ts[a], &tb = ts[b];
        if (ta.row != tb.row) return ta.row < tb.row;
        if (ta.col != tb.col) return ta.col < tb.col;
        return a < b;  // keep insertion order within a duplicate group
    });

    SparseMatrix A;
    A.rows_ = rows;
    A.cols_ = cols;
    A.row_ptr_.assign(static_cast<std::size_t>(rows) + 1, 0);

    std::size_t i = 0;
    while (i < order.size()) {
        const Triplet& head = ts[order[i]];
        double sum = head.val;
        std::size_t j = i + 1;
        while (j < order.size() && ts[order[j]].row == head.row && ts[order[j]].col == head.col) {
            sum += ts[order[j]].val;
            ++j;
        }
        if (sum != 0.0) {
            A.col_ind_.push_back(head.col);
            A.val_.push_back(sum);
            A.row_ptr_[static_cast<std::size_t>(head.row) + 1]++;
        }
        i = j;
    }
    for (int r = 0; r < rows; ++r) A.row_ptr_[r + 1] += A.row_ptr_[r];
    A.build_csc();
    return A;
}

void SparseMatrix::build_csc() {
    col_ptr_.assign(static_cast<std::size_t>(cols_) + 1, 0);
    row_ind_.assign(val_.size(), 0);
    val_csc_.assign(val_.size(), 0.0);
    for (int c : col_ind_) col_ptr_[static_cast<std::size_t>(c) + 1]++;
    for (int c = 0; c < cols_; ++c) col_ptr_[c + 1] += col_ptr_[c];
    std::vector<int> next(col_ptr_.begin(), col_ptr_.end() - 1);
    for (int r = 0; r < rows_; ++r) {
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
            const int c = col_ind_[k];
            const int dst = next[c]++;
            row_ind_[dst] = r;
            val_csc_[dst] = val_[k];
        }
    }
}

SparseMatrix SparseMatrix::identity(int n) {
    std::vector<Triplet> ts;
    ts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) ts.push_back({i, i, 1.0});
    return from_triplets(n, n, std::move(ts));
}

SparseMatrix SparseMatrix::diagonal(std::span<const double> d) {
    std::vector<Triplet> ts;
    ts.reserve(d.size());
    for (int i = 0; i < static_cast<int>(d.size()); ++i) ts.push_back({i, i, d[i]});
    return from_triplets(static_cast<int>(d.size()), static_cast<int>(d.size()), std::move(ts));
}

double SparseMatrix::coeff(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw DomainError("sparse: coeff out of range");
    const int lo = row_ptr_[r], hi = row_ptr_[r + 1];
    const auto begin = col_ind_.begin() + lo, end = col_ind_.begin() + hi;
    const auto it = std::lower_bound(begin, end, c);
    if (it != end && *it == c) return val_[static_cast<std::size_t>(it - col_ind_.begin())];
    return 0.0;
}

void SparseMatrix::apply(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != cols_ || static_cast<int>(y.size()) != rows_)
        throw DomainError("sparse: apply size mismatch");
    const int* rp = row_ptr_.data();
    const int* ci = col_ind_.data();
    const double* v = val_.data();
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows_; ++r) {
        double s = 0.0;
        for (int k = rp[r]; k < rp[r + 1]; ++k) s += v[k] * x[ci[k]];
        y[r] = s;
    }
}

void SparseMatrix::apply_transpose(std::span<const double> x, std::span<double> y) const {
    if (static_cast<int>(x.size()) != rows_ || static_cast<int>(y.size()) != cols_)
        throw DomainError("sparse: apply_transpose size mismatch");
    const int* cp = col_ptr_.data();
    const int* ri = row_ind_.data();
    const double* v = val_csc_.data();
#pragma omp parallel for schedule(static)
    for (int c = 0; c < cols_; ++c) {
        double s = 0.0;
        for (int k = cp[c]; k < cp[c + 1]; ++k) s += v[k] * x[ri[k]];
        y[c] = s;
    }
}

SparseMatrix SparseMatrix::transpose() const {
    SparseMatrix T;
    T.rows_ = cols_;
    T.cols_ = rows_;
    T.row_ptr_ = col_ptr_;
    T.col_ind_ = row_ind_;
    T.val_ = val_csc_;
    T.build_csc();
    return T;
}

SparseMatrix SparseMatrix::scaled(double s) const {
    SparseMatrix A = *this;
    for (double& v : A.val_) v *= s;
    for (double& v : A.val_csc_) v *= s;
    return A;
}

SparseMatrix SparseMatrix::row_scaled(std::span<const double> s) const {
    if (static_cast<int>(s.size()) != rows_) throw DomainError("sparse: row_scaled size mismatch");
    SparseMatrix A = *this;
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) A.val_[k] *= s[r];
    A.build_csc();
    return A;
}

std::vector<Triplet> SparseMatrix::to_triplets() const {
    std::vector<Triplet> ts;
    ts.reserve(val_.size());
    for (int r = 0; r < rows_; ++r)
        for (int k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            ts.push_back({r, col_ind_[k], val_[k]});
    return ts;
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DomainError("sparse: add size mismatch");
    std::vector<Triplet> ts = a.to_triplets();
    const std::vector<Triplet> tb = b.to_triplets();
    ts.insert(ts.end(), tb.begin(), tb.end());
    return SparseMatrix::from_triplets(a.rows(), a.cols(), std::move(ts));
}

namespace serial {

void apply(const SparseMatrix& A, std::span<const double> x, std::span<double> y) {
    const auto rp = A.row_ptr();
    const auto ci = A.col_ind();
    const auto v = A.values();
    for (int r = 0; r < A.rows(); ++r) {
        double s = 0.0;
        for (int k = rp[r]; k < rp[r + 1]; ++k) s += v[k] * x[ci[k]];
        y[r] = s;
    }
}

void apply_transpose(const SparseMatrix& A, std::span<const double> x, std::span<double> y) {
    // column gathers in the same order as the parallel CSC loop
    const SparseMatrix T = A.transpose();
    serial::apply(T, x, y);
}

}  // namespace serial

void write_matrix_market(const SparseMatrix& A, std::ostream& os) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << A.rows() << " " << A.cols() << " " << A.nnz() << "\n";
    char buf[64];
    const auto rp = A.row_ptr();
    const auto ci = A.col_ind();
    const auto v = A.values();
    for (int r = 0; r < A.rows(); ++r) {
        for (int k = rp[r]; k < rp[r + 1]; ++k) {
            std::snprintf(buf, sizeof buf, "%d %d %.17g\n", r + 1, ci[k] + 1, v[k]);
            os << buf;
        }
    }
}

void write_matrix_market(const SparseMatrix& A, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    write_matrix_market(A, os);
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace shapeopt
