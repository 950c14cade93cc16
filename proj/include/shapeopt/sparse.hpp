#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "shapeopt/core.hpp"

namespace shapeopt {

struct Triplet {
    int row = 0;
    int col = 0;
    double val = 0.0;
};

// Compressed sparse matrix holding both CSR and CSC index structures so that
// A*x and A^T*x are both gather-only loops (one output entry per thread-owned
// row/column). That keeps every product bitwise deterministic regardless of
// thread count, which the trace/determinism contract depends on.
class SparseMatrix {
  public:
    SparseMatrix() = default;

    // Duplicate (row, col) entries are summed in insertion order; entries
    // whose final sum is exactly zero are dropped.
    static SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> ts);
    static SparseMatrix identity(int n);
    static SparseMatrix diagonal(std::span<const double> d);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int nnz() const { return static_cast<int>(val_.size()); }

    std::span<const int> row_ptr() const { return row_ptr_; }
    std::span<const int> col_ind() const { return col_ind_; }
    std::span<const double> values() const { return val_; }

    double coeff(int r, int c) const;

    void apply(std::span<const double> x, std::span<double> y) const;            // y = A x
    void apply_transpose(std::span<const double> x, std::span<double> y) const;  // y = A^T x

    SparseMatrix transpose() const;

    // Scales every stored value; structure unchanged.
    SparseMatrix scaled(double s) const;

    // diag(s) * A, one scale factor per row
    SparseMatrix row_scaled(std::span<const double> s) const;

    std::vector<Triplet> to_triplets() const;

  private:
    int rows_ = 0, cols_ = 0;
    // CSR
    std::vector<int> row_ptr_{0};
    std::vector<int> col_ind_;
    std::vector<double> val_;
    // CSC mirror of the same entries
    std::vector<int> col_ptr_{0};
    std::vector<int> row_ind_;
    std::vector<double> val_csc_;

    void build_csc();
};

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b);

namespace serial {
void apply(const SparseMatrix& A, std::span<const double> x, std::span<double> y);
void apply_transpose(const SparseMatrix& A, std::span<const double> x, std::span<double> y);
}  // namespace serial

// Coordinate-format Matrix Market dump (1-based indices, %.17g values).
void write_matrix_market(const SparseMatrix& A, std::ostream& os);
void write_matrix_market(const SparseMatrix& A, const std::string& path);

}  // namespace shapeopt
