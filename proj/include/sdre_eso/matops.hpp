#pragma once

/// @file
/// Small dense matrix/vector kernel.  Every system handled by this project
/// has state dimension k*n of a dozen or less, so storage is plain row-major
/// std::vector<double> and all solves are direct O(N^3) eliminations.

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <vector>

namespace sdre_eso::matops {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double value = 0.0);
  Vector(std::initializer_list<double> entries);
  /// Throws EvaluationError if any entry is NaN or infinite.
  explicit Vector(std::vector<double> entries);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  double& operator[](std::size_t i) { return entries_[i]; }
  double operator[](std::size_t i) const { return entries_[i]; }

  std::span<double> span() { return entries_; }
  std::span<const double> span() const { return entries_; }
  const std::vector<double>& entries() const { return entries_; }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Copy of entries [offset, offset + count).
  Vector segment(std::size_t offset, std::size_t count) const;
  void set_segment(std::size_t offset, const Vector& values);

  bool all_finite() const;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> entries_;
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0);
  /// Row-major entries.  Throws DimensionError if the length does not match
  /// and EvaluationError if any entry is not finite.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  /// Nested rows, e.g. {{1, 2}, {3, 4}}.  Rows must have equal length.
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static Matrix diagonal(const Vector& d);
  static Matrix column(const Vector& v);
  static Matrix row(const Vector& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> entries() const { return entries_; }
  std::span<const double> row_span(std::size_t i) const {
    return std::span<const double>(entries_).subspan(i * cols_, cols_);
  }

  Matrix transpose() const;
  Matrix block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const;
  void set_block(std::size_t row, std::size_t col, const Matrix& values);

  /// Entries read column by column (vec operator).
  Vector vec() const;
  static Matrix unvec(const Vector& v, std::size_t rows, std::size_t cols);

  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Arithmetic.  Shape mismatches throw DimensionError.
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
Vector operator*(const Matrix& a, const Vector& x);
Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator-(const Vector& a);
Vector operator*(double s, const Vector& a);

double dot(const Vector& a, const Vector& b);
double norm_inf(const Vector& v);
double norm2(const Vector& v);
/// Maximum absolute row sum.
double norm_inf(const Matrix& a);
double norm_fro(const Matrix& a);
/// (A + A^T) / 2.
Matrix symmetrize(const Matrix& a);
Vector concat(const Vector& a, const Vector& b);

/// Elementwise product.  Throws DimensionError on shape mismatch.
Matrix hadamard(const Matrix& a, const Matrix& b);

/// Block matrix whose (i,j) block is a(i,j) * b.
Matrix kronecker(const Matrix& a, const Matrix& b);

/// C(i,j) = a(i) / b(j).  Throws SingularError if b has a zero entry.
Matrix oslash(const Vector& a, const Vector& b);

/// Solves A x = b by LU with partial pivoting.  Throws SingularError when a
/// pivot falls below 1e-12 * norm_inf(A).
Vector solve_linear(const Matrix& a, const Vector& b);
/// Same elimination applied to every column of B.
Matrix solve_linear(const Matrix& a, const Matrix& b);

using VectorFunction = std::function<Vector(const Vector&)>;

/// Central-difference Jacobian: column j is (f(x + h e_j) - f(x - h e_j)) / 2h.
/// Throws EvaluationError if f returns a non-finite value.
Matrix jacobian_fd(const VectorFunction& f, const Vector& x, double h);

inline constexpr double kDefaultRankTolerance = 1e-9;

/// Numerical rank by Gaussian elimination with complete pivoting; a pivot
/// counts when its magnitude exceeds tol * norm_inf(A).
std::size_t rank(const Matrix& a, double tol = kDefaultRankTolerance);

std::ostream& operator<<(std::ostream& os, const Matrix& m);
std::ostream& operator<<(std::ostream& os, const Vector& v);

}  // namespace sdre_eso::matops
