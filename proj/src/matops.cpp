#include "sdre_eso/matops.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>

#include "sdre_eso/errors.hpp"

namespace sdre_eso::matops {

namespace {

constexpr double kSingularPivotFactor = 1e-12;

bool finite_range(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
  }
}

void require_same_size(const Vector& a, const Vector& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": length mismatch " + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()));
  }
}

// In-place LU with partial pivoting of `lu`, applied simultaneously to the
// right-hand-side columns of `rhs`.  On return rhs holds the solution.
void eliminate(Matrix lu, Matrix& rhs) {
  const std::size_t n = lu.rows();
  const double threshold = kSingularPivotFactor * norm_inf(lu);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(lu(r, col)) > std::abs(lu(pivot, col))) pivot = r;
    }
    if (!(std::abs(lu(pivot, col)) > threshold)) {
      throw SingularError("solve_linear: pivot " + std::to_string(lu(pivot, col)) +
                          " below threshold in column " + std::to_string(col));
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(lu(pivot, c), lu(col, c));
      for (std::size_t c = 0; c < rhs.cols(); ++c) std::swap(rhs(pivot, c), rhs(col, c));
    }
    const double inv = 1.0 / lu(col, col);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = lu(r, col) * inv;
      if (factor == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) lu(r, c) -= factor * lu(col, c);
      for (std::size_t c = 0; c < rhs.cols(); ++c) rhs(r, c) -= factor * rhs(col, c);
    }
  }
  for (std::size_t c = 0; c < rhs.cols(); ++c) {
    for (std::size_t i = n; i-- > 0;) {
      double acc = rhs(i, c);
      for (std::size_t j = i + 1; j < n; ++j) acc -= lu(i, j) * rhs(j, c);
      rhs(i, c) = acc / lu(i, i);
    }
  }
}

}  // namespace

// ---------------------------------------------------------------- Vector

Vector::Vector(std::size_t dim, double value) : entries_(dim, value) {}

Vector::Vector(std::initializer_list<double> entries) : Vector(std::vector<double>(entries)) {}

Vector::Vector(std::vector<double> entries) : entries_(std::move(entries)) {
  if (!finite_range(entries_)) throw EvaluationError("Vector: non-finite entry");
}

Vector Vector::segment(std::size_t offset, std::size_t count) const {
  if (offset + count > size()) throw DimensionError("Vector::segment: out of range");
  Vector out(count);
  std::copy_n(entries_.begin() + static_cast<std::ptrdiff_t>(offset), count, out.entries_.begin());
  return out;
}

void Vector::set_segment(std::size_t offset, const Vector& values) {
  if (offset + values.size() > size()) throw DimensionError("Vector::set_segment: out of range");
  std::copy(values.begin(), values.end(), entries_.begin() + static_cast<std::ptrdiff_t>(offset));
}

bool Vector::all_finite() const { return finite_range(entries_); }

// ---------------------------------------------------------------- Matrix

Matrix::Matrix(std::size_t rows, std::size_t cols, double value)
    : rows_(rows), cols_(cols), entries_(rows * cols, value) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    throw DimensionError("Matrix: " + std::to_string(entries_.size()) + " entries for " +
                         std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!finite_range(entries_)) throw EvaluationError("Matrix: non-finite entry");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  entries_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("Matrix: ragged initializer");
    entries_.insert(entries_.end(), r.begin(), r.end());
  }
  if (!finite_range(entries_)) throw EvaluationError("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(const Vector& d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::column(const Vector& v) { return Matrix(v.size(), 1, v.entries()); }

Matrix Matrix::row(const Vector& v) { return Matrix(1, v.size(), v.entries()); }

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t row, std::size_t col, std::size_t rows, std::size_t cols) const {
  if (row + rows > rows_ || col + cols > cols_) throw DimensionError("Matrix::block: out of range");
  Matrix b(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) b(i, j) = (*this)(row + i, col + j);
  return b;
}

void Matrix::set_block(std::size_t row, std::size_t col, const Matrix& values) {
  if (row + values.rows() > rows_ || col + values.cols() > cols_) {
    throw DimensionError("Matrix::set_block: out of range");
  }
  for (std::size_t i = 0; i < values.rows(); ++i)
    for (std::size_t j = 0; j < values.cols(); ++j) (*this)(row + i, col + j) = values(i, j);
}

Vector Matrix::vec() const {
  Vector v(rows_ * cols_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) v[j * rows_ + i] = (*this)(i, j);
  return v;
}

Matrix Matrix::unvec(const Vector& v, std::size_t rows, std::size_t cols) {
  if (v.size() != rows * cols) throw DimensionError("Matrix::unvec: length mismatch");
  Matrix m(rows, cols);
  for (std::size_t j = 0; j < cols; ++j)
    for (std::size_t i = 0; i < rows; ++i) m(i, j) = v[j * rows + i];
  return m;
}

bool Matrix::all_finite() const { return finite_range(entries_); }

// ---------------------------------------------------------------- arithmetic

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator+");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "operator-");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

Matrix operator-(const Matrix& a) { return -1.0 * a; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("operator*: inner dimensions " + shape(a) + " * " + shape(b));
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t l = 0; l < a.cols(); ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += ail * b(l, j);
    }
  }
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = s * a(i, j);
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw DimensionError("operator*: " + shape(a) + " times vector of length " +
                         std::to_string(x.size()));
  }
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

Vector operator+(const Vector& a, const Vector& b) {
  require_same_size(a, b, "operator+");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] + b[i];
  return c;
}

Vector operator-(const Vector& a, const Vector& b) {
  require_same_size(a, b, "operator-");
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] - b[i];
  return c;
}

Vector operator-(const Vector& a) { return -1.0 * a; }

Vector operator*(double s, const Vector& a) {
  Vector c(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = s * a[i];
  return c;
}

double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b, "dot");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm_inf(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double norm2(const Vector& v) { return std::sqrt(dot(v, v)); }

double norm_inf(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (double x : a.row_span(i)) s += std::abs(x);
    m = std::max(m, s);
  }
  return m;
}

double norm_fro(const Matrix& a) {
  double s = 0.0;
  for (double x : a.entries()) s += x * x;
  return std::sqrt(s);
}

Matrix symmetrize(const Matrix& a) {
  if (!a.is_square()) throw DimensionError("symmetrize: matrix is " + shape(a));
  return 0.5 * (a + a.transpose());
}

Vector concat(const Vector& a, const Vector& b) {
  Vector c(a.size() + b.size());
  c.set_segment(0, a);
  c.set_segment(a.size(), b);
  return c;
}

// ---------------------------------------------------------------- notation operators

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j) * b(i, j);
  return c;
}

Matrix kronecker(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      for (std::size_t p = 0; p < b.rows(); ++p)
        for (std::size_t q = 0; q < b.cols(); ++q)
          c(i * b.rows() + p, j * b.cols() + q) = a(i, j) * b(p, q);
  return c;
}

Matrix oslash(const Vector& a, const Vector& b) {
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (b[j] == 0.0) throw SingularError("oslash: zero denominator at index " + std::to_string(j));
  }
  Matrix c(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c(i, j) = a[i] / b[j];
  return c;
}

// ---------------------------------------------------------------- solves

Vector solve_linear(const Matrix& a, const Vector& b) {
  if (!a.is_square() || a.rows() != b.size()) {
    throw DimensionError("solve_linear: " + shape(a) + " with rhs of length " +
                         std::to_string(b.size()));
  }
  Matrix rhs = Matrix::column(b);
  eliminate(a, rhs);
  return Vector(std::vector<double>(rhs.entries().begin(), rhs.entries().end()));
}

Matrix solve_linear(const Matrix& a, const Matrix& b) {
  if (!a.is_square() || a.rows() != b.rows()) {
    throw DimensionError("solve_linear: " + shape(a) + " with rhs " + shape(b));
  }
  Matrix rhs = b;
  eliminate(a, rhs);
  return rhs;
}

Matrix jacobian_fd(const VectorFunction& f, const Vector& x, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("jacobian_fd: step must be positive");
  Matrix jac;
  Vector probe = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    probe[j] = x[j] + h;
    const Vector plus = f(probe);
    probe[j] = x[j] - h;
    const Vector minus = f(probe);
    probe[j] = x[j];
    if (!plus.all_finite() || !minus.all_finite() || plus.size() != minus.size()) {
      throw EvaluationError("jacobian_fd: function is not finite near coordinate " +
                            std::to_string(j));
    }
    if (j == 0) jac = Matrix(plus.size(), x.size());
    for (std::size_t i = 0; i < plus.size(); ++i) jac(i, j) = (plus[i] - minus[i]) / (2.0 * h);
  }
  return jac;
}

std::size_t rank(const Matrix& a, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("rank: tolerance must be positive");
  Matrix m = a;
  const double threshold = tol * norm_inf(a);
  const std::size_t steps = std::min(m.rows(), m.cols());
  std::size_t r = 0;
  for (; r < steps; ++r) {
    std::size_t pi = r, pj = r;
    double best = 0.0;
    for (std::size_t i = r; i < m.rows(); ++i)
      for (std::size_t j = r; j < m.cols(); ++j)
        if (std::abs(m(i, j)) > best) {
          best = std::abs(m(i, j));
          pi = i;
          pj = j;
        }
    if (!(best > threshold)) break;
    for (std::size_t j = 0; j < m.cols(); ++j) std::swap(m(r, j), m(pi, j));
    for (std::size_t i = 0; i < m.rows(); ++i) std::swap(m(i, r), m(i, pj));
    for (std::size_t i = r + 1; i < m.rows(); ++i) {
      const double factor = m(i, r) / m(r, r);
      for (std::size_t j = r; j < m.cols(); ++j) m(i, j) -= factor * m(r, j);
    }
  }
  return r;
}

std::ostream& operator<<(std::ostream& os, const Matrix& m) {
  os << '[';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
  }
  return os << ']';
}

std::ostream& operator<<(std::ostream& os, const Vector& v) {
  os << '(';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  return os << ')';
}

}  // namespace sdre_eso::matops
