#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lsp {

/// Raised when operand shapes do not chain.
class DimensionError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when an operation is called outside its contract (bad arguments,
/// empty inputs, out-of-range step sizes).
class UsageError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Raised when a user-supplied map produces non-finite values.
class EvaluationError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Vec = std::vector<double>;

/// Dense row-major matrix. The stability laws in this library are about
/// small dense Jacobian blocks, so there is no sparse or structured storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(const Vec& d);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ == cols_; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const;
  Matrix transposed() const;
  Matrix scaled(double s) const;

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Vec operator*(const Matrix& a, const Vec& x);

// Vector helpers over plain std::vector<double>.
double dot(const Vec& a, const Vec& b);
double norm2(const Vec& v);
double norm_inf(const Vec& v);
Vec vsub(const Vec& a, const Vec& b);
Vec vadd(const Vec& a, const Vec& b);
Vec vscale(const Vec& v, double s);
bool all_finite(const Vec& v);

/// Numerically stable sum: recursive pairwise reduction. Used everywhere a
/// Monte Carlo aggregate must not depend on accumulation order.
double pairwise_sum(std::span<const double> values);

std::string shape_string(const Matrix& a);

}  // namespace lsp
