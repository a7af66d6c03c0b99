#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccgnn {

/// Thrown when operand shapes are not conformable for an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense row-major matrix of 64-bit reals. Always at least 1x1.
class Matrix {
 public:
  Matrix() : Matrix(1, 1) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix scalar(double v) { return Matrix(1, 1, v); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool same_shape(const Matrix& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  /// Value of a 1x1 matrix.
  double item() const;

  Matrix transposed() const;
  Matrix block_rows(std::size_t first, std::size_t count) const;
  Matrix cols_range(std::size_t first, std::size_t count) const;

  bool operator==(const Matrix& o) const = default;

  std::string shape_string() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> data_;
};

std::string shape_string(const Matrix& m);

bool all_finite(const Matrix& m) noexcept;
double max_abs_diff(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m) noexcept;

/// Stacks matrices with equal column count vertically.
Matrix vstack(std::span<const Matrix> parts);
/// Joins matrices with equal row count side by side.
Matrix hstack(const Matrix& left, const Matrix& right);

// Products through the active kernel table.
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);

}  // namespace ccgnn
