#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

namespace l1sq {

/// Dense real vector. Entries are finite on construction.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0);
  explicit Vector(std::vector<double> data);
  Vector(std::initializer_list<double> values);

  std::size_t dim() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// Row-major dense matrix with explicit dimensions.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws ShapeMismatch if data.size() != rows*cols, NonFinite on NaN/Inf.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);
  /// Builds a matrix from nested rows; all rows must have equal length.
  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }
  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<double> row(std::size_t i) {
    return {data_.data() + i * cols_, cols_};
  }

  Vector column(std::size_t j) const;
  DenseMatrix transposed() const;

  std::span<const double> values() const noexcept { return data_; }
  std::span<double> values() noexcept { return data_; }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// An r-dimensional linear subspace of R^D held as a D x r matrix with
/// orthonormal columns. Only `orthonormalize` produces one.
class Subspace {
 public:
  std::size_t ambient_dim() const noexcept { return basis_.rows(); }
  std::size_t rank() const noexcept { return basis_.cols(); }
  const DenseMatrix& basis() const noexcept { return basis_; }

  /// Wraps a basis that is already orthonormal to within `tol`; throws
  /// RankDeficient otherwise. Used when loading stored indices.
  static Subspace from_orthonormal(DenseMatrix basis, double tol = 1e-10);

 private:
  friend Subspace orthonormalize(const DenseMatrix& raw_basis);
  explicit Subspace(DenseMatrix basis) : basis_(std::move(basis)) {}

  DenseMatrix basis_;
};

inline constexpr double kRankTolerance = 1e-10;

/// Householder QR with column pivoting. The returned basis spans the column
/// space of `raw_basis`; columns come out in pivot order with sign chosen so
/// the corresponding R diagonal is positive. Throws RankDeficient when a
/// pivot falls below kRankTolerance times the leading one.
Subspace orthonormalize(const DenseMatrix& raw_basis);

double l1_norm(std::span<const double> x);
inline double l1_norm(const Vector& x) { return l1_norm(x.values()); }
double l2_norm(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);

Vector matvec(const DenseMatrix& a, const Vector& x);
/// a^T x without forming the transpose.
Vector matvec_transposed(const DenseMatrix& a, const Vector& x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

Vector operator+(const Vector& x, const Vector& y);
Vector operator-(const Vector& x, const Vector& y);
Vector operator*(double c, const Vector& x);

/// Orthogonal (l2) projection residual of x onto span(basis), basis orthonormal.
Vector projection_residual(const DenseMatrix& basis, const Vector& x);

// DMAT1 container: "DMAT1\0", rows and cols as u64 little-endian, then
// rows*cols little-endian IEEE-754 doubles in row-major order.
void write_dmat(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_dmat(std::istream& in);
void save_dmat(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix load_dmat(const std::filesystem::path& path);

// Headerless comma-separated doubles, one matrix row per line.
void write_matrix_csv(std::ostream& out, const DenseMatrix& m);
DenseMatrix read_matrix_csv(std::istream& in);
void save_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m);
DenseMatrix load_matrix_csv(const std::filesystem::path& path);

/// Dispatches on extension: ".csv" uses CSV, anything else DMAT1.
DenseMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const DenseMatrix& m);

namespace detail {
void write_u64_le(std::ostream& out, std::uint64_t v);
std::uint64_t read_u64_le(std::istream& in);
void write_f64_le(std::ostream& out, double v);
double read_f64_le(std::istream& in);
}  // namespace detail

}  // namespace l1sq
