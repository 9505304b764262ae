#include "l1sq/linalg.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "l1sq/error.hpp"

namespace l1sq {
namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kNonFinite, std::string(what) + " has a non-finite entry");
    }
  }
}

constexpr char kDmatMagic[6] = {'D', 'M', 'A', 'T', '1', '\0'};

}  // namespace

Vector::Vector(std::size_t dim, double fill) : data_(dim, fill) {
  require_finite(data_, "Vector");
}

Vector::Vector(std::vector<double> data) : data_(std::move(data)) {
  require_finite(data_, "Vector");
}

Vector::Vector(std::initializer_list<double> values) : data_(values) {
  require_finite(data_, "Vector");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  require_finite(data_, "DenseMatrix");
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch,
                "DenseMatrix data length " + std::to_string(data_.size()) + " != " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
  require_finite(data_, "DenseMatrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw Error(ErrorCode::kShapeMismatch, "ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return DenseMatrix(r, c, std::move(data));
}

Vector DenseMatrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return Vector(std::move(out));
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Subspace Subspace::from_orthonormal(DenseMatrix basis, double tol) {
  const std::size_t r = basis.cols();
  if (r == 0 || r > basis.rows()) {
    throw Error(ErrorCode::kRankDeficient, "basis must have 1 <= rank <= ambient dim");
  }
  for (std::size_t a = 0; a < r; ++a) {
    for (std::size_t b = a; b < r; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < basis.rows(); ++i) s += basis(i, a) * basis(i, b);
      const double expected = a == b ? 1.0 : 0.0;
      if (std::abs(s - expected) > tol) {
        throw Error(ErrorCode::kRankDeficient, "basis columns are not orthonormal");
      }
    }
  }
  return Subspace(std::move(basis));
}

Subspace orthonormalize(const DenseMatrix& raw_basis) {
  const std::size_t m = raw_basis.rows();
  const std::size_t n = raw_basis.cols();
  if (n == 0 || m == 0) throw Error(ErrorCode::kRankDeficient, "empty basis");
  if (n > m) {
    throw Error(ErrorCode::kRankDeficient, "rank exceeds ambient dimension");
  }

  // Column-major working copy; each column is contiguous.
  std::vector<std::vector<double>> cols(n, std::vector<double>(m));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cols[j][i] = raw_basis(i, j);

  std::vector<std::vector<double>> reflectors;
  std::vector<double> r_diag(n);
  reflectors.reserve(n);

  for (std::size_t k = 0; k < n; ++k) {
    std::size_t pivot = k;
    double best = -1.0;
    for (std::size_t j = k; j < n; ++j) {
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += cols[j][i] * cols[j][i];
      if (s > best) {
        best = s;
        pivot = j;
      }
    }
    std::swap(cols[k], cols[pivot]);

    std::vector<double>& x = cols[k];
    const double norm = std::sqrt(best);
    const double alpha = x[k] >= 0.0 ? -norm : norm;
    r_diag[k] = alpha;

    std::vector<double> v(m, 0.0);
    for (std::size_t i = k; i < m; ++i) v[i] = x[i];
    v[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < m; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 > 0.0) {
      for (std::size_t j = k; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = k; i < m; ++i) s += v[i] * cols[j][i];
        const double f = 2.0 * s / vnorm2;
        for (std::size_t i = k; i < m; ++i) cols[j][i] -= f * v[i];
      }
      const double inv = 1.0 / std::sqrt(vnorm2);
      for (double& vi : v) vi *= inv;
    }
    reflectors.push_back(std::move(v));
  }

  const double lead = std::abs(r_diag[0]);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(std::abs(r_diag[k]) > kRankTolerance * lead) || lead == 0.0) {
      throw Error(ErrorCode::kRankDeficient,
                  "numerical rank " + std::to_string(k) + " < " + std::to_string(n));
    }
  }

  // Q = H_0 ... H_{n-1} [I; 0], applied right to left.
  DenseMatrix q(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> e(m, 0.0);
    e[j] = 1.0;
    for (std::size_t k = n; k-- > 0;) {
      const std::vector<double>& v = reflectors[k];
      double s = 0.0;
      for (std::size_t i = k; i < m; ++i) s += v[i] * e[i];
      for (std::size_t i = k; i < m; ++i) e[i] -= 2.0 * s * v[i];
    }
    const double sign = r_diag[j] < 0.0 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < m; ++i) q(i, j) = sign * e[i];
  }
  return Subspace(std::move(q));
}

double l1_norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s;
}

double l2_norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kShapeMismatch, "dot length");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

Vector matvec(const DenseMatrix& a, const Vector& x) {
  if (a.cols() != x.dim()) {
    throw Error(ErrorCode::kShapeMismatch,
                "matvec " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                    " by " + std::to_string(x.dim()));
  }
  std::vector<double> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = dot(a.row(i), x.values());
  return Vector(std::move(out));
}

Vector matvec_transposed(const DenseMatrix& a, const Vector& x) {
  if (a.rows() != x.dim()) throw Error(ErrorCode::kShapeMismatch, "matvec_transposed");
  std::vector<double> out(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto row = a.row(i);
    const double xi = x[i];
    for (std::size_t j = 0; j < a.cols(); ++j) out[j] += row[j] * xi;
  }
  return Vector(std::move(out));
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw Error(ErrorCode::kShapeMismatch, "matmul");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto arow = a.row(i);
    auto crow = c.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = arow[k];
      const auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Vector operator+(const Vector& x, const Vector& y) {
  if (x.dim() != y.dim()) throw Error(ErrorCode::kShapeMismatch, "vector add");
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = x[i] + y[i];
  return out;
}

Vector operator-(const Vector& x, const Vector& y) {
  if (x.dim() != y.dim()) throw Error(ErrorCode::kShapeMismatch, "vector sub");
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = x[i] - y[i];
  return out;
}

Vector operator*(double c, const Vector& x) {
  Vector out(x.dim());
  for (std::size_t i = 0; i < x.dim(); ++i) out[i] = c * x[i];
  return out;
}

Vector projection_residual(const DenseMatrix& basis, const Vector& x) {
  const Vector coeffs = matvec_transposed(basis, x);
  return x - matvec(basis, coeffs);
}

namespace detail {

void write_u64_le(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
  out.write(bytes, 8);
}

std::uint64_t read_u64_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
    throw Error(ErrorCode::kFormatError, "unexpected end of stream");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void write_f64_le(std::ostream& out, double v) {
  write_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

double read_f64_le(std::istream& in) { return std::bit_cast<double>(read_u64_le(in)); }

}  // namespace detail

void write_dmat(std::ostream& out, const DenseMatrix& m) {
  out.write(kDmatMagic, sizeof(kDmatMagic));
  detail::write_u64_le(out, m.rows());
  detail::write_u64_le(out, m.cols());
  for (double v : m.values()) detail::write_f64_le(out, v);
  if (!out) throw Error(ErrorCode::kIoError, "failed writing DMAT1 block");
}

DenseMatrix read_dmat(std::istream& in) {
  char magic[sizeof(kDmatMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kDmatMagic, sizeof(kDmatMagic)) != 0) {
    throw Error(ErrorCode::kFormatError, "bad DMAT1 magic");
  }
  const std::uint64_t rows = detail::read_u64_le(in);
  const std::uint64_t cols = detail::read_u64_le(in);
  if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32) ||
      rows * cols > (1ull << 34)) {
    throw Error(ErrorCode::kFormatError, "implausible DMAT1 shape");
  }
  std::vector<double> data(rows * cols);
  for (double& v : data) v = detail::read_f64_le(in);
  return DenseMatrix(rows, cols, std::move(data));
}

void save_dmat(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  write_dmat(out, m);
}

DenseMatrix load_dmat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_dmat(in);
}

void write_matrix_csv(std::ostream& out, const DenseMatrix& m) {
  char buf[64];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j > 0) out.put(',');
      const auto res = std::to_chars(buf, buf + sizeof(buf), m(i, j));
      out.write(buf, res.ptr - buf);
    }
    out.put('\n');
  }
  if (!out) throw Error(ErrorCode::kIoError, "failed writing CSV");
}

DenseMatrix read_matrix_csv(std::istream& in) {
  std::vector<double> data;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw Error(ErrorCode::kFormatError,
                    "CSV line " + std::to_string(rows + 1) + ": not a number");
      }
      data.push_back(v);
      ++count;
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw Error(ErrorCode::kFormatError, "CSV: expected ','");
      ++p;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw Error(ErrorCode::kFormatError, "CSV: ragged rows");
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::kFormatError, "CSV: empty matrix");
  return DenseMatrix(rows, cols, std::move(data));
}

void save_matrix_csv(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  write_matrix_csv(out, m);
}

DenseMatrix load_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_matrix_csv(in);
}

DenseMatrix load_matrix(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? load_matrix_csv(path) : load_dmat(path);
}

void save_matrix(const std::filesystem::path& path, const DenseMatrix& m) {
  if (path.extension() == ".csv") {
    save_matrix_csv(path, m);
  } else {
    save_dmat(path, m);
  }
}

}  // namespace l1sq
