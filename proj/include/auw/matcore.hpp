#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <vector>

namespace auw {

/// Dense row-major matrix of doubles.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Mat identity(std::size_t n);
  static Mat diag(std::span<const double> values);
  /// Builds a matrix from nested row lists; all rows must have equal length.
  static Mat from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> col(std::size_t c) const;
  void set_col(std::size_t c, std::span<const double> values);

  /// Columns [start, start + length) as a new matrix.
  Mat col_block(std::size_t start, std::size_t length) const;
  Mat transpose() const;

  bool all_finite() const noexcept;

  /// Value equality (IEEE comparison of each entry).
  bool operator==(const Mat& other) const = default;

  Mat& operator+=(const Mat& other);
  Mat& operator-=(const Mat& other);
  Mat& operator*=(double s);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Mat operator+(Mat a, const Mat& b);
Mat operator-(Mat a, const Mat& b);
Mat operator*(double s, Mat a);

/// a * b
Mat matmul(const Mat& a, const Mat& b);
/// aᵀ * b
Mat matmul_tn(const Mat& a, const Mat& b);
/// a * bᵀ
Mat matmul_nt(const Mat& a, const Mat& b);

/// Frobenius inner product ⟨a, b⟩.
double inner(const Mat& a, const Mat& b);
double frobenius_sq(const Mat& m);
double frobenius_norm(const Mat& m);

/// Concatenates matrices with equal row counts side by side.
Mat hconcat(std::span<const Mat> blocks);

/// Byte-level equality, distinguishing -0.0 from 0.0 and comparing NaN payloads.
bool bitwise_equal(const Mat& a, const Mat& b) noexcept;

struct ColumnRange {
  std::size_t start = 0;
  std::size_t length = 0;
  bool operator==(const ColumnRange&) const = default;
};

/// Contiguous, disjoint column ranges covering [0, total).
struct BlockPartition {
  std::size_t total = 0;
  std::vector<ColumnRange> ranges;

  std::size_t omega_count() const noexcept { return ranges.size(); }
};

/// Splits `total` columns into `omega` contiguous groups whose lengths differ
/// by at most one; the first `total % omega` groups get the extra column.
BlockPartition partition_columns(std::size_t total, std::size_t omega);
/// Uses the given group lengths verbatim (each ≥ 1, summing to `total`).
BlockPartition partition_columns(std::size_t total, std::span<const std::size_t> lengths);

/// Splits the columns of `m` according to `part`.
std::vector<Mat> split_columns(const Mat& m, const BlockPartition& part);

inline constexpr double kSpectralTol = 1e-10;
inline constexpr std::size_t kSpectralMaxIter = 1000;

/// Largest singular value of `m` by power iteration on mᵀm, started from the
/// normalized all-ones vector. Stops once the Rayleigh quotient changes by
/// less than `tol` relative.
double spectral_norm(const Mat& m, double tol = kSpectralTol,
                     std::size_t max_iter = kSpectralMaxIter);

// FMAT: "FMAT", u32 version=1, u64 rows, u64 cols, rows*cols f64, all LE.
inline constexpr std::uint32_t kFmatVersion = 1;
inline constexpr std::size_t kFmatHeaderBytes = 24;

std::vector<std::uint8_t> encode_fmat(const Mat& m);
Mat decode_fmat(std::span<const std::uint8_t> bytes);
void write_fmat(const std::filesystem::path& path, const Mat& m);
Mat read_fmat(const std::filesystem::path& path);

/// Comma separated, one row per line, shortest round-trip decimal form.
void write_csv(const std::filesystem::path& path, const Mat& m);
Mat read_csv(const std::filesystem::path& path);

}  // namespace auw
