#include "auw/matcore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "auw/bytes.hpp"
#include "auw/error.hpp"

namespace auw {

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DimensionError(fmt::format("Mat: {} values for a {}x{} matrix", data_.size(), rows, cols));
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diag(std::span<const double> values) {
  Mat m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

Mat Mat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("Mat::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Mat(r, c, std::move(data));
}

std::vector<double> Mat::col(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Mat::set_col(std::size_t c, std::span<const double> values) {
  if (values.size() != rows_) throw DimensionError("Mat::set_col: length mismatch");
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

Mat Mat::col_block(std::size_t start, std::size_t length) const {
  if (start + length > cols_) throw DimensionError("Mat::col_block: range out of bounds");
  Mat out(rows_, length);
  for (std::size_t r = 0; r < rows_; ++r) {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_ + start), length,
                out.data_.begin() + static_cast<std::ptrdiff_t>(r * length));
  }
  return out;
}

Mat Mat::transpose() const {
  Mat t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Mat::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(fmt::format("{}: {}x{} vs {}x{}", what, a.rows(), a.cols(), b.rows(), b.cols()));
  }
}

}  // namespace

Mat& Mat::operator+=(const Mat& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Mat& Mat::operator-=(const Mat& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Mat operator+(Mat a, const Mat& b) { return a += b; }
Mat operator-(Mat a, const Mat& b) { return a -= b; }
Mat operator*(double s, Mat a) { return a *= s; }

Mat matmul(const Mat& a, const Mat& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError(fmt::format("matmul: {}x{} * {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  }
  Mat out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      auto b_row = b.row(p);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError(fmt::format("matmul_tn: ({}x{})ᵀ * {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  }
  Mat out(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    auto a_row = a.row(p);
    auto b_row = b.row(p);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double api = a_row[i];
      if (api == 0.0) continue;
      auto out_row = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += api * b_row[j];
    }
  }
  return out;
}

Mat matmul_nt(const Mat& a, const Mat& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError(fmt::format("matmul_nt: {}x{} * ({}x{})ᵀ", a.rows(), a.cols(), b.rows(), b.cols()));
  }
  Mat out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto a_row = a.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) {
      auto b_row = b.row(j);
      out(i, j) = std::inner_product(a_row.begin(), a_row.end(), b_row.begin(), 0.0);
    }
  }
  return out;
}

double inner(const Mat& a, const Mat& b) {
  require_same_shape(a, b, "inner");
  return std::inner_product(a.data().begin(), a.data().end(), b.data().begin(), 0.0);
}

double frobenius_sq(const Mat& m) { return inner(m, m); }

double frobenius_norm(const Mat& m) { return std::sqrt(frobenius_sq(m)); }

Mat hconcat(std::span<const Mat> blocks) {
  if (blocks.empty()) return {};
  const std::size_t rows = blocks.front().rows();
  std::size_t cols = 0;
  for (const Mat& b : blocks) {
    if (b.rows() != rows) throw DimensionError("hconcat: row counts differ");
    cols += b.cols();
  }
  Mat out(rows, cols);
  std::size_t offset = 0;
  for (const Mat& b : blocks) {
    for (std::size_t r = 0; r < rows; ++r)
      std::copy(b.row(r).begin(), b.row(r).end(), out.row(r).begin() + static_cast<std::ptrdiff_t>(offset));
    offset += b.cols();
  }
  return out;
}

bool bitwise_equal(const Mat& a, const Mat& b) noexcept {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.size() == 0 || std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(double)) == 0);
}

BlockPartition partition_columns(std::size_t total, std::size_t omega) {
  if (omega == 0 || omega > total) {
    throw PartitionError(fmt::format("cannot split {} columns into {} groups", total, omega));
  }
  std::vector<std::size_t> lengths(omega, total / omega);
  for (std::size_t i = 0; i < total % omega; ++i) ++lengths[i];
  return partition_columns(total, lengths);
}

BlockPartition partition_columns(std::size_t total, std::span<const std::size_t> lengths) {
  if (lengths.empty() || lengths.size() > total) {
    throw PartitionError(fmt::format("cannot split {} columns into {} groups", total, lengths.size()));
  }
  BlockPartition part{total, {}};
  std::size_t start = 0;
  for (std::size_t len : lengths) {
    if (len == 0) throw PartitionError("partition group of length 0");
    part.ranges.push_back({start, len});
    start += len;
  }
  if (start != total) {
    throw PartitionError(fmt::format("group lengths sum to {}, expected {}", start, total));
  }
  return part;
}

std::vector<Mat> split_columns(const Mat& m, const BlockPartition& part) {
  if (part.total != m.cols()) throw DimensionError("split_columns: partition does not match column count");
  std::vector<Mat> out;
  out.reserve(part.omega_count());
  for (const auto& r : part.ranges) out.push_back(m.col_block(r.start, r.length));
  return out;
}

namespace {

// One sweep v <- mᵀ(m v); returns the Rayleigh quotient vᵀ mᵀm v for unit v.
double gram_apply(const Mat& m, std::vector<double>& v, std::vector<double>& mv) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    mv[r] = std::inner_product(row.begin(), row.end(), v.begin(), 0.0);
  }
  const double rayleigh = std::inner_product(mv.begin(), mv.end(), mv.begin(), 0.0);
  std::fill(v.begin(), v.end(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) v[c] += row[c] * mv[r];
  }
  return rayleigh;
}

double power_iterate(const Mat& m, std::vector<double> v, double tol, std::size_t max_iter) {
  std::vector<double> mv(m.rows());
  double lambda = 0.0;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    if (norm == 0.0) return 0.0;
    for (double& x : v) x /= norm;
    const double next = gram_apply(m, v, mv);
    const bool done = std::abs(next - lambda) <= tol * next;
    lambda = next;
    if (done) break;
  }
  return lambda;
}

}  // namespace

double spectral_norm(const Mat& m, double tol, std::size_t max_iter) {
  if (m.empty()) throw DimensionError("spectral_norm: empty matrix");
  if (!m.all_finite()) throw NumericError("spectral_norm: non-finite entry");

  double lambda = power_iterate(m, std::vector<double>(m.cols(), 1.0), tol, max_iter);
  if (lambda == 0.0 && frobenius_sq(m) > 0.0) {
    // Ones happened to be orthogonal to the row space; retry from a fixed ramp.
    std::vector<double> ramp(m.cols());
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i + 1) * ((i % 2) ? -1.0 : 1.0);
    lambda = power_iterate(m, std::move(ramp), tol, max_iter);
  }
  return std::sqrt(lambda);
}

std::vector<std::uint8_t> encode_fmat(const Mat& m) {
  std::vector<std::uint8_t> out;
  out.reserve(kFmatHeaderBytes + m.size() * 8);
  out.insert(out.end(), {'F', 'M', 'A', 'T'});
  bytes::put_u32(out, kFmatVersion);
  bytes::put_u64(out, m.rows());
  bytes::put_u64(out, m.cols());
  for (double v : m.data()) bytes::put_f64(out, v);
  return out;
}

Mat decode_fmat(std::span<const std::uint8_t> in) {
  using Kind = IoError::Kind;
  if (in.size() < 4) throw IoError(Kind::kTruncated, "FMAT: file shorter than magic");
  if (std::memcmp(in.data(), "FMAT", 4) != 0) throw IoError(Kind::kBadMagic, "FMAT: bad magic");
  bytes::Reader rd(in.subspan(4));
  auto version = rd.u32();
  if (!version) throw IoError(Kind::kTruncated, "FMAT: truncated header");
  if (*version != kFmatVersion) {
    throw IoError(Kind::kVersionMismatch, fmt::format("FMAT: unsupported version {}", *version));
  }
  auto rows = rd.u64();
  auto cols = rd.u64();
  if (!rows || !cols) throw IoError(Kind::kTruncated, "FMAT: truncated header");
  auto payload = bytes::payload_bytes(*rows, *cols);
  if (!payload || rd.remaining() < *payload) throw IoError(Kind::kTruncated, "FMAT: truncated payload");
  if (rd.remaining() > *payload) throw IoError(Kind::kParse, "FMAT: trailing bytes after payload");

  std::vector<double> data(*rows * *cols);
  for (double& v : data) {
    v = *rd.f64();
    if (!std::isfinite(v)) throw IoError(Kind::kNonFinite, "FMAT: non-finite entry");
  }
  return Mat(*rows, *cols, std::move(data));
}

void write_fmat(const std::filesystem::path& path, const Mat& m) {
  const auto buf = encode_fmat(m);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(IoError::Kind::kOpen, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(IoError::Kind::kOpen, "write failed: " + path.string());
}

Mat read_fmat(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::kOpen, "cannot open " + path.string());
  std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_fmat(buf);
}

void write_csv(const std::filesystem::path& path, const Mat& m) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(IoError::Kind::kOpen, "cannot open " + path.string() + " for writing");
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out << fmt::format("{}\n", fmt::join(m.row(r), ","));
  }
}

Mat read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Kind::kOpen, "cannot open " + path.string());
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw IoError(IoError::Kind::kParse, fmt::format("{}:{}: bad number '{}'", path.string(), rows + 1, cell));
      }
      if (!std::isfinite(v)) throw IoError(IoError::Kind::kNonFinite, "CSV: non-finite entry");
      data.push_back(v);
      ++count;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw IoError(IoError::Kind::kParse, fmt::format("{}: ragged row {}", path.string(), rows + 1));
    ++rows;
  }
  return Mat(rows, cols, std::move(data));
}

}  // namespace auw
