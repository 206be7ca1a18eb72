#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "auw/error.hpp"
#include "auw/matcore.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace auw;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "auw_test_matcore";
  fs::create_directories(dir);
  return dir / name;
}

IoError::Kind decode_kind(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_fmat(bytes);
  } catch (const IoError& e) {
    return e.kind();
  }
  FAIL("decode_fmat accepted malformed bytes");
  return IoError::Kind::kOpen;
}

}  // namespace

TEST_CASE("construction checks the data length") {
  CHECK_THROWS_AS(Mat(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(Mat::from_rows({{1, 2}, {3}}), DimensionError);
  Mat m = Mat::from_rows({{1, 2, 3}, {4, 5, 6}});
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6);
  CHECK(m.col(1) == std::vector<double>{2, 5});
}

TEST_CASE("products agree with their transposed forms") {
  std::mt19937_64 rng(3);
  Mat a = oracle::random_mat(4, 3, rng);
  Mat b = oracle::random_mat(4, 5, rng);
  Mat c = oracle::random_mat(5, 3, rng);
  Mat tn = matmul_tn(a, b);
  Mat ref = matmul(a.transpose(), b);
  for (std::size_t i = 0; i < tn.size(); ++i) CHECK(tn.data()[i] == doctest::Approx(ref.data()[i]).epsilon(1e-14));
  Mat d = oracle::random_mat(6, 4, rng);
  Mat nt = matmul_nt(b.transpose(), d);
  Mat ref2 = matmul(b.transpose(), d.transpose());
  for (std::size_t i = 0; i < nt.size(); ++i) CHECK(nt.data()[i] == doctest::Approx(ref2.data()[i]).epsilon(1e-14));
  CHECK_THROWS_AS(matmul(a, b), DimensionError);
  CHECK_THROWS_AS(matmul_tn(a, c), DimensionError);
  CHECK_THROWS_AS(matmul_nt(a, b), DimensionError);
}

TEST_CASE("frobenius and inner") {
  Mat m = Mat::from_rows({{3, 0}, {0, 4}});
  CHECK(frobenius_sq(m) == 25.0);
  CHECK(frobenius_norm(m) == 5.0);
  CHECK(inner(m, Mat::identity(2)) == 7.0);
}

TEST_CASE("hconcat undoes split_columns") {
  std::mt19937_64 rng(5);
  Mat m = oracle::random_mat(3, 11, rng);
  auto blocks = split_columns(m, partition_columns(11, 4));
  REQUIRE(blocks.size() == 4);
  CHECK(bitwise_equal(hconcat(blocks), m));
}

TEST_CASE("bitwise_equal separates signed zeros") {
  Mat a(1, 1, 0.0), b(1, 1, -0.0);
  CHECK(a == b);
  CHECK_FALSE(bitwise_equal(a, b));
}

TEST_CASE("even partition of 10000 columns into 3") {
  BlockPartition p = partition_columns(10000, 3);
  REQUIRE(p.omega_count() == 3);
  CHECK(p.ranges[0].length == 3334);
  CHECK(p.ranges[1].length == 3333);
  CHECK(p.ranges[2].length == 3333);
}

TEST_CASE("exact partition of 6 columns into 3") {
  BlockPartition p = partition_columns(6, 3);
  CHECK(p.ranges == std::vector<ColumnRange>{{0, 2}, {2, 2}, {4, 2}});
}

TEST_CASE("explicit partition lengths are echoed") {
  std::vector<std::size_t> lengths{2, 3};
  BlockPartition p = partition_columns(5, lengths);
  CHECK(p.ranges == std::vector<ColumnRange>{{0, 2}, {2, 3}});
}

TEST_CASE("partition errors") {
  CHECK_THROWS_AS(partition_columns(2, 3), PartitionError);
  CHECK_THROWS_AS(partition_columns(5, 0), PartitionError);
  std::vector<std::size_t> bad_sum{2, 2};
  CHECK_THROWS_AS(partition_columns(5, bad_sum), PartitionError);
  std::vector<std::size_t> zero{5, 0};
  CHECK_THROWS_AS(partition_columns(5, zero), PartitionError);
}

TEST_CASE("partitions are contiguous and cover every column") {
  for (std::size_t total = 1; total < 40; ++total) {
    for (std::size_t omega = 1; omega <= total; ++omega) {
      BlockPartition p = partition_columns(total, omega);
      std::size_t next = 0, lo = total, hi = 0;
      for (const auto& r : p.ranges) {
        CHECK(r.start == next);
        next += r.length;
        lo = std::min(lo, r.length);
        hi = std::max(hi, r.length);
      }
      CHECK(next == total);
      CHECK(hi - lo <= 1);
    }
  }
}

TEST_CASE("spectral norm of simple matrices") {
  CHECK(spectral_norm(Mat::identity(3)) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> d{3, 1};
  CHECK(spectral_norm(Mat::diag(d)) == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("spectral norm matches the Jacobi SVD oracle") {
  std::mt19937_64 rng(11);
  Mat m = oracle::random_mat(5, 4, rng);
  CHECK(std::abs(spectral_norm(m) - oracle::singular_values(m)[0]) < 1e-8);
  for (int trial = 0; trial < 50; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(1, 12);
    Mat r = oracle::random_mat(dim(rng), dim(rng), rng);
    const double ref = oracle::singular_values(r)[0];
    CHECK(std::abs(spectral_norm(r) - ref) < 1e-8 * std::max(1.0, ref));
  }
}

TEST_CASE("spectral norm errors") {
  CHECK_THROWS_AS(spectral_norm(Mat()), DimensionError);
  Mat m(2, 2, 1.0);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(spectral_norm(m), NumericError);
}

TEST_CASE("FMAT round trip") {
  Mat m = Mat::from_rows({{1, 2}, {3, 4}});
  write_fmat(scratch("m.fmat"), m);
  CHECK(bitwise_equal(read_fmat(scratch("m.fmat")), m));

  Mat empty(0, 0);
  auto bytes = encode_fmat(empty);
  CHECK(bytes.size() == kFmatHeaderBytes);
  Mat back = decode_fmat(bytes);
  CHECK(back.rows() == 0);
  CHECK(back.cols() == 0);
}

TEST_CASE("FMAT failure modes are distinguishable") {
  auto good = encode_fmat(Mat::from_rows({{1, 2}, {3, 4}}));

  auto magic = good;
  std::memcpy(magic.data(), "XXXX", 4);
  CHECK(decode_kind(magic) == IoError::Kind::kBadMagic);

  auto version = good;
  version[4] = 2;
  CHECK(decode_kind(version) == IoError::Kind::kVersionMismatch);

  auto truncated = good;
  truncated.pop_back();
  CHECK(decode_kind(truncated) == IoError::Kind::kTruncated);
  CHECK(decode_kind(std::vector<std::uint8_t>(good.begin(), good.begin() + 10)) == IoError::Kind::kTruncated);

  auto nonfinite = good;
  const double inf = std::numeric_limits<double>::infinity();
  std::memcpy(nonfinite.data() + kFmatHeaderBytes, &inf, sizeof inf);
  CHECK(decode_kind(nonfinite) == IoError::Kind::kNonFinite);

  // A huge declared size must not be trusted.
  auto huge = good;
  for (int i = 8; i < 24; ++i) huge[i] = 0xFF;
  CHECK(decode_kind(huge) == IoError::Kind::kTruncated);

  CHECK_THROWS_AS(read_fmat(scratch("does_not_exist.fmat")), IoError);
}

TEST_CASE("CSV round trip is exact") {
  std::mt19937_64 rng(2);
  Mat m = oracle::random_mat(3, 4, rng);
  write_csv(scratch("m.csv"), m);
  CHECK(bitwise_equal(read_csv(scratch("m.csv")), m));

  std::ofstream(scratch("ragged.csv")) << "1,2\n3\n";
  CHECK_THROWS_AS(read_csv(scratch("ragged.csv")), IoError);
  std::ofstream(scratch("junk.csv")) << "1,abc\n";
  CHECK_THROWS_AS(read_csv(scratch("junk.csv")), IoError);
}
