#include <cmath>
#include <numbers>
#include <random>

#include "auw/error.hpp"
#include "auw/metrics.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace auw;

namespace {

Mat permute_cols(const Mat& m, const std::vector<std::size_t>& src) {
  Mat out(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j) out.set_col(j, m.col(src[j]));
  return out;
}

Mat permute_rows(const Mat& m, const std::vector<std::size_t>& src) {
  return permute_cols(m.transpose(), src).transpose();
}

}  // namespace

TEST_CASE("spectral angle") {
  std::vector<double> a{1, 2, 3};
  CHECK(spectral_angle_deg(a, a) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(spectral_angle_deg(a, std::vector<double>{2, 4, 6}) == doctest::Approx(0.0));
  CHECK(spectral_angle_deg(std::vector<double>{1, 0}, std::vector<double>{0, 1}) == doctest::Approx(90.0));
  CHECK_THROWS_AS(spectral_angle_deg(std::vector<double>{0, 0}, std::vector<double>{1, 0}), NumericError);
}

TEST_CASE("alignment of identical and swapped endmembers") {
  std::mt19937_64 rng(71);
  Mat m = oracle::random_mat(8, 3, rng, 0.01, 1);
  Alignment id = align(m, m);
  CHECK(id.perm == std::vector<std::size_t>{0, 1, 2});
  for (double a : id.angles_deg) CHECK(a == doctest::Approx(0.0).epsilon(1e-12));

  Alignment sw = align(m, permute_cols(m, {2, 1, 0}));
  CHECK(sw.perm == std::vector<std::size_t>{2, 1, 0});
  CHECK(asam_m(m, permute_cols(m, {2, 1, 0}), sw) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("alignment matches exhaustive search") {
  std::mt19937_64 rng(73);
  for (std::size_t r = 1; r <= 6; ++r) {
    for (int t = 0; t < 20; ++t) {
      Mat truth = oracle::random_mat(10, r, rng, 0.01, 1);
      Mat est = oracle::random_mat(10, r, rng, 0.01, 1);
      Alignment al = align(truth, est);
      auto best = oracle::exhaustive_alignment(truth, est);
      CHECK(std::abs(asam_m(truth, est, al) - best.mean_angle) < 1e-10);
    }
  }
}

TEST_CASE("Hungarian assignment matches exhaustive search beyond the exhaustive cutoff") {
  std::mt19937_64 rng(79);
  Mat cost = oracle::random_mat(7, 7, rng, 0, 10);
  auto rows = solve_assignment(cost);
  double got = 0.0;
  for (std::size_t i = 0; i < 7; ++i) got += cost(i, rows[i]);
  std::vector<std::size_t> perm{0, 1, 2, 3, 4, 5, 6};
  double best = 1e300;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < 7; ++i) s += cost(i, perm[i]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(got == doctest::Approx(best).epsilon(1e-12));

  Mat truth = oracle::random_mat(20, 10, rng, 0.01, 1);
  std::vector<std::size_t> shuffle{3, 9, 0, 5, 1, 8, 2, 7, 4, 6};
  Alignment al = align(truth, permute_cols(truth, shuffle));
  CHECK(al.perm == shuffle);
}

TEST_CASE("asam_y") {
  std::mt19937_64 rng(83);
  Mat m = oracle::random_mat(6, 3, rng, 0.01, 1);
  std::vector<Mat> a{oracle::random_simplex_columns(3, 5, rng)};
  std::vector<Mat> y{matmul(m, a[0])};
  CHECK(asam_y(y, m, a) == doctest::Approx(0.0).epsilon(1e-10));
  std::vector<Mat> y2{0.5 * y[0]};
  CHECK(asam_y(y2, m, a) == doctest::Approx(0.0).epsilon(1e-10));

  std::vector<Mat> noisy{y[0] + oracle::random_mat(6, 5, rng, 0, 0.1)};
  Mat rec = matmul(m, a[0]);
  double ref = 0.0;
  for (std::size_t n = 0; n < 5; ++n) ref += oracle::angle_deg(noisy[0].col(n), rec.col(n));
  CHECK(std::abs(asam_y(noisy, m, a) - ref / 5.0) < 1e-10);
}

TEST_CASE("gmse") {
  std::mt19937_64 rng(89);
  std::vector<Mat> a{oracle::random_simplex_columns(2, 5, rng)};
  Alignment id{{0, 1}, {0, 0}};
  CHECK(gmse(a, a, id) == 0.0);
  std::vector<Mat> shifted{a[0] + Mat(2, 5, 0.1)};
  CHECK(gmse(a, shifted, id) == doctest::Approx(0.01).epsilon(1e-12));

  std::vector<Mat> t{oracle::random_simplex_columns(3, 7, rng), oracle::random_simplex_columns(3, 4, rng)};
  std::vector<Mat> e{oracle::random_simplex_columns(3, 7, rng), oracle::random_simplex_columns(3, 4, rng)};
  Alignment al{{2, 0, 1}, {0, 0, 0}};
  double s = 0.0;
  for (std::size_t w = 0; w < 2; ++w)
    for (std::size_t r = 0; r < 3; ++r)
      for (std::size_t n = 0; n < t[w].cols(); ++n) s += std::pow(t[w](al.perm[r], n) - e[w](r, n), 2);
  CHECK(std::abs(gmse(t, e, al) - s / (3.0 * 11.0)) < 1e-12);
}

TEST_CASE("re") {
  std::mt19937_64 rng(97);
  Mat m = oracle::random_mat(6, 3, rng, 0, 1);
  std::vector<Mat> a{oracle::random_simplex_columns(3, 5, rng)};
  std::vector<Mat> y{matmul(m, a[0])};
  CHECK(re(y, m, a) == 0.0);
  std::vector<Mat> noisy{y[0] + Mat(6, 5, 0.2)};
  CHECK(re(noisy, m, a) == doctest::Approx(0.04).epsilon(1e-12));
}

TEST_CASE("evaluate is invariant to an endmember permutation") {
  std::mt19937_64 rng(101);
  Mat m = oracle::random_mat(8, 3, rng, 0.01, 1);
  std::vector<Mat> a{oracle::random_simplex_columns(3, 6, rng)};
  std::vector<Mat> y{matmul(m, a[0])};
  MetricsReport perfect = evaluate(m, a, y, m, a);
  CHECK(perfect.asam_m_deg == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(perfect.gmse == 0.0);
  CHECK(perfect.re == 0.0);
  CHECK(perfect.asam_y_deg == doctest::Approx(0.0).epsilon(1e-10));

  Mat m_est = m + oracle::random_mat(8, 3, rng, 0, 0.05);
  std::vector<Mat> a_est{oracle::random_simplex_columns(3, 6, rng)};
  MetricsReport plain = evaluate(m, a, y, m_est, a_est);
  std::vector<std::size_t> p{1, 2, 0};
  std::vector<Mat> a_perm{permute_rows(a_est[0], p)};
  MetricsReport permuted = evaluate(m, a, y, permute_cols(m_est, p), a_perm);
  CHECK(permuted.asam_m_deg == doctest::Approx(plain.asam_m_deg).epsilon(1e-12));
  CHECK(permuted.gmse == doctest::Approx(plain.gmse).epsilon(1e-12));
  CHECK(permuted.re == doctest::Approx(plain.re).epsilon(1e-12));
  CHECK(permuted.asam_y_deg == doctest::Approx(plain.asam_y_deg).epsilon(1e-12));

  KeyValues kv = plain.to_key_values();
  CHECK(kv.count("asam_m_deg") == 1);
  CHECK(kv.count("gmse") == 1);
  CHECK(std::string(MetricsReport::csv_header()).find("gmse") != std::string::npos);
}
