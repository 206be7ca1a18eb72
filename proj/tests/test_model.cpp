#include <cmath>
#include <random>

#include "auw/error.hpp"
#include "auw/model.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace auw;

namespace {

double max_rel_err(const Mat& got, const Mat& ref) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i) {
    num = std::max(num, std::abs(got.data()[i] - ref.data()[i]));
    den = std::max(den, std::abs(ref.data()[i]));
  }
  return num / std::max(den, 1e-300);
}

}  // namespace

TEST_CASE("fit_block of a perfect reconstruction is zero") {
  Mat m = Mat::from_rows({{1, 0.5}, {0.2, 1}, {0.3, 0.3}});
  Mat a = Mat::from_rows({{0.4, 1}, {0.6, 0}});
  CHECK(fit_block({matmul(m, a)}, {a}, {m}) == 0.0);
}

TEST_CASE("fit_block with zero endmembers is half the data energy") {
  Mat a = Mat::from_rows({{1, 0}, {0, 1}});
  CHECK(fit_block({Mat(2, 2, 1.0)}, {a}, {Mat(2, 2, 0.0)}) == 2.0);
}

TEST_CASE("fit_block matches a triple loop") {
  std::mt19937_64 rng(4);
  Mat m = oracle::random_mat(4, 3, rng, 0, 1);
  Mat a = oracle::random_simplex_columns(3, 5, rng);
  Mat y = oracle::random_mat(4, 5, rng);
  CHECK(std::abs(fit_block({y}, {a}, {m}) - oracle::half_residual_sq(y, m, a)) < 1e-12);
  CHECK_THROWS_AS(fit_block({oracle::random_mat(3, 5, rng)}, {a}, {m}), DimensionError);
}

TEST_CASE("objective sums blocks and flags infeasibility") {
  std::mt19937_64 rng(8);
  Mat m = oracle::random_mat(4, 3, rng, 0, 1);
  std::vector<DataBlock> y;
  std::vector<AbundanceBlock> a;
  double sum = 0.0;
  for (WorkerId w = 0; w < 3; ++w) {
    a.push_back({oracle::random_simplex_columns(3, 6, rng), w});
    y.push_back({oracle::random_mat(4, 6, rng), w});
    sum += fit_block(y.back(), a.back(), {m});
  }
  ObjectiveValue v = objective(y, a, {m});
  CHECK(v.feasible);
  CHECK(v.value == doctest::Approx(sum).epsilon(1e-14));

  std::vector<DataBlock> exact{{matmul(m, a[0].a), 0}};
  CHECK(objective(exact, std::span(a).first(1), {m}).value == 0.0);

  a[1].a(0, 2) += 0.5;  // column sums to 1.5
  ObjectiveValue bad = objective(y, a, {m});
  CHECK_FALSE(bad.feasible);
  CHECK(std::isinf(bad.value));

  a[1].a(0, 2) -= 0.5;
  Mat neg = m;
  neg(0, 0) = -1e-3;
  CHECK_FALSE(objective(y, a, {neg}).feasible);
}

TEST_CASE("grad_a examples") {
  Mat m = Mat::from_rows({{1, 0.5}, {0.2, 1}});
  Mat a = Mat::from_rows({{0.3}, {0.7}});
  Mat g = grad_a({matmul(m, a)}, {a}, {m});
  CHECK(frobenius_norm(g) == 0.0);

  Mat i2 = Mat::identity(2);
  Mat g2 = grad_a({Mat(2, 1, 0.0)}, {Mat::from_rows({{1}, {0}})}, {i2});
  CHECK(g2 == Mat::from_rows({{1}, {0}}));
}

TEST_CASE("grad_m examples") {
  Mat m = Mat::from_rows({{1, 0.5, 0}, {0.2, 1, 0.1}});
  Mat a = Mat::identity(3);
  std::vector<AbundanceBlock> ab{{a, 0}};
  std::vector<DataBlock> exact{{matmul(m, a), 0}};
  CHECK(frobenius_norm(grad_m(exact, ab, {m})) == 0.0);

  Mat y = Mat::from_rows({{0.3, 0.1, 0.2}, {0.4, 0.4, 0.9}});
  std::vector<DataBlock> yb{{y, 0}};
  CHECK(grad_m(yb, ab, {m}) == m - y);
}

TEST_CASE("gradients match central differences") {
  std::mt19937_64 rng(21);
  const double h = 1e-6;
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_int_distribution<std::size_t> dim(2, 6);
    const std::size_t l = dim(rng), r = dim(rng), n = dim(rng);
    Mat m = oracle::random_mat(l, r, rng, 0, 1);
    std::vector<DataBlock> y{{oracle::random_mat(l, n, rng), 0}, {oracle::random_mat(l, n + 1, rng), 1}};
    std::vector<AbundanceBlock> a{{oracle::random_simplex_columns(r, n, rng), 0},
                                  {oracle::random_simplex_columns(r, n + 1, rng), 1}};

    auto fa = [&](const Mat& x) { return oracle::half_residual_sq(y[0].y, m, x); };
    CHECK(max_rel_err(grad_a(y[0], a[0], {m}), oracle::central_difference(fa, a[0].a, h)) < 1e-6);

    auto fm = [&](const Mat& x) {
      return oracle::half_residual_sq(y[0].y, x, a[0].a) + oracle::half_residual_sq(y[1].y, x, a[1].a);
    };
    CHECK(max_rel_err(grad_m(y, a, {m}), oracle::central_difference(fm, m, h)) < 1e-6);
  }
}

TEST_CASE("lipschitz_a examples") {
  CHECK(lipschitz_a({Mat::identity(3)}) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> d{2, 1};
  CHECK(lipschitz_a({Mat::diag(d)}) == doctest::Approx(4.0).epsilon(1e-10));
  CHECK(lipschitz_a({Mat(3, 2, 0.0)}) == kLipschitzFloor);

  std::mt19937_64 rng(6);
  Mat m = oracle::random_mat(7, 3, rng, 0, 1);
  const double s = oracle::singular_values(m)[0];
  CHECK(std::abs(lipschitz_a({m}) - s * s) < 1e-8);
}

TEST_CASE("lipschitz_m examples") {
  std::vector<AbundanceBlock> one{{Mat::identity(3), 0}};
  CHECK(lipschitz_m(one) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<AbundanceBlock> two{{Mat::identity(3), 0}, {Mat::identity(3), 1}};
  CHECK(lipschitz_m(two) == doctest::Approx(2.0).epsilon(1e-12));

  std::mt19937_64 rng(9);
  std::vector<AbundanceBlock> blocks{{oracle::random_simplex_columns(3, 20, rng), 0},
                                     {oracle::random_simplex_columns(3, 15, rng), 1}};
  const double s = oracle::singular_values(hconcat(std::vector<Mat>{blocks[0].a, blocks[1].a}))[0];
  CHECK(std::abs(lipschitz_m(blocks) - s * s) < 1e-8);
}

TEST_CASE("feasibility predicates") {
  CHECK(simplex_feasible(Mat::from_rows({{0.5, 1}, {0.5, 0}})));
  CHECK_FALSE(simplex_feasible(Mat::from_rows({{0.5, 1.1}, {0.5, -0.1}})));
  CHECK_FALSE(simplex_feasible(Mat::from_rows({{0.5}, {0.6}})));
  CHECK(nonnegative(Mat(2, 2, 0.0)));
  CHECK_FALSE(nonnegative(Mat(2, 2, -1e-300)));
  CHECK(outside_unit_range({Mat(1, 1, 1.5)}));
  CHECK_FALSE(outside_unit_range({Mat(1, 1, 0.5)}));
}
