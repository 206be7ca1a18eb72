#include "auw/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "auw/error.hpp"

namespace auw {

namespace {

void check_shapes(const DataBlock& y, const AbundanceBlock& a, const EndmemberMatrix& m) {
  const Mat& Y = y.y;
  const Mat& A = a.a;
  const Mat& M = m.m;
  if (M.rows() != Y.rows() || M.cols() != A.rows() || A.cols() != Y.cols()) {
    throw DimensionError(fmt::format("shape mismatch: Y {}x{}, M {}x{}, A {}x{}", Y.rows(), Y.cols(),
                                     M.rows(), M.cols(), A.rows(), A.cols()));
  }
}

void check_block_counts(std::span<const DataBlock> y, std::span<const AbundanceBlock> a) {
  if (y.size() != a.size() || y.empty()) {
    throw DimensionError(fmt::format("{} data blocks vs {} abundance blocks", y.size(), a.size()));
  }
}

}  // namespace

bool simplex_feasible(const Mat& a, double tol) {
  for (std::size_t c = 0; c < a.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
      const double v = a(r, c);
      if (!(v >= 0.0)) return false;
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

bool nonnegative(const Mat& m) {
  return std::all_of(m.data().begin(), m.data().end(), [](double v) { return v >= 0.0; });
}

bool outside_unit_range(const DataBlock& y) {
  return std::any_of(y.y.data().begin(), y.y.data().end(), [](double v) { return v < 0.0 || v > 1.0; });
}

Mat residual(const DataBlock& y, const AbundanceBlock& a, const EndmemberMatrix& m) {
  check_shapes(y, a, m);
  Mat r = matmul(m.m, a.a);
  r -= y.y;
  return r;
}

double fit_block(const DataBlock& y, const AbundanceBlock& a, const EndmemberMatrix& m) {
  return 0.5 * frobenius_sq(residual(y, a, m));
}

ObjectiveValue objective(std::span<const DataBlock> y, std::span<const AbundanceBlock> a,
                         const EndmemberMatrix& m) {
  check_block_counts(y, a);
  bool feasible = nonnegative(m.m);
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    total += fit_block(y[i], a[i], m);
    feasible = feasible && simplex_feasible(a[i].a);
  }
  if (!feasible) return {std::numeric_limits<double>::infinity(), false};
  return {total, true};
}

Mat grad_a(const DataBlock& y, const AbundanceBlock& a, const EndmemberMatrix& m) {
  return matmul_tn(m.m, residual(y, a, m));
}

Mat grad_m(std::span<const DataBlock> y, std::span<const AbundanceBlock> a, const EndmemberMatrix& m) {
  check_block_counts(y, a);
  Mat g(m.m.rows(), m.m.cols());
  for (std::size_t i = 0; i < y.size(); ++i) g += matmul_nt(residual(y[i], a[i], m), a[i].a);
  return g;
}

double lipschitz_a(const EndmemberMatrix& m) {
  return std::max(spectral_norm(matmul_tn(m.m, m.m)), kLipschitzFloor);
}

double lipschitz_m(std::span<const AbundanceBlock> a) {
  if (a.empty()) throw DimensionError("lipschitz_m: no abundance blocks");
  Mat gram(a.front().a.rows(), a.front().a.rows());
  for (const auto& block : a) gram += matmul_nt(block.a, block.a);
  return std::max(spectral_norm(gram), kLipschitzFloor);
}

}  // namespace auw
