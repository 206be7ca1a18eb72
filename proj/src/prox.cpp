#include "auw/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "auw/error.hpp"

namespace auw {

void project_simplex_inplace(std::span<double> v, SimplexWorkspace& ws) {
  if (v.empty()) throw DimensionError("project_simplex: empty vector");
  double sum = 0.0;
  bool nonneg = true;
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError("project_simplex: non-finite input");
    sum += x;
    nonneg = nonneg && x >= 0.0;
  }
  // Points already in the simplex (up to summation rounding) are fixed points;
  // returning them untouched makes the projection exactly idempotent.
  const double rounding = 4.0 * static_cast<double>(v.size()) * std::numeric_limits<double>::epsilon();
  if (nonneg && std::abs(sum - 1.0) <= rounding) return;

  ws.sorted.assign(v.begin(), v.end());
  std::sort(ws.sorted.begin(), ws.sorted.end(), std::greater<>());

  double running = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < ws.sorted.size(); ++i) {
    running += ws.sorted[i];
    const double candidate = (running - 1.0) / static_cast<double>(i + 1);
    if (ws.sorted[i] - candidate > 0.0) theta = candidate;
    else break;
  }

  for (double& x : v) x = std::max(x - theta, 0.0);
}

std::vector<double> project_simplex_column(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  SimplexWorkspace ws;
  project_simplex_inplace(out, ws);
  return out;
}

Mat project_simplex_columns(const Mat& m) {
  Mat out = m;
  SimplexWorkspace ws;
  std::vector<double> column(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    for (std::size_t r = 0; r < m.rows(); ++r) column[r] = m(r, c);
    project_simplex_inplace(column, ws);
    out.set_col(c, column);
  }
  return out;
}

Mat project_nonneg(const Mat& m) {
  Mat out = m;
  for (double& v : out.data()) v = std::max(v, 0.0);
  return out;
}

}  // namespace auw
