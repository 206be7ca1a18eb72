#include "auw/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "auw/error.hpp"

namespace auw {

double spectral_angle_deg(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError(fmt::format("spectra of length {} and {}", a.size(), b.size()));
  double aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw NumericError("spectral angle of a zero vector is undefined");
  // 2·atan2(‖u − v‖, ‖u + v‖) on the unit vectors; acos loses precision near 0°.
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  double diff = 0.0, sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double u = a[i] / na, v = b[i] / nb;
    diff += (u - v) * (u - v);
    sum += (u + v) * (u + v);
  }
  return 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum)) * 180.0 / std::numbers::pi;
}

std::vector<std::size_t> solve_assignment(const Mat& cost) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw DimensionError("assignment cost matrix must be square");
  // Shortest augmenting path with potentials; 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

Alignment align(const Mat& m_true, const Mat& m_est) {
  if (m_true.rows() != m_est.rows() || m_true.cols() != m_est.cols()) {
    throw DimensionError(fmt::format("cannot align {}x{} with {}x{}", m_est.rows(), m_est.cols(), m_true.rows(),
                                     m_true.cols()));
  }
  const std::size_t r = m_true.cols();
  Mat cost(r, r);
  for (std::size_t e = 0; e < r; ++e) {
    const auto est = m_est.col(e);
    for (std::size_t t = 0; t < r; ++t) cost(e, t) = spectral_angle_deg(est, m_true.col(t));
  }

  Alignment al;
  if (r <= kExhaustiveAlignMax) {
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double total = 0.0;
      for (std::size_t e = 0; e < r; ++e) total += cost(e, perm[e]);
      if (total < best) {
        best = total;
        al.perm = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    al.perm = solve_assignment(cost);
  }
  for (std::size_t e = 0; e < r; ++e) al.angles_deg.push_back(cost(e, al.perm[e]));
  return al;
}

double asam_m(const Mat& m_true, const Mat& m_est, const Alignment& al) {
  const std::size_t r = m_est.cols();
  if (al.perm.size() != r || m_true.cols() != r) throw DimensionError("alignment does not match endmember count");
  double sum = 0.0;
  for (std::size_t e = 0; e < r; ++e) sum += spectral_angle_deg(m_est.col(e), m_true.col(al.perm[e]));
  return sum / static_cast<double>(r);
}

double asam_y(std::span<const Mat> y, const Mat& m_est, std::span<const Mat> a_est) {
  if (y.size() != a_est.size()) throw DimensionError("block count mismatch");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t w = 0; w < y.size(); ++w) {
    const Mat rec = matmul(m_est, a_est[w]);
    if (rec.rows() != y[w].rows() || rec.cols() != y[w].cols()) throw DimensionError("reconstruction shape mismatch");
    for (std::size_t j = 0; j < rec.cols(); ++j) sum += spectral_angle_deg(y[w].col(j), rec.col(j));
    count += rec.cols();
  }
  if (count == 0) throw DimensionError("no pixels");
  return sum / static_cast<double>(count);
}

double gmse(std::span<const Mat> a_true, std::span<const Mat> a_est, const Alignment& al) {
  if (a_true.size() != a_est.size() || a_true.empty()) throw DimensionError("block count mismatch");
  double sum = 0.0, count = 0.0;
  for (std::size_t w = 0; w < a_true.size(); ++w) {
    const Mat& t = a_true[w];
    const Mat& e = a_est[w];
    if (t.rows() != e.rows() || t.cols() != e.cols() || al.perm.size() != e.rows()) {
      throw DimensionError("abundance shape mismatch");
    }
    for (std::size_t r = 0; r < e.rows(); ++r) {
      const auto te = t.row(al.perm[r]);
      const auto ee = e.row(r);
      for (std::size_t j = 0; j < e.cols(); ++j) sum += (te[j] - ee[j]) * (te[j] - ee[j]);
    }
    count += static_cast<double>(e.size());
  }
  return sum / count;
}

double re(std::span<const Mat> y, const Mat& m_est, std::span<const Mat> a_est) {
  if (y.size() != a_est.size() || y.empty()) throw DimensionError("block count mismatch");
  double sum = 0.0, count = 0.0;
  for (std::size_t w = 0; w < y.size(); ++w) {
    Mat r = matmul(m_est, a_est[w]);
    if (r.rows() != y[w].rows() || r.cols() != y[w].cols()) throw DimensionError("reconstruction shape mismatch");
    r -= y[w];
    sum += frobenius_sq(r);
    count += static_cast<double>(r.size());
  }
  return sum / count;
}

KeyValues MetricsReport::to_key_values() const {
  std::string p;
  for (std::size_t i = 0; i < perm.size(); ++i) p += fmt::format("{}{}", i ? "," : "", perm[i] + 1);
  return {{"asam_m_deg", format_double(asam_m_deg)},
          {"gmse", format_double(gmse)},
          {"gmse_x1e3", format_double(gmse * 1e3)},
          {"re", format_double(re)},
          {"asam_y_deg", format_double(asam_y_deg)},
          {"alignment", p}};
}

const char* MetricsReport::csv_header() { return "asam_m_deg,gmse,gmse_x1e3,re,asam_y_deg"; }

std::string MetricsReport::csv_row() const {
  return fmt::format("{},{},{},{},{}", format_double(asam_m_deg), format_double(gmse), format_double(gmse * 1e3),
                     format_double(re), format_double(asam_y_deg));
}

MetricsReport evaluate(const Mat& m_true, std::span<const Mat> a_true, std::span<const Mat> y, const Mat& m_est,
                       std::span<const Mat> a_est) {
  const Alignment al = align(m_true, m_est);
  MetricsReport rep;
  rep.perm = al.perm;
  rep.asam_m_deg = asam_m(m_true, m_est, al);
  rep.gmse = gmse(a_true, a_est, al);
  rep.re = re(y, m_est, a_est);
  rep.asam_y_deg = asam_y(y, m_est, a_est);
  return rep;
}

}  // namespace auw
