#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "auw/kv.hpp"
#include "auw/matcore.hpp"

namespace auw {

/// Angle between two spectra in degrees. Throws NumericError for a zero vector.
double spectral_angle_deg(std::span<const double> a, std::span<const double> b);

/// Matches estimated endmembers to true ones: `perm[e]` is the true index of
/// estimated column e, `angles_deg[e]` the angle of that pair.
struct Alignment {
  std::vector<std::size_t> perm;
  std::vector<double> angles_deg;
};

inline constexpr std::size_t kExhaustiveAlignMax = 8;

/// Minimum-cost assignment on a square cost matrix (Hungarian method).
/// Returns row → column.
std::vector<std::size_t> solve_assignment(const Mat& cost);

/// Permutation minimizing the mean spectral angle.
Alignment align(const Mat& m_true, const Mat& m_est);

/// Mean aligned spectral angle between endmember columns, degrees.
double asam_m(const Mat& m_true, const Mat& m_est, const Alignment& al);
/// Mean angle between each pixel and its reconstruction M̂â, degrees.
double asam_y(std::span<const Mat> y, const Mat& m_est, std::span<const Mat> a_est);
/// (1/(ΩRN)) Σ_ω ‖A_ω − Â_ω‖² with the rows of Â reordered by `al`.
double gmse(std::span<const Mat> a_true, std::span<const Mat> a_est, const Alignment& al);
/// (1/(ΩLN)) Σ_ω ‖Y_ω − M̂Â_ω‖².
double re(std::span<const Mat> y, const Mat& m_est, std::span<const Mat> a_est);

struct MetricsReport {
  double asam_m_deg = 0.0;
  double gmse = 0.0;
  double re = 0.0;
  double asam_y_deg = 0.0;
  std::vector<std::size_t> perm;

  KeyValues to_key_values() const;
  static const char* csv_header();
  std::string csv_row() const;
};

MetricsReport evaluate(const Mat& m_true, std::span<const Mat> a_true, std::span<const Mat> y, const Mat& m_est,
                       std::span<const Mat> a_est);

}  // namespace auw
