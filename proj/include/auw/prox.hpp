#pragma once

#include <span>
#include <vector>

#include "auw/matcore.hpp"

namespace auw {

/// Scratch space for the sort-based simplex projection; reuse across columns
/// to avoid reallocating.
struct SimplexWorkspace {
  std::vector<double> sorted;
};

/// Euclidean projection of `v` onto {x ⪰ 0, Σx = 1}, in place.
///
/// Sort-and-threshold: with u the values sorted in decreasing order, the
/// support is the largest ρ with u_ρ − (Σ_{i≤ρ} u_i − 1)/ρ > 0 and every
/// coordinate becomes max(v_i − θ, 0) for θ = (Σ_{i≤ρ} u_i − 1)/ρ.
/// Coordinates exactly at the threshold map to 0.
void project_simplex_inplace(std::span<double> v, SimplexWorkspace& ws);

std::vector<double> project_simplex_column(std::span<const double> v);

/// Projects every column of an R×N matrix onto the simplex.
Mat project_simplex_columns(const Mat& m);

/// Elementwise max(·, 0).
Mat project_nonneg(const Mat& m);

}  // namespace auw
