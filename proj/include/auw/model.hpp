#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "auw/matcore.hpp"

namespace auw {

using WorkerId = std::uint32_t;

/// Shared endmember matrix M (bands × endmembers) with the master iteration
/// at which it was produced.
struct EndmemberMatrix {
  Mat m;
  std::uint64_t version = 0;
};

/// Worker-local abundances A_ω (endmembers × pixels).
struct AbundanceBlock {
  Mat a;
  WorkerId worker_id = 0;
};

/// Observed pixels Y_ω (bands × pixels).
struct DataBlock {
  Mat y;
  WorkerId worker_id = 0;
};

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kLipschitzFloor = 1e-12;

/// Every column nonnegative and summing to one within `tol`.
bool simplex_feasible(const Mat& a, double tol = kFeasibilityTol);
bool nonnegative(const Mat& m);

/// True if any entry of a reflectance-like block lies outside [0, 1].
bool outside_unit_range(const DataBlock& y);

/// Residual M A_ω − Y_ω.
Mat residual(const DataBlock& y, const AbundanceBlock& a, const EndmemberMatrix& m);

/// f_ω = ½‖Y_ω − M A_ω‖²_F
double fit_block(const DataBlock& y, const AbundanceBlock& a, const EndmemberMatrix& m);

struct ObjectiveValue {
  double value = 0.0;  ///< +inf when infeasible
  bool feasible = true;
};

/// Ψ = Σ_ω f_ω + indicator terms. Infeasible iterates (beyond kFeasibilityTol
/// for the simplex, any negative entry of M) yield +inf with feasible=false.
ObjectiveValue objective(std::span<const DataBlock> y, std::span<const AbundanceBlock> a,
                         const EndmemberMatrix& m);

/// ∇_{A_ω} f_ω = Mᵀ(M A_ω − Y_ω)
Mat grad_a(const DataBlock& y, const AbundanceBlock& a, const EndmemberMatrix& m);

/// ∇_M F = Σ_ω (M A_ω − Y_ω) A_ωᵀ
Mat grad_m(std::span<const DataBlock> y, std::span<const AbundanceBlock> a, const EndmemberMatrix& m);

/// ‖MᵀM‖ = σ_max(M)², floored at kLipschitzFloor.
double lipschitz_a(const EndmemberMatrix& m);

/// ‖Σ_ω A_ω A_ωᵀ‖, floored at kLipschitzFloor.
double lipschitz_m(std::span<const AbundanceBlock> a);

}  // namespace auw
