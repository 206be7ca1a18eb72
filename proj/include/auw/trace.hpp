#pragma once

#include <cstddef>
#include <cstdint>

namespace auw {

/// One row per master iteration. Row k = 0 holds the initial point
/// (reporting_worker = -1).
struct IterationRecord {
  std::uint64_t k = 0;
  double objective = 0.0;
  double gamma = 0.0;  ///< γ used to produce this iterate
  int reporting_worker = -1;
  std::size_t observed_delay = 0;  ///< largest delay among this iteration's reporters
  double wall_clock_ms = 0.0;
  double lipschitz_a = 0.0;  ///< step constant of the reporting worker (from its snapshot)
  double lipschitz_m = 0.0;

  // Convergence instrumentation.
  double phi = 0.0;
  std::size_t tau = 0;
  double beta = 0.0;
  double a_step_sq = 0.0;  ///< Σ over reporters of ‖Â_ω − A_ω‖²
  double m_step_sq = 0.0;  ///< ‖M̂ − M‖²
  double m_diff_sq = 0.0;  ///< ‖M^{k+1} − M^k‖²
  double coef_a = 0.0;     ///< smallest A-coefficient of the decrease inequality
  double coef_m = 0.0;
  double decrease_margin = 0.0;
  bool decrease_holds = true;
};

}  // namespace auw
