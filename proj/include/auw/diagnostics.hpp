#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "auw/matcore.hpp"
#include "auw/model.hpp"
#include "auw/trace.hpp"

namespace auw {

struct Range {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();

  bool empty() const noexcept { return min > max; }
  void add(double v) noexcept {
    if (v < min) min = v;
    if (v > max) max = v;
  }
};

/// Running bounds of the Lipschitz constants seen during a run. These are the
/// empirical counterparts of L_A^±, L_M^± and L_{A,M}^±.
class LipschitzTracker {
 public:
  explicit LipschitzTracker(std::size_t workers = 0) : a_per_worker_(workers) {}

  void observe_a(WorkerId w, double l);
  void observe_m(double l) { m_.add(l); }
  void observe_am(double l) { am_.add(l); }

  const Range& a(WorkerId w) const { return a_per_worker_.at(w); }
  const Range& a_all() const noexcept { return a_all_; }
  const Range& m() const noexcept { return m_; }
  const Range& am() const noexcept { return am_; }

  double a_plus() const noexcept { return a_all_.empty() ? 0.0 : a_all_.max; }
  double m_plus() const noexcept { return m_.empty() ? 0.0 : m_.max; }
  /// 0 until a stale pair has been sampled.
  double am_plus() const noexcept { return am_.empty() ? 0.0 : am_.max; }

 private:
  std::vector<Range> a_per_worker_;
  Range a_all_;
  Range m_;
  Range am_;
};

/// History needed to evaluate the auxiliary function
///   Φ = Ψ + (β/2) Σ_{q=1..τ} (τ−q+1) ‖M^{k−q+1} − M^{k−q}‖²,
/// with M^q = M^0 for q < 0. Only the squared consecutive differences are kept.
class PhiState {
 public:
  explicit PhiState(Mat m0) : last_(std::move(m0)) {}

  /// Appends M^{k+1}; returns ‖M^{k+1} − M^k‖².
  double push(const Mat& m_next);
  /// Appends a precomputed ‖M^{k+1} − M^k‖² without tracking the iterate.
  void push_diff(double d) { diffs_.push_back(d); }
  void set_window(std::size_t tau, double beta) noexcept {
    tau_ = tau;
    beta_ = beta;
  }

  std::size_t tau() const noexcept { return tau_; }
  double beta() const noexcept { return beta_; }
  /// Number of iterates pushed after M^0.
  std::size_t iterations() const noexcept { return diffs_.size(); }

  /// (β/2)·weighted window sum at the iterate `steps_back` pushes ago.
  double correction(std::size_t steps_back = 0) const;

 private:
  Mat last_;
  std::vector<double> diffs_;
  std::size_t tau_ = 0;
  double beta_ = 0.0;
};

/// Φ at the current iterate given Ψ there.
double phi(const PhiState& state, double psi);

/// Φ for every trace row with one fixed (τ, β), rebuilt from the recorded
/// objectives and ‖M^{k+1} − M^k‖² values.
std::vector<double> phi_series(std::span<const IterationRecord> trace, std::size_t tau, double beta);

struct BlockStep {
  double c_a = 0.0;        ///< step constant the worker used, L_A(M̃)
  double l_a_current = 0.0;///< L_A(M^k) at the master's current M
  double step_sq = 0.0;    ///< ‖Â_ω − A_ω‖²
};

struct DecreaseInputs {
  double phi_before = 0.0;
  double phi_after = 0.0;
  double gamma = 1.0;
  std::vector<BlockStep> blocks;
  double c_m = 0.0;
  double l_m = 0.0;
  double m_step_sq = 0.0;
  std::size_t tau = 0;
  double l_am_plus = 0.0;
};

struct DecreaseCheck {
  bool holds = true;
  double margin = 0.0;  ///< rhs − Φ^{k+1}; negative when violated
  double coef_a = 0.0;  ///< smallest block coefficient
  double coef_m = 0.0;
};

/// Evaluates
///   Φ^{k+1} ≤ Φ^k − (γ/2) Σ_ω (c_A − γ(L_A + [τ>0] L_AM⁺)) ‖Â_ω − A_ω‖²
///                 − (γ/2) (c_M − γ(L_M + τ² L_AM⁺)) ‖M̂ − M‖².
/// A violation is reported, never thrown: L_AM⁺ is an empirical estimate.
DecreaseCheck check_sufficient_decrease(const DecreaseInputs& in);

/// ‖∇_A f(A, M₁) − ∇_A f(A, M₂)‖_F / ‖M₁ − M₂‖_F; nullopt when M₁ == M₂.
std::optional<double> estimate_l_am(const Mat& m1, const Mat& m2, const AbundanceBlock& a, const DataBlock& y);

/// CSV: k,wall_clock_ms,objective,gamma,worker,delay,phi
void export_trace(std::span<const IterationRecord> trace, const std::filesystem::path& path);

struct TracePoint {
  std::uint64_t k = 0;
  double wall_clock_ms = 0.0;
  double objective = 0.0;
  double gamma = 0.0;
  int worker = -1;
  std::size_t delay = 0;
  double phi = 0.0;
};

std::vector<TracePoint> read_trace(const std::filesystem::path& path);

}  // namespace auw
