#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "auw/diagnostics.hpp"
#include "auw/error.hpp"
#include "auw/matcore.hpp"
#include "auw/model.hpp"
#include "auw/trace.hpp"

namespace auw {

enum class Mode { kSync, kAsync };

const char* to_string(Mode mode) noexcept;
Mode parse_mode(const std::string& s);

/// Artificial per-task sleep for one worker: fixed when lo_ms == hi_ms,
/// otherwise uniform on [lo_ms, hi_ms].
struct DelaySpec {
  double lo_ms = 0.0;
  double hi_ms = 0.0;
  bool operator==(const DelaySpec&) const = default;
};

/// Parses "0,50,100" or "0:10,50,100:200".
std::vector<DelaySpec> parse_delays(const std::string& s);

/// When the relative-decrease stop test runs.
///   kIteration: after every M update.
///   kEpoch: after the first M update at which every worker has reported
///   since the previous test; the decrease is measured across that window.
/// Both coincide when every worker reports at every update (sync, Ω = 1).
enum class StopCheck { kIteration, kEpoch };

const char* to_string(StopCheck s) noexcept;
StopCheck parse_stop_check(const std::string& s);

struct SolverConfig {
  Mode mode = Mode::kAsync;
  std::size_t k_threshold = 1;  ///< results collected before each M update
  double gamma0 = 1.0;
  double mu = 1e-6;  ///< γ_{k+1} = γ_k(1 − μγ_k); 0 keeps γ constant
  std::size_t max_iter = 500;
  double rel_tol = 1e-5;
  std::optional<std::size_t> tau_limit;
  StopCheck stop_check = StopCheck::kEpoch;
  std::uint64_t seed = 0;
  std::vector<DelaySpec> worker_delay;
  /// Use M^{k+1} = M̂ + γ(M̂ − M) instead of the convex combination.
  /// Experimental: nonnegativity of M is no longer guaranteed.
  bool extrapolate_m = false;
  /// Per-iteration Lipschitz/Φ instrumentation.
  bool monitor = true;

  /// Defaults: K = 1, γ₀ = 1, μ = 1e-6, rel_tol = 1e-5, and
  /// 100 (sync) / 500 (async) iterations.
  static SolverConfig defaults(Mode mode);

  /// Validated copy for `omega` workers. Sync mode forces K = Ω and γ ≡ 1.
  SolverConfig normalized(std::size_t omega) const;
};

/// Task sent to a worker: the current M (stamped with its version) and the
/// worker's relaxed abundance block.
struct TaskMsg {
  WorkerId worker_id = 0;
  std::uint64_t stamp = 0;
  Mat m;
  Mat a;
};

/// Â_ω computed against the snapshot identified by `stamp`.
struct ResultMsg {
  WorkerId worker_id = 0;
  std::uint64_t stamp = 0;
  Mat a_hat;
};

/// A worker died or its connection was lost.
class WorkerFailure : public Error {
 public:
  using Error::Error;
};

/// Message-passing link between the master and its workers. Messages carry
/// values, never references into master state.
class Transport {
 public:
  virtual ~Transport() = default;

  virtual std::size_t worker_count() const = 0;
  virtual void send(TaskMsg task) = 0;
  /// Blocks until any worker completes. Throws WorkerFailure.
  virtual ResultMsg recv() = 0;
  /// Milliseconds on the transport's clock (virtual for simulated schedulers).
  virtual double now_ms() const = 0;
  virtual void shutdown() = 0;
};

struct WorkerState {
  WorkerId worker_id = 0;
  DataBlock y;
  AbundanceBlock a_local;
  EndmemberMatrix m_snapshot;
};

/// Â_ω = P_Δ(Ã_ω − ∇_A f(Ã_ω, M̃) / L_A(M̃)).
AbundanceBlock worker_step(const WorkerState& w);

using StepFn = std::function<AbundanceBlock(const WorkerState&)>;

struct MUpdate {
  double c_m = 0.0;
  double gamma_used = 0.0;
  double m_step_sq = 0.0;  ///< ‖M̂ − M^k‖²
  std::vector<WorkerId> reporters;
};

/// Master-side view of the optimization: the shared M, every A block, the
/// relaxation parameter and the per-worker delay counters.
class MasterState {
 public:
  MasterState(EndmemberMatrix m0, std::vector<AbundanceBlock> a0, double gamma0);

  const EndmemberMatrix& m() const noexcept { return m_; }
  const std::vector<AbundanceBlock>& a_blocks() const noexcept { return a_; }
  double gamma() const noexcept { return gamma_; }
  std::uint64_t k() const noexcept { return m_.version; }
  std::size_t delay(WorkerId w) const { return delays_.at(w); }
  const std::vector<std::size_t>& delays() const noexcept { return delays_; }
  /// 𝒯_k in arrival order.
  const std::vector<WorkerId>& received() const noexcept { return received_; }
  std::size_t worker_count() const noexcept { return a_.size(); }

  /// A worker was handed a fresh snapshot outside an M update.
  void reset_delay(WorkerId w) { delays_.at(w) = 0; }

 private:
  friend double master_receive(MasterState&, WorkerId, const AbundanceBlock&);
  friend MUpdate master_update_m(MasterState&, std::span<const DataBlock>, std::size_t, double, bool, bool);

  EndmemberMatrix m_;
  std::vector<AbundanceBlock> a_;
  double gamma_;
  std::vector<std::size_t> delays_;
  std::vector<WorkerId> received_;
};

/// A_ω ← A_ω + γ_k(Â_ω − A_ω) and ω joins 𝒯_k. Returns ‖Â_ω − A_ω‖².
/// Throws ProtocolError on an unknown worker, a worker already in 𝒯_k, or an
/// infeasible / misshapen Â_ω.
double master_receive(MasterState& s, WorkerId w, const AbundanceBlock& a_hat);

/// M̂ = P₊(M − ∇_M F(A^{k+1}, M)/c_M), M^{k+1} = M + γ_k(M̂ − M),
/// γ_{k+1} = γ_k(1 − μγ_k) (unless `fixed_gamma`), delay bookkeeping, 𝒯
/// cleared, k incremented. Throws ProtocolError if |𝒯_k| < K.
MUpdate master_update_m(MasterState& s, std::span<const DataBlock> y, std::size_t k_threshold, double mu,
                        bool fixed_gamma, bool extrapolate_m);

enum class ExitReason { kTolerance, kMaxIter, kAborted };
const char* to_string(ExitReason r) noexcept;

struct RunResult {
  EndmemberMatrix m;
  std::vector<AbundanceBlock> a;
  std::vector<IterationRecord> trace;
  ExitReason exit = ExitReason::kMaxIter;
  std::string abort_message;
  LipschitzTracker lipschitz;
  /// (worker, observed delay) → count of accepted results.
  std::map<std::pair<WorkerId, std::size_t>, std::size_t> delay_histogram;
  /// Worker id of every accepted result, in processing order.
  std::vector<WorkerId> arrival_order;
  std::size_t discarded_stale = 0;
  std::size_t decrease_violations = 0;
};

/// Called with the master state at k = 0 and after every M update.
using IterateObserver = std::function<void(const MasterState&)>;

/// Runs the master loop over `transport`. `y` are the data blocks (the master
/// needs them for ∇_M F and Ψ); workers hold their own copies.
RunResult run(std::span<const DataBlock> y, std::vector<AbundanceBlock> a0, EndmemberMatrix m0,
              const SolverConfig& cfg, Transport& transport, const IterateObserver& observe = {});

}  // namespace auw
