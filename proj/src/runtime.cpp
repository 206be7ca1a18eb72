#include "auw/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "auw/prox.hpp"

namespace auw {

const char* to_string(Mode mode) noexcept { return mode == Mode::kSync ? "sync" : "async"; }

Mode parse_mode(const std::string& s) {
  if (s == "sync") return Mode::kSync;
  if (s == "async") return Mode::kAsync;
  throw Error("unknown mode '" + s + "' (expected sync or async)");
}

const char* to_string(StopCheck s) noexcept { return s == StopCheck::kEpoch ? "epoch" : "iteration"; }

StopCheck parse_stop_check(const std::string& s) {
  if (s == "epoch") return StopCheck::kEpoch;
  if (s == "iteration") return StopCheck::kIteration;
  throw Error("unknown stop check '" + s + "' (expected epoch or iteration)");
}

const char* to_string(ExitReason r) noexcept {
  switch (r) {
    case ExitReason::kTolerance: return "tolerance";
    case ExitReason::kMaxIter: return "max_iter";
    case ExitReason::kAborted: return "aborted";
  }
  return "unknown";
}

std::vector<DelaySpec> parse_delays(const std::string& s) {
  std::vector<DelaySpec> out;
  if (s.empty()) return out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    DelaySpec d;
    try {
      const auto colon = item.find(':');
      std::size_t used = 0;
      if (colon == std::string::npos) {
        d.lo_ms = d.hi_ms = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
      } else {
        d.lo_ms = std::stod(item.substr(0, colon));
        d.hi_ms = std::stod(item.substr(colon + 1));
      }
    } catch (const std::logic_error&) {
      throw Error("bad delay entry '" + item + "'");
    }
    if (!(d.lo_ms >= 0.0) || !(d.hi_ms >= d.lo_ms)) throw Error("bad delay range '" + item + "'");
    out.push_back(d);
  }
  return out;
}

SolverConfig SolverConfig::defaults(Mode mode) {
  SolverConfig cfg;
  cfg.mode = mode;
  cfg.max_iter = mode == Mode::kSync ? 100 : 500;
  return cfg;
}

SolverConfig SolverConfig::normalized(std::size_t omega) const {
  if (omega == 0) throw Error("solver needs at least one worker");
  SolverConfig cfg = *this;
  if (!(cfg.gamma0 > 0.0 && cfg.gamma0 <= 1.0)) throw Error(fmt::format("gamma0 = {} outside (0, 1]", cfg.gamma0));
  if (!(cfg.mu >= 0.0 && cfg.mu < 1.0)) throw Error(fmt::format("mu = {} outside [0, 1)", cfg.mu));
  if (!(cfg.rel_tol >= 0.0)) throw Error("rel_tol must be nonnegative");
  if (cfg.max_iter == 0) throw Error("max_iter must be positive");
  if (!cfg.worker_delay.empty() && cfg.worker_delay.size() != omega) {
    throw Error(fmt::format("{} worker delays given for {} workers", cfg.worker_delay.size(), omega));
  }
  if (cfg.mode == Mode::kSync) {
    cfg.k_threshold = omega;
    cfg.gamma0 = 1.0;
  }
  if (cfg.k_threshold == 0 || cfg.k_threshold > omega) {
    throw Error(fmt::format("K = {} outside [1, {}]", cfg.k_threshold, omega));
  }
  return cfg;
}

AbundanceBlock worker_step(const WorkerState& w) {
  const double c = lipschitz_a(w.m_snapshot);
  Mat pre = w.a_local.a;
  pre -= (1.0 / c) * grad_a(w.y, w.a_local, w.m_snapshot);
  return {project_simplex_columns(pre), w.worker_id};
}

MasterState::MasterState(EndmemberMatrix m0, std::vector<AbundanceBlock> a0, double gamma0)
    : m_(std::move(m0)), a_(std::move(a0)), gamma_(gamma0), delays_(a_.size(), 0) {
  for (std::size_t i = 0; i < a_.size(); ++i) a_[i].worker_id = static_cast<WorkerId>(i);
}

double master_receive(MasterState& s, WorkerId w, const AbundanceBlock& a_hat) {
  if (w >= s.a_.size()) throw ProtocolError(fmt::format("result from unknown worker {}", w));
  if (std::find(s.received_.begin(), s.received_.end(), w) != s.received_.end()) {
    throw ProtocolError(fmt::format("worker {} reported twice in one iteration", w));
  }
  Mat& a = s.a_[w].a;
  if (a_hat.a.rows() != a.rows() || a_hat.a.cols() != a.cols()) {
    throw ProtocolError(fmt::format("worker {} returned a {}x{} block, expected {}x{}", w, a_hat.a.rows(),
                                    a_hat.a.cols(), a.rows(), a.cols()));
  }
  if (!simplex_feasible(a_hat.a)) throw ProtocolError(fmt::format("worker {} returned infeasible abundances", w));

  Mat step = a_hat.a - a;
  const double step_sq = frobenius_sq(step);
  if (s.gamma_ == 1.0) {
    a = a_hat.a;
  } else {
    a += s.gamma_ * std::move(step);
  }
  s.received_.push_back(w);
  return step_sq;
}

MUpdate master_update_m(MasterState& s, std::span<const DataBlock> y, std::size_t k_threshold, double mu,
                        bool fixed_gamma, bool extrapolate_m) {
  if (s.received_.size() < k_threshold) {
    throw ProtocolError(fmt::format("M update with {} results, K = {}", s.received_.size(), k_threshold));
  }
  MUpdate up;
  up.gamma_used = s.gamma_;
  up.c_m = lipschitz_m(s.a_);

  const Mat& m = s.m_.m;
  Mat m_hat = m;
  m_hat -= (1.0 / up.c_m) * grad_m(y, s.a_, s.m_);
  m_hat = project_nonneg(m_hat);
  Mat step = m_hat - m;
  up.m_step_sq = frobenius_sq(step);

  Mat next;
  if (extrapolate_m) {
    next = m_hat + s.gamma_ * std::move(step);
  } else if (s.gamma_ == 1.0) {
    next = std::move(m_hat);
  } else {
    next = m + s.gamma_ * std::move(step);
  }

  for (std::size_t w = 0; w < s.delays_.size(); ++w) {
    const bool reported = std::find(s.received_.begin(), s.received_.end(), w) != s.received_.end();
    s.delays_[w] = reported ? 0 : s.delays_[w] + 1;
  }
  if (!fixed_gamma) s.gamma_ *= 1.0 - mu * s.gamma_;
  s.m_ = EndmemberMatrix{std::move(next), s.m_.version + 1};
  up.reporters = std::move(s.received_);
  s.received_.clear();
  return up;
}

namespace {

void validate_start(std::span<const DataBlock> y, const std::vector<AbundanceBlock>& a0, const EndmemberMatrix& m0) {
  if (y.empty()) throw Error("no data blocks");
  if (a0.size() != y.size()) throw DimensionError(fmt::format("{} A blocks for {} data blocks", a0.size(), y.size()));
  std::size_t out_of_range = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    residual(y[i], a0[i], m0);  // shape check
    if (!simplex_feasible(a0[i].a)) throw Error(fmt::format("initial abundance block {} is not simplex-feasible", i));
    if (!y[i].y.all_finite()) throw NumericError(fmt::format("data block {} has non-finite entries", i));
    if (outside_unit_range(y[i])) ++out_of_range;
  }
  if (out_of_range > 0) spdlog::info("{} of {} data blocks have entries outside [0, 1]", out_of_range, y.size());
  if (!nonnegative(m0.m)) throw Error("initial endmember matrix has negative entries");
}

}  // namespace

RunResult run(std::span<const DataBlock> y, std::vector<AbundanceBlock> a0, EndmemberMatrix m0,
              const SolverConfig& cfg_in, Transport& transport, const IterateObserver& observe) {
  const std::size_t omega = y.size();
  validate_start(y, a0, m0);
  if (transport.worker_count() != omega) {
    throw Error(fmt::format("transport has {} workers, data has {} blocks", transport.worker_count(), omega));
  }
  const SolverConfig cfg = cfg_in.normalized(omega);
  const bool sync = cfg.mode == Mode::kSync;

  m0.version = 0;
  MasterState s(std::move(m0), std::move(a0), cfg.gamma0);
  RunResult out;
  out.lipschitz = LipschitzTracker(omega);
  PhiState phi_state(s.m().m);

  const double t0 = transport.now_ms();
  double psi = objective(y, s.a_blocks(), s.m()).value;
  {
    IterationRecord init;
    init.objective = psi;
    init.gamma = s.gamma();
    init.phi = psi;
    init.lipschitz_a = lipschitz_a(s.m());
    init.lipschitz_m = lipschitz_m(s.a_blocks());
    out.trace.push_back(init);
  }
  if (observe) observe(s);

  std::vector<EndmemberMatrix> snapshot(omega);
  auto assign = [&](WorkerId w) {
    snapshot[w] = s.m();
    transport.send(TaskMsg{w, s.k(), s.m().m, s.a_blocks()[w].a});
  };

  bool converged = false;
  try {
    for (WorkerId w = 0; w < omega; ++w) assign(w);

    double l_a_current = lipschitz_a(s.m());
    std::vector<BlockStep> steps;
    std::size_t iter_delay = 0;
    std::size_t max_delay_seen = 0;
    double last_c_a = 0.0;
    int last_worker = -1;
    std::vector<bool> fresh(omega, false);
    std::size_t fresh_count = 0;
    double psi_checkpoint = psi;

    while (s.k() < cfg.max_iter) {
      ResultMsg r = transport.recv();
      const WorkerId w = r.worker_id;
      if (w >= omega) throw ProtocolError(fmt::format("result from unknown worker {}", w));
      if (r.stamp != snapshot[w].version) {
        throw ProtocolError(fmt::format("worker {} answered stamp {}, expected {}", w, r.stamp, snapshot[w].version));
      }
      const std::size_t d = s.delay(w);
      if (d != s.k() - r.stamp) throw std::logic_error("delay counter out of sync with snapshot stamp");

      if (cfg.tau_limit && d > *cfg.tau_limit) {
        spdlog::debug("discarding result of worker {} (delay {} > tau {})", w, d, *cfg.tau_limit);
        ++out.discarded_stale;
        s.reset_delay(w);
        assign(w);
        continue;
      }

      const double c_a = lipschitz_a(snapshot[w]);
      out.lipschitz.observe_a(w, c_a);
      if (cfg.monitor && d > 0) {
        if (auto l_am = estimate_l_am(s.m().m, snapshot[w].m, s.a_blocks()[w], y[w])) out.lipschitz.observe_am(*l_am);
      }
      const double step_sq = master_receive(s, w, AbundanceBlock{std::move(r.a_hat), w});
      steps.push_back({c_a, l_a_current, step_sq});
      ++out.delay_histogram[{w, d}];
      out.arrival_order.push_back(w);
      iter_delay = std::max(iter_delay, d);
      max_delay_seen = std::max(max_delay_seen, d);
      last_c_a = c_a;
      last_worker = static_cast<int>(w);
      if (!fresh[w]) {
        fresh[w] = true;
        ++fresh_count;
      }

      if (s.received().size() < cfg.k_threshold) continue;

      const MUpdate up = master_update_m(s, y, cfg.k_threshold, cfg.mu, sync, cfg.extrapolate_m);
      out.lipschitz.observe_m(up.c_m);
      const ObjectiveValue obj = objective(y, s.a_blocks(), s.m());

      IterationRecord rec;
      rec.k = s.k();
      rec.objective = obj.value;
      rec.gamma = up.gamma_used;
      rec.reporting_worker = last_worker;
      rec.observed_delay = iter_delay;
      rec.wall_clock_ms = transport.now_ms() - t0;
      rec.lipschitz_a = last_c_a;
      rec.lipschitz_m = up.c_m;
      rec.m_step_sq = up.m_step_sq;
      rec.m_diff_sq = phi_state.push(s.m().m);
      for (const auto& b : steps) rec.a_step_sq += b.step_sq;

      rec.tau = cfg.tau_limit ? *cfg.tau_limit : max_delay_seen;
      rec.beta = static_cast<double>(rec.tau) * out.lipschitz.am_plus();
      phi_state.set_window(rec.tau, rec.beta);
      rec.phi = phi(phi_state, obj.value);
      if (cfg.monitor) {
        DecreaseInputs in;
        in.phi_before = psi + phi_state.correction(1);
        in.phi_after = rec.phi;
        in.gamma = up.gamma_used;
        in.blocks = steps;
        in.c_m = up.c_m;
        in.l_m = up.c_m;
        in.m_step_sq = up.m_step_sq;
        in.tau = rec.tau;
        in.l_am_plus = out.lipschitz.am_plus();
        const DecreaseCheck check = check_sufficient_decrease(in);
        rec.coef_a = check.coef_a;
        rec.coef_m = check.coef_m;
        rec.decrease_margin = check.margin;
        rec.decrease_holds = check.holds;
        if (!check.holds) {
          ++out.decrease_violations;
          spdlog::debug("k={}: sufficient-decrease monitor violated by {:.3e}", rec.k, -check.margin);
        }
        l_a_current = lipschitz_a(s.m());
      }
      out.trace.push_back(rec);
      if (observe) observe(s);
      spdlog::debug("k={} psi={:.10g} gamma={:.6f} worker={} delay={}", rec.k, rec.objective, rec.gamma,
                    rec.reporting_worker, rec.observed_delay);

      steps.clear();
      iter_delay = 0;

      psi = obj.value;
      const bool armed = cfg.stop_check == StopCheck::kIteration || fresh_count == omega;
      if (armed) {
        const double prev = cfg.stop_check == StopCheck::kIteration ? out.trace[out.trace.size() - 2].objective
                                                                     : psi_checkpoint;
        psi_checkpoint = psi;
        std::fill(fresh.begin(), fresh.end(), false);
        fresh_count = 0;
        if (std::isfinite(prev) && std::isfinite(psi)) {
          const double rel = prev > 0.0 ? std::abs(psi - prev) / prev : 0.0;
          if (rel < cfg.rel_tol) {
            converged = true;
            break;
          }
        }
      }
      for (WorkerId rw : up.reporters) assign(rw);
    }
    out.exit = converged ? ExitReason::kTolerance : ExitReason::kMaxIter;
  } catch (const WorkerFailure& e) {
    spdlog::error("aborting run: {}", e.what());
    out.exit = ExitReason::kAborted;
    out.abort_message = e.what();
  }
  transport.shutdown();

  out.m = s.m();
  out.a = s.a_blocks();
  return out;
}

}  // namespace auw
