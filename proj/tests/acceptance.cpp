// Acceptance runner: one PASS/FAIL line per criterion.
//
//   auw_acceptance               run every criterion
//   auw_acceptance --criterion N run criterion N only

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "auw/datagen.hpp"
#include "auw/metrics.hpp"
#include "auw/model.hpp"
#include "auw/prox.hpp"
#include "auw/runtime.hpp"
#include "auw/transport.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace auw;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::vector<DelaySpec> mild_delays() { return parse_delays("0:5,0:10,0:20"); }

RunResult run_threads(const SolverConfig& cfg, const std::vector<DelaySpec>& delays) {
  const Dataset& ds = test::desk_dataset();
  Initialization init = test::desk_init();
  ThreadTransport t(ds.data_blocks(), delays, cfg.seed);
  return run(ds.data_blocks(), init.a, init.m, cfg, t);
}

RunResult run_virtual(const SolverConfig& cfg, const std::vector<DelaySpec>& delays,
                      const IterateObserver& observe = {}) {
  const Dataset& ds = test::desk_dataset();
  Initialization init = test::desk_init();
  VirtualTimeTransport t(ds.data_blocks(), delays, cfg.seed, 1.0);
  return run(ds.data_blocks(), init.a, init.m, cfg, t, observe);
}

std::vector<Mat> a_mats(const std::vector<AbundanceBlock>& a) {
  std::vector<Mat> out;
  for (const auto& b : a) out.push_back(b.a);
  return out;
}

// 1. Sync descent on the desk fixture.
Verdict sync_descent() {
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r = run_threads(SolverConfig::defaults(Mode::kSync), {});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t increases = 0;
  for (std::size_t k = 1; k < r.trace.size(); ++k) increases += r.trace[k].objective > r.trace[k - 1].objective;
  const std::size_t iters = r.trace.size() - 1;
  const bool pass = increases == 0 && r.exit == ExitReason::kTolerance && iters <= 100;
  return {pass, fmt::format("exit={} iterations={} increases={} final_psi={:.6e} time={:.2f}s", to_string(r.exit),
                            iters, increases, r.trace.back().objective, secs)};
}

// 2. Async wall-clock against sync with heterogeneous worker sleeps.
Verdict async_speedup() {
  const auto delays = parse_delays("0,50,100");
  SolverConfig sync_cfg = SolverConfig::defaults(Mode::kSync);
  SolverConfig async_cfg = SolverConfig::defaults(Mode::kAsync);
  async_cfg.max_iter = 100000;

  RunResult s = run_threads(sync_cfg, delays);
  RunResult a = run_threads(async_cfg, delays);
  const double ts = s.trace.back().wall_clock_ms, ta = a.trace.back().wall_clock_ms;
  const double ratio = ta / ts;
  const double obj_gap = std::abs(a.trace.back().objective - s.trace.back().objective) / s.trace.back().objective;
  const bool pass = s.exit == ExitReason::kTolerance && a.exit == ExitReason::kTolerance && ratio <= 0.8 &&
                    obj_gap <= 0.01;
  return {pass, fmt::format("sync {:.0f} ms ({} it, {}), async {:.0f} ms ({} it, {}), ratio={:.3f} (gate 0.8), "
                            "objective gap={:.2e} (gate 1e-2)",
                            ts, s.trace.size() - 1, to_string(s.exit), ta, a.trace.size() - 1, to_string(a.exit),
                            ratio, obj_gap)};
}

// 3. Estimation quality of both modes.
Verdict estimation_quality() {
  const Dataset& ds = test::desk_dataset();
  const auto delays = parse_delays("0,50,100");
  SolverConfig sync_cfg = SolverConfig::defaults(Mode::kSync);
  SolverConfig async_cfg = SolverConfig::defaults(Mode::kAsync);
  async_cfg.max_iter = 100000;
  RunResult s = run_virtual(sync_cfg, delays);
  RunResult a = run_virtual(async_cfg, delays);
  MetricsReport ms = evaluate(ds.m_true, ds.a_true, ds.y, s.m.m, a_mats(s.a));
  MetricsReport ma = evaluate(ds.m_true, ds.a_true, ds.y, a.m.m, a_mats(a.a));
  const bool pass = ms.asam_m_deg < 3.0 && ma.asam_m_deg < 3.0 && ms.gmse < 5e-3 && ma.gmse < 5e-3 &&
                    ms.gmse <= 3.0 * ma.gmse;
  return {pass, fmt::format("sync aSAM={:.3f}deg GMSE={:.3e}; async aSAM={:.3f}deg GMSE={:.3e}", ms.asam_m_deg, ms.gmse,
                            ma.asam_m_deg, ma.gmse)};
}

// 4. RE of the true factors against the recorded noise power.
Verdict noise_floor() {
  const Dataset& ds = test::desk_dataset();
  const double r = re(ds.y, ds.m_true, ds.a_true);
  const double rel = std::abs(r - ds.sigma2) / ds.sigma2;
  return {rel <= 0.2, fmt::format("RE={:.4e} sigma2={:.4e} relative gap={:.3f}", r, ds.sigma2, rel)};
}

// 5. Oracle suites.
Verdict oracle_suites() {
  std::mt19937_64 rng(2024);
  std::string detail;
  bool pass = true;

  double proj_err = 0.0, kkt = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t r = 2 + rng() % 9;
    const double scale = std::pow(10.0, std::uniform_real_distribution<double>(-2, 2)(rng));
    std::vector<double> v(r);
    for (double& x : v) x = std::normal_distribution<double>(0.0, scale)(rng);
    auto got = project_simplex_column(v);
    auto ref = oracle::simplex_qp(v);
    for (std::size_t j = 0; j < r; ++j) proj_err = std::max(proj_err, std::abs(got[j] - ref[j]));
    kkt = std::max(kkt, oracle::simplex_kkt_residual(v, got));
  }
  pass = pass && proj_err <= 1e-10 && kkt <= 1e-10;
  detail += fmt::format("(a) projection max err={:.1e} kkt={:.1e}; ", proj_err, kkt);

  auto rel_err = [](const Mat& g, const Mat& fd) { return frobenius_norm(g - fd) / std::max(frobenius_norm(fd), 1e-300); };
  double grad_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t l = 2 + rng() % 10, r = 2 + rng() % 5, n = 1 + rng() % 10;
    Mat m = oracle::random_mat(l, r, rng, 0, 1);
    std::vector<DataBlock> y{{oracle::random_mat(l, n, rng, 0, 1), 0}, {oracle::random_mat(l, n, rng, 0, 1), 1}};
    std::vector<AbundanceBlock> a{{oracle::random_simplex_columns(r, n, rng), 0},
                                  {oracle::random_simplex_columns(r, n, rng), 1}};
    auto fa = [&](const Mat& x) { return oracle::half_residual_sq(y[0].y, m, x); };
    auto fm = [&](const Mat& x) {
      return oracle::half_residual_sq(y[0].y, x, a[0].a) + oracle::half_residual_sq(y[1].y, x, a[1].a);
    };
    grad_err = std::max(grad_err, rel_err(grad_a(y[0], a[0], {m}), oracle::central_difference(fa, a[0].a, 1e-6)));
    grad_err = std::max(grad_err, rel_err(grad_m(y, a, {m}), oracle::central_difference(fm, m, 1e-6)));
  }
  pass = pass && grad_err < 1e-6;
  detail += fmt::format("(b) gradient rel err={:.1e}; ", grad_err);

  double norm_err = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t rows = 1 + rng() % 30, cols = 1 + rng() % 10;
    Mat m = oracle::random_mat(rows, cols, rng, 0, 1);
    const double s = oracle::singular_values(m)[0];
    norm_err = std::max(norm_err, std::abs(spectral_norm(m) - s));
    norm_err = std::max(norm_err, std::abs(lipschitz_a({m}) - s * s));
    std::vector<AbundanceBlock> blocks{{oracle::random_simplex_columns(cols, 1 + rng() % 20, rng), 0},
                                       {oracle::random_simplex_columns(cols, 1 + rng() % 20, rng), 1}};
    const double sa = oracle::singular_values(hconcat(std::vector<Mat>{blocks[0].a, blocks[1].a}))[0];
    norm_err = std::max(norm_err, std::abs(lipschitz_m(blocks) - sa * sa));
  }
  pass = pass && norm_err <= 1e-8;
  detail += fmt::format("(c) spectral norm max err={:.1e}; ", norm_err);

  double align_err = 0.0;
  for (std::size_t r = 1; r <= 6; ++r) {
    for (int t = 0; t < 30; ++t) {
      Mat truth = oracle::random_mat(15, r, rng, 0.01, 1);
      Mat est = oracle::random_mat(15, r, rng, 0.01, 1);
      const double got = asam_m(truth, est, align(truth, est));
      align_err = std::max(align_err, std::abs(got - oracle::exhaustive_alignment(truth, est).mean_angle));
    }
  }
  pass = pass && align_err <= 1e-10;
  detail += fmt::format("(d) alignment max err={:.1e}", align_err);
  return {pass, detail};
}

// 6. Bounded staleness and the single-worker equivalence.
Verdict bookkeeping() {
  SolverConfig cfg = SolverConfig::defaults(Mode::kAsync);
  cfg.tau_limit = 3;
  cfg.max_iter = 5000;
  RunResult r = run_virtual(cfg, mild_delays());
  std::size_t max_delay = 0;
  for (const auto& row : r.trace) max_delay = std::max(max_delay, row.observed_delay);
  for (const auto& [key, count] : r.delay_histogram) max_delay = std::max(max_delay, key.second);
  const bool bounded = max_delay <= 3;

  // Ω = 1: merge the desk blocks into one. γ is held at 1 (μ = 0) in both modes.
  const Dataset& ds = test::desk_dataset();
  Initialization init = test::desk_init();
  std::vector<DataBlock> y{{hconcat(ds.y), 0}};
  std::vector<AbundanceBlock> a0{{hconcat(a_mats(init.a)), 0}};
  struct Iterate {
    Mat m, a;
  };
  auto record = [&](Mode mode) {
    SolverConfig c = SolverConfig::defaults(mode);
    c.mu = 0.0;
    c.max_iter = 100;
    std::vector<Iterate> seq;
    VirtualTimeTransport t(y);
    run(y, a0, init.m, c, t, [&](const MasterState& s) { seq.push_back({s.m().m, s.a_blocks()[0].a}); });
    return seq;
  };
  auto sync = record(Mode::kSync), async = record(Mode::kAsync);
  bool identical = sync.size() == async.size();
  for (std::size_t k = 0; identical && k < sync.size(); ++k) {
    identical = bitwise_equal(sync[k].m, async[k].m) && bitwise_equal(sync[k].a, async[k].a);
  }
  return {bounded && identical,
          fmt::format("tau_limit=3: max observed delay={} ({} stale results discarded, {} iterations); "
                      "single worker: {} sync vs {} async iterates, bitwise identical={}",
                      max_delay, r.discarded_stale, r.trace.size() - 1, sync.size(), async.size(), identical)};
}

struct PhiOutcome {
  bool pass;
  std::string detail;
};

PhiOutcome phi_monotone(double mu) {
  SolverConfig cfg = SolverConfig::defaults(Mode::kAsync);
  cfg.tau_limit = 3;
  cfg.mu = mu;
  cfg.max_iter = 5000;
  RunResult r = run_virtual(cfg, mild_delays());
  std::size_t k0 = 0;
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    if (r.trace[k].coef_a >= 0.0 && r.trace[k].coef_m >= 0.0) {
      k0 = k;
      break;
    }
  }
  if (k0 == 0) return {false, fmt::format("mu={}: coefficients never both nonnegative", mu)};
  const double beta = 3.0 * r.lipschitz.am_plus();
  auto series = phi_series(r.trace, 3, beta);
  std::size_t increases = 0;
  for (std::size_t k = k0 + 1; k < series.size(); ++k) increases += series[k] > series[k - 1];
  return {increases == 0, fmt::format("mu={}: first k={}, beta={:.3e}, {} rows, Phi increases={}, monitor "
                                      "violations={}",
                                      mu, k0, beta, r.trace.size(), increases, r.decrease_violations)};
}

// 7. Φ monitor on the deterministic fixture, and its sync reduction.
Verdict phi_monitor() {
  PhiOutcome dflt = phi_monotone(1e-6);
  PhiOutcome fast = phi_monotone(0.5);

  RunResult s = run_virtual(SolverConfig::defaults(Mode::kSync), {});
  std::size_t matches = 0, descents = 0;
  for (std::size_t k = 1; k < s.trace.size(); ++k) {
    const auto& row = s.trace[k];
    const bool descent = row.objective <= s.trace[k - 1].objective;
    descents += descent;
    matches += row.tau == 0 && row.coef_a == 0.0 && row.coef_m == 0.0 && row.phi == row.objective &&
               row.decrease_holds == descent;
  }
  const std::size_t rows = s.trace.size() - 1;
  const bool sync_ok = matches == rows && descents == rows;
  return {dflt.pass && fast.pass && sync_ok,
          fmt::format("{}; {}; sync: monitor equals descent on {} of {} rows, descent on {}", dflt.detail,
                      fast.detail, matches, rows, descents)};
}

// 8. Wire codec fuzzing and the TCP loopback run.
Verdict protocol() {
  std::mt19937_64 rng(8);
  std::size_t roundtrip_fail = 0, foreign_exceptions = 0, rejected = 0;
  for (int i = 0; i < 5000; ++i) {
    WireMessage m;
    m.type = static_cast<MsgType>(1 + rng() % 4);
    m.worker_id = static_cast<WorkerId>(rng());
    m.stamp = rng();
    const std::size_t count = rng() % 4;
    for (std::size_t j = 0; j < count; ++j) m.matrices.push_back(oracle::random_mat(rng() % 7, rng() % 7, rng, -1e3, 1e3));
    auto bytes = encode(m);
    try {
      if (!bitwise_equal(decode(bytes), m)) ++roundtrip_fail;
    } catch (...) {
      ++roundtrip_fail;
    }
    for (int v = 0; v < 4; ++v) {
      auto mutated = bytes;
      if (v == 3) {
        mutated.resize(rng() % 96);
        for (auto& b : mutated) b = static_cast<std::uint8_t>(rng());
        if (mutated.size() >= 6) std::memcpy(mutated.data(), "AUWP\x01", 5);
      } else if (!mutated.empty()) {
        for (int f = 0; f <= v; ++f) mutated[rng() % mutated.size()] = static_cast<std::uint8_t>(rng());
        if (v == 2) mutated.resize(rng() % (mutated.size() + 1));
      }
      try {
        decode(mutated);
      } catch (const DecodeError&) {
        ++rejected;
      } catch (...) {
        ++foreign_exceptions;
      }
    }
  }

  const Dataset& ds = test::desk_dataset();
  Initialization init = test::desk_init();
  auto y = ds.data_blocks();
  SolverConfig cfg = SolverConfig::defaults(Mode::kAsync);
  cfg.max_iter = 300;
  VirtualTimeTransport local(y, mild_delays(), cfg.seed, 1.0);
  RunResult ref = run(y, init.a, init.m, cfg, local);

  std::promise<std::uint16_t> port;
  auto master = std::async(std::launch::async, [&] {
    return serve_master(parse_endpoint("127.0.0.1:0"), y, init.a, init.m, cfg, ref.arrival_order,
                        [&](std::uint16_t p) { port.set_value(p); });
  });
  const Endpoint ep{"127.0.0.1", port.get_future().get()};
  auto loader = [&](WorkerId id) { return y.at(id); };
  std::vector<std::future<std::size_t>> workers;
  for (WorkerId w = 0; w < 3; ++w) {
    workers.push_back(std::async(std::launch::async, [&, w] {
      WorkerOptions o;
      o.requested_id = w;
      return run_worker(ep, loader, o);
    }));
  }
  RunResult tcp = master.get();
  for (auto& w : workers) w.get();
  const double gap = std::abs(tcp.trace.back().objective - ref.trace.back().objective);
  const bool same_order = tcp.arrival_order == ref.arrival_order;
  const bool pass = roundtrip_fail == 0 && foreign_exceptions == 0 && gap <= 1e-6 * ref.trace.back().objective &&
                    tcp.exit == ref.exit && same_order;
  return {pass, fmt::format("fuzz: 5000 round trips ({} failed), {} mutated frames rejected, {} non-decode "
                            "exceptions; tcp: {} iterations, objective gap={:.2e} (in-process {:.10e}), same order={}",
                            roundtrip_fail, rejected, foreign_exceptions, tcp.trace.size() - 1, gap,
                            ref.trace.back().objective, same_order)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  int only = 0;
  app.add_option("--criterion", only, "run a single criterion (1-8)")->check(CLI::Range(1, 8));
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::warn);

  const std::vector<Criterion> all{
      {1, "sync descent", sync_descent},         {2, "async speedup", async_speedup},
      {3, "estimation quality", estimation_quality}, {4, "noise-floor RE", noise_floor},
      {5, "oracle suites", oracle_suites},       {6, "asynchrony bookkeeping", bookkeeping},
      {7, "phi monitor", phi_monitor},           {8, "protocol", protocol},
  };

  int failures = 0;
  for (const auto& c : all) {
    if (only != 0 && c.id != only) continue;
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::cout << fmt::format("criterion {} {}: {} | {}", c.id, c.name, v.pass ? "PASS" : "FAIL", v.detail) << std::endl;
    failures += !v.pass;
  }
  return failures == 0 ? 0 : 1;
}
