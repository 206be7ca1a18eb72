#include "app.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "auw/datagen.hpp"
#include "auw/error.hpp"
#include "auw/kv.hpp"
#include "auw/metrics.hpp"
#include "auw/runtime.hpp"
#include "auw/transport.hpp"
#include "support.hpp"

extern char** environ;

namespace auw::cli {

namespace {

namespace fs = std::filesystem;

using Flags = std::map<std::string, std::string>;

// Registers a string-valued flag whose value lands in flags[key] only when given.
void flag(CLI::App* app, Flags& flags, const std::string& name, const std::string& key, const std::string& help) {
  app->add_option(name, flags[key], help);
}

void add_solver_flags(CLI::App* app, Flags& f) {
  flag(app, f, "--mode", "mode", "sync or async (default async)");
  flag(app, f, "--workers", "workers", "number of workers; columns are re-partitioned when it differs from the block count");
  flag(app, f, "--k", "k", "results collected before each endmember update (default 1; sync forces the worker count)");
  flag(app, f, "--gamma0", "gamma0", "initial relaxation step in (0,1] (default 1)");
  flag(app, f, "--mu", "mu", "relaxation decay in [0,1) (default 1e-6)");
  flag(app, f, "--max-iter", "max_iter", "master iteration cap (default 100 sync, 500 async)");
  flag(app, f, "--rel-tol", "rel_tol", "relative objective decrease stop (default 1e-5)");
  flag(app, f, "--tau-limit", "tau_limit", "discard results older than this many master iterations");
  flag(app, f, "--seed", "seed", "seed for injected delays");
  flag(app, f, "--delay-ms", "delay_ms", "per-worker sleep after each task, e.g. 0,50,100 or 10:20,0,5");
  flag(app, f, "--stop-check", "stop_check", "epoch (default) or iteration");
  flag(app, f, "--init", "init", "perturbed (default), data or files");
  flag(app, f, "--init-noise", "init_noise", "relative noise of the perturbed init (default 0.05)");
  flag(app, f, "--init-seed", "init_seed", "seed of the init (default 7)");
  flag(app, f, "--scheduler", "scheduler", "threads (default), virtual (deterministic) or tcp (worker processes)");
  app->add_flag_callback("--extrapolate-m", [&f] { f["extrapolate_m"] = "true"; },
                         "use the extrapolated endmember relaxation (nonnegativity not guaranteed)");
  app->add_flag_callback("--no-monitor", [&f] { f["monitor"] = "false"; }, "skip Lipschitz and decrease instrumentation");
}

// flags > config file > defaults
UnmixSettings merge_settings(const std::string& config_path, const Flags& flags) {
  KeyValues merged;
  if (!config_path.empty()) merged = read_key_values(config_path);
  for (const auto& [k, v] : flags) {
    if (!v.empty()) merged[k] = v;
  }
  return resolve_settings(merged);
}

std::vector<Mat> blocks_of(const std::vector<DataBlock>& y) {
  std::vector<Mat> out;
  for (const auto& b : y) out.push_back(b.y);
  return out;
}

std::vector<Mat> read_numbered(const fs::path& dir, const std::string& stem, std::size_t count) {
  std::vector<Mat> out;
  for (std::size_t w = 0; w < count; ++w) out.push_back(read_fmat(dir / fmt::format("{}_{}.fmat", stem, w + 1)));
  return out;
}

std::size_t count_numbered(const fs::path& dir, const std::string& stem) {
  std::size_t n = 0;
  while (fs::exists(dir / fmt::format("{}_{}.fmat", stem, n + 1))) ++n;
  return n;
}

// Re-splits column blocks into `omega` contiguous groups.
std::vector<Mat> repartition(const std::vector<Mat>& blocks, std::size_t omega) {
  const Mat all = hconcat(blocks);
  return split_columns(all, partition_columns(all.cols(), omega));
}

struct Spawned {
  std::vector<pid_t> pids;
  ~Spawned() {
    for (pid_t p : pids) {
      int status = 0;
      ::waitpid(p, &status, 0);
    }
  }
};

pid_t spawn_worker(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, "/proc/self/exe", nullptr, nullptr, argv.data(), environ);
  if (rc != 0) throw WorkerFailure(fmt::format("cannot spawn worker process: {}", std::strerror(rc)));
  return pid;
}

int cmd_gen(const std::string& out, const std::string& spec_file, const Flags& f) {
  KeyValues kv;
  if (!spec_file.empty()) kv = read_key_values(spec_file);
  for (const auto& [k, v] : f) {
    if (!v.empty()) kv[k] = v;
  }
  const SyntheticSpec spec = SyntheticSpec::from_key_values(kv);
  const Dataset ds = generate(spec);
  write_dataset(out, ds);
  fmt::print("wrote {} blocks to {} (sigma2={}, realized_snr_db={})\n", spec.blocks, out, format_double(ds.sigma2),
             format_double(ds.realized_snr_db));
  return kOk;
}

struct SolveInputs {
  std::vector<DataBlock> y;
  Initialization init;
  std::vector<std::pair<std::string, std::string>> hashes;
};

SolveInputs load_inputs(const fs::path& dataset, const UnmixSettings& s, const std::string& m0_path,
                        const std::vector<std::string>& a0_paths) {
  SolveInputs in;
  const auto y_raw = read_data_blocks(dataset);
  for (std::size_t w = 0; w < y_raw.size(); ++w) {
    const std::string name = fmt::format("Y_{}.fmat", w + 1);
    in.hashes.emplace_back(name, sha256_file(dataset / name));
  }
  std::size_t endmembers = 0;
  if (fs::exists(dataset / "manifest.txt")) {
    const auto kv = read_key_values(dataset / "manifest.txt");
    if (auto it = kv.find("endmembers"); it != kv.end()) {
      endmembers = static_cast<std::size_t>(parse_u64(it->second, "endmembers"));
    }
  }

  Initialization init;
  if (s.init == "perturbed") {
    const Mat m_true = read_fmat(dataset / "M_true.fmat");
    init = perturbed_init(m_true, read_numbered(dataset, "A", y_raw.size()), s.init_noise, s.init_seed);
  } else if (s.init == "data") {
    if (endmembers == 0) throw DataGenError("data init needs 'endmembers' in the dataset manifest");
    init = data_init(y_raw, endmembers, s.init_seed);
  } else {
    if (m0_path.empty() || a0_paths.empty()) throw IoError(IoError::Kind::kOpen, "files init needs --m0 and --a0");
    init.m.m = read_fmat(m0_path);
    for (std::size_t w = 0; w < a0_paths.size(); ++w) {
      init.a.push_back(AbundanceBlock{read_fmat(a0_paths[w]), static_cast<WorkerId>(w)});
    }
  }

  const std::size_t omega = s.workers.value_or(y_raw.size());
  if (omega == y_raw.size() && init.a.size() == omega) {
    in.y = y_raw;
  } else {
    const auto ys = repartition(blocks_of(y_raw), omega);
    std::vector<Mat> as;
    for (const auto& a : init.a) as.push_back(a.a);
    const auto a_split = repartition(as, omega);
    init.a.clear();
    for (std::size_t w = 0; w < omega; ++w) {
      in.y.push_back(DataBlock{ys[w], static_cast<WorkerId>(w)});
      init.a.push_back(AbundanceBlock{a_split[w], static_cast<WorkerId>(w)});
    }
  }
  in.init = std::move(init);
  return in;
}

int write_results(const fs::path& out, const RunResult& r, const UnmixSettings& s, const SolveInputs& in,
                  std::chrono::system_clock::time_point started) {
  fs::create_directories(out);
  write_fmat(out / "M_est.fmat", r.m.m);
  for (std::size_t w = 0; w < r.a.size(); ++w) write_fmat(out / fmt::format("A_est_{}.fmat", w + 1), r.a[w].a);
  export_trace(r.trace, out / "trace.csv");

  UnmixSettings effective = s;
  effective.solver = s.solver.normalized(in.y.size());
  RunManifest man;
  man.config = settings_to_key_values(effective);
  man.config["workers"] = std::to_string(in.y.size());
  man.dataset_hashes = in.hashes;
  man.mode = to_string(s.solver.mode);
  man.started = iso8601_utc(started);
  man.finished = iso8601_utc(std::chrono::system_clock::now());
  man.final_objective = r.trace.back().objective;
  man.iterations = r.trace.back().k;
  man.exit_reason = to_string(r.exit);
  man.abort_message = r.abort_message;
  man.diagnostics = diagnostics_summary(r);
  write_key_values(out / "manifest.txt", man.to_key_values());

  fmt::print("exit={} iterations={} objective={} wall_clock_ms={:.1f}\n", man.exit_reason, man.iterations,
             format_double(man.final_objective), r.trace.back().wall_clock_ms);
  if (r.exit == ExitReason::kAborted) {
    spdlog::error("run aborted: {}", r.abort_message);
    return kRuntimeAbort;
  }
  return kOk;
}

int cmd_unmix(const fs::path& dataset, const fs::path& out, const std::string& config, const Flags& f,
              const std::string& m0, const std::vector<std::string>& a0) {
  const UnmixSettings s = merge_settings(config, f);
  const SolveInputs in = load_inputs(dataset, s, m0, a0);
  const auto started = std::chrono::system_clock::now();
  const SolverConfig cfg = s.solver.normalized(in.y.size());
  if (cfg.mode == Mode::kSync && s.solver.k_threshold != cfg.k_threshold) {
    spdlog::info("sync mode: K set to {} and gamma fixed at 1", cfg.k_threshold);
  }

  RunResult r;
  if (s.scheduler == "virtual") {
    VirtualTimeTransport t(in.y, cfg.worker_delay, cfg.seed);
    r = run(in.y, in.init.a, in.init.m, cfg, t);
  } else if (s.scheduler == "threads") {
    ThreadTransport t(in.y, cfg.worker_delay, cfg.seed);
    r = run(in.y, in.init.a, in.init.m, cfg, t);
  } else {
    // Workers read their blocks from disk, so write them when re-partitioned.
    fs::path data_dir = dataset;
    if (in.y.size() != count_numbered(dataset, "Y")) {
      data_dir = out / "blocks";
      fs::create_directories(data_dir);
      for (std::size_t w = 0; w < in.y.size(); ++w) write_fmat(data_dir / fmt::format("Y_{}.fmat", w + 1), in.y[w].y);
    }
    Spawned children;
    r = serve_master(Endpoint{"127.0.0.1", 0}, in.y, in.init.a, in.init.m, cfg, std::nullopt, [&](std::uint16_t port) {
      for (std::size_t w = 0; w < in.y.size(); ++w) {
        std::vector<std::string> args = {"auw",         "worker",   "--connect", fmt::format("127.0.0.1:{}", port),
                                         "--data",      data_dir.string(), "--worker-id", std::to_string(w),
                                         "--seed",      std::to_string(cfg.seed)};
        if (!cfg.worker_delay.empty()) {
          const auto& d = cfg.worker_delay[w];
          args.push_back("--delay-ms");
          args.push_back(d.lo_ms == d.hi_ms ? format_double(d.lo_ms)
                                            : fmt::format("{}:{}", format_double(d.lo_ms), format_double(d.hi_ms)));
        }
        children.pids.push_back(spawn_worker(args));
      }
    });
  }
  return write_results(out, r, s, in, started);
}

int cmd_master(const fs::path& dataset, const fs::path& out, const std::string& bind, const std::string& config,
               const Flags& f) {
  const UnmixSettings s = merge_settings(config, f);
  const SolveInputs in = load_inputs(dataset, s, {}, {});
  const auto started = std::chrono::system_clock::now();
  const SolverConfig cfg = s.solver.normalized(in.y.size());
  RunResult r = serve_master(parse_endpoint(bind), in.y, in.init.a, in.init.m, cfg, std::nullopt, [](std::uint16_t port) {
    fmt::print("listening on port {}\n", port);
    std::fflush(stdout);
  });
  return write_results(out, r, s, in, started);
}

int cmd_worker(const std::string& connect, const std::string& data, const std::string& id, const std::string& delay,
               std::uint64_t seed) {
  WorkerOptions opts;
  if (!id.empty()) opts.requested_id = static_cast<WorkerId>(parse_u64(id, "worker-id"));
  if (!delay.empty()) {
    const auto d = parse_delays(delay);
    if (d.size() != 1) throw IoError(IoError::Kind::kParse, "--delay-ms takes a single value for a worker");
    opts.delay = d.front();
  }
  opts.seed = seed;
  const std::size_t served = run_worker(parse_endpoint(connect), fmat_block_loader(data), opts);
  spdlog::info("worker done after {} tasks", served);
  return kOk;
}

int cmd_metrics(const fs::path& results, const fs::path& truth, bool use_truth, const std::string& csv,
                const std::string& out) {
  const Mat m_true = read_fmat(truth / "M_true.fmat");
  const std::size_t omega = count_numbered(truth, "Y");
  if (omega == 0) throw IoError(IoError::Kind::kOpen, fmt::format("no Y_1.fmat in {}", truth.string()));
  std::vector<Mat> y = read_numbered(truth, "Y", omega);
  std::vector<Mat> a_true = read_numbered(truth, "A", omega);

  Mat m_est;
  std::vector<Mat> a_est;
  if (use_truth) {
    m_est = m_true;
    a_est = a_true;
  } else {
    m_est = read_fmat(results / "M_est.fmat");
    a_est = read_numbered(results, "A_est", count_numbered(results, "A_est"));
    if (a_est.empty()) throw IoError(IoError::Kind::kOpen, fmt::format("no A_est_1.fmat in {}", results.string()));
  }
  if (a_est.size() != a_true.size()) {
    // Different partition than the dataset: compare over all pixels at once.
    y = {hconcat(y)};
    a_true = {hconcat(a_true)};
    a_est = {hconcat(a_est)};
  }
  const MetricsReport rep = evaluate(m_true, a_true, y, m_est, a_est);
  const std::string text = format_key_values(rep.to_key_values());
  std::cout << text;
  if (!out.empty()) {
    std::ofstream o(out, std::ios::trunc);
    if (!o) throw IoError(IoError::Kind::kOpen, "cannot open " + out);
    o << text;
  }
  if (!csv.empty()) {
    const bool fresh = !fs::exists(csv) || fs::file_size(csv) == 0;
    std::ofstream o(csv, std::ios::app);
    if (!o) throw IoError(IoError::Kind::kOpen, "cannot open " + csv);
    if (fresh) o << MetricsReport::csv_header() << '\n';
    o << rep.csv_row() << '\n';
  }
  return kOk;
}

int cmd_plot(const std::vector<std::string>& traces, const std::vector<std::string>& labels, const std::string& out) {
  std::vector<NamedTrace> series;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string label = i < labels.size() ? labels[i] : fs::path(traces[i]).parent_path().filename().string();
    series.push_back(NamedTrace{label.empty() ? traces[i] : label, read_trace(traces[i])});
  }
  const std::string svg = render_svg(series);
  std::ofstream o(out, std::ios::trunc);
  if (!o) throw IoError(IoError::Kind::kOpen, "cannot open " + out);
  o << svg;
  return kOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  init_logging();
  CLI::App app{"Distributed constrained matrix factorization for hyperspectral unmixing", "auw"};
  app.require_subcommand(1);

  Flags gen_flags;
  std::string gen_out, gen_spec;
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--spec", gen_spec, "key=value spec file");
  flag(gen, gen_flags, "--bands", "bands", "spectral bands L (default 50)");
  flag(gen, gen_flags, "--endmembers", "endmembers", "endmembers R (default 3)");
  flag(gen, gen_flags, "--pixels", "pixels_per_block", "pixels per block (default 400)");
  flag(gen, gen_flags, "--blocks", "blocks", "number of blocks (default 3)");
  flag(gen, gen_flags, "--snr", "snr_db", "noise level in dB, or inf (default 30)");
  flag(gen, gen_flags, "--smoothness", "smoothness", "temporal variation between blocks in [0,1) (default 0.3)");
  flag(gen, gen_flags, "--seed", "seed", "generator seed (default 1)");

  Flags unmix_flags;
  std::string unmix_data, unmix_out, unmix_config, unmix_m0;
  std::vector<std::string> unmix_a0;
  auto* unmix = app.add_subcommand("unmix", "estimate endmembers and abundances");
  unmix->add_option("dataset", unmix_data, "dataset directory")->required();
  unmix->add_option("--out", unmix_out, "results directory")->required();
  unmix->add_option("--config", unmix_config, "key=value settings file (flags take precedence)");
  unmix->add_option("--m0", unmix_m0, "initial endmembers (init=files)");
  unmix->add_option("--a0", unmix_a0, "initial abundance blocks (init=files)");
  add_solver_flags(unmix, unmix_flags);

  Flags master_flags;
  std::string master_data, master_out, master_config, master_bind = "0.0.0.0:7070";
  auto* master = app.add_subcommand("master", "run the master over TCP and wait for workers");
  master->add_option("dataset", master_data, "dataset directory")->required();
  master->add_option("--out", master_out, "results directory")->required();
  master->add_option("--bind", master_bind, "host:port to listen on")->capture_default_str();
  master->add_option("--config", master_config, "key=value settings file (flags take precedence)");
  add_solver_flags(master, master_flags);

  std::string w_connect, w_data, w_id, w_delay;
  std::uint64_t w_seed = 0;
  auto* worker = app.add_subcommand("worker", "serve one data block to a TCP master");
  worker->add_option("--connect", w_connect, "master host:port")->required();
  worker->add_option("--data", w_data, "dataset directory or a single Y block file")->required();
  worker->add_option("--worker-id", w_id, "requested worker id (0-based); the master assigns one if omitted");
  worker->add_option("--delay-ms", w_delay, "sleep after each task, fixed or lo:hi");
  worker->add_option("--seed", w_seed, "seed for the delay stream");

  std::string met_results, met_truth, met_csv, met_out;
  bool met_use_truth = false;
  auto* metrics = app.add_subcommand("metrics", "compare an estimate with the ground truth");
  metrics->add_option("results", met_results, "results directory");
  metrics->add_option("--truth", met_truth, "dataset directory with the ground truth")->required();
  metrics->add_flag("--truth-factors", met_use_truth, "evaluate the true factors themselves");
  metrics->add_option("--csv", met_csv, "append a CSV row to this file");
  metrics->add_option("--out", met_out, "also write the report here");

  std::vector<std::string> plot_traces, plot_labels;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot", "plot objective traces as SVG");
  plot->add_option("traces", plot_traces, "trace.csv files")->required();
  plot->add_option("--label", plot_labels, "series labels, in order");
  plot->add_option("--out", plot_out, "output SVG")->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*gen) return cmd_gen(gen_out, gen_spec, gen_flags);
    if (*unmix) return cmd_unmix(unmix_data, unmix_out, unmix_config, unmix_flags, unmix_m0, unmix_a0);
    if (*master) return cmd_master(master_data, master_out, master_bind, master_config, master_flags);
    if (*worker) return cmd_worker(w_connect, w_data, w_id, w_delay, w_seed);
    if (*metrics) {
      if (met_results.empty() && !met_use_truth) {
        std::cerr << "metrics: results directory required unless --truth-factors is given\n";
        return kUsage;
      }
      return cmd_metrics(met_results, met_truth, met_use_truth, met_csv, met_out);
    }
    if (*plot) return cmd_plot(plot_traces, plot_labels, plot_out);
  } catch (const WorkerFailure& e) {
    spdlog::error("{}", e.what());
    return kRuntimeAbort;
  } catch (const TransportError& e) {
    spdlog::error("{}", e.what());
    return kRuntimeAbort;
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kDataError;
  }
  return kUsage;
}

}  // namespace auw::cli
