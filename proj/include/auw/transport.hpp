#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "auw/error.hpp"
#include "auw/matcore.hpp"
#include "auw/model.hpp"
#include "auw/runtime.hpp"

namespace auw {

// ---------------------------------------------------------------------------
// AUWP wire format
//
//   "AUWP" | u8 version=1 | u8 msg_type | u32 worker_id | u64 iteration_stamp
//   | u32 matrix_count | matrix_count × (u64 rows | u64 cols | rows·cols f64)
//
// All integers and floats little-endian. Frame length is implied by the header.
// ---------------------------------------------------------------------------

enum class MsgType : std::uint8_t { kAssign = 1, kResult = 2, kShutdown = 3, kHello = 4 };

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderBytes = 22;
/// worker_id in a HELLO asking the master to pick an id.
inline constexpr WorkerId kAnyWorker = 0xFFFFFFFFu;

struct WireMessage {
  MsgType type = MsgType::kShutdown;
  WorkerId worker_id = 0;
  std::uint64_t stamp = 0;
  std::vector<Mat> matrices;
};

bool bitwise_equal(const WireMessage& a, const WireMessage& b) noexcept;

class DecodeError : public Error {
 public:
  enum class Kind { kTruncated, kBadMagic, kUnsupportedVersion, kUnknownType, kNonFinite, kTrailing };

  DecodeError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

std::vector<std::uint8_t> encode(const WireMessage& msg);
/// Decodes exactly one frame occupying all of `bytes`. Never reads out of
/// bounds; malformed input raises DecodeError.
WireMessage decode(std::span<const std::uint8_t> bytes);

// ---------------------------------------------------------------------------
// In-process transports
// ---------------------------------------------------------------------------

/// Thread-safe FIFO used for the master inbox and per-worker task queues.
template <typename T>
class BlockingQueue {
 public:
  void push(T v) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(v));
    }
    cv_.notify_one();
  }

  /// nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T v = std::move(items_.front());
    items_.pop_front();
    return v;
  }

  void close() {
    {
      std::lock_guard lock(mu_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<T> items_;
  bool closed_ = false;
};

/// Samples per-task artificial delays, one seeded stream per worker.
class DelaySampler {
 public:
  DelaySampler(std::vector<DelaySpec> specs, std::uint64_t seed, std::size_t workers);
  double sample_ms(WorkerId w);

 private:
  std::vector<DelaySpec> specs_;
  std::vector<std::mt19937_64> rngs_;
};

/// One OS thread per worker; results arrive in real completion order.
class ThreadTransport final : public Transport {
 public:
  ThreadTransport(std::vector<DataBlock> blocks, std::vector<DelaySpec> delays = {}, std::uint64_t seed = 0,
                  StepFn step = worker_step);
  ~ThreadTransport() override;

  std::size_t worker_count() const override { return blocks_.size(); }
  void send(TaskMsg task) override;
  ResultMsg recv() override;
  double now_ms() const override;
  void shutdown() override;

 private:
  struct Outcome {
    ResultMsg result;
    std::string failure;  // non-empty when the worker threw
  };

  void worker_loop(WorkerId w);

  std::vector<DataBlock> blocks_;
  StepFn step_;
  DelaySampler delays_;
  std::vector<std::unique_ptr<BlockingQueue<TaskMsg>>> inboxes_;
  BlockingQueue<Outcome> results_;
  std::vector<std::thread> threads_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
  bool stopped_ = false;
};

/// Deterministic discrete-event scheduler. A task sent at virtual time t
/// completes at t + compute_ms + delay (sampled from the seeded per-worker
/// stream); results are delivered in completion order, ties broken by send
/// order. The step runs eagerly on the calling thread.
class VirtualTimeTransport final : public Transport {
 public:
  VirtualTimeTransport(std::vector<DataBlock> blocks, std::vector<DelaySpec> delays = {}, std::uint64_t seed = 0,
                       double compute_ms = 1.0, StepFn step = worker_step);

  std::size_t worker_count() const override { return blocks_.size(); }
  void send(TaskMsg task) override;
  ResultMsg recv() override;
  double now_ms() const override { return now_; }
  void shutdown() override {}

 private:
  struct Pending {
    double done_at;
    std::uint64_t seq;
    ResultMsg result;
    std::string failure;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      return a.done_at != b.done_at ? a.done_at > b.done_at : a.seq > b.seq;
    }
  };

  std::vector<DataBlock> blocks_;
  StepFn step_;
  DelaySampler delays_;
  double compute_ms_;
  double now_ = 0.0;
  std::uint64_t seq_ = 0;
  std::priority_queue<Pending, std::vector<Pending>, Later> pending_;
};

/// Replays a fixed arrival order on top of another transport: results are
/// buffered until the next scheduled worker's result is available. Once the
/// schedule is exhausted results pass through in arrival order.
class PinnedOrderTransport final : public Transport {
 public:
  PinnedOrderTransport(Transport& inner, std::vector<WorkerId> order)
      : inner_(inner), order_(std::move(order)) {}

  std::size_t worker_count() const override { return inner_.worker_count(); }
  void send(TaskMsg task) override {
    inner_.send(std::move(task));
    ++outstanding_;
  }
  /// Throws ProtocolError if the scheduled worker has no task in flight.
  ResultMsg recv() override;
  double now_ms() const override { return inner_.now_ms(); }
  void shutdown() override { inner_.shutdown(); }

 private:
  Transport& inner_;
  std::vector<WorkerId> order_;
  std::size_t next_ = 0;
  std::size_t outstanding_ = 0;  // sent but not yet received from inner_
  std::deque<ResultMsg> buffered_;
};

// ---------------------------------------------------------------------------
// TCP
// ---------------------------------------------------------------------------

class TransportError : public Error {
 public:
  using Error::Error;
};

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;
};

/// "host:port"; host may be empty (means 0.0.0.0 for bind, 127.0.0.1 for connect).
Endpoint parse_endpoint(const std::string& s);

inline constexpr std::chrono::milliseconds kHandshakeTimeout{10'000};

/// Master side of the TCP transport. Construction binds and listens;
/// accept_workers() performs the HELLO handshake with every worker.
class TcpMasterTransport final : public Transport {
 public:
  TcpMasterTransport(const Endpoint& bind, std::size_t workers);
  ~TcpMasterTransport() override;

  TcpMasterTransport(const TcpMasterTransport&) = delete;
  TcpMasterTransport& operator=(const TcpMasterTransport&) = delete;

  /// Port actually bound (useful with port 0).
  std::uint16_t port() const noexcept { return port_; }
  /// Blocks until all workers said HELLO. Duplicate or out-of-range ids are
  /// rejected with SHUTDOWN and do not count. Throws TransportError on timeout.
  void accept_workers(std::chrono::milliseconds timeout = kHandshakeTimeout);

  std::size_t worker_count() const override { return sockets_.size(); }
  void send(TaskMsg task) override;
  ResultMsg recv() override;
  double now_ms() const override;
  void shutdown() override;

 private:
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::vector<int> sockets_;  // indexed by worker id, -1 until connected
  std::size_t rr_ = 0;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Loads the data block for the worker id assigned during the handshake.
using BlockLoader = std::function<DataBlock(WorkerId)>;

/// Loads Y_<id+1>.fmat from a dataset directory, or `path` itself if it is a file.
BlockLoader fmat_block_loader(const std::filesystem::path& path);

struct WorkerOptions {
  WorkerId requested_id = kAnyWorker;
  DelaySpec delay;
  std::uint64_t seed = 0;
  std::chrono::milliseconds connect_timeout = kHandshakeTimeout;
  StepFn step = worker_step;
  /// Test hook: drop the connection without replying after this many tasks.
  std::optional<std::size_t> crash_after;
};

/// Connects, handshakes and serves ASSIGN frames until SHUTDOWN.
/// Returns the number of tasks processed. Throws TransportError on failure
/// (including rejection of the requested id).
std::size_t run_worker(const Endpoint& master, const BlockLoader& load, const WorkerOptions& opts = {});

/// Binds, accepts `y.size()` workers and runs the solver over TCP.
/// `arrival_order`, when given, pins the order in which results are processed.
RunResult serve_master(const Endpoint& bind, std::span<const DataBlock> y, std::vector<AbundanceBlock> a0,
                       EndmemberMatrix m0, const SolverConfig& cfg,
                       std::optional<std::vector<WorkerId>> arrival_order = std::nullopt,
                       std::function<void(std::uint16_t)> on_listening = {});

}  // namespace auw
