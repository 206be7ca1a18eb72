#include "auw/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "auw/bytes.hpp"

namespace auw {

namespace {

constexpr std::uint8_t kMagic[4] = {'A', 'U', 'W', 'P'};
constexpr std::size_t kMatrixHeaderBytes = 16;
// Largest frame a peer may announce before we refuse to buffer it.
constexpr std::size_t kMaxFrameBytes = std::size_t{1} << 32;

bool known_type(std::uint8_t t) { return t >= 1 && t <= 4; }

}  // namespace

bool bitwise_equal(const WireMessage& a, const WireMessage& b) noexcept {
  if (a.type != b.type || a.worker_id != b.worker_id || a.stamp != b.stamp) return false;
  if (a.matrices.size() != b.matrices.size()) return false;
  for (std::size_t i = 0; i < a.matrices.size(); ++i) {
    if (!bitwise_equal(a.matrices[i], b.matrices[i])) return false;
  }
  return true;
}

std::vector<std::uint8_t> encode(const WireMessage& msg) {
  std::size_t total = kWireHeaderBytes;
  for (const auto& m : msg.matrices) total += kMatrixHeaderBytes + m.size() * 8;
  std::vector<std::uint8_t> out;
  out.reserve(total);
  for (std::uint8_t c : kMagic) bytes::put_u8(out, c);
  bytes::put_u8(out, kWireVersion);
  bytes::put_u8(out, static_cast<std::uint8_t>(msg.type));
  bytes::put_u32(out, msg.worker_id);
  bytes::put_u64(out, msg.stamp);
  bytes::put_u32(out, static_cast<std::uint32_t>(msg.matrices.size()));
  for (const auto& m : msg.matrices) {
    bytes::put_u64(out, m.rows());
    bytes::put_u64(out, m.cols());
    for (double v : m.data()) bytes::put_f64(out, v);
  }
  return out;
}

WireMessage decode(std::span<const std::uint8_t> in) {
  using K = DecodeError::Kind;
  if (in.size() < kWireHeaderBytes) {
    throw DecodeError(K::kTruncated, fmt::format("frame of {} bytes is shorter than the header", in.size()));
  }
  if (!std::equal(std::begin(kMagic), std::end(kMagic), in.begin())) throw DecodeError(K::kBadMagic, "bad magic");

  bytes::Reader r(in);
  r.skip(4);
  const auto version = *r.u8();
  if (version != kWireVersion) {
    throw DecodeError(K::kUnsupportedVersion, fmt::format("unsupported protocol version {}", version));
  }
  const auto type = *r.u8();
  if (!known_type(type)) throw DecodeError(K::kUnknownType, fmt::format("unknown message type {}", type));

  WireMessage msg;
  msg.type = static_cast<MsgType>(type);
  msg.worker_id = *r.u32();
  msg.stamp = *r.u64();
  const std::uint32_t count = *r.u32();
  if (count > r.remaining() / kMatrixHeaderBytes) {
    throw DecodeError(K::kTruncated, fmt::format("{} matrices announced, frame too short", count));
  }
  msg.matrices.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto rows = r.u64();
    const auto cols = r.u64();
    if (!rows || !cols) throw DecodeError(K::kTruncated, "truncated matrix header");
    const auto payload = bytes::payload_bytes(*rows, *cols);
    if (!payload || *payload > r.remaining()) {
      throw DecodeError(K::kTruncated, fmt::format("matrix {} ({}x{}) exceeds frame", i, *rows, *cols));
    }
    std::vector<double> values(*payload / 8);
    for (double& v : values) {
      v = *r.f64();
      if (!std::isfinite(v)) throw DecodeError(K::kNonFinite, fmt::format("non-finite entry in matrix {}", i));
    }
    msg.matrices.emplace_back(static_cast<std::size_t>(*rows), static_cast<std::size_t>(*cols), std::move(values));
  }
  if (r.remaining() != 0) {
    throw DecodeError(K::kTrailing, fmt::format("{} trailing bytes after frame", r.remaining()));
  }
  return msg;
}

// ---------------------------------------------------------------------------

DelaySampler::DelaySampler(std::vector<DelaySpec> specs, std::uint64_t seed, std::size_t workers)
    : specs_(std::move(specs)) {
  if (!specs_.empty() && specs_.size() != workers) {
    throw Error(fmt::format("{} delay entries for {} workers", specs_.size(), workers));
  }
  rngs_.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(w)};
    rngs_.emplace_back(seq);
  }
}

double DelaySampler::sample_ms(WorkerId w) {
  if (specs_.empty()) return 0.0;
  const auto& d = specs_.at(w);
  if (d.hi_ms <= d.lo_ms) return d.lo_ms;
  return std::uniform_real_distribution<double>(d.lo_ms, d.hi_ms)(rngs_.at(w));
}

namespace {

ResultMsg run_step(const StepFn& step, const DataBlock& y, TaskMsg task) {
  WorkerState st{task.worker_id, y, AbundanceBlock{std::move(task.a), task.worker_id},
                 EndmemberMatrix{std::move(task.m), task.stamp}};
  AbundanceBlock out = step(st);
  return ResultMsg{task.worker_id, task.stamp, std::move(out.a)};
}

}  // namespace

ThreadTransport::ThreadTransport(std::vector<DataBlock> blocks, std::vector<DelaySpec> delays, std::uint64_t seed,
                                 StepFn step)
    : blocks_(std::move(blocks)), step_(std::move(step)), delays_(std::move(delays), seed, blocks_.size()) {
  for (std::size_t w = 0; w < blocks_.size(); ++w) inboxes_.push_back(std::make_unique<BlockingQueue<TaskMsg>>());
  for (std::size_t w = 0; w < blocks_.size(); ++w) {
    threads_.emplace_back([this, w] { worker_loop(static_cast<WorkerId>(w)); });
  }
}

ThreadTransport::~ThreadTransport() { shutdown(); }

void ThreadTransport::worker_loop(WorkerId w) {
  while (auto task = inboxes_[w]->pop()) {
    Outcome out;
    try {
      out.result = run_step(step_, blocks_[w], std::move(*task));
      const double ms = delays_.sample_ms(w);
      if (ms > 0.0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
    } catch (const std::exception& e) {
      out.result.worker_id = w;
      out.failure = e.what();
      if (out.failure.empty()) out.failure = "unknown failure";
    }
    const bool failed = !out.failure.empty();
    results_.push(std::move(out));
    if (failed) return;
  }
}

void ThreadTransport::send(TaskMsg task) {
  if (task.worker_id >= inboxes_.size()) throw ProtocolError(fmt::format("no worker {}", task.worker_id));
  inboxes_[task.worker_id]->push(std::move(task));
}

ResultMsg ThreadTransport::recv() {
  auto out = results_.pop();
  if (!out) throw WorkerFailure("transport closed");
  if (!out->failure.empty()) {
    throw WorkerFailure(fmt::format("worker {} failed: {}", out->result.worker_id, out->failure));
  }
  return std::move(out->result);
}

double ThreadTransport::now_ms() const {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
}

void ThreadTransport::shutdown() {
  if (stopped_) return;
  stopped_ = true;
  for (auto& q : inboxes_) q->close();
  for (auto& t : threads_) t.join();
  results_.close();
}

// ---------------------------------------------------------------------------

VirtualTimeTransport::VirtualTimeTransport(std::vector<DataBlock> blocks, std::vector<DelaySpec> delays,
                                           std::uint64_t seed, double compute_ms, StepFn step)
    : blocks_(std::move(blocks)),
      step_(std::move(step)),
      delays_(std::move(delays), seed, blocks_.size()),
      compute_ms_(compute_ms) {}

void VirtualTimeTransport::send(TaskMsg task) {
  const WorkerId w = task.worker_id;
  if (w >= blocks_.size()) throw ProtocolError(fmt::format("no worker {}", w));
  Pending p{now_ + compute_ms_ + delays_.sample_ms(w), seq_++, {}, {}};
  try {
    p.result = run_step(step_, blocks_[w], std::move(task));
  } catch (const std::exception& e) {
    p.result.worker_id = w;
    p.failure = e.what();
    if (p.failure.empty()) p.failure = "unknown failure";
  }
  pending_.push(std::move(p));
}

ResultMsg VirtualTimeTransport::recv() {
  if (pending_.empty()) throw WorkerFailure("no outstanding tasks");
  Pending p = pending_.top();
  pending_.pop();
  now_ = std::max(now_, p.done_at);
  if (!p.failure.empty()) throw WorkerFailure(fmt::format("worker {} failed: {}", p.result.worker_id, p.failure));
  return std::move(p.result);
}

// ---------------------------------------------------------------------------

ResultMsg PinnedOrderTransport::recv() {
  if (next_ >= order_.size()) {
    if (!buffered_.empty()) {
      ResultMsg r = std::move(buffered_.front());
      buffered_.pop_front();
      return r;
    }
    ResultMsg r = inner_.recv();
    --outstanding_;
    return r;
  }
  const WorkerId want = order_[next_];
  for (;;) {
    auto it = std::find_if(buffered_.begin(), buffered_.end(), [&](const ResultMsg& r) { return r.worker_id == want; });
    if (it != buffered_.end()) {
      ResultMsg r = std::move(*it);
      buffered_.erase(it);
      ++next_;
      return r;
    }
    if (outstanding_ == 0) {
      throw ProtocolError(fmt::format("pinned order expects worker {} which has no outstanding task", want));
    }
    buffered_.push_back(inner_.recv());
    --outstanding_;
  }
}

// ---------------------------------------------------------------------------
// TCP helpers

namespace {

[[noreturn]] void sys_fail(const std::string& what) {
  throw TransportError(fmt::format("{}: {}", what, std::strerror(errno)));
}

class Fd {
 public:
  explicit Fd(int fd = -1) : fd_(fd) {}
  ~Fd() { reset(); }
  Fd(Fd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  int get() const noexcept { return fd_; }
  int release() noexcept { return std::exchange(fd_, -1); }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_;
};

bool write_all(int fd, std::span<const std::uint8_t> buf) {
  std::size_t off = 0;
  while (off < buf.size()) {
    const ssize_t n = ::send(fd, buf.data() + off, buf.size() - off, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

// false on EOF or error.
bool read_exact(int fd, std::uint8_t* dst, std::size_t len) {
  std::size_t off = 0;
  while (off < len) {
    const ssize_t n = ::recv(fd, dst + off, len - off, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    off += static_cast<std::size_t>(n);
  }
  return true;
}

bool send_frame(int fd, const WireMessage& msg) { return write_all(fd, encode(msg)); }

// Reads one frame using the lengths announced in its headers. nullopt on EOF.
std::optional<WireMessage> read_frame(int fd) {
  std::vector<std::uint8_t> buf(kWireHeaderBytes);
  if (!read_exact(fd, buf.data(), buf.size())) return std::nullopt;
  bytes::Reader hdr(buf);
  hdr.skip(18);
  const std::uint32_t count = *hdr.u32();
  // Validate magic/version/type before trusting any length.
  if (!std::equal(std::begin(kMagic), std::end(kMagic), buf.begin()) || buf[4] != kWireVersion ||
      !known_type(buf[5])) {
    return decode(buf);  // throws with the precise reason
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t at = buf.size();
    buf.resize(at + kMatrixHeaderBytes);
    if (!read_exact(fd, buf.data() + at, kMatrixHeaderBytes)) return std::nullopt;
    bytes::Reader mh(std::span<const std::uint8_t>(buf).subspan(at));
    const auto payload = bytes::payload_bytes(*mh.u64(), *mh.u64());
    if (!payload || *payload > kMaxFrameBytes - buf.size()) {
      throw DecodeError(DecodeError::Kind::kTruncated, "announced matrix too large");
    }
    const std::size_t body = buf.size();
    buf.resize(body + *payload);
    if (!read_exact(fd, buf.data() + body, *payload)) return std::nullopt;
  }
  return decode(buf);
}

addrinfo* resolve(const Endpoint& ep, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  std::string host = ep.host;
  if (host.empty() && !passive) host = "127.0.0.1";
  const std::string port = std::to_string(ep.port);
  addrinfo* res = nullptr;
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), port.c_str(), &hints, &res);
  if (rc != 0) throw TransportError(fmt::format("cannot resolve {}:{}: {}", host, ep.port, ::gai_strerror(rc)));
  return res;
}

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

void set_recv_timeout(int fd, std::chrono::milliseconds t) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(t.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((t.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
}

}  // namespace

Endpoint parse_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  if (colon == std::string::npos) throw Error(fmt::format("endpoint '{}' is not host:port", s));
  Endpoint ep;
  ep.host = s.substr(0, colon);
  const std::string port = s.substr(colon + 1);
  unsigned long v = 0;
  try {
    std::size_t used = 0;
    v = std::stoul(port, &used);
    if (used != port.size()) throw std::invalid_argument(port);
  } catch (const std::exception&) {
    throw Error(fmt::format("endpoint '{}' has a bad port", s));
  }
  if (v > 65535) throw Error(fmt::format("endpoint '{}' has a bad port", s));
  ep.port = static_cast<std::uint16_t>(v);
  return ep;
}

TcpMasterTransport::TcpMasterTransport(const Endpoint& bind, std::size_t workers) : sockets_(workers, -1) {
  if (workers == 0) throw PartitionError("at least one worker is required");
  addrinfo* res = resolve(bind, true);
  Fd fd(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
  if (fd.get() < 0) {
    ::freeaddrinfo(res);
    sys_fail("socket");
  }
  int one = 1;
  ::setsockopt(fd.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  const int rc = ::bind(fd.get(), res->ai_addr, res->ai_addrlen);
  ::freeaddrinfo(res);
  if (rc != 0) sys_fail(fmt::format("bind {}:{}", bind.host, bind.port));
  if (::listen(fd.get(), static_cast<int>(workers) + 4) != 0) sys_fail("listen");
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  ::getsockname(fd.get(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  listen_fd_ = fd.release();
}

TcpMasterTransport::~TcpMasterTransport() {
  shutdown();
  if (listen_fd_ >= 0) ::close(listen_fd_);
}

void TcpMasterTransport::accept_workers(std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  auto connected = [&] { return std::count_if(sockets_.begin(), sockets_.end(), [](int s) { return s >= 0; }); };
  while (static_cast<std::size_t>(connected()) < sockets_.size()) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      throw TransportError(fmt::format("handshake timed out: {} of {} workers connected", connected(), sockets_.size()));
    }
    pollfd p{listen_fd_, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(left.count()));
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) sys_fail("poll");
    if (rc == 0) continue;

    Fd conn(::accept(listen_fd_, nullptr, nullptr));
    if (conn.get() < 0) continue;
    set_nodelay(conn.get());
    set_recv_timeout(conn.get(), std::max(left, std::chrono::milliseconds{1}));
    std::optional<WireMessage> hello;
    try {
      hello = read_frame(conn.get());
    } catch (const DecodeError& e) {
      spdlog::warn("dropping connection with malformed handshake: {}", e.what());
      continue;
    }
    if (!hello || hello->type != MsgType::kHello) {
      spdlog::warn("dropping connection without HELLO");
      continue;
    }
    WorkerId id = hello->worker_id;
    if (id == kAnyWorker) {
      const auto free = std::find(sockets_.begin(), sockets_.end(), -1);
      id = static_cast<WorkerId>(free - sockets_.begin());
    }
    if (id >= sockets_.size() || sockets_[id] >= 0) {
      spdlog::warn("rejecting worker id {}", hello->worker_id);
      send_frame(conn.get(), WireMessage{MsgType::kShutdown, hello->worker_id, 0, {}});
      continue;
    }
    set_recv_timeout(conn.get(), std::chrono::milliseconds{0});
    if (!send_frame(conn.get(), WireMessage{MsgType::kHello, id, 0, {}})) continue;
    spdlog::info("worker {} connected", id);
    sockets_[id] = conn.release();
  }
}

void TcpMasterTransport::send(TaskMsg task) {
  const WorkerId w = task.worker_id;
  if (w >= sockets_.size() || sockets_[w] < 0) throw ProtocolError(fmt::format("no connected worker {}", w));
  WireMessage msg{MsgType::kAssign, w, task.stamp, {}};
  msg.matrices.push_back(std::move(task.m));
  msg.matrices.push_back(std::move(task.a));
  if (!send_frame(sockets_[w], msg)) throw WorkerFailure(fmt::format("lost connection to worker {}", w));
}

ResultMsg TcpMasterTransport::recv() {
  const std::size_t n = sockets_.size();
  std::vector<pollfd> fds(n);
  for (;;) {
    // Rotate the starting point so one chatty worker cannot starve the others.
    for (std::size_t i = 0; i < n; ++i) fds[i] = pollfd{sockets_[(rr_ + i) % n], POLLIN, 0};
    const int rc = ::poll(fds.data(), fds.size(), -1);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) sys_fail("poll");
    for (std::size_t i = 0; i < n; ++i) {
      if (fds[i].revents == 0) continue;
      const WorkerId w = static_cast<WorkerId>((rr_ + i) % n);
      rr_ = (w + 1) % n;
      std::optional<WireMessage> msg;
      try {
        msg = read_frame(sockets_[w]);
      } catch (const DecodeError& e) {
        throw WorkerFailure(fmt::format("worker {} sent a malformed frame: {}", w, e.what()));
      }
      if (!msg) throw WorkerFailure(fmt::format("worker {} disconnected", w));
      if (msg->type != MsgType::kResult || msg->matrices.size() != 1 || msg->worker_id != w) {
        throw WorkerFailure(fmt::format("worker {} sent an unexpected frame", w));
      }
      return ResultMsg{w, msg->stamp, std::move(msg->matrices.front())};
    }
  }
}

double TcpMasterTransport::now_ms() const {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
}

void TcpMasterTransport::shutdown() {
  for (std::size_t w = 0; w < sockets_.size(); ++w) {
    if (sockets_[w] < 0) continue;
    send_frame(sockets_[w], WireMessage{MsgType::kShutdown, static_cast<WorkerId>(w), 0, {}});
    ::close(sockets_[w]);
    sockets_[w] = -1;
  }
}

BlockLoader fmat_block_loader(const std::filesystem::path& path) {
  return [path](WorkerId id) {
    const auto file = std::filesystem::is_directory(path) ? path / fmt::format("Y_{}.fmat", id + 1) : path;
    return DataBlock{read_fmat(file), id};
  };
}

std::size_t run_worker(const Endpoint& master, const BlockLoader& load, const WorkerOptions& opts) {
  const auto deadline = std::chrono::steady_clock::now() + opts.connect_timeout;
  Fd fd;
  for (;;) {
    addrinfo* res = resolve(master, false);
    fd = Fd(::socket(res->ai_family, res->ai_socktype, res->ai_protocol));
    const int rc = fd.get() < 0 ? -1 : ::connect(fd.get(), res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc == 0) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      sys_fail(fmt::format("connect {}:{}", master.host, master.port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds{50});
  }
  set_nodelay(fd.get());

  if (!send_frame(fd.get(), WireMessage{MsgType::kHello, opts.requested_id, 0, {}})) {
    throw TransportError("handshake failed: connection closed");
  }
  const auto ack = read_frame(fd.get());
  if (!ack) throw TransportError("handshake failed: connection closed");
  if (ack->type == MsgType::kShutdown) {
    throw TransportError(fmt::format("master rejected worker id {}", opts.requested_id));
  }
  if (ack->type != MsgType::kHello) throw TransportError("handshake failed: unexpected reply");
  const WorkerId id = ack->worker_id;
  spdlog::info("registered as worker {}", id);

  const DataBlock y = load(id);
  DelaySampler delays(opts.delay == DelaySpec{} ? std::vector<DelaySpec>{} : std::vector<DelaySpec>(id + 1, opts.delay),
                      opts.seed, id + 1);

  std::size_t served = 0;
  for (;;) {
    auto msg = read_frame(fd.get());
    if (!msg) throw TransportError("master closed the connection");
    if (msg->type == MsgType::kShutdown) break;
    if (msg->type != MsgType::kAssign || msg->matrices.size() != 2) {
      throw TransportError("unexpected frame from master");
    }
    if (opts.crash_after && served >= *opts.crash_after) {
      spdlog::warn("worker {} dropping connection", id);
      return served;
    }
    ResultMsg r = run_step(opts.step, y, TaskMsg{id, msg->stamp, std::move(msg->matrices[0]), std::move(msg->matrices[1])});
    const double ms = delays.sample_ms(id);
    if (ms > 0.0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
    WireMessage out{MsgType::kResult, id, r.stamp, {}};
    out.matrices.push_back(std::move(r.a_hat));
    if (!send_frame(fd.get(), out)) throw TransportError("master closed the connection");
    ++served;
  }
  return served;
}

RunResult serve_master(const Endpoint& bind, std::span<const DataBlock> y, std::vector<AbundanceBlock> a0,
                       EndmemberMatrix m0, const SolverConfig& cfg, std::optional<std::vector<WorkerId>> arrival_order,
                       std::function<void(std::uint16_t)> on_listening) {
  TcpMasterTransport tcp(bind, y.size());
  spdlog::info("master listening on port {}", tcp.port());
  if (on_listening) on_listening(tcp.port());
  tcp.accept_workers();
  if (arrival_order) {
    PinnedOrderTransport pinned(tcp, std::move(*arrival_order));
    return run(y, std::move(a0), std::move(m0), cfg, pinned);
  }
  return run(y, std::move(a0), std::move(m0), cfg, tcp);
}

}  // namespace auw
