#include "auw/diagnostics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "auw/error.hpp"

namespace auw {

void LipschitzTracker::observe_a(WorkerId w, double l) {
  if (w >= a_per_worker_.size()) a_per_worker_.resize(w + 1);
  a_per_worker_[w].add(l);
  a_all_.add(l);
}

double PhiState::push(const Mat& m_next) {
  const double d = frobenius_sq(m_next - last_);
  diffs_.push_back(d);
  last_ = m_next;
  return d;
}

double PhiState::correction(std::size_t steps_back) const {
  if (tau_ == 0 || beta_ == 0.0 || steps_back > diffs_.size()) return 0.0;
  const std::size_t j = diffs_.size() - steps_back;  // iterate index
  double sum = 0.0;
  // D_q lives at diffs_[q - 1]; D_q with q <= 0 is zero by the M^q = M^0 convention.
  for (std::size_t w = 1; w <= tau_ && w <= j; ++w) {
    const std::size_t q = j - w + 1;  // weight τ − w + 1
    sum += static_cast<double>(tau_ - w + 1) * diffs_[q - 1];
  }
  return 0.5 * beta_ * sum;
}

double phi(const PhiState& state, double psi) { return psi + state.correction(); }

std::vector<double> phi_series(std::span<const IterationRecord> trace, std::size_t tau, double beta) {
  std::vector<double> out;
  out.reserve(trace.size());
  if (trace.empty()) return out;
  PhiState st(Mat{});
  st.set_window(tau, beta);
  out.push_back(trace.front().objective);
  for (std::size_t k = 1; k < trace.size(); ++k) {
    st.push_diff(trace[k].m_diff_sq);
    out.push_back(phi(st, trace[k].objective));
  }
  return out;
}

DecreaseCheck check_sufficient_decrease(const DecreaseInputs& in) {
  const double g = in.gamma;
  const double tau = static_cast<double>(in.tau);
  const double cross = in.tau > 0 ? in.l_am_plus : 0.0;

  DecreaseCheck out;
  out.coef_a = std::numeric_limits<double>::infinity();
  double rhs = in.phi_before;
  for (const auto& b : in.blocks) {
    const double coef = b.c_a - g * (b.l_a_current + cross);
    out.coef_a = std::min(out.coef_a, coef);
    rhs -= 0.5 * g * coef * b.step_sq;
  }
  if (in.blocks.empty()) out.coef_a = 0.0;
  out.coef_m = in.c_m - g * (in.l_m + tau * tau * in.l_am_plus);
  rhs -= 0.5 * g * out.coef_m * in.m_step_sq;

  out.margin = rhs - in.phi_after;
  out.holds = out.margin >= 0.0;
  return out;
}

std::optional<double> estimate_l_am(const Mat& m1, const Mat& m2, const AbundanceBlock& a, const DataBlock& y) {
  const double denom = frobenius_norm(m1 - m2);
  if (denom == 0.0) return std::nullopt;
  const Mat g1 = grad_a(y, a, EndmemberMatrix{m1, 0});
  const Mat g2 = grad_a(y, a, EndmemberMatrix{m2, 0});
  return frobenius_norm(g1 - g2) / denom;
}

void export_trace(std::span<const IterationRecord> trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(IoError::Kind::kOpen, "cannot open " + path.string() + " for writing");
  out << "k,wall_clock_ms,objective,gamma,worker,delay,phi\n";
  for (const auto& r : trace) {
    out << fmt::format("{},{},{},{},{},{},{}\n", r.k, r.wall_clock_ms, r.objective, r.gamma, r.reporting_worker,
                       r.observed_delay, r.phi);
  }
}

namespace {

template <typename T>
T parse_field(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
  T v{};
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
    throw IoError(IoError::Kind::kParse, fmt::format("{}:{}: bad field '{}'", path.string(), line, cell));
  }
  return v;
}

}  // namespace

std::vector<TracePoint> read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(IoError::Kind::kOpen, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("k,wall_clock_ms,objective", 0) != 0) {
    throw IoError(IoError::Kind::kParse, path.string() + ": missing trace header");
  }
  std::vector<TracePoint> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 7) {
      throw IoError(IoError::Kind::kParse, fmt::format("{}:{}: expected 7 fields", path.string(), lineno));
    }
    TracePoint p;
    p.k = parse_field<std::uint64_t>(cells[0], path, lineno);
    p.wall_clock_ms = parse_field<double>(cells[1], path, lineno);
    p.objective = parse_field<double>(cells[2], path, lineno);
    p.gamma = parse_field<double>(cells[3], path, lineno);
    p.worker = parse_field<int>(cells[4], path, lineno);
    p.delay = parse_field<std::size_t>(cells[5], path, lineno);
    p.phi = parse_field<double>(cells[6], path, lineno);
    out.push_back(p);
  }
  return out;
}

}  // namespace auw
