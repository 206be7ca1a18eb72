#include "support.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "auw/error.hpp"

namespace auw::cli {

void init_logging() {
  const char* env = std::getenv("AUW_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::set_level(spdlog::level::info);
    if (level != "info") spdlog::warn("AUW_LOG='{}' not recognized, using info", level);
  }
  // Logs go to stderr so stdout stays machine-readable.
  spdlog::set_default_logger(spdlog::default_logger()->clone("auw"));
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(IoError::Kind::kOpen, "cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

std::string iso8601_utc(std::chrono::system_clock::time_point t) {
  const std::time_t tt = std::chrono::system_clock::to_time_t(t);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace {

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw IoError(IoError::Kind::kParse, fmt::format("{}: '{}' is not a boolean", key, s));
}

}  // namespace

UnmixSettings resolve_settings(const KeyValues& kv) {
  static const char* known[] = {"mode",       "workers",   "k",          "gamma0",    "mu",
                                "max_iter",   "rel_tol",   "tau_limit",  "seed",      "delay_ms",
                                "extrapolate_m", "monitor", "stop_check", "init",     "init_noise",
                                "init_seed",  "scheduler"};
  for (const auto& [k, v] : kv) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* n) { return k == n; }) == std::end(known)) {
      throw IoError(IoError::Kind::kParse, fmt::format("unknown setting '{}'", k));
    }
  }
  auto get = [&](const char* key) -> const std::string* {
    auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  UnmixSettings s;
  const Mode mode = get("mode") ? parse_mode(*get("mode")) : Mode::kAsync;
  s.solver = SolverConfig::defaults(mode);
  if (auto v = get("workers")) s.workers = static_cast<std::size_t>(parse_u64(*v, "workers"));
  if (auto v = get("k")) s.solver.k_threshold = static_cast<std::size_t>(parse_u64(*v, "k"));
  if (auto v = get("gamma0")) s.solver.gamma0 = parse_double(*v, "gamma0");
  if (auto v = get("mu")) s.solver.mu = parse_double(*v, "mu");
  if (auto v = get("max_iter")) s.solver.max_iter = static_cast<std::size_t>(parse_u64(*v, "max_iter"));
  if (auto v = get("rel_tol")) s.solver.rel_tol = parse_double(*v, "rel_tol");
  if (auto v = get("tau_limit"); v && !v->empty() && *v != "none") {
    s.solver.tau_limit = static_cast<std::size_t>(parse_u64(*v, "tau_limit"));
  }
  if (auto v = get("seed")) s.solver.seed = parse_u64(*v, "seed");
  if (auto v = get("delay_ms"); v && !v->empty()) s.solver.worker_delay = parse_delays(*v);
  if (auto v = get("extrapolate_m")) s.solver.extrapolate_m = parse_bool(*v, "extrapolate_m");
  if (auto v = get("monitor")) s.solver.monitor = parse_bool(*v, "monitor");
  if (auto v = get("stop_check")) s.solver.stop_check = parse_stop_check(*v);
  if (auto v = get("init")) s.init = *v;
  if (auto v = get("init_noise")) s.init_noise = parse_double(*v, "init_noise");
  if (auto v = get("init_seed")) s.init_seed = parse_u64(*v, "init_seed");
  if (auto v = get("scheduler")) s.scheduler = *v;
  if (s.init != "perturbed" && s.init != "data" && s.init != "files") {
    throw IoError(IoError::Kind::kParse, fmt::format("init must be perturbed, data or files, not '{}'", s.init));
  }
  if (s.scheduler != "threads" && s.scheduler != "virtual" && s.scheduler != "tcp") {
    throw IoError(IoError::Kind::kParse,
                  fmt::format("scheduler must be threads, virtual or tcp, not '{}'", s.scheduler));
  }
  return s;
}

KeyValues settings_to_key_values(const UnmixSettings& s) {
  const SolverConfig& c = s.solver;
  std::string delays;
  for (std::size_t i = 0; i < c.worker_delay.size(); ++i) {
    const auto& d = c.worker_delay[i];
    delays += i ? "," : "";
    delays += d.lo_ms == d.hi_ms ? format_double(d.lo_ms)
                                 : fmt::format("{}:{}", format_double(d.lo_ms), format_double(d.hi_ms));
  }
  return {{"mode", to_string(c.mode)},
          {"k", std::to_string(c.k_threshold)},
          {"gamma0", format_double(c.gamma0)},
          {"mu", format_double(c.mu)},
          {"max_iter", std::to_string(c.max_iter)},
          {"rel_tol", format_double(c.rel_tol)},
          {"tau_limit", c.tau_limit ? std::to_string(*c.tau_limit) : "none"},
          {"seed", std::to_string(c.seed)},
          {"delay_ms", delays},
          {"extrapolate_m", c.extrapolate_m ? "true" : "false"},
          {"monitor", c.monitor ? "true" : "false"},
          {"stop_check", to_string(c.stop_check)},
          {"init", s.init},
          {"init_noise", format_double(s.init_noise)},
          {"init_seed", std::to_string(s.init_seed)},
          {"scheduler", s.scheduler}};
}

KeyValues RunManifest::to_key_values() const {
  KeyValues kv;
  for (const auto& [k, v] : config) kv["config." + k] = v;
  for (const auto& [name, hash] : dataset_hashes) kv["dataset.sha256." + name] = hash;
  for (const auto& [k, v] : diagnostics) kv["diagnostics." + k] = v;
  kv["mode"] = mode;
  kv["started"] = started;
  kv["finished"] = finished;
  kv["final_objective"] = format_double(final_objective);
  kv["iterations"] = std::to_string(iterations);
  kv["exit_reason"] = exit_reason;
  if (!abort_message.empty()) kv["abort_message"] = abort_message;
  return kv;
}

KeyValues diagnostics_summary(const RunResult& r) {
  KeyValues kv;
  const auto& lt = r.lipschitz;
  auto range = [&](const char* name, const Range& rg) {
    if (rg.empty()) return;
    kv[fmt::format("{}_min", name)] = format_double(rg.min);
    kv[fmt::format("{}_max", name)] = format_double(rg.max);
  };
  range("lipschitz_a", lt.a_all());
  range("lipschitz_m", lt.m());
  range("lipschitz_am", lt.am());
  kv["decrease_violations"] = std::to_string(r.decrease_violations);
  kv["discarded_stale"] = std::to_string(r.discarded_stale);
  std::size_t max_delay = 0;
  std::string hist;
  for (const auto& [key, count] : r.delay_histogram) {
    max_delay = std::max(max_delay, key.second);
    hist += fmt::format("{}{}:{}={}", hist.empty() ? "" : ",", key.first, key.second, count);
  }
  kv["max_observed_delay"] = std::to_string(max_delay);
  kv["delay_histogram"] = hist;
  return kv;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const std::vector<NamedTrace>& traces) {
  if (traces.empty()) throw Error("no traces to plot");
  double t_max = 0.0, y_min = std::numeric_limits<double>::infinity(), y_max = 0.0;
  for (const auto& tr : traces) {
    if (tr.points.empty()) throw Error(fmt::format("trace '{}' is empty", tr.label));
    for (const auto& p : tr.points) {
      if (!(p.objective > 0.0) || !std::isfinite(p.objective)) {
        throw Error(fmt::format("trace '{}' has a non-positive objective at k={}", tr.label, p.k));
      }
      t_max = std::max(t_max, p.wall_clock_ms);
      y_min = std::min(y_min, p.objective);
      y_max = std::max(y_max, p.objective);
    }
  }
  if (t_max <= 0.0) t_max = 1.0;
  double lo = std::floor(std::log10(y_min));
  double hi = std::ceil(std::log10(y_max));
  if (hi <= lo) hi = lo + 1.0;

  constexpr double W = 800, H = 500, L = 80, R = 160, T = 40, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto sx = [&](double t) { return L + pw * t / t_max; };
  auto sy = [&](double v) { return T + ph * (hi - std::log10(v)) / (hi - lo); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      W, H, W, H);
  svg += fmt::format("<g stroke=\"black\" fill=\"none\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></g>\n", L,
                     T, pw, ph);
  svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
  for (double e = lo; e <= hi; e += 1.0) {
    const double y = T + ph * (hi - e) / (hi - lo);
    svg += fmt::format("<line x1=\"{}\" y1=\"{:.2f}\" x2=\"{}\" y2=\"{:.2f}\" stroke=\"#ccc\"/>\n", L, y, L + pw, y);
    svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">1e{}</text>\n", L - 6, y + 4, e);
  }
  for (int i = 0; i <= 5; ++i) {
    const double t = t_max * i / 5.0;
    svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{:.0f}</text>\n", sx(t), T + ph + 18, t);
  }
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">wall clock (ms)</text>\n", L + pw / 2, H - 15);
  svg += fmt::format("<text x=\"20\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 20 {})\">objective</text>\n",
                     T + ph / 2, T + ph / 2);
  svg += "</g>\n";

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const char* color = colors[i % std::size(colors)];
    const std::string label = xml_escape(traces[i].label);
    std::string d;
    for (std::size_t j = 0; j < traces[i].points.size(); ++j) {
      const auto& p = traces[i].points[j];
      d += fmt::format("{}{:.2f},{:.2f}", j == 0 ? "M" : " L", sx(p.wall_clock_ms), sy(p.objective));
    }
    svg += fmt::format("<path class=\"series\" data-label=\"{}\" d=\"{}\" stroke=\"{}\" fill=\"none\" "
                       "stroke-width=\"1.5\"/>\n",
                       label, d, color);
    const double ly = T + 20 + 18 * static_cast<double>(i);
    svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" stroke-width=\"2\"/>\n", L + pw + 10,
                       ly, L + pw + 30, ly, color);
    svg += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n", L + pw + 36,
                       ly + 4, label);
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace auw::cli
