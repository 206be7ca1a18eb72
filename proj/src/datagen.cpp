#include "auw/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "auw/error.hpp"
#include "auw/metrics.hpp"
#include "auw/prox.hpp"

namespace auw {

namespace {

// Independent stream per purpose so changing one stage leaves the others intact.
enum class Stream : std::uint32_t { kEndmembers = 1, kAbundances = 2, kNoise = 3, kInit = 4 };

std::mt19937_64 make_rng(std::uint64_t seed, Stream s) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(s)};
  return std::mt19937_64(seq);
}

std::vector<double> smooth_spectrum(std::size_t bands, std::mt19937_64& rng) {
  const double l = static_cast<double>(bands);
  std::uniform_int_distribution<int> count(2, 4);
  std::uniform_real_distribution<double> center(0.0, l);
  std::uniform_real_distribution<double> width(l / 20.0 + 0.5, l / 4.0 + 0.5);
  std::uniform_real_distribution<double> amp(0.2, 1.0);

  std::vector<double> s(bands, 0.0);
  const int n = count(rng);
  for (int b = 0; b < n; ++b) {
    const double c = center(rng), w = width(rng), a = amp(rng);
    for (std::size_t i = 0; i < bands; ++i) {
      const double z = (static_cast<double>(i) - c) / w;
      s[i] += a * std::exp(-0.5 * z * z);
    }
  }
  // Floor keeps every band strictly positive even far from all bumps.
  const double peak = *std::max_element(s.begin(), s.end());
  for (double& v : s) v = std::max(v / peak, 1e-3);
  return s;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (endmembers < 1) throw DataGenError("need at least one endmember");
  if (bands < endmembers) throw DataGenError(fmt::format("bands ({}) < endmembers ({})", bands, endmembers));
  if (pixels_per_block == 0 || blocks == 0) throw DataGenError("empty dataset");
  if (!(smoothness >= 0.0 && smoothness < 1.0)) throw DataGenError("smoothness must lie in [0, 1)");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity()) {
    throw DataGenError("snr_db must be finite or +inf");
  }
}

KeyValues SyntheticSpec::to_key_values() const {
  return {{"bands", std::to_string(bands)},
          {"endmembers", std::to_string(endmembers)},
          {"pixels_per_block", std::to_string(pixels_per_block)},
          {"blocks", std::to_string(blocks)},
          {"snr_db", format_double(snr_db)},
          {"smoothness", format_double(smoothness)},
          {"seed", std::to_string(seed)}};
}

SyntheticSpec SyntheticSpec::from_key_values(const KeyValues& kv) {
  SyntheticSpec s;
  auto u = [&](const char* key, std::size_t& dst) {
    if (auto it = kv.find(key); it != kv.end()) dst = static_cast<std::size_t>(parse_u64(it->second, key));
  };
  auto d = [&](const char* key, double& dst) {
    if (auto it = kv.find(key); it != kv.end()) dst = parse_double(it->second, key);
  };
  u("bands", s.bands);
  u("endmembers", s.endmembers);
  u("pixels_per_block", s.pixels_per_block);
  u("blocks", s.blocks);
  d("snr_db", s.snr_db);
  d("smoothness", s.smoothness);
  if (auto it = kv.find("seed"); it != kv.end()) s.seed = parse_u64(it->second, "seed");
  return s;
}

Mat gen_endmembers(std::size_t bands, std::size_t endmembers, std::uint64_t seed) {
  if (endmembers == 0 || bands == 0) throw DataGenError("empty endmember matrix requested");
  auto rng = make_rng(seed, Stream::kEndmembers);
  std::vector<std::vector<double>> cols;
  int tries = 0;
  while (cols.size() < endmembers) {
    if (++tries > kMaxEndmemberTries) {
      throw DataGenError(fmt::format("could not draw {} endmembers {}° apart in {} tries", endmembers,
                                     kMinEndmemberAngleDeg, kMaxEndmemberTries));
    }
    auto s = smooth_spectrum(bands, rng);
    const bool ok = std::all_of(cols.begin(), cols.end(),
                                [&](const auto& c) { return spectral_angle_deg(c, s) >= kMinEndmemberAngleDeg; });
    if (ok) cols.push_back(std::move(s));
  }
  Mat m(bands, endmembers);
  for (std::size_t r = 0; r < endmembers; ++r) m.set_col(r, cols[r]);
  return m;
}

AbundanceField gen_abundances(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t r_count = spec.endmembers, n = spec.pixels_per_block, omega = spec.blocks;
  auto rng = make_rng(spec.seed, Stream::kAbundances);
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  AbundanceField out;
  out.reference = Mat(r_count, n * omega);
  Mat phi(r_count, n * omega);
  for (std::size_t j = 0; j < n * omega; ++j) {
    double sum = 0.0;
    for (std::size_t r = 0; r < r_count; ++r) sum += out.reference(r, j) = expo(rng);
    for (std::size_t r = 0; r < r_count; ++r) out.reference(r, j) /= sum;
    for (std::size_t r = 0; r < r_count; ++r) phi(r, j) = phase(rng);
  }

  for (std::size_t w = 0; w < omega; ++w) {
    Mat a = out.reference.col_block(w * n, n);
    if (spec.smoothness > 0.0) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(w + 1) / static_cast<double>(omega);
      for (std::size_t j = 0; j < n; ++j) {
        double sum = 0.0;
        for (std::size_t r = 0; r < r_count; ++r) {
          sum += a(r, j) *= 1.0 + spec.smoothness * std::sin(t + phi(r, w * n + j));
        }
        for (std::size_t r = 0; r < r_count; ++r) a(r, j) /= sum;
      }
    }
    out.blocks.push_back(std::move(a));
  }
  return out;
}

NoiseResult add_noise(const std::vector<Mat>& clean, double snr_db, std::uint64_t seed) {
  NoiseResult out;
  out.noisy = clean;
  for (const auto& y : clean) out.noise.emplace_back(y.rows(), y.cols());
  if (snr_db == std::numeric_limits<double>::infinity()) return out;

  double signal = 0.0, count = 0.0;
  for (const auto& y : clean) {
    signal += frobenius_sq(y);
    count += static_cast<double>(y.size());
  }
  if (count == 0.0) return out;
  out.sigma2 = signal / (count * std::pow(10.0, snr_db / 10.0));

  auto rng = make_rng(seed, Stream::kNoise);
  std::normal_distribution<double> gauss(0.0, std::sqrt(out.sigma2));
  double noise_power = 0.0;
  for (std::size_t w = 0; w < clean.size(); ++w) {
    for (double& b : out.noise[w].data()) {
      b = gauss(rng);
      noise_power += b * b;
    }
    out.noisy[w] += out.noise[w];
  }
  out.realized_snr_db = 10.0 * std::log10(signal / noise_power);
  return out;
}

std::vector<DataBlock> Dataset::data_blocks() const {
  std::vector<DataBlock> out;
  for (std::size_t w = 0; w < y.size(); ++w) out.push_back(DataBlock{y[w], static_cast<WorkerId>(w)});
  return out;
}

std::vector<AbundanceBlock> Dataset::abundance_blocks() const {
  std::vector<AbundanceBlock> out;
  for (std::size_t w = 0; w < a_true.size(); ++w) out.push_back(AbundanceBlock{a_true[w], static_cast<WorkerId>(w)});
  return out;
}

Dataset generate(const SyntheticSpec& spec) {
  spec.validate();
  Dataset ds;
  ds.spec = spec;
  ds.m_true = gen_endmembers(spec.bands, spec.endmembers, spec.seed);
  ds.a_true = gen_abundances(spec).blocks;
  std::vector<Mat> clean;
  for (const auto& a : ds.a_true) clean.push_back(matmul(ds.m_true, a));
  auto noisy = add_noise(clean, spec.snr_db, spec.seed);
  ds.y = std::move(noisy.noisy);
  ds.noise = std::move(noisy.noise);
  ds.sigma2 = noisy.sigma2;
  ds.realized_snr_db = noisy.realized_snr_db;
  return ds;
}

void write_dataset(const std::filesystem::path& dir, const Dataset& ds) {
  std::filesystem::create_directories(dir);
  write_fmat(dir / "M_true.fmat", ds.m_true);
  for (std::size_t w = 0; w < ds.y.size(); ++w) {
    write_fmat(dir / fmt::format("Y_{}.fmat", w + 1), ds.y[w]);
    write_fmat(dir / fmt::format("A_{}.fmat", w + 1), ds.a_true[w]);
    write_fmat(dir / fmt::format("B_{}.fmat", w + 1), ds.noise[w]);
  }
  KeyValues kv = ds.spec.to_key_values();
  kv["sigma2"] = format_double(ds.sigma2);
  kv["realized_snr_db"] = format_double(ds.realized_snr_db);
  write_key_values(dir / "manifest.txt", kv);
}

std::vector<DataBlock> read_data_blocks(const std::filesystem::path& dir) {
  std::size_t omega = 0;
  if (std::filesystem::exists(dir / "manifest.txt")) {
    const auto kv = read_key_values(dir / "manifest.txt");
    if (auto it = kv.find("blocks"); it != kv.end()) omega = static_cast<std::size_t>(parse_u64(it->second, "blocks"));
  }
  if (omega == 0) {
    while (std::filesystem::exists(dir / fmt::format("Y_{}.fmat", omega + 1))) ++omega;
  }
  if (omega == 0) throw IoError(IoError::Kind::kOpen, fmt::format("no Y_1.fmat in {}", dir.string()));
  std::vector<DataBlock> out;
  for (std::size_t w = 0; w < omega; ++w) {
    out.push_back(DataBlock{read_fmat(dir / fmt::format("Y_{}.fmat", w + 1)), static_cast<WorkerId>(w)});
  }
  return out;
}

Initialization perturbed_init(const Mat& m_true, const std::vector<Mat>& a_true, double rel, std::uint64_t seed) {
  auto rng = make_rng(seed, Stream::kInit);
  std::normal_distribution<double> gauss(0.0, rel);
  Initialization init;
  init.m.m = m_true;
  for (double& v : init.m.m.data()) v = std::max(v * (1.0 + gauss(rng)), 0.0);
  for (std::size_t w = 0; w < a_true.size(); ++w) {
    Mat a = a_true[w];
    for (double& v : a.data()) v *= 1.0 + gauss(rng);
    init.a.push_back(AbundanceBlock{project_simplex_columns(a), static_cast<WorkerId>(w)});
  }
  return init;
}

Initialization data_init(const std::vector<DataBlock>& y, std::size_t endmembers, std::uint64_t seed) {
  if (y.empty()) throw DimensionError("no data blocks");
  std::size_t total = 0;
  for (const auto& b : y) total += b.y.cols();
  if (endmembers == 0 || endmembers > total) {
    throw DimensionError(fmt::format("cannot pick {} endmembers from {} pixels", endmembers, total));
  }
  auto rng = make_rng(seed, Stream::kInit);
  std::vector<std::size_t> idx(total);
  for (std::size_t i = 0; i < total; ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);

  const std::size_t bands = y.front().y.rows();
  Initialization init;
  init.m.m = Mat(bands, endmembers);
  for (std::size_t r = 0; r < endmembers; ++r) {
    std::size_t j = idx[r];
    std::size_t w = 0;
    while (j >= y[w].y.cols()) j -= y[w++].y.cols();
    for (std::size_t l = 0; l < bands; ++l) init.m.m(l, r) = std::max(y[w].y(l, j), 0.0);
  }
  for (const auto& b : y) {
    init.a.push_back(AbundanceBlock{Mat(endmembers, b.y.cols(), 1.0 / static_cast<double>(endmembers)), b.worker_id});
  }
  return init;
}

}  // namespace auw
