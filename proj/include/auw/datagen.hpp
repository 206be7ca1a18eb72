#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include "auw/kv.hpp"
#include "auw/matcore.hpp"
#include "auw/model.hpp"

namespace auw {

struct SyntheticSpec {
  std::size_t bands = 50;             ///< L
  std::size_t endmembers = 3;         ///< R
  std::size_t pixels_per_block = 400; ///< N_ω
  std::size_t blocks = 3;             ///< Ω
  double snr_db = 30.0;               ///< +inf for noiseless data
  double smoothness = 0.3;            ///< ε ∈ [0, 1)
  std::uint64_t seed = 1;

  /// Throws DataGenError on an invalid spec.
  void validate() const;
  KeyValues to_key_values() const;
  /// Missing keys keep their defaults.
  static SyntheticSpec from_key_values(const KeyValues& kv);
};

/// Minimum pairwise spectral angle between generated endmembers, in degrees.
inline constexpr double kMinEndmemberAngleDeg = 5.0;
inline constexpr int kMaxEndmemberTries = 1000;

/// L×R matrix of smooth spectra in (0, 1]: each column is a sum of 2–4
/// Gaussian bumps, scaled to peak 1. Throws DataGenError if the angle floor
/// cannot be met within kMaxEndmemberTries draws.
Mat gen_endmembers(std::size_t bands, std::size_t endmembers, std::uint64_t seed);

struct AbundanceField {
  Mat reference;          ///< A^ref, R × (Ω·N_ω)
  std::vector<Mat> blocks;///< A_ω, R × N_ω each
};

/// Dirichlet(1) reference field; block ω is a^ref·(1 + ε sin(2πω/Ω + φ))
/// renormalized onto the simplex, with φ drawn per entry from the seed.
AbundanceField gen_abundances(const SyntheticSpec& spec);

struct NoiseResult {
  std::vector<Mat> noisy;
  std::vector<Mat> noise;   ///< B_ω
  double sigma2 = 0.0;
  double realized_snr_db = std::numeric_limits<double>::infinity();
};

/// σ² = Σ‖Y_ω‖² / (Σ L·N_ω · 10^(snr/10)); i.i.d. N(0, σ²) added.
/// snr_db = +inf returns the input unchanged.
NoiseResult add_noise(const std::vector<Mat>& clean, double snr_db, std::uint64_t seed);

struct Dataset {
  SyntheticSpec spec;
  Mat m_true;
  std::vector<Mat> a_true;
  std::vector<Mat> noise;
  std::vector<Mat> y;
  double sigma2 = 0.0;
  double realized_snr_db = std::numeric_limits<double>::infinity();

  std::vector<DataBlock> data_blocks() const;
  std::vector<AbundanceBlock> abundance_blocks() const;
};

Dataset generate(const SyntheticSpec& spec);

/// Writes Y_ω.fmat, A_ω.fmat, B_ω.fmat (ω = 1..Ω), M_true.fmat and
/// manifest.txt into `dir` (created if needed).
void write_dataset(const std::filesystem::path& dir, const Dataset& ds);

/// Reads the blocks Y_1..Y_Ω of a dataset directory (Ω from the manifest if
/// present, otherwise from the files found).
std::vector<DataBlock> read_data_blocks(const std::filesystem::path& dir);

struct Initialization {
  EndmemberMatrix m;
  std::vector<AbundanceBlock> a;
};

/// Ground truth with multiplicative N(0, rel²) noise: M clipped at 0,
/// A projected back onto the simplex.
Initialization perturbed_init(const Mat& m_true, const std::vector<Mat>& a_true, double rel, std::uint64_t seed);

/// R distinct data columns picked at random as M, uniform abundances.
Initialization data_init(const std::vector<DataBlock>& y, std::size_t endmembers, std::uint64_t seed);

}  // namespace auw
