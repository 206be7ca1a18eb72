#pragma once

#include "auw/datagen.hpp"

namespace auw::test {

/// L=50, R=3, N_ω=400, Ω=3, SNR 30 dB.
inline const Dataset& desk_dataset() {
  static const Dataset ds = generate(SyntheticSpec{});
  return ds;
}

/// Ground truth perturbed by 5% relative noise.
inline Initialization desk_init() {
  const Dataset& ds = desk_dataset();
  return perturbed_init(ds.m_true, ds.a_true, 0.05, 7);
}

}  // namespace auw::test
