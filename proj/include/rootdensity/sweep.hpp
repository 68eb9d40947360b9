#pragma once

// Streaming enumerate -> solve -> accumulate over a parametric family.

#include <cstdint>

#include "rootdensity/approximator.hpp"
#include "rootdensity/eigensolver.hpp"
#include "rootdensity/raster.hpp"

namespace rootdensity {

struct SweepOptions {
  raster::Viewport viewport;
  SolveConfig solve;
  unsigned workers = 1;
};

struct SweepResult {
  raster::DensityGrid grid;
  std::uint64_t samples = 0;
  std::uint64_t solved = 0;
  /// Samples whose coefficients evaluated to NaN or Inf.
  std::uint64_t skipped = 0;
};

/// Memory use is one density grid per worker, independent of the sample
/// count. The merged grid does not depend on the worker count.
SweepResult run_sweep(const approx::ParametricFamily& family, const SweepOptions& opts);

}  // namespace rootdensity
