#include "rootdensity/sweep.hpp"

#include <optional>
#include <vector>

#include "rootdensity/parallel.hpp"

namespace rootdensity {

namespace {

template <typename T>
SweepResult sweep_impl(const approx::ParametricFamily& family, const SweepOptions& opts) {
  const std::uint64_t samples = family.sample_count();
  const unsigned workers = resolve_workers(opts.workers);
  const std::size_t n = family.degree;

  struct Partial {
    std::optional<raster::DensityGrid> grid;
    std::uint64_t solved = 0;
    std::uint64_t skipped = 0;
  };
  std::vector<Partial> partials(workers);

  parallel_chunks(samples, workers, [&](std::size_t begin, std::size_t end, unsigned w) {
    Partial& part = partials[w];
    part.grid.emplace(opts.viewport);
    QrSolver<T> solver(opts.solve);
    std::vector<double> params;
    std::vector<Complex<double>> coeffs(n);
    std::vector<Complex<T>> narrow(n);
    std::vector<Complex<T>> roots(n);
    for (std::size_t s = begin; s < end; ++s) {
      if (!family.coefficients(s, params, coeffs)) {
        ++part.skipped;
        continue;
      }
      for (std::size_t k = 0; k < n; ++k) {
        narrow[k] = {static_cast<T>(coeffs[k].real()), static_cast<T>(coeffs[k].imag())};
      }
      if constexpr (std::is_same_v<T, float>) {
        // Coefficients beyond float range cannot be represented in this mode.
        bool finite = true;
        for (const auto& c : narrow) finite = finite && is_finite(c);
        if (!finite) {
          ++part.skipped;
          continue;
        }
      }
      solver.solve(Polynomial<T>(narrow), roots);
      raster::accumulate(*part.grid, opts.viewport, std::span<const Complex<T>>(roots));
      ++part.solved;
    }
  });

  SweepResult out{raster::DensityGrid(opts.viewport)};
  out.samples = samples;
  for (auto& p : partials) {
    if (p.grid) out.grid.merge_from(*p.grid);
    out.solved += p.solved;
    out.skipped += p.skipped;
  }
  return out;
}

}  // namespace

SweepResult run_sweep(const approx::ParametricFamily& family, const SweepOptions& opts) {
  family.validate();
  opts.viewport.validate();
  opts.solve.validate();
  if (opts.solve.precision == Precision::kFp32) return sweep_impl<float>(family, opts);
  return sweep_impl<double>(family, opts);
}

}  // namespace rootdensity
