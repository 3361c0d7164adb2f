#pragma once

#include <cstddef>
#include <span>

namespace shockduct {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y = slope x + intercept.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

/// y ~ amplitude * exp(-rate t).
struct ExponentialFit {
  double rate = 0.0;
  double amplitude = 0.0;
  double r2 = 0.0;
  std::size_t used = 0;
  /// Samples dropped because y <= floor (nonpositive or below noise floor).
  std::size_t masked = 0;
  bool ok = false;
};

struct FitWindow {
  double t_begin = -1e300;
  double t_end = 1e300;
  /// Values at or below this are masked out. Once a sample falls below the
  /// floor, later samples are ignored too (the series has hit round-off).
  double floor = 0.0;
  std::size_t min_points = 20;
};

/// Log-linear least squares on (t, log y). ok is false when fewer than
/// window.min_points usable samples remain.
ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y,
                               const FitWindow& window = {});

}  // namespace shockduct
