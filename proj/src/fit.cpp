#include "shockduct/fit.hpp"

#include <cmath>
#include <vector>

#include "shockduct/error.hpp"

namespace shockduct {

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(ErrorKind::Domain, "fit_linear: size mismatch");
  }
  LinearFit fit;
  fit.n = x.size();
  if (fit.n < 2) return fit;

  // Centered sums for numerical stability.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(fit.n);
  my /= static_cast<double>(fit.n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) return fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < fit.n; ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += r * r;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y,
                               const FitWindow& window) {
  if (t.size() != y.size()) {
    throw Error(ErrorKind::Domain, "fit_exponential: size mismatch");
  }
  ExponentialFit out;
  std::vector<double> ts;
  std::vector<double> logs;
  bool floored = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.t_begin || t[i] > window.t_end) continue;
    if (floored || !(y[i] > window.floor) || !(y[i] > 0.0)) {
      floored = floored || window.floor > 0.0;
      ++out.masked;
      continue;
    }
    ts.push_back(t[i]);
    logs.push_back(std::log(y[i]));
  }
  out.used = ts.size();
  if (out.used < window.min_points) return out;
  const LinearFit lin = fit_linear(ts, logs);
  out.rate = -lin.slope;
  out.amplitude = std::exp(lin.intercept);
  out.r2 = lin.r2;
  out.ok = true;
  return out;
}

}  // namespace shockduct
