#include "shockduct/spectral.hpp"

#include <fftw3.h>

#include <cstdlib>
#include <mutex>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "shockduct/error.hpp"

namespace shockduct {

namespace {
// FFTW planning is not thread-safe.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

BatchedRealFFT::BatchedRealFFT(std::vector<int> shape, int howmany)
    : shape_(std::move(shape)), howmany_(howmany) {
  if (shape_.empty() || howmany_ <= 0) {
    throw Error(ErrorKind::Domain, "BatchedRealFFT: empty shape");
  }
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (shape_[a] <= 0) throw Error(ErrorKind::Domain, "BatchedRealFFT: bad axis length");
    real_count_ *= static_cast<std::size_t>(shape_[a]);
    spec_count_ *= a + 1 == shape_.size() ? static_cast<std::size_t>(shape_[a] / 2 + 1)
                                         : static_cast<std::size_t>(shape_[a]);
  }
  real_ = fftw_alloc_real(real_count_ * howmany_);
  spec_ = reinterpret_cast<cplx*>(fftw_alloc_complex(spec_count_ * howmany_));
  std::lock_guard<std::mutex> lock(plan_mutex());
  const int rank = static_cast<int>(shape_.size());
  plan_fwd_ = fftw_plan_many_dft_r2c(rank, shape_.data(), howmany_, real_, nullptr, 1,
                                     static_cast<int>(real_count_),
                                     reinterpret_cast<fftw_complex*>(spec_), nullptr, 1,
                                     static_cast<int>(spec_count_), FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_many_dft_c2r(rank, shape_.data(), howmany_,
                                     reinterpret_cast<fftw_complex*>(spec_), nullptr, 1,
                                     static_cast<int>(spec_count_), real_, nullptr, 1,
                                     static_cast<int>(real_count_), FFTW_ESTIMATE);
  if (!plan_fwd_ || !plan_bwd_) throw Error(ErrorKind::Domain, "FFTW planning failed");
}

BatchedRealFFT::~BatchedRealFFT() {
  std::lock_guard<std::mutex> lock(plan_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(real_);
  fftw_free(spec_);
}

void BatchedRealFFT::forward() { fftw_execute(static_cast<fftw_plan>(plan_fwd_)); }

void BatchedRealFFT::backward() {
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double scale = 1.0 / static_cast<double>(real_count_);
  const std::size_t n = real_size();
  for (std::size_t i = 0; i < n; ++i) real_[i] *= scale;
}

HalfSpectrumGrid make_half_spectrum(const std::vector<int>& shape) {
  HalfSpectrumGrid g;
  g.shape = shape;
  const std::size_t rank = shape.size();
  std::vector<int> half = shape;
  half.back() = shape.back() / 2 + 1;
  std::size_t total = 1;
  for (int h : half) total *= static_cast<std::size_t>(h);
  g.k.assign(rank, std::vector<int>(total));
  g.dealias.assign(total, 1.0);
  g.no_nyquist.assign(total, 1.0);
  std::vector<int> idx(rank, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    for (std::size_t a = 0; a < rank; ++a) {
      const int n = shape[a];
      const int k = wavenumber(idx[a], n);
      g.k[a][flat] = k;
      const bool nyquist = n % 2 == 0 && idx[a] == n / 2;
      if (nyquist) {
        g.dealias[flat] = 0.0;
        g.no_nyquist[flat] = 0.0;
      }
      if (3 * std::abs(k) > n) g.dealias[flat] = 0.0;
    }
    for (std::size_t a = rank; a-- > 0;) {
      if (++idx[a] < half[a]) break;
      idx[a] = 0;
    }
  }
  return g;
}

int configure_threads() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_num_procs();
  if (const char* env = std::getenv("SHOCKDUCT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0 && cap < n) n = cap;
  }
  omp_set_num_threads(n);
#endif
  return n;
}

}  // namespace shockduct
