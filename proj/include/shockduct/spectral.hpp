#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace shockduct {

using cplx = std::complex<double>;

/// Signed wavenumber of FFT index i on an axis of length n.
inline int wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

/// Batched multi-dimensional real FFT over contiguous blocks. Each of
/// `howmany` blocks is a row-major real array of the given shape; the
/// spectrum of each block has shape (shape[0], ..., shape[r-1]/2 + 1).
/// Plans use FFTW_ESTIMATE so results are reproducible bit for bit.
class BatchedRealFFT {
 public:
  BatchedRealFFT(std::vector<int> shape, int howmany);
  ~BatchedRealFFT();
  BatchedRealFFT(const BatchedRealFFT&) = delete;
  BatchedRealFFT& operator=(const BatchedRealFFT&) = delete;

  double* real() { return real_; }
  cplx* spec() { return spec_; }
  const double* real() const { return real_; }
  const cplx* spec() const { return spec_; }

  std::size_t real_size() const { return real_count_ * howmany_; }
  std::size_t spec_size() const { return spec_count_ * howmany_; }
  std::size_t real_block() const { return real_count_; }
  std::size_t spec_block() const { return spec_count_; }
  const std::vector<int>& shape() const { return shape_; }
  int howmany() const { return howmany_; }

  /// real() -> spec(), unnormalized.
  void forward();
  /// spec() -> real(), divided by the block size. Destroys spec().
  void backward();

 private:
  std::vector<int> shape_;
  int howmany_;
  std::size_t real_count_ = 1;
  std::size_t spec_count_ = 1;
  double* real_ = nullptr;
  cplx* spec_ = nullptr;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
};

/// Per-entry wavenumbers of a half-spectrum block: k[axis][flat index].
struct HalfSpectrumGrid {
  std::vector<int> shape;
  std::vector<std::vector<int>> k;
  /// 2/3-rule mask (1 keep, 0 drop); Nyquist entries always dropped.
  std::vector<double> dealias;
  /// Nyquist entries dropped, everything else kept.
  std::vector<double> no_nyquist;
  std::size_t size() const { return dealias.size(); }
};

HalfSpectrumGrid make_half_spectrum(const std::vector<int>& shape);

/// Threads used by parallel kernels; capped by SHOCKDUCT_THREADS.
int configure_threads();

}  // namespace shockduct
