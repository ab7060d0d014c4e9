#pragma once
// Self-contained radix-2 FFT and the circular correlator built on top of it.
//
// The receiver needs the full circular cross-correlation between the frame
// and the L0-chip preamble at every SIC iteration. For frame lengths that
// are not powers of two the correlation is computed as a linear convolution
// against a wrapped extension of the frame, carried out in a power-of-two
// FFT; a direct O(n*L0) path is kept both for small problems and as an
// exact reference in tests.

#include <cassert>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

namespace essa {

// In-place iterative Cooley-Tukey transform for power-of-two sizes.
// Twiddles and the bit-reversal permutation are precomputed once, so a
// single instance can be reused across many transforms of the same size.
class Pow2Fft {
 public:
  explicit Pow2Fft(std::size_t size) : size_(size) {
    if (size == 0 || (size & (size - 1)) != 0) {
      throw std::invalid_argument("Pow2Fft: size must be a power of two");
    }
    int log2n = 0;
    while ((std::size_t{1} << log2n) < size) ++log2n;
    rev_.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < log2n; ++b) r |= ((i >> b) & 1u) << (log2n - 1 - b);
      rev_[i] = r;
    }
    twiddle_.resize(size / 2);
    for (std::size_t k = 0; k < size / 2; ++k) {
      const double ang = -2.0 * 3.141592653589793238462643383279502884 *
                         static_cast<double>(k) / static_cast<double>(size);
      twiddle_[k] = {std::cos(ang), std::sin(ang)};
    }
  }

  std::size_t size() const { return size_; }

  void forward(std::vector<std::complex<double>>& a) const {
    assert(a.size() == size_);
    for (std::size_t i = 0; i < size_; ++i) {
      if (rev_[i] > i) std::swap(a[i], a[rev_[i]]);
    }
    for (std::size_t len = 2; len <= size_; len <<= 1) {
      const std::size_t stride = size_ / len;
      for (std::size_t blk = 0; blk < size_; blk += len) {
        for (std::size_t j = 0; j < len / 2; ++j) {
          const std::complex<double> w = twiddle_[j * stride];
          const std::complex<double> u = a[blk + j];
          const std::complex<double> v = a[blk + j + len / 2] * w;
          a[blk + j] = u + v;
          a[blk + j + len / 2] = u - v;
        }
      }
    }
  }

  void inverse(std::vector<std::complex<double>>& a) const {
    for (auto& x : a) x = std::conj(x);
    forward(a);
    const double scale = 1.0 / static_cast<double>(size_);
    for (auto& x : a) x = std::conj(x) * scale;
  }

 private:
  std::size_t size_;
  std::vector<std::size_t> rev_;
  std::vector<std::complex<double>> twiddle_;
};

// Reference implementation: lambda[t] = sum_j p[j] * y[(j + t) mod n].
inline std::vector<double> circular_correlate_direct(
    const std::vector<double>& y, const std::vector<double>& p) {
  const std::size_t n = y.size();
  const std::size_t l0 = p.size();
  std::vector<double> lambda(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    double acc = 0.0;
    std::size_t idx = t;
    for (std::size_t j = 0; j < l0; ++j) {
      acc += p[j] * y[idx];
      if (++idx == n) idx = 0;
    }
    lambda[t] = acc;
  }
  return lambda;
}

// Computes lambda[t] = sum_j p[j] * y[(j + t) mod n] for all t in [0, n).
// Construction precomputes the spectrum of the (reversed, zero-padded)
// preamble; correlate() then costs two power-of-two FFTs.
class CircularCorrelator {
 public:
  CircularCorrelator(std::vector<double> preamble, std::size_t n)
      : n_(n), l0_(preamble.size()), p_(std::move(preamble)) {
    if (l0_ == 0 || l0_ > n_) {
      throw std::invalid_argument("CircularCorrelator: need 1 <= L0 <= n");
    }
    // Direct evaluation wins (and is exact) when the workload is tiny.
    use_fft_ = n_ * l0_ >= (std::size_t{1} << 22);
    if (!use_fft_) return;

    // Linear convolution of y_ext (length n + L0 - 1) with the reversed
    // preamble needs n + 2*L0 - 2 coefficients; round up to a power of two.
    std::size_t need = n_ + 2 * l0_ - 2;
    std::size_t m = 1;
    while (m < need) m <<= 1;
    fft_ = std::make_unique<Pow2Fft>(m);
    pref_.assign(m, {0.0, 0.0});
    for (std::size_t j = 0; j < l0_; ++j) pref_[j] = {p_[l0_ - 1 - j], 0.0};
    fft_->forward(pref_);
  }

  std::size_t frame_length() const { return n_; }

  // Scratch buffers owned by the caller so a const correlator can be shared
  // across worker threads.
  struct Scratch {
    std::vector<std::complex<double>> buf;
  };

  void correlate(const std::vector<double>& y, std::vector<double>& lambda,
                 Scratch& scratch) const {
    if (y.size() != n_) {
      throw std::invalid_argument("CircularCorrelator: frame length mismatch");
    }
    if (!use_fft_) {
      lambda = circular_correlate_direct(y, p_);
      return;
    }
    const std::size_t m = fft_->size();
    scratch.buf.assign(m, {0.0, 0.0});
    // Wrapped extension: y followed by its first L0-1 samples, so that the
    // linear convolution below sees every circular window.
    for (std::size_t i = 0; i < n_; ++i) scratch.buf[i] = {y[i], 0.0};
    for (std::size_t i = 0; i + 1 < l0_; ++i) scratch.buf[n_ + i] = {y[i], 0.0};
    fft_->forward(scratch.buf);
    for (std::size_t i = 0; i < m; ++i) scratch.buf[i] *= pref_[i];
    fft_->inverse(scratch.buf);
    lambda.resize(n_);
    // conv[k] = sum_i p[i] * y_ext[k - L0 + 1 + i]  =>  lambda[t] lives at
    // k = t + L0 - 1.
    for (std::size_t t = 0; t < n_; ++t) {
      lambda[t] = scratch.buf[t + l0_ - 1].real();
    }
  }

 private:
  std::size_t n_;
  std::size_t l0_;
  std::vector<double> p_;
  bool use_fft_ = false;
  std::unique_ptr<Pow2Fft> fft_;
  std::vector<std::complex<double>> pref_;
};

}  // namespace essa
