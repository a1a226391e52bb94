#pragma once

#include <complex>
#include <span>
#include <vector>

namespace vsc {

/// Forward DFT of arbitrary length: iterative radix-2 for powers of two,
/// Bluestein's chirp-z on top of radix-2 otherwise. Plans are immutable after
/// construction and may be shared across threads.
class FftPlan {
 public:
  explicit FftPlan(std::size_t n);

  std::size_t size() const { return n_; }

  /// out[k] = sum_j in[j] * exp(-2 pi i j k / n)
  std::vector<std::complex<double>> forward(std::span<const std::complex<double>> in) const;
  std::vector<std::complex<double>> forward_real(std::span<const double> in) const;

 private:
  void radix2_inplace(std::vector<std::complex<double>>& a, bool inverse) const;

  std::size_t n_;
  std::size_t m_;  // radix-2 working length (n_ or the Bluestein convolution size)
  std::vector<std::complex<double>> twiddles_;
  std::vector<std::size_t> bitrev_;
  std::vector<std::complex<double>> chirp_;
  std::vector<std::complex<double>> chirp_fft_;
};

}  // namespace vsc
