#include "vsc/fft.hpp"

#include <cmath>
#include <numbers>

#include "vsc/error.hpp"

namespace vsc {
namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
  if (n == 0) throw Error(ErrorKind::kConfig, "FFT length must be positive");
  m_ = is_pow2(n) ? n : next_pow2(2 * n - 1);

  bitrev_.resize(m_);
  int bits = 0;
  while ((std::size_t{1} << bits) < m_) ++bits;
  for (std::size_t i = 0; i < m_; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    bitrev_[i] = r;
  }
  twiddles_.resize(m_ / 2);
  for (std::size_t k = 0; k < m_ / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * double(k) / double(m_);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }

  if (m_ != n_) {
    // chirp[j] = exp(-i pi j^2 / n); j^2 reduced mod 2n to keep the angle small.
    chirp_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
      const std::size_t jj = (j * j) % (2 * n_);
      const double angle = -std::numbers::pi * double(jj) / double(n_);
      chirp_[j] = {std::cos(angle), std::sin(angle)};
    }
    std::vector<std::complex<double>> b(m_);
    b[0] = std::conj(chirp_[0]);
    for (std::size_t j = 1; j < n_; ++j) b[j] = b[m_ - j] = std::conj(chirp_[j]);
    radix2_inplace(b, false);
    chirp_fft_ = std::move(b);
  }
}

void FftPlan::radix2_inplace(std::vector<std::complex<double>>& a, bool inverse) const {
  for (std::size_t i = 0; i < m_; ++i) {
    if (i < bitrev_[i]) std::swap(a[i], a[bitrev_[i]]);
  }
  for (std::size_t len = 2; len <= m_; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t stride = m_ / len;
    for (std::size_t start = 0; start < m_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = twiddles_[k * stride].real();
        const double wi = inverse ? -twiddles_[k * stride].imag() : twiddles_[k * stride].imag();
        const std::complex<double> u = a[start + k];
        const std::complex<double> x = a[start + k + half];
        const std::complex<double> v{x.real() * wr - x.imag() * wi, x.real() * wi + x.imag() * wr};
        a[start + k] = u + v;
        a[start + k + half] = u - v;
      }
    }
  }
}

std::vector<std::complex<double>> FftPlan::forward(
    std::span<const std::complex<double>> in) const {
  if (in.size() != n_) throw Error(ErrorKind::kConfig, "FFT input length mismatch");
  if (m_ == n_) {
    std::vector<std::complex<double>> a(in.begin(), in.end());
    radix2_inplace(a, false);
    return a;
  }
  std::vector<std::complex<double>> a(m_);
  for (std::size_t j = 0; j < n_; ++j) a[j] = in[j] * chirp_[j];
  radix2_inplace(a, false);
  for (std::size_t k = 0; k < m_; ++k) a[k] *= chirp_fft_[k];
  radix2_inplace(a, true);
  std::vector<std::complex<double>> out(n_);
  const double scale = 1.0 / double(m_);
  for (std::size_t k = 0; k < n_; ++k) out[k] = a[k] * scale * chirp_[k];
  return out;
}

std::vector<std::complex<double>> FftPlan::forward_real(std::span<const double> in) const {
  std::vector<std::complex<double>> c(in.begin(), in.end());
  return forward(c);
}

}  // namespace vsc
