#pragma once

// Direct, unoptimized reference computations used to check the library.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "vsc/rng.hpp"

namespace vsc::oracle {

inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      acc += x[j] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

inline double hann(std::size_t i, std::size_t n) {
  return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
}

/// Magnitudes of frame t of a centred, reflect-padded, Hann-windowed STFT.
inline std::vector<double> stft_frame(const std::vector<double>& x, std::size_t n_fft,
                                      std::size_t hop, std::size_t t) {
  const long n = static_cast<long>(x.size());
  std::vector<std::complex<double>> frame(n_fft);
  for (std::size_t i = 0; i < n_fft; ++i) {
    long idx = static_cast<long>(t * hop + i) - static_cast<long>(n_fft / 2);
    while (idx < 0 || idx >= n) idx = idx < 0 ? -idx : 2 * (n - 1) - idx;
    frame[i] = x[static_cast<std::size_t>(idx)] * hann(i, n_fft);
  }
  const auto spec = dft(frame);
  std::vector<double> mag(n_fft / 2 + 1);
  for (std::size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(spec[k]);
  return mag;
}

inline double slaney_mel(double hz) {
  if (hz < 1000.0) return 3.0 * hz / 200.0;
  return 15.0 + 27.0 * std::log(hz / 1000.0) / std::log(6.4);
}

inline double slaney_hz(double mel) {
  if (mel < 15.0) return 200.0 * mel / 3.0;
  return 1000.0 * std::exp(std::log(6.4) * (mel - 15.0) / 27.0);
}

/// Triangular Slaney-normalized filterbank, [n_mels][n_fft/2+1].
inline std::vector<std::vector<double>> mel_filterbank(double sr, std::size_t n_fft,
                                                       std::size_t n_mels, double fmax) {
  std::vector<double> edges(n_mels + 2);
  const double lo = slaney_mel(0.0);
  const double hi = slaney_mel(fmax);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = slaney_hz(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  std::vector<std::vector<double>> fb(n_mels, std::vector<double>(n_fft / 2 + 1, 0.0));
  for (std::size_t m = 0; m < n_mels; ++m) {
    for (std::size_t k = 0; k <= n_fft / 2; ++k) {
      const double f = static_cast<double>(k) * sr / static_cast<double>(n_fft);
      const double rise = (f - edges[m]) / (edges[m + 1] - edges[m]);
      const double fall = (edges[m + 2] - f) / (edges[m + 2] - edges[m + 1]);
      fb[m][k] = std::max(0.0, std::min(rise, fall)) * 2.0 / (edges[m + 2] - edges[m]);
    }
  }
  return fb;
}

/// Orthonormal DCT-II coefficient k of x by direct summation.
inline double dct2(const std::vector<double>& x, std::size_t k) {
  const double n = static_cast<double>(x.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i] * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
  }
  return acc * std::sqrt((k == 0 ? 1.0 : 2.0) / n);
}

/// k-means objective minimized over every assignment of points to k labels
/// (labels canonicalized so each partition is visited once).
inline double exhaustive_kmeans_optimum(const std::vector<std::vector<double>>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  const std::size_t dim = pts.empty() ? 0 : pts[0].size();
  std::vector<std::size_t> label(n, 0);
  double best = INFINITY;
  auto cost = [&] {
    std::vector<std::vector<double>> sum(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++count[label[i]];
      for (std::size_t d = 0; d < dim; ++d) sum[label[i]][d] += pts[i][d];
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = pts[i][d] - sum[label[i]][d] / static_cast<double>(count[label[i]]);
        total += diff * diff;
      }
    }
    return total;
  };
  std::function<void(std::size_t, std::size_t)> assign = [&](std::size_t i, std::size_t used) {
    if (i == n) {
      if (used == std::min(k, n)) best = std::min(best, cost());
      return;
    }
    for (std::size_t l = 0; l < std::min(used + 1, k); ++l) {
      label[i] = l;
      assign(i + 1, std::max(used, l + 1));
    }
  };
  assign(0, 0);
  return best;
}

/// Small clustered point set for comparing Lloyd against the exhaustive
/// optimum: three blobs of 2 to 4 points in 2 or 3 dimensions.
inline std::vector<std::vector<double>> kmeans_trial_points(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t dim = 2 + rng.below(2);
  std::vector<std::vector<double>> pts;
  for (int blob = 0; blob < 3; ++blob) {
    std::vector<double> centre(dim);
    for (auto& c : centre) c = 20.0 * rng.uniform() - 10.0;
    const std::size_t count = 2 + rng.below(3);
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> p(dim);
      for (std::size_t d = 0; d < dim; ++d) p[d] = centre[d] + 2.0 * rng.uniform() - 1.0;
      pts.push_back(p);
    }
  }
  return pts;
}

}  // namespace vsc::oracle
