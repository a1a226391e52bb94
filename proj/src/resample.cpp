#include "vsc/resample.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "vsc/error.hpp"

namespace vsc {
namespace {

double bessel_i0(double x) {
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double kaiser(double x, double beta) {
  // x in [-1, 1]
  if (std::abs(x) >= 1.0) return 0.0;
  return bessel_i0(beta * std::sqrt(1.0 - x * x)) / bessel_i0(beta);
}

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace

std::vector<double> resample(std::span<const double> input, int from_rate_hz,
                             int to_rate_hz) {
  if (from_rate_hz <= 0 || to_rate_hz <= 0) {
    throw Error(ErrorKind::kConfig, "sample rates must be positive");
  }
  if (from_rate_hz == to_rate_hz) return {input.begin(), input.end()};

  const long g = std::gcd(from_rate_hz, to_rate_hz);
  const long up = to_rate_hz / g;
  const long down = from_rate_hz / g;

  // Cutoff in cycles per input sample; half-length in input samples.
  const double cutoff = 0.5 * kResampleRolloff * std::min(1.0, double(up) / double(down));
  const double half_len = kResampleZeroCrossings / (2.0 * cutoff);
  const long taps = static_cast<long>(std::ceil(half_len));
  const long width = 2 * taps + 1;

  // table[phase][k] weights input sample (base + k - taps) for an output whose
  // input-domain position is base + phase / up.
  std::vector<double> table(static_cast<std::size_t>(up * width));
  for (long phase = 0; phase < up; ++phase) {
    const double frac = double(phase) / double(up);
    for (long k = 0; k < width; ++k) {
      const double t = frac - double(k - taps);
      table[static_cast<std::size_t>(phase * width + k)] =
          2.0 * cutoff * sinc(2.0 * cutoff * t) * kaiser(t / half_len, kResampleKaiserBeta);
    }
  }

  const long n_in = static_cast<long>(input.size());
  const long n_out = (n_in * up + down - 1) / down;
  std::vector<double> out(static_cast<std::size_t>(n_out));
  for (long j = 0; j < n_out; ++j) {
    const long num = j * down;
    const long base = num / up;
    const long phase = num % up;
    const double* w = &table[static_cast<std::size_t>(phase * width)];
    const long lo = std::max(0L, taps - base);
    const long hi = std::min(width, n_in - base + taps);
    double acc = 0.0;
    for (long k = lo; k < hi; ++k) acc += w[k] * input[static_cast<std::size_t>(base + k - taps)];
    out[static_cast<std::size_t>(j)] = acc;
  }
  return out;
}

}  // namespace vsc
