#pragma once

#include <span>
#include <vector>

namespace vsc {

// Kaiser-windowed sinc, evaluated polyphase over the reduced rate ratio.
// The filter spans kResampleZeroCrossings zero crossings on each side of the
// centre at the lower of the two rates, with the passband edge at
// kResampleRolloff of the lower Nyquist frequency.
inline constexpr int kResampleZeroCrossings = 32;
inline constexpr double kResampleRolloff = 0.95;
inline constexpr double kResampleKaiserBeta = 8.6;

/// Output length is ceil(n * to / from). Equal rates return the input unchanged.
std::vector<double> resample(std::span<const double> input, int from_rate_hz,
                             int to_rate_hz);

}  // namespace vsc
