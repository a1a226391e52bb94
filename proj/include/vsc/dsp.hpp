#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "vsc/dataset.hpp"

namespace vsc {

enum class SpectrogramStyle { kAmplitude, kMel, kMfcc };
enum class AmplitudeScale { kLogDb, kLinear };
enum class FrequencyAxis { kLog, kLinear };
enum class ColormapName { kViridis, kMagma };
enum class Detail { kStandard, kLow };

// Fixed processing choices that every rendered corpus records.
inline constexpr double kDbFloor = 1e-10;
inline constexpr double kTopDb = 80.0;

/// Everything that determines how a clip becomes an image. The default
/// instance is the benchmark's default rendering: log-dB amplitude, log
/// frequency axis, viridis, labels shown, colorbar hidden.
struct SpectrogramConfig {
  SpectrogramStyle style = SpectrogramStyle::kAmplitude;
  AmplitudeScale amp_scale = AmplitudeScale::kLogDb;
  FrequencyAxis freq_axis = FrequencyAxis::kLog;
  ColormapName colormap = ColormapName::kViridis;
  bool show_labels = true;
  bool show_colorbar = false;
  int n_fft = 2048;
  int hop = 512;
  std::string window = "hann";
  int n_mels = 128;
  int n_mfcc = 20;
  int image_width_px = 640;
  int image_height_px = 480;
  Detail detail = Detail::kStandard;

  friend bool operator==(const SpectrogramConfig&, const SpectrogramConfig&) = default;
};

const char* to_string(SpectrogramStyle v);
const char* to_string(AmplitudeScale v);
const char* to_string(FrequencyAxis v);
const char* to_string(ColormapName v);
const char* to_string(Detail v);
SpectrogramStyle parse_style(const std::string& s);
AmplitudeScale parse_amp_scale(const std::string& s);
FrequencyAxis parse_freq_axis(const std::string& s);
ColormapName parse_colormap(const std::string& s);
Detail parse_detail(const std::string& s);

/// Throws ErrorKind::kConfig when an invariant between fields is violated.
void validate(const SpectrogramConfig& cfg);

void to_json(nlohmann::json& j, const SpectrogramConfig& cfg);
void from_json(const nlohmann::json& j, SpectrogramConfig& cfg);

/// The processing decisions not carried by the config (floors, padding, mel
/// scale), serialized into manifests and image hashes.
nlohmann::json dsp_decisions();

enum class MatrixUnit { kLinearMagnitude, kDb, kMelPower, kMelPowerDb, kMfccCoeff };
const char* to_string(MatrixUnit unit);

/// values is row-major: one row per frequency bin (or coefficient), one column
/// per frame.
struct SpectrogramMatrix {
  std::size_t n_bins = 0;
  std::size_t n_frames = 0;
  std::vector<double> values;
  std::vector<double> bin_frequencies_hz;
  std::vector<double> frame_times_s;
  MatrixUnit unit = MatrixUnit::kLinearMagnitude;

  double at(std::size_t bin, std::size_t frame) const { return values[bin * n_frames + frame]; }
  double& at(std::size_t bin, std::size_t frame) { return values[bin * n_frames + frame]; }
  bool empty() const { return values.empty(); }
};

/// Periodic window of length n ("hann", "hamming", "rectangular").
std::vector<double> make_window(const std::string& name, int n);

/// Magnitude STFT with centred, reflect-padded frames:
/// n_frames = 1 + floor(len / hop), n_bins = n_fft / 2 + 1.
SpectrogramMatrix stft_magnitude(const AudioClip& clip, const SpectrogramConfig& cfg);

/// 20 log10 for magnitudes, 10 log10 for powers, referenced to the global max
/// and clipped at -top_db. An all-zero input maps to -top_db everywhere.
SpectrogramMatrix to_db(const SpectrogramMatrix& m, double top_db = kTopDb);

/// Slaney mel scale (linear below 1 kHz, logarithmic above).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

/// Triangular filterbank with Slaney area normalization, row-major
/// [n_mels x (n_fft/2 + 1)], band edges spanning 0 Hz to fmax_hz.
std::vector<double> mel_filterbank(int sample_rate_hz, int n_fft, int n_mels, double fmax_hz);
/// Centre frequencies of the n_mels bands.
std::vector<double> mel_band_centers(int n_mels, double fmax_hz);

/// filterbank x power, no dB scaling. power.unit must be linear power; the
/// result carries kMelPower.
SpectrogramMatrix apply_filterbank(const std::vector<double>& filterbank, int n_mels,
                                   const SpectrogramMatrix& power);

/// |STFT|^2 through the mel filterbank, dB-scaled when cfg.amp_scale = log_db.
SpectrogramMatrix mel_spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg);

/// Orthonormal DCT-II basis, row-major [n_out x n_in].
std::vector<double> dct_ii_matrix(int n_in, int n_out);

/// Orthonormal DCT-II of each column of a log-mel matrix, first n_mfcc rows kept.
SpectrogramMatrix mfcc_from_log_mel(const SpectrogramMatrix& log_mel, int n_mfcc);
SpectrogramMatrix mfcc(const AudioClip& clip, const SpectrogramConfig& cfg);

/// The matrix a config renders: dispatches on style and amplitude scale.
SpectrogramMatrix compute_spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg);

}  // namespace vsc
