#include "vsc/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "vsc/error.hpp"
#include "vsc/fft.hpp"

namespace vsc {
namespace {

template <typename E, std::size_t N>
E parse_enum(const std::string& s, const std::pair<const char*, E> (&table)[N],
             const char* what) {
  for (const auto& [name, value] : table) {
    if (s == name) return value;
  }
  throw Error(ErrorKind::kConfig, std::string("unknown ") + what + " '" + s + "'");
}

constexpr std::pair<const char*, SpectrogramStyle> kStyles[] = {
    {"amplitude", SpectrogramStyle::kAmplitude},
    {"mel", SpectrogramStyle::kMel},
    {"mfcc", SpectrogramStyle::kMfcc}};
constexpr std::pair<const char*, AmplitudeScale> kAmpScales[] = {
    {"log_db", AmplitudeScale::kLogDb}, {"linear", AmplitudeScale::kLinear}};
constexpr std::pair<const char*, FrequencyAxis> kFreqAxes[] = {
    {"log", FrequencyAxis::kLog}, {"linear", FrequencyAxis::kLinear}};
constexpr std::pair<const char*, ColormapName> kColormaps[] = {
    {"viridis", ColormapName::kViridis}, {"magma", ColormapName::kMagma}};
constexpr std::pair<const char*, Detail> kDetails[] = {
    {"standard", Detail::kStandard}, {"low", Detail::kLow}};

template <typename E, std::size_t N>
const char* enum_name(E v, const std::pair<const char*, E> (&table)[N]) {
  for (const auto& [name, value] : table) {
    if (v == value) return name;
  }
  return "?";
}

// Index into a reflect-padded signal ("abc" -> "...cb|abc|ba...").
std::size_t reflect_index(long i, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long r = i % period;
  if (r < 0) r += period;
  return static_cast<std::size_t>(r < n ? r : period - r);
}

}  // namespace

const char* to_string(SpectrogramStyle v) { return enum_name(v, kStyles); }
const char* to_string(AmplitudeScale v) { return enum_name(v, kAmpScales); }
const char* to_string(FrequencyAxis v) { return enum_name(v, kFreqAxes); }
const char* to_string(ColormapName v) { return enum_name(v, kColormaps); }
const char* to_string(Detail v) { return enum_name(v, kDetails); }
SpectrogramStyle parse_style(const std::string& s) { return parse_enum(s, kStyles, "style"); }
AmplitudeScale parse_amp_scale(const std::string& s) {
  return parse_enum(s, kAmpScales, "amplitude scale");
}
FrequencyAxis parse_freq_axis(const std::string& s) {
  return parse_enum(s, kFreqAxes, "frequency axis");
}
ColormapName parse_colormap(const std::string& s) { return parse_enum(s, kColormaps, "colormap"); }
Detail parse_detail(const std::string& s) { return parse_enum(s, kDetails, "detail"); }

const char* to_string(MatrixUnit unit) {
  switch (unit) {
    case MatrixUnit::kLinearMagnitude: return "linear_magnitude";
    case MatrixUnit::kDb: return "db";
    case MatrixUnit::kMelPower: return "mel_power";
    case MatrixUnit::kMelPowerDb: return "mel_power_db";
    case MatrixUnit::kMfccCoeff: return "mfcc_coeff";
  }
  return "?";
}

void validate(const SpectrogramConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::kConfig, msg); };
  if (cfg.n_fft < 2) fail("n_fft must be at least 2");
  if (cfg.hop <= 0 || cfg.hop > cfg.n_fft) fail("hop must satisfy 0 < hop <= n_fft");
  if (cfg.n_mels < 1 || cfg.n_mels > cfg.n_fft / 2 + 1) {
    fail("n_mels must be in 1..n_fft/2+1");
  }
  if (cfg.n_mfcc < 1 || cfg.n_mfcc > cfg.n_mels) fail("n_mfcc must be in 1..n_mels");
  if (cfg.image_width_px < 64 || cfg.image_height_px < 64) {
    fail("image dimensions must be at least 64 px");
  }
  make_window(cfg.window, 2);
}

void to_json(nlohmann::json& j, const SpectrogramConfig& cfg) {
  j = nlohmann::json{{"style", to_string(cfg.style)},
                     {"amp_scale", to_string(cfg.amp_scale)},
                     {"freq_axis", to_string(cfg.freq_axis)},
                     {"colormap", to_string(cfg.colormap)},
                     {"show_labels", cfg.show_labels},
                     {"show_colorbar", cfg.show_colorbar},
                     {"n_fft", cfg.n_fft},
                     {"hop", cfg.hop},
                     {"window", cfg.window},
                     {"n_mels", cfg.n_mels},
                     {"n_mfcc", cfg.n_mfcc},
                     {"image_width_px", cfg.image_width_px},
                     {"image_height_px", cfg.image_height_px},
                     {"detail", to_string(cfg.detail)}};
}

void from_json(const nlohmann::json& j, SpectrogramConfig& cfg) {
  SpectrogramConfig d;
  cfg.style = parse_style(j.value("style", to_string(d.style)));
  cfg.amp_scale = parse_amp_scale(j.value("amp_scale", to_string(d.amp_scale)));
  cfg.freq_axis = parse_freq_axis(j.value("freq_axis", to_string(d.freq_axis)));
  cfg.colormap = parse_colormap(j.value("colormap", to_string(d.colormap)));
  cfg.show_labels = j.value("show_labels", d.show_labels);
  cfg.show_colorbar = j.value("show_colorbar", d.show_colorbar);
  cfg.n_fft = j.value("n_fft", d.n_fft);
  cfg.hop = j.value("hop", d.hop);
  cfg.window = j.value("window", d.window);
  cfg.n_mels = j.value("n_mels", d.n_mels);
  cfg.n_mfcc = j.value("n_mfcc", d.n_mfcc);
  cfg.image_width_px = j.value("image_width_px", d.image_width_px);
  cfg.image_height_px = j.value("image_height_px", d.image_height_px);
  cfg.detail = parse_detail(j.value("detail", to_string(d.detail)));
}

nlohmann::json dsp_decisions() {
  return {{"window_symmetry", "periodic"},
          {"framing", "centered"},
          {"padding", "reflect"},
          {"db_floor", kDbFloor},
          {"top_db", kTopDb},
          {"db_reference", "global_max"},
          {"mel_scale", "slaney"},
          {"mel_norm", "slaney"},
          {"mel_fmin_hz", 0.0},
          {"mel_fmax", "nyquist"},
          {"mfcc_dct", "dct2_ortho"},
          {"mfcc_input", "mel_power_db"}};
}

std::vector<double> make_window(const std::string& name, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  const double two_pi = 2.0 * std::numbers::pi;
  if (name == "hann") {
    for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(two_pi * i / n);
  } else if (name == "hamming") {
    for (int i = 0; i < n; ++i) w[i] = 0.54 - 0.46 * std::cos(two_pi * i / n);
  } else if (name == "rectangular" || name == "boxcar") {
    std::fill(w.begin(), w.end(), 1.0);
  } else {
    throw Error(ErrorKind::kConfig, "unknown window '" + name + "'");
  }
  return w;
}

SpectrogramMatrix stft_magnitude(const AudioClip& clip, const SpectrogramConfig& cfg) {
  validate(cfg);
  if (clip.samples.empty()) throw Error(ErrorKind::kEmptyInput, "STFT of an empty signal");

  const long n = static_cast<long>(clip.samples.size());
  const long n_fft = cfg.n_fft;
  const long pad = n_fft / 2;
  const std::size_t n_frames = 1 + static_cast<std::size_t>(n / cfg.hop);
  const std::size_t n_bins = static_cast<std::size_t>(n_fft / 2 + 1);

  const auto window = make_window(cfg.window, cfg.n_fft);
  const FftPlan plan(static_cast<std::size_t>(n_fft));

  SpectrogramMatrix m;
  m.n_bins = n_bins;
  m.n_frames = n_frames;
  m.values.assign(n_bins * n_frames, 0.0);
  m.unit = MatrixUnit::kLinearMagnitude;
  m.bin_frequencies_hz.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    m.bin_frequencies_hz[b] = double(b) * clip.sample_rate_hz / double(n_fft);
  }
  m.frame_times_s.resize(n_frames);

  std::vector<std::complex<double>> frame(static_cast<std::size_t>(n_fft));
  for (std::size_t t = 0; t < n_frames; ++t) {
    m.frame_times_s[t] = double(t) * cfg.hop / clip.sample_rate_hz;
    const long start = static_cast<long>(t) * cfg.hop - pad;
    for (long i = 0; i < n_fft; ++i) {
      frame[i] = clip.samples[reflect_index(start + i, n)] * window[i];
    }
    const auto spectrum = plan.forward(frame);
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double re = spectrum[b].real();
      const double im = spectrum[b].imag();
      m.at(b, t) = std::sqrt(re * re + im * im);
    }
  }
  return m;
}

SpectrogramMatrix to_db(const SpectrogramMatrix& m, double top_db) {
  double factor;
  MatrixUnit out_unit;
  switch (m.unit) {
    case MatrixUnit::kLinearMagnitude:
      factor = 20.0;
      out_unit = MatrixUnit::kDb;
      break;
    case MatrixUnit::kMelPower:
      factor = 10.0;
      out_unit = MatrixUnit::kMelPowerDb;
      break;
    default:
      throw Error(ErrorKind::kConfig,
                  std::string("to_db expects linear values, got ") + to_string(m.unit));
  }
  SpectrogramMatrix out = m;
  out.unit = out_unit;
  const double ref = m.values.empty() ? 0.0 : *std::max_element(m.values.begin(), m.values.end());
  if (ref <= 0.0) {
    std::fill(out.values.begin(), out.values.end(), -top_db);
    return out;
  }
  const double ref_db = factor * std::log10(std::max(ref, kDbFloor));
  for (double& v : out.values) {
    v = std::max(factor * std::log10(std::max(v, kDbFloor)) - ref_db, -top_db);
  }
  return out;
}

double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (hz < min_log_hz) return hz / f_sp;
  return min_log_mel + std::log(hz / min_log_hz) / logstep;
}

double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  if (mel < min_log_mel) return mel * f_sp;
  return min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

namespace {

std::vector<double> mel_edges_hz(int n_mels, double fmax_hz) {
  const double lo = hz_to_mel(0.0);
  const double hi = hz_to_mel(fmax_hz);
  std::vector<double> edges(static_cast<std::size_t>(n_mels + 2));
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (n_mels + 1));
  }
  return edges;
}

}  // namespace

std::vector<double> mel_band_centers(int n_mels, double fmax_hz) {
  auto edges = mel_edges_hz(n_mels, fmax_hz);
  return {edges.begin() + 1, edges.end() - 1};
}

std::vector<double> mel_filterbank(int sample_rate_hz, int n_fft, int n_mels, double fmax_hz) {
  const int n_bins = n_fft / 2 + 1;
  if (n_mels < 1 || n_mels > n_bins) {
    throw Error(ErrorKind::kConfig, "n_mels must be in 1..n_fft/2+1");
  }
  const auto edges = mel_edges_hz(n_mels, fmax_hz);
  std::vector<double> fb(static_cast<std::size_t>(n_mels) * n_bins, 0.0);
  for (int m = 0; m < n_mels; ++m) {
    const double lower = edges[m];
    const double center = edges[m + 1];
    const double upper = edges[m + 2];
    const double enorm = 2.0 / (upper - lower);
    for (int b = 0; b < n_bins; ++b) {
      const double f = double(b) * sample_rate_hz / n_fft;
      const double rise = (f - lower) / (center - lower);
      const double fall = (upper - f) / (upper - center);
      fb[static_cast<std::size_t>(m) * n_bins + b] = std::max(0.0, std::min(rise, fall)) * enorm;
    }
  }
  return fb;
}

SpectrogramMatrix apply_filterbank(const std::vector<double>& filterbank, int n_mels,
                                   const SpectrogramMatrix& power) {
  const std::size_t n_bins = power.n_bins;
  if (filterbank.size() != static_cast<std::size_t>(n_mels) * n_bins) {
    throw Error(ErrorKind::kConfig, "filterbank shape does not match spectrum bins");
  }
  SpectrogramMatrix out;
  out.n_bins = static_cast<std::size_t>(n_mels);
  out.n_frames = power.n_frames;
  out.values.assign(out.n_bins * out.n_frames, 0.0);
  out.frame_times_s = power.frame_times_s;
  out.unit = MatrixUnit::kMelPower;
  for (std::size_t m = 0; m < out.n_bins; ++m) {
    const double* row = &filterbank[m * n_bins];
    double* dst = &out.values[m * out.n_frames];
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double w = row[b];
      if (w == 0.0) continue;
      const double* src = &power.values[b * power.n_frames];
      for (std::size_t t = 0; t < out.n_frames; ++t) dst[t] += w * src[t];
    }
  }
  return out;
}

SpectrogramMatrix mel_spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg) {
  validate(cfg);
  SpectrogramMatrix power = stft_magnitude(clip, cfg);
  for (double& v : power.values) v *= v;
  const double fmax = clip.sample_rate_hz / 2.0;
  const auto fb = mel_filterbank(clip.sample_rate_hz, cfg.n_fft, cfg.n_mels, fmax);
  SpectrogramMatrix mel = apply_filterbank(fb, cfg.n_mels, power);
  mel.bin_frequencies_hz = mel_band_centers(cfg.n_mels, fmax);
  if (cfg.amp_scale == AmplitudeScale::kLogDb) return to_db(mel);
  return mel;
}

std::vector<double> dct_ii_matrix(int n_in, int n_out) {
  std::vector<double> basis(static_cast<std::size_t>(n_out) * n_in);
  for (int k = 0; k < n_out; ++k) {
    const double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n_in);
    for (int i = 0; i < n_in; ++i) {
      basis[static_cast<std::size_t>(k) * n_in + i] =
          scale * std::cos(std::numbers::pi * k * (2.0 * i + 1.0) / (2.0 * n_in));
    }
  }
  return basis;
}

SpectrogramMatrix mfcc_from_log_mel(const SpectrogramMatrix& log_mel, int n_mfcc) {
  const int n_mels = static_cast<int>(log_mel.n_bins);
  if (n_mfcc < 1 || n_mfcc > n_mels) {
    throw Error(ErrorKind::kConfig, "n_mfcc must be in 1..n_mels");
  }
  const auto basis = dct_ii_matrix(n_mels, n_mfcc);
  SpectrogramMatrix out;
  out.n_bins = static_cast<std::size_t>(n_mfcc);
  out.n_frames = log_mel.n_frames;
  out.values.assign(out.n_bins * out.n_frames, 0.0);
  out.frame_times_s = log_mel.frame_times_s;
  out.unit = MatrixUnit::kMfccCoeff;
  out.bin_frequencies_hz.resize(out.n_bins);
  for (std::size_t k = 0; k < out.n_bins; ++k) {
    out.bin_frequencies_hz[k] = double(k);
    for (std::size_t i = 0; i < log_mel.n_bins; ++i) {
      const double w = basis[k * log_mel.n_bins + i];
      const double* src = &log_mel.values[i * log_mel.n_frames];
      double* dst = &out.values[k * out.n_frames];
      for (std::size_t t = 0; t < out.n_frames; ++t) dst[t] += w * src[t];
    }
  }
  return out;
}

SpectrogramMatrix mfcc(const AudioClip& clip, const SpectrogramConfig& cfg) {
  validate(cfg);
  SpectrogramConfig mel_cfg = cfg;
  mel_cfg.amp_scale = AmplitudeScale::kLogDb;
  return mfcc_from_log_mel(mel_spectrogram(clip, mel_cfg), cfg.n_mfcc);
}

SpectrogramMatrix compute_spectrogram(const AudioClip& clip, const SpectrogramConfig& cfg) {
  switch (cfg.style) {
    case SpectrogramStyle::kAmplitude: {
      auto mag = stft_magnitude(clip, cfg);
      return cfg.amp_scale == AmplitudeScale::kLogDb ? to_db(mag) : mag;
    }
    case SpectrogramStyle::kMel:
      return mel_spectrogram(clip, cfg);
    case SpectrogramStyle::kMfcc:
      return mfcc(clip, cfg);
  }
  throw Error(ErrorKind::kConfig, "unknown spectrogram style");
}

}  // namespace vsc
