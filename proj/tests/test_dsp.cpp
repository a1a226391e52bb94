#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "test_support.hpp"
#include "vsc/dataset.hpp"
#include "vsc/dsp.hpp"
#include "vsc/fft.hpp"
#include "vsc/rng.hpp"

using namespace vsc;

namespace {

AudioClip noise_clip(std::size_t n, std::uint64_t seed, int sr = 22050) {
  AudioClip c;
  c.sample_rate_hz = sr;
  Rng rng(seed);
  c.samples.resize(n);
  for (auto& v : c.samples) v = 2.0 * rng.uniform() - 1.0;
  return c;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0;
  for (double v : b) scale = std::max(scale, std::abs(v));
  double err = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) err = std::max(err, std::abs(a[i] - b[i]));
  return err / std::max(scale, 1e-300);
}

}  // namespace

TEST_SUITE("dsp") {

TEST_CASE("FFT matches the direct DFT for radix-2 and Bluestein lengths") {
  for (std::size_t n : {1u, 2u, 8u, 64u, 12u, 100u, 441u, 1000u}) {
    Rng rng(n);
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform() - 0.5, rng.uniform() - 0.5};
    const auto fast = FftPlan(n).forward(x);
    const auto slow = oracle::dft(x);
    double err = 0.0;
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      err = std::max(err, std::abs(fast[k] - slow[k]));
      scale = std::max(scale, std::abs(slow[k]));
    }
    CHECK_MESSAGE(err <= 1e-9 * std::max(1.0, scale), "n = " << n);
  }
}

TEST_CASE("Parseval holds for a windowed frame") {
  const auto clip = noise_clip(2048, 3);
  std::vector<std::complex<double>> x(clip.samples.begin(), clip.samples.end());
  const auto spec = FftPlan(2048).forward(x);
  double time_energy = 0.0;
  double freq_energy = 0.0;
  for (auto v : x) time_energy += std::norm(v);
  for (auto v : spec) freq_energy += std::norm(v);
  CHECK(freq_energy / 2048.0 == doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("STFT frames match the direct reflect-padded DFT") {
  const auto clip = noise_clip(22050, 11);
  SpectrogramConfig cfg;
  const auto m = stft_magnitude(clip, cfg);
  for (std::size_t t : {0u, 1u, 2u, 20u, 42u, 43u}) {
    const auto ref = oracle::stft_frame(clip.samples, 2048, 512, t);
    std::vector<double> got(m.n_bins);
    for (std::size_t b = 0; b < m.n_bins; ++b) got[b] = m.at(b, t);
    CHECK_MESSAGE(max_rel_err(got, ref) < 1e-9, "frame " << t);
  }
}

TEST_CASE("five seconds at 22050 Hz gives a 1025 x 216 matrix") {
  const auto clip = noise_clip(110250, 1);
  const auto m = compute_spectrogram(clip, SpectrogramConfig{});
  CHECK(m.n_bins == 1025);
  CHECK(m.n_frames == 216);
  CHECK(m.bin_frequencies_hz.back() == doctest::Approx(11025.0));
  CHECK(m.frame_times_s[1] == doctest::Approx(512.0 / 22050.0));
}

TEST_CASE("a hop-aligned time shift shifts STFT columns") {
  const auto clip = noise_clip(8192, 5);
  AudioClip shifted = clip;
  shifted.samples.assign(clip.samples.begin() + 512, clip.samples.end());
  SpectrogramConfig cfg;
  const auto a = stft_magnitude(clip, cfg);
  const auto b = stft_magnitude(shifted, cfg);
  for (std::size_t t = 3; t + 4 < b.n_frames; ++t) {
    for (std::size_t k = 0; k < a.n_bins; k += 37) {
      CHECK(b.at(k, t) == doctest::Approx(a.at(k, t + 1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("to_db references the maximum and clips at -80 dB") {
  SpectrogramMatrix m;
  m.n_bins = 1;
  m.n_frames = 4;
  m.values = {1.0, 0.1, 1e-6, 0.0};
  m.bin_frequencies_hz = {0.0};
  m.unit = MatrixUnit::kLinearMagnitude;
  const auto db = to_db(m);
  CHECK(db.unit == MatrixUnit::kDb);
  CHECK(db.values[0] == doctest::Approx(0.0));
  CHECK(db.values[1] == doctest::Approx(-20.0));
  CHECK(db.values[2] == doctest::Approx(-80.0));
  CHECK(db.values[3] == doctest::Approx(-80.0));
  m.unit = MatrixUnit::kMelPower;
  CHECK(to_db(m).values[1] == doctest::Approx(-10.0));
  m.values = {0.0, 0.0, 0.0, 0.0};
  for (double v : to_db(m).values) CHECK(v == -80.0);
}

TEST_CASE("Slaney mel scale reference points") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(1000.0) == doctest::Approx(15.0));
  CHECK(hz_to_mel(6400.0) == doctest::Approx(42.0));
  for (double hz : {10.0, 440.0, 999.0, 1000.0, 4000.0, 11025.0}) {
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-12));
    CHECK(hz_to_mel(hz) == doctest::Approx(oracle::slaney_mel(hz)).epsilon(1e-12));
  }
}

TEST_CASE("mel filterbank matches the loop construction") {
  const auto fb = mel_filterbank(22050, 2048, 128, 11025.0);
  const auto ref = oracle::mel_filterbank(22050.0, 2048, 128, 11025.0);
  REQUIRE(fb.size() == 128 * 1025);
  double err = 0.0;
  for (std::size_t m = 0; m < 128; ++m) {
    for (std::size_t k = 0; k < 1025; ++k) err = std::max(err, std::abs(fb[m * 1025 + k] - ref[m][k]));
  }
  CHECK(err < 1e-12);
}

TEST_CASE("mel spectrogram equals the explicit filterbank product") {
  const auto clip = noise_clip(22050, 9);
  SpectrogramConfig cfg;
  cfg.style = SpectrogramStyle::kMel;
  cfg.amp_scale = AmplitudeScale::kLinear;
  const auto mel = mel_spectrogram(clip, cfg);
  const auto mag = stft_magnitude(clip, cfg);
  const auto fb = oracle::mel_filterbank(22050.0, 2048, 128, 11025.0);
  std::vector<double> ref(128 * mag.n_frames, 0.0);
  for (std::size_t m = 0; m < 128; ++m) {
    for (std::size_t t = 0; t < mag.n_frames; ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < mag.n_bins; ++k) acc += fb[m][k] * mag.at(k, t) * mag.at(k, t);
      ref[m * mag.n_frames + t] = acc;
    }
  }
  CHECK(mel.unit == MatrixUnit::kMelPower);
  CHECK(max_rel_err(mel.values, ref) < 1e-9);
}

TEST_CASE("MFCC equals direct DCT-II summation of the dB mel matrix") {
  const auto clip = noise_clip(22050, 21);
  SpectrogramConfig cfg;
  cfg.style = SpectrogramStyle::kMfcc;
  const auto c = mfcc(clip, cfg);
  SpectrogramConfig mel_cfg = cfg;
  mel_cfg.style = SpectrogramStyle::kMel;
  const auto log_mel = mel_spectrogram(clip, mel_cfg);
  REQUIRE(log_mel.unit == MatrixUnit::kMelPowerDb);
  CHECK(c.n_bins == 20);
  CHECK(c.unit == MatrixUnit::kMfccCoeff);
  double err = 0.0;
  for (std::size_t t = 0; t < c.n_frames; t += 5) {
    std::vector<double> column(128);
    for (std::size_t m = 0; m < 128; ++m) column[m] = log_mel.at(m, t);
    for (std::size_t k = 0; k < 20; ++k) err = std::max(err, std::abs(c.at(k, t) - oracle::dct2(column, k)));
  }
  CHECK(err < 1e-9);
}

TEST_CASE("DCT basis is orthonormal") {
  const auto basis = dct_ii_matrix(16, 16);
  for (int a = 0; a < 16; ++a) {
    for (int b = 0; b < 16; ++b) {
      double dot = 0.0;
      for (int i = 0; i < 16; ++i) dot += basis[a * 16 + i] * basis[b * 16 + i];
      CHECK(dot == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("windows are periodic") {
  const auto w = make_window("hann", 8);
  CHECK(w[0] == 0.0);
  CHECK(w[4] == doctest::Approx(1.0));
  CHECK(w[2] == doctest::Approx(0.5));
  CHECK(make_window("rectangular", 4) == std::vector<double>(4, 1.0));
  VSC_CHECK_THROWS_KIND(make_window("kaiser", 8), ErrorKind::kConfig);
}

TEST_CASE("config validation and serialization") {
  SpectrogramConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  SpectrogramConfig bad = cfg;
  bad.hop = 0;
  VSC_CHECK_THROWS_KIND(validate(bad), ErrorKind::kConfig);
  bad = cfg;
  bad.n_mfcc = 200;
  VSC_CHECK_THROWS_KIND(validate(bad), ErrorKind::kConfig);
  bad = cfg;
  bad.image_width_px = 10;
  VSC_CHECK_THROWS_KIND(validate(bad), ErrorKind::kConfig);

  cfg.style = SpectrogramStyle::kMel;
  cfg.colormap = ColormapName::kMagma;
  cfg.detail = Detail::kLow;
  cfg.show_labels = false;
  const nlohmann::json j = cfg;
  CHECK(j.get<SpectrogramConfig>() == cfg);
  CHECK(parse_style("mfcc") == SpectrogramStyle::kMfcc);
  VSC_CHECK_THROWS_KIND(parse_colormap("jet"), ErrorKind::kConfig);
}

}
