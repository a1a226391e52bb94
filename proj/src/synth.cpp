#include "vsc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "vsc/error.hpp"
#include "vsc/report.hpp"
#include "vsc/rng.hpp"
#include "vsc/wav.hpp"

namespace vsc {

const std::vector<SynthClass>& synthetic_classes() {
  static const std::vector<SynthClass> kClasses = {
      {"dog", 0},         {"chainsaw", 41},   {"crackling_fire", 12}, {"helicopter", 40},
      {"rain", 10},       {"crying_baby", 20}, {"clock_tick", 38},    {"sneezing", 21},
      {"rooster", 1},     {"sea_waves", 11}};
  return kClasses;
}

std::vector<ClipMeta> synthetic_manifest() {
  std::vector<ClipMeta> rows;
  int source = 100000;
  for (const auto& c : synthetic_classes()) {
    for (int fold = 1; fold <= 5; ++fold) {
      for (int i = 0; i < 8; ++i) {
        ClipMeta m;
        m.fold = fold;
        m.target = c.target;
        m.category = c.category;
        m.esc10 = true;
        m.filename = std::to_string(fold) + "-" + std::to_string(source++) + "-A-" +
                     std::to_string(c.target) + ".wav";
        rows.push_back(std::move(m));
      }
    }
  }
  return rows;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Synth {
  Rng rng;
  double sr;
  std::vector<double> out;

  double uni(double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }
  double noise() { return 2.0 * rng.uniform() - 1.0; }

  void harmonic(double t0, double dur, double f0, double f1, int n_harm, double amp,
                double vibrato_hz = 0.0, double vibrato_depth = 0.0) {
    const auto a = static_cast<std::size_t>(std::max(0.0, t0 * sr));
    const auto n = static_cast<std::size_t>(dur * sr);
    double phase = 0.0;
    for (std::size_t i = 0; i < n && a + i < out.size(); ++i) {
      const double t = static_cast<double>(i) / sr;
      const double frac = t / dur;
      double f = f0 + (f1 - f0) * frac;
      f *= 1.0 + vibrato_depth * std::sin(kTwoPi * vibrato_hz * t);
      phase += kTwoPi * f / sr;
      const double env = std::sin(std::numbers::pi * frac);
      double s = 0.0;
      for (int h = 1; h <= n_harm; ++h) {
        if (f * h >= sr / 2) break;
        s += std::sin(h * phase) / h;
      }
      out[a + i] += amp * env * s;
    }
  }

  void burst(double t0, double dur, double amp, double smooth, double decay) {
    const auto a = static_cast<std::size_t>(std::max(0.0, t0 * sr));
    const auto n = static_cast<std::size_t>(dur * sr);
    double lp = 0.0;
    for (std::size_t i = 0; i < n && a + i < out.size(); ++i) {
      lp += smooth * (noise() - lp);
      const double t = static_cast<double>(i) / sr;
      out[a + i] += amp * lp * std::exp(-decay * t);
    }
  }
};

void one_pole_lowpass(std::vector<double>& x, double alpha) {
  double y = 0.0;
  for (double& v : x) {
    y += alpha * (v - y);
    v = y;
  }
}

}  // namespace

AudioClip synthesize_clip(const ClipMeta& meta, int sample_rate_hz, std::uint64_t seed) {
  if (sample_rate_hz <= 0) throw Error(ErrorKind::kConfig, "sample rate must be positive");
  Synth s{Rng(salted_seed(seed, meta.filename)), static_cast<double>(sample_rate_hz), {}};
  const double dur = kClipSeconds;
  s.out.assign(static_cast<std::size_t>(std::lround(dur * s.sr)), 0.0);
  const std::string& c = meta.category;

  if (c == "dog") {
    const int barks = 2 + static_cast<int>(s.rng.below(4));
    const double f0 = s.uni(350, 650);
    for (int b = 0; b < barks; ++b) {
      const double t = s.uni(0.1, 4.6);
      s.harmonic(t, s.uni(0.12, 0.25), f0 * 1.2, f0 * 0.8, 12, 0.35);
      s.burst(t, 0.08, 0.15, 0.5, 20.0);
    }
  } else if (c == "chainsaw") {
    const double f0 = s.uni(90, 150);
    const double start = s.uni(0.0, 1.0);
    const double rev = s.uni(0.2, 0.6);
    s.harmonic(start, dur - start, f0, f0 * (1.0 + s.uni(-0.2, 0.3)), 40, 0.25, rev, 0.08);
    s.burst(start, dur - start, 0.08, 0.8, 0.0);
  } else if (c == "crackling_fire") {
    s.burst(0.0, dur, 0.05, 0.02, 0.0);
    const int pops = 30 + static_cast<int>(s.rng.below(60));
    for (int p = 0; p < pops; ++p) s.burst(s.uni(0.0, 4.95), s.uni(0.002, 0.01), s.uni(0.2, 0.8), 0.9, 400.0);
  } else if (c == "helicopter") {
    const double blade = s.uni(4.0, 8.0);
    std::vector<double> base(s.out.size());
    for (double& v : base) v = s.noise();
    one_pole_lowpass(base, s.uni(0.01, 0.03));
    for (std::size_t i = 0; i < s.out.size(); ++i) {
      const double t = static_cast<double>(i) / s.sr;
      const double pulse = std::pow(0.5 + 0.5 * std::cos(kTwoPi * blade * t), 4.0);
      s.out[i] += 3.0 * base[i] * (0.2 + pulse);
    }
    s.harmonic(0.0, dur, s.uni(60, 90), s.uni(60, 90), 6, 0.05);
  } else if (c == "rain") {
    const double level = s.uni(0.1, 0.3);
    for (double& v : s.out) v += level * s.noise();
    const int drops = static_cast<int>(s.rng.below(40));
    for (int d = 0; d < drops; ++d) s.burst(s.uni(0.0, 4.95), 0.01, s.uni(0.1, 0.3), 0.7, 300.0);
  } else if (c == "crying_baby") {
    const double f0 = s.uni(380, 520);
    double t = s.uni(0.0, 0.5);
    while (t < dur - 0.3) {
      const double len = s.uni(0.6, 1.3);
      s.harmonic(t, std::min(len, dur - t), f0 * s.uni(0.95, 1.1), f0 * s.uni(0.8, 1.0), 10, 0.3,
                 s.uni(5, 8), 0.03);
      t += len + s.uni(0.2, 0.6);
    }
  } else if (c == "clock_tick") {
    const double period = s.uni(0.4, 1.0);
    for (double t = s.uni(0.0, period); t < dur - 0.05; t += period) {
      s.burst(t, 0.015, 0.6, 0.95, 500.0);
    }
    for (double& v : s.out) v += 0.005 * s.noise();
  } else if (c == "sneezing") {
    const int n = 1 + static_cast<int>(s.rng.below(2));
    for (int k = 0; k < n; ++k) {
      const double t = s.uni(0.3, 3.8);
      s.harmonic(t, 0.3, s.uni(250, 400), s.uni(500, 700), 6, 0.15);
      s.burst(t + 0.3, s.uni(0.25, 0.45), 0.6, s.uni(0.3, 0.7), 6.0);
    }
  } else if (c == "rooster") {
    const double f0 = s.uni(450, 650);
    const double t = s.uni(0.2, 2.5);
    s.harmonic(t, 0.35, f0, f0 * 1.5, 10, 0.3);
    s.harmonic(t + 0.35, s.uni(0.8, 1.4), f0 * 1.5, f0 * 1.1, 10, 0.3, 6.0, 0.02);
  } else if (c == "sea_waves") {
    const double rate = s.uni(0.1, 0.35);
    const double phase = s.uni(0.0, kTwoPi);
    std::vector<double> base(s.out.size());
    for (double& v : base) v = s.noise();
    one_pole_lowpass(base, s.uni(0.05, 0.15));
    for (std::size_t i = 0; i < s.out.size(); ++i) {
      const double t = static_cast<double>(i) / s.sr;
      s.out[i] += base[i] * (0.25 + 0.75 * std::pow(0.5 + 0.5 * std::sin(kTwoPi * rate * t + phase), 2.0));
    }
  } else {
    throw Error(ErrorKind::kConfig, "no synthetic texture for category '" + c + "'");
  }

  const double floor_level = s.uni(0.002, 0.01);
  double peak = 0.0;
  for (double& v : s.out) {
    v += floor_level * s.noise();
    peak = std::max(peak, std::abs(v));
  }
  const double gain = s.uni(0.3, 0.9) / std::max(peak, 1e-9);
  for (double& v : s.out) v *= gain;

  AudioClip clip;
  clip.samples = std::move(s.out);
  clip.sample_rate_hz = sample_rate_hz;
  clip.source = meta;
  return clip;
}

std::vector<ClipMeta> write_synthetic_dataset(const std::filesystem::path& root,
                                              int sample_rate_hz, std::uint64_t seed) {
  const auto rows = synthetic_manifest();
  std::filesystem::create_directories(root / "audio");
  std::filesystem::create_directories(root / "meta");
  for (const auto& m : rows) {
    const AudioClip clip = synthesize_clip(m, sample_rate_hz, seed);
    write_wav(root / "audio" / m.filename, WavData{sample_rate_hz, 1, clip.samples});
  }
  write_text_file(root / "meta" / "esc50.csv", format_manifest(rows));
  return rows;
}

}  // namespace vsc
