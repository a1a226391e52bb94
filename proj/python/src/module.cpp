#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "vsc/colormap.hpp"
#include "vsc/dsp.hpp"
#include "vsc/error.hpp"
#include "vsc/eval.hpp"
#include "vsc/kmeans.hpp"
#include "vsc/png.hpp"
#include "vsc/render.hpp"
#include "vsc/vlm.hpp"

namespace py = pybind11;
using vsc::SpectrogramConfig;

namespace {

using Samples = py::array_t<double, py::array::c_style | py::array::forcecast>;

vsc::AudioClip to_clip(const Samples& samples, int sample_rate_hz) {
  if (samples.ndim() != 1) throw vsc::Error(vsc::ErrorKind::kConfig, "samples must be one-dimensional");
  vsc::AudioClip clip;
  clip.samples.assign(samples.data(), samples.data() + samples.size());
  clip.sample_rate_hz = sample_rate_hz;
  return clip;
}

SpectrogramConfig to_config(const py::dict& overrides) {
  nlohmann::json j = SpectrogramConfig{};
  const auto patch = nlohmann::json::parse(py::str(py::module_::import("json").attr("dumps")(overrides)).cast<std::string>());
  j.merge_patch(patch);
  SpectrogramConfig cfg = j.get<SpectrogramConfig>();
  vsc::validate(cfg);
  return cfg;
}

py::array_t<double> to_array(const vsc::SpectrogramMatrix& m) {
  py::array_t<double> out({m.n_bins, m.n_frames});
  std::copy(m.values.begin(), m.values.end(), out.mutable_data());
  return out;
}

py::array_t<std::uint8_t> to_array(const vsc::RgbImage& img) {
  py::array_t<std::uint8_t> out({img.height(), img.width(), 3});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

std::vector<vsc::PredictionRecord> to_records(const std::vector<std::optional<std::string>>& labels) {
  std::vector<vsc::PredictionRecord> out;
  out.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    vsc::PredictionRecord r;
    r.item.filename = "item" + std::to_string(i);
    r.predicted = labels[i];
    r.status = labels[i] ? vsc::ResponseStatus::kOk : vsc::ResponseStatus::kUnparseable;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  py::register_exception<vsc::Error>(m, "VscError", PyExc_ValueError);

  m.def("default_config", [] { return py::module_::import("json").attr("loads")(nlohmann::json(SpectrogramConfig{}).dump()); });

  m.def("stft_magnitude",
        [](const Samples& x, int sr, const py::dict& cfg) { return to_array(vsc::stft_magnitude(to_clip(x, sr), to_config(cfg))); },
        py::arg("samples"), py::arg("sample_rate_hz"), py::arg("config") = py::dict());
  m.def("mel_spectrogram",
        [](const Samples& x, int sr, const py::dict& cfg) { return to_array(vsc::mel_spectrogram(to_clip(x, sr), to_config(cfg))); },
        py::arg("samples"), py::arg("sample_rate_hz"), py::arg("config") = py::dict());
  m.def("mfcc",
        [](const Samples& x, int sr, const py::dict& cfg) { return to_array(vsc::mfcc(to_clip(x, sr), to_config(cfg))); },
        py::arg("samples"), py::arg("sample_rate_hz"), py::arg("config") = py::dict());
  m.def("spectrogram",
        [](const Samples& x, int sr, const py::dict& cfg) {
          return to_array(vsc::compute_spectrogram(to_clip(x, sr), to_config(cfg)));
        },
        py::arg("samples"), py::arg("sample_rate_hz"), py::arg("config") = py::dict());

  m.def("mel_filterbank",
        [](int sr, int n_fft, int n_mels, double fmax) {
          const auto fb = vsc::mel_filterbank(sr, n_fft, n_mels, fmax);
          py::array_t<double> out({n_mels, n_fft / 2 + 1});
          std::copy(fb.begin(), fb.end(), out.mutable_data());
          return out;
        },
        py::arg("sample_rate_hz"), py::arg("n_fft"), py::arg("n_mels"), py::arg("fmax_hz"));
  m.def("hz_to_mel", &vsc::hz_to_mel);
  m.def("mel_to_hz", &vsc::mel_to_hz);

  m.def("colormap_lookup",
        [](double v, const std::string& name) {
          const auto c = vsc::colormap_lookup(v, name);
          return py::make_tuple(c.r, c.g, c.b);
        },
        py::arg("value"), py::arg("name") = "viridis");
  m.def("colormap_table", [](const std::string& name) {
    const auto& t = vsc::colormap_table(vsc::parse_colormap(name));
    py::array_t<double> out({256, 3});
    auto* p = out.mutable_data();
    for (const auto& row : t) p = std::copy(row.begin(), row.end(), p);
    return out;
  });

  m.def("render_clip",
        [](const Samples& x, int sr, const py::dict& cfg, const std::string& clip_id) {
          const auto config = to_config(cfg);
          auto r = vsc::render(vsc::compute_spectrogram(to_clip(x, sr), config), config, clip_id);
          return py::make_tuple(py::bytes(reinterpret_cast<const char*>(r.image_bytes.data()), r.image_bytes.size()),
                                r.config_hash);
        },
        py::arg("samples"), py::arg("sample_rate_hz"), py::arg("config") = py::dict(), py::arg("clip_id") = "");
  m.def("decode_png", [](const py::bytes& png) {
    const std::string s = png;
    return to_array(vsc::decode_png({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}));
  });
  m.def("corpus_hash", [](const py::dict& cfg) { return vsc::corpus_hash(to_config(cfg)); }, py::arg("config") = py::dict());

  m.def("parse_label",
        [](const std::string& raw, const std::vector<std::string>& classes, bool salvage) {
          vsc::ParseOptions opts;
          opts.salvage = salvage;
          const auto p = vsc::parse_label(raw, classes, opts);
          return py::make_tuple(p.label, vsc::to_string(p.status));
        },
        py::arg("raw"), py::arg("classes"), py::arg("salvage") = true);

  m.def("cohen_kappa",
        [](const std::vector<std::optional<std::string>>& a, const std::vector<std::optional<std::string>>& b) {
          return vsc::cohen_kappa(to_records(a), to_records(b));
        });

  m.def("kmeans",
        [](const std::vector<std::vector<double>>& points, int k, std::uint64_t seed) {
          const auto r = vsc::kmeans(points, k, seed);
          return py::make_tuple(r.centroids, r.assignments, r.inertia);
        },
        py::arg("points"), py::arg("k"), py::arg("seed") = 0);
}
