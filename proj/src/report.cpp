#include "vsc/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vsc/colormap.hpp"
#include "vsc/error.hpp"
#include "vsc/png.hpp"

namespace vsc {

const char* to_string(Accounting a) {
  return a == Accounting::kAllItems ? "all_items" : "answered";
}

Accounting parse_accounting(const std::string& s) {
  if (s == "all_items" || s == "all") return Accounting::kAllItems;
  if (s == "answered") return Accounting::kAnswered;
  throw Error(ErrorKind::kConfig, "unknown accounting convention '" + s + "'");
}

double headline_accuracy(const EvalResult& r, Accounting a) {
  return a == Accounting::kAllItems ? r.accuracy_all : r.accuracy_answered;
}

std::string confusion_table(const EvalResult& r) {
  std::size_t label_w = 5;
  for (const auto& c : r.classes) label_w = std::max(label_w, c.size());
  const std::size_t k = r.classes.size();
  std::ostringstream out;
  auto pad = [&](const std::string& s, std::size_t w) {
    return s + std::string(w > s.size() ? w - s.size() : 0, ' ');
  };
  out << pad("truth", label_w);
  for (std::size_t j = 0; j < k; ++j) {
    char buf[32];
    std::snprintf(buf, sizeof buf, " %5zu", j);
    out << buf;
  }
  out << "  total\n";
  for (std::size_t i = 0; i < k; ++i) {
    out << pad(r.classes[i], label_w);
    int total = 0;
    for (std::size_t j = 0; j < k; ++j) {
      char buf[32];
      std::snprintf(buf, sizeof buf, " %5d", r.confusion[i][j]);
      out << buf;
      total += r.confusion[i][j];
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "  %5d", total);
    out << buf << '\n';
  }
  out << "\ncolumns:";
  for (std::size_t j = 0; j < k; ++j) out << ' ' << j << '=' << r.classes[j];
  out << '\n';
  return out.str();
}

RgbImage confusion_heatmap(const EvalResult& r, ColormapName cmap) {
  const int k = static_cast<int>(r.classes.size());
  int label_w = 0;
  for (const auto& c : r.classes) label_w = std::max(label_w, text_width(c));
  const int left = label_w + 8;
  const int top = 6;
  const int bottom = text_height() + 8;
  const int cell = kConfusionCellPx;
  RgbImage img(left + k * cell + 6, top + k * cell + bottom);
  int peak = 0;
  for (const auto& row : r.confusion) {
    for (int v : row) peak = std::max(peak, v);
  }
  const Rgb black{0, 0, 0};
  for (int i = 0; i < k; ++i) {
    draw_text(img, left - 4 - text_width(r.classes[i]), top + i * cell + (cell - text_height()) / 2,
              r.classes[i], black);
    for (int j = 0; j < k; ++j) {
      const double v = peak > 0 ? static_cast<double>(r.confusion[i][j]) / peak : 0.0;
      img.fill_rect(left + j * cell, top + i * cell, left + (j + 1) * cell, top + (i + 1) * cell,
                    colormap_lookup(v, cmap));
    }
  }
  for (int j = 0; j < k; ++j) {
    const std::string idx = std::to_string(j);
    draw_text(img, left + j * cell + (cell - text_width(idx)) / 2, top + k * cell + 4, idx, black);
  }
  return img;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  write_text_file(path, doc.dump(2) + "\n");
}

void write_report(const std::filesystem::path& dir, const EvalResult& result, Accounting accounting,
                  const nlohmann::json& extra) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json summary = extra;
  summary["accounting"] = to_string(accounting);
  summary["headline_accuracy"] = headline_accuracy(result, accounting);
  summary["result"] = result;
  write_json_file(dir / "summary.json", summary);
  write_text_file(dir / "confusion.txt", confusion_table(result));
  write_binary_file(dir / "confusion.png", encode_png(confusion_heatmap(result)));
}

}  // namespace vsc
