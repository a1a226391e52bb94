#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vsc/dsp.hpp"
#include "vsc/eval.hpp"
#include "vsc/image.hpp"

namespace vsc {

enum class Accounting { kAllItems, kAnswered };
const char* to_string(Accounting a);
Accounting parse_accounting(const std::string& s);

double headline_accuracy(const EvalResult& r, Accounting a);

/// Fixed-width table, rows = truth, columns = prediction, with row totals.
std::string confusion_table(const EvalResult& r);

inline constexpr int kConfusionCellPx = 24;

/// Cells colored by count / global max count.
RgbImage confusion_heatmap(const EvalResult& r, ColormapName cmap = ColormapName::kViridis);

/// Writes summary.json, confusion.txt and confusion.png into `dir`. `extra` is
/// merged into the summary document. Throws kIo if the directory cannot be
/// written.
void write_report(const std::filesystem::path& dir, const EvalResult& result, Accounting accounting,
                  const nlohmann::json& extra = nlohmann::json::object());

/// Writes `doc` with sorted keys and two-space indentation, newline-terminated.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_binary_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace vsc
